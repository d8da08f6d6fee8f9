import numpy as np
import pytest

from sixdma_isac.isac import (
    db_to_linear,
    dbm_to_watts,
    link_metrics,
    project_power,
    sensing_snr,
    sensing_snr_quadratic,
    sinr,
    sum_rate,
    tx_power,
)


def naive_sinr(channels, precoder, noise):
    """Oracle: per-entry complex dot products with explicit python loops."""
    m_count = channels.shape[0]
    out = []
    for m in range(m_count):
        sig = abs(sum(np.conj(precoder[n, m]) * channels[m, n] for n in range(channels.shape[1]))) ** 2
        interf = 0.0
        for i in range(m_count):
            if i == m:
                continue
            interf += abs(sum(np.conj(precoder[n, i]) * channels[m, n] for n in range(channels.shape[1]))) ** 2
        out.append(sig / (interf + noise))
    return np.array(out)


def naive_sensing_snr(channels, precoder, noise):
    """Oracle: bilinear row-channel times beam, per-term loops."""
    out = []
    for j in range(channels.shape[0]):
        total = 0.0
        for m in range(precoder.shape[1]):
            total += abs(sum(channels[j, n] * precoder[n, m] for n in range(channels.shape[1]))) ** 2
        out.append(total / noise)
    return np.array(out)


def random_instance(rng, n=4, m=3, j=2):
    channels_uav = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    channels_tgt = rng.normal(size=(j, n)) + 1j * rng.normal(size=(j, n))
    precoder = rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))
    return channels_uav, channels_tgt, precoder


class TestSinr:
    def test_single_stream_has_no_interference(self):
        rng = np.random.default_rng(2)
        h = rng.normal(size=(1, 4)) + 1j * rng.normal(size=(1, 4))
        w = rng.normal(size=(4, 1)) + 1j * rng.normal(size=(4, 1))
        got = sinr(h, w, 1e-8)
        want = abs(np.vdot(w[:, 0], h[0])) ** 2 / 1e-8
        assert got[0] == pytest.approx(want, rel=1e-12)

    def test_orthogonal_interferer_changes_nothing(self):
        h = np.array([[1.0 + 0j, 0.0], [0.0, 1.0 + 0j]])
        w = np.array([[1.0 + 0j, 0.0], [0.0, 1.0 + 0j]])
        got = sinr(h, w, 1e-2)
        assert got[0] == pytest.approx(1.0 / 1e-2, rel=1e-12)

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            h, _, w = random_instance(rng)
            got = sinr(h, w, 1e-8)
            want = naive_sinr(h, w, 1e-8)
            np.testing.assert_allclose(got, want, rtol=1e-9)

    def test_common_phase_rotation_is_invisible(self):
        rng = np.random.default_rng(6)
        h, _, w = random_instance(rng)
        phase = np.exp(1j * 1.234)
        np.testing.assert_allclose(sinr(h * phase, w * phase, 1e-8), sinr(h, w, 1e-8), rtol=1e-10)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            sinr(np.zeros((2, 4), complex), np.zeros((3, 2), complex), 1.0)


class TestSumRate:
    def test_unit_sinr(self):
        assert sum_rate([1.0, 1.0, 1.0, 1.0]) == pytest.approx(4.0)

    def test_zero_sinr(self):
        assert sum_rate([0.0, 0.0]) == 0.0

    def test_powers_of_two(self):
        assert sum_rate([3.0, 7.0]) == pytest.approx(5.0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            sum_rate([-0.1])

    def test_strictly_increasing_per_entry(self):
        rng = np.random.default_rng(9)
        g = rng.uniform(0.0, 5.0, size=4)
        base = sum_rate(g)
        for m in range(4):
            bumped = g.copy()
            bumped[m] += 0.5
            assert sum_rate(bumped) > base


class TestSensingSnr:
    def test_zero_precoder(self):
        h = np.ones((2, 4), complex)
        np.testing.assert_array_equal(sensing_snr(h, np.zeros((4, 3), complex), 1e-8), [0.0, 0.0])

    def test_single_stream(self):
        rng = np.random.default_rng(12)
        h = rng.normal(size=(1, 4)) + 1j * rng.normal(size=(1, 4))
        w = rng.normal(size=(4, 1)) + 1j * rng.normal(size=(4, 1))
        want = abs(h[0] @ w[:, 0]) ** 2 / 1e-8
        assert sensing_snr(h, w, 1e-8)[0] == pytest.approx(want, rel=1e-12)

    def test_two_paths_agree(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            _, h, w = random_instance(rng)
            a = sensing_snr(h, w, 1e-8)
            b = sensing_snr_quadratic(h, w, 1e-8)
            np.testing.assert_allclose(a, b, rtol=1e-10)

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(14)
        for _ in range(100):
            _, h, w = random_instance(rng)
            np.testing.assert_allclose(sensing_snr(h, w, 1e-8), naive_sensing_snr(h, w, 1e-8), rtol=1e-9)

    def test_uniform_scaling_is_monotone(self):
        rng = np.random.default_rng(15)
        _, h, w = random_instance(rng)
        base = sensing_snr(h, w, 1e-8)
        scaled = sensing_snr(h, 1.7 * w, 1e-8)
        assert np.all(scaled >= base)
        np.testing.assert_allclose(scaled, base * 1.7**2, rtol=1e-10)


class TestPower:
    def test_zero(self):
        assert tx_power(np.zeros((4, 3), complex)) == 0.0

    def test_reference_column_hits_forty_milliwatts(self):
        w = np.full((4, 1), 0.1, dtype=complex)
        assert tx_power(w) == pytest.approx(0.04, rel=1e-12)

    def test_unitary_columns(self):
        w = np.eye(4, dtype=complex)[:, :3]
        assert tx_power(w) == pytest.approx(3.0)

    def test_projection_leaves_feasible_untouched(self):
        w = np.full((4, 1), 0.05, dtype=complex)  # power 0.01
        out = project_power(w, 0.04)
        assert out is w

    def test_projection_scales_to_budget(self):
        w = np.full((4, 1), 0.2, dtype=complex)  # power 0.16
        out = project_power(w, 0.04)
        np.testing.assert_allclose(out, w * 0.5, rtol=1e-12)
        assert tx_power(out) == pytest.approx(0.04, rel=1e-12)

    def test_projection_is_idempotent(self):
        rng = np.random.default_rng(19)
        w = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
        once = project_power(w, 0.04)
        twice = project_power(once, 0.04)
        np.testing.assert_allclose(twice, once, rtol=1e-12)

    def test_scaling_multiplies_power_quadratically(self):
        rng = np.random.default_rng(20)
        w = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
        assert tx_power(2.0 * w) == pytest.approx(4.0 * tx_power(w), rel=1e-12)


class TestConversions:
    def test_minus_fifty_dbm(self):
        assert dbm_to_watts(-50.0) == pytest.approx(1e-8, rel=1e-12)

    def test_one_db_linear(self):
        assert db_to_linear(1.0) == pytest.approx(1.2589, abs=1e-4)

    def test_forty_milliwatts(self):
        assert dbm_to_watts(10 * np.log10(40)) == pytest.approx(0.04, rel=1e-12)


class TestLinkMetrics:
    def test_aggregates_are_consistent(self):
        rng = np.random.default_rng(21)
        hc, hs, w = random_instance(rng)
        lm = link_metrics(hc, hs, w, 1e-8, 1e-8)
        assert lm.sum_rate == pytest.approx(sum_rate(lm.sinr_per_uav))
        assert lm.tx_power == pytest.approx(tx_power(w))
        assert lm.mean_target_snr == pytest.approx(float(np.mean(lm.snr_per_target)))


class TestAntennaPhaseReference:
    def test_global_vs_centered_positions_only_shift_a_common_phase(self):
        # array phases may be referenced to the global origin or to the
        # surface center; the difference is a common per-vector phase that
        # cancels in every SINR/SNR quantity
        from sixdma_isac.channel import channel_vector

        rng = np.random.default_rng(22)
        center = np.array([3.0, -7.0, 50.0])
        positions = center + rng.normal(size=(4, 3)) * 0.4
        uavs = center + rng.normal(size=(2, 3)) * 60.0
        targets = center + rng.normal(size=(2, 3)) * 40.0
        wavelength = 0.125
        h_global = np.stack([channel_vector(center, p, positions, wavelength) for p in uavs])
        h_centered = np.stack(
            [channel_vector(center, p, positions - center, wavelength) for p in uavs]
        )
        s_global = np.stack([channel_vector(center, p, positions, wavelength) for p in targets])
        s_centered = np.stack(
            [channel_vector(center, p, positions - center, wavelength) for p in targets]
        )
        w = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
        np.testing.assert_allclose(sinr(h_global, w, 1e-8), sinr(h_centered, w, 1e-8), rtol=1e-9)
        np.testing.assert_allclose(
            sensing_snr(s_global, w, 1e-8), sensing_snr(s_centered, w, 1e-8), rtol=1e-9
        )
        # per-row phase shift is common to all entries
        ratio = h_global[0] / h_centered[0]
        np.testing.assert_allclose(np.abs(ratio), 1.0, rtol=1e-12)
        np.testing.assert_allclose(ratio, ratio[0], rtol=1e-10)
