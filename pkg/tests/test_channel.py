import numpy as np
import pytest

from sixdma_isac.channel import (
    AnglePair,
    angles_from_positions,
    array_response,
    channel_vector,
    pointing_vector,
)
from sixdma_isac.errors import SingularityError


def reference_channel(center, target, positions, wavelength):
    """Straight-line oracle: evaluates every term of the LoS model with
    scalar arithmetic, independent of the vectorized implementation."""
    center = np.asarray(center, float)
    target = np.asarray(target, float)
    d = float(np.sqrt(((target - center) ** 2).sum()))
    f = (target - center) / d
    entries = []
    for p in np.asarray(positions, float):
        phase = 2.0 * np.pi / wavelength * (f[0] * p[0] + f[1] * p[1] + f[2] * p[2])
        g = complex(np.cos(phase), np.sin(phase))
        scale = wavelength / (4.0 * np.pi * d) * complex(
            np.cos(-2.0 * np.pi * d / wavelength), np.sin(-2.0 * np.pi * d / wavelength)
        )
        entries.append(scale * g)
    return np.array(entries)


class TestAngles:
    def test_plus_x(self):
        el, az = angles_from_positions([0.0, 0.0, 0.0], [10.0, 0.0, 0.0])
        assert el == 0.0
        assert az == 0.0

    def test_zenith_has_azimuth_zero(self):
        el, az = angles_from_positions([0.0, 0.0, 0.0], [0.0, 0.0, 5.0])
        assert el == pytest.approx(np.pi / 2)
        assert az == 0.0

    def test_coincident_points_rejected(self):
        with pytest.raises(ValueError):
            angles_from_positions([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])

    def test_round_trip_recovers_unit_direction(self):
        rng = np.random.default_rng(17)
        for _ in range(300):
            a = rng.normal(size=3) * 40.0
            b = rng.normal(size=3) * 40.0
            if np.linalg.norm(b - a) < 1e-6:
                continue
            direct = (b - a) / np.linalg.norm(b - a)
            via_angles = pointing_vector(angles_from_positions(a, b))
            np.testing.assert_allclose(via_angles, direct, atol=1e-12)


class TestPointingVector:
    def test_reference_directions(self):
        np.testing.assert_allclose(pointing_vector(AnglePair(0.0, 0.0)), [1.0, 0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(pointing_vector(AnglePair(np.pi / 2, 1.3)), [0.0, 0.0, 1.0], atol=1e-12)

    def test_unit_norm(self):
        rng = np.random.default_rng(23)
        for _ in range(1000):
            f = pointing_vector(AnglePair(rng.uniform(-np.pi / 2, np.pi / 2), rng.uniform(-np.pi, np.pi)))
            assert abs(np.linalg.norm(f) - 1.0) <= 1e-12


class TestArrayResponse:
    def test_orthogonal_direction_gives_all_ones(self):
        positions = np.array([[0.0, 0.3, 0.0], [0.0, -0.3, 0.0]])
        out = array_response([1.0, 0.0, 0.0], positions, 0.125)
        np.testing.assert_allclose(out, [1.0 + 0.0j, 1.0 + 0.0j], atol=1e-15)

    def test_half_wavelength_path_flips_sign(self):
        wavelength = 0.125
        out = array_response([1.0, 0.0, 0.0], [[wavelength / 2.0, 0.0, 0.0]], wavelength)
        np.testing.assert_allclose(out[0], -1.0 + 0.0j, atol=1e-12)

    def test_unit_modulus(self):
        rng = np.random.default_rng(29)
        for _ in range(200):
            f = rng.normal(size=3)
            f /= np.linalg.norm(f)
            positions = rng.normal(size=(5, 3))
            out = array_response(f, positions, 0.125)
            np.testing.assert_allclose(np.abs(out), 1.0, atol=1e-12)

    def test_conjugates_under_direction_flip(self):
        rng = np.random.default_rng(31)
        f = rng.normal(size=3)
        f /= np.linalg.norm(f)
        positions = rng.normal(size=(4, 3))
        fwd = array_response(f, positions, 0.125)
        back = array_response(-f, positions, 0.125)
        np.testing.assert_allclose(back, fwd.conj(), atol=1e-12)


class TestChannelVector:
    wavelength = 0.125

    def test_entry_modulus_is_free_space_amplitude(self):
        rng = np.random.default_rng(37)
        center = np.array([0.0, 0.0, 200.0])
        target = np.array([40.0, -30.0, 150.0])
        positions = center + rng.normal(size=(4, 3)) * 0.3
        h = channel_vector(center, target, positions, self.wavelength)
        d = np.linalg.norm(target - center)
        np.testing.assert_allclose(np.abs(h), self.wavelength / (4 * np.pi * d), rtol=1e-12)

    def test_distance_equal_to_wavelength_has_unit_propagation_phase(self):
        center = np.zeros(3)
        target = np.array([self.wavelength, 0.0, 0.0])
        positions = np.array([[0.0, 0.1, 0.0]])
        h = channel_vector(center, target, positions, self.wavelength)
        g = array_response([1.0, 0.0, 0.0], positions, self.wavelength)
        np.testing.assert_allclose(h, g / (4 * np.pi), atol=1e-12)

    def test_matches_straight_line_oracle(self):
        rng = np.random.default_rng(41)
        for _ in range(50):
            center = rng.normal(size=3) * 10.0
            target = center + rng.normal(size=3) * 100.0
            positions = center + rng.normal(size=(6, 3)) * 0.4
            got = channel_vector(center, target, positions, self.wavelength)
            want = reference_channel(center, target, positions, self.wavelength)
            np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-18)

    def test_doubling_distance_halves_amplitude(self):
        center = np.array([1.0, 2.0, 3.0])
        offset = np.array([30.0, -40.0, 10.0])
        positions = center + np.array([[0.0, 0.25, 0.0], [0.0, -0.25, 0.0]])
        near = channel_vector(center, center + offset, positions, self.wavelength)
        far = channel_vector(center, center + 2.0 * offset, positions, self.wavelength)
        np.testing.assert_allclose(np.abs(far), np.abs(near) / 2.0, rtol=1e-13)

    def test_global_rotation_preserves_moduli_and_relative_phases(self):
        rng = np.random.default_rng(43)
        from sixdma_isac.geometry import rotation_matrix

        center = np.array([0.0, 0.0, 200.0])
        target = np.array([60.0, 20.0, 260.0])
        positions = center + rng.normal(size=(4, 3)) * 0.4
        h = channel_vector(center, target, positions, self.wavelength)
        q = rotation_matrix(rng.uniform(-np.pi, np.pi, size=3))
        rot_positions = center + (positions - center) @ q.T
        rot_target = center + q @ (target - center)
        h_rot = channel_vector(center, rot_target, rot_positions, self.wavelength)
        np.testing.assert_allclose(np.abs(h_rot), np.abs(h), rtol=1e-10)
        np.testing.assert_allclose(h_rot * h_rot[0].conj(), h * h[0].conj(), rtol=1e-9, atol=1e-18)

    def test_target_at_center_is_singular(self):
        with pytest.raises(SingularityError):
            channel_vector([0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [[0.0, 0.1, 0.0]], self.wavelength)
