import numpy as np
import pytest

from sixdma_isac.env import IsacEnv, desk_scenario, benchmark_scenario
from sixdma_isac.hdrl import (
    AgentRoster,
    FastLayout,
    PendingPoseWindow,
    TrainConfig,
    centralized_critic_inputs,
    desk_train_config,
    evaluate,
    percentile_leq,
    profile_latency,
    train,
    _pose_transition,
)


def tiny_config(**overrides):
    base = dict(episodes=2, batch_size=8, hidden=(8, 8), explore_episodes=2,
                buffer_capacity=500, seed=0)
    base.update(overrides)
    return TrainConfig(**base)


class TestLayout:
    def test_benchmark_dimension_arithmetic(self):
        scenario = benchmark_scenario()
        roster = AgentRoster(scenario, tiny_config())
        # 4*(10+4) + 56 + 32
        assert roster.central_width == 144
        assert roster.obs_beam == 56
        assert roster.act_beam == 32
        assert roster.obs_pose == 15

    def test_build_order_and_slices(self):
        layout = FastLayout(num_uavs=2, obs_beam=3)
        uav_obs = np.arange(2 * 10).reshape(1, 2, 10) * 1.0
        uav_act = np.arange(2 * 4).reshape(1, 2, 4) + 100.0
        beam_obs = np.array([[200.0, 201.0, 202.0]])
        beam_act = np.array([[300.0, 301.0]])
        vec = layout.build(uav_obs, uav_act, beam_obs, beam_act)[0]
        assert vec.shape == (2 * 14 + 3 + 2,)
        np.testing.assert_array_equal(vec[layout.uav_obs_slice(0)], np.arange(10))
        np.testing.assert_array_equal(vec[layout.uav_act_slice(0)], [100, 101, 102, 103])
        np.testing.assert_array_equal(vec[layout.uav_obs_slice(1)], np.arange(10, 20))
        np.testing.assert_array_equal(vec[layout.beam_obs_slice()], [200, 201, 202])
        np.testing.assert_array_equal(vec[layout.beam_act_slice(2)], [300, 301])

    def test_permuting_agents_changes_vector(self):
        layout = FastLayout(num_uavs=2, obs_beam=3)
        rng = np.random.default_rng(0)
        uav_obs = rng.normal(size=(1, 2, 10))
        uav_act = rng.normal(size=(1, 2, 4))
        beam_obs = rng.normal(size=(1, 3))
        beam_act = rng.normal(size=(1, 2))
        vec = layout.build(uav_obs, uav_act, beam_obs, beam_act)
        swapped = layout.build(uav_obs[:, ::-1], uav_act[:, ::-1], beam_obs, beam_act)
        assert np.max(np.abs(vec - swapped)) > 0

    def test_functional_wrapper(self):
        layout = FastLayout(num_uavs=1, obs_beam=2)
        vec = centralized_critic_inputs(
            layout,
            (np.zeros((1, 1, 10)), np.ones((1, 2))),
            (np.zeros((1, 1, 4)), np.full((1, 3), 2.0)),
        )
        assert vec.shape == (1, 19)

    def test_scheme2_critic_views_are_own_only(self):
        scenario = desk_scenario()
        roster = AgentRoster(scenario, tiny_config(scheme=2))
        assert roster.uav_agents[0].critic_input_dim == 14
        assert roster.beam_agent.critic_input_dim == roster.obs_beam + roster.act_beam
        rng = np.random.default_rng(1)
        uav_obs = rng.normal(size=(4, 2, 10))
        uav_act = rng.normal(size=(4, 2, 4))
        beam_obs = rng.normal(size=(4, roster.obs_beam))
        beam_act = rng.normal(size=(4, roster.act_beam))
        central = roster.layout.build(uav_obs, uav_act, beam_obs, beam_act)
        view, act_slice = roster.critic_view(0, central, uav_obs, uav_act, beam_obs, beam_act)
        assert view.shape == (4, 14)
        np.testing.assert_array_equal(view[:, :10], uav_obs[:, 0])
        np.testing.assert_array_equal(view[:, act_slice], uav_act[:, 0])

    def test_scheme1_and_scheme2_share_actor_shapes(self):
        scenario = desk_scenario()
        r1 = AgentRoster(scenario, tiny_config(scheme=1))
        r2 = AgentRoster(scenario, tiny_config(scheme=2))
        assert r1.uav_agents[0].actor.dims == r2.uav_agents[0].actor.dims
        assert r1.beam_agent.actor.dims == r2.beam_agent.actor.dims
        assert r1.uav_agents[0].critic_input_dim != r2.uav_agents[0].critic_input_dim


class TestPoseWindow:
    def test_window_reward_mean_convention(self):
        env = IsacEnv(desk_scenario(num_uavs=1,
                                    uav_starts=[(15.0, 0.0, 20.0)],
                                    uav_ends=[(15.0, 10.0, 20.0)]))
        env.reset()
        pending = PendingPoseWindow(np.zeros(6), np.zeros(6), epsilon2=0)
        r0 = 2.0
        for _ in range(3):
            pending.add(r0, np.pi / 3)  # 60 degrees, M = 1
        transition, reward = _pose_transition(env, pending, np.zeros(6), 0.0)
        assert reward == pytest.approx(r0 + 0.5)
        assert transition["done"] == 0.0

    def test_blocked_window(self):
        env = IsacEnv(desk_scenario())
        env.reset()
        pending = PendingPoseWindow(np.zeros(9), np.zeros(6), epsilon2=1)
        pending.add(5.0, 0.1)
        _, reward = _pose_transition(env, pending, np.zeros(9), 1.0)
        delta5 = np.cos(0.1) / 2
        assert reward == pytest.approx(-10.0 + delta5)

    def test_truncated_window_mean(self):
        env = IsacEnv(desk_scenario())
        env.reset()
        pending = PendingPoseWindow(np.zeros(9), np.zeros(6), epsilon2=0)
        pending.add(4.0, 0.0)
        _, reward = _pose_transition(env, pending, np.zeros(9), 1.0)
        assert reward == pytest.approx(4.0 + 0.5)


class TestTrainLoop:
    def test_smoke_run_counts_windows_and_slots(self):
        scenario = desk_scenario()
        result = train(scenario, tiny_config(episodes=1))
        assert len(result.metrics) == 1
        assert result.fast_transitions == scenario.num_slots
        assert result.pose_transitions == len(scenario.pose_decision_slots())
        row = result.metrics[0]
        assert row.episode == 0
        assert np.isfinite(row.reward_beam)

    def test_transition_counts_scale_with_episodes(self):
        scenario = desk_scenario(num_slots=18, pose_update_period=4)
        result = train(scenario, tiny_config(episodes=3))
        # 18 slots -> decision slots {0,4,8,12,16}: 5 windows per episode
        assert result.pose_transitions == 3 * 5
        assert result.fast_transitions == 3 * 18

    def test_benchmark_scenario_smoke_has_six_decisions(self):
        scenario = benchmark_scenario()
        config = tiny_config(episodes=1, batch_size=4)
        result = train(scenario, config)
        assert result.scenario.pose_decision_slots() == [0, 10, 20, 30, 40, 50]
        assert len(result.metrics) == 1

    def test_determinism_same_seed(self):
        scenario = desk_scenario()
        r1 = train(scenario, tiny_config(episodes=2, seed=5))
        r2 = train(scenario, tiny_config(episodes=2, seed=5))
        assert [m.as_row() for m in r1.metrics] == [m.as_row() for m in r2.metrics]
        for (n1, a1), (n2, a2) in zip(r1.roster.all_agents(), r2.roster.all_agents()):
            assert n1 == n2
            for p, q in zip(a1.actor.parameters(), a2.actor.parameters()):
                np.testing.assert_array_equal(p, q)

    def test_different_seeds_differ(self):
        scenario = desk_scenario()
        r1 = train(scenario, tiny_config(episodes=1, seed=0))
        r2 = train(scenario, tiny_config(episodes=1, seed=1))
        assert [m.as_row() for m in r1.metrics] != [m.as_row() for m in r2.metrics]

    def test_scheme5_never_moves_pose(self):
        scenario = desk_scenario()
        records = []

        class Capture:
            def write(self, line):
                records.append(line)

        train(scenario, tiny_config(episodes=1, scheme=5), episode_log=Capture())
        import json

        for line in records:
            rec = json.loads(line)
            assert rec["surface_center"] == [0.0, 0.0, 20.0]
            assert rec["surface_angles"] == [0.0, 0.0, 0.0]

    def test_scheme1_scheme5_diff_only_in_pose(self):
        import json

        scenario = desk_scenario()

        def capture(scheme):
            records = []

            class Capture:
                def write(self, line):
                    records.append(json.loads(line))

            train(scenario, tiny_config(episodes=1, scheme=scheme), episode_log=Capture())
            return records

        rec1 = capture(1)
        rec5 = capture(5)
        pose_deltas_1 = any(
            r["surface_center"] != [0.0, 0.0, 20.0] or r["surface_angles"] != [0.0, 0.0, 0.0]
            for r in rec1
        )
        pose_deltas_5 = any(
            r["surface_center"] != [0.0, 0.0, 20.0] or r["surface_angles"] != [0.0, 0.0, 0.0]
            for r in rec5
        )
        assert pose_deltas_1 and not pose_deltas_5

    def test_actor_update_cadence(self):
        scenario = desk_scenario()
        config = tiny_config(episodes=3, batch_size=8)
        result = train(scenario, config)
        for _, agent in result.roster.fast_agents():
            expected = agent.critic_update_count // config.policy_delay
            assert agent.actor_update_count == expected

    def test_snapshot_resume_matches_straight_run(self, tmp_path):
        scenario = desk_scenario()
        config = tiny_config(episodes=4, seed=9)
        straight = train(scenario, config)
        snap_dir = tmp_path / "snap"
        train(scenario, tiny_config(episodes=2, seed=9), snapshot_dir=snap_dir, snapshot_interval=2)
        resumed = train(scenario, config, resume_from=snap_dir)
        assert [m.as_row() for m in straight.metrics] == [m.as_row() for m in resumed.metrics]
        for (_, a1), (_, a2) in zip(straight.roster.all_agents(), resumed.roster.all_agents()):
            for p, q in zip(a1.actor.parameters(), a2.actor.parameters()):
                np.testing.assert_array_equal(p, q)

    def test_prioritized_mode_runs(self):
        scenario = desk_scenario()
        result = train(scenario, tiny_config(episodes=1, prioritized_replay=True))
        assert len(result.metrics) == 1


@pytest.fixture(scope="module")
def trained():
    scenario = desk_scenario()
    return train(scenario, tiny_config(episodes=2))


class TestEvaluate:
    def test_row_and_aggregate_structure(self, trained):
        report = evaluate(trained.roster, trained.scenario, episodes=3, measure_latency=True)
        assert len(report["rows"]) == 3
        assert set(report["aggregate"]) >= {"sum_rate", "mean_snr", "snr_feasible_fraction"}
        assert len(report["latency_ms"]) == trained.scenario.num_uavs + 2
        for stats in report["latency_ms"].values():
            assert stats["p99_ms"] <= stats["max_ms"]

    def test_deterministic_given_seeds(self, trained):
        r1 = evaluate(trained.roster, trained.scenario, episodes=2, measure_latency=False)
        r2 = evaluate(trained.roster, trained.scenario, episodes=2, measure_latency=False)
        assert r1 == r2

    def test_trajectories_have_full_length(self, trained):
        report = evaluate(trained.roster, trained.scenario, episodes=1)
        traj = report["rows"][0]["trajectory"]
        assert len(traj) == trained.scenario.num_slots + 1
        assert len(traj[0]) == trained.scenario.num_uavs


class TestLatency:
    def test_percentile_definition(self):
        values = list(range(1, 101))
        assert percentile_leq(values, 0.99) == 99
        assert percentile_leq(values, 1.0) == 100
        assert percentile_leq([5.0], 0.99) == 5.0

    def test_profile_rows(self):
        scenario = desk_scenario()
        roster = AgentRoster(scenario, tiny_config())
        rows = profile_latency(roster, calls=200)
        assert [r["agent"] for r in rows] == ["uav_0", "uav_1", "beam", "sixdma"]
        for row in rows:
            assert row["p99_ms"] <= row["max_ms"]
            assert row["avg_ms"] <= row["max_ms"]
            assert row["calls"] == 200


class TestTrainConfig:
    def test_desk_preset(self):
        cfg = desk_train_config()
        assert cfg.episodes == 150 and cfg.batch_size == 64 and cfg.hidden == (64, 64)

    def test_round_trip(self):
        from sixdma_isac.hdrl import train_config_from_dict

        cfg = desk_train_config(seed=3, scheme=4)
        clone = train_config_from_dict(cfg.to_dict())
        assert clone == cfg

    def test_rejects_unknown_scheme(self):
        with pytest.raises(Exception):
            TrainConfig(scheme=7)
