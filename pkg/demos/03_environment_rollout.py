"""One scripted episode of the environment, end to end.

Drives the desk scenario with hand-written heuristics instead of learned
policies: UAVs head for their end points, the surface creeps toward the
corridor, and the precoder matches the current channels.  Prints a short
per-slot table and the newline-delimited log record of the final slot.
"""

import json

import numpy as np

from sixdma_isac import IsacEnv, desk_scenario

scenario = desk_scenario()
env = IsacEnv(scenario, scheme=1)
env.reset(seed=0)
obs = env.observations()

print(f"{'slot':>4} {'sum rate':>9} {'mean SNR':>9} {'power mW':>9} {'eps1':>5}")
for _ in range(scenario.num_slots):
    if env.is_pose_slot():
        # nudge the surface toward the UAV corridor, no rotation
        env.apply_6dma_action(np.zeros(3), np.array([1.0, 0.0, 0.5]))

    # UAV heuristic: fly straight at the end point, slowing on approach
    uav_actions = np.zeros((scenario.num_uavs, 4))
    max_step = scenario.v_max * scenario.slot_duration
    for m in range(scenario.num_uavs):
        to_end = scenario.uav_ends[m] - env.state.uav_positions[m]
        norm = np.linalg.norm(to_end)
        uav_actions[m, :3] = to_end / norm if norm > 1e-9 else 0.0
        uav_actions[m, 3] = 2.0 * min(norm / max_step, 1.0) - 1.0

    # beam heuristic: match the current communication channels, then map
    # the complex precoder back onto the raw interleaved action format
    h_uav, _ = env._channels()
    w = np.stack(
        [np.sqrt(scenario.p_max / scenario.num_uavs) * h / np.linalg.norm(h) for h in h_uav],
        axis=1,
    )
    scale = np.sqrt(scenario.p_max / (2 * scenario.num_antennas * scenario.num_uavs))
    entries = (w / scale).T.reshape(-1)
    beam_action = np.empty(2 * entries.size)
    beam_action[0::2] = entries.real
    beam_action[1::2] = entries.imag
    beam_action = np.clip(beam_action, -1.0, 1.0)

    outcome = env.step_slot(uav_actions, beam_action)
    obs = env.observations()
    print(
        f"{outcome.slot:>4} {outcome.metrics.sum_rate:>9.3f} {outcome.mean_target_snr:>9.3f} "
        f"{outcome.metrics.tx_power * 1e3:>9.2f} {outcome.epsilon1:>5}"
    )

print("\nfinal-slot NDJSON record:")
print(json.dumps(env.episode_record(outcome), indent=2)[:600], "...")
print("\nUAV distance to end points:",
      np.round(np.linalg.norm(env.state.uav_positions - scenario.uav_ends, axis=1), 2))
