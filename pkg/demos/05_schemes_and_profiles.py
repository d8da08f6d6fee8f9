"""Benchmark scheme restrictions and the latency profiler.

Scheme ids: 1 full pose freedom, 2 same physics with per-agent critics,
3 rotation only, 4 circular center movement only, 5 fixed antenna.  The
demo pushes an identical aggressive pose action through every scheme and
prints what the environment actually applies, then profiles agent
forward latency in the table layout used by the harness.
"""

import numpy as np

from sixdma_isac import AgentRoster, IsacEnv, desk_scenario, desk_train_config, profile_latency
from sixdma_isac.harness import format_profile_table

scenario = desk_scenario()
delta = np.radians([10.0, -10.0, 10.0])
center_raw = np.array([1.0, 1.0, 0.0])

print("identical pose action under each scheme:")
for scheme in (1, 2, 3, 4, 5):
    env = IsacEnv(scenario, scheme=scheme)
    env.reset(seed=0)
    update = env.apply_6dma_action(delta, center_raw)
    angles = np.degrees(update.pose.angles)
    print(
        f"  scheme {scheme}: center {np.round(update.pose.center, 2).tolist()}, "
        f"angles {np.round(angles, 1).tolist()} deg, blocked={bool(update.epsilon2)}"
    )

print("\nfreshly initialized roster, forward-latency profile:")
roster = AgentRoster(scenario, desk_train_config())
rows = profile_latency(roster, calls=2000, seed=0)
print(format_profile_table(rows))
print("\n(the harness 'profile' subcommand runs 10k calls per agent on a trained run)")
