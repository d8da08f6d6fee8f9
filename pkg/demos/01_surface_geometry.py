"""Surface geometry walkthrough: rotations, antenna placement, blockage.

The movable surface is a small planar array on a rod: its center
translates inside a mobility box and its orientation accumulates
rotations about the global axes.  This demo builds a pose, places the
antennas in the world frame and checks which points sit in front of the
surface.
"""

import numpy as np

from sixdma_isac import (
    AntennaLayout,
    SurfacePose,
    global_antenna_positions,
    half_space_ok,
    rotation_matrix,
    square_grid_layout,
    surface_normal,
    validate_spacing,
)

# A 2x2 grid on a 1 m surface; antennas live in the local Y'Z' plane and
# the face normal is +X' before any rotation.
layout = square_grid_layout(n_side=2, side_length=1.0)
print("local antenna positions (m):")
print(layout.local_positions)
print("spacing ok at 0.125 m wavelength:", validate_spacing(layout, 0.125))

# Compose a rotation: note the chain order Rz @ Ry @ Rx.
angles = np.radians([0.0, -30.0, 45.0])
rot = rotation_matrix(angles)
print("\nrotation for (0, -30, 45) degrees:")
print(np.round(rot, 4))
print("orthonormality residual:", np.max(np.abs(rot @ rot.T - np.eye(3))))

# Pose the surface 20 m up and look where the antennas land.
pose = SurfacePose(np.array([0.0, 0.0, 20.0]), angles)
world = global_antenna_positions(pose, layout)
print("\nantennas in the world frame:")
print(np.round(world, 3))
normal = surface_normal(pose, layout)
print("face normal:", np.round(normal, 4))

# Blockage: a point behind the surface plane cannot be served.
candidates = np.array(
    [
        [30.0, 5.0, 25.0],   # in front
        [-20.0, 0.0, 25.0],  # behind
        pose.center + 10.0 * normal,  # straight ahead
    ]
)
for point in candidates:
    ok, margin = half_space_ok(pose, layout, [point])
    side = "front" if ok else "behind"
    print(f"point {np.round(point, 1)} -> {side} (margin {margin:+.2f} m)")
