"""Line-of-sight channel synthesis from geometry.

Directions are (elevation, azimuth) pairs in radians with elevation in
[-pi/2, pi/2] measured from the horizontal plane and azimuth in (-pi, pi]
measured from +X toward +Y.  Channel amplitudes follow the free-space
lambda/(4*pi*d) law with a single propagation phase on top of the
per-antenna array phases.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import SingularityError


class AnglePair(NamedTuple):
    elevation: float
    azimuth: float


def angles_from_positions(origin, target) -> AnglePair:
    """Elevation/azimuth of the direction from ``origin`` to ``target``.

    The zenith direction has unconstrained azimuth and returns azimuth 0.
    Coincident points raise ValueError.
    """
    o = np.asarray(origin, dtype=float)
    t = np.asarray(target, dtype=float)
    delta = t - o
    dist = float(np.linalg.norm(delta))
    if dist <= 0.0:
        raise ValueError("origin and target coincide; direction is undefined")
    elevation = float(np.arcsin(np.clip(delta[2] / dist, -1.0, 1.0)))
    azimuth = float(np.arctan2(delta[1], delta[0]))
    return AnglePair(elevation, azimuth)


def pointing_vector(angles: AnglePair) -> np.ndarray:
    """Unit vector [cos(el)cos(az), cos(el)sin(az), sin(el)]."""
    el, az = angles
    ce = np.cos(el)
    return np.array([ce * np.cos(az), ce * np.sin(az), np.sin(el)])


def array_response(direction, antenna_positions, wavelength: float) -> np.ndarray:
    """Per-antenna unit-modulus phase factors for a plane wave.

    Parameters
    ----------
    direction : (3,) unit vector toward the far-field point.
    antenna_positions : (N, 3) global antenna positions in meters.
    wavelength : carrier wavelength in meters.

    Returns
    -------
    (N,) complex vector with entries exp(j * 2*pi/wavelength * f.p_n).
    """
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    f = np.asarray(direction, dtype=float)
    pos = np.atleast_2d(np.asarray(antenna_positions, dtype=float))
    phases = (2.0 * np.pi / wavelength) * (pos @ f)
    return np.exp(1j * phases)


def channel_vector(surface_center, target, antenna_positions, wavelength: float) -> np.ndarray:
    """LoS channel between the surface and one point target or receiver.

    The amplitude of every entry is wavelength/(4*pi*d) with d the
    center-to-target distance; the common propagation phase is
    exp(-j*2*pi*d/wavelength) and per-antenna phases come from
    :func:`array_response` evaluated along the center-to-target direction.
    """
    center = np.asarray(surface_center, dtype=float)
    tgt = np.asarray(target, dtype=float)
    delta = tgt - center
    dist = float(np.linalg.norm(delta))
    if dist <= 1e-12:
        raise SingularityError("target coincides with the surface center")
    direction = delta / dist
    amplitude = wavelength / (4.0 * np.pi * dist)
    phase = np.exp(-1j * 2.0 * np.pi * dist / wavelength)
    return amplitude * phase * array_response(direction, antenna_positions, wavelength)
