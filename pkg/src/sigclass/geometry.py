"""Ground-truth labeling: blockage and single-bounce specular reflection queries.

Satellites are treated as being at infinity, so every query takes a unit ENU
direction. Every facade reflects (no material model); a reception condition is
decided purely by path existence.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from . import kernels
from .scene import UrbanScene
from .types import SignalClass

# Ray-origin offset: hits closer than this to the start point are ignored.
RAY_EPS = 1e-6

_T_MAX = np.inf


class GroundTruth(enum.Enum):
    NLOS_ONLY = "NLOS"
    LOS_ONLY = "LOS"
    LOS_NLOS = "LOS+NLOS"
    NO_SIGNAL = "NONE"

    @property
    def signal_class(self) -> SignalClass | None:
        if self is GroundTruth.NO_SIGNAL:
            return None
        return SignalClass.from_label(self.value)


def direction_from_az_el(azimuth_deg: float, elevation_deg: float) -> np.ndarray:
    """Unit ENU vector toward (azimuth clockwise from north, elevation above horizon)."""
    az = math.radians(azimuth_deg)
    el = math.radians(elevation_deg)
    return np.array(
        [math.sin(az) * math.cos(el), math.cos(az) * math.cos(el), math.sin(el)],
        dtype=np.float64,
    )


def los_blocked(scene: UrbanScene, receiver, direction) -> bool:
    """True iff the direct ray hits any facade or roof."""
    return kernels.ray_hits(
        np.asarray(receiver, dtype=np.float64),
        np.asarray(direction, dtype=np.float64),
        scene.facades,
        scene.roof_offsets,
        scene.roof_verts,
        scene.roof_heights,
        RAY_EPS,
        _T_MAX,
    )


def reflection_exists(scene: UrbanScene, receiver, direction) -> bool:
    """True iff some facade admits an unobstructed single-bounce specular path.

    Image method: mirror the receiver across the facade plane, shoot the
    satellite direction from the image, and require the plane hit to land on
    the facade rectangle with both path legs clear of every other surface.
    """
    rx = np.asarray(receiver, dtype=np.float64)
    d = np.asarray(direction, dtype=np.float64)
    tol = kernels.PARAM_TOL
    for i in range(scene.n_facades):
        x1, y1, x2, y2, h = scene.facades[i]
        ex, ey = x2 - x1, y2 - y1
        elen2 = ex * ex + ey * ey
        nlen = math.sqrt(elen2)
        nx, ny = ey / nlen, -ex / nlen  # outward unit normal
        dist = nx * (rx[0] - x1) + ny * (rx[1] - y1)
        if dist <= 0.0:
            continue  # receiver behind or on the facade plane
        ddn = nx * d[0] + ny * d[1]
        if ddn <= 0.0:
            continue  # satellite cannot illuminate the front side
        # Image point is at plane coordinate -dist; hit where it returns to zero.
        t = dist / ddn
        q = np.array([rx[0] - 2.0 * dist * nx, rx[1] - 2.0 * dist * ny, rx[2]]) + t * d
        s = ((q[0] - x1) * ex + (q[1] - y1) * ey) / elen2
        if s < -tol or s > 1.0 + tol:
            continue
        zp = q[2] / h
        if zp < -tol or zp > 1.0 + tol:
            continue
        # Leg 1: receiver -> bounce point.
        seg = q - rx
        seg_len = float(np.linalg.norm(seg))
        if seg_len <= RAY_EPS:
            continue
        u = seg / seg_len
        if kernels.ray_hits(
            rx, u, scene.facades, scene.roof_offsets, scene.roof_verts,
            scene.roof_heights, RAY_EPS, seg_len - RAY_EPS, exclude_facade=i,
        ):
            continue
        # Leg 2: bounce point -> satellite.
        if kernels.ray_hits(
            q, d, scene.facades, scene.roof_offsets, scene.roof_verts,
            scene.roof_heights, RAY_EPS, _T_MAX, exclude_facade=i,
        ):
            continue
        return True
    return False


def label_condition(scene: UrbanScene, receiver, direction) -> GroundTruth:
    """Combine blockage and reflection into the reception condition."""
    blocked = los_blocked(scene, receiver, direction)
    refl = reflection_exists(scene, receiver, direction)
    if blocked:
        return GroundTruth.NLOS_ONLY if refl else GroundTruth.NO_SIGNAL
    return GroundTruth.LOS_NLOS if refl else GroundTruth.LOS_ONLY
