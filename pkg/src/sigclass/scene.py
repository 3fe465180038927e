"""2.5D urban scene model: extruded building footprints plus receiver positions.

Scene file schema (meters, local ENU):

    { "scene_id": str,
      "buildings": [ { "footprint": [[x, y], ...], "height": h } ],
      "receivers": [ { "id": str, "pos": [x, y, z] } ] }
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import SceneError


@dataclass(frozen=True)
class Building:
    footprint: tuple[tuple[float, float], ...]  # counter-clockwise, simple
    height: float


@dataclass(frozen=True)
class Receiver:
    id: str
    pos: tuple[float, float, float]


def _signed_area(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    x2, y2 = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * float(np.sum(x * y2 - x2 * y))


def _segments_intersect(a, b, c, d) -> bool:
    """Proper intersection of open segments ab and cd."""
    def cross(o, p, q):
        return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])

    d1 = cross(c, d, a)
    d2 = cross(c, d, b)
    d3 = cross(a, b, c)
    d4 = cross(a, b, d)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def _point_in_polygon(px, py, verts) -> bool:
    inside = False
    n = len(verts)
    j = n - 1
    for i in range(n):
        xi, yi = verts[i]
        xj, yj = verts[j]
        if (yi > py) != (yj > py):
            xint = xi + (py - yi) * (xj - xi) / (yj - yi)
            if px < xint:
                inside = not inside
        j = i
    return inside


class UrbanScene:
    """Immutable scene with precomputed facade/roof arrays for the ray kernels.

    Attributes (read-only):
        facades: (m, 5) float64 rows [x1, y1, x2, y2, height]
        facade_building: (m,) building index per facade
        roof_offsets / roof_verts / roof_heights: ragged roof polygons
    """

    def __init__(self, scene_id: str, buildings, receivers):
        self.scene_id = str(scene_id)
        self.buildings = tuple(buildings)
        self.receivers = tuple(receivers)
        self._validate()
        self._build_arrays()

    def _validate(self):
        for bi, b in enumerate(self.buildings):
            pts = np.asarray(b.footprint, dtype=np.float64)
            if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
                raise SceneError(f"building {bi}: footprint needs >= 3 [x, y] vertices")
            if not np.all(np.isfinite(pts)) or not np.isfinite(b.height):
                raise SceneError(f"building {bi}: non-finite geometry")
            if b.height <= 0:
                raise SceneError(f"building {bi}: height must be > 0")
            if _signed_area(pts) <= 0:
                raise SceneError(f"building {bi}: footprint must be counter-clockwise")
            n = pts.shape[0]
            edges = [(tuple(pts[i]), tuple(pts[(i + 1) % n])) for i in range(n)]
            for i in range(n):
                for j in range(i + 1, n):
                    if j == i + 1 or (i == 0 and j == n - 1):
                        continue  # adjacent edges share a vertex
                    if _segments_intersect(*edges[i], *edges[j]):
                        raise SceneError(f"building {bi}: self-intersecting footprint")
        for r in self.receivers:
            x, y, z = r.pos
            for bi, b in enumerate(self.buildings):
                if z < b.height and _point_in_polygon(x, y, b.footprint):
                    raise SceneError(f"receiver {r.id} inside building {bi}")

    def _build_arrays(self):
        facades = []
        facade_building = []
        roof_offsets = [0]
        roof_verts = []
        roof_heights = []
        for bi, b in enumerate(self.buildings):
            pts = list(b.footprint)
            n = len(pts)
            for i in range(n):
                x1, y1 = pts[i]
                x2, y2 = pts[(i + 1) % n]
                facades.append((x1, y1, x2, y2, b.height))
                facade_building.append(bi)
            roof_verts.extend(pts)
            roof_offsets.append(len(roof_verts))
            roof_heights.append(b.height)
        self.facades = np.array(facades, dtype=np.float64).reshape(-1, 5)
        self.facade_building = np.array(facade_building, dtype=np.int64)
        self.roof_offsets = np.array(roof_offsets, dtype=np.int64)
        self.roof_verts = np.array(roof_verts, dtype=np.float64).reshape(-1, 2)
        self.roof_heights = np.array(roof_heights, dtype=np.float64)

    @property
    def n_facades(self) -> int:
        return self.facades.shape[0]

    def to_dict(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "buildings": [
                {"footprint": [[float(x), float(y)] for x, y in b.footprint],
                 "height": float(b.height)}
                for b in self.buildings
            ],
            "receivers": [
                {"id": r.id, "pos": [float(c) for c in r.pos]} for r in self.receivers
            ],
        }

    @staticmethod
    def from_dict(data: dict) -> "UrbanScene":
        try:
            buildings = [
                Building(
                    footprint=tuple((float(x), float(y)) for x, y in b["footprint"]),
                    height=float(b["height"]),
                )
                for b in data["buildings"]
            ]
            receivers = [
                Receiver(id=str(r["id"]), pos=tuple(float(c) for c in r["pos"]))
                for r in data["receivers"]
            ]
            return UrbanScene(data["scene_id"], buildings, receivers)
        except (KeyError, TypeError, ValueError) as e:
            raise SceneError(f"bad scene file: {e}") from None


def load_scene(path) -> UrbanScene:
    with open(path, "r", encoding="utf-8") as fh:
        return UrbanScene.from_dict(json.load(fh))


def save_scene(scene: UrbanScene, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scene.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
