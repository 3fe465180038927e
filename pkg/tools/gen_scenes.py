"""Generate the bundled example scenes and satellite grid, and report
per-scene label yields. Run from the repo root:

    python3 tools/gen_scenes.py

Scenes are enclosed street courtyards (two side walls plus end caps) so that
elevation bands correlate strongly with the reception condition. The three
training scenes share scale and orientation; the two held-out scenes are
narrower, taller, rotated, and (for E) have receivers hugging a wall, which is
what produces the cross-scene accuracy drop.
"""

import math
from collections import Counter
from pathlib import Path

from sigclass.geometry import direction_from_az_el, label_condition
from sigclass.scene import Building, Receiver, UrbanScene, save_scene

DATA = Path(__file__).resolve().parents[1] / "src" / "sigclass" / "data"


def rot(points, deg):
    th = math.radians(deg)
    c, s = math.cos(th), math.sin(th)
    return tuple((c * x - s * y, s * x + c * y) for x, y in points)


def courtyard(scene_id, width, length, h, deg, receivers, h2=None):
    hw, hl = width / 2.0, length / 2.0
    h2 = h2 or h
    blocks = [
        (-hw - 25.0, -hl - 25.0, -hw, hl + 25.0, h),   # west wall
        (hw, -hl - 25.0, hw + 25.0, hl + 25.0, h2),    # east wall
        (-hw, hl, hw, hl + 25.0, h),                   # north cap
        (-hw, -hl - 25.0, hw, -hl, h2),                # south cap
    ]
    buildings = [
        Building(rot(((x0, y0), (x1, y0), (x1, y1), (x0, y1)), deg), hh)
        for x0, y0, x1, y1, hh in blocks
    ]
    rxs = [
        Receiver(f"r{i+1}", (*rot([(x, y)], deg)[0], z))
        for i, (x, y, z) in enumerate(receivers)
    ]
    return UrbanScene(scene_id, buildings, rxs)


def sat_grid():
    sats = []
    i = 0
    for el in range(5, 90, 5):
        for az in range(0, 360, 15):
            i += 1
            sats.append((f"S{i:03d}", float(az), float(el)))
    return sats


SCENES = {
    "A": courtyard("blockA01", 24.0, 60.0, 20.0, 0.0,
                   [(0.0, 0.0, 1.5), (-5.0, 14.0, 1.5), (4.0, -12.0, 1.5)]),
    "B": courtyard("blockB01", 26.0, 64.0, 22.0, 10.0,
                   [(0.0, 4.0, 1.5), (6.0, -10.0, 1.5), (-6.0, 16.0, 1.5)], h2=18.0),
    "C": courtyard("blockC01", 22.0, 56.0, 19.0, 350.0,
                   [(0.0, -6.0, 1.5), (-4.0, 10.0, 1.5), (5.0, 18.0, 1.5)], h2=23.0),
    "D": courtyard("blockD01", 16.0, 52.0, 24.0, 45.0,
                   [(0.0, 0.0, 1.5), (-6.5, 10.0, 1.5), (6.0, -12.0, 1.5)]),
    "E": courtyard("blockE01", 15.0, 44.0, 22.0, 90.0,
                   [(-4.5, -4.0, 1.5), (-5.0, 12.0, 1.5), (-4.7, -10.0, 1.5),
                    (-4.2, 2.0, 1.5)], h2=26.0),
}


def main():
    sats = sat_grid()
    (DATA / "scenes").mkdir(parents=True, exist_ok=True)
    lines = ["sat_id,azimuth_deg,elevation_deg"]
    lines += [f"{s},{az!r},{el!r}" for s, az, el in sats]
    (DATA / "satellites.csv").write_text("\n".join(lines) + "\n")

    for name, scene in SCENES.items():
        save_scene(scene, DATA / "scenes" / f"{name}.json")
        counts = Counter()
        for r in scene.receivers:
            for _sid, az, el in sats:
                gt = label_condition(scene, r.pos, direction_from_az_el(az, el))
                counts[gt.value] += 1
        total_cells = len(scene.receivers) * len(sats)
        print(f"scene {name} ({scene.scene_id}): cells={total_cells} {dict(counts)}")


if __name__ == "__main__":
    main()
