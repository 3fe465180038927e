"""End-to-end acceptance checks for the whole pipeline.

Each test covers one release criterion and prints a single PASS/FAIL line
(visible in the pytest output) in addition to asserting it.
"""

import json
import math
import time
from importlib import resources

import numpy as np
import pytest

from sigclass import cli
from sigclass.cart import TreeParams, dataset_matrix, fit
from sigclass.errors import SceneError
from sigclass.geometry import direction_from_az_el, los_blocked, reflection_exists
from sigclass.ingest import load_catalog, validate_catalog
from sigclass.scene import Building, Receiver, UrbanScene
from sigclass.synth import Cn0Model, DEFAULT_CLASS_CN0, keyed_rng, sample_cn0
from sigclass.types import SignalClass

from .oracles import (
    fit_oracle,
    los_blocked_oracle,
    model_as_tuples,
    reflection_oracle,
    trees_equal,
)
from .test_cart import random_dataset


def report(capsys, name, ok, detail):
    line = f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    with capsys.disabled():
        print(line)
    assert ok, line


@pytest.fixture(scope="session")
def pipeline(tmp_path_factory):
    """Full default pipeline at seed 42: synth, train on T0, evaluate."""
    out = tmp_path_factory.mktemp("acceptance")
    start = time.monotonic()
    assert cli.main(["synth", "--out", str(out)]) == 0
    assert cli.main(["train", str(out / "T0.csv"), "--out", str(out)]) == 0
    assert cli.main(["evaluate", str(out / "model.json"), str(out / "T1.csv"),
                     "--out", str(out)]) == 0
    assert cli.main(["evaluate", str(out / "model.json"), str(out / "T2.csv"),
                     str(out / "T3.csv"), "--out", str(out)]) == 0
    elapsed = time.monotonic() - start
    reports = {
        tag: json.loads((out / f"report_{tag}.json").read_text())
        for tag in ("T1", "T2", "T3", "T2+T3")
    }
    return {"dir": out, "elapsed": elapsed, "reports": reports}


def test_acceptance_1_tree_induction_matches_exhaustive_oracle(capsys):
    start = time.monotonic()
    rng = np.random.default_rng(1001)
    mismatches = 0
    for _ in range(200):
        ds = random_dataset(rng, int(rng.integers(3, 13)))
        params = TreeParams(
            max_depth=int(rng.integers(1, 3)),
            min_samples_split=int(rng.choice([2, 3, 4])),
            min_samples_leaf=int(rng.choice([1, 2, 3])),
            min_impurity_decrease=float(rng.choice([0.0, 0.05])),
        )
        model = fit(ds, params, with_fingerprint=False)
        X, y = dataset_matrix(ds)
        if not trees_equal(model_as_tuples(model), fit_oracle(X, y, params), 1e-12):
            mismatches += 1
    elapsed = time.monotonic() - start
    report(capsys, "1 tree-vs-oracle", mismatches == 0 and elapsed < 10.0,
           f"200 datasets, {mismatches} mismatches, {elapsed:.1f}s")


def _random_scene(rng):
    n_b = int(rng.integers(1, 6))
    buildings = []
    for _ in range(n_b):
        cx, cy = rng.uniform(-40.0, 40.0, size=2)
        hw, hl = rng.uniform(3.0, 15.0, size=2)
        th = rng.uniform(0.0, math.pi)
        c, s = math.cos(th), math.sin(th)
        corners = [(-hw, -hl), (hw, -hl), (hw, hl), (-hw, hl)]  # CCW
        fp = tuple((cx + c * x - s * y, cy + s * x + c * y) for x, y in corners)
        buildings.append(Building(fp, float(rng.uniform(5.0, 40.0))))
    while True:
        pos = (float(rng.uniform(-10.0, 10.0)), float(rng.uniform(-10.0, 10.0)), 1.5)
        try:
            return UrbanScene("rand", buildings, [Receiver("r1", pos)])
        except SceneError:
            continue  # receiver landed inside a building; redraw


def test_acceptance_2_geometry_matches_sampling_oracles(capsys):
    start = time.monotonic()
    rng = np.random.default_rng(2002)
    disagreements = 0
    checked = 0
    for _ in range(50):
        scene = _random_scene(rng)
        rx = scene.receivers[0].pos
        for _ in range(100):
            d = direction_from_az_el(
                float(rng.uniform(0.0, 360.0)), float(rng.uniform(2.0, 88.0))
            )
            checked += 1
            if los_blocked(scene, rx, d) != los_blocked_oracle(scene, rx, d):
                disagreements += 1
            if reflection_exists(scene, rx, d) != reflection_oracle(scene, rx, d):
                disagreements += 1
    elapsed = time.monotonic() - start
    report(capsys, "2 geometry-vs-oracle", disagreements == 0 and elapsed < 60.0,
           f"{checked} queries, {disagreements} disagreements, {elapsed:.1f}s")


def test_acceptance_3_cn0_draws_respect_class_envelopes(capsys):
    model = Cn0Model()
    rng = np.random.default_rng(3003)
    ok = True
    details = []
    for cls in SignalClass:
        rhcp = np.empty(10000)
        diff = np.empty(10000)
        for i in range(10000):
            bias = float(rng.normal(0.0, model.scene_bias_std))
            stream = keyed_rng(42, "acceptance", cls.label, i)
            r, l = sample_cn0(model, cls, float(rng.uniform(0.0, 90.0)), bias, stream)
            rhcp[i], diff[i] = r, r - l
        neg_frac = float(np.mean(diff < 0.0))
        if cls is SignalClass.LOS_ONLY:
            cls_ok = bool(np.all(rhcp >= 36.0) and np.all(rhcp <= 51.0)
                          and np.all(diff > 0.0))
        else:
            cls_ok = bool(np.all(rhcp >= 25.0) and np.all(rhcp <= 51.0)
                          and neg_frac >= 0.05)
        ok = ok and cls_ok
        details.append(f"{cls.label}: rhcp [{rhcp.min():.1f}, {rhcp.max():.1f}], "
                       f"{100 * neg_frac:.0f}% neg diffs")
    report(capsys, "3 cn0-envelopes", ok, "; ".join(details))


def test_acceptance_4_cross_scene_accuracy_drop(capsys, pipeline):
    r = pipeline["reports"]
    t1 = r["T1"]["overall_accuracy"]
    t2 = r["T2"]["overall_accuracy"]
    t3 = r["T3"]["overall_accuracy"]
    pooled = r["T2+T3"]["overall_accuracy"]
    ok = (
        t1 >= 0.80
        and t2 <= t1 - 0.05
        and t3 <= t1 - 0.05
        and pooled >= 0.55
        and pipeline["elapsed"] < 120.0
    )
    report(capsys, "4 accuracy-protocol", ok,
           f"T1={t1:.4f} T2={t2:.4f} T3={t3:.4f} pooled={pooled:.4f}, "
           f"pipeline {pipeline['elapsed']:.1f}s")


def test_acceptance_5_per_class_recall_ordering(capsys, pipeline):
    recalls = pipeline["reports"]["T2+T3"]["per_class_recall"]
    ok = (
        recalls["LOS"] == max(recalls.values())
        and recalls["LOS+NLOS"] == min(recalls.values())
    )
    report(capsys, "5 recall-ordering", ok,
           ", ".join(f"{k}={v:.3f}" for k, v in recalls.items()))


def test_acceptance_6_pipeline_is_byte_deterministic(capsys, pipeline, tmp_path):
    out = tmp_path / "rerun"
    assert cli.main(["synth", "--out", str(out)]) == 0
    assert cli.main(["train", str(out / "T0.csv"), "--out", str(out)]) == 0
    assert cli.main(["evaluate", str(out / "model.json"), str(out / "T1.csv"),
                     "--out", str(out)]) == 0
    assert cli.main(["evaluate", str(out / "model.json"), str(out / "T2.csv"),
                     str(out / "T3.csv"), "--out", str(out)]) == 0
    names = ["T0.csv", "T1.csv", "T2.csv", "T3.csv", "catalog.json", "model.json",
             "report_T1.json", "report_T2.json", "report_T3.json", "report_T2+T3.json"]
    differing = [
        n for n in names
        if (out / n).read_bytes() != (pipeline["dir"] / n).read_bytes()
    ]
    report(capsys, "6 determinism", not differing,
           f"{len(names)} files compared, differing: {differing or 'none'}")


def test_acceptance_7_catalog_bookkeeping(capsys, pipeline):
    catalog = load_catalog(pipeline["dir"] / "catalog.json")
    validate_catalog(catalog)
    ok = (
        catalog["T0"]["total"] == 7500
        and all(v == 2500 for v in catalog["T0"]["class_counts"].values())
        and catalog["T1"]["total"] == 7500
    )
    # catalog totals must equal the generated files exactly
    for tag in ("T2", "T3"):
        rows = (pipeline["dir"] / f"{tag}.csv").read_text().count("\n") - 1
        ok = ok and catalog[tag]["total"] == rows
    # the committed reference catalog must validate, including its held-out
    # partition total 6311 = 2038 + 2195 + 2078
    ref = load_catalog(resources.files("sigclass").joinpath("data", "reference_counts.json"))
    validate_catalog(ref)
    ok = ok and ref["T2"]["total"] == 6311 == 2038 + 2195 + 2078
    report(capsys, "7 bookkeeping", ok,
           f"T0={catalog['T0']['total']} T2={catalog['T2']['total']} "
           f"T3={catalog['T3']['total']}, reference catalog valid")
