"""Command-line pipeline: label -> synth -> train/tune -> predict/evaluate.

Exit codes: 0 success, 2 bad input, 3 generation failure, 4 training failure,
5 evaluation failure. Errors print a single line to stderr. Any flag can also
be supplied through a JSON config file (--config); explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from importlib import resources
from pathlib import Path

from . import cart, ingest, synth
from .evaluate import compare_partitions
from .errors import (
    CorruptModel,
    EmptyDataset,
    InsufficientClassSamples,
    SceneError,
    SigclassError,
)
from .geometry import direction_from_az_el, label_condition
from .scene import load_scene
from .types import SignalClass

EXIT_INPUT = 2
EXIT_GENERATION = 3
EXIT_TRAINING = 4
EXIT_EVALUATION = 5

GROUND_TRUTH_HEADER = "receiver_id,sat_id,azimuth_deg,elevation_deg,label"
PREDICTION_HEADER = "epoch,sat_id,label"
SATELLITE_HEADER = "sat_id,azimuth_deg,elevation_deg"

DEFAULT_SEED = 42
DEFAULT_EPOCHS = 10
DEFAULT_PER_CLASS_CAP = 2500
DEFAULT_TRAIN_PARAMS = cart.TreeParams(max_depth=8, min_samples_split=2, min_samples_leaf=5)


class CliError(Exception):
    def __init__(self, exit_code: int, message: str):
        self.exit_code = exit_code
        super().__init__(message)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_text(path, exit_code=EXIT_INPUT) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise CliError(exit_code, f"{path}: {e.strerror or e}") from None


def parse_satellite_csv(stream: str):
    """Rows of (sat_id, azimuth_deg, elevation_deg)."""
    lines = stream.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].strip() != SATELLITE_HEADER:
        raise SigclassError(f"satellite list must start with header {SATELLITE_HEADER!r}")
    sats = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise SigclassError(f"satellite list line {line_no}: expected 3 fields")
        try:
            az, el = float(parts[1]), float(parts[2])
        except ValueError:
            raise SigclassError(f"satellite list line {line_no}: non-numeric angle") from None
        if not (0.0 <= az < 360.0 and 0.0 <= el <= 90.0):
            raise SigclassError(f"satellite list line {line_no}: angle out of range")
        sats.append((parts[0].strip(), az, el))
    return sats


def _bundled(name: str) -> Path:
    return Path(resources.files("sigclass").joinpath("data", name))


def default_scene_paths() -> dict:
    return {
        "t0_scenes": [str(_bundled(f"scenes/{s}.json")) for s in ("A", "B", "C")],
        "t2_scene": str(_bundled("scenes/D.json")),
        "t3_scene": str(_bundled("scenes/E.json")),
        "satellites": str(_bundled("satellites.csv")),
    }


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise CliError(EXIT_INPUT, f"config {path}: {e}") from None
    if not isinstance(cfg, dict):
        raise CliError(EXIT_INPUT, f"config {path}: expected a JSON object")
    return cfg


def _opt(args, cfg: dict, name: str, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in cfg:
        return cfg[name]
    return default


def _tree_params(args, cfg) -> cart.TreeParams:
    raw = dict(cfg.get("tree_params", {}))
    if getattr(args, "max_depth", None) is not None:
        raw["max_depth"] = None if args.max_depth == 0 else args.max_depth
    if getattr(args, "min_samples_leaf", None) is not None:
        raw["min_samples_leaf"] = args.min_samples_leaf
    if getattr(args, "min_samples_split", None) is not None:
        raw["min_samples_split"] = args.min_samples_split
    if not raw:
        return DEFAULT_TRAIN_PARAMS
    base = DEFAULT_TRAIN_PARAMS.to_dict()
    base.update(raw)
    return cart.TreeParams.from_dict(base)


def _load_dataset(path, exit_code=EXIT_INPUT):
    tag = Path(path).stem
    try:
        return ingest.parse_dataset_csv(_read_text(path, exit_code), tag)
    except SigclassError as e:
        raise CliError(exit_code, f"{path}: {e}") from None


# --- subcommands ------------------------------------------------------------

def cmd_label(args, cfg) -> int:
    try:
        scene = load_scene(args.scene)
    except OSError as e:
        raise CliError(EXIT_INPUT, f"{args.scene}: {e.strerror or e}") from None
    except SceneError as e:
        raise CliError(EXIT_INPUT, f"{args.scene}: {e}") from None
    try:
        sats = parse_satellite_csv(_read_text(args.satellites))
    except SigclassError as e:
        raise CliError(EXIT_INPUT, f"{args.satellites}: {e}") from None

    lines = [GROUND_TRUTH_HEADER]
    for receiver in scene.receivers:
        for sat_id, az, el in sats:
            gt = label_condition(scene, receiver.pos, direction_from_az_el(az, el))
            lines.append(f"{receiver.id},{sat_id},{az!r},{el!r},{gt.value}")
    out = Path(_opt(args, cfg, "out", ".")) / f"{scene.scene_id}_labels.csv"
    _atomic_write(out, "\n".join(lines) + "\n")
    print(f"wrote {out}")
    return 0


def _synth_partitions(args, cfg):
    paths = default_scene_paths()
    for key in paths:
        paths[key] = _opt(args, cfg, key, paths[key])
    seed = int(_opt(args, cfg, "seed", DEFAULT_SEED))
    epochs = int(_opt(args, cfg, "epochs", DEFAULT_EPOCHS))
    cap = int(_opt(args, cfg, "per_class_cap", DEFAULT_PER_CLASS_CAP))

    model_path = _opt(args, cfg, "cn0_model", None)
    cn0 = synth.load_cn0_model(model_path) if model_path else synth.Cn0Model()

    try:
        t0_scenes = [load_scene(p) for p in paths["t0_scenes"]]
        t2_scene = load_scene(paths["t2_scene"])
        t3_scene = load_scene(paths["t3_scene"])
        sats = parse_satellite_csv(_read_text(paths["satellites"]))
    except (OSError, SceneError, SigclassError) as e:
        raise CliError(EXIT_INPUT, f"scene/satellite input: {e}") from None

    try:
        t0 = synth.generate_multi_scene_dataset(
            t0_scenes, cn0, sats, epochs, cap, seed, "T0", epoch_start=0.0
        )
        t1 = synth.generate_multi_scene_dataset(
            t0_scenes, cn0, sats, epochs, cap, seed, "T1", epoch_start=float(epochs)
        )
        # Cross-scene partitions are left uncapped; T3 gets a bigger epoch
        # budget so it lands well above the training-set size.
        t2 = synth.generate_dataset(
            t2_scene, cn0, sats, epochs, None, seed, "T2", epoch_start=0.0
        )
        t3 = synth.generate_dataset(
            t3_scene, cn0, sats, int(round(1.5 * epochs)), None, seed, "T3", epoch_start=0.0
        )
    except InsufficientClassSamples as e:
        raise CliError(EXIT_GENERATION, str(e)) from None
    return (t0, t1, t2, t3), seed


def cmd_synth(args, cfg) -> int:
    (t0, t1, t2, t3), _seed = _synth_partitions(args, cfg)
    out_dir = Path(_opt(args, cfg, "out", "."))
    catalog = {}
    for ds in (t0, t1, t2, t3):
        _atomic_write(out_dir / f"{ds.partition_tag}.csv", ingest.serialize_dataset_csv(ds))
        catalog[ds.partition_tag] = {
            "total": len(ds),
            "class_counts": {c.label: ds.class_counts[c] for c in SignalClass},
        }
        print(f"{ds.partition_tag}: {len(ds)} samples "
              + str({c.label: ds.class_counts[c] for c in SignalClass}))
    _atomic_write(out_dir / "catalog.json",
                  json.dumps(catalog, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_train(args, cfg) -> int:
    dataset = _load_dataset(args.dataset, EXIT_TRAINING)
    params = _tree_params(args, cfg)
    seed = int(_opt(args, cfg, "seed", DEFAULT_SEED))
    try:
        model = cart.fit(dataset, params, seed=seed)
    except EmptyDataset as e:
        raise CliError(EXIT_TRAINING, str(e)) from None
    out = Path(_opt(args, cfg, "out", ".")) / "model.json"
    _atomic_write(out, cart.model_to_json(model))
    print(f"trained on {len(dataset)} samples with {params.to_dict()}")
    print(f"wrote {out}")
    return 0


def cmd_tune(args, cfg) -> int:
    dataset = _load_dataset(args.dataset, EXIT_TRAINING)
    seed = int(_opt(args, cfg, "seed", DEFAULT_SEED))
    k = int(_opt(args, cfg, "k", 5))
    try:
        report = cart.grid_search(dataset, cart.default_grid(), k, seed)
        model = cart.fit(dataset, report.best, seed=seed)
    except (EmptyDataset, SigclassError) as e:
        raise CliError(EXIT_TRAINING, str(e)) from None
    out_dir = Path(_opt(args, cfg, "out", "."))
    _atomic_write(out_dir / "cv_report.json",
                  json.dumps(report.to_dict(), indent=1, sort_keys=True) + "\n")
    _atomic_write(out_dir / "model.json", cart.model_to_json(model))
    print(f"best params: {report.best.to_dict()}")
    return 0


def cmd_predict(args, cfg) -> int:
    try:
        model = cart.load_model(args.model)
    except CorruptModel as e:
        raise CliError(EXIT_EVALUATION, str(e)) from None
    try:
        records = ingest.parse_observation_csv(_read_text(args.observations))
    except SigclassError as e:
        raise CliError(EXIT_INPUT, f"{args.observations}: {e}") from None
    lines = [PREDICTION_HEADER]
    for r in records:
        label = model.predict(cart.extract_features(r))
        lines.append(f"{r.epoch!r},{r.sat_id},{label.label}")
    out = Path(_opt(args, cfg, "out", ".")) / "predictions.csv"
    _atomic_write(out, "\n".join(lines) + "\n")
    print(f"wrote {out}")
    return 0


def cmd_evaluate(args, cfg) -> int:
    try:
        model = cart.load_model(args.model)
    except CorruptModel as e:
        raise CliError(EXIT_EVALUATION, str(e)) from None
    partitions = [_load_dataset(p, EXIT_EVALUATION) for p in args.datasets]
    try:
        reports, pooled = compare_partitions(model, partitions)
    except (EmptyDataset, ValueError) as e:
        raise CliError(EXIT_EVALUATION, str(e)) from None
    out_dir = Path(_opt(args, cfg, "out", "."))
    for r in reports + [pooled]:
        _atomic_write(out_dir / f"report_{r.partition_tag}.json",
                      json.dumps(r.to_dict(), indent=1, sort_keys=True) + "\n")
        print(r.to_text())
        print()
    return 0


# --- argument parsing -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigclass",
        description="GPS signal reception condition classification pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; explicit flags win")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("label", help="ground-truth labels for a scene")
    p.add_argument("scene", help="scene JSON file")
    p.add_argument("satellites", help="satellite list CSV")
    common(p)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("synth", help="generate the T0/T1/T2/T3 synthetic datasets")
    common(p)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--per-class-cap", dest="per_class_cap", type=int, default=None)
    p.add_argument("--cn0-model", dest="cn0_model", default=None,
                   help="JSON file overriding the C/N0 draw parameters")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="fit a tree with fixed hyperparameters")
    p.add_argument("dataset", help="labeled-sample CSV")
    common(p)
    p.add_argument("--max-depth", dest="max_depth", type=int, default=None,
                   help="0 means unlimited")
    p.add_argument("--min-samples-leaf", dest="min_samples_leaf", type=int, default=None)
    p.add_argument("--min-samples-split", dest="min_samples_split", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tune", help="grid-search hyperparameters with stratified CV")
    p.add_argument("dataset", help="labeled-sample CSV")
    common(p)
    p.add_argument("--k", type=int, default=None)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("predict", help="classify an observation CSV")
    p.add_argument("model", help="model JSON file")
    p.add_argument("observations", help="observation CSV")
    common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="evaluate a model over dataset partitions")
    p.add_argument("model", help="model JSON file")
    p.add_argument("datasets", nargs="+", help="labeled-sample CSVs")
    common(p)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        return args.func(args, cfg)
    except CliError as e:
        print(f"sigclass: error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
