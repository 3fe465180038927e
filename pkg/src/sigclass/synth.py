"""Synthetic labeled-dataset generation.

Ground-truth labels come from the geometric labeler; C/N0 draws follow
per-class Gaussians with hard clamps so the class-conditional ranges hold for
any seed: LOS-only RHCP C/N0 stays in [36, 51] dB-Hz with a strictly positive
RHCP-LHCP difference, the multipath classes stay in [25, 51] dB-Hz.

A per-scene additive bias shifts every mean in that scene, which is what makes
datasets from unseen scenes drift away from the training feature domain.

Randomness is splittable: every draw comes from a child stream keyed by
(seed, scene, receiver, satellite, epoch), so output does not depend on
iteration order or scheduling.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import direction_from_az_el, label_condition
from .ingest import build_dataset, stratified_subsample
from .scene import UrbanScene
from .types import Dataset, FeatureVector, LabeledSample, Provenance, SignalClass


@dataclass(frozen=True)
class ClassCn0:
    """C/N0 draw parameters for one reception condition."""

    rhcp_mean: float
    rhcp_elev_gain: float  # added as gain * sin(elevation)
    rhcp_std: float
    rhcp_clamp: tuple[float, float]
    diff_mean: float
    diff_std: float
    diff_clamp: tuple[float, float]

    def __post_init__(self):
        if self.rhcp_std <= 0 or self.diff_std <= 0:
            raise ValueError("stddevs must be > 0")
        if self.rhcp_clamp[0] >= self.rhcp_clamp[1] or self.diff_clamp[0] >= self.diff_clamp[1]:
            raise ValueError("clamp bounds must be ordered")


@dataclass(frozen=True)
class Cn0Model:
    per_class: dict[SignalClass, ClassCn0] = field(default_factory=lambda: dict(DEFAULT_CLASS_CN0))
    scene_bias_std: float = 1.5

    def __post_init__(self):
        if set(self.per_class) != set(SignalClass):
            raise ValueError("per_class must cover all three classes")
        if self.per_class[SignalClass.LOS_ONLY].diff_clamp[0] <= 0:
            raise ValueError("LOS-only diff lower clamp must be > 0")
        if self.scene_bias_std < 0:
            raise ValueError("scene_bias_std must be >= 0")

    def to_dict(self) -> dict:
        return {
            "scene_bias_std": self.scene_bias_std,
            "per_class": {
                cls.label: {
                    "rhcp_mean": p.rhcp_mean,
                    "rhcp_elev_gain": p.rhcp_elev_gain,
                    "rhcp_std": p.rhcp_std,
                    "rhcp_clamp": list(p.rhcp_clamp),
                    "diff_mean": p.diff_mean,
                    "diff_std": p.diff_std,
                    "diff_clamp": list(p.diff_clamp),
                }
                for cls, p in self.per_class.items()
            },
        }

    @staticmethod
    def from_dict(data: dict) -> "Cn0Model":
        per_class = {}
        for label, p in data["per_class"].items():
            per_class[SignalClass.from_label(label)] = ClassCn0(
                rhcp_mean=float(p["rhcp_mean"]),
                rhcp_elev_gain=float(p["rhcp_elev_gain"]),
                rhcp_std=float(p["rhcp_std"]),
                rhcp_clamp=tuple(float(v) for v in p["rhcp_clamp"]),
                diff_mean=float(p["diff_mean"]),
                diff_std=float(p["diff_std"]),
                diff_clamp=tuple(float(v) for v in p["diff_clamp"]),
            )
        return Cn0Model(
            per_class=per_class,
            scene_bias_std=float(data.get("scene_bias_std", 1.5)),
        )


DEFAULT_CLASS_CN0 = {
    SignalClass.LOS_ONLY: ClassCn0(
        rhcp_mean=38.0, rhcp_elev_gain=9.0, rhcp_std=2.0, rhcp_clamp=(36.0, 51.0),
        diff_mean=7.0, diff_std=2.5, diff_clamp=(0.5, 15.0),
    ),
    SignalClass.NLOS_ONLY: ClassCn0(
        rhcp_mean=33.0, rhcp_elev_gain=0.0, rhcp_std=5.0, rhcp_clamp=(25.0, 51.0),
        diff_mean=-1.0, diff_std=3.0, diff_clamp=(-10.0, 8.0),
    ),
    SignalClass.LOS_NLOS: ClassCn0(
        rhcp_mean=40.0, rhcp_elev_gain=0.0, rhcp_std=5.0, rhcp_clamp=(25.0, 51.0),
        diff_mean=3.0, diff_std=4.0, diff_clamp=(-8.0, 14.0),
    ),
}


def load_cn0_model(path) -> Cn0Model:
    with open(path, "r", encoding="utf-8") as fh:
        return Cn0Model.from_dict(json.load(fh))


def keyed_rng(seed: int, *parts) -> np.random.Generator:
    """Child generator keyed by (seed, parts); independent of iteration order."""
    digest = hashlib.sha256("\x1f".join(str(p) for p in parts).encode("utf-8")).digest()
    words = np.frombuffer(digest[:16], dtype=np.uint32)
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, *map(int, words)])


def scene_bias_db(model: Cn0Model, scene_id: str, seed: int) -> float:
    rng = keyed_rng(seed, "scene-bias", scene_id)
    return float(rng.normal(0.0, model.scene_bias_std)) if model.scene_bias_std > 0 else 0.0


def sample_cn0(
    model: Cn0Model,
    label: SignalClass,
    elevation_deg: float,
    scene_bias_db: float,
    seed_stream: np.random.Generator,
) -> tuple[float, float]:
    """One (cn0_rhcp, cn0_lhcp) draw; clamps are applied after the bias."""
    p = model.per_class[label]
    mean = p.rhcp_mean + p.rhcp_elev_gain * math.sin(math.radians(elevation_deg))
    rhcp = float(
        np.clip(mean + scene_bias_db + seed_stream.normal(0.0, p.rhcp_std), *p.rhcp_clamp)
    )
    diff = float(
        np.clip(p.diff_mean + scene_bias_db + seed_stream.normal(0.0, p.diff_std), *p.diff_clamp)
    )
    return rhcp, rhcp - diff


def generate_samples(
    scene: UrbanScene,
    model: Cn0Model,
    satellites,
    epochs: int,
    seed: int,
    epoch_start: float = 0.0,
    epoch_step: float = 1.0,
) -> list[LabeledSample]:
    """Uncapped labeled samples over (receiver, satellite, epoch) cells.

    satellites: iterable of (sat_id, azimuth_deg, elevation_deg). Cells whose
    geometric condition is NoSignal are skipped.
    """
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    bias = scene_bias_db(model, scene.scene_id, seed)
    samples = []
    for receiver in scene.receivers:
        for sat_id, az, el in satellites:
            gt = label_condition(scene, receiver.pos, direction_from_az_el(az, el))
            label = gt.signal_class
            if label is None:
                continue
            for e in range(epochs):
                epoch = epoch_start + e * epoch_step
                rng = keyed_rng(seed, "cn0", scene.scene_id, receiver.id, sat_id, repr(epoch))
                rhcp, lhcp = sample_cn0(model, label, el, bias, rng)
                samples.append(
                    LabeledSample(
                        features=FeatureVector(
                            elevation_deg=float(el),
                            cn0_rhcp_dbhz=rhcp,
                            cn0_diff_dbhz=rhcp - lhcp,
                        ),
                        label=label,
                        provenance=Provenance(
                            scene_id=scene.scene_id, epoch=epoch, sat_id=sat_id
                        ),
                    )
                )
    return samples


def generate_dataset(
    scene: UrbanScene,
    model: Cn0Model,
    satellites,
    epochs: int,
    per_class_cap: int | None,
    seed: int,
    partition_tag: str = "",
    epoch_start: float = 0.0,
) -> Dataset:
    """Labeled dataset from one scene, optionally capped per class."""
    samples = generate_samples(scene, model, satellites, epochs, seed, epoch_start)
    dataset = build_dataset(samples, partition_tag)
    if per_class_cap is not None:
        dataset = stratified_subsample(dataset, per_class_cap, seed)
    return dataset


def generate_multi_scene_dataset(
    scenes,
    model: Cn0Model,
    satellites,
    epochs: int,
    per_class_cap: int | None,
    seed: int,
    partition_tag: str = "",
    epoch_start: float = 0.0,
) -> Dataset:
    """Concatenate several scenes' samples (scene order preserved), then cap."""
    samples: list[LabeledSample] = []
    for scene in scenes:
        samples.extend(generate_samples(scene, model, satellites, epochs, seed, epoch_start))
    dataset = build_dataset(samples, partition_tag)
    if per_class_cap is not None:
        dataset = stratified_subsample(dataset, per_class_cap, seed)
    return dataset
