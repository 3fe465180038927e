"""Core data types: observation records, class labels, feature vectors, datasets."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field


class SignalClass(enum.IntEnum):
    """Signal reception condition, in fixed canonical order."""

    NLOS_ONLY = 0
    LOS_ONLY = 1
    LOS_NLOS = 2

    @property
    def label(self) -> str:
        return _CLASS_LABELS[self]

    @staticmethod
    def from_label(text: str) -> "SignalClass":
        try:
            return _LABEL_TO_CLASS[text]
        except KeyError:
            raise ValueError(f"unknown signal class label {text!r}") from None


_CLASS_LABELS = {
    SignalClass.NLOS_ONLY: "NLOS",
    SignalClass.LOS_ONLY: "LOS",
    SignalClass.LOS_NLOS: "LOS+NLOS",
}
_LABEL_TO_CLASS = {v: k for k, v in _CLASS_LABELS.items()}

CLASS_ORDER = (SignalClass.NLOS_ONLY, SignalClass.LOS_ONLY, SignalClass.LOS_NLOS)

# Week of GPS time in seconds; epochs are time-of-week.
GPS_WEEK_SECONDS = 604800.0

# C/N0 imputed for RHCP-only epochs where the LHCP channel failed to track.
LHCP_TRACKING_FLOOR_DBHZ = 25.0


def _check_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class ObservationRecord:
    """One epoch x satellite dual-polarized measurement."""

    epoch: float
    sat_id: str
    elevation_deg: float
    azimuth_deg: float
    cn0_rhcp_dbhz: float
    cn0_lhcp_dbhz: float
    lhcp_imputed: bool = False

    def __post_init__(self):
        for name in ("epoch", "elevation_deg", "azimuth_deg", "cn0_rhcp_dbhz", "cn0_lhcp_dbhz"):
            _check_finite(name, getattr(self, name))
        if not 0.0 <= self.epoch < GPS_WEEK_SECONDS:
            raise ValueError(f"epoch {self.epoch} outside [0, {GPS_WEEK_SECONDS})")
        if not 0.0 <= self.elevation_deg <= 90.0:
            raise ValueError(f"elevation_deg {self.elevation_deg} outside [0, 90]")
        if not 0.0 <= self.azimuth_deg < 360.0:
            raise ValueError(f"azimuth_deg {self.azimuth_deg} outside [0, 360)")
        for name in ("cn0_rhcp_dbhz", "cn0_lhcp_dbhz"):
            v = getattr(self, name)
            if not 10.0 <= v <= 60.0:
                raise ValueError(f"{name} {v} outside [10, 60]")


@dataclass(frozen=True)
class ChannelRecord:
    """Single-receiver (single-polarization) measurement, before pairing."""

    epoch: float
    sat_id: str
    elevation_deg: float
    azimuth_deg: float
    cn0_dbhz: float


@dataclass(frozen=True)
class FeatureVector:
    """The three classifier inputs: elevation, RHCP C/N0, RHCP-LHCP C/N0 difference."""

    elevation_deg: float
    cn0_rhcp_dbhz: float
    cn0_diff_dbhz: float

    def __post_init__(self):
        for name in ("elevation_deg", "cn0_rhcp_dbhz", "cn0_diff_dbhz"):
            _check_finite(name, getattr(self, name))
        if not 0.0 <= self.elevation_deg <= 90.0:
            raise ValueError(f"elevation_deg {self.elevation_deg} outside [0, 90]")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.elevation_deg, self.cn0_rhcp_dbhz, self.cn0_diff_dbhz)


@dataclass(frozen=True)
class Provenance:
    scene_id: str
    epoch: float
    sat_id: str


@dataclass(frozen=True)
class LabeledSample:
    features: FeatureVector
    label: SignalClass
    provenance: Provenance


@dataclass(frozen=True)
class Dataset:
    """Ordered labeled samples with a partition tag and cached class counts."""

    samples: tuple[LabeledSample, ...]
    partition_tag: str
    class_counts: dict[SignalClass, int] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        counts = count_classes(self.samples)
        if self.class_counts is None:
            object.__setattr__(self, "class_counts", counts)
        elif dict(self.class_counts) != counts:
            raise ValueError("class_counts inconsistent with samples")

    def __len__(self) -> int:
        return len(self.samples)


def count_classes(samples) -> dict[SignalClass, int]:
    counts = {c: 0 for c in CLASS_ORDER}
    for s in samples:
        counts[s.label] += 1
    return counts
