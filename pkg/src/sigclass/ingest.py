"""CSV parsing, stream pairing, and dataset construction.

Wire formats (all LF-terminated, '.' decimal point, no quoting):

* observation CSV: ``epoch,sat_id,elevation_deg,azimuth_deg,cn0_rhcp_dbhz,cn0_lhcp_dbhz``
* channel CSV (one receiver): same minus the opposite-polarization column
  (``cn0_dbhz``)
* labeled-sample CSV:
  ``scene_id,epoch,sat_id,elevation_deg,cn0_rhcp_dbhz,cn0_diff_dbhz,label``
  with label in {NLOS, LOS, LOS+NLOS}
"""

from __future__ import annotations

import bisect
import json
import math
from collections import defaultdict
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateKey,
    InsufficientClassSamples,
    MalformedRow,
    RangeViolation,
    UnsortedStream,
)
from .types import (
    GPS_WEEK_SECONDS,
    LHCP_TRACKING_FLOOR_DBHZ,
    ChannelRecord,
    Dataset,
    FeatureVector,
    LabeledSample,
    ObservationRecord,
    Provenance,
    SignalClass,
)

OBSERVATION_HEADER = "epoch,sat_id,elevation_deg,azimuth_deg,cn0_rhcp_dbhz,cn0_lhcp_dbhz"
CHANNEL_HEADER = "epoch,sat_id,elevation_deg,azimuth_deg,cn0_dbhz"
DATASET_HEADER = "scene_id,epoch,sat_id,elevation_deg,cn0_rhcp_dbhz,cn0_diff_dbhz,label"

DEFAULT_MAX_SKEW_S = 0.5

_RANGES = {
    "epoch": (0.0, GPS_WEEK_SECONDS, False),
    "elevation_deg": (0.0, 90.0, True),
    "azimuth_deg": (0.0, 360.0, False),
    "cn0_rhcp_dbhz": (10.0, 60.0, True),
    "cn0_lhcp_dbhz": (10.0, 60.0, True),
    "cn0_dbhz": (10.0, 60.0, True),
}


def _parse_float(token: str, line_no: int, field: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise MalformedRow(line_no, f"non-numeric {field}: {token!r}") from None
    if not math.isfinite(value):
        raise RangeViolation(line_no, field, value)
    lo, hi, hi_inclusive = _RANGES[field]
    if value < lo or value > hi or (value == hi and not hi_inclusive):
        raise RangeViolation(line_no, field, value)
    return value


def _split_rows(stream: str, header: str):
    lines = stream.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].strip() != header:
        raise MalformedRow(1, f"expected header {header!r}")
    n_fields = header.count(",") + 1
    for line_no, line in enumerate(lines[1:], start=2):
        if line.strip() == "":
            continue
        parts = line.split(",")
        if len(parts) != n_fields:
            raise MalformedRow(line_no, f"expected {n_fields} fields, got {len(parts)}")
        yield line_no, parts


def parse_observation_csv(stream: str) -> list[ObservationRecord]:
    """Parse a dual-polarized observation CSV into records, in file order."""
    records = []
    seen: set[tuple[float, str]] = set()
    for line_no, parts in _split_rows(stream, OBSERVATION_HEADER):
        epoch = _parse_float(parts[0], line_no, "epoch")
        sat_id = parts[1].strip()
        if not sat_id:
            raise MalformedRow(line_no, "empty sat_id")
        key = (epoch, sat_id)
        if key in seen:
            raise DuplicateKey(epoch, sat_id)
        seen.add(key)
        records.append(
            ObservationRecord(
                epoch=epoch,
                sat_id=sat_id,
                elevation_deg=_parse_float(parts[2], line_no, "elevation_deg"),
                azimuth_deg=_parse_float(parts[3], line_no, "azimuth_deg"),
                cn0_rhcp_dbhz=_parse_float(parts[4], line_no, "cn0_rhcp_dbhz"),
                cn0_lhcp_dbhz=_parse_float(parts[5], line_no, "cn0_lhcp_dbhz"),
            )
        )
    return records


def parse_channel_csv(stream: str) -> list[ChannelRecord]:
    """Parse a single-receiver channel CSV."""
    records = []
    seen: set[tuple[float, str]] = set()
    for line_no, parts in _split_rows(stream, CHANNEL_HEADER):
        epoch = _parse_float(parts[0], line_no, "epoch")
        sat_id = parts[1].strip()
        if not sat_id:
            raise MalformedRow(line_no, "empty sat_id")
        key = (epoch, sat_id)
        if key in seen:
            raise DuplicateKey(epoch, sat_id)
        seen.add(key)
        records.append(
            ChannelRecord(
                epoch=epoch,
                sat_id=sat_id,
                elevation_deg=_parse_float(parts[2], line_no, "elevation_deg"),
                azimuth_deg=_parse_float(parts[3], line_no, "azimuth_deg"),
                cn0_dbhz=_parse_float(parts[4], line_no, "cn0_dbhz"),
            )
        )
    return records


def serialize_observation_csv(records: Iterable[ObservationRecord]) -> str:
    """Inverse of parse_observation_csv; floats written with shortest round-trip repr."""
    lines = [OBSERVATION_HEADER]
    for r in records:
        lines.append(
            f"{r.epoch!r},{r.sat_id},{r.elevation_deg!r},{r.azimuth_deg!r},"
            f"{r.cn0_rhcp_dbhz!r},{r.cn0_lhcp_dbhz!r}"
        )
    return "\n".join(lines) + "\n"


def pair_receiver_streams(
    rhcp: Sequence[ChannelRecord],
    lhcp: Sequence[ChannelRecord],
    max_skew_s: float = DEFAULT_MAX_SKEW_S,
) -> list[ObservationRecord]:
    """Match RHCP and LHCP channel records into dual-polarized observations.

    Records are matched per satellite to the nearest LHCP epoch within
    ``max_skew_s``, keyed to the RHCP epoch. RHCP records with no LHCP match
    are kept with cn0_lhcp imputed to the tracking floor; LHCP-only records
    are dropped.
    """
    for name, stream in (("rhcp", rhcp), ("lhcp", lhcp)):
        epochs = [r.epoch for r in stream]
        if any(a > b for a, b in zip(epochs, epochs[1:])):
            raise UnsortedStream(f"{name} stream not sorted by epoch")

    lhcp_by_sat: dict[str, list[ChannelRecord]] = defaultdict(list)
    for rec in lhcp:
        lhcp_by_sat[rec.sat_id].append(rec)
    epochs_by_sat = {sat: [r.epoch for r in recs] for sat, recs in lhcp_by_sat.items()}

    out = []
    for rec in rhcp:
        match = None
        candidates = lhcp_by_sat.get(rec.sat_id)
        if candidates:
            epochs = epochs_by_sat[rec.sat_id]
            i = bisect.bisect_left(epochs, rec.epoch)
            best_gap = math.inf
            for j in (i - 1, i):
                if 0 <= j < len(candidates):
                    gap = abs(epochs[j] - rec.epoch)
                    if gap < best_gap:
                        best_gap = gap
                        if gap <= max_skew_s:
                            match = candidates[j]
        if match is None:
            cn0_lhcp, imputed = LHCP_TRACKING_FLOOR_DBHZ, True
        else:
            cn0_lhcp, imputed = match.cn0_dbhz, False
        out.append(
            ObservationRecord(
                epoch=rec.epoch,
                sat_id=rec.sat_id,
                elevation_deg=rec.elevation_deg,
                azimuth_deg=rec.azimuth_deg,
                cn0_rhcp_dbhz=rec.cn0_dbhz,
                cn0_lhcp_dbhz=cn0_lhcp,
                lhcp_imputed=imputed,
            )
        )
    return out


def build_dataset(samples: Sequence[LabeledSample], partition_tag: str) -> Dataset:
    """Assemble samples into a Dataset, computing class counts."""
    return Dataset(samples=tuple(samples), partition_tag=partition_tag)


def stratified_subsample(dataset: Dataset, per_class: int, seed: int) -> Dataset:
    """Cap every class at exactly ``per_class`` samples, chosen reproducibly.

    Selected samples keep their original dataset order. The draw per class
    depends only on (seed, class, class-member count and positions), so class
    counts are permutation-insensitive.
    """
    by_class = {c: [] for c in SignalClass}
    for i, s in enumerate(dataset.samples):
        by_class[s.label].append(i)

    chosen: list[int] = []
    rng = np.random.default_rng(seed)
    for cls in SignalClass:
        idx = by_class[cls]
        if len(idx) < per_class:
            raise InsufficientClassSamples(cls.label, len(idx), per_class)
        pick = rng.permutation(len(idx))[:per_class]
        chosen.extend(idx[int(p)] for p in pick)
    chosen.sort()
    return Dataset(
        samples=tuple(dataset.samples[i] for i in chosen),
        partition_tag=dataset.partition_tag,
    )


def serialize_dataset_csv(dataset: Dataset) -> str:
    lines = [DATASET_HEADER]
    for s in dataset.samples:
        f, p = s.features, s.provenance
        lines.append(
            f"{p.scene_id},{p.epoch!r},{p.sat_id},{f.elevation_deg!r},"
            f"{f.cn0_rhcp_dbhz!r},{f.cn0_diff_dbhz!r},{s.label.label}"
        )
    return "\n".join(lines) + "\n"


def parse_dataset_csv(stream: str, partition_tag: str) -> Dataset:
    samples = []
    for line_no, parts in _split_rows(stream, DATASET_HEADER):
        try:
            label = SignalClass.from_label(parts[6].strip())
        except ValueError as e:
            raise MalformedRow(line_no, str(e)) from None
        try:
            features = FeatureVector(
                elevation_deg=float(parts[3]),
                cn0_rhcp_dbhz=float(parts[4]),
                cn0_diff_dbhz=float(parts[5]),
            )
        except ValueError as e:
            raise MalformedRow(line_no, str(e)) from None
        samples.append(
            LabeledSample(
                features=features,
                label=label,
                provenance=Provenance(
                    scene_id=parts[0].strip(), epoch=float(parts[1]), sat_id=parts[2].strip()
                ),
            )
        )
    return build_dataset(samples, partition_tag)


def load_catalog(path) -> dict:
    """Load a dataset catalog JSON mapping partition tags to class counts."""
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def validate_catalog(catalog: dict) -> None:
    """Check that every partition's total equals the sum of its class counts."""
    for tag, entry in catalog.items():
        counts = entry["class_counts"]
        total = sum(counts[c.label] for c in SignalClass)
        if total != entry["total"]:
            raise ValueError(
                f"partition {tag}: total {entry['total']} != class-count sum {total}"
            )
