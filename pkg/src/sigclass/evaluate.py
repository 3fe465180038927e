"""Accuracy, per-class recall/precision, and confusion matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cart import TreeModel, dataset_matrix
from .errors import EmptyDataset
from .types import CLASS_ORDER, Dataset, SignalClass


@dataclass(frozen=True)
class ConfusionMatrix:
    """3x3 counts; rows = ground truth, columns = prediction, canonical order."""

    counts: tuple  # ((int,)*3,)*3

    def __post_init__(self):
        m = np.asarray(self.counts)
        if m.shape != (3, 3) or (m < 0).any():
            raise ValueError("confusion matrix must be 3x3 with counts >= 0")
        object.__setattr__(
            self, "counts", tuple(tuple(int(v) for v in row) for row in m)
        )

    @property
    def total(self) -> int:
        return int(np.sum(self.counts))

    @property
    def trace(self) -> int:
        return int(np.trace(np.asarray(self.counts)))

    def row_sum(self, cls: SignalClass) -> int:
        return int(sum(self.counts[int(cls)]))

    def col_sum(self, cls: SignalClass) -> int:
        return int(sum(row[int(cls)] for row in self.counts))

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            counts=tuple(
                tuple(a + b for a, b in zip(ra, rb))
                for ra, rb in zip(self.counts, other.counts)
            )
        )


@dataclass(frozen=True)
class EvalReport:
    partition_tag: str
    matrix: ConfusionMatrix

    @property
    def sample_count(self) -> int:
        return self.matrix.total

    @property
    def overall_accuracy(self) -> float:
        return self.matrix.trace / self.matrix.total

    @property
    def per_class_recall(self) -> dict[SignalClass, float]:
        out = {}
        for cls in CLASS_ORDER:
            rs = self.matrix.row_sum(cls)
            if rs > 0:  # absent classes are omitted, not reported as zero
                out[cls] = self.matrix.counts[int(cls)][int(cls)] / rs
        return out

    @property
    def per_class_precision(self) -> dict[SignalClass, float]:
        out = {}
        for cls in CLASS_ORDER:
            cs = self.matrix.col_sum(cls)
            if cs > 0:
                out[cls] = self.matrix.counts[int(cls)][int(cls)] / cs
        return out

    def to_dict(self) -> dict:
        return {
            "partition_tag": self.partition_tag,
            "n": self.sample_count,
            "overall_accuracy": self.overall_accuracy,
            "per_class_recall": {c.label: v for c, v in self.per_class_recall.items()},
            "per_class_precision": {c.label: v for c, v in self.per_class_precision.items()},
            "matrix": [list(row) for row in self.matrix.counts],
        }

    def to_text(self) -> str:
        """Human-readable table; percentages to two decimals."""
        lines = [
            f"partition {self.partition_tag}: n={self.sample_count}, "
            f"overall accuracy {100.0 * self.overall_accuracy:.2f}%"
        ]
        header = "truth \\ pred".ljust(14) + "".join(c.label.rjust(10) for c in CLASS_ORDER)
        lines.append(header)
        for c in CLASS_ORDER:
            row = self.matrix.counts[int(c)]
            lines.append(c.label.ljust(14) + "".join(str(v).rjust(10) for v in row))
        recalls = self.per_class_recall
        for c in CLASS_ORDER:
            if c in recalls:
                lines.append(f"recall[{c.label}] = {100.0 * recalls[c]:.2f}%")
        return "\n".join(lines)


def confusion(truth: np.ndarray, pred: np.ndarray) -> ConfusionMatrix:
    m = np.zeros((3, 3), dtype=np.int64)
    np.add.at(m, (truth, pred), 1)
    return ConfusionMatrix(counts=tuple(tuple(int(v) for v in row) for row in m))


def evaluate(model: TreeModel, dataset: Dataset) -> EvalReport:
    """Confusion-matrix report for one partition."""
    if len(dataset) == 0:
        raise EmptyDataset("cannot evaluate on an empty dataset")
    X, y = dataset_matrix(dataset)
    pred = model.predict_many(X)
    return EvalReport(partition_tag=dataset.partition_tag, matrix=confusion(y, pred))


def compare_partitions(
    model: TreeModel, partitions: Sequence[Dataset]
) -> tuple[list[EvalReport], EvalReport]:
    """Per-partition reports plus a pooled report with entrywise-summed counts."""
    if not partitions:
        raise ValueError("need at least one partition")
    reports = [evaluate(model, d) for d in partitions]
    pooled_matrix = reports[0].matrix
    for r in reports[1:]:
        pooled_matrix = pooled_matrix + r.matrix
    pooled_tag = "+".join(r.partition_tag for r in reports)
    return reports, EvalReport(partition_tag=pooled_tag, matrix=pooled_matrix)
