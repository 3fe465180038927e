"""CART decision tree: feature extraction, induction, prediction, model IO,
stratified k-fold cross validation and grid search.

Conventions (serialized with every model): feature order is
(elevation_deg, cn0_rhcp_dbhz, cn0_diff_dbhz); a query with feature value
<= threshold descends left; leaf ties break toward the canonical class order.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import CorruptModel, EmptyDataset, EmptyNode, TooFewSamples
from .ingest import serialize_dataset_csv
from .types import (
    CLASS_ORDER,
    Dataset,
    FeatureVector,
    LabeledSample,
    ObservationRecord,
    SignalClass,
)

MODEL_FORMAT_VERSION = 1
FEATURE_NAMES = ("elevation_deg", "cn0_rhcp_dbhz", "cn0_diff_dbhz")


def extract_features(record: ObservationRecord) -> FeatureVector:
    """The three classifier features from one dual-polarized observation."""
    return FeatureVector(
        elevation_deg=record.elevation_deg,
        cn0_rhcp_dbhz=record.cn0_rhcp_dbhz,
        cn0_diff_dbhz=record.cn0_rhcp_dbhz - record.cn0_lhcp_dbhz,
    )


def gini(counts) -> float:
    """Gini impurity 1 - sum(p_i^2) of a class-count map or sequence."""
    if isinstance(counts, dict):
        values = [counts.get(c, 0) for c in CLASS_ORDER]
    else:
        values = list(counts)
    if any(v < 0 for v in values):
        raise ValueError("negative class count")
    total = sum(values)
    if total == 0:
        raise EmptyNode("gini of an empty node")
    return 1.0 - sum((v / total) ** 2 for v in values)


@dataclass(frozen=True)
class TreeParams:
    max_depth: Optional[int] = None  # None = unlimited
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    min_impurity_decrease: float = 0.0

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0 or None")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if not self.min_impurity_decrease >= 0.0:
            raise ValueError("min_impurity_decrease must be >= 0")

    def to_dict(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "min_samples_leaf": self.min_samples_leaf,
            "min_impurity_decrease": self.min_impurity_decrease,
        }

    @staticmethod
    def from_dict(data: dict) -> "TreeParams":
        return TreeParams(
            max_depth=data.get("max_depth"),
            min_samples_split=int(data.get("min_samples_split", 2)),
            min_samples_leaf=int(data.get("min_samples_leaf", 1)),
            min_impurity_decrease=float(data.get("min_impurity_decrease", 0.0)),
        )


@dataclass(frozen=True)
class SplitNode:
    feature: int
    threshold: float
    left: int
    right: int


@dataclass(frozen=True)
class LeafNode:
    class_counts: tuple[int, int, int]
    predicted: SignalClass


@dataclass(frozen=True)
class TreeModel:
    nodes: tuple  # pre-order; SplitNode children are node indices
    params: TreeParams
    fingerprint: dict

    def predict(self, features) -> SignalClass:
        if isinstance(features, FeatureVector):
            features = features.as_tuple()
        node = self.nodes[0]
        while isinstance(node, SplitNode):
            node = self.nodes[node.left if features[node.feature] <= node.threshold else node.right]
        return node.predicted

    def predict_many(self, X: np.ndarray) -> np.ndarray:
        return np.array([int(self.predict(tuple(row))) for row in X], dtype=np.int64)

    @property
    def depth(self) -> int:
        def walk(i):
            n = self.nodes[i]
            if isinstance(n, LeafNode):
                return 0
            return 1 + max(walk(n.left), walk(n.right))

        return walk(0)

    @property
    def n_leaves(self) -> int:
        return sum(1 for n in self.nodes if isinstance(n, LeafNode))


def dataset_matrix(dataset_or_samples) -> tuple[np.ndarray, np.ndarray]:
    samples = getattr(dataset_or_samples, "samples", dataset_or_samples)
    X = np.array([s.features.as_tuple() for s in samples], dtype=np.float64).reshape(-1, 3)
    y = np.array([int(s.label) for s in samples], dtype=np.int64)
    return X, y


def best_split(
    samples: Sequence[LabeledSample],
    min_samples_leaf: int = 1,
    min_impurity_decrease: float = 0.0,
) -> Optional[tuple[int, float, float]]:
    """Best (feature_index, threshold, gini decrease), or None if no valid split."""
    if len(samples) < 2:
        raise ValueError("best_split needs at least 2 samples")
    X, y = dataset_matrix(samples)
    return kernels.best_split(X, y, min_samples_leaf, min_impurity_decrease)


def dataset_sha256(dataset: Dataset) -> str:
    return hashlib.sha256(serialize_dataset_csv(dataset).encode("utf-8")).hexdigest()


def _counts_of(y: np.ndarray) -> tuple[int, int, int]:
    c = np.bincount(y, minlength=3)
    return (int(c[0]), int(c[1]), int(c[2]))


def _majority(counts) -> SignalClass:
    return SignalClass(int(np.argmax(np.asarray(counts))))


def fit(dataset: Dataset, params: TreeParams, seed: int = 0,
        with_fingerprint: bool = True) -> TreeModel:
    """Greedy recursive Gini partitioning; deterministic and order-free.

    ``with_fingerprint=False`` skips the dataset/model hashing (used by the
    cross-validation inner loop, which discards the fitted trees).
    """
    if len(dataset) == 0:
        raise EmptyDataset("cannot fit on an empty dataset")
    X, y = dataset_matrix(dataset)
    nodes: list = []

    def build(idx: np.ndarray, depth: int) -> int:
        pos = len(nodes)
        nodes.append(None)  # reserve pre-order slot
        ys = y[idx]
        counts = _counts_of(ys)
        n = idx.shape[0]
        split = None
        depth_ok = params.max_depth is None or depth < params.max_depth
        if depth_ok and n >= params.min_samples_split and len(set(ys.tolist())) > 1:
            split = kernels.best_split(
                X[idx], ys, params.min_samples_leaf, params.min_impurity_decrease
            )
        if split is None:
            nodes[pos] = LeafNode(class_counts=counts, predicted=_majority(counts))
            return pos
        f, thr, _dec = split
        mask = X[idx, f] <= thr
        left = build(idx[mask], depth + 1)
        right = build(idx[~mask], depth + 1)
        nodes[pos] = SplitNode(feature=int(f), threshold=float(thr), left=left, right=right)
        return pos

    build(np.arange(len(dataset)), 0)
    model = TreeModel(nodes=tuple(nodes), params=params, fingerprint={})
    if not with_fingerprint:
        return model
    fingerprint = {
        "dataset_sha256": dataset_sha256(dataset),
        "seed": int(seed),
        "model_sha256": model_sha256(model),
    }
    return TreeModel(nodes=tuple(nodes), params=params, fingerprint=fingerprint)


def predict(model: TreeModel, features) -> SignalClass:
    return model.predict(features)


# --- serialization ----------------------------------------------------------

def _nodes_to_json(model: TreeModel) -> list:
    out = []
    for n in model.nodes:
        if isinstance(n, SplitNode):
            out.append(
                {"type": "split", "feature": n.feature, "threshold": n.threshold,
                 "left": n.left, "right": n.right}
            )
        else:
            out.append(
                {"type": "leaf", "class_counts": list(n.class_counts),
                 "predicted": n.predicted.label}
            )
    return out


def model_sha256(model: TreeModel) -> str:
    canonical = json.dumps(
        {
            "format_version": MODEL_FORMAT_VERSION,
            "params": model.params.to_dict(),
            "nodes": _nodes_to_json(model),
            "class_order": [c.label for c in CLASS_ORDER],
        },
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def model_to_json(model: TreeModel) -> str:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "params": model.params.to_dict(),
        "nodes": _nodes_to_json(model),
        "class_order": [c.label for c in CLASS_ORDER],
        "fingerprint": model.fingerprint,
    }
    return json.dumps(payload, sort_keys=True, indent=1) + "\n"


def save_model(model: TreeModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(model_to_json(model))


def load_model(path) -> TreeModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise CorruptModel(str(e)) from None
    return model_from_json(payload)


def model_from_json(payload: dict) -> TreeModel:
    if not isinstance(payload, dict):
        raise CorruptModel("not a JSON object")
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise CorruptModel(f"unknown format_version {payload.get('format_version')!r}")
    if payload.get("class_order") != [c.label for c in CLASS_ORDER]:
        raise CorruptModel("unexpected class_order")
    try:
        params = TreeParams.from_dict(payload["params"])
        raw_nodes = payload["nodes"]
        fingerprint = dict(payload.get("fingerprint", {}))
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptModel(str(e)) from None
    if not raw_nodes:
        raise CorruptModel("empty node array")

    nodes = []
    for i, rn in enumerate(raw_nodes):
        try:
            if rn["type"] == "split":
                thr = float(rn["threshold"])
                if not math.isfinite(thr):
                    raise CorruptModel(f"node {i}: non-finite threshold")
                if rn["feature"] not in (0, 1, 2):
                    raise CorruptModel(f"node {i}: bad feature index")
                nodes.append(
                    SplitNode(feature=int(rn["feature"]), threshold=thr,
                              left=int(rn["left"]), right=int(rn["right"]))
                )
            elif rn["type"] == "leaf":
                counts = tuple(int(c) for c in rn["class_counts"])
                if len(counts) != 3 or any(c < 0 for c in counts):
                    raise CorruptModel(f"node {i}: bad class_counts")
                predicted = SignalClass.from_label(rn["predicted"])
                if predicted != _majority(counts):
                    raise CorruptModel(f"node {i}: predicted class is not the majority")
                if sum(counts) < params.min_samples_leaf:
                    raise CorruptModel(f"node {i}: leaf below min_samples_leaf")
                nodes.append(LeafNode(class_counts=counts, predicted=predicted))
            else:
                raise CorruptModel(f"node {i}: unknown type {rn['type']!r}")
        except (KeyError, TypeError, ValueError) as e:
            raise CorruptModel(f"node {i}: {e}") from None

    _check_topology(nodes, params)
    model = TreeModel(nodes=tuple(nodes), params=params, fingerprint=fingerprint)
    stored = fingerprint.get("model_sha256")
    if stored is not None and stored != model_sha256(model):
        warnings.warn("model fingerprint mismatch: node or param content was edited",
                      stacklevel=2)
    return model


def _check_topology(nodes, params: TreeParams) -> None:
    n = len(nodes)
    seen = [0] * n
    max_seen_depth = 0

    stack = [(0, 0)]
    seen[0] = 1
    while stack:
        i, depth = stack.pop()
        max_seen_depth = max(max_seen_depth, depth)
        node = nodes[i]
        if isinstance(node, SplitNode):
            for child in (node.left, node.right):
                if not 0 <= child < n:
                    raise CorruptModel(f"node {i}: child index {child} out of range")
                if child <= i:
                    raise CorruptModel(f"node {i}: child {child} breaks pre-order")
                if seen[child]:
                    raise CorruptModel(f"node {child}: referenced twice")
                seen[child] = 1
                stack.append((child, depth + 1))
    if any(s == 0 for s in seen):
        raise CorruptModel("unreachable nodes present")
    if params.max_depth is not None and max_seen_depth > params.max_depth:
        raise CorruptModel("tree deeper than params.max_depth")


# --- cross validation -------------------------------------------------------

def kfold_stratified(dataset: Dataset, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Stratified folds as (train_indices, validation_indices) pairs.

    Per-fold class proportions stay within one sample of the global ones;
    deterministic for a fixed seed.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    for cls, count in dataset.class_counts.items():
        if 0 < count < k:
            raise TooFewSamples(cls.label, count, k)
    rng = np.random.default_rng(seed)
    fold_members: list[list[int]] = [[] for _ in range(k)]
    for cls in SignalClass:
        idx = [i for i, s in enumerate(dataset.samples) if s.label == cls]
        perm = rng.permutation(len(idx))
        for rank, p in enumerate(perm):
            fold_members[rank % k].append(idx[int(p)])
    folds = []
    for f in range(k):
        val_set = set(fold_members[f])
        val = np.array(sorted(val_set), dtype=np.int64)
        train = np.array([i for i in range(len(dataset)) if i not in val_set], dtype=np.int64)
        folds.append((train, val))
    return folds


@dataclass(frozen=True)
class CvReport:
    grid: tuple  # (TreeParams, mean_accuracy, per-fold accuracies)
    best: TreeParams
    k: int = 5
    seed: int = 42

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "seed": self.seed,
            "grid": [
                {"params": p.to_dict(), "mean_accuracy": m, "fold_accuracies": list(a)}
                for p, m, a in self.grid
            ],
            "best": self.best.to_dict(),
        }


def default_grid() -> list[TreeParams]:
    grid = []
    for depth in (3, 5, 8, 12, None):
        for leaf in (1, 5, 20, 50):
            for split in (2, 10, 40):
                grid.append(
                    TreeParams(max_depth=depth, min_samples_split=split, min_samples_leaf=leaf)
                )
    return grid


def _depth_key(params: TreeParams) -> float:
    return math.inf if params.max_depth is None else params.max_depth


def grid_search(dataset: Dataset, grid: Sequence[TreeParams], k: int, seed: int) -> CvReport:
    """Mean validation accuracy per grid point over shared stratified folds.

    Ties on mean accuracy prefer the simpler model: smaller max_depth, then
    larger min_samples_leaf, then grid order.
    """
    if not grid:
        raise ValueError("empty parameter grid")
    if len(dataset) == 0:
        raise EmptyDataset("cannot tune on an empty dataset")
    folds = kfold_stratified(dataset, k, seed)
    X, y = dataset_matrix(dataset)

    rows = []
    best_row = None
    for gi, params in enumerate(grid):
        accs = []
        for train, val in folds:
            sub = Dataset(
                samples=tuple(dataset.samples[int(i)] for i in train),
                partition_tag=dataset.partition_tag,
            )
            model = fit(sub, params, seed=seed, with_fingerprint=False)
            pred = model.predict_many(X[val])
            accs.append(float(np.mean(pred == y[val])))
        mean = float(np.mean(accs))
        rows.append((params, mean, tuple(accs)))
        cand_key = (-mean, _depth_key(params), -params.min_samples_leaf, gi)
        if best_row is None or cand_key < best_row[0]:
            best_row = (cand_key, params)
    return CvReport(grid=tuple(rows), best=best_row[1], k=k, seed=seed)
