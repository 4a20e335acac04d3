"""Random forest over binary blocking features, built from scratch.

The learner is deliberately plain: bagged greedy entropy trees with a
per-node random feature subset, majority voting, and information-gain
importances (sum over split nodes of node-fraction x gain, averaged across
trees, normalized to sum 1).  Everything is deterministic given the
canonicalized sample list, the hyperparameters, and one integer seed.

A note on zero-gain splits: an impure node is still split when the best
achievable gain is zero, as long as some feature actually partitions it.
Without this, parity-style concepts (XOR) would be unlearnable at any depth;
a node becomes a leaf only on purity, depth/size limits, or when no feature
separates its samples.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..rng import substream, substream_key
from . import kernels


@dataclass(frozen=True)
class Sample:
    """One training record: blocked-tracker flags, change flag, persona key."""

    features: tuple[int, ...]
    label: bool
    persona: str


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = None
    features_per_split: str = "sqrt"  # "sqrt" or "all"
    min_leaf: int = 1

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 or None")
        if self.features_per_split not in ("sqrt", "all"):
            raise ValueError(f"unknown features_per_split {self.features_per_split!r}")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")

    def sort_key(self):
        depth = math.inf if self.max_depth is None else self.max_depth
        return (self.n_trees, depth, self.features_per_split, self.min_leaf)


@dataclass(frozen=True)
class HyperGrid:
    """Candidate hyperparameter sets for the grid search."""

    n_trees: tuple[int, ...] = (50, 100, 200)
    max_depth: tuple[int | None, ...] = (3, 5, None)
    features_per_split: tuple[str, ...] = ("sqrt", "all")
    min_leaf: tuple[int, ...] = (1, 2)

    def __post_init__(self):
        for name in ("n_trees", "max_depth", "features_per_split", "min_leaf"):
            if not getattr(self, name):
                raise ValueError(f"grid dimension {name} is empty")

    def points(self) -> list[ForestParams]:
        """Grid points in canonical (lexicographic-parameter) order."""
        depths = sorted(self.max_depth, key=lambda d: math.inf if d is None else d)
        combos = itertools.product(
            sorted(self.n_trees), depths, sorted(self.features_per_split), sorted(self.min_leaf))
        return [ForestParams(*c) for c in combos]


@dataclass(frozen=True)
class Tree:
    """Flat node arrays; feature == -1 marks a leaf, children of a split
    follow the feature == 0 branch on the left."""

    feature: np.ndarray
    left: np.ndarray
    right: np.ndarray
    n_samples: np.ndarray
    gain: np.ndarray
    label: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        depths = {0: 0}
        out = 0
        for node in range(self.n_nodes):
            d = depths[node]
            if self.feature[node] >= 0:
                depths[int(self.left[node])] = d + 1
                depths[int(self.right[node])] = d + 1
                out = max(out, d + 1)
        return out

    def _node_dict(self, node: int) -> dict:
        if self.feature[node] < 0:
            return {"kind": "leaf", "n": int(self.n_samples[node]),
                    "label": bool(self.label[node])}
        return {
            "kind": "split",
            "feature": int(self.feature[node]),
            "n": int(self.n_samples[node]),
            "gain": float(self.gain[node]),
            "left": self._node_dict(int(self.left[node])),
            "right": self._node_dict(int(self.right[node])),
        }

    def to_dict(self) -> dict:
        return {"n_samples": int(self.n_samples[0]), "root": self._node_dict(0)}


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[Tree, ...]
    params: ForestParams
    seed: int
    n_features: int

    def to_dict(self) -> dict:
        return {
            "params": {
                "n_trees": self.params.n_trees,
                "max_depth": self.params.max_depth,
                "features_per_split": self.params.features_per_split,
                "min_leaf": self.params.min_leaf,
            },
            "seed": self.seed,
            "n_features": self.n_features,
            "trees": [t.to_dict() for t in self.trees],
        }


def entropy(labels: Iterable[bool]) -> float:
    """Shannon entropy (bits) of a binary label multiset."""
    labels = list(labels)
    if not labels:
        raise ValueError("empty input")
    return kernels.entropy01(sum(bool(v) for v in labels), len(labels))


def canonicalize(samples: Sequence[Sample]) -> list[Sample]:
    """Order-independent canonical sample order (persona, features, label)."""
    return sorted(samples, key=lambda s: (s.persona, s.features, s.label))


def _as_arrays(samples: Sequence[Sample]) -> tuple[np.ndarray, np.ndarray]:
    if not samples:
        raise ValueError("need at least one sample")
    widths = {len(s.features) for s in samples}
    if len(widths) != 1:
        raise ValueError(f"inconsistent feature lengths {sorted(widths)}")
    X = np.array([s.features for s in samples], dtype=np.uint8)
    y = np.array([1 if s.label else 0 for s in samples], dtype=np.uint8)
    return X, y


def _n_sub(params: ForestParams, n_features: int) -> int:
    if params.features_per_split == "all":
        return n_features
    return max(1, int(math.sqrt(n_features)))


def _wrap_trees(raw, n_trees: int) -> tuple[Tree, ...]:
    feat_a, left_a, right_a, n_a, gain_a, label_a, node_count = raw
    trees = []
    for t in range(n_trees):
        k = int(node_count[t])
        trees.append(Tree(
            feature=feat_a[t, :k].copy(),
            left=left_a[t, :k].copy(),
            right=right_a[t, :k].copy(),
            n_samples=n_a[t, :k].copy(),
            gain=gain_a[t, :k].copy(),
            label=label_a[t, :k].copy(),
        ))
    return tuple(trees)


def train_tree(samples: Sequence[Sample], params: ForestParams, seed: int) -> Tree:
    """Greedy entropy tree on the samples as given (no bootstrap)."""
    samples = canonicalize(samples)
    X, y = _as_arrays(samples)
    raw = kernels.build_forest(
        X, y, np.array([seed], dtype=np.uint64),
        params.max_depth, _n_sub(params, X.shape[1]), params.min_leaf, bootstrap=False)
    return _wrap_trees(raw, 1)[0]


def train_forest(samples: Sequence[Sample], params: ForestParams, seed: int) -> ForestModel:
    """Bagged forest: each tree trains on a same-size bootstrap resample drawn
    from its own seed-derived substream."""
    samples = canonicalize(samples)
    X, y = _as_arrays(samples)
    tree_seeds = np.array(
        [substream_key(seed, "tree", t) for t in range(params.n_trees)], dtype=np.uint64)
    raw = kernels.build_forest(
        X, y, tree_seeds, params.max_depth, _n_sub(params, X.shape[1]),
        params.min_leaf, bootstrap=True)
    return ForestModel(_wrap_trees(raw, params.n_trees), params, seed, X.shape[1])


def _stacked(model: ForestModel) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    width = max(t.n_nodes for t in model.trees)
    n_trees = len(model.trees)
    feat_a = np.full((n_trees, width), -1, dtype=np.int32)
    left_a = np.full((n_trees, width), -1, dtype=np.int32)
    right_a = np.full((n_trees, width), -1, dtype=np.int32)
    label_a = np.zeros((n_trees, width), dtype=np.uint8)
    for t, tree in enumerate(model.trees):
        k = tree.n_nodes
        feat_a[t, :k] = tree.feature
        left_a[t, :k] = tree.left
        right_a[t, :k] = tree.right
        label_a[t, :k] = tree.label
    return feat_a, left_a, right_a, label_a


def predict_batch(model: ForestModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.uint8)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(f"expected (rows, {model.n_features}) features, got {X.shape}")
    feat_a, left_a, right_a, label_a = _stacked(model)
    return kernels.predict_votes(feat_a, left_a, right_a, label_a, X)


def predict(model: ForestModel, features: Sequence[int]) -> bool:
    """Majority vote across trees; ties resolve to False."""
    if len(features) != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got {len(features)}")
    return bool(predict_batch(model, np.array([features], dtype=np.uint8))[0])


def accuracy(model: ForestModel, samples: Sequence[Sample]) -> float:
    X, y = _as_arrays(list(samples))
    preds = predict_batch(model, X)
    return float((preds == y).mean())


def feature_importance(model: ForestModel) -> np.ndarray:
    """Per-feature importance: sum over split nodes of (node fraction x gain),
    averaged over trees, normalized to sum 1.  All-zero if no tree splits."""
    totals = np.zeros(model.n_features, dtype=float)
    for tree in model.trees:
        root_n = float(tree.n_samples[0])
        split = tree.feature >= 0
        if not split.any():
            continue
        contrib = (tree.n_samples[split] / root_n) * tree.gain[split]
        np.add.at(totals, tree.feature[split], contrib)
    totals /= len(model.trees)
    mass = totals.sum()
    if mass > 0:
        totals /= mass
    return totals


def _fold_assignment(samples: Sequence[Sample], folds: int, seed: int) -> np.ndarray:
    """Fold id per sample such that every fold holds the same number of
    records of each persona; requires per-persona counts divisible by folds."""
    by_persona: dict[str, list[int]] = {}
    for i, s in enumerate(samples):
        by_persona.setdefault(s.persona, []).append(i)
    assignment = np.empty(len(samples), dtype=np.int64)
    rng = substream(seed, "folds")
    for persona in sorted(by_persona):
        idxs = by_persona[persona]
        if len(idxs) % folds != 0:
            raise ValueError(
                f"persona {persona} has {len(idxs)} records, not divisible by {folds} folds")
        shuffled = rng.permutation(len(idxs))
        for pos, which in enumerate(shuffled):
            assignment[idxs[which]] = pos % folds
    return assignment


def cross_validate_grid(samples: Sequence[Sample], grid: HyperGrid, folds: int,
                        seed: int) -> tuple[ForestParams, float]:
    """Persona-balanced k-fold grid search.

    Returns the grid point with the highest mean held-out-fold accuracy;
    exact ties go to the earlier point in canonical parameter order.
    """
    if folds < 2:
        raise ValueError("folds must be >= 2")
    samples = canonicalize(samples)
    assignment = _fold_assignment(samples, folds, seed)
    X, y = _as_arrays(samples)
    best_params = None
    best_acc = -1.0
    for gi, params in enumerate(grid.points()):
        accs = []
        for k in range(folds):
            test_mask = assignment == k
            train = [s for s, m in zip(samples, test_mask) if not m]
            model = train_forest(train, params, substream_key(seed, "cv", gi, k))
            preds = predict_batch(model, X[test_mask])
            accs.append(float((preds == y[test_mask]).mean()))
        mean_acc = float(np.mean(accs))
        if mean_acc > best_acc:
            best_acc = mean_acc
            best_params = params
    return best_params, best_acc
