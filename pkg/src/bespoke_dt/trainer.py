"""Greedy Gini decision-tree training: the ADC-unaware baseline and the ADC-aware variant.

Both trainers expand nodes depth-first, predicate-false (left) child first.
The ADC-aware trainer keeps one global set of already selected
``(feature, threshold)`` pairs across that expansion order and prefers, in
the slack band ``gini <= G + tau``, splits that reuse an existing comparator,
then splits that add a comparator to an existing ADC, then splits that need
a new ADC; among new comparators the lowest threshold wins.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from .dataset import QuantizedDataset
from .gini import GINI_TOL, SplitCandidate, enumerate_candidates

RNG_NAME = "numpy.random.PCG64"
MAX_DEPTH = 16


@dataclass(frozen=True)
class Leaf:
    label: int
    n_samples: int = 0


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: int
    left: "Node"
    right: "Node"
    gini: float = 0.0
    min_gini: float = 0.0
    n_samples: int = 0
    tier: str = "min"


Node = Union[Leaf, Split]


@dataclass
class DecisionTree:
    root: Node
    n_features: int
    bits: int
    num_classes: int
    depth_limit: int
    tau: float = 0.0
    seed: int = 0
    mode: str = "baseline"
    dataset: str = ""
    dataset_checksum: str = ""

    def iter_nodes(self) -> Iterator[Node]:
        """Pre-order, left subtree before right (the training expansion order)."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if isinstance(node, Split):
                stack.append(node.right)
                stack.append(node.left)

    def splits(self) -> list[Split]:
        return [n for n in self.iter_nodes() if isinstance(n, Split)]

    def leaves(self) -> list[Leaf]:
        return [n for n in self.iter_nodes() if isinstance(n, Leaf)]

    def height(self) -> int:
        def h(node: Node) -> int:
            if isinstance(node, Leaf):
                return 0
            return 1 + max(h(node.left), h(node.right))

        return h(self.root)

    def pairs(self) -> set[tuple[int, int]]:
        return {(s.feature, s.threshold) for s in self.splits()}

    def to_dict(self) -> dict:
        return {
            "root": _node_to_dict(self.root),
            "metadata": {
                "n_features": self.n_features,
                "bits": self.bits,
                "num_classes": self.num_classes,
                "depth_limit": self.depth_limit,
                "tau": self.tau,
                "seed": self.seed,
                "rng": RNG_NAME,
                "mode": self.mode,
                "dataset": self.dataset,
                "dataset_checksum": self.dataset_checksum,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        m = d["metadata"]
        return cls(
            root=_node_from_dict(d["root"]),
            n_features=m["n_features"],
            bits=m["bits"],
            num_classes=m["num_classes"],
            depth_limit=m["depth_limit"],
            tau=m["tau"],
            seed=m["seed"],
            mode=m["mode"],
            dataset=m.get("dataset", ""),
            dataset_checksum=m.get("dataset_checksum", ""),
        )

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=indent)


def _node_to_dict(node: Node) -> dict:
    if isinstance(node, Leaf):
        return {"leaf": node.label, "n": node.n_samples}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "gini": node.gini,
        "min_gini": node.min_gini,
        "n": node.n_samples,
        "tier": node.tier,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(d: dict) -> Node:
    if "leaf" in d:
        return Leaf(label=d["leaf"], n_samples=d.get("n", 0))
    return Split(
        feature=d["feature"],
        threshold=d["threshold"],
        left=_node_from_dict(d["left"]),
        right=_node_from_dict(d["right"]),
        gini=d.get("gini", 0.0),
        min_gini=d.get("min_gini", 0.0),
        n_samples=d.get("n", 0),
        tier=d.get("tier", "min"),
    )


def majority_label(labels: np.ndarray, num_classes: int) -> int:
    # argmax returns the first maximum, i.e. the smallest class index on ties
    return int(np.argmax(np.bincount(labels, minlength=num_classes)))


def _pick(rng: np.random.Generator, options: list[SplitCandidate]) -> SplitCandidate:
    options = sorted(options, key=lambda c: c.pair)
    if len(options) == 1:
        return options[0]
    return options[int(rng.integers(len(options)))]


def _min_gini(cands: list[SplitCandidate]) -> list[SplitCandidate]:
    g = min(c.gini for c in cands)
    return [c for c in cands if c.gini <= g + GINI_TOL]


class _Chooser:
    """Split selection policy; stateful for the ADC-aware variant."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def choose(self, cands: list[SplitCandidate]) -> tuple[SplitCandidate, str]:
        return _pick(self.rng, _min_gini(cands)), "min"


class _AdcAwareChooser(_Chooser):
    def __init__(self, rng: np.random.Generator, tau: float):
        super().__init__(rng)
        self.tau = tau
        self.selected: set[tuple[int, int]] = set()
        self.used_features: set[int] = set()

    def tiers(self, cands: list[SplitCandidate]) -> tuple[list, list, list]:
        g = min(c.gini for c in cands)
        band = [c for c in cands if c.gini <= g + self.tau + GINI_TOL]
        zero = [c for c in band if c.pair in self.selected]
        medium = [c for c in band if c.pair not in self.selected and c.feature in self.used_features]
        high = [c for c in band if c.feature not in self.used_features]
        return zero, medium, high

    def choose(self, cands: list[SplitCandidate]) -> tuple[SplitCandidate, str]:
        zero, medium, high = self.tiers(cands)
        if zero:
            chosen, tier = _pick(self.rng, _min_gini(zero)), "zero"
        else:
            pool, tier = (medium, "medium") if medium else (high, "high")
            c_min = min(c.threshold for c in pool)
            chosen = _pick(self.rng, _min_gini([c for c in pool if c.threshold == c_min]))
        self.selected.add(chosen.pair)
        self.used_features.add(chosen.feature)
        return chosen, tier


def _grow(
    X: np.ndarray,
    y: np.ndarray,
    depth_left: int,
    chooser: _Chooser,
    n_levels: int,
    num_classes: int,
) -> Node:
    if depth_left == 0 or len(np.unique(y)) < 2:
        return Leaf(majority_label(y, num_classes), len(y))
    cands = enumerate_candidates(X, y, n_levels, num_classes)
    if not cands:
        return Leaf(majority_label(y, num_classes), len(y))
    node_min = min(c.gini for c in cands)
    chosen, tier = chooser.choose(cands)
    go_right = X[:, chosen.feature] >= chosen.threshold
    left = _grow(X[~go_right], y[~go_right], depth_left - 1, chooser, n_levels, num_classes)
    right = _grow(X[go_right], y[go_right], depth_left - 1, chooser, n_levels, num_classes)
    return Split(
        feature=chosen.feature,
        threshold=chosen.threshold,
        left=left,
        right=right,
        gini=chosen.gini,
        min_gini=node_min,
        n_samples=len(y),
        tier=tier,
    )


def _train(ds: QuantizedDataset, depth: int, seed: int, chooser: _Chooser, mode: str, tau: float) -> DecisionTree:
    if not 1 <= depth <= MAX_DEPTH:
        raise ValueError(f"depth must be in [1, {MAX_DEPTH}], got {depth}")
    X, y = ds.partition("train")
    if len(y) == 0:
        raise ValueError("training partition is empty")
    root = _grow(X, y, depth, chooser, 1 << ds.bits, ds.num_classes)
    return DecisionTree(
        root=root,
        n_features=ds.n_features,
        bits=ds.bits,
        num_classes=ds.num_classes,
        depth_limit=depth,
        tau=tau,
        seed=seed,
        mode=mode,
        dataset=ds.name,
        dataset_checksum=ds.checksum(),
    )


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def train_baseline(ds: QuantizedDataset, depth: int, seed: int = 0) -> DecisionTree:
    """ADC-unaware CART: a minimum-Gini split at every node, seeded random tie-break."""
    return _train(ds, depth, seed, _Chooser(make_rng(seed)), "baseline", 0.0)


def train_adc_aware(ds: QuantizedDataset, depth: int, tau: float = 0.0, seed: int = 0) -> DecisionTree:
    if tau < 0:
        raise ValueError("tau must be >= 0")
    return _train(ds, depth, seed, _AdcAwareChooser(make_rng(seed), tau), "adc_aware", tau)


def predict(tree: DecisionTree, sample) -> int:
    sample = np.asarray(sample)
    if sample.shape != (tree.n_features,):
        raise ValueError(f"sample has shape {sample.shape}, expected ({tree.n_features},)")
    node = tree.root
    while isinstance(node, Split):
        node = node.right if sample[node.feature] >= node.threshold else node.left
    return node.label


def predict_many(tree: DecisionTree, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X)
    out = np.empty(len(X), dtype=np.int64)

    def walk(node: Node, idx: np.ndarray) -> None:
        if isinstance(node, Leaf):
            out[idx] = node.label
            return
        right = X[idx, node.feature] >= node.threshold
        walk(node.left, idx[~right])
        walk(node.right, idx[right])

    walk(tree.root, np.arange(len(X)))
    return out


def accuracy(tree: DecisionTree, ds: QuantizedDataset, partition: str = "test") -> float:
    X, y = ds.partition(partition)
    if len(y) == 0:
        raise ValueError(f"{partition} partition is empty")
    return float(np.mean(predict_many(tree, X) == y))
