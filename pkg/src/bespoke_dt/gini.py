"""Gini impurity and candidate split enumeration on quantized features.

A split ``(feature, C)`` sends a sample right when ``x[feature] >= C``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Iterable

import numpy as np

GINI_TOL = 1e-12


@dataclass(frozen=True, order=True)
class SplitCandidate:
    feature: int
    threshold: int
    gini: float

    @property
    def pair(self) -> tuple[int, int]:
        return (self.feature, self.threshold)


def _impurity_sum(counts: Iterable[int]) -> tuple[int, int]:
    counts = list(counts)
    return sum(counts), sum(c * c for c in counts)


def gini_of_partition(labels_left: Iterable[Hashable], labels_right: Iterable[Hashable]) -> float:
    """Size-weighted Gini impurity of a two-way partition."""
    left = Counter(labels_left)
    right = Counter(labels_right)
    n_l, sq_l = _impurity_sum(left.values())
    n_r, sq_r = _impurity_sum(right.values())
    n = n_l + n_r
    if n == 0:
        raise ValueError("both sides of the partition are empty")
    total = 0.0
    if n_l:
        total += n_l - sq_l / n_l
    if n_r:
        total += n_r - sq_r / n_r
    return total / n


def enumerate_candidates(
    features: np.ndarray, labels: np.ndarray, n_levels: int, num_classes: int
) -> list[SplitCandidate]:
    """All non-degenerate splits over thresholds observed at the node.

    ``features`` is the node's (n, F) integer matrix with values in
    ``[0, n_levels)``; ``labels`` the matching class indices. For each
    feature, every distinct present value except the minimum is a threshold,
    so both sides are always non-empty. Sorted by (feature, threshold).
    """
    features = np.asarray(features, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    n, n_feat = features.shape
    if n < 2:
        return []
    # hist[f, v, c] = samples at node with feature f == v and class c
    flat = (np.arange(n_feat)[None, :] * n_levels + features) * num_classes + labels[:, None]
    hist = np.bincount(flat.ravel(), minlength=n_feat * n_levels * num_classes)
    hist = hist.reshape(n_feat, n_levels, num_classes)
    # right[f, C, c] = samples with x[f] >= C
    right = np.cumsum(hist[:, ::-1, :], axis=1)[:, ::-1, :]
    total = right[:, 0, :]
    left = total[:, None, :] - right

    present = hist.sum(axis=2) > 0
    n_r = right.sum(axis=2)
    n_l = left.sum(axis=2)
    valid = present & (n_l > 0) & (n_r > 0)
    valid[:, 0] = False

    f_idx, c_idx = np.nonzero(valid)
    if f_idx.size == 0:
        return []
    r = right[f_idx, c_idx].astype(np.float64)
    l = left[f_idx, c_idx].astype(np.float64)
    nr = n_r[f_idx, c_idx].astype(np.float64)
    nl = n_l[f_idx, c_idx].astype(np.float64)
    g = ((nl - (l * l).sum(axis=1) / nl) + (nr - (r * r).sum(axis=1) / nr)) / n
    return [
        SplitCandidate(int(f), int(c), float(v)) for f, c, v in zip(f_idx, c_idx, g)
    ]

