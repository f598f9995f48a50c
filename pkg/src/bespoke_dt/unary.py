"""Lowering a trained tree to parallel-unary form.

With thermometer-coded inputs, digit ``k`` of feature ``f`` is the bit
``x[f] >= k``, so every hardwired comparison ``x[f] >= C`` is simply digit
``C``. Each leaf becomes one AND term over its path's digits (negated on
predicate-false edges) and each class label is the OR of its leaves' terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .trainer import DecisionTree, Leaf, Node, Split


class LogicConsistencyError(RuntimeError):
    """Lowered logic asserted zero or several labels for one input."""


@dataclass(frozen=True)
class DigitRequirement:
    feature: int
    digits: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"feature": self.feature, "digits": list(self.digits)}


@dataclass(frozen=True, order=True)
class Literal:
    feature: int
    digit: int
    positive: bool = True

    def to_dict(self) -> dict:
        return {"feature": self.feature, "digit": self.digit, "positive": self.positive}


@dataclass
class LabelLogic:
    """Sum-of-products per class label; ``terms[c]`` is a list of literal tuples."""

    num_classes: int
    terms: dict[int, list[tuple[Literal, ...]]] = field(default_factory=dict)

    def terms_for(self, label: int) -> list[tuple[Literal, ...]]:
        return self.terms.get(label, [])

    def all_terms(self) -> list[tuple[int, tuple[Literal, ...]]]:
        return [(c, t) for c in range(self.num_classes) for t in self.terms_for(c)]

    @property
    def literal_count(self) -> int:
        return sum(len(t) for _, t in self.all_terms())

    @property
    def term_count(self) -> int:
        return len(self.all_terms())

    @property
    def active_labels(self) -> int:
        return sum(1 for c in range(self.num_classes) if self.terms_for(c))

    def to_dict(self) -> dict:
        return {
            "num_classes": self.num_classes,
            "terms": {
                str(c): [[lit.to_dict() for lit in t] for t in self.terms_for(c)]
                for c in range(self.num_classes)
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LabelLogic":
        terms = {
            int(c): [tuple(Literal(**lit) for lit in t) for t in ts]
            for c, ts in d["terms"].items()
            if ts
        }
        return cls(num_classes=d["num_classes"], terms=terms)


def comparison_relations(predicate: str, threshold: int, bits: int = 4) -> tuple[int, bool]:
    """Map a hardwired comparison against ``threshold`` to ``(digit, positive)``.

    ``x >= C`` is digit C, ``x > C`` digit C+1, ``x < C`` the complement of
    digit C and ``x <= C`` the complement of digit C+1.
    """
    table = {">=": (threshold, True), ">": (threshold + 1, True), "<": (threshold, False), "<=": (threshold + 1, False)}
    aliases = {"≥": ">=", "≤": "<="}
    predicate = aliases.get(predicate, predicate)
    if predicate not in table:
        raise ValueError(f"unknown predicate {predicate!r}")
    digit, positive = table[predicate]
    top = (1 << bits) - 1
    if not 1 <= digit <= top:
        raise ValueError(f"{predicate} {threshold} needs unary digit {digit}, outside [1, {top}]")
    return digit, positive


def lower_tree(tree: DecisionTree) -> tuple[list[DigitRequirement], LabelLogic]:
    digits: dict[int, set[int]] = {}
    terms: dict[int, list[tuple[Literal, ...]]] = {}

    def walk(node: Node, path: tuple[Literal, ...]) -> None:
        if isinstance(node, Leaf):
            terms.setdefault(node.label, []).append(path)
            return
        digits.setdefault(node.feature, set()).add(node.threshold)
        walk(node.left, path + (Literal(node.feature, node.threshold, False),))
        walk(node.right, path + (Literal(node.feature, node.threshold, True),))

    walk(tree.root, ())
    reqs = [DigitRequirement(f, tuple(sorted(ds))) for f, ds in sorted(digits.items())]
    return reqs, LabelLogic(num_classes=tree.num_classes, terms=terms)


def unary_digits(reqs: list[DigitRequirement], sample) -> dict[tuple[int, int], bool]:
    return {(r.feature, k): bool(sample[r.feature] >= k) for r in reqs for k in r.digits}


def evaluate_terms(logic: LabelLogic, digit_values: dict[tuple[int, int], bool]) -> int:
    """Evaluate the OR-of-ANDs on precomputed digit values; return the single true label."""
    hot = []
    for c in range(logic.num_classes):
        for term in logic.terms_for(c):
            if all(digit_values[(l.feature, l.digit)] == l.positive for l in term):
                hot.append(c)
                break
    if len(hot) != 1:
        raise LogicConsistencyError(f"{len(hot)} labels asserted: {hot}")
    return hot[0]


def evaluate_logic(reqs: list[DigitRequirement], logic: LabelLogic, sample) -> int:
    sample = np.asarray(sample)
    return evaluate_terms(logic, unary_digits(reqs, sample))
