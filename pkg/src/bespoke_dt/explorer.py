"""Brute-force (tau, depth, seed) sweep with accuracy-loss-constrained design selection."""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .adc import comparator_count, derive_adcs
from .cost import (
    CostModelParams,
    HardwareReport,
    InconsistentArtifactsError,
    load_params,
    markdown_table,
    report,
)
from .dataset import QuantizedDataset
from .trainer import DecisionTree, accuracy, predict_many, train_adc_aware, train_baseline
from .unary import evaluate_logic, lower_tree

log = logging.getLogger(__name__)

DEFAULT_TAUS = (0.0, 0.005, 0.01, 0.015, 0.02, 0.025, 0.03)
DEFAULT_DEPTHS = (2, 3, 4, 5, 6, 7, 8)
DEFAULT_SEEDS = (0, 1, 2, 3, 4)
DEFAULT_LOSSES = (0.0, 0.01, 0.05)
ACC_TOL = 1e-12


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class ExplorationGrid:
    tau_values: tuple[float, ...] = DEFAULT_TAUS
    depth_values: tuple[int, ...] = DEFAULT_DEPTHS
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    loss_thresholds: tuple[float, ...] = DEFAULT_LOSSES

    def __post_init__(self) -> None:
        for name in ("tau_values", "depth_values", "seeds", "loss_thresholds"):
            if not getattr(self, name):
                raise GridError(f"{name} must not be empty")
        if any(t < 0 for t in self.tau_values):
            raise GridError("tau values must be non-negative")
        if list(self.tau_values) != sorted(self.tau_values):
            raise GridError("tau values must be sorted")
        if any(l < 0 for l in self.loss_thresholds):
            raise GridError("loss thresholds must be non-negative")
        if any(not 1 <= d <= 16 for d in self.depth_values):
            raise GridError("depths must lie in [1, 16]")

    def to_dict(self) -> dict:
        return {k: list(v) for k, v in asdict(self).items()}


@dataclass
class Design:
    """One trained-and-priced tree."""

    mode: str
    tau: float
    depth: int
    seed: int
    accuracy: float
    report: HardwareReport
    tree: DecisionTree | None = None

    @property
    def key(self) -> tuple[float, int, int]:
        return (self.tau, self.depth, self.seed)

    def to_dict(self, with_tree: bool = True) -> dict:
        d = {
            "mode": self.mode,
            "tau": self.tau,
            "depth": self.depth,
            "seed": self.seed,
            "accuracy": self.accuracy,
            "report": self.report.to_dict(),
        }
        if with_tree and self.tree is not None:
            d["tree"] = self.tree.to_dict()
        return d


def verify_lowering(tree: DecisionTree, X: np.ndarray) -> None:
    """Raise if the lowered two-level logic disagrees with tree traversal on any row of X."""
    reqs, logic = lower_tree(tree)
    expected = predict_many(tree, X)
    for row, want in zip(X, expected):
        got = evaluate_logic(reqs, logic, row)
        if got != want:
            raise InconsistentArtifactsError(f"lowered logic gives {got}, tree gives {want} on {row.tolist()}")


def evaluate_design(
    ds: QuantizedDataset, mode: str, depth: int, seed: int, params: CostModelParams, tau: float = 0.0
) -> Design:
    if mode == "baseline":
        tree = train_baseline(ds, depth, seed)
    else:
        tree = train_adc_aware(ds, depth, tau, seed)
    reqs, logic = lower_tree(tree)
    adcs = derive_adcs(reqs, ds.bits)
    if comparator_count(adcs) != len(tree.pairs()):
        raise InconsistentArtifactsError("comparator count differs from distinct split pairs")
    verify_lowering(tree, ds.features)
    acc = accuracy(tree, ds, "test")
    rep = report(tree, reqs, logic, adcs, params, acc)
    return Design(mode, tau, depth, seed, acc, rep, tree)


def _work(item: tuple) -> Design:
    return evaluate_design(*item)


def _map(items: list[tuple], jobs: int) -> list[Design]:
    if jobs <= 1 or len(items) < 2:
        return [_work(i) for i in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_work, items, chunksize=max(1, len(items) // (4 * jobs))))


def _best_accuracy(designs: list[Design]) -> Design:
    # max accuracy; ties -> smaller depth, then smaller seed
    return min(designs, key=lambda d: (-d.accuracy, d.depth, d.seed))


def run_baseline_selection(
    ds: QuantizedDataset,
    depths=DEFAULT_DEPTHS,
    seeds=DEFAULT_SEEDS,
    params: CostModelParams | None = None,
    jobs: int = 1,
) -> Design:
    """Max test accuracy over (depth, seed); ties go to the minimum depth, then minimum seed."""
    params = params or load_params()
    if not depths or not seeds:
        raise GridError("depths and seeds must not be empty")
    items = [(ds, "baseline", d, s, params) for d in depths for s in seeds]
    return _best_accuracy(_map(items, jobs))


def select_designs(
    points: list[Design], baseline_accuracy: float, thresholds
) -> dict[float, Design | None]:
    """Per loss threshold, the minimum-power qualifying point (ties: area, tau, depth)."""
    out = {}
    for t in thresholds:
        ok = [p for p in points if p.accuracy >= baseline_accuracy - t - ACC_TOL]
        out[t] = (
            min(ok, key=lambda p: (p.report.total_power, p.report.total_area, p.tau, p.depth)) if ok else None
        )
    return out


def compare_reports(ours: HardwareReport, baseline: HardwareReport) -> tuple[float, float]:
    """Reduction factors (area x, power x) = baseline / ours."""
    if ours.total_area <= 0 or ours.total_power <= 0:
        raise ZeroDivisionError("design under comparison has zero total area or power")
    return baseline.total_area / ours.total_area, baseline.total_power / ours.total_power


def reduction_percent(ours: HardwareReport, baseline: HardwareReport) -> dict[str, float]:
    def pct(a: float, b: float) -> float:
        return 0.0 if b == 0 else 100.0 * (1.0 - a / b)

    return {
        "total_area": pct(ours.total_area, baseline.total_area),
        "total_power": pct(ours.total_power, baseline.total_power),
        "adc_area": pct(ours.adc_area, baseline.adc_area),
        "adc_power": pct(ours.adc_power, baseline.adc_power),
        "comparators": pct(ours.comparator_count, baseline.comparator_count),
    }


@dataclass
class ExplorationResult:
    dataset: str
    split_seed: int | None
    grid: ExplorationGrid
    baseline: Design
    runs: list[Design]
    grid_points: list[Design]
    selected: dict[float, Design | None] = field(default_factory=dict)

    def to_dict(self) -> dict:
        sel = {}
        for t, d in self.selected.items():
            if d is None:
                sel[repr(t)] = None
                continue
            sel[repr(t)] = {
                **d.to_dict(),
                "reduction_vs_baseline_pct": reduction_percent(d.report, self.baseline.report),
            }
        return {
            "dataset": self.dataset,
            "split_seed": self.split_seed,
            "grid": self.grid.to_dict(),
            "baseline": self.baseline.to_dict(),
            "grid_points": [p.to_dict() for p in self.grid_points],
            "runs": [r.to_dict(with_tree=False) for r in self.runs],
            "selected": sel,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    def runs_csv(self) -> str:
        best = {p.key for p in self.grid_points}
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([
            "tau", "depth", "seed", "accuracy", "comparators", "inputs", "adc_area", "adc_power",
            "logic_area", "logic_power", "total_area", "total_power", "meets_budget", "grid_point",
        ])
        for r in self.runs:
            rep = r.report
            w.writerow([
                repr(r.tau), r.depth, r.seed, repr(r.accuracy), rep.comparator_count, rep.input_count,
                repr(rep.adc_area), repr(rep.adc_power), repr(rep.logic_area), repr(rep.logic_power),
                repr(rep.total_area), repr(rep.total_power), int(rep.meets_budget), int(r.key in best),
            ])
        return buf.getvalue()

    def summary_markdown(self) -> str:
        rows = [(f"{self.dataset} ADC-unaware (depth {self.baseline.depth})", self.baseline.report)]
        for t, d in self.selected.items():
            if d is not None:
                rows.append((f"{self.dataset} ADC-aware <= {100 * t:g}% loss (tau {d.tau:g}, depth {d.depth})", d.report))
        lines = [markdown_table(rows), "| Loss threshold | Area reduction (%) | Power reduction (%) |", "|---|---|---|"]
        for t, d in self.selected.items():
            if d is None:
                lines.append(f"| {100 * t:g}% | n/a | n/a |")
            else:
                red = reduction_percent(d.report, self.baseline.report)
                lines.append(f"| {100 * t:g}% | {red['total_area']:.1f} | {red['total_power']:.1f} |")
        return "\n".join(lines) + "\n"


def run_sweep(
    ds: QuantizedDataset,
    grid: ExplorationGrid | None = None,
    params: CostModelParams | None = None,
    jobs: int = 1,
) -> ExplorationResult:
    grid = grid or ExplorationGrid()
    params = params or load_params()
    base_items = [(ds, "baseline", d, s, params) for d in grid.depth_values for s in grid.seeds]
    sweep_items = [
        (ds, "adc_aware", d, s, params, tau) for tau in grid.tau_values for d in grid.depth_values for s in grid.seeds
    ]
    results = _map(base_items + sweep_items, jobs)
    baseline = _best_accuracy(results[: len(base_items)])
    runs = sorted(results[len(base_items):], key=lambda r: r.key)

    grouped: dict[tuple[float, int], list[Design]] = {}
    for r in runs:
        grouped.setdefault((r.tau, r.depth), []).append(r)
    grid_points = sorted((_best_accuracy(v) for v in grouped.values()), key=lambda r: r.key)

    selected = select_designs(grid_points, baseline.accuracy, grid.loss_thresholds)
    log.info(
        "sweep done",
        extra={"dataset": ds.name, "runs": len(runs), "baseline_accuracy": baseline.accuracy},
    )
    return ExplorationResult(ds.name, ds.seed, grid, baseline, runs, grid_points, selected)
