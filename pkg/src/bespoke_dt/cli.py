"""Command-line front end: fetch, train, explore, emit, report.

Every command that writes artifacts also writes ``manifest.json`` next to
them (config, config hash, dataset checksum, seeds, package version), which
is enough to re-run it and get byte-identical outputs. Logs go to stderr as
JSON lines.

Exit codes: 0 success, 2 bad configuration, 3 data/checksum problem,
4 internal invariant violation, 1 anything else.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import re
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .adc import derive_adcs, simulate_adc
from .cost import HardwareReport, InconsistentArtifactsError, load_params, markdown_table, report
from .dataset import CsvSchema, DatasetError, QuantizedDataset, quantize, split_train_test
from .explorer import (
    DEFAULT_DEPTHS,
    DEFAULT_LOSSES,
    DEFAULT_SEEDS,
    DEFAULT_TAUS,
    ExplorationGrid,
    GridError,
    compare_reports,
    run_sweep,
    verify_lowering,
)
from .netlist import NetlistError, emit, export_structural_hdl, simulate_netlist
from .sources import FIXTURES, ChecksumError, fetch, load_dataset, load_manifest
from .trainer import DecisionTree, accuracy, predict_many, train_adc_aware, train_baseline
from .unary import LogicConsistencyError, lower_tree

log = logging.getLogger("bespoke_dt")

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_DATA, EXIT_INVARIANT = 0, 1, 2, 3, 4


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- logging

_STD_ATTRS = set(vars(logging.LogRecord("", 0, "", 0, "", None, None))) | {"message", "asctime"}


class JsonLinesFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        out = {"level": record.levelname.lower(), "logger": record.name, "msg": record.getMessage()}
        out.update({k: v for k, v in vars(record).items() if k not in _STD_ATTRS})
        return json.dumps(out, sort_keys=True, default=str)


def setup_logging(level: str = "info") -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonLinesFormatter())
    root = logging.getLogger("bespoke_dt")
    root.handlers[:] = [handler]
    root.setLevel(level.upper())
    root.propagate = False


# ---------------------------------------------------------------- config

def parse_float_grid(text: str) -> tuple[float, ...]:
    """``"0:0.03:0.005"`` (inclusive range) or ``"0,0.01,0.02"``."""
    text = text.strip()
    if not text:
        raise ConfigError("tau grid is empty")
    if ":" in text:
        try:
            start, stop, step = (float(p) for p in text.split(":"))
        except ValueError:
            raise ConfigError(f"bad range {text!r}; expected start:stop:step") from None
        if step <= 0:
            raise ConfigError("range step must be > 0")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        if n <= 0:
            raise ConfigError(f"range {text!r} is empty")
        return tuple(round(start + i * step, 10) for i in range(n))
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"bad number list {text!r}") from None


def parse_int_grid(text: str) -> tuple[int, ...]:
    """``"2-8"`` (inclusive) or ``"2,4,8"``."""
    text = text.strip()
    if not text:
        raise ConfigError("integer grid is empty")
    out: list[int] = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        m = re.fullmatch(r"(\d+)-(\d+)", part)
        if m:
            out.extend(range(int(m.group(1)), int(m.group(2)) + 1))
        elif re.fullmatch(r"-?\d+", part):
            out.append(int(part))
        else:
            raise ConfigError(f"bad integer list {text!r}")
    if not out:
        raise ConfigError(f"integer grid {text!r} is empty")
    return tuple(out)


def parse_losses(text: str) -> tuple[float, ...]:
    """Loss thresholds in percent, e.g. ``"0,1,5"``."""
    vals = parse_float_grid(text)
    return tuple(round(v / 100.0, 12) for v in vals)


@dataclass
class RunConfig:
    command: str
    dataset: str
    bits: int = 4
    split_seed: int = 0
    tau_values: tuple[float, ...] = DEFAULT_TAUS
    depth_values: tuple[int, ...] = DEFAULT_DEPTHS
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    loss_thresholds: tuple[float, ...] = DEFAULT_LOSSES
    power_budget: float = 2.0
    tech_config: str | None = None
    schema: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.bits < 1 or self.bits > 12:
            raise ConfigError("bits must lie in [1, 12]")
        if self.power_budget <= 0:
            raise ConfigError("power budget must be > 0")
        try:
            self.grid()
        except GridError as exc:
            raise ConfigError(str(exc)) from None

    def grid(self) -> ExplorationGrid:
        return ExplorationGrid(self.tau_values, self.depth_values, self.seeds, self.loss_thresholds)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    def hash(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()


def config_from_args(args: argparse.Namespace) -> RunConfig:
    schema = {}
    if getattr(args, "label_column", None) is not None:
        lc = args.label_column
        schema["label_column"] = int(lc) if lc.lstrip("-").isdigit() else lc
    if getattr(args, "delimiter", None) is not None:
        schema["delimiter"] = None if args.delimiter == "whitespace" else args.delimiter
    if getattr(args, "header", False):
        schema["has_header"] = True
    cfg = RunConfig(
        command=args.command,
        dataset=args.dataset,
        bits=args.bits,
        split_seed=args.split_seed,
        power_budget=args.budget_mw,
        tech_config=args.tech_config,
        schema=schema,
    )
    if hasattr(args, "tau_grid"):
        cfg.tau_values = parse_float_grid(args.tau_grid)
        cfg.depth_values = parse_int_grid(args.depths)
        cfg.seeds = parse_int_grid(args.seeds)
        cfg.loss_thresholds = parse_losses(args.loss)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------- helpers

def prepare_dataset(cfg: RunConfig) -> QuantizedDataset:
    schema = CsvSchema.from_dict(cfg.schema) if cfg.schema else None
    raw = load_dataset(cfg.dataset, schema=schema)
    return split_train_test(quantize(raw, cfg.bits), cfg.split_seed)


def load_cost_params(cfg: RunConfig):
    return load_params(cfg.tech_config).replace(power_budget=cfg.power_budget)


def write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n")
    return path


def write_manifest(out: Path, cfg: RunConfig, ds: QuantizedDataset | None, outputs: list[Path]) -> Path:
    manifest = {
        "tool": "bespoke-dt",
        "version": __version__,
        "config": cfg.to_dict(),
        "config_hash": cfg.hash(),
        "dataset_checksum": ds.checksum() if ds is not None else None,
        "split_seed": cfg.split_seed,
        "seeds": list(cfg.seeds),
        "outputs": sorted(p.name for p in outputs),
    }
    return write_json(out / "manifest.json", manifest)


def check_end_to_end(tree: DecisionTree, X: np.ndarray) -> None:
    """Software tree, lowered logic, ADC bits and netlist must agree on every row of X."""
    verify_lowering(tree, X)
    reqs, logic = lower_tree(tree)
    adcs = derive_adcs(reqs, tree.bits)
    net = emit(adcs, logic)
    want = predict_many(tree, X)
    for row, label in zip(X, want):
        for a in adcs:
            bits = simulate_adc(a, int(row[a.feature]))
            if bits != tuple(int(row[a.feature] >= k) for k in a.retained):
                raise InconsistentArtifactsError(f"ADC {a.feature} output mismatch")
        if simulate_netlist(net, row) != label:
            raise InconsistentArtifactsError(f"netlist disagrees with tree on {row.tolist()}")


def hardware_for(tree: DecisionTree, params, acc: float | None) -> HardwareReport:
    reqs, logic = lower_tree(tree)
    return report(tree, reqs, logic, derive_adcs(reqs, tree.bits), params, acc)


# ---------------------------------------------------------------- commands

def cmd_fetch(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    names = list(manifest) if args.dataset == "all" else [args.dataset]
    for name in names:
        if name not in manifest:
            raise ConfigError(f"unknown dataset {name!r}; known: {', '.join(sorted(manifest))}")
        path = fetch(manifest[name], allow_unpinned=args.allow_unpinned)
        log.info("dataset ready", extra={"dataset": name, "path": str(path)})
        print(f"{name}\t{path}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    cfg = config_from_args(args)
    cfg.extra = {"mode": args.mode, "depth": args.depth, "tau": args.tau, "seed": args.seed}
    if args.depth < 1 or args.depth > 16:
        raise ConfigError("depth must lie in [1, 16]")
    if args.tau < 0:
        raise ConfigError("tau must be >= 0")
    cfg.seeds = (args.seed,)
    ds = prepare_dataset(cfg)
    params = load_cost_params(cfg)
    if args.mode == "baseline":
        tree = train_baseline(ds, args.depth, args.seed)
    else:
        tree = train_adc_aware(ds, args.depth, args.tau, args.seed)
    check_end_to_end(tree, ds.features)
    acc = accuracy(tree, ds, "test")
    rep = hardware_for(tree, params, acc)
    reqs, logic = lower_tree(tree)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = [
        write_json(out / "tree.json", tree.to_dict()),
        write_json(out / "lowered.json", {"requirements": [r.to_dict() for r in reqs], "logic": logic.to_dict()}),
        write_json(out / "report.json", rep.to_dict()),
    ]
    write_manifest(out, cfg, ds, written)
    log.info("trained", extra={"dataset": ds.name, "accuracy": acc, "comparators": rep.comparator_count})
    print(markdown_table([(f"{ds.name} {args.mode} (depth {args.depth})", rep)]), end="")
    return EXIT_OK


def cmd_explore(args: argparse.Namespace) -> int:
    cfg = config_from_args(args)
    ds = prepare_dataset(cfg)
    params = load_cost_params(cfg)
    log.info("exploring", extra={"dataset": ds.name, "points": len(cfg.tau_values) * len(cfg.depth_values)})
    result = run_sweep(ds, cfg.grid(), params, jobs=args.jobs)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "exploration.json").write_text(result.to_json())
    (out / "runs.csv").write_text(result.runs_csv())
    (out / "summary.md").write_text(result.summary_markdown())
    written = [out / "exploration.json", out / "runs.csv", out / "summary.md"]
    write_json(out / "baseline_tree.json", result.baseline.tree.to_dict())
    written.append(out / "baseline_tree.json")
    for t, d in result.selected.items():
        if d is not None:
            written.append(write_json(out / f"selected_{100 * t:g}pct_tree.json", d.tree.to_dict()))
    write_manifest(out, cfg, ds, written)
    print(result.summary_markdown(), end="")
    return EXIT_OK


def _load_tree_and_data(args: argparse.Namespace, cfg: RunConfig) -> tuple[DecisionTree, QuantizedDataset]:
    tree = DecisionTree.from_dict(json.loads(Path(args.tree).read_text()))
    ds = prepare_dataset(cfg)
    if tree.dataset_checksum and tree.dataset_checksum != ds.checksum():
        raise InconsistentArtifactsError("tree was trained on a different dataset/split than the one configured")
    if tree.bits != ds.bits or tree.n_features != ds.n_features:
        raise InconsistentArtifactsError("tree and dataset disagree on bits or feature count")
    return tree, ds


def cmd_emit(args: argparse.Namespace) -> int:
    cfg = config_from_args(args)
    cfg.extra = {"tree": str(args.tree)}
    tree, ds = _load_tree_and_data(args, cfg)
    check_end_to_end(tree, ds.features)
    reqs, logic = lower_tree(tree)
    tree_hash = hashlib.sha256(tree.to_json().encode()).hexdigest()
    net = emit(derive_adcs(reqs, tree.bits), logic, dataset=ds.name, tree_hash=tree_hash)
    if tree.n_features <= 2 and tree.bits <= 4:
        grid = np.array(np.meshgrid(*[np.arange(1 << tree.bits)] * tree.n_features, indexing="ij")).reshape(
            tree.n_features, -1
        ).T
        check_end_to_end(tree, grid)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "netlist.json", out / "classifier.v"]
    (out / "netlist.json").write_text(net.to_json(indent=1) + "\n")
    export_structural_hdl(net, out / "classifier.v")
    write_manifest(out, cfg, ds, written)
    counts = {k: len(net.by_kind(k)) for k in ("comparator", "not", "and", "or", "output")}
    log.info("emitted", extra={"dataset": ds.name, **counts})
    print(json.dumps(counts, sort_keys=True))
    return EXIT_OK


def _read_report(path: str) -> tuple[str, HardwareReport]:
    d = json.loads(Path(path).read_text())
    if "selected" in d and "baseline" in d:
        raise ConfigError(f"{path} is an exploration result; pass it with --exploration")
    return Path(path).stem, HardwareReport.from_dict(d)


def cmd_report(args: argparse.Namespace) -> int:
    rows: list[tuple[str, HardwareReport]] = []
    factors: list[tuple[str, float, float]] = []
    if args.exploration:
        d = json.loads(Path(args.exploration).read_text())
        base = HardwareReport.from_dict(d["baseline"]["report"])
        rows.append((f"{d['dataset']} ADC-unaware", base))
        for t, sel in sorted(d["selected"].items(), key=lambda kv: float(kv[0])):
            if sel is None:
                factors.append((f"<= {100 * float(t):g}% loss", float("nan"), float("nan")))
                continue
            ours = HardwareReport.from_dict(sel["report"])
            rows.append((f"{d['dataset']} ADC-aware <= {100 * float(t):g}% loss", ours))
            factors.append((f"<= {100 * float(t):g}% loss", *compare_reports(ours, base)))
    elif args.ours and args.baseline:
        bname, base = _read_report(args.baseline)
        oname, ours = _read_report(args.ours)
        rows += [(bname, base), (oname, ours)]
        factors.append((oname, *compare_reports(ours, base)))
    else:
        raise ConfigError("report needs --exploration, or both --ours and --baseline")

    text = markdown_table(rows)
    text += "\n| Design | Area reduction (x) | Power reduction (x) |\n|---|---|---|\n"
    text += "".join(
        f"| {n} | {'n/a' if a != a else f'{a:.2f}x'} | {'n/a' if p != p else f'{p:.2f}x'} |\n" for n, a, p in factors
    )
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", required=True, help=f"manifest name ({', '.join(FIXTURES)}, ...) or CSV path")
    p.add_argument("--bits", type=int, default=4, help="input precision (default 4)")
    p.add_argument("--split-seed", type=int, default=0, help="seed of the stratified 70/30 split")
    p.add_argument("--budget-mw", type=float, default=2.0, help="self-power budget in mW (default 2.0)")
    p.add_argument("--tech-config", default=None, help="technology JSON (default: bundled fitted defaults)")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--label-column", default=None, help="label column index or header name (CSV paths)")
    p.add_argument("--delimiter", default=None, help="CSV delimiter, or 'whitespace'")
    p.add_argument("--header", action="store_true", help="CSV has a header row")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bespoke-dt", description=__doc__.splitlines()[0])
    parser.add_argument("--log-level", default="info", choices=["debug", "info", "warning", "error"])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="download and checksum datasets into the cache")
    p.add_argument("--dataset", default="all", help="manifest name or 'all'")
    p.add_argument("--manifest", default=None, help="alternative manifest JSON")
    p.add_argument("--allow-unpinned", action="store_true", help="pin the first download of unpinned entries")
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("train", help="train one tree, lower, price and verify it")
    _common(p)
    p.add_argument("--mode", choices=["baseline", "adc_aware"], default="baseline")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("explore", help="sweep (tau, depth, seed) and select designs per loss threshold")
    _common(p)
    p.add_argument("--tau-grid", default="0:0.03:0.005", help="start:stop:step or comma list")
    p.add_argument("--depths", default="2-8", help="e.g. 2-8 or 2,4,6")
    p.add_argument("--seeds", default="0-4", help="tie-break seeds per grid point")
    p.add_argument("--loss", default="0,1,5", help="accuracy-loss thresholds in percent")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("emit", help="emit netlist JSON and structural HDL for a trained tree")
    _common(p)
    p.add_argument("--tree", required=True, help="tree JSON written by train/explore")
    p.set_defaults(func=cmd_emit)

    p = sub.add_parser("report", help="print summary table rows and reduction factors")
    p.add_argument("--exploration", default=None, help="exploration.json from explore")
    p.add_argument("--ours", default=None, help="report.json of the design under comparison")
    p.add_argument("--baseline", default=None, help="report.json of the reference design")
    p.add_argument("--out", default=None, help="also write the table to this file")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    try:
        return args.func(args)
    except (ConfigError, GridError) as exc:
        log.error("invalid configuration", extra={"error": str(exc)})
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InconsistentArtifactsError, LogicConsistencyError, NetlistError) as exc:
        log.error("invariant violation", extra={"error": str(exc), "type": type(exc).__name__})
        print(f"error: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (DatasetError, ChecksumError, FileNotFoundError) as exc:
        log.error("data error", extra={"error": str(exc), "type": type(exc).__name__})
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - last-resort diagnostic
        log.error("failed", extra={"error": str(exc), "type": type(exc).__name__})
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
