"""Structural netlist of the full classifier: comparator banks feeding AND-OR label logic.

Cell naming is a pure function of the lowered artifacts:

* ``vin_f{f}``              analog input of feature f
* ``u_f{f}_d{k}``           comparator producing unary digit k of feature f
* ``n_c{c}_t{t}_l{i}``      inverter for negated literal i of term t of label c
* ``t_c{c}_t{t}``           AND of term t of label c (only for 0 or >= 2 literals)
* ``y_c{c}``                OR of label c's terms (only for 0 or >= 2 terms)
* ``label_{c}``             primary output of label c

An AND with no inputs is constant 1 and an OR with no inputs constant 0.
Gates are not shared across labels.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from pathlib import Path

from .adc import AdcSpec
from .cost import InconsistentArtifactsError
from .unary import LabelLogic

KINDS = ("input", "comparator", "not", "and", "or", "output")
MODULE_NAME = "bespoke_dt"


class NetlistError(RuntimeError):
    pass


@dataclass(frozen=True)
class Cell:
    id: str
    kind: str
    inputs: tuple[str, ...] = ()
    params: tuple[tuple[str, int], ...] = ()

    def param(self, name: str) -> int:
        return dict(self.params)[name]

    def to_dict(self) -> dict:
        return {"id": self.id, "kind": self.kind, "inputs": list(self.inputs), "params": dict(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "Cell":
        return cls(d["id"], d["kind"], tuple(d["inputs"]), tuple(sorted(d["params"].items())))


@dataclass
class Netlist:
    cells: list[Cell]
    metadata: dict = field(default_factory=dict)

    def by_kind(self, kind: str) -> list[Cell]:
        return [c for c in self.cells if c.kind == kind]

    def to_dict(self) -> dict:
        return {"metadata": dict(self.metadata), "cells": [c.to_dict() for c in self.cells]}

    @classmethod
    def from_dict(cls, d: dict) -> "Netlist":
        return cls([Cell.from_dict(c) for c in d["cells"]], dict(d["metadata"]))

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=indent)

    def validate(self) -> list[str]:
        """Topological order of cell ids; raises NetlistError on a malformed netlist."""
        ids = [c.id for c in self.cells]
        if len(set(ids)) != len(ids):
            raise NetlistError("duplicate cell ids")
        known = set(ids)
        graph = {}
        for c in self.cells:
            if c.kind not in KINDS:
                raise NetlistError(f"{c.id}: unknown kind {c.kind}")
            missing = [i for i in c.inputs if i not in known]
            if missing:
                raise NetlistError(f"{c.id}: undriven inputs {missing}")
            arity = {"input": 0, "comparator": 1, "not": 1, "output": 1}.get(c.kind)
            if arity is not None and len(c.inputs) != arity:
                raise NetlistError(f"{c.id}: {c.kind} cell needs {arity} inputs")
            graph[c.id] = set(c.inputs)
        try:
            order = list(TopologicalSorter(graph).static_order())
        except CycleError as exc:
            raise NetlistError(f"combinational loop: {exc.args[1]}") from None
        n_out = len(self.by_kind("output"))
        if "num_classes" in self.metadata and n_out != self.metadata["num_classes"]:
            raise NetlistError(f"{n_out} outputs for {self.metadata['num_classes']} labels")
        return order


def emit(adcs: list[AdcSpec], logic: LabelLogic, dataset: str = "", tree_hash: str = "") -> Netlist:
    available = {(a.feature, k) for a in adcs for k in a.retained}
    for _, term in logic.all_terms():
        for lit in term:
            if (lit.feature, lit.digit) not in available:
                raise InconsistentArtifactsError(f"literal {lit} has no comparator")

    cells: list[Cell] = []
    for a in adcs:
        cells.append(Cell(f"vin_f{a.feature}", "input", (), (("feature", a.feature),)))
    for a in adcs:
        for k in a.retained:
            cells.append(
                Cell(f"u_f{a.feature}_d{k}", "comparator", (f"vin_f{a.feature}",), (("feature", a.feature), ("level", k)))
            )

    for c in range(logic.num_classes):
        term_signals = []
        for t, term in enumerate(logic.terms_for(c)):
            lits = []
            for i, lit in enumerate(term):
                src = f"u_f{lit.feature}_d{lit.digit}"
                if lit.positive:
                    lits.append(src)
                else:
                    inv = f"n_c{c}_t{t}_l{i}"
                    cells.append(Cell(inv, "not", (src,)))
                    lits.append(inv)
            if len(lits) == 1:
                term_signals.append(lits[0])
            else:
                cells.append(Cell(f"t_c{c}_t{t}", "and", tuple(lits)))
                term_signals.append(f"t_c{c}_t{t}")
        if len(term_signals) == 1:
            label_signal = term_signals[0]
        else:
            cells.append(Cell(f"y_c{c}", "or", tuple(term_signals)))
            label_signal = f"y_c{c}"
        cells.append(Cell(f"label_{c}", "output", (label_signal,), (("label", c),)))

    bits = adcs[0].bits if adcs else None
    netlist = Netlist(
        cells,
        {
            "dataset": dataset,
            "tree_hash": tree_hash,
            "bits": bits,
            "comparator_count": sum(a.u_d for a in adcs),
            "num_classes": logic.num_classes,
        },
    )
    netlist.validate()
    return netlist


def simulate_netlist(netlist: Netlist, sample) -> int:
    """Evaluate every cell in topological order; return the single asserted label."""
    cells = {c.id: c for c in netlist.cells}
    val: dict[str, int] = {}
    for cid in netlist.validate():
        c = cells[cid]
        ins = [val[i] for i in c.inputs]
        if c.kind == "input":
            val[cid] = int(sample[c.param("feature")])
        elif c.kind == "comparator":
            val[cid] = int(ins[0] >= c.param("level"))
        elif c.kind == "not":
            val[cid] = 1 - ins[0]
        elif c.kind == "and":
            val[cid] = int(all(ins))
        elif c.kind == "or":
            val[cid] = int(any(ins))
        else:
            val[cid] = ins[0]
    hot = [c.param("label") for c in netlist.by_kind("output") if val[c.id]]
    if len(hot) != 1:
        raise NetlistError(f"{len(hot)} outputs asserted: {hot}")
    return hot[0]


def to_structural_hdl(netlist: Netlist) -> str:
    inputs = [c for c in netlist.cells if c.kind == "input"]
    outputs = [c for c in netlist.cells if c.kind == "output"]
    ports = [c.id for c in inputs] + [c.id for c in outputs]
    lines = [
        "// structural netlist of a bespoke unary decision-tree classifier",
        "// meta " + json.dumps(netlist.metadata, sort_keys=True),
        f"module {MODULE_NAME} ({', '.join(ports)});",
    ]
    lines += [f"  input {c.id};" for c in inputs]
    lines += [f"  output {c.id};" for c in outputs]
    lines += [f"  wire {c.id};" for c in netlist.cells if c.kind not in ("input", "output")]
    for c in netlist.cells:
        if c.kind == "comparator":
            lines.append(
                f"  comparator #(.FEATURE({c.param('feature')}), .LEVEL({c.param('level')}), "
                f".BITS({netlist.metadata.get('bits')})) cmp_{c.id} (.vin({c.inputs[0]}), .out({c.id}));"
            )
        elif c.kind in ("and", "or") and not c.inputs:
            lines.append(f"  assign {c.id} = 1'b{1 if c.kind == 'and' else 0};  // empty {c.kind}")
        elif c.kind in ("and", "or", "not"):
            lines.append(f"  {c.kind} g_{c.id} ({c.id}, {', '.join(c.inputs)});")
        elif c.kind == "output":
            lines.append(f"  assign {c.id} = {c.inputs[0]};")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def export_structural_hdl(netlist: Netlist, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(to_structural_hdl(netlist))
    return path


_RE_META = re.compile(r"^// meta (.*)$")
_RE_INPUT = re.compile(r"^input (vin_f(\d+));$")
_RE_CMP = re.compile(
    r"^comparator #\(\.FEATURE\((\d+)\), \.LEVEL\((\d+)\), \.BITS\(\w+\)\) cmp_(\S+) \(\.vin\((\S+)\), \.out\((\S+)\)\);$"
)
_RE_CONST = re.compile(r"^assign (\S+) = 1'b([01]);")
_RE_GATE = re.compile(r"^(and|or|not) g_(\S+) \((.*)\);$")
_RE_ASSIGN = re.compile(r"^assign (label_(\d+)) = (\S+);$")


def parse_structural_hdl(text: str) -> Netlist:
    """Inverse of :func:`to_structural_hdl` for files this module wrote."""
    meta: dict = {}
    cells: list[Cell] = []
    for raw in text.splitlines():
        line = raw.strip()
        if m := _RE_META.match(line):
            meta = json.loads(m.group(1))
        elif m := _RE_INPUT.match(line):
            cells.append(Cell(m.group(1), "input", (), (("feature", int(m.group(2))),)))
        elif m := _RE_CMP.match(line):
            f, k, _, src, out = m.groups()
            cells.append(Cell(out, "comparator", (src,), (("feature", int(f)), ("level", int(k)))))
        elif m := _RE_CONST.match(line):
            cells.append(Cell(m.group(1), "and" if m.group(2) == "1" else "or"))
        elif m := _RE_GATE.match(line):
            kind, _, args = m.groups()
            out, *ins = [a.strip() for a in args.split(",")]
            cells.append(Cell(out, kind, tuple(ins)))
        elif m := _RE_ASSIGN.match(line):
            cells.append(Cell(m.group(1), "output", (m.group(3),), (("label", int(m.group(2))),)))
    return Netlist(cells, meta)
