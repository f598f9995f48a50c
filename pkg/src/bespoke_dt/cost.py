"""Area/power pricing of bespoke ADCs and of the two-level label logic.

ADC side: area is affine in the number of retained comparators and does not
depend on which ones; comparator ``k`` draws ``a + b*k`` mW, with ``a`` and
``b`` solved from the lowest-order and highest-order 4-comparator ADC
measurements (47 uW for digits 1-4, 205 uW for digits 12-15).

Logic side: a literal-count proxy (literals + product terms + driven labels,
times a per-unit constant). It is not a synthesis result and is only
meaningful for relative comparisons.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

from .adc import AdcSpec, comparator_count
from .trainer import DecisionTree
from .unary import DigitRequirement, LabelLogic

CONFIG_VERSION = 1

# 4-bit bespoke ADC power anchors, mW
LOW_ORDER_DIGITS = (1, 2, 3, 4)
LOW_ORDER_POWER = 0.047
HIGH_ORDER_DIGITS = (12, 13, 14, 15)
HIGH_ORDER_POWER = 0.205

CONV_ADC_AREA = 11.0
CONV_ADC_POWER = 0.83
# share of the conventional ADC area assumed to be the thermometer-to-binary encoder
ENCODER_AREA_SHARE = 0.25
LADDER_OVERHEAD_AREA = 0.05
GATE_AREA = 0.02
GATE_POWER = 0.002
POWER_BUDGET = 2.0


class InconsistentArtifactsError(ValueError):
    pass


@dataclass(frozen=True)
class CostModelParams:
    adc_base_area: float
    comparator_area: float
    comparator_power_offset: float
    comparator_power_slope: float
    conv_adc_area: float = CONV_ADC_AREA
    conv_adc_power: float = CONV_ADC_POWER
    gate_area: float = GATE_AREA
    gate_power: float = GATE_POWER
    power_budget: float = POWER_BUDGET

    def __post_init__(self) -> None:
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"{f.name} must be > 0")

    def comparator_power(self, k: int) -> float:
        return self.comparator_power_offset + self.comparator_power_slope * k

    def to_dict(self) -> dict:
        return {"version": CONFIG_VERSION, "units": {"area": "mm2", "power": "mW"}, **asdict(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "CostModelParams":
        if d.get("version", CONFIG_VERSION) != CONFIG_VERSION:
            raise ValueError(f"unsupported technology config version {d.get('version')}")
        names = {f.name for f in fields(cls)}
        return cls(**{k: float(v) for k, v in d.items() if k in names})

    def replace(self, **changes) -> "CostModelParams":
        return CostModelParams(**{**asdict(self), **changes})


def solve_power_anchors(
    low: tuple[tuple[int, ...], float] = (LOW_ORDER_DIGITS, LOW_ORDER_POWER),
    high: tuple[tuple[int, ...], float] = (HIGH_ORDER_DIGITS, HIGH_ORDER_POWER),
) -> tuple[float, float]:
    """Solve ``sum_k (a + b*k) = P`` for the two anchor ADCs; returns ``(a, b)``."""
    (d1, p1), (d2, p2) = low, high
    n1, s1, n2, s2 = len(d1), sum(d1), len(d2), sum(d2)
    det = n1 * s2 - n2 * s1
    if det == 0:
        raise ValueError("anchor digit sets do not determine an affine model")
    a = (p1 * s2 - p2 * s1) / det
    b = (n1 * p2 - n2 * p1) / det
    return a, b


def fit_default_params() -> CostModelParams:
    a, b = solve_power_anchors()
    full_bank_area = CONV_ADC_AREA * (1.0 - ENCODER_AREA_SHARE)
    return CostModelParams(
        adc_base_area=LADDER_OVERHEAD_AREA,
        comparator_area=(full_bank_area - LADDER_OVERHEAD_AREA) / 15,
        comparator_power_offset=a,
        comparator_power_slope=b,
    )


def default_config_path() -> Path:
    return Path(str(resources.files("bespoke_dt") / "data" / "tech_default.json"))


def load_params(path: str | Path | None = None) -> CostModelParams:
    path = Path(path) if path else default_config_path()
    return CostModelParams.from_dict(json.loads(path.read_text()))


def adc_cost(spec: AdcSpec, params: CostModelParams) -> tuple[float, float]:
    area = params.adc_base_area + params.comparator_area * spec.u_d
    power = sum(params.comparator_power(k) for k in spec.retained)
    return area, power


def logic_units(logic: LabelLogic) -> int:
    return logic.literal_count + logic.term_count + logic.active_labels


def logic_cost(logic: LabelLogic, params: CostModelParams) -> tuple[float, float]:
    units = logic_units(logic)
    return units * params.gate_area, units * params.gate_power


@dataclass
class HardwareReport:
    adcs: list[dict]
    adc_area: float
    adc_power: float
    logic_area: float
    logic_power: float
    total_area: float
    total_power: float
    comparator_count: int
    input_count: int
    literal_count: int
    term_count: int
    accuracy: float | None
    power_budget: float
    meets_budget: bool
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "HardwareReport":
        return cls(**d)


def check_consistency(
    tree: DecisionTree, reqs: list[DigitRequirement], logic: LabelLogic, adcs: list[AdcSpec]
) -> None:
    """Cross-check artifacts derived from one tree; raise on any mismatch."""
    req_map = {r.feature: tuple(r.digits) for r in reqs}
    adc_map = {a.feature: a.retained for a in adcs}
    if req_map != adc_map:
        raise InconsistentArtifactsError("ADC retained sets differ from digit requirements")
    if any(not 0 <= f < tree.n_features for f in req_map):
        raise InconsistentArtifactsError("requirement references a feature outside the tree's inputs")
    if any(a.bits != tree.bits for a in adcs):
        raise InconsistentArtifactsError("ADC precision differs from tree precision")
    pairs = {(f, k) for f, ks in req_map.items() for k in ks}
    if pairs != tree.pairs():
        raise InconsistentArtifactsError("digit requirements differ from the tree's split pairs")
    if logic.num_classes != tree.num_classes:
        raise InconsistentArtifactsError("label logic class count differs from tree")
    for _, term in logic.all_terms():
        for lit in term:
            if (lit.feature, lit.digit) not in pairs:
                raise InconsistentArtifactsError(f"literal {lit} reads a digit no ADC provides")


def report(
    tree: DecisionTree,
    reqs: list[DigitRequirement],
    logic: LabelLogic,
    adcs: list[AdcSpec],
    params: CostModelParams,
    accuracy: float | None = None,
) -> HardwareReport:
    check_consistency(tree, reqs, logic, adcs)
    per_adc = []
    for spec in adcs:
        area, power = adc_cost(spec, params)
        per_adc.append({**spec.to_dict(), "area": area, "power": power})
    adc_area = sum(a["area"] for a in per_adc)
    adc_power = sum(a["power"] for a in per_adc)
    logic_area, logic_power = logic_cost(logic, params)
    total_power = adc_power + logic_power
    return HardwareReport(
        adcs=per_adc,
        adc_area=adc_area,
        adc_power=adc_power,
        logic_area=logic_area,
        logic_power=logic_power,
        total_area=adc_area + logic_area,
        total_power=total_power,
        comparator_count=comparator_count(adcs),
        input_count=len(adcs),
        literal_count=logic.literal_count,
        term_count=logic.term_count,
        accuracy=accuracy,
        power_budget=params.power_budget,
        meets_budget=total_power <= params.power_budget,
    )


TABLE_HEADER = (
    "| Dataset | Acc (%) | #Comp. | #Inputs | ADC area (mm2) | Total area (mm2) "
    "| ADC power (mW) | Total power (mW) | Self-powered |\n"
    "|---|---|---|---|---|---|---|---|---|"
)


def markdown_row(name: str, r: HardwareReport) -> str:
    acc = "-" if r.accuracy is None else f"{100 * r.accuracy:.1f}"
    return (
        f"| {name} | {acc} | {r.comparator_count} | {r.input_count} | {r.adc_area:.2f} "
        f"| {r.total_area:.2f} | {r.adc_power:.3f} | {r.total_power:.3f} | {'yes' if r.meets_budget else 'no'} |"
    )


def markdown_table(rows: list[tuple[str, HardwareReport]]) -> str:
    return "\n".join([TABLE_HEADER, *(markdown_row(n, r) for n, r in rows)]) + "\n"
