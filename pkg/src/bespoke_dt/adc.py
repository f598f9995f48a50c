"""Bespoke flash ADCs: keep only the comparators whose unary digits the tree reads."""

from __future__ import annotations

from dataclasses import dataclass

from .unary import DigitRequirement


@dataclass(frozen=True)
class AdcSpec:
    feature: int
    bits: int
    retained: tuple[int, ...]

    def __post_init__(self) -> None:
        top = (1 << self.bits) - 1
        if list(self.retained) != sorted(set(self.retained)):
            raise ValueError("retained comparator indices must be sorted and unique")
        if any(not 1 <= k <= top for k in self.retained):
            raise ValueError(f"comparator index outside [1, {top}]")

    @property
    def u_d(self) -> int:
        return len(self.retained)

    def to_dict(self) -> dict:
        return {"feature": self.feature, "bits": self.bits, "retained": list(self.retained), "u_d": self.u_d}

    @classmethod
    def from_dict(cls, d: dict) -> "AdcSpec":
        return cls(feature=d["feature"], bits=d["bits"], retained=tuple(d["retained"]))


def derive_adcs(reqs: list[DigitRequirement], bits: int) -> list[AdcSpec]:
    """One ADC per feature with a digit requirement; unused features get none."""
    return [AdcSpec(r.feature, bits, tuple(sorted(set(r.digits)))) for r in sorted(reqs, key=lambda r: r.feature)]


def simulate_adc(spec: AdcSpec, value: int) -> tuple[int, ...]:
    """Ideal comparator outputs on the quantized grid: comparator k fires iff value >= k."""
    top = (1 << spec.bits) - 1
    if not 0 <= value <= top:
        raise ValueError(f"input level {value} outside [0, {top}]")
    return tuple(int(value >= k) for k in spec.retained)


def comparator_count(adcs: list[AdcSpec]) -> int:
    return sum(a.u_d for a in adcs)
