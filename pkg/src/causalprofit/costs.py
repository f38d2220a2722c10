"""Cost-benefit bookkeeping for treatment decisions.

Decision economics are described by two 2x2 matrices indexed
``(outcome, treatment)``: a benefit matrix for what an outcome is worth
under each treatment, and a cost matrix for what applying the treatment
costs under each outcome. Their difference, the net matrix, is what every
downstream decision quantity is built from.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .exceptions import DegenerateCostStructure

__all__ = [
    "OutcomeBenefitMatrix",
    "TreatmentCostMatrix",
    "CostBenefitSpec",
    "ClassificationCostBenefitMatrix",
    "SpecViolation",
    "net_matrix",
    "validate",
    "normalize",
    "profitability_condition",
    "bonus_condition",
    "read_cost_config",
    "write_cost_config",
    "spec_from_config_dict",
    "spec_to_config_dict",
]


@dataclass(frozen=True)
class OutcomeBenefitMatrix:
    """Benefit of observing outcome y when treatment w was applied.

    Cell ``b{y}{w}`` is the benefit of outcome ``y`` under treatment ``w``.
    Entries are nonnegative and finite for a valid spec; violations are
    reported by :func:`validate` rather than rejected at construction so
    that diagnostics can name every bad cell at once.
    """

    b00: float
    b01: float
    b10: float
    b11: float

    def __post_init__(self):
        for name in ("b00", "b01", "b10", "b11"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def entries(self) -> tuple[float, float, float, float]:
        return (self.b00, self.b01, self.b10, self.b11)


@dataclass(frozen=True)
class TreatmentCostMatrix:
    """Cost of applying treatment w when the outcome turns out to be y.

    Cell ``c{y}{w}`` is the cost of treatment ``w`` under outcome ``y``.
    """

    c00: float
    c01: float
    c10: float
    c11: float

    def __post_init__(self):
        for name in ("c00", "c01", "c10", "c11"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def entries(self) -> tuple[float, float, float, float]:
        return (self.c00, self.c01, self.c10, self.c11)


@dataclass(frozen=True)
class CostBenefitSpec:
    """The benefit/cost pair that fixes the economics of one campaign."""

    benefits: OutcomeBenefitMatrix
    costs: TreatmentCostMatrix


@dataclass(frozen=True)
class ClassificationCostBenefitMatrix:
    """Net cost-benefit matrix of a plain single-treatment classifier.

    Cell ``cb{y}{w}`` is the net value of deciding ``w`` when the true
    state is ``y``. The causal decision boundary reduces to a threshold on
    this matrix when it is built from the net matrix of a spec.
    """

    cb00: float
    cb01: float
    cb10: float
    cb11: float

    def __post_init__(self):
        for name in ("cb00", "cb01", "cb10", "cb11"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def entries(self) -> tuple[float, float, float, float]:
        return (self.cb00, self.cb01, self.cb10, self.cb11)


@dataclass(frozen=True)
class SpecViolation:
    """One invalid cell found by :func:`validate`."""

    matrix: str
    cell: str
    value: float
    reason: str

    def __str__(self) -> str:
        return f"{self.matrix}.{self.cell} = {self.value!r}: {self.reason}"


def net_matrix(spec: CostBenefitSpec) -> ClassificationCostBenefitMatrix:
    """Benefits minus costs, cell by cell."""
    b, c = spec.benefits, spec.costs
    return ClassificationCostBenefitMatrix(
        b.b00 - c.c00, b.b01 - c.c01, b.b10 - c.c10, b.b11 - c.c11
    )


def validate(spec: CostBenefitSpec) -> list[SpecViolation]:
    """Report every invalid cell of a spec.

    Entries must be finite and nonnegative. Returns an empty list for a
    valid spec; never raises.
    """
    violations = []
    for matrix_name, matrix, prefix in (
        ("benefits", spec.benefits, "b"),
        ("costs", spec.costs, "c"),
    ):
        for suffix in ("00", "01", "10", "11"):
            cell = prefix + suffix
            value = getattr(matrix, cell)
            if math.isnan(value) or math.isinf(value):
                violations.append(
                    SpecViolation(matrix_name, cell, value, "must be finite")
                )
            elif value < 0:
                violations.append(
                    SpecViolation(matrix_name, cell, value, "must be nonnegative")
                )
    return violations


def normalize(spec: CostBenefitSpec) -> CostBenefitSpec:
    """Re-express a spec relative to the do-nothing baseline cell.

    Subtracts the net value of (negative outcome, no treatment) from every
    net cell, then splits each shifted cell back into a nonnegative benefit
    and a nonnegative cost by sign. The decision boundary and every
    expected-causal-profit value are unchanged by this shift; what it buys
    is a baseline cell of exactly zero, the form in which profitability
    questions have their simplest reading.
    """
    net = net_matrix(spec)
    shifted = tuple(entry - net.cb00 for entry in net.entries)
    benefits = tuple(max(entry, 0.0) for entry in shifted)
    costs = tuple(max(-entry, 0.0) for entry in shifted)
    return CostBenefitSpec(OutcomeBenefitMatrix(*benefits), TreatmentCostMatrix(*costs))


def _normalized_net(spec: CostBenefitSpec) -> tuple[float, float, float, float]:
    net = net_matrix(spec)
    return tuple(entry - net.cb00 for entry in net.entries)


def profitability_condition(spec: CostBenefitSpec) -> bool:
    """Whether any probability pair makes treating strictly profitable.

    In baseline-normalized terms this is strict positivity of the net value
    of a treated positive outcome: there is someone worth treating exactly
    when converting a treated instance yields more than its treatment
    costs, relative to leaving it alone. Requires a positive normalized net
    benefit for untreated positives (the boundary scale), which holds for
    every non-degenerate spec this package targets.
    """
    n00, n01, n10, n11 = _normalized_net(spec)
    if n10 <= 0:
        raise DegenerateCostStructure(_SCALE_MESSAGE % n10)
    return n11 > 0


def bonus_condition(spec: CostBenefitSpec) -> bool:
    """Whether profitable treatment extends to negative-effect instances.

    True when the net value of a treated positive exceeds the net value of
    an untreated positive (baseline-normalized): treatment is then worth
    applying even to some instances it actively harms, because converting
    under treatment pays a premium over conversion without it.
    """
    n00, n01, n10, n11 = _normalized_net(spec)
    if n10 <= 0:
        raise DegenerateCostStructure(_SCALE_MESSAGE % n10)
    return n11 > n10


_SCALE_MESSAGE = (
    "profitability conditions are defined only when the normalized net "
    "value of an untreated positive outcome is positive, got %r"
)


_CONFIG_BENEFIT_KEY = "outcome_benefit"
_CONFIG_COST_KEY = "treatment_cost"


def spec_from_config_dict(config: dict) -> CostBenefitSpec:
    """Build a spec from a cost-config mapping with named cells.

    Expects ``{"outcome_benefit": {"b00": ..., "b01": ..., "b10": ...,
    "b11": ...}, "treatment_cost": {"c00": ..., ...}}``. Cells are named,
    never positional. Raises ValueError naming the missing or extra key.
    """
    for key in (_CONFIG_BENEFIT_KEY, _CONFIG_COST_KEY):
        if key not in config:
            raise ValueError(f"cost config is missing the {key!r} section")
    benefit_section = config[_CONFIG_BENEFIT_KEY]
    cost_section = config[_CONFIG_COST_KEY]
    for section_name, section, cells in (
        (_CONFIG_BENEFIT_KEY, benefit_section, ("b00", "b01", "b10", "b11")),
        (_CONFIG_COST_KEY, cost_section, ("c00", "c01", "c10", "c11")),
    ):
        if not isinstance(section, dict):
            raise ValueError(f"cost config section {section_name!r} must be a mapping")
        missing = [cell for cell in cells if cell not in section]
        if missing:
            raise ValueError(
                f"cost config section {section_name!r} is missing cells {missing}"
            )
        extra = [key for key in section if key not in cells]
        if extra:
            raise ValueError(
                f"cost config section {section_name!r} has unknown cells {extra}"
            )
        for cell in cells:
            value = section[cell]
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ValueError(
                    f"cost config cell {section_name}.{cell} must be a number, "
                    f"got {value!r}"
                )
    return CostBenefitSpec(
        OutcomeBenefitMatrix(**{cell: float(benefit_section[cell]) for cell in ("b00", "b01", "b10", "b11")}),
        TreatmentCostMatrix(**{cell: float(cost_section[cell]) for cell in ("c00", "c01", "c10", "c11")}),
    )


def spec_to_config_dict(spec: CostBenefitSpec, name: str | None = None) -> dict:
    config = {
        _CONFIG_BENEFIT_KEY: {
            "b00": spec.benefits.b00,
            "b01": spec.benefits.b01,
            "b10": spec.benefits.b10,
            "b11": spec.benefits.b11,
        },
        _CONFIG_COST_KEY: {
            "c00": spec.costs.c00,
            "c01": spec.costs.c01,
            "c10": spec.costs.c10,
            "c11": spec.costs.c11,
        },
    }
    if name is not None:
        config["name"] = name
    return config


def read_cost_config(path) -> tuple[CostBenefitSpec, str]:
    """Load ``(spec, name)`` from a JSON cost config file.

    The optional top-level ``"name"`` labels the scenario in reports and
    defaults to the file stem.
    """
    import pathlib

    path = pathlib.Path(path)
    with open(path, "r", encoding="utf-8") as handle:
        try:
            config = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ValueError(f"cost config {path} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ValueError(f"cost config {path} must hold a JSON object")
    name = config.get("name", path.stem)
    if not isinstance(name, str):
        raise ValueError(f"cost config {path} has a non-string name")
    spec = spec_from_config_dict(config)
    return spec, name


def write_cost_config(spec: CostBenefitSpec, path, name: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(spec_to_config_dict(spec, name), handle, indent=2, sort_keys=True)
        handle.write("\n")
