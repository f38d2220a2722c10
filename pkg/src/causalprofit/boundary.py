"""Decision boundaries in the (p11, ite) plane.

An instance is summarized by the pair of treatment-conditional positive
probabilities ``p11 = P(Y=1 | treat)`` and ``p10 = P(Y=1 | leave alone)``,
and by their difference ``t = p11 - p10``, the individual treatment
effect. Treating is worth it exactly when the expected causal profit of
the instance is positive, and in the (p11, t) plane that condition is a
half-plane bounded by the line ``t = intercept + slope * p11``. Both
coefficients are ratios of net cost-benefit cells, so the whole economics
of a campaign collapses to one line plus a monetary scale factor.

The cost-insensitive rule (treat anyone with a positive effect) is its own
boundary mode rather than a special cost spec: with an all-zero spec the
coefficient ratios are 0/0, so the ``t > 0`` rule cannot be reached as a
limit of cost-sensitive boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .costs import ClassificationCostBenefitMatrix, CostBenefitSpec, net_matrix
from .exceptions import DegenerateCostStructure

__all__ = [
    "COST_SENSITIVE",
    "COST_INSENSITIVE",
    "ProbabilityPair",
    "DecisionBoundary",
    "build_boundary",
    "cost_insensitive_boundary",
    "ite_threshold",
    "classify",
    "expected_profit",
    "expected_causal_profit",
    "displacement",
    "classification_threshold",
    "positive_treatment_set_empty",
    "admits_negative_ite",
]

COST_SENSITIVE = "cost-sensitive"
COST_INSENSITIVE = "cost-insensitive"

# Relative tolerance under which a boundary denominator counts as zero,
# and the absolute floor that keeps the test meaningful for all-zero input.
_DEGENERACY_RTOL = 1e-12
_DEGENERACY_FLOOR = 1e-300


@dataclass(frozen=True)
class ProbabilityPair:
    """Treatment-conditional positive-outcome probabilities of one instance.

    ``p11`` is the probability of a positive outcome if treated, ``p10``
    if left alone. Both must lie in [0, 1]; the derived effect ``t`` then
    automatically lies in the feasible band ``p11 - 1 <= t <= p11``.
    """

    p11: float
    p10: float

    def __post_init__(self):
        for name in ("p11", "p10"):
            value = float(getattr(self, name))
            if math.isnan(value) or not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def t(self) -> float:
        """Individual treatment effect, p11 - p10."""
        return self.p11 - self.p10


@dataclass(frozen=True)
class DecisionBoundary:
    """One treat/leave decision rule over probability pairs.

    For the cost-sensitive mode the treat region is the side of the line
    ``t = intercept + slope * p11`` on which expected causal profit is
    positive. ``scale`` is the monetary factor relating signed distance
    from the line to money; when it is negative the profitable side is
    below the line instead of above it, which ``inverted_side`` flags.
    ``net`` keeps the net cost-benefit matrix the boundary was built from
    so that classification can evaluate profit exactly as the profit
    functions do.
    """

    intercept: float
    slope: float
    scale: float
    mode: str
    inverted_side: bool
    net: ClassificationCostBenefitMatrix


def _degeneracy_threshold(entries) -> float:
    largest = max(abs(entry) for entry in entries)
    return max(_DEGENERACY_RTOL * largest, _DEGENERACY_FLOOR)


def build_boundary(spec: CostBenefitSpec) -> DecisionBoundary:
    """Derive the cost-sensitive decision boundary of a spec.

    The normalizing denominator is the net gain of an untreated positive
    outcome over an untreated negative one. When its magnitude does not
    exceed ``1e-12`` times the largest net-cell magnitude (with an
    absolute floor of ``1e-300``) the ratios are meaningless and
    DegenerateCostStructure is raised; the all-zero spec always lands
    here.
    """
    net = net_matrix(spec)
    scale = net.cb10 - net.cb00
    if abs(scale) <= _degeneracy_threshold(net.entries):
        raise DegenerateCostStructure(
            "boundary denominator (net untreated-positive minus net "
            f"untreated-negative) is {scale!r}, too close to zero for the "
            f"net matrix {net.entries}"
        )
    intercept = (net.cb00 - net.cb01) / scale
    slope = (net.cb10 + net.cb01 - net.cb11 - net.cb00) / scale
    return DecisionBoundary(
        intercept=intercept,
        slope=slope,
        scale=scale,
        mode=COST_SENSITIVE,
        inverted_side=scale < 0,
        net=net,
    )


def cost_insensitive_boundary() -> DecisionBoundary:
    """The effect-only rule: treat exactly when the effect is positive."""
    return DecisionBoundary(
        intercept=0.0,
        slope=0.0,
        scale=0.0,
        mode=COST_INSENSITIVE,
        inverted_side=False,
        net=ClassificationCostBenefitMatrix(0.0, 0.0, 0.0, 0.0),
    )


def ite_threshold(boundary: DecisionBoundary, p11: float) -> float:
    """Smallest effect at which treating an instance with this p11 pays.

    Cost-insensitive boundaries threshold at zero for every p11.
    """
    if math.isnan(p11) or not 0.0 <= p11 <= 1.0:
        raise ValueError(f"p11 must lie in [0, 1], got {p11!r}")
    if boundary.mode == COST_INSENSITIVE:
        return 0.0
    return boundary.intercept + boundary.slope * p11


def _column_profit(net: ClassificationCostBenefitMatrix, p_positive: float, treatment: int) -> float:
    if treatment == 1:
        return p_positive * net.cb11 + (1.0 - p_positive) * net.cb01
    return p_positive * net.cb10 + (1.0 - p_positive) * net.cb00


def expected_profit(spec: CostBenefitSpec, p_positive: float, treatment: int) -> float:
    """Expected net profit of applying one fixed treatment to one instance.

    ``p_positive`` is the positive-outcome probability under that
    treatment, so the value is the probability-weighted mix of the two net
    cells of the chosen treatment column.
    """
    if treatment not in (0, 1):
        raise ValueError(f"treatment must be 0 or 1, got {treatment!r}")
    if math.isnan(p_positive) or not 0.0 <= p_positive <= 1.0:
        raise ValueError(f"p_positive must lie in [0, 1], got {p_positive!r}")
    return _column_profit(net_matrix(spec), p_positive, treatment)


def _ecp_from_net(net: ClassificationCostBenefitMatrix, pair: ProbabilityPair) -> float:
    return _column_profit(net, pair.p11, 1) - _column_profit(net, pair.p10, 0)


def expected_causal_profit(spec: CostBenefitSpec, pair: ProbabilityPair) -> float:
    """Expected gain of treating over not treating one instance.

    Difference of the two expected profits. For a non-degenerate boundary
    this equals ``scale * (t - slope * p11 - intercept)``, which is why
    ranking by profit and ranking by signed distance from the boundary
    agree; the difference form used here stays defined even when the
    boundary itself is degenerate.
    """
    return _ecp_from_net(net_matrix(spec), pair)


def classify(boundary: DecisionBoundary, pair: ProbabilityPair) -> int:
    """Treat (1) or leave alone (0) under a decision boundary.

    Cost-sensitive boundaries treat exactly when expected causal profit is
    strictly positive, evaluated through the same net-matrix arithmetic as
    :func:`expected_causal_profit`, so the two can never disagree; this
    also keeps the rule correct when ``inverted_side`` is set. Ties (zero
    profit, or zero effect in the cost-insensitive mode) are left alone.
    """
    if boundary.mode == COST_INSENSITIVE:
        return 1 if pair.t > 0.0 else 0
    return 1 if _ecp_from_net(boundary.net, pair) > 0.0 else 0


def displacement(boundary: DecisionBoundary, pair: ProbabilityPair) -> float:
    """Signed perpendicular distance of a pair from the boundary line.

    Positive above the line. Expected causal profit equals this distance
    times ``scale * sqrt(slope**2 + 1)``, so for a non-inverted boundary
    the profitable side is the positive-displacement side; an inverted
    boundary (negative scale) profits below the line. Cost-insensitive
    boundaries reduce to the effect itself.
    """
    return (pair.t - boundary.slope * pair.p11 - boundary.intercept) / math.sqrt(
        boundary.slope * boundary.slope + 1.0
    )


def classification_threshold(cb: ClassificationCostBenefitMatrix) -> float:
    """Optimal probability threshold of a plain single-treatment classifier.

    The probability of the positive class above which predicting positive
    is the cheaper decision under the given net matrix. The causal
    boundary collapses to this value applied to the spec's net matrix
    whenever its slope is nonzero: the crossing point of the boundary line
    with the horizontal axis of p11 is exactly this threshold.
    """
    denominator = cb.cb11 + cb.cb00 - cb.cb01 - cb.cb10
    if abs(denominator) <= _degeneracy_threshold(cb.entries):
        raise DegenerateCostStructure(
            f"classification threshold denominator is {denominator!r}, too "
            f"close to zero for the matrix {cb.entries}"
        )
    return (cb.cb00 - cb.cb01) / denominator


def _require_positive_scale(spec: CostBenefitSpec) -> DecisionBoundary:
    boundary = build_boundary(spec)
    if boundary.scale < 0:
        raise DegenerateCostStructure(
            "profitability geometry assumes a positive boundary scale "
            f"(net untreated-positive above baseline), got {boundary.scale!r}"
        )
    return boundary


def positive_treatment_set_empty(spec: CostBenefitSpec) -> bool:
    """Whether no feasible probability pair is worth treating.

    Geometric reading: the boundary line at ``p11 = 1`` sits at or above
    the feasibility ceiling ``t = p11``, so the profitable half-plane
    misses the whole feasible band. Agrees with the sign condition of
    :func:`causalprofit.costs.profitability_condition`; requires a
    positive boundary scale.
    """
    boundary = _require_positive_scale(spec)
    return ite_threshold(boundary, 1.0) >= 1.0


def admits_negative_ite(spec: CostBenefitSpec) -> bool:
    """Whether the profitable region reaches below the zero-effect axis.

    Geometric reading: the boundary line dips under ``t = 0`` at
    ``p11 = 1``, so some instances whose effect is negative are still
    profitable to treat. Agrees with the sign condition of
    :func:`causalprofit.costs.bonus_condition`; requires a positive
    boundary scale.
    """
    boundary = _require_positive_scale(spec)
    return ite_threshold(boundary, 1.0) < 0.0
