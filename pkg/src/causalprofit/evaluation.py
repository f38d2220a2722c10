"""Trial-based evaluation of targeting policies.

Everything here consumes scored instances from a randomized trial (group
and outcome labels required) together with a ranking that says whom a
policy would treat first. Treating the top slice of the ranking and
leaving the rest alone induces, per group, observable positive and
negative shares; arranged as a matrix they describe what the policy did,
and differences of such matrices price a policy change in expectation.

Shares are held as exact integer ratios internally and only converted to
floats at the public surface, so matrix identities (curves starting at
exactly zero, maxima never below averages) hold exactly rather than up to
rounding.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .costs import CostBenefitSpec
from .exceptions import EmptyGroup, IdMismatch, MissingLabels
from .ranking import RankedList, ScoredInstance

__all__ = [
    "CausalConfusionMatrix",
    "CausalEffectMatrix",
    "ProfitCurve",
    "QiniResult",
    "ScoreHistogram",
    "causal_confusion",
    "causal_effect",
    "causal_profit",
    "profit_curve",
    "qini",
    "cumulative_positives",
    "score_distribution",
]


@dataclass(frozen=True)
class CausalConfusionMatrix:
    """Per-group outcome shares induced by one treat/leave split.

    The split puts every instance either above the cut (treated) or below
    it (left alone). The control column reports below-cut shares of the
    control group by outcome; the treatment column reports above-cut
    shares of the treatment group by outcome. Raw counts are kept so that
    downstream arithmetic can stay exact: ``control_total``/
    ``treatment_total`` count the groups by outcome, the ``*_below``
    fields count group members below the cut.
    """

    control_total: tuple[int, int]
    treatment_total: tuple[int, int]
    control_below: tuple[int, int]
    treatment_below: tuple[int, int]

    def __post_init__(self):
        c_size = sum(self.control_total)
        t_size = sum(self.treatment_total)
        if c_size == 0 or t_size == 0:
            raise EmptyGroup(
                "confusion shares need both groups nonempty, got "
                f"{c_size} control and {t_size} treatment instances"
            )
        for below, total, label in (
            (self.control_below, self.control_total, "control"),
            (self.treatment_below, self.treatment_total, "treatment"),
        ):
            for y in (0, 1):
                if not 0 <= below[y] <= total[y]:
                    raise ValueError(
                        f"{label} below-count for outcome {y} is {below[y]}, "
                        f"outside [0, {total[y]}]"
                    )

    def _control_share(self, y: int) -> Fraction:
        return Fraction(self.control_below[y], sum(self.control_total))

    def _treatment_share(self, y: int) -> Fraction:
        above = self.treatment_total[y] - self.treatment_below[y]
        return Fraction(above, sum(self.treatment_total))

    @property
    def c0(self) -> float:
        """Share of the control group below the cut with a negative outcome."""
        return float(self._control_share(0))

    @property
    def c1(self) -> float:
        """Share of the control group below the cut with a positive outcome."""
        return float(self._control_share(1))

    @property
    def t0(self) -> float:
        """Share of the treatment group above the cut with a negative outcome."""
        return float(self._treatment_share(0))

    @property
    def t1(self) -> float:
        """Share of the treatment group above the cut with a positive outcome."""
        return float(self._treatment_share(1))


@dataclass(frozen=True)
class CausalEffectMatrix:
    """Share changes caused by moving the cut, indexed (outcome, treatment).

    Cells are exact rationals; the float view is at the properties.
    Column 0 holds the control below-share changes, column 1 the
    treatment above-share changes.
    """

    exact_e00: Fraction
    exact_e01: Fraction
    exact_e10: Fraction
    exact_e11: Fraction

    @property
    def e00(self) -> float:
        return float(self.exact_e00)

    @property
    def e01(self) -> float:
        return float(self.exact_e01)

    @property
    def e10(self) -> float:
        return float(self.exact_e10)

    @property
    def e11(self) -> float:
        return float(self.exact_e11)


@dataclass(frozen=True)
class ProfitCurve:
    """Causal profit of treating the top k ranked instances, for all k.

    ``etas[k] = k / n`` is the treated fraction, ``taus[k]`` the key
    threshold that reproduces the same treated set (strictly-above rule;
    ``-inf`` once everyone is treated), ``values[k]`` the causal profit.
    ``ap`` is the trapezoid integral of the curve over the treated
    fraction, ``mp`` its maximum, reached first at fraction ``eta_star``.
    """

    etas: tuple[float, ...]
    taus: tuple[float, ...]
    values: tuple[float, ...]
    ap: float
    mp: float
    eta_star: float


@dataclass(frozen=True)
class QiniResult:
    """Uplift curve over ranked prefixes and its area-based coefficient.

    ``values[k]`` is the positive-rate gap between groups inside the top-k
    prefix scaled to the whole group sizes; the coefficient subtracts the
    area under the straight line that random targeting would give, so zero
    means no better than chance.
    """

    phis: tuple[float, ...]
    values: tuple[float, ...]
    coefficient: float
    overall_effect: float


@dataclass(frozen=True)
class ScoreHistogram:
    """Counts of treated-positive probabilities in 20 equal-width bins."""

    bin_edges: tuple[float, ...]
    counts: tuple[int, ...]
    group: Optional[int]


def _require_labels(instances: Sequence[ScoredInstance]) -> None:
    for instance in instances:
        if instance.group is None or instance.outcome is None:
            raise MissingLabels(
                f"instance {instance.id!r} lacks group or outcome labels "
                "required for evaluation"
            )


def _check_ranked_ids(instances: Sequence[ScoredInstance], ranked: RankedList) -> None:
    instance_ids = {instance.id for instance in instances}
    ranked_ids = set(ranked.ids())
    if instance_ids != ranked_ids:
        missing = sorted(instance_ids - ranked_ids)[:5]
        extra = sorted(ranked_ids - instance_ids)[:5]
        raise IdMismatch(
            f"ranking does not cover the instances (unranked: {missing}, "
            f"unknown: {extra})"
        )
    if len(instances) != len(ranked.entries):
        raise IdMismatch("instances and ranking differ in length")


def _group_totals(instances: Sequence[ScoredInstance]) -> tuple[list[int], list[int]]:
    control = [0, 0]
    treatment = [0, 0]
    for instance in instances:
        if instance.group == 1:
            treatment[instance.outcome] += 1
        else:
            control[instance.outcome] += 1
    if sum(control) == 0 or sum(treatment) == 0:
        raise EmptyGroup(
            f"evaluation needs both groups nonempty, got {sum(control)} "
            f"control and {sum(treatment)} treatment instances"
        )
    return control, treatment


def _top_count(eta: float, n: int) -> int:
    """Number of ranked instances a treated fraction selects.

    Ceiling of ``eta * n``, snapped to the nearest integer first when the
    product sits within float noise of one, so grid fractions like k/n
    select exactly k.
    """
    if math.isnan(eta) or not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta!r}")
    product = eta * n
    nearest = round(product)
    if abs(product - nearest) <= 1e-9 * max(1.0, float(n)):
        count = int(nearest)
    else:
        count = math.ceil(product)
    return min(max(count, 0), n)


def causal_confusion(
    instances: Sequence[ScoredInstance],
    ranked: RankedList,
    tau: Optional[float] = None,
    eta: Optional[float] = None,
) -> CausalConfusionMatrix:
    """Confusion shares of treating above a cut of the ranking.

    Exactly one of ``tau`` (key threshold; instances with key <= tau fall
    below the cut) and ``eta`` (treated fraction; the top ``ceil(eta * n)``
    ranked instances are above the cut) must be given. Setting tau between
    the k-th and (k+1)-th ranked keys reproduces the eta cut at k / n
    whenever keys are distinct.
    """
    if (tau is None) == (eta is None):
        raise ValueError("exactly one of tau and eta must be given")
    _require_labels(instances)
    _check_ranked_ids(instances, ranked)
    control_total, treatment_total = _group_totals(instances)
    control_below = [0, 0]
    treatment_below = [0, 0]
    if tau is not None:
        if math.isnan(tau):
            raise ValueError("tau must not be NaN")
        below = [entry.instance for entry in ranked.entries if entry.key <= tau]
    else:
        k = _top_count(eta, len(ranked.entries))
        below = [entry.instance for entry in ranked.entries[k:]]
    for instance in below:
        if instance.group == 1:
            treatment_below[instance.outcome] += 1
        else:
            control_below[instance.outcome] += 1
    return CausalConfusionMatrix(
        control_total=tuple(control_total),
        treatment_total=tuple(treatment_total),
        control_below=tuple(control_below),
        treatment_below=tuple(treatment_below),
    )


def causal_effect(
    at_cut: CausalConfusionMatrix, reference: CausalConfusionMatrix
) -> CausalEffectMatrix:
    """Cellwise share change from a reference cut to another cut.

    The canonical reference is the everyone-below matrix (nobody treated),
    in which case column 1 is the treated share that each outcome gained
    and column 0 the untreated share it lost; both matrices must describe
    the same population.
    """
    if (
        at_cut.control_total != reference.control_total
        or at_cut.treatment_total != reference.treatment_total
    ):
        raise ValueError("confusion matrices describe different populations")
    return CausalEffectMatrix(
        exact_e00=at_cut._control_share(0) - reference._control_share(0),
        exact_e01=at_cut._treatment_share(0) - reference._treatment_share(0),
        exact_e10=at_cut._control_share(1) - reference._control_share(1),
        exact_e11=at_cut._treatment_share(1) - reference._treatment_share(1),
    )


def _exact_net(spec: CostBenefitSpec) -> dict[tuple[int, int], Fraction]:
    b, c = spec.benefits, spec.costs
    return {
        (0, 0): Fraction(b.b00) - Fraction(c.c00),
        (0, 1): Fraction(b.b01) - Fraction(c.c01),
        (1, 0): Fraction(b.b10) - Fraction(c.c10),
        (1, 1): Fraction(b.b11) - Fraction(c.c11),
    }


def causal_profit(effect: CausalEffectMatrix, spec: CostBenefitSpec) -> float:
    """Money value of a share change: sum of cells times net cost-benefit."""
    net = _exact_net(spec)
    total = (
        effect.exact_e00 * net[(0, 0)]
        + effect.exact_e01 * net[(0, 1)]
        + effect.exact_e10 * net[(1, 0)]
        + effect.exact_e11 * net[(1, 1)]
    )
    return float(total)


def profit_curve(
    instances: Sequence[ScoredInstance],
    ranked: RankedList,
    spec: CostBenefitSpec,
) -> ProfitCurve:
    """Causal profit of every top-k policy along a ranking.

    Walks the ranking once, moving one instance at a time from the
    untreated to the treated side and accumulating its exact share-change
    value. The k = 0 point is exactly zero by construction, which also
    forces the curve maximum to be nonnegative and at least the curve
    average.
    """
    _require_labels(instances)
    _check_ranked_ids(instances, ranked)
    control_total, treatment_total = _group_totals(instances)
    control_size = sum(control_total)
    treatment_size = sum(treatment_total)
    net = _exact_net(spec)
    # Exact profit delta contributed by treating one more instance.
    control_delta = {y: -net[(y, 0)] / control_size for y in (0, 1)}
    treatment_delta = {y: net[(y, 1)] / treatment_size for y in (0, 1)}
    n = len(ranked.entries)
    exact_values = [Fraction(0)]
    running = Fraction(0)
    for entry in ranked.entries:
        instance = entry.instance
        if instance.group == 1:
            running += treatment_delta[instance.outcome]
        else:
            running += control_delta[instance.outcome]
        exact_values.append(running)
    exact_ap = (sum(exact_values) - (exact_values[0] + exact_values[-1]) / 2) / n
    exact_mp = max(exact_values)
    best_k = exact_values.index(exact_mp)
    keys = ranked.keys()
    taus = tuple(keys[k] if k < n else -math.inf for k in range(n + 1))
    return ProfitCurve(
        etas=tuple(k / n for k in range(n + 1)),
        taus=taus,
        values=tuple(float(value) for value in exact_values),
        ap=float(exact_ap),
        mp=float(exact_mp),
        eta_star=best_k / n,
    )


def qini(instances: Sequence[ScoredInstance], ranked: RankedList) -> QiniResult:
    """Uplift gain over ranked prefixes, with its chance-corrected area.

    At prefix fraction k / n the value is the treated-positive count in
    the prefix over the whole treatment-group size, minus the same ratio
    for control. The coefficient is the trapezoid area under that curve
    minus the area random targeting would earn, namely half the overall
    effect.
    """
    _require_labels(instances)
    _check_ranked_ids(instances, ranked)
    control_total, treatment_total = _group_totals(instances)
    control_size = sum(control_total)
    treatment_size = sum(treatment_total)
    n = len(ranked.entries)
    exact_values = [Fraction(0)]
    running = Fraction(0)
    for entry in ranked.entries:
        instance = entry.instance
        if instance.outcome == 1:
            if instance.group == 1:
                running += Fraction(1, treatment_size)
            else:
                running -= Fraction(1, control_size)
        exact_values.append(running)
    overall = exact_values[-1]
    exact_area = (sum(exact_values) - (exact_values[0] + overall) / 2) / n
    coefficient = exact_area - overall / 2
    return QiniResult(
        phis=tuple(k / n for k in range(n + 1)),
        values=tuple(float(value) for value in exact_values),
        coefficient=float(coefficient),
        overall_effect=float(overall),
    )


def cumulative_positives(
    instances: Sequence[ScoredInstance],
    ranked: RankedList,
    group: int,
    thresholds: Optional[Sequence[float]] = None,
) -> list[tuple[float, int]]:
    """Positives of one group whose key is at or above each threshold.

    Thresholds default to the sorted distinct ranking keys. The counts are
    non-increasing in the threshold and reach the group's positive total
    once the threshold falls to the smallest key or below.
    """
    if group not in (0, 1):
        raise ValueError(f"group must be 0 or 1, got {group!r}")
    _require_labels(instances)
    _check_ranked_ids(instances, ranked)
    # An absent group is not an error here: the curve is simply flat zero.
    positive_keys = sorted(
        entry.key
        for entry in ranked.entries
        if entry.instance.group == group and entry.instance.outcome == 1
    )
    if thresholds is None:
        grid = sorted(set(entry.key for entry in ranked.entries))
    else:
        grid = sorted(float(value) for value in thresholds)
        if any(math.isnan(value) for value in grid):
            raise ValueError("thresholds must not contain NaN")
    curve = []
    for tau in grid:
        at_or_above = len(positive_keys) - bisect_left(positive_keys, tau)
        curve.append((tau, at_or_above))
    return curve


def score_distribution(
    instances: Sequence[ScoredInstance], group: Optional[int] = None
) -> ScoreHistogram:
    """Histogram of treated-positive probabilities in 20 fixed bins.

    Bin k covers [k/20, (k+1)/20), except the last bin which also takes a
    probability of exactly one. ``group`` restricts to one trial arm; None
    counts everything. Counts always sum to the number of counted
    instances.
    """
    if group not in (0, 1, None):
        raise ValueError(f"group must be 0, 1, or None, got {group!r}")
    counts = [0] * 20
    for instance in instances:
        if group is not None and instance.group != group:
            continue
        index = min(int(instance.pair.p11 * 20.0), 19)
        counts[index] += 1
    return ScoreHistogram(
        bin_edges=tuple(k / 20 for k in range(21)),
        counts=tuple(counts),
        group=group,
    )
