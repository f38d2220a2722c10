"""Rankings of scored instances and budget-constrained selection.

Two orderings matter when deciding whom to treat: by estimated effect
alone, and by expected causal profit under a cost spec. Both produce the
same deterministic tie policy (larger treated-positive probability first,
then ascending id) so that equal keys never make output order depend on
input order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from scipy.stats import kendalltau

from .boundary import (
    ProbabilityPair,
    classify,
    cost_insensitive_boundary,
    expected_causal_profit,
)
from .costs import CostBenefitSpec, net_matrix
from .exceptions import DegenerateCostStructure, EmptyInput, IdMismatch

__all__ = [
    "RANKER_ITE",
    "RANKER_ECP",
    "ScoredInstance",
    "RankEntry",
    "RankedList",
    "BudgetSelection",
    "rank_ite",
    "rank_ecp",
    "select_under_budget",
    "rank_correlation",
    "write_ranking_csv",
    "write_selection_csv",
]

RANKER_ITE = "ite"
RANKER_ECP = "ecp"


@dataclass(frozen=True)
class ScoredInstance:
    """One instance with its probability pair and optional trial labels.

    ``group`` is 1 for treatment and 0 for control; ``outcome`` is the
    observed binary outcome. Both stay None for instances that only need
    ranking, and are required by the evaluation functions.
    """

    id: str
    pair: ProbabilityPair
    group: Optional[int] = None
    outcome: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValueError(f"instance id must be a nonempty string, got {self.id!r}")
        for name in ("group", "outcome"):
            value = getattr(self, name)
            if value is not None and value not in (0, 1):
                raise ValueError(f"{name} must be 0, 1, or None, got {value!r}")


@dataclass(frozen=True)
class RankEntry:
    instance: ScoredInstance
    key: float


@dataclass(frozen=True)
class RankedList:
    """Instances in descending key order under one ranker.

    ``spec`` is the cost spec the keys were computed from; it is None for
    the effect-only ranker.
    """

    entries: tuple[RankEntry, ...]
    ranker: str
    spec: Optional[CostBenefitSpec] = None

    def __len__(self) -> int:
        return len(self.entries)

    def ids(self) -> list[str]:
        return [entry.instance.id for entry in self.entries]

    def keys(self) -> list[float]:
        return [entry.key for entry in self.entries]

    def instances(self) -> list[ScoredInstance]:
        return [entry.instance for entry in self.entries]


def _check_instances(instances: Sequence[ScoredInstance]) -> None:
    if len(instances) == 0:
        raise EmptyInput("cannot rank an empty instance collection")
    seen = set()
    for instance in instances:
        if instance.id in seen:
            raise ValueError(f"duplicate instance id {instance.id!r}")
        seen.add(instance.id)


def _sorted_entries(instances, key_of) -> tuple[RankEntry, ...]:
    # Ties break by larger p11, then ascending id, so the order is a
    # deterministic function of the instance set alone.
    decorated = []
    for instance in instances:
        key = key_of(instance)
        if not math.isfinite(key):
            raise ValueError(f"ranking key for id {instance.id!r} is {key!r}")
        decorated.append((-key, -instance.pair.p11, instance.id, instance, key))
    decorated.sort(key=lambda item: item[:3])
    return tuple(RankEntry(instance=item[3], key=item[4]) for item in decorated)


def rank_ite(instances: Sequence[ScoredInstance]) -> RankedList:
    """Order instances by estimated treatment effect, largest first."""
    _check_instances(instances)
    return RankedList(
        entries=_sorted_entries(instances, lambda instance: instance.pair.t),
        ranker=RANKER_ITE,
        spec=None,
    )


def rank_ecp(instances: Sequence[ScoredInstance], spec: CostBenefitSpec) -> RankedList:
    """Order instances by expected causal profit under a spec, largest first.

    Refuses specs under which every pair would get the same key (in
    particular the all-zero spec backing the cost-insensitive rule);
    callers that want the effect-only order should use :func:`rank_ite`.
    """
    _check_instances(instances)
    net = net_matrix(spec)
    largest = max(abs(entry) for entry in net.entries)
    spread = max(abs(net.cb11 - net.cb01), abs(net.cb10 - net.cb00))
    if spread <= max(1e-12 * largest, 1e-300):
        raise DegenerateCostStructure(
            "expected causal profit is constant under this spec (net matrix "
            f"{net.entries}), so the profit ranking is undefined; rank by "
            "effect instead"
        )
    return RankedList(
        entries=_sorted_entries(
            instances, lambda instance: expected_causal_profit(spec, instance.pair)
        ),
        ranker=RANKER_ECP,
        spec=spec,
    )


@dataclass(frozen=True)
class BudgetSelection:
    """Greedy prefix of a ranking that fits an expected-spend budget.

    ``expected_positives`` and ``expected_negatives`` are the expected
    counts of treated conversions and non-conversions over the selected
    prefix; spend charges each at its treatment-cost cell.
    """

    selected_ids: tuple[str, ...]
    expected_positives: float
    expected_negatives: float
    expected_spend: float
    budget: float


def select_under_budget(
    ranked: RankedList,
    spec: CostBenefitSpec,
    budget: float,
    instances: Optional[Sequence[ScoredInstance]] = None,
) -> BudgetSelection:
    """Select the longest ranked prefix whose expected spend fits a budget.

    Only instances whose key is nonnegative are eligible; a remaining
    budget is never spent on instances that are expected to lose money.
    Selection walks the ranking in order and stops at the first instance
    whose addition would push expected spend past the budget, so the
    result is always a prefix and growing the budget can only grow it.
    """
    if math.isnan(budget) or budget < 0:
        raise ValueError(f"budget must be nonnegative, got {budget!r}")
    if instances is not None:
        given = {instance.id for instance in instances}
        ranked_ids = set(ranked.ids())
        if given != ranked_ids:
            missing = sorted(ranked_ids - given)[:5]
            extra = sorted(given - ranked_ids)[:5]
            raise IdMismatch(
                f"instances do not match the ranking (missing {missing}, extra {extra})"
            )
    cost_negative = spec.costs.c01
    cost_positive = spec.costs.c11
    selected: list[str] = []
    sum_p11 = 0.0
    sum_not_p11 = 0.0
    spend = 0.0
    for entry in ranked.entries:
        if entry.key < 0.0:
            break
        p11 = entry.instance.pair.p11
        next_positives = sum_p11 + p11
        next_negatives = sum_not_p11 + (1.0 - p11)
        next_spend = next_negatives * cost_negative + next_positives * cost_positive
        if next_spend > budget:
            break
        selected.append(entry.instance.id)
        sum_p11 = next_positives
        sum_not_p11 = next_negatives
        spend = next_spend
    return BudgetSelection(
        selected_ids=tuple(selected),
        expected_positives=sum_p11,
        expected_negatives=sum_not_p11,
        expected_spend=spend,
        budget=float(budget),
    )


def rank_correlation(a: RankedList, b: RankedList) -> float:
    """Kendall rank correlation between two rankings of the same ids.

    Tie-corrected Kendall statistic over rank positions: 1.0 for identical
    orders, -1.0 for exact reversals. Returns nan when there are fewer
    than two instances.
    """
    positions_a = {id_: position for position, id_ in enumerate(a.ids())}
    positions_b = {id_: position for position, id_ in enumerate(b.ids())}
    if set(positions_a) != set(positions_b):
        missing = sorted(set(positions_a) - set(positions_b))[:5]
        extra = sorted(set(positions_b) - set(positions_a))[:5]
        raise IdMismatch(
            f"rankings cover different ids (only in first: {missing}, "
            f"only in second: {extra})"
        )
    order = sorted(positions_a)
    first = [positions_a[id_] for id_ in order]
    second = [positions_b[id_] for id_ in order]
    return float(kendalltau(first, second).statistic)


def write_ranking_csv(ranked: RankedList, path) -> None:
    """Serialize a ranking with per-instance decisions.

    Columns are id, rank (1-based), key, p11, p10, t, assigned_treatment.
    The decision column applies the ranking's own rule: profit rankings
    classify by positive expected causal profit under their spec,
    effect-only rankings by positive effect. Floats are written with 17
    significant digits so they round-trip exactly.
    """
    if ranked.ranker == RANKER_ECP:
        # Positive expected causal profit; stays defined even for specs
        # whose boundary line is degenerate.
        def decide(pair):
            return 1 if expected_causal_profit(ranked.spec, pair) > 0.0 else 0

    else:
        insensitive = cost_insensitive_boundary()

        def decide(pair):
            return classify(insensitive, pair)

    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["id", "rank", "key", "p11", "p10", "t", "assigned_treatment"])
        for position, entry in enumerate(ranked.entries, start=1):
            pair = entry.instance.pair
            writer.writerow(
                [
                    entry.instance.id,
                    position,
                    format(entry.key, ".17g"),
                    format(pair.p11, ".17g"),
                    format(pair.p10, ".17g"),
                    format(pair.t, ".17g"),
                    decide(pair),
                ]
            )


def write_selection_csv(ranked: RankedList, selection: BudgetSelection, path) -> None:
    """Serialize a budget selection as the ranking plus a selected flag."""
    chosen = set(selection.selected_ids)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["id", "rank", "key", "p11", "p10", "t", "selected"])
        for position, entry in enumerate(ranked.entries, start=1):
            pair = entry.instance.pair
            writer.writerow(
                [
                    entry.instance.id,
                    position,
                    format(entry.key, ".17g"),
                    format(pair.p11, ".17g"),
                    format(pair.p10, ".17g"),
                    format(pair.t, ".17g"),
                    1 if entry.instance.id in chosen else 0,
                ]
            )
