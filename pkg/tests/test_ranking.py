import csv
import math

import pytest
from hypothesis import given, strategies as st

from causalprofit.boundary import ProbabilityPair, build_boundary, displacement
from causalprofit.ranking import (
    RANKER_ECP,
    RANKER_ITE,
    BudgetSelection,
    ScoredInstance,
    rank_correlation,
    rank_ecp,
    rank_ite,
    select_under_budget,
    write_ranking_csv,
    write_selection_csv,
)
from causalprofit.exceptions import DegenerateCostStructure, EmptyInput, IdMismatch

from conftest import make_spec


def inst(id_, p11, p10, group=None, outcome=None):
    return ScoredInstance(id=id_, pair=ProbabilityPair(p11, p10), group=group, outcome=outcome)


probabilities = st.floats(min_value=0, max_value=1, allow_nan=False)


def instance_lists(min_size=1, max_size=12):
    pair = st.tuples(probabilities, probabilities)
    return st.lists(pair, min_size=min_size, max_size=max_size).map(
        lambda pairs: [
            inst(f"r{index}", p11, p10) for index, (p11, p10) in enumerate(pairs)
        ]
    )


class TestRankIte:
    def test_orders_by_effect(self):
        ranked = rank_ite(
            [inst("a", 0.5, 0.4), inst("b", 0.9, 0.4), inst("c", 0.1, 0.3)]
        )
        assert ranked.ids() == ["b", "a", "c"]
        assert ranked.keys() == pytest.approx([0.5, 0.1, -0.2], abs=1e-15)
        assert ranked.ranker == RANKER_ITE
        assert ranked.spec is None

    def test_ties_break_by_p11_then_id(self):
        # Same exact effect 0.125; the higher treated probability wins.
        ranked = rank_ite([inst("a", 0.25, 0.125), inst("b", 0.875, 0.75)])
        assert ranked.ids() == ["b", "a"]
        # Fully identical pairs fall back to ascending id.
        ranked = rank_ite([inst("z", 0.5, 0.25), inst("m", 0.5, 0.25)])
        assert ranked.ids() == ["m", "z"]

    def test_single_instance(self):
        ranked = rank_ite([inst("only", 0.5, 0.25)])
        assert ranked.ids() == ["only"]
        assert ranked.keys() == [0.25]

    def test_empty_input_refused(self):
        with pytest.raises(EmptyInput):
            rank_ite([])

    def test_duplicate_ids_refused(self):
        with pytest.raises(ValueError, match="duplicate"):
            rank_ite([inst("a", 0.4, 0.1), inst("a", 0.6, 0.1)])


class TestRankEcp:
    def test_scenario_1_profit_beats_effect_order(self, scenario1):
        # A has the larger profit (36 vs 26) though both convert well.
        a = inst("a", 0.8, 0.5)
        b = inst("b", 0.3, 0.0)
        ranked = rank_ecp([a, b], scenario1)
        assert ranked.ids() == ["a", "b"]
        assert ranked.keys() == pytest.approx([36.0, 26.0], rel=1e-12)
        assert ranked.ranker == RANKER_ECP
        assert ranked.spec is scenario1

    def test_scenario_2_reverses_that_order(self, scenario2):
        # Under the organic-conversion bias the low-baseline instance wins.
        a = inst("a", 0.8, 0.5)
        b = inst("b", 0.3, 0.0)
        ranked = rank_ecp([a, b], scenario2)
        assert ranked.ids() == ["b", "a"]
        assert ranked.keys() == pytest.approx([20.0, 10.0], rel=1e-12)

    def test_all_zero_spec_refused(self):
        with pytest.raises(DegenerateCostStructure):
            rank_ecp([inst("a", 0.5, 0.25)], make_spec())

    def test_constant_profit_spec_refused(self):
        # Net cells with equal columns give every pair the same key.
        with pytest.raises(DegenerateCostStructure):
            rank_ecp([inst("a", 0.5, 0.25)], make_spec(b00=3, b01=3, b10=3, b11=3))

    def test_zero_slope_spec_matches_effect_order(self):
        # Equal column spreads make profit an affine function of the
        # effect alone, so both rankers must agree everywhere.
        spec = make_spec(b10=100, b11=90, c01=10)
        boundary = build_boundary(spec)
        assert boundary.slope == 0.0
        instances = [
            inst("a", 0.9, 0.85),
            inst("b", 0.5, 0.1),
            inst("c", 0.3, 0.3),
            inst("d", 0.2, 0.35),
        ]
        assert rank_ecp(instances, spec).ids() == rank_ite(instances).ids()

    @given(instance_lists())
    def test_order_matches_displacement_order(self, instances):
        spec = make_spec(b10=100, b11=120, c01=10, c11=10)
        boundary = build_boundary(spec)
        ranked = rank_ecp(instances, spec)
        distances = [
            displacement(boundary, entry.instance.pair) for entry in ranked.entries
        ]
        # Profit is displacement times a positive constant, so the ranked
        # order must already be nonincreasing in displacement too.
        for earlier, later in zip(distances, distances[1:]):
            assert earlier >= later - 1e-9


class TestSelectUnderBudget:
    def spec(self):
        return make_spec(b10=100, b11=120, c01=10, c11=10)

    def test_budget_cuts_after_two(self):
        # Expected spend is 10 per pick under flat costs; 25 buys two.
        instances = [
            inst("a", 0.9, 0.1),
            inst("b", 0.6, 0.2),
            inst("c", 0.3, 0.05),
        ]
        spec = self.spec()
        selection = select_under_budget(rank_ecp(instances, spec), spec, budget=25.0)
        assert selection.selected_ids == ("a", "b")
        assert selection.expected_spend == pytest.approx(20.0, rel=1e-12)
        assert selection.expected_positives == pytest.approx(1.5, rel=1e-12)
        assert selection.expected_negatives == pytest.approx(0.5, rel=1e-12)
        assert selection.budget == 25.0

    def test_zero_budget_selects_nothing(self):
        spec = self.spec()
        ranked = rank_ecp([inst("a", 0.9, 0.1)], spec)
        selection = select_under_budget(ranked, spec, budget=0.0)
        assert selection.selected_ids == ()
        assert selection.expected_spend == 0.0

    def test_first_instance_over_budget_selects_nothing(self):
        # Mixed cost cells: spend for one pick with p11=0.5 is
        # 0.5 * 20 + 0.5 * 10 = 15, above the budget of 14.
        spec = make_spec(b10=100, b11=120, c01=20, c11=10)
        ranked = rank_ecp([inst("a", 0.5, 0.0)], spec)
        selection = select_under_budget(ranked, spec, budget=14.0)
        assert selection.selected_ids == ()
        assert selection.expected_spend == 0.0

    def test_negative_key_instances_never_selected(self):
        spec = self.spec()
        instances = [inst("good", 0.9, 0.1), inst("bad", 0.1, 0.9)]
        ranked = rank_ecp(instances, spec)
        selection = select_under_budget(ranked, spec, budget=1e9)
        assert selection.selected_ids == ("good",)

    def test_rejects_negative_budget(self):
        spec = self.spec()
        ranked = rank_ecp([inst("a", 0.9, 0.1)], spec)
        with pytest.raises(ValueError):
            select_under_budget(ranked, spec, budget=-1.0)

    def test_instance_cross_check(self):
        spec = self.spec()
        instances = [inst("a", 0.9, 0.1)]
        ranked = rank_ecp(instances, spec)
        select_under_budget(ranked, spec, budget=50.0, instances=instances)
        with pytest.raises(IdMismatch):
            select_under_budget(
                ranked, spec, budget=50.0, instances=[inst("other", 0.9, 0.1)]
            )

    @given(
        instance_lists(),
        st.floats(min_value=0, max_value=100, allow_nan=False),
        st.floats(min_value=0, max_value=100, allow_nan=False),
    )
    def test_growing_the_budget_grows_the_prefix(self, instances, low, extra):
        spec = self.spec()
        ranked = rank_ecp(instances, spec)
        small = select_under_budget(ranked, spec, budget=low)
        large = select_under_budget(ranked, spec, budget=low + extra)
        assert large.selected_ids[: len(small.selected_ids)] == small.selected_ids
        assert large.expected_spend >= small.expected_spend
        assert large.expected_spend <= low + extra


class TestRankCorrelation:
    def test_identical_orders(self):
        instances = [inst("a", 0.9, 0.1), inst("b", 0.6, 0.2), inst("c", 0.3, 0.3)]
        assert rank_correlation(rank_ite(instances), rank_ite(instances)) == 1.0

    def test_exact_reversal(self, scenario2):
        # Constant effect with rising treated probability: the effect
        # ranker puts the largest p11 first (tie policy), while the
        # positive slope of this spec prices high-baseline instances down.
        instances = [
            inst("a", 0.375, 0.125),
            inst("b", 0.625, 0.375),
            inst("c", 0.875, 0.625),
        ]
        by_effect = rank_ite(instances)
        by_profit = rank_ecp(instances, scenario2)
        assert by_effect.ids() == ["c", "b", "a"]
        assert by_profit.ids() == ["a", "b", "c"]
        assert rank_correlation(by_effect, by_profit) == -1.0

    def test_id_mismatch_refused(self):
        first = rank_ite([inst("a", 0.5, 0.25)])
        second = rank_ite([inst("b", 0.5, 0.25)])
        with pytest.raises(IdMismatch):
            rank_correlation(first, second)

    def test_too_small_is_nan(self):
        only = rank_ite([inst("a", 0.5, 0.25)])
        assert math.isnan(rank_correlation(only, only))


class TestCsvOutput:
    def test_ranking_round_trip(self, tmp_path, scenario1):
        instances = [inst("a", 0.8, 0.5), inst("b", 0.3, 0.0), inst("c", 0.1, 0.9)]
        ranked = rank_ecp(instances, scenario1)
        path = tmp_path / "ranking.csv"
        write_ranking_csv(ranked, path)
        with open(path, newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert [row["id"] for row in rows] == ranked.ids()
        assert [int(row["rank"]) for row in rows] == [1, 2, 3]
        assert [float(row["key"]) for row in rows] == ranked.keys()
        assert [float(row["p11"]) for row in rows] == [
            entry.instance.pair.p11 for entry in ranked.entries
        ]
        # Profitable pairs get the treatment, the money-losing one does not.
        assert [row["assigned_treatment"] for row in rows] == ["1", "1", "0"]

    def test_ite_ranking_decisions_use_effect_sign(self, tmp_path):
        ranked = rank_ite([inst("up", 0.6, 0.2), inst("down", 0.2, 0.6)])
        path = tmp_path / "ranking.csv"
        write_ranking_csv(ranked, path)
        with open(path, newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert [(row["id"], row["assigned_treatment"]) for row in rows] == [
            ("up", "1"),
            ("down", "0"),
        ]

    def test_selection_round_trip(self, tmp_path):
        spec = make_spec(b10=100, b11=120, c01=10, c11=10)
        instances = [inst("a", 0.9, 0.1), inst("b", 0.6, 0.2), inst("c", 0.3, 0.05)]
        ranked = rank_ecp(instances, spec)
        selection = select_under_budget(ranked, spec, budget=25.0)
        path = tmp_path / "selection.csv"
        write_selection_csv(ranked, selection, path)
        with open(path, newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert [(row["id"], row["selected"]) for row in rows] == [
            ("a", "1"),
            ("b", "1"),
            ("c", "0"),
        ]
        assert isinstance(selection, BudgetSelection)


class TestScoredInstance:
    def test_labels_validated(self):
        with pytest.raises(ValueError):
            inst("a", 0.5, 0.25, group=2)
        with pytest.raises(ValueError):
            inst("a", 0.5, 0.25, outcome=-1)

    def test_empty_id_refused(self):
        with pytest.raises(ValueError):
            inst("", 0.5, 0.25)
