import math

import pytest
from hypothesis import given, strategies as st

from causalprofit.boundary import (
    COST_INSENSITIVE,
    COST_SENSITIVE,
    DecisionBoundary,
    ProbabilityPair,
    admits_negative_ite,
    build_boundary,
    classification_threshold,
    classify,
    cost_insensitive_boundary,
    displacement,
    expected_causal_profit,
    expected_profit,
    ite_threshold,
    positive_treatment_set_empty,
)
from causalprofit.costs import (
    ClassificationCostBenefitMatrix,
    bonus_condition,
    net_matrix,
    profitability_condition,
)
from causalprofit.exceptions import DegenerateCostStructure

from conftest import make_spec

probabilities = st.floats(min_value=0, max_value=1, allow_nan=False)
integer_cells = st.integers(min_value=0, max_value=100)


def integer_specs():
    return st.builds(
        make_spec,
        b00=integer_cells, b01=integer_cells,
        b10=integer_cells, b11=integer_cells,
        c00=integer_cells, c01=integer_cells,
        c10=integer_cells, c11=integer_cells,
    )


class TestBuildBoundary:
    def test_scenario_1_coefficients(self, scenario1):
        boundary = build_boundary(scenario1)
        assert boundary.intercept == 0.1
        assert boundary.slope == -0.2
        assert boundary.scale == 100.0
        assert boundary.mode == COST_SENSITIVE
        assert boundary.inverted_side is False

    def test_scenario_2_coefficients(self, scenario2):
        boundary = build_boundary(scenario2)
        assert boundary.intercept == 10.0 / 120.0
        assert boundary.slope == 20.0 / 120.0
        assert boundary.scale == 120.0

    def test_all_zero_spec_is_degenerate(self):
        with pytest.raises(DegenerateCostStructure):
            build_boundary(make_spec())

    def test_negative_scale_flags_inverted_side(self):
        boundary = build_boundary(make_spec(b00=10, b01=30))
        assert boundary.scale == -10.0
        assert boundary.inverted_side is True

    def test_relative_degeneracy(self):
        # The denominator is tiny only relative to the other cells.
        spec = make_spec(b10=1e12, b00=1e12 - 1e-4, b11=5e11)
        with pytest.raises(DegenerateCostStructure):
            build_boundary(spec)

    def test_cost_insensitive_mode(self):
        boundary = cost_insensitive_boundary()
        assert boundary.mode == COST_INSENSITIVE
        assert (boundary.intercept, boundary.slope, boundary.scale) == (0.0, 0.0, 0.0)


class TestIteThreshold:
    def test_scenario_1_at_full_conversion(self, scenario1):
        assert ite_threshold(build_boundary(scenario1), 1.0) == -0.1

    def test_scenario_1_at_half(self, scenario1):
        assert ite_threshold(build_boundary(scenario1), 0.5) == 0.0

    def test_cost_insensitive_is_zero_everywhere(self):
        boundary = cost_insensitive_boundary()
        for p11 in (0.0, 0.3, 1.0):
            assert ite_threshold(boundary, p11) == 0.0

    def test_rejects_out_of_range(self, scenario1):
        boundary = build_boundary(scenario1)
        with pytest.raises(ValueError):
            ite_threshold(boundary, 1.5)
        with pytest.raises(ValueError):
            ite_threshold(boundary, math.nan)


class TestProfit:
    def test_expected_profit_scenario_1(self, scenario1):
        assert expected_profit(scenario1, 0.8, 1) == pytest.approx(86.0, rel=1e-12)
        assert expected_profit(scenario1, 0.5, 0) == pytest.approx(50.0, rel=1e-12)

    def test_expected_profit_pins_baseline_cell(self):
        assert expected_profit(make_spec(b00=7), 0.0, 0) == 7.0

    def test_expected_profit_rejects_bad_arguments(self, scenario1):
        with pytest.raises(ValueError):
            expected_profit(scenario1, 0.5, 2)
        with pytest.raises(ValueError):
            expected_profit(scenario1, -0.1, 1)

    def test_causal_profit_scenario_1(self, scenario1):
        gain = expected_causal_profit(scenario1, ProbabilityPair(0.8, 0.5))
        assert gain == pytest.approx(36.0, rel=1e-12)

    def test_causal_profit_negative(self, scenario1):
        loss = expected_causal_profit(scenario1, ProbabilityPair(0.5, 0.7))
        assert loss == pytest.approx(-20.0, rel=1e-12)

    def test_causal_profit_zero_on_the_line(self, scenario1):
        assert expected_causal_profit(scenario1, ProbabilityPair(0.5, 0.5)) == 0.0


class TestClassify:
    def test_scenario_1_treats_profitable_pair(self, scenario1):
        assert classify(build_boundary(scenario1), ProbabilityPair(0.8, 0.5)) == 1

    def test_ties_are_left_alone(self, scenario1):
        assert classify(build_boundary(scenario1), ProbabilityPair(0.5, 0.5)) == 0
        assert classify(cost_insensitive_boundary(), ProbabilityPair(0.5, 0.5)) == 0

    def test_scenario_2_rejects_small_effect(self, scenario2):
        assert classify(build_boundary(scenario2), ProbabilityPair(0.2, 0.19)) == 0

    def test_cost_insensitive_treats_any_positive_effect(self):
        boundary = cost_insensitive_boundary()
        assert classify(boundary, ProbabilityPair(0.2, 0.19)) == 1
        assert classify(boundary, ProbabilityPair(0.1, 0.2)) == 0

    def test_inverted_side_treats_below_the_line(self):
        spec = make_spec(b00=10, b01=30)
        boundary = build_boundary(spec)
        pair = ProbabilityPair(0.1, 0.0)
        # Below the line, yet profitable because the scale is negative.
        assert displacement(boundary, pair) < 0
        assert expected_causal_profit(spec, pair) > 0
        assert classify(boundary, pair) == 1

    @given(integer_specs(), probabilities, probabilities)
    def test_matches_profit_sign(self, spec, p11, p10):
        net = net_matrix(spec)
        if net.cb10 - net.cb00 == 0:
            return
        boundary = build_boundary(spec)
        pair = ProbabilityPair(p11, p10)
        expected = 1 if expected_causal_profit(spec, pair) > 0.0 else 0
        assert classify(boundary, pair) == expected


class TestDisplacement:
    def test_scenario_1_value(self, scenario1):
        boundary = build_boundary(scenario1)
        value = displacement(boundary, ProbabilityPair(0.8, 0.5))
        assert value == pytest.approx(0.36 / math.sqrt(1.04), rel=1e-12)

    def test_zero_on_the_line(self, scenario1):
        boundary = build_boundary(scenario1)
        assert displacement(boundary, ProbabilityPair(0.5, 0.5)) == 0.0

    def test_cost_insensitive_reduces_to_effect(self):
        boundary = cost_insensitive_boundary()
        pair = ProbabilityPair(0.7, 0.2)
        assert displacement(boundary, pair) == pair.t

    @given(integer_specs(), probabilities, probabilities)
    def test_profit_is_scaled_displacement(self, spec, p11, p10):
        net = net_matrix(spec)
        if net.cb10 - net.cb00 == 0:
            return
        boundary = build_boundary(spec)
        pair = ProbabilityPair(p11, p10)
        rebuilt = (
            displacement(boundary, pair)
            * boundary.scale
            * math.sqrt(boundary.slope**2 + 1.0)
        )
        gain = expected_causal_profit(spec, pair)
        assert rebuilt == pytest.approx(gain, rel=1e-9, abs=1e-9)


class TestClassificationThreshold:
    def test_symmetric_errors_threshold_at_half(self):
        cb = ClassificationCostBenefitMatrix(0, -1, -1, 0)
        assert classification_threshold(cb) == 0.5

    def test_asymmetric_errors(self):
        cb = ClassificationCostBenefitMatrix(0, -5, -10, 0)
        assert classification_threshold(cb) == 5.0 / 15.0

    def test_scenario_1_net_matrix_thresholds_at_half(self, scenario1):
        assert classification_threshold(net_matrix(scenario1)) == 0.5

    def test_zero_matrix_is_degenerate(self):
        with pytest.raises(DegenerateCostStructure):
            classification_threshold(ClassificationCostBenefitMatrix(0, 0, 0, 0))

    @given(integer_specs())
    def test_boundary_crossing_reduces_to_threshold(self, spec):
        net = net_matrix(spec)
        if net.cb10 - net.cb00 == 0:
            return
        if net.cb11 + net.cb00 - net.cb01 - net.cb10 == 0:
            return
        boundary = build_boundary(spec)
        crossing = -boundary.intercept / boundary.slope
        assert abs(classification_threshold(net) - crossing) <= 1e-12


class TestProfitabilityGeometry:
    def test_scenario_1_admits_negative_effects(self, scenario1):
        assert positive_treatment_set_empty(scenario1) is False
        assert admits_negative_ite(scenario1) is True

    def test_scenario_2_profitable_but_positive_only(self, scenario2):
        assert positive_treatment_set_empty(scenario2) is False
        assert admits_negative_ite(scenario2) is False

    def test_overpriced_treatment_empties_the_set(self):
        spec = make_spec(b10=100, b11=120, c01=10, c11=125)
        assert positive_treatment_set_empty(spec) is True

    def test_negative_scale_is_refused(self):
        spec = make_spec(b00=10, b01=30)
        with pytest.raises(DegenerateCostStructure):
            positive_treatment_set_empty(spec)
        with pytest.raises(DegenerateCostStructure):
            admits_negative_ite(spec)

    @given(integer_specs())
    def test_agrees_with_cost_conditions(self, spec):
        net = net_matrix(spec)
        n01, n10, n11 = (
            net.cb01 - net.cb00,
            net.cb10 - net.cb00,
            net.cb11 - net.cb00,
        )
        if n10 <= 0:
            return
        # Boundary cases sit exactly on the line, where the geometric
        # reading is decided by float rounding; skip them.
        if n11 == 0 or n11 == n10:
            return
        assert positive_treatment_set_empty(spec) == (
            not profitability_condition(spec)
        )
        assert admits_negative_ite(spec) == bonus_condition(spec)


class TestProbabilityPair:
    def test_effect_is_difference(self):
        assert ProbabilityPair(0.75, 0.25).t == 0.5
        assert ProbabilityPair(0.25, 0.75).t == -0.5

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            ProbabilityPair(1.2, 0.5)
        with pytest.raises(ValueError):
            ProbabilityPair(0.5, -0.1)
        with pytest.raises(ValueError):
            ProbabilityPair(math.nan, 0.5)

    @given(probabilities, probabilities)
    def test_effect_stays_feasible(self, p11, p10):
        pair = ProbabilityPair(p11, p10)
        assert pair.p11 - 1.0 <= pair.t <= pair.p11

    def test_nonnegative_intercept_when_treating_never_cheaper(self):
        # With equal negative-outcome benefits and a treatment surcharge,
        # the threshold line starts at or above zero conversion value.
        for c01 in (0.0, 5.0, 30.0):
            spec = make_spec(b00=4, b01=4, b10=80, c00=2, c01=2 + c01)
            assert build_boundary(spec).intercept >= 0.0


def test_boundary_is_frozen(scenario1):
    boundary = build_boundary(scenario1)
    with pytest.raises(AttributeError):
        boundary.scale = 1.0
    assert isinstance(boundary, DecisionBoundary)
