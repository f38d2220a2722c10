import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from causalprofit.boundary import build_boundary
from causalprofit.costs import (
    ClassificationCostBenefitMatrix,
    CostBenefitSpec,
    OutcomeBenefitMatrix,
    TreatmentCostMatrix,
    bonus_condition,
    net_matrix,
    normalize,
    profitability_condition,
    read_cost_config,
    spec_from_config_dict,
    spec_to_config_dict,
    validate,
    write_cost_config,
)
from causalprofit.exceptions import DegenerateCostStructure

from conftest import make_spec

entries = st.floats(min_value=0, max_value=1000, allow_nan=False)
integer_entries = st.integers(min_value=0, max_value=1000)


def integer_specs():
    return st.builds(
        make_spec,
        b00=integer_entries, b01=integer_entries,
        b10=integer_entries, b11=integer_entries,
        c00=integer_entries, c01=integer_entries,
        c10=integer_entries, c11=integer_entries,
    )


class TestNetMatrix:
    def test_all_zero(self):
        net = net_matrix(make_spec())
        assert net.entries == (0.0, 0.0, 0.0, 0.0)

    def test_scenario_1(self, scenario1):
        net = net_matrix(scenario1)
        assert (net.cb00, net.cb01) == (0.0, -10.0)
        assert (net.cb10, net.cb11) == (100.0, 110.0)

    def test_scenario_2(self, scenario2):
        net = net_matrix(scenario2)
        assert (net.cb00, net.cb01) == (0.0, -10.0)
        assert (net.cb10, net.cb11) == (120.0, 90.0)

    @given(integer_specs(), integer_specs())
    def test_linearity(self, first, second):
        combined = make_spec(
            **{
                name: getattr(first.benefits, name) + getattr(second.benefits, name)
                for name in ("b00", "b01", "b10", "b11")
            },
            **{
                name: getattr(first.costs, name) + getattr(second.costs, name)
                for name in ("c00", "c01", "c10", "c11")
            },
        )
        summed = [
            a + b
            for a, b in zip(net_matrix(first).entries, net_matrix(second).entries)
        ]
        assert list(net_matrix(combined).entries) == summed


class TestValidate:
    def test_all_zero_ok(self):
        assert validate(make_spec()) == []

    def test_negative_benefit_flagged(self):
        spec = CostBenefitSpec(
            benefits=OutcomeBenefitMatrix(0, 0, 0, -5),
            costs=TreatmentCostMatrix(0, 0, 0, 0),
        )
        violations = validate(spec)
        assert len(violations) == 1
        violation = violations[0]
        assert violation.matrix == "benefits"
        assert violation.cell == "b11"
        assert "nonnegative" in str(violation)

    def test_infinite_cost_flagged(self):
        spec = CostBenefitSpec(
            benefits=OutcomeBenefitMatrix(0, 0, 0, 0),
            costs=TreatmentCostMatrix(0, math.inf, 0, 0),
        )
        violations = validate(spec)
        assert len(violations) == 1
        assert violations[0].matrix == "costs"
        assert violations[0].cell == "c01"
        assert "finite" in violations[0].reason

    def test_multiple_violations_all_reported(self):
        spec = CostBenefitSpec(
            benefits=OutcomeBenefitMatrix(-1, 0, math.nan, 0),
            costs=TreatmentCostMatrix(0, 0, 0, -2),
        )
        assert len(validate(spec)) == 3


class TestConditions:
    def test_scenario_1_both_hold(self, scenario1):
        assert profitability_condition(scenario1) is True
        assert bonus_condition(scenario1) is True

    def test_scenario_2_profitable_without_bonus(self, scenario2):
        assert profitability_condition(scenario2) is True
        assert bonus_condition(scenario2) is False

    def test_break_even_cost_is_not_profitable(self):
        spec = make_spec(b10=100, b11=120, c11=120)
        assert profitability_condition(spec) is False

    def test_degenerate_baseline_refused(self):
        with pytest.raises(DegenerateCostStructure):
            profitability_condition(make_spec(b11=5))
        with pytest.raises(DegenerateCostStructure):
            bonus_condition(make_spec(b11=5))

    @given(integer_specs())
    def test_bonus_implies_profitability(self, spec):
        net = net_matrix(spec)
        # Both conditions are defined only for a positive normalized
        # untreated-positive cell.
        if net.cb10 - net.cb00 <= 0:
            return
        if bonus_condition(spec):
            assert profitability_condition(spec)


class TestNormalize:
    def test_baseline_cell_becomes_zero(self):
        shifted = normalize(make_spec(b00=7, b10=40, c01=3))
        net = net_matrix(shifted)
        assert net.cb00 == 0.0
        assert net.entries == (0.0, -10.0, 33.0, -7.0)

    @given(integer_specs())
    def test_gamma_delta_invariant(self, spec):
        net = net_matrix(spec)
        # Integer cells keep the scale exact, so only true zero is skipped.
        if net.cb10 - net.cb00 == 0:
            return
        before = build_boundary(spec)
        after = build_boundary(normalize(spec))
        # Integer-valued cells make every difference exact, so the two
        # boundary computations divide identical integers.
        assert after.intercept == before.intercept
        assert after.slope == before.slope
        assert after.scale == before.scale

    @given(
        integer_specs(),
        st.fractions(min_value=0, max_value=1),
        st.fractions(min_value=0, max_value=1),
    )
    def test_causal_profit_values_invariant(self, spec, p11, p10):
        original = net_matrix(spec)
        shifted = net_matrix(normalize(spec))

        def exact_ecp(net):
            cells = [Fraction(value) for value in net.entries]
            n00, n01, n10, n11 = cells
            return p11 * n11 + (1 - p11) * n01 - p10 * n10 - (1 - p10) * n00

        assert exact_ecp(shifted) == exact_ecp(original)


class TestConfigIO:
    def test_round_trip(self, tmp_path, scenario1):
        path = tmp_path / "costs.json"
        write_cost_config(scenario1, path, name="retention")
        spec, name = read_cost_config(path)
        assert name == "retention"
        assert net_matrix(spec).entries == net_matrix(scenario1).entries

    def test_name_defaults_to_file_stem(self, tmp_path, scenario1):
        path = tmp_path / "mycosts.json"
        write_cost_config(scenario1, path)
        _, name = read_cost_config(path)
        assert name == "mycosts"

    def test_dict_round_trip(self, scenario2):
        payload = spec_to_config_dict(scenario2)
        again = spec_from_config_dict(payload)
        assert net_matrix(again).entries == net_matrix(scenario2).entries

    def test_missing_cell_rejected(self):
        payload = {
            "outcome_benefit": {"b00": 0, "b01": 0, "b10": 100},
            "treatment_cost": {"c00": 0, "c01": 0, "c10": 0, "c11": 0},
        }
        with pytest.raises(ValueError, match="b11"):
            spec_from_config_dict(payload)

    def test_unknown_cell_rejected(self):
        payload = {
            "outcome_benefit": {
                "b00": 0, "b01": 0, "b10": 0, "b11": 0, "b22": 1
            },
            "treatment_cost": {"c00": 0, "c01": 0, "c10": 0, "c11": 0},
        }
        with pytest.raises(ValueError, match="b22"):
            spec_from_config_dict(payload)

    def test_non_numeric_cell_rejected(self):
        payload = {
            "outcome_benefit": {"b00": 0, "b01": 0, "b10": "high", "b11": 0},
            "treatment_cost": {"c00": 0, "c01": 0, "c10": 0, "c11": 0},
        }
        with pytest.raises(ValueError, match="b10"):
            spec_from_config_dict(payload)

    def test_missing_section_rejected(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text(json.dumps({"outcome_benefit": {}}))
        with pytest.raises(ValueError):
            read_cost_config(path)


class TestMatrices:
    def test_entries_order_is_row_major(self):
        matrix = ClassificationCostBenefitMatrix(1, 2, 3, 4)
        assert matrix.entries == (1.0, 2.0, 3.0, 4.0)

    def test_matrices_are_immutable(self, scenario1):
        with pytest.raises(AttributeError):
            scenario1.benefits.b11 = 7
