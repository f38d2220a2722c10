"""Shared fixtures: stock cost scenarios and the 8-instance toy trial."""

import pytest

from causalprofit.boundary import ProbabilityPair
from causalprofit.costs import (
    CostBenefitSpec,
    OutcomeBenefitMatrix,
    TreatmentCostMatrix,
)
from causalprofit.ranking import ScoredInstance


def make_spec(b00=0, b01=0, b10=0, b11=0, c00=0, c01=0, c10=0, c11=0):
    return CostBenefitSpec(
        benefits=OutcomeBenefitMatrix(b00, b01, b10, b11),
        costs=TreatmentCostMatrix(c00, c01, c10, c11),
    )


def pair_for_effect(effect):
    """A valid probability pair whose effect is the given value."""
    if effect >= 0:
        return ProbabilityPair(p11=effect, p10=0.0)
    return ProbabilityPair(p11=0.0, p10=-effect)


@pytest.fixture
def scenario1():
    # Treated conversion worth more than an organic one; 10 per treatment.
    return make_spec(b10=100, b11=120, c01=10, c11=10)


@pytest.fixture
def scenario2():
    # Treated conversion worth less than an organic one.
    return make_spec(b10=120, b11=100, c01=10, c11=10)


def toy_instances():
    """Eight labeled instances: two trial arms of four, distinct effects."""
    treatment = [(1, 0.5), (1, 0.1), (0, 0.4), (0, -0.2)]
    control = [(1, 0.3), (0, 0.6), (0, -0.1), (1, 0.0)]
    instances = []
    for index, (outcome, effect) in enumerate(treatment):
        instances.append(
            ScoredInstance(
                id=f"t{index + 1}",
                pair=pair_for_effect(effect),
                group=1,
                outcome=outcome,
            )
        )
    for index, (outcome, effect) in enumerate(control):
        instances.append(
            ScoredInstance(
                id=f"c{index + 1}",
                pair=pair_for_effect(effect),
                group=0,
                outcome=outcome,
            )
        )
    return instances


@pytest.fixture
def toy():
    return toy_instances()
