"""Semantic exceptions and warning categories shared across the package."""

__all__ = [
    "CausalProfitError",
    "DegenerateCostStructure",
    "EmptyInput",
    "EmptyCurve",
    "EmptyGroup",
    "IdMismatch",
    "MissingLabels",
    "MissingCounterpart",
    "DimensionMismatch",
    "StratumTooSmall",
    "MissingColumn",
    "NonBinaryLabel",
    "UnparsableNumber",
    "EmptyFile",
    "ConvergenceWarning",
    "DegenerateFeaturesWarning",
]


class CausalProfitError(Exception):
    """Base class for every error this package raises on purpose."""


class DegenerateCostStructure(CausalProfitError):
    """The cost-benefit structure does not pin down a usable decision rule.

    Raised when a denominator that normalizes the decision boundary (the
    net gain of treating a positive outcome over leaving it alone) is zero
    within tolerance, or when every instance would receive the same key.
    """


class EmptyInput(CausalProfitError):
    """An operation that needs at least one instance received none."""


class EmptyCurve(CausalProfitError):
    """A chart was requested for a curve with no points."""


class EmptyGroup(CausalProfitError):
    """Treatment or control group is empty where both are required."""


class IdMismatch(CausalProfitError):
    """Two collections that must cover the same instance ids do not."""


class MissingLabels(CausalProfitError):
    """Instances lack the group or outcome labels the operation needs."""


class MissingCounterpart(CausalProfitError):
    """A ranker comparison cell has no matching row for the other ranker."""


class DimensionMismatch(CausalProfitError):
    """Feature matrix width differs from what a fitted model expects."""


class StratumTooSmall(CausalProfitError):
    """A (group, outcome) stratum has fewer members than the fold count."""


class MissingColumn(CausalProfitError):
    """A required column is absent from an input file."""


class NonBinaryLabel(CausalProfitError):
    """A treatment or outcome cell holds something other than 0 or 1."""


class UnparsableNumber(CausalProfitError):
    """A numeric cell could not be parsed as a float."""


class EmptyFile(CausalProfitError):
    """An input file has no data rows."""


class ConvergenceWarning(UserWarning):
    """Optimizer stopped at the iteration cap before reaching tolerance."""


class DegenerateFeaturesWarning(UserWarning):
    """Zero-variance feature columns were dropped before fitting."""
