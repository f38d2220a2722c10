"""Trial datasets: synthetic generation, CSV ingestion, splits.

A trial dataset is a feature matrix with a binary treatment assignment
and a binary outcome per row, optionally carrying the true
treatment-conditional probabilities when the data came from the built-in
generator. All randomness is driven by :class:`causalprofit.rng.SplitMix64`
streams derived from one explicit seed, so every artifact here is a pure
function of its inputs.
"""

from __future__ import annotations

import csv
import math
import pathlib
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exceptions import (
    EmptyFile,
    MissingColumn,
    NonBinaryLabel,
    StratumTooSmall,
    UnparsableNumber,
)
from .rng import SplitMix64

__all__ = [
    "GeneratorConfig",
    "TrialDataset",
    "DatasetSummary",
    "ColumnSchema",
    "generate",
    "ingest_csv",
    "export_csv",
    "k_fold_split",
    "stratified_subsample",
]

# Generator defaults calibrated by quadrature so that, with unit feature
# scale, the expected control positive rate is 0.49 and raising it by the
# softplus uplift term yields an expected treated rate of 0.57.
DEFAULT_INTERCEPT = -0.048403506584423606
DEFAULT_EFFECT_SCALE = 0.4879552379808181

GROUND_TRUTH_COLUMNS = ("gt_p11", "gt_p10")


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs of the synthetic randomized-trial generator.

    Features are independent standard normals. The first
    ``base_features`` drive the no-treatment conversion probability
    through a logistic link, the next ``uplift_features`` drive a
    nonnegative softplus lift added to the logit under treatment (so the
    treated probability never falls below the untreated one), and the
    remaining ``noise_features`` are pure distraction. ``effect_scale``
    multiplies the lift, so zero scale means zero effect.
    """

    n: int = 10000
    base_features: int = 5
    uplift_features: int = 11
    noise_features: int = 0
    base_scale: float = 1.0
    effect_scale: float = DEFAULT_EFFECT_SCALE
    intercept: float = DEFAULT_INTERCEPT
    treatment_fraction: float = 0.5
    seed: int = 20250801

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError(f"n must be at least 1, got {self.n!r}")
        for name in ("base_features", "uplift_features", "noise_features"):
            if int(getattr(self, name)) < 0:
                raise ValueError(f"{name} must be nonnegative, got {getattr(self, name)!r}")
        for name in ("base_scale", "effect_scale"):
            value = float(getattr(self, name))
            if math.isnan(value) or math.isinf(value) or value < 0:
                raise ValueError(f"{name} must be a nonnegative finite float, got {value!r}")
        if not math.isfinite(float(self.intercept)):
            raise ValueError(f"intercept must be finite, got {self.intercept!r}")
        fraction = float(self.treatment_fraction)
        if math.isnan(fraction) or not 0.0 < fraction < 1.0:
            raise ValueError(
                f"treatment_fraction must lie strictly between 0 and 1, got {fraction!r}"
            )

    @property
    def total_features(self) -> int:
        return int(self.base_features) + int(self.uplift_features) + int(self.noise_features)


@dataclass(frozen=True)
class DatasetSummary:
    """Group sizes, positive rates, and their gap."""

    n: int
    treatment_count: int
    control_count: int
    treatment_positive_rate: float
    control_positive_rate: float
    overall_effect: float

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "treatment_count": self.treatment_count,
            "control_count": self.control_count,
            "treatment_positive_rate": self.treatment_positive_rate,
            "control_positive_rate": self.control_positive_rate,
            "overall_effect": self.overall_effect,
        }


@dataclass
class TrialDataset:
    """One randomized trial: features, assignment, outcome, optional truth."""

    X: np.ndarray
    w: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    gt_p11: Optional[np.ndarray] = None
    gt_p10: Optional[np.ndarray] = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        if self.X.ndim != 2:
            raise ValueError(f"X must be 2-dimensional, got shape {self.X.shape}")
        if not np.all(np.isfinite(self.X)):
            raise ValueError("X contains NaN or infinite entries")
        self.w = np.asarray(self.w, dtype=np.int64).ravel()
        self.y = np.asarray(self.y, dtype=np.int64).ravel()
        n = self.X.shape[0]
        if self.w.shape[0] != n or self.y.shape[0] != n:
            raise ValueError(
                f"length mismatch: {n} rows, {self.w.shape[0]} treatments, "
                f"{self.y.shape[0]} outcomes"
            )
        for name, vector in (("w", self.w), ("y", self.y)):
            if not np.all((vector == 0) | (vector == 1)):
                raise ValueError(f"{name} must be binary 0/1")
        if len(self.feature_names) != self.X.shape[1]:
            raise ValueError(
                f"{len(self.feature_names)} feature names for {self.X.shape[1]} columns"
            )
        if (self.gt_p11 is None) != (self.gt_p10 is None):
            raise ValueError("ground-truth probabilities must come as a pair")
        if self.gt_p11 is not None:
            self.gt_p11 = np.asarray(self.gt_p11, dtype=np.float64).ravel()
            self.gt_p10 = np.asarray(self.gt_p10, dtype=np.float64).ravel()
            if self.gt_p11.shape[0] != n or self.gt_p10.shape[0] != n:
                raise ValueError("ground-truth probability length mismatch")
            for name, vector in (("gt_p11", self.gt_p11), ("gt_p10", self.gt_p10)):
                if not np.all((vector >= 0.0) & (vector <= 1.0)):
                    raise ValueError(f"{name} must lie in [0, 1]")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def has_ground_truth(self) -> bool:
        return self.gt_p11 is not None

    def subset(self, indices) -> "TrialDataset":
        indices = np.asarray(indices, dtype=np.int64)
        return TrialDataset(
            X=self.X[indices],
            w=self.w[indices],
            y=self.y[indices],
            feature_names=list(self.feature_names),
            gt_p11=None if self.gt_p11 is None else self.gt_p11[indices],
            gt_p10=None if self.gt_p10 is None else self.gt_p10[indices],
        )

    def summary(self) -> DatasetSummary:
        treated = self.w == 1
        treatment_count = int(np.sum(treated))
        control_count = int(self.n - treatment_count)
        treatment_rate = (
            float(np.sum(self.y[treated])) / treatment_count
            if treatment_count
            else math.nan
        )
        control_rate = (
            float(np.sum(self.y[~treated])) / control_count
            if control_count
            else math.nan
        )
        return DatasetSummary(
            n=self.n,
            treatment_count=treatment_count,
            control_count=control_count,
            treatment_positive_rate=treatment_rate,
            control_positive_rate=control_rate,
            overall_effect=treatment_rate - control_rate,
        )


def _sigmoid(values: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-values))


def generate(config: GeneratorConfig) -> TrialDataset:
    """Draw one synthetic randomized trial.

    Assignment is an independent coin per row, so it carries no
    information about the features. The true probability pair of every
    row is stored alongside the observables; the effect
    ``gt_p11 - gt_p10`` is nonnegative by construction.
    """
    rng = SplitMix64(int(config.seed))
    n = int(config.n)
    d = config.total_features
    X = rng.spawn("features").normals(n * d).reshape(n, d) if d else np.zeros((n, 0))
    w = rng.spawn("treatment").bernoulli(float(config.treatment_fraction), n)

    d_base = int(config.base_features)
    d_uplift = int(config.uplift_features)
    base_logit = np.full(n, float(config.intercept))
    if d_base:
        base_weights = np.full(d_base, float(config.base_scale) / math.sqrt(d_base))
        base_logit = base_logit + X[:, :d_base] @ base_weights
    if d_uplift:
        uplift_weights = np.full(d_uplift, 1.0 / math.sqrt(d_uplift))
        uplift_raw = X[:, d_base : d_base + d_uplift] @ uplift_weights
    else:
        uplift_raw = np.zeros(n)
    lift = float(config.effect_scale) * np.logaddexp(0.0, uplift_raw)

    p10 = _sigmoid(base_logit)
    p11 = _sigmoid(base_logit + lift)
    conversion = np.where(w == 1, p11, p10)
    y = (rng.spawn("outcome").uniforms(n) < conversion).astype(np.int64)
    return TrialDataset(
        X=X,
        w=w,
        y=y,
        feature_names=[f"x{index + 1}" for index in range(d)],
        gt_p11=p11,
        gt_p10=p10,
    )


@dataclass(frozen=True)
class ColumnSchema:
    """Names of the label columns and, optionally, the feature columns.

    When ``feature_columns`` is None every non-label, non-ground-truth
    column counts as a feature, in file order.
    """

    treatment_column: str = "treatment"
    outcome_column: str = "outcome"
    feature_columns: Optional[tuple[str, ...]] = None


def _parse_binary(cell: str, line_number: int, column: str) -> int:
    try:
        value = float(cell)
    except ValueError:
        raise NonBinaryLabel(
            f"line {line_number}, column {column!r}: {cell!r} is not a binary label"
        ) from None
    if value == 0.0:
        return 0
    if value == 1.0:
        return 1
    raise NonBinaryLabel(
        f"line {line_number}, column {column!r}: {cell!r} is not 0 or 1"
    )


def _parse_float(cell: str, line_number: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise UnparsableNumber(
            f"line {line_number}, column {column!r}: {cell!r} is not a number"
        ) from None
    if math.isnan(value) or math.isinf(value):
        raise UnparsableNumber(
            f"line {line_number}, column {column!r}: {cell!r} is not finite"
        )
    return value


def _parse_probability(cell: str, line_number: int, column: str) -> float:
    value = _parse_float(cell, line_number, column)
    if not 0.0 <= value <= 1.0:
        raise UnparsableNumber(
            f"line {line_number}, column {column!r}: {value!r} is outside [0, 1]"
        )
    return value


def ingest_csv(path, schema: ColumnSchema = ColumnSchema()) -> TrialDataset:
    """Load a trial dataset from CSV, preserving row order.

    Label columns are named by the schema; the reserved columns gt_p11
    and gt_p10 are picked up as ground-truth probabilities when both are
    present. Content errors cite the file line (header is line 1) and
    column.
    """
    path = pathlib.Path(path)
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path} has no header row") from None
        rows = [(index + 2, row) for index, row in enumerate(reader) if row]
    if not rows:
        raise EmptyFile(f"{path} has a header but no data rows")
    if len(set(header)) != len(header):
        duplicates = sorted({name for name in header if header.count(name) > 1})
        raise ValueError(f"{path} has duplicate columns {duplicates}")
    positions = {name: index for index, name in enumerate(header)}

    for label_column in (schema.treatment_column, schema.outcome_column):
        if label_column not in positions:
            raise MissingColumn(f"{path} lacks required column {label_column!r}")
    has_gt = all(column in positions for column in GROUND_TRUTH_COLUMNS)
    if not has_gt and any(column in positions for column in GROUND_TRUTH_COLUMNS):
        present = [c for c in GROUND_TRUTH_COLUMNS if c in positions][0]
        missing = [c for c in GROUND_TRUTH_COLUMNS if c not in positions][0]
        raise MissingColumn(
            f"{path} has ground-truth column {present!r} but lacks {missing!r}"
        )

    if schema.feature_columns is None:
        reserved = {schema.treatment_column, schema.outcome_column}
        reserved.update(GROUND_TRUTH_COLUMNS)
        feature_names = [name for name in header if name not in reserved]
    else:
        feature_names = list(schema.feature_columns)
        for name in feature_names:
            if name not in positions:
                raise MissingColumn(f"{path} lacks feature column {name!r}")

    n = len(rows)
    X = np.empty((n, len(feature_names)))
    w = np.empty(n, dtype=np.int64)
    y = np.empty(n, dtype=np.int64)
    gt_p11 = np.empty(n) if has_gt else None
    gt_p10 = np.empty(n) if has_gt else None
    for row_index, (line_number, row) in enumerate(rows):
        if len(row) != len(header):
            raise UnparsableNumber(
                f"line {line_number}: expected {len(header)} cells, got {len(row)}"
            )
        for feature_index, name in enumerate(feature_names):
            X[row_index, feature_index] = _parse_float(
                row[positions[name]], line_number, name
            )
        w[row_index] = _parse_binary(
            row[positions[schema.treatment_column]], line_number, schema.treatment_column
        )
        y[row_index] = _parse_binary(
            row[positions[schema.outcome_column]], line_number, schema.outcome_column
        )
        if has_gt:
            gt_p11[row_index] = _parse_probability(
                row[positions["gt_p11"]], line_number, "gt_p11"
            )
            gt_p10[row_index] = _parse_probability(
                row[positions["gt_p10"]], line_number, "gt_p10"
            )
    return TrialDataset(
        X=X, w=w, y=y, feature_names=feature_names, gt_p11=gt_p11, gt_p10=gt_p10
    )


def export_csv(dataset: TrialDataset, path) -> None:
    """Write a dataset as CSV with 17-significant-digit floats."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        header = list(dataset.feature_names) + ["treatment", "outcome"]
        if dataset.has_ground_truth:
            header += list(GROUND_TRUTH_COLUMNS)
        writer.writerow(header)
        for index in range(dataset.n):
            row = [format(value, ".17g") for value in dataset.X[index]]
            row += [int(dataset.w[index]), int(dataset.y[index])]
            if dataset.has_ground_truth:
                row += [
                    format(dataset.gt_p11[index], ".17g"),
                    format(dataset.gt_p10[index], ".17g"),
                ]
            writer.writerow(row)


def _strata_indices(dataset: TrialDataset) -> list[np.ndarray]:
    # Fixed stratum order keeps splits reproducible: (w, y) in
    # (0,0), (0,1), (1,0), (1,1).
    strata = []
    for w_value in (0, 1):
        for y_value in (0, 1):
            strata.append(
                np.flatnonzero((dataset.w == w_value) & (dataset.y == y_value))
            )
    return strata


def k_fold_split(
    dataset: TrialDataset, k: int, seed: int
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Deterministic stratified folds over (treatment, outcome) strata.

    Each nonempty stratum is shuffled by a stream derived from the seed
    and dealt round-robin, so every fold's share of a stratum is within
    one instance of every other fold's. Nonempty strata smaller than k
    cannot be represented in every fold and are refused.
    """
    if int(k) < 2:
        raise ValueError(f"k must be at least 2, got {k!r}")
    k = int(k)
    rng = SplitMix64(int(seed)).spawn("folds")
    fold_members: list[list[np.ndarray]] = [[] for _ in range(k)]
    for stratum_index, stratum in enumerate(_strata_indices(dataset)):
        if stratum.size == 0:
            continue
        if stratum.size < k:
            raise StratumTooSmall(
                f"stratum {stratum_index} (treatment {stratum_index // 2}, "
                f"outcome {stratum_index % 2}) has {stratum.size} instances, "
                f"fewer than k={k}"
            )
        shuffled = stratum[rng.spawn(stratum_index).permutation(stratum.size)]
        for fold_index in range(k):
            fold_members[fold_index].append(shuffled[fold_index::k])
    splits = []
    all_indices = np.arange(dataset.n, dtype=np.int64)
    for fold_index in range(k):
        test = np.sort(np.concatenate(fold_members[fold_index]))
        mask = np.ones(dataset.n, dtype=bool)
        mask[test] = False
        splits.append((all_indices[mask], test))
    return splits


def stratified_subsample(dataset: TrialDataset, fraction: float, seed: int) -> TrialDataset:
    """Sample each (treatment, outcome) stratum at the same rate.

    Stratum sizes are scaled by the fraction and rounded to nearest (half
    away from zero), so per-stratum proportions survive within one
    instance. Row order of the survivors follows the original dataset; a
    fraction of exactly one returns every row unchanged.
    """
    fraction = float(fraction)
    if math.isnan(fraction) or not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction!r}")
    rng = SplitMix64(int(seed)).spawn("subsample")
    chosen = []
    for stratum_index, stratum in enumerate(_strata_indices(dataset)):
        if stratum.size == 0:
            continue
        count = int(math.floor(stratum.size * fraction + 0.5))
        order = rng.spawn(stratum_index).permutation(stratum.size)
        chosen.append(stratum[order[:count]])
    indices = np.sort(np.concatenate(chosen)) if chosen else np.zeros(0, dtype=np.int64)
    return dataset.subset(indices)
