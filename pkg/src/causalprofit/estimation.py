"""Treatment-conditional probability estimation on trial data.

Both metalearners reduce the causal problem to plain binary probability
estimation: one separate model per trial arm, or one joint model over
features augmented with the treatment indicator and its interactions.
The base learner is an L2-regularized logistic regression trained by
full-batch gradient descent with a backtracking line search; nothing is
delegated so that fits are reproducible to the bit across runs.

Estimators follow scikit-learn conventions (constructor stores
hyperparameters verbatim, ``fit`` returns self, fitted state lives in
trailing-underscore attributes) so they compose with that ecosystem.
"""

from __future__ import annotations

import csv
import json
import math
import pathlib
import warnings
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .boundary import ProbabilityPair
from .exceptions import (
    ConvergenceWarning,
    DegenerateFeaturesWarning,
    DimensionMismatch,
    EmptyFile,
    EmptyGroup,
    IdMismatch,
    MissingColumn,
    MissingLabels,
    NonBinaryLabel,
    UnparsableNumber,
)
from .ranking import ScoredInstance

__all__ = [
    "GradientLogistic",
    "TLearner",
    "SLearner",
    "logistic_objective",
    "logistic_gradient",
    "score_instances",
    "save_model",
    "load_model",
    "write_scores_csv",
    "read_scores_csv",
    "default_ids",
]

# Armijo sufficient-decrease constant and step shrink factor for the
# backtracking line search.
_ARMIJO_C = 1e-4
_BACKTRACK = 0.5
_MAX_BACKTRACKS = 60


def logistic_objective(weights: np.ndarray, design: np.ndarray, labels: np.ndarray, l2: float) -> float:
    """Mean negative log-likelihood plus the scaled ridge penalty.

    ``design`` carries the intercept as its first column; the penalty
    ``l2 / (2n) * sum(w[1:]**2)`` leaves the intercept unpenalized and
    matches a penalty of ``l2 / 2`` on the summed likelihood.
    """
    z = design @ weights
    n = design.shape[0]
    nll = float(np.sum(np.logaddexp(0.0, z) - labels * z)) / n
    penalty = 0.5 * l2 * float(np.sum(weights[1:] ** 2)) / n
    return nll + penalty


def logistic_gradient(weights: np.ndarray, design: np.ndarray, labels: np.ndarray, l2: float) -> np.ndarray:
    """Gradient of :func:`logistic_objective` with respect to the weights."""
    z = design @ weights
    n = design.shape[0]
    gradient = design.T @ (expit(z) - labels) / n
    gradient[1:] += l2 * weights[1:] / n
    return gradient


class GradientLogistic(BaseEstimator):
    """Binary logistic regression fit from scratch by gradient descent.

    Features are standardized on the training split (stored for scoring);
    columns without variance are dropped with a warning since the
    intercept already covers them. Descent takes steepest-descent steps
    sized by a backtracking line search and stops when the gradient
    infinity norm falls under ``tol`` or after ``max_iter`` iterations,
    the latter with a convergence warning and ``converged_ = False``.

    Attributes after fitting: ``weights_`` (intercept first, on the
    standardized scale), ``feature_means_``/``feature_stds_`` and
    ``kept_columns_`` describing the standardization, ``n_iter_``,
    ``final_gradient_norm_``, ``converged_``, ``stop_reason_``.
    """

    def __init__(self, l2: float = 1.0, tol: float = 1e-6, max_iter: int = 5000):
        self.l2 = l2
        self.tol = tol
        self.max_iter = max_iter

    def _validate_hyperparameters(self):
        if not np.isfinite(self.l2) or self.l2 < 0:
            raise ValueError(f"l2 must be a nonnegative finite float, got {self.l2!r}")
        if not np.isfinite(self.tol) or self.tol <= 0:
            raise ValueError(f"tol must be a positive float, got {self.tol!r}")
        if int(self.max_iter) < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter!r}")

    def fit(self, X, y):
        self._validate_hyperparameters()
        X = _as_feature_matrix(X)
        y = np.asarray(y, dtype=np.float64).ravel()
        if X.shape[0] != y.shape[0]:
            raise ValueError(
                f"X has {X.shape[0]} rows but y has {y.shape[0]} entries"
            )
        if X.shape[0] == 0:
            raise ValueError("cannot fit on an empty dataset")
        if not np.all((y == 0.0) | (y == 1.0)):
            bad = y[(y != 0.0) & (y != 1.0)][0]
            raise ValueError(f"labels must be 0 or 1, got {bad!r}")

        means = X.mean(axis=0) if X.shape[1] else np.zeros(0)
        stds = X.std(axis=0) if X.shape[1] else np.zeros(0)
        # Constant columns carry no signal and would divide by ~0; the
        # tolerance absorbs float noise in the variance of a constant.
        kept = stds > 1e-12 * np.maximum(1.0, np.abs(means))
        if X.shape[1] and not np.all(kept):
            dropped = np.flatnonzero(~kept).tolist()
            warnings.warn(
                f"dropping zero-variance feature columns {dropped}",
                DegenerateFeaturesWarning,
                stacklevel=2,
            )
        self.n_features_in_ = X.shape[1]
        self.kept_columns_ = kept
        self.feature_means_ = means[kept]
        self.feature_stds_ = stds[kept]

        design = self._design(X)
        weights = np.zeros(design.shape[1])
        l2 = float(self.l2)
        objective = logistic_objective(weights, design, y, l2)
        gradient = logistic_gradient(weights, design, y, l2)
        step = 1.0
        iteration = 0
        stop_reason = "max-iter"
        for iteration in range(1, int(self.max_iter) + 1):
            grad_norm = float(np.max(np.abs(gradient))) if gradient.size else 0.0
            if grad_norm <= self.tol:
                stop_reason = "tolerance"
                iteration -= 1
                break
            descent = float(gradient @ gradient)
            accepted = False
            for _ in range(_MAX_BACKTRACKS):
                candidate = weights - step * gradient
                candidate_objective = logistic_objective(candidate, design, y, l2)
                if candidate_objective <= objective - _ARMIJO_C * step * descent:
                    accepted = True
                    break
                step *= _BACKTRACK
            if not accepted:
                # No step of any tried size improves the objective at
                # float resolution; there is nothing left to gain.
                stop_reason = "no-progress"
                iteration -= 1
                break
            weights = candidate
            objective = candidate_objective
            gradient = logistic_gradient(weights, design, y, l2)
            step *= 2.0
        else:
            iteration = int(self.max_iter)

        self.weights_ = weights
        self.n_iter_ = iteration
        self.final_gradient_norm_ = (
            float(np.max(np.abs(gradient))) if gradient.size else 0.0
        )
        self.stop_reason_ = stop_reason
        if stop_reason == "max-iter" and self.final_gradient_norm_ > self.tol:
            self.converged_ = False
            warnings.warn(
                f"gradient descent stopped at max_iter={self.max_iter} with "
                f"gradient norm {self.final_gradient_norm_:.3e} above "
                f"tol={self.tol}",
                ConvergenceWarning,
                stacklevel=2,
            )
        else:
            self.converged_ = True
        return self

    def _design(self, X: np.ndarray) -> np.ndarray:
        kept = X[:, self.kept_columns_]
        standardized = (kept - self.feature_means_) / self.feature_stds_
        return np.hstack([np.ones((X.shape[0], 1)), standardized])

    def _check_fitted(self):
        if not hasattr(self, "weights_"):
            raise NotFittedError(
                f"this {type(self).__name__} instance is not fitted yet"
            )

    def decision_function(self, X) -> np.ndarray:
        self._check_fitted()
        X = _as_feature_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(
                f"model expects {self.n_features_in_} features, got {X.shape[1]}"
            )
        return self._design(X) @ self.weights_

    def predict_proba(self, X) -> np.ndarray:
        """Class probabilities with columns (negative, positive)."""
        positive = expit(self.decision_function(X))
        return np.column_stack([1.0 - positive, positive])

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > 0.0).astype(np.int64)


def _as_feature_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise ValueError(f"feature matrix must be 2-dimensional, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("feature matrix contains NaN or infinite entries")
    return X


def _check_treatment_vector(X: np.ndarray, w) -> np.ndarray:
    w = np.asarray(w, dtype=np.int64).ravel()
    if w.shape[0] != X.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but w has {w.shape[0]} entries")
    if not np.all((w == 0) | (w == 1)):
        bad = w[(w != 0) & (w != 1)][0]
        raise ValueError(f"treatment indicator must be 0 or 1, got {bad!r}")
    if not (np.any(w == 0) and np.any(w == 1)):
        raise EmptyGroup("fitting needs both treated and untreated instances")
    return w


class TLearner(BaseEstimator):
    """Two independent outcome models, one per trial arm.

    ``fit(X, w, y)`` trains the treatment-arm model on the treated rows
    and the control-arm model on the rest; ``predict_pair`` reads the
    treated and untreated positive probabilities off the respective
    models. Identical arms therefore produce exactly identical
    predictions and a treatment effect of exactly zero.
    """

    def __init__(self, l2: float = 1.0, tol: float = 1e-6, max_iter: int = 5000):
        self.l2 = l2
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, w, y):
        X = _as_feature_matrix(X)
        w = _check_treatment_vector(X, w)
        y = np.asarray(y).ravel()
        self.treatment_model_ = GradientLogistic(
            l2=self.l2, tol=self.tol, max_iter=self.max_iter
        ).fit(X[w == 1], y[w == 1])
        self.control_model_ = GradientLogistic(
            l2=self.l2, tol=self.tol, max_iter=self.max_iter
        ).fit(X[w == 0], y[w == 0])
        self.n_features_in_ = X.shape[1]
        return self

    def predict_pair(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Arrays (p11, p10) of treated and untreated positive probabilities."""
        if not hasattr(self, "treatment_model_"):
            raise NotFittedError("this TLearner instance is not fitted yet")
        p11 = self.treatment_model_.predict_proba(X)[:, 1]
        p10 = self.control_model_.predict_proba(X)[:, 1]
        return p11, p10


class SLearner(BaseEstimator):
    """One joint outcome model over features, arm flag, and interactions.

    The design is ``[x, w, w * x]``, so the arm flag shifts the intercept
    and the interactions let every slope differ between arms; scoring
    evaluates the model at w = 1 and w = 0.
    """

    def __init__(self, l2: float = 1.0, tol: float = 1e-6, max_iter: int = 5000):
        self.l2 = l2
        self.tol = tol
        self.max_iter = max_iter

    @staticmethod
    def _augment(X: np.ndarray, w: np.ndarray) -> np.ndarray:
        column = w.reshape(-1, 1).astype(np.float64)
        return np.hstack([X, column, X * column])

    def fit(self, X, w, y):
        X = _as_feature_matrix(X)
        w = _check_treatment_vector(X, w)
        self.model_ = GradientLogistic(
            l2=self.l2, tol=self.tol, max_iter=self.max_iter
        ).fit(self._augment(X, w), np.asarray(y).ravel())
        self.n_features_in_ = X.shape[1]
        return self

    def predict_pair(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Arrays (p11, p10) of treated and untreated positive probabilities."""
        if not hasattr(self, "model_"):
            raise NotFittedError("this SLearner instance is not fitted yet")
        X = _as_feature_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(
                f"model expects {self.n_features_in_} features, got {X.shape[1]}"
            )
        ones = np.ones(X.shape[0], dtype=np.int64)
        p11 = self.model_.predict_proba(self._augment(X, ones))[:, 1]
        p10 = self.model_.predict_proba(self._augment(X, 0 * ones))[:, 1]
        return p11, p10


def default_ids(n: int) -> list[str]:
    """Zero-padded decimal row ids whose lexicographic order is numeric."""
    width = max(len(str(max(n - 1, 0))), 1)
    return [str(index).zfill(width) for index in range(n)]


def score_instances(
    learner,
    X,
    ids: Optional[Sequence[str]] = None,
    group: Optional[Sequence[int]] = None,
    outcome: Optional[Sequence[int]] = None,
) -> list[ScoredInstance]:
    """Turn learner predictions on a feature matrix into scored instances.

    ``ids`` default to zero-padded row numbers. ``group`` and ``outcome``
    attach trial labels for downstream evaluation when provided.
    """
    X = _as_feature_matrix(X)
    p11, p10 = learner.predict_pair(X)
    n = X.shape[0]
    if ids is None:
        ids = default_ids(n)
    if len(ids) != n:
        raise ValueError(f"got {len(ids)} ids for {n} rows")
    if group is not None and len(group) != n:
        raise ValueError(f"got {len(group)} group labels for {n} rows")
    if outcome is not None and len(outcome) != n:
        raise ValueError(f"got {len(outcome)} outcomes for {n} rows")
    instances = []
    for index in range(n):
        instances.append(
            ScoredInstance(
                id=str(ids[index]),
                pair=ProbabilityPair(p11=float(p11[index]), p10=float(p10[index])),
                group=None if group is None else int(group[index]),
                outcome=None if outcome is None else int(outcome[index]),
            )
        )
    return instances


def write_scores_csv(instances: Sequence[ScoredInstance], path, include_labels: bool = False) -> None:
    """Write scores as CSV with header id,p11,p10,t.

    Floats carry 17 significant digits so a read-back reproduces them
    bit-exactly. ``include_labels`` appends treatment and outcome columns
    for files that feed evaluation directly.
    """
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        header = ["id", "p11", "p10", "t"]
        if include_labels:
            header += ["treatment", "outcome"]
        writer.writerow(header)
        for instance in instances:
            row = [
                instance.id,
                format(instance.pair.p11, ".17g"),
                format(instance.pair.p10, ".17g"),
                format(instance.pair.t, ".17g"),
            ]
            if include_labels:
                if instance.group is None or instance.outcome is None:
                    raise ValueError(
                        f"instance {instance.id!r} lacks labels for a labeled "
                        "score file"
                    )
                row += [instance.group, instance.outcome]
            writer.writerow(row)


_T_CONSISTENCY_TOLERANCE = 1e-6


def read_scores_csv(path, require_labels: bool = False) -> list[ScoredInstance]:
    """Read a score file back into scored instances, validating content.

    The effect column must agree with the probability difference within
    a small tolerance; treatment and outcome columns are optional unless
    ``require_labels`` is set. Content errors cite the file line (header
    is line 1) and column.
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
    positions = {name: index for index, name in enumerate(header)}
    for column in ("id", "p11", "p10", "t"):
        if column not in positions:
            raise MissingColumn(f"{path} lacks required column {column!r}")
    has_labels = "treatment" in positions and "outcome" in positions
    if require_labels and not has_labels:
        raise MissingLabels(
            f"{path} lacks the treatment and outcome columns needed for evaluation"
        )

    def probability(cell: str, line_number: int, column: str) -> float:
        try:
            value = float(cell)
        except ValueError:
            raise UnparsableNumber(
                f"line {line_number}, column {column!r}: {cell!r} is not a number"
            ) from None
        if math.isnan(value) or not 0.0 <= value <= 1.0:
            raise UnparsableNumber(
                f"line {line_number}, column {column!r}: {value!r} is outside [0, 1]"
            )
        return value

    def binary(cell: str, line_number: int, column: str) -> int:
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

    instances = []
    seen: set[str] = set()
    for line_number, row in rows:
        if len(row) != len(header):
            raise UnparsableNumber(
                f"line {line_number}: expected {len(header)} cells, got {len(row)}"
            )
        identifier = row[positions["id"]]
        if identifier in seen:
            raise IdMismatch(f"line {line_number}: duplicate id {identifier!r}")
        seen.add(identifier)
        p11 = probability(row[positions["p11"]], line_number, "p11")
        p10 = probability(row[positions["p10"]], line_number, "p10")
        cell = row[positions["t"]]
        try:
            effect = float(cell)
        except ValueError:
            raise UnparsableNumber(
                f"line {line_number}, column 't': {cell!r} is not a number"
            ) from None
        if not abs(effect - (p11 - p10)) <= _T_CONSISTENCY_TOLERANCE:
            raise UnparsableNumber(
                f"line {line_number}, column 't': {effect!r} disagrees with "
                f"p11 - p10 = {p11 - p10!r}"
            )
        group = outcome = None
        if has_labels:
            group = binary(row[positions["treatment"]], line_number, "treatment")
            outcome = binary(row[positions["outcome"]], line_number, "outcome")
        instances.append(
            ScoredInstance(
                id=identifier,
                pair=ProbabilityPair(p11=p11, p10=p10),
                group=group,
                outcome=outcome,
            )
        )
    return instances


def _logistic_to_dict(model: GradientLogistic) -> dict:
    return {
        "l2": float(model.l2),
        "tol": float(model.tol),
        "max_iter": int(model.max_iter),
        "n_features_in": int(model.n_features_in_),
        "kept_columns": [bool(flag) for flag in model.kept_columns_],
        "feature_means": [float(value) for value in model.feature_means_],
        "feature_stds": [float(value) for value in model.feature_stds_],
        "weights": [float(value) for value in model.weights_],
        "n_iter": int(model.n_iter_),
        "final_gradient_norm": float(model.final_gradient_norm_),
        "converged": bool(model.converged_),
        "stop_reason": model.stop_reason_,
    }


def _logistic_from_dict(payload: dict) -> GradientLogistic:
    model = GradientLogistic(
        l2=payload["l2"], tol=payload["tol"], max_iter=payload["max_iter"]
    )
    model.n_features_in_ = int(payload["n_features_in"])
    model.kept_columns_ = np.asarray(payload["kept_columns"], dtype=bool)
    model.feature_means_ = np.asarray(payload["feature_means"], dtype=np.float64)
    model.feature_stds_ = np.asarray(payload["feature_stds"], dtype=np.float64)
    model.weights_ = np.asarray(payload["weights"], dtype=np.float64)
    model.n_iter_ = int(payload["n_iter"])
    model.final_gradient_norm_ = float(payload["final_gradient_norm"])
    model.converged_ = bool(payload["converged"])
    model.stop_reason_ = payload["stop_reason"]
    return model


def save_model(learner, path) -> None:
    """Serialize a fitted metalearner to JSON.

    The payload tags the scheme, repeats the hyperparameters, and stores
    every submodel with its weights, standardization statistics, and
    convergence metadata; floats survive the round trip exactly.
    """
    if isinstance(learner, TLearner):
        if not hasattr(learner, "treatment_model_"):
            raise NotFittedError("cannot save an unfitted TLearner")
        payload = {
            "scheme": "t",
            "n_features_in": int(learner.n_features_in_),
            "hyperparameters": {
                "l2": float(learner.l2),
                "tol": float(learner.tol),
                "max_iter": int(learner.max_iter),
            },
            "models": {
                "treatment": _logistic_to_dict(learner.treatment_model_),
                "control": _logistic_to_dict(learner.control_model_),
            },
        }
    elif isinstance(learner, SLearner):
        if not hasattr(learner, "model_"):
            raise NotFittedError("cannot save an unfitted SLearner")
        payload = {
            "scheme": "s",
            "n_features_in": int(learner.n_features_in_),
            "hyperparameters": {
                "l2": float(learner.l2),
                "tol": float(learner.tol),
                "max_iter": int(learner.max_iter),
            },
            "models": {"joint": _logistic_to_dict(learner.model_)},
        }
    else:
        raise ValueError(f"cannot serialize learner of type {type(learner).__name__}")
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def load_model(path):
    """Load a metalearner saved by :func:`save_model`."""
    with open(path, "r", encoding="utf-8") as handle:
        payload = json.load(handle)
    scheme = payload.get("scheme")
    hyper = payload.get("hyperparameters", {})
    if scheme == "t":
        learner = TLearner(**hyper)
        learner.treatment_model_ = _logistic_from_dict(payload["models"]["treatment"])
        learner.control_model_ = _logistic_from_dict(payload["models"]["control"])
    elif scheme == "s":
        learner = SLearner(**hyper)
        learner.model_ = _logistic_from_dict(payload["models"]["joint"])
    else:
        raise ValueError(f"unknown model scheme {scheme!r}")
    learner.n_features_in_ = int(payload["n_features_in"])
    return learner
