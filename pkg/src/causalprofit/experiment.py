"""Cross-validated sweeps over cost scenarios, learners, and rankers.

One experiment is a grid: every combination of cost scenario, learner
scheme, ranking key, and cross-validation fold is a cell. Each cell
fits on the fold's training rows, scores the fold's test rows, ranks
them, and evaluates the ranking. Cells fail independently; a failure
becomes an error row and the sweep continues.
"""

from __future__ import annotations

import csv
import json
import math
import pathlib
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .boundary import ProbabilityPair
from .costs import (
    CostBenefitSpec,
    OutcomeBenefitMatrix,
    TreatmentCostMatrix,
    spec_from_config_dict,
    spec_to_config_dict,
)
from .data import (
    ColumnSchema,
    GeneratorConfig,
    TrialDataset,
    generate,
    ingest_csv,
    k_fold_split,
)
from .estimation import SLearner, TLearner, score_instances
from .evaluation import ProfitCurve, QiniResult, profit_curve, qini
from .exceptions import MissingCounterpart
from .ranking import (
    RANKER_ECP,
    RANKER_ITE,
    RankedList,
    ScoredInstance,
    rank_ecp,
    rank_ite,
)

__all__ = [
    "NamedScenario",
    "default_scenarios",
    "SyntheticSource",
    "CsvSource",
    "ExperimentPlan",
    "plan_from_dict",
    "plan_to_dict",
    "read_plan",
    "ResultRow",
    "ExperimentResult",
    "run_experiment",
    "write_results_csv",
    "RankerComparison",
    "compare_rankers",
    "write_comparisons_csv",
    "LEARNER_T",
    "LEARNER_S",
    "LEARNER_ORACLE",
    "MEAN_FOLD",
]

LEARNER_T = "t"
LEARNER_S = "s"
LEARNER_ORACLE = "oracle"
KNOWN_LEARNERS = (LEARNER_T, LEARNER_S, LEARNER_ORACLE)
KNOWN_RANKERS = (RANKER_ITE, RANKER_ECP)
MEAN_FOLD = "mean"

METRIC_NAMES = ("qini", "ap", "mp", "eta_star")


@dataclass(frozen=True)
class NamedScenario:
    """A cost-benefit specification with a label for report rows."""

    name: str
    spec: CostBenefitSpec

    def __post_init__(self):
        if not self.name:
            raise ValueError("scenario name must be nonempty")


def default_scenarios() -> list[NamedScenario]:
    """The two stock scenarios: retention bonus above or below the base benefit.

    Both charge 10 per treatment applied; they differ only in whether a
    converted treated instance is worth more (120 vs 100) or less
    (100 vs 120) than a persuaded-anyway one.
    """
    costs = TreatmentCostMatrix(0.0, 10.0, 0.0, 10.0)
    return [
        NamedScenario(
            "b11>b10",
            CostBenefitSpec(OutcomeBenefitMatrix(0.0, 0.0, 100.0, 120.0), costs),
        ),
        NamedScenario(
            "b11<b10",
            CostBenefitSpec(OutcomeBenefitMatrix(0.0, 0.0, 120.0, 100.0), costs),
        ),
    ]


@dataclass(frozen=True)
class SyntheticSource:
    """Dataset drawn from the built-in generator at load time."""

    config: GeneratorConfig = field(default_factory=GeneratorConfig)
    name: str = "synthetic"

    def load(self) -> TrialDataset:
        return generate(self.config)


@dataclass(frozen=True)
class CsvSource:
    """Dataset read from a CSV file at load time."""

    path: str
    schema: ColumnSchema = ColumnSchema()
    name: Optional[str] = None

    def load(self) -> TrialDataset:
        return ingest_csv(self.path, self.schema)

    @property
    def label(self) -> str:
        return self.name if self.name else pathlib.Path(self.path).stem


DatasetSource = Union[SyntheticSource, CsvSource]


@dataclass(frozen=True)
class ExperimentPlan:
    """Full description of one sweep; everything downstream is derived."""

    source: DatasetSource
    scenarios: tuple[NamedScenario, ...] = ()
    learners: tuple[str, ...] = (LEARNER_T, LEARNER_S)
    rankers: tuple[str, ...] = (RANKER_ITE, RANKER_ECP)
    folds: int = 5
    seed: int = 20250801

    def __post_init__(self):
        scenarios = tuple(self.scenarios) if self.scenarios else tuple(default_scenarios())
        object.__setattr__(self, "scenarios", scenarios)
        object.__setattr__(self, "learners", tuple(self.learners))
        object.__setattr__(self, "rankers", tuple(self.rankers))
        if not self.scenarios:
            raise ValueError("plan needs at least one scenario")
        if not self.learners:
            raise ValueError("plan needs at least one learner")
        if not self.rankers:
            raise ValueError("plan needs at least one ranker")
        names = [scenario.name for scenario in self.scenarios]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate scenario names in {names}")
        for learner in self.learners:
            if learner not in KNOWN_LEARNERS:
                raise ValueError(
                    f"unknown learner {learner!r}, expected one of {KNOWN_LEARNERS}"
                )
        for ranker in self.rankers:
            if ranker not in KNOWN_RANKERS:
                raise ValueError(
                    f"unknown ranker {ranker!r}, expected one of {KNOWN_RANKERS}"
                )
        if int(self.folds) < 2:
            raise ValueError(f"folds must be at least 2, got {self.folds!r}")

    @property
    def dataset_name(self) -> str:
        if isinstance(self.source, SyntheticSource):
            return self.source.name
        return self.source.label


def _generator_config_from_dict(payload: dict) -> GeneratorConfig:
    allowed = {
        "n",
        "base_features",
        "uplift_features",
        "noise_features",
        "base_scale",
        "effect_scale",
        "intercept",
        "treatment_fraction",
        "seed",
    }
    unknown = sorted(set(payload) - allowed)
    if unknown:
        raise ValueError(f"unknown synthetic dataset fields {unknown}")
    return GeneratorConfig(**payload)


def plan_from_dict(payload: dict, base_dir: Optional[pathlib.Path] = None) -> ExperimentPlan:
    """Build a plan from its JSON form.

    Relative CSV paths resolve against ``base_dir`` (the plan file's
    directory) so a plan can travel with its data.
    """
    if not isinstance(payload, dict):
        raise ValueError(f"plan must be a JSON object, got {type(payload).__name__}")
    known = {"dataset", "scenarios", "learners", "rankers", "folds", "seed"}
    unknown = sorted(set(payload) - known)
    if unknown:
        raise ValueError(f"unknown plan fields {unknown}")
    dataset = payload.get("dataset")
    if not isinstance(dataset, dict) or "kind" not in dataset:
        raise ValueError('plan needs a "dataset" object with a "kind" field')
    dataset = dict(dataset)
    kind = dataset.pop("kind")
    if kind == "synthetic":
        name = dataset.pop("name", "synthetic")
        source: DatasetSource = SyntheticSource(
            config=_generator_config_from_dict(dataset), name=name
        )
    elif kind == "csv":
        if "path" not in dataset:
            raise ValueError('csv dataset needs a "path" field')
        path = pathlib.Path(dataset.pop("path"))
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        schema = ColumnSchema(
            treatment_column=dataset.pop("treatment_column", "treatment"),
            outcome_column=dataset.pop("outcome_column", "outcome"),
        )
        name = dataset.pop("name", None)
        if dataset:
            raise ValueError(f"unknown csv dataset fields {sorted(dataset)}")
        source = CsvSource(path=str(path), schema=schema, name=name)
    else:
        raise ValueError(f'unknown dataset kind {kind!r}, expected "synthetic" or "csv"')

    scenarios: list[NamedScenario] = []
    for index, entry in enumerate(payload.get("scenarios", [])):
        if not isinstance(entry, dict):
            raise ValueError(f"scenario {index} must be an object")
        entry = dict(entry)
        name = entry.pop("name", None)
        if not name:
            raise ValueError(f'scenario {index} needs a "name" field')
        scenarios.append(NamedScenario(str(name), spec_from_config_dict(entry)))

    return ExperimentPlan(
        source=source,
        scenarios=tuple(scenarios),
        learners=tuple(payload.get("learners", (LEARNER_T, LEARNER_S))),
        rankers=tuple(payload.get("rankers", (RANKER_ITE, RANKER_ECP))),
        folds=int(payload.get("folds", 5)),
        seed=int(payload.get("seed", 20250801)),
    )


def plan_to_dict(plan: ExperimentPlan) -> dict:
    if isinstance(plan.source, SyntheticSource):
        config = plan.source.config
        dataset = {
            "kind": "synthetic",
            "name": plan.source.name,
            "n": config.n,
            "base_features": config.base_features,
            "uplift_features": config.uplift_features,
            "noise_features": config.noise_features,
            "base_scale": config.base_scale,
            "effect_scale": config.effect_scale,
            "intercept": config.intercept,
            "treatment_fraction": config.treatment_fraction,
            "seed": config.seed,
        }
    else:
        dataset = {
            "kind": "csv",
            "path": plan.source.path,
            "treatment_column": plan.source.schema.treatment_column,
            "outcome_column": plan.source.schema.outcome_column,
        }
        if plan.source.name:
            dataset["name"] = plan.source.name
    scenarios = []
    for scenario in plan.scenarios:
        entry = {"name": scenario.name}
        entry.update(spec_to_config_dict(scenario.spec))
        scenarios.append(entry)
    return {
        "dataset": dataset,
        "scenarios": scenarios,
        "learners": list(plan.learners),
        "rankers": list(plan.rankers),
        "folds": plan.folds,
        "seed": plan.seed,
    }


def read_plan(path) -> ExperimentPlan:
    path = pathlib.Path(path)
    with open(path, "r", encoding="utf-8") as handle:
        payload = json.load(handle)
    return plan_from_dict(payload, base_dir=path.parent)


@dataclass(frozen=True)
class ResultRow:
    """One cell of the sweep, or its across-folds mean."""

    dataset: str
    scenario: str
    learner: str
    ranker: str
    fold: str
    qini: Optional[float] = None
    ap: Optional[float] = None
    mp: Optional[float] = None
    eta_star: Optional[float] = None
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error

    def metrics(self) -> dict:
        return {name: getattr(self, name) for name in METRIC_NAMES}


@dataclass
class ExperimentResult:
    """Rows plus the curves behind them, keyed by cell."""

    plan: ExperimentPlan
    rows: list[ResultRow]
    profit_curves: dict[tuple[str, str, str, str], ProfitCurve]
    qini_curves: dict[tuple[str, str, str, str], QiniResult]

    def mean_rows(self) -> list[ResultRow]:
        return [row for row in self.rows if row.fold == MEAN_FOLD]


def _fold_scores(dataset: TrialDataset, train, test, learner: str):
    """Fit one learner on the training rows and score the test rows.

    Returns scored instances whose ids are the zero-padded original row
    indices, so ids stay stable across cells and folds.
    """
    width = len(str(max(dataset.n - 1, 0)))
    ids = [format(int(index), f"0{width}d") for index in test]
    X_test = dataset.X[test]
    if learner == LEARNER_ORACLE:
        if not dataset.has_ground_truth:
            raise ValueError(
                "oracle learner needs ground-truth probability columns"
            )
        return [
            ScoredInstance(
                id=ids[index],
                pair=ProbabilityPair(
                    float(dataset.gt_p11[row]), float(dataset.gt_p10[row])
                ),
                group=int(dataset.w[row]),
                outcome=int(dataset.y[row]),
            )
            for index, row in enumerate(test)
        ]
    model = TLearner() if learner == LEARNER_T else SLearner()
    model.fit(dataset.X[train], dataset.w[train], dataset.y[train])
    return score_instances(
        model,
        X_test,
        ids=ids,
        group=dataset.w[test],
        outcome=dataset.y[test],
    )


def _rank(instances, ranker: str, spec: CostBenefitSpec) -> RankedList:
    if ranker == RANKER_ITE:
        return rank_ite(instances)
    return rank_ecp(instances, spec)


def run_experiment(plan: ExperimentPlan) -> ExperimentResult:
    """Execute the full sweep described by the plan.

    Fitting happens once per (learner, fold); rankings and metrics are
    computed per scenario and ranker on the shared scores. Every failure
    is caught at cell granularity and recorded as an error row.
    """
    dataset = plan.source.load()
    dataset_name = plan.dataset_name
    splits = k_fold_split(dataset, plan.folds, plan.seed)

    rows: list[ResultRow] = []
    profit_curves: dict[tuple[str, str, str, str], ProfitCurve] = {}
    qini_curves: dict[tuple[str, str, str, str], QiniResult] = {}
    cells: dict[tuple[str, str, str], list[ResultRow]] = {}

    for fold_index, (train, test) in enumerate(splits):
        fold = str(fold_index)
        for learner in plan.learners:
            try:
                scores = _fold_scores(dataset, train, test, learner)
                fit_error = None
            except Exception as exc:
                scores = None
                fit_error = f"{type(exc).__name__}: {exc}"
            for scenario in plan.scenarios:
                for ranker in plan.rankers:
                    key = (scenario.name, learner, ranker)
                    if fit_error is not None:
                        row = ResultRow(
                            dataset_name, scenario.name, learner, ranker, fold,
                            error=fit_error,
                        )
                    else:
                        try:
                            ranked = _rank(scores, ranker, scenario.spec)
                            curve = profit_curve(scores, ranked, scenario.spec)
                            gains = qini(scores, ranked)
                            row = ResultRow(
                                dataset_name, scenario.name, learner, ranker, fold,
                                qini=gains.coefficient,
                                ap=curve.ap,
                                mp=curve.mp,
                                eta_star=curve.eta_star,
                            )
                            profit_curves[(scenario.name, learner, ranker, fold)] = curve
                            qini_curves[(scenario.name, learner, ranker, fold)] = gains
                        except Exception as exc:
                            row = ResultRow(
                                dataset_name, scenario.name, learner, ranker, fold,
                                error=f"{type(exc).__name__}: {exc}",
                            )
                    rows.append(row)
                    cells.setdefault(key, []).append(row)

    # Mean rows preserve plan order: scenario, then learner, then ranker.
    for scenario in plan.scenarios:
        for learner in plan.learners:
            for ranker in plan.rankers:
                fold_rows = cells.get((scenario.name, learner, ranker), [])
                good = [row for row in fold_rows if row.ok]
                if not good:
                    failures = len(fold_rows)
                    rows.append(
                        ResultRow(
                            dataset_name, scenario.name, learner, ranker, MEAN_FOLD,
                            error=f"all {failures} folds failed",
                        )
                    )
                    continue
                means = {
                    name: math.fsum(getattr(row, name) for row in good) / len(good)
                    for name in METRIC_NAMES
                }
                rows.append(
                    ResultRow(
                        dataset_name, scenario.name, learner, ranker, MEAN_FOLD,
                        **means,
                    )
                )
    return ExperimentResult(
        plan=plan, rows=rows, profit_curves=profit_curves, qini_curves=qini_curves
    )


def _format_metric(value: Optional[float]) -> str:
    return "" if value is None else format(value, ".17g")


def write_results_csv(rows: Sequence[ResultRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["dataset", "scenario", "learner", "ranker", "fold",
             "qini", "ap", "mp", "eta_star", "error"]
        )
        for row in rows:
            writer.writerow(
                [
                    row.dataset,
                    row.scenario,
                    row.learner,
                    row.ranker,
                    row.fold,
                    _format_metric(row.qini),
                    _format_metric(row.ap),
                    _format_metric(row.mp),
                    _format_metric(row.eta_star),
                    row.error,
                ]
            )


@dataclass(frozen=True)
class RankerComparison:
    """Per-cell metric difference between two ranking keys."""

    dataset: str
    scenario: str
    learner: str
    metric: str
    baseline: float
    challenger: float

    @property
    def delta(self) -> float:
        return self.challenger - self.baseline


def compare_rankers(
    rows: Sequence[ResultRow],
    baseline: str = RANKER_ITE,
    challenger: str = RANKER_ECP,
) -> tuple[list[RankerComparison], dict]:
    """Pair up mean rows of the two rankers and report signed deltas.

    Returns the per-cell comparisons and a win/tie/loss tally per
    metric, counting a win when the challenger strictly exceeds the
    baseline. A cell whose counterpart row is absent is an error.
    """
    means = {}
    for row in rows:
        if row.fold != MEAN_FOLD or not row.ok:
            continue
        means[(row.dataset, row.scenario, row.learner, row.ranker)] = row
    comparisons: list[RankerComparison] = []
    tally = {name: {"win": 0, "tie": 0, "loss": 0} for name in METRIC_NAMES}
    seen = False
    for (dataset, scenario, learner, ranker), row in means.items():
        if ranker != baseline:
            continue
        seen = True
        other = means.get((dataset, scenario, learner, challenger))
        if other is None:
            raise MissingCounterpart(
                f"no {challenger!r} mean row for dataset {dataset!r}, "
                f"scenario {scenario!r}, learner {learner!r}"
            )
        for name in METRIC_NAMES:
            comparison = RankerComparison(
                dataset=dataset,
                scenario=scenario,
                learner=learner,
                metric=name,
                baseline=getattr(row, name),
                challenger=getattr(other, name),
            )
            comparisons.append(comparison)
            if comparison.delta > 0:
                tally[name]["win"] += 1
            elif comparison.delta < 0:
                tally[name]["loss"] += 1
            else:
                tally[name]["tie"] += 1
    if not seen:
        raise MissingCounterpart(
            f"no successful mean rows for baseline ranker {baseline!r}"
        )
    return comparisons, tally


def write_comparisons_csv(comparisons: Sequence[RankerComparison], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["dataset", "scenario", "learner", "metric",
             "baseline", "challenger", "delta"]
        )
        for comparison in comparisons:
            writer.writerow(
                [
                    comparison.dataset,
                    comparison.scenario,
                    comparison.learner,
                    comparison.metric,
                    format(comparison.baseline, ".17g"),
                    format(comparison.challenger, ".17g"),
                    format(comparison.delta, ".17g"),
                ]
            )
