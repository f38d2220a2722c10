"""Cost-sensitive causal classification: who to treat, and what it earns.

The package turns a randomized trial plus a cost-benefit specification
into treatment decisions and their economics: estimate
treatment-conditional probabilities, derive the profit-optimal decision
boundary, rank instances by expected causal profit, select under a
budget, and evaluate rankings with incremental-gain and causal-profit
curves.
"""

from .boundary import (
    COST_INSENSITIVE,
    COST_SENSITIVE,
    DecisionBoundary,
    ProbabilityPair,
    build_boundary,
    classification_threshold,
    classify,
    cost_insensitive_boundary,
    displacement,
    expected_causal_profit,
    expected_profit,
    ite_threshold,
)
from .costs import (
    ClassificationCostBenefitMatrix,
    CostBenefitSpec,
    OutcomeBenefitMatrix,
    TreatmentCostMatrix,
    bonus_condition,
    net_matrix,
    normalize,
    profitability_condition,
    read_cost_config,
    validate,
    write_cost_config,
)
from .data import (
    ColumnSchema,
    GeneratorConfig,
    TrialDataset,
    export_csv,
    generate,
    ingest_csv,
    k_fold_split,
    stratified_subsample,
)
from .estimation import (
    GradientLogistic,
    SLearner,
    TLearner,
    load_model,
    read_scores_csv,
    save_model,
    score_instances,
    write_scores_csv,
)
from .evaluation import (
    CausalConfusionMatrix,
    CausalEffectMatrix,
    ProfitCurve,
    QiniResult,
    causal_confusion,
    causal_effect,
    causal_profit,
    cumulative_positives,
    profit_curve,
    qini,
    score_distribution,
)
from .exceptions import (
    CausalProfitError,
    ConvergenceWarning,
    DegenerateCostStructure,
    DegenerateFeaturesWarning,
    EmptyCurve,
    EmptyFile,
    EmptyGroup,
    EmptyInput,
    IdMismatch,
    MissingColumn,
    MissingCounterpart,
    MissingLabels,
    NonBinaryLabel,
    StratumTooSmall,
    UnparsableNumber,
)
from .experiment import (
    ExperimentPlan,
    NamedScenario,
    compare_rankers,
    default_scenarios,
    run_experiment,
)
from .ranking import (
    BudgetSelection,
    RankedList,
    ScoredInstance,
    rank_correlation,
    rank_ecp,
    rank_ite,
    select_under_budget,
)
from .rng import SplitMix64
from .svg import emit_boundary_chart, emit_line_chart

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # costs
    "OutcomeBenefitMatrix",
    "TreatmentCostMatrix",
    "CostBenefitSpec",
    "ClassificationCostBenefitMatrix",
    "net_matrix",
    "normalize",
    "validate",
    "profitability_condition",
    "bonus_condition",
    "read_cost_config",
    "write_cost_config",
    # boundary
    "ProbabilityPair",
    "DecisionBoundary",
    "COST_SENSITIVE",
    "COST_INSENSITIVE",
    "build_boundary",
    "cost_insensitive_boundary",
    "classify",
    "classification_threshold",
    "ite_threshold",
    "expected_profit",
    "expected_causal_profit",
    "displacement",
    # ranking
    "ScoredInstance",
    "RankedList",
    "BudgetSelection",
    "rank_ite",
    "rank_ecp",
    "select_under_budget",
    "rank_correlation",
    # evaluation
    "CausalConfusionMatrix",
    "CausalEffectMatrix",
    "ProfitCurve",
    "QiniResult",
    "causal_confusion",
    "causal_effect",
    "causal_profit",
    "profit_curve",
    "qini",
    "cumulative_positives",
    "score_distribution",
    # estimation
    "GradientLogistic",
    "TLearner",
    "SLearner",
    "score_instances",
    "save_model",
    "load_model",
    "write_scores_csv",
    "read_scores_csv",
    # data
    "GeneratorConfig",
    "TrialDataset",
    "ColumnSchema",
    "generate",
    "ingest_csv",
    "export_csv",
    "k_fold_split",
    "stratified_subsample",
    # experiment
    "NamedScenario",
    "default_scenarios",
    "ExperimentPlan",
    "run_experiment",
    "compare_rankers",
    # rng and plots
    "SplitMix64",
    "emit_line_chart",
    "emit_boundary_chart",
    # exceptions
    "CausalProfitError",
    "DegenerateCostStructure",
    "EmptyInput",
    "EmptyCurve",
    "EmptyGroup",
    "EmptyFile",
    "IdMismatch",
    "MissingLabels",
    "MissingCounterpart",
    "MissingColumn",
    "NonBinaryLabel",
    "UnparsableNumber",
    "StratumTooSmall",
    "ConvergenceWarning",
    "DegenerateFeaturesWarning",
]
