"""Command-line surface: generate, fit, score, rank, select, evaluate, experiment.

Conventions shared by every subcommand:

* data goes to files; the only thing ever printed to the standard output
  stream is the one-line JSON emitted under ``--summary``;
* diagnostics go to the error stream;
* exit status 0 means success, 1 means a usage or configuration problem
  (bad flags, missing files, invalid JSON, degenerate cost structure),
  2 means the content of a data file is invalid;
* identical inputs and flags produce byte-identical output files.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys
from dataclasses import replace
from typing import Optional

from .boundary import build_boundary, cost_insensitive_boundary
from .costs import CostBenefitSpec, read_cost_config
from .data import ColumnSchema, GeneratorConfig, export_csv, generate, ingest_csv
from .estimation import (
    SLearner,
    TLearner,
    load_model,
    read_scores_csv,
    save_model,
    score_instances,
    write_scores_csv,
)
from .evaluation import (
    cumulative_positives,
    profit_curve,
    qini,
    score_distribution,
)
from .exceptions import (
    CausalProfitError,
    DegenerateCostStructure,
    MissingCounterpart,
)
from .experiment import (
    compare_rankers,
    read_plan,
    run_experiment,
    write_comparisons_csv,
    write_results_csv,
)
from .ranking import (
    RANKER_ECP,
    RANKER_ITE,
    rank_ecp,
    rank_ite,
    select_under_budget,
    write_ranking_csv,
    write_selection_csv,
)
from .svg import emit_boundary_chart, emit_line_chart

__all__ = ["main"]


class _UsageError(Exception):
    """Raised by handlers for usage problems; names the offending flag."""


class _Parser(argparse.ArgumentParser):
    # Usage problems must exit with status 1, not argparse's default 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _existing_file(path: str, flag: str) -> pathlib.Path:
    resolved = pathlib.Path(path)
    if not resolved.is_file():
        raise _UsageError(f"{flag}: file {resolved} does not exist")
    return resolved


def _output_dir(path: str) -> pathlib.Path:
    resolved = pathlib.Path(path)
    resolved.mkdir(parents=True, exist_ok=True)
    return resolved


def _note(message: str) -> None:
    print(message, file=sys.stderr)


def _summary(args, payload: dict) -> None:
    if getattr(args, "summary", False):
        print(json.dumps(payload, sort_keys=True), file=sys.stdout)


def _safe_name(name: str) -> str:
    # Scenario names may contain comparison signs; keep file names
    # distinct and portable.
    translated = name.replace(">", "-gt-").replace("<", "-lt-")
    return "".join(
        ch if ch.isalnum() or ch in "._-" else "_" for ch in translated
    )


def _write_curve_csv(points, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("eta_or_tau,value\n")
        for x, y in points:
            handle.write(f"{format(x, '.17g')},{format(y, '.17g')}\n")


def _write_histogram_csv(histogram, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("bin_low,bin_high,count\n")
        for index, count in enumerate(histogram.counts):
            low = histogram.bin_edges[index]
            high = histogram.bin_edges[index + 1]
            handle.write(f"{format(low, '.17g')},{format(high, '.17g')},{count}\n")


def _write_svg(document: str, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(document)


def _schema_from_args(args) -> ColumnSchema:
    return ColumnSchema(
        treatment_column=args.schema_treatment, outcome_column=args.schema_outcome
    )


def _add_schema_flags(parser) -> None:
    parser.add_argument(
        "--schema-treatment",
        default="treatment",
        help="name of the treatment column (default: treatment)",
    )
    parser.add_argument(
        "--schema-outcome",
        default="outcome",
        help="name of the outcome column (default: outcome)",
    )


def _add_summary_flag(parser) -> None:
    parser.add_argument(
        "--summary",
        action="store_true",
        help="print a one-line JSON summary to standard output",
    )


def _cmd_generate(args) -> int:
    config = GeneratorConfig(
        n=args.n,
        base_features=args.base_features,
        uplift_features=args.uplift_features,
        noise_features=args.noise_features,
        base_scale=args.base_scale,
        effect_scale=args.effect_scale,
        intercept=args.intercept,
        treatment_fraction=args.treatment_fraction,
        seed=args.seed,
    )
    dataset = generate(config)
    export_csv(dataset, args.out)
    _note(f"wrote {dataset.n} rows to {args.out}")
    _summary(args, dataset.summary().as_dict())
    return 0


def _cmd_fit(args) -> int:
    data_path = _existing_file(getattr(args, "in"), "--in")
    dataset = ingest_csv(data_path, _schema_from_args(args))
    learner = TLearner if args.scheme == "t" else SLearner
    model = learner(l2=args.l2, tol=args.tol, max_iter=args.max_iter)
    model.fit(dataset.X, dataset.w, dataset.y)
    save_model(model, args.out)
    _note(f"fitted {args.scheme}-scheme model on {dataset.n} rows, saved to {args.out}")
    _summary(
        args,
        {
            "scheme": args.scheme,
            "n": dataset.n,
            "features": len(dataset.feature_names),
            "out": str(args.out),
        },
    )
    return 0


def _cmd_score(args) -> int:
    data_path = _existing_file(getattr(args, "in"), "--in")
    model_path = _existing_file(args.model, "--model")
    dataset = ingest_csv(data_path, _schema_from_args(args))
    model = load_model(model_path)
    instances = score_instances(
        model, dataset.X, group=dataset.w, outcome=dataset.y
    )
    write_scores_csv(instances, args.out, include_labels=args.with_labels)
    _note(f"scored {len(instances)} instances to {args.out}")
    _summary(args, {"n": len(instances), "out": str(args.out)})
    return 0


def _load_spec(args) -> tuple[CostBenefitSpec, str]:
    config_path = _existing_file(args.config, "--config")
    return read_cost_config(config_path)


def _ranked_from_args(args, instances, spec: Optional[CostBenefitSpec]):
    if args.ranker == RANKER_ECP:
        if spec is None:
            raise _UsageError("--config is required when --ranker is ecp")
        return rank_ecp(instances, spec)
    return rank_ite(instances)


def _cmd_rank(args) -> int:
    scores_path = _existing_file(getattr(args, "in"), "--in")
    instances = read_scores_csv(scores_path)
    spec = None
    if args.config is not None:
        spec, _ = _load_spec(args)
    ranked = _ranked_from_args(args, instances, spec)
    write_ranking_csv(ranked, args.out)
    _note(f"ranked {len(ranked)} instances by {args.ranker} to {args.out}")
    _summary(args, {"n": len(ranked), "ranker": args.ranker, "out": str(args.out)})
    return 0


def _cmd_select(args) -> int:
    scores_path = _existing_file(getattr(args, "in"), "--in")
    if args.budget < 0:
        raise _UsageError(f"--budget must be nonnegative, got {args.budget}")
    instances = read_scores_csv(scores_path)
    spec, _ = _load_spec(args)
    ranked = _ranked_from_args(args, instances, spec)
    selection = select_under_budget(ranked, spec, args.budget)
    write_selection_csv(ranked, selection, args.out)
    _note(
        f"selected {len(selection.selected_ids)} of {len(ranked)} instances "
        f"(expected spend {selection.expected_spend:g} of budget {args.budget:g}) "
        f"to {args.out}"
    )
    _summary(
        args,
        {
            "selected": len(selection.selected_ids),
            "n": len(ranked),
            "expected_positives": selection.expected_positives,
            "expected_negatives": selection.expected_negatives,
            "expected_spend": selection.expected_spend,
            "budget": selection.budget,
            "out": str(args.out),
        },
    )
    return 0


def _cmd_evaluate(args) -> int:
    scores_path = _existing_file(getattr(args, "in"), "--in")
    instances = read_scores_csv(scores_path, require_labels=True)
    spec, scenario = _load_spec(args)
    out_dir = _output_dir(args.out)
    dataset_name = scores_path.stem
    rankers = [RANKER_ITE, RANKER_ECP] if args.ranker == "both" else [args.ranker]

    metric_rows = []
    summary_metrics = {}
    for ranker in rankers:
        ranked = rank_ecp(instances, spec) if ranker == RANKER_ECP else rank_ite(instances)
        curve = profit_curve(instances, ranked, spec)
        gains = qini(instances, ranked)
        metric_rows.append(
            (dataset_name, ranker, scenario, gains.coefficient,
             curve.ap, curve.mp, curve.eta_star)
        )
        summary_metrics[ranker] = {
            "qini": gains.coefficient,
            "ap": curve.ap,
            "mp": curve.mp,
            "eta_star": curve.eta_star,
        }
        _write_curve_csv(
            zip(curve.etas, curve.values), out_dir / f"profit_curve_{ranker}.csv"
        )
        _write_curve_csv(
            zip(gains.phis, gains.values), out_dir / f"qini_curve_{ranker}.csv"
        )
        for group, group_name in ((1, "treatment"), (0, "control")):
            points = cumulative_positives(instances, ranked, group)
            _write_curve_csv(
                points, out_dir / f"cumulative_positives_{group_name}_{ranker}.csv"
            )
        if args.plots:
            _write_svg(
                emit_line_chart(
                    list(zip(curve.etas, curve.values)),
                    f"Causal profit ({ranker} ranking, {scenario})",
                    "treated fraction",
                    "profit per instance",
                ),
                out_dir / f"profit_curve_{ranker}.svg",
            )
            _write_svg(
                emit_line_chart(
                    list(zip(gains.phis, gains.values)),
                    f"Incremental gains ({ranker} ranking)",
                    "targeted fraction",
                    "incremental positive rate",
                ),
                out_dir / f"qini_curve_{ranker}.svg",
            )

    with open(out_dir / "metrics.csv", "w", encoding="utf-8", newline="") as handle:
        handle.write("dataset,ranker,scenario,qini,ap,mp,eta_star\n")
        for dataset, ranker, name, q, ap, mp, eta_star in metric_rows:
            handle.write(
                f"{dataset},{ranker},{name},{format(q, '.17g')},"
                f"{format(ap, '.17g')},{format(mp, '.17g')},"
                f"{format(eta_star, '.17g')}\n"
            )

    for group, group_name in ((1, "treatment"), (0, "control")):
        histogram = score_distribution(instances, group=group)
        _write_histogram_csv(histogram, out_dir / f"score_hist_{group_name}.csv")

    if args.plots:
        try:
            boundary = build_boundary(spec)
        except DegenerateCostStructure:
            boundary = cost_insensitive_boundary()
        _write_svg(
            emit_boundary_chart(boundary, f"Decision boundary ({scenario})"),
            out_dir / "boundary.svg",
        )

    _note(f"evaluated {len(instances)} instances into {out_dir}")
    _summary(
        args,
        {
            "dataset": dataset_name,
            "scenario": scenario,
            "n": len(instances),
            "metrics": summary_metrics,
            "out": str(out_dir),
        },
    )
    return 0


def _cmd_experiment(args) -> int:
    plan_path = _existing_file(args.plan, "--plan")
    plan = read_plan(plan_path)
    if args.k_folds is not None:
        plan = replace(plan, folds=args.k_folds)
    if args.seed is not None:
        plan = replace(plan, seed=args.seed)
    out_dir = _output_dir(args.out)
    result = run_experiment(plan)
    write_results_csv(result.rows, out_dir / "results.csv")
    error_rows = sum(1 for row in result.rows if not row.ok)
    _note(
        f"wrote {len(result.rows)} result rows ({error_rows} errors) "
        f"to {out_dir / 'results.csv'}"
    )

    if RANKER_ITE in plan.rankers and RANKER_ECP in plan.rankers:
        try:
            comparisons, tally = compare_rankers(result.rows)
        except MissingCounterpart as exc:
            _note(f"skipping ranker comparison: {exc}")
        else:
            write_comparisons_csv(comparisons, out_dir / "comparisons.csv")
            _note(f"ranker win/tie/loss per metric: {json.dumps(tally, sort_keys=True)}")

    curve_dir = out_dir / "curves"
    curve_dir.mkdir(exist_ok=True)
    for (scenario, learner, ranker, fold), curve in sorted(result.profit_curves.items()):
        stem = f"{_safe_name(scenario)}__{learner}__{ranker}__fold{fold}"
        _write_curve_csv(
            zip(curve.etas, curve.values), curve_dir / f"{stem}__profit.csv"
        )
        if args.plots:
            _write_svg(
                emit_line_chart(
                    list(zip(curve.etas, curve.values)),
                    f"Causal profit ({scenario}, {learner}, {ranker}, fold {fold})",
                    "treated fraction",
                    "profit per instance",
                ),
                curve_dir / f"{stem}__profit.svg",
            )
    for (scenario, learner, ranker, fold), gains in sorted(result.qini_curves.items()):
        stem = f"{_safe_name(scenario)}__{learner}__{ranker}__fold{fold}"
        _write_curve_csv(
            zip(gains.phis, gains.values), curve_dir / f"{stem}__qini.csv"
        )
        if args.plots:
            _write_svg(
                emit_line_chart(
                    list(zip(gains.phis, gains.values)),
                    f"Incremental gains ({scenario}, {learner}, {ranker}, fold {fold})",
                    "targeted fraction",
                    "incremental positive rate",
                ),
                curve_dir / f"{stem}__qini.svg",
            )

    _summary(
        args,
        {
            "rows": len(result.rows),
            "error_rows": error_rows,
            "dataset": plan.dataset_name,
            "out": str(out_dir),
        },
    )
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="causalprofit", description=__doc__.splitlines()[0])
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    p = subparsers.add_parser("generate", help="draw a synthetic randomized trial")
    p.add_argument("--out", required=True, help="output dataset CSV path")
    p.add_argument("--n", type=int, default=10000, help="number of rows")
    p.add_argument("--seed", type=int, default=20250801, help="generator seed")
    p.add_argument("--base-features", type=int, default=5)
    p.add_argument("--uplift-features", type=int, default=11)
    p.add_argument("--noise-features", type=int, default=0)
    p.add_argument("--base-scale", type=float, default=1.0)
    p.add_argument("--effect-scale", type=float, default=GeneratorConfig().effect_scale)
    p.add_argument("--intercept", type=float, default=GeneratorConfig().intercept)
    p.add_argument("--treatment-fraction", type=float, default=0.5)
    _add_summary_flag(p)
    p.set_defaults(handler=_cmd_generate)

    p = subparsers.add_parser("fit", help="fit a metalearner on a dataset CSV")
    p.add_argument("--in", required=True, help="input dataset CSV path")
    p.add_argument("--out", required=True, help="output model JSON path")
    p.add_argument("--scheme", choices=["t", "s"], default="t", help="metalearner scheme")
    p.add_argument("--l2", type=float, default=1.0, help="L2 penalty strength")
    p.add_argument("--tol", type=float, default=1e-6, help="gradient norm tolerance")
    p.add_argument("--max-iter", type=int, default=5000, help="iteration cap")
    _add_schema_flags(p)
    _add_summary_flag(p)
    p.set_defaults(handler=_cmd_fit)

    p = subparsers.add_parser("score", help="score a dataset CSV with a fitted model")
    p.add_argument("--in", required=True, help="input dataset CSV path")
    p.add_argument("--model", required=True, help="fitted model JSON path")
    p.add_argument("--out", required=True, help="output scores CSV path")
    p.add_argument(
        "--with-labels",
        action="store_true",
        help="append treatment and outcome columns to the score file",
    )
    _add_schema_flags(p)
    _add_summary_flag(p)
    p.set_defaults(handler=_cmd_score)

    p = subparsers.add_parser("rank", help="rank scored instances")
    p.add_argument("--in", required=True, help="input scores CSV path")
    p.add_argument("--out", required=True, help="output ranking CSV path")
    p.add_argument("--ranker", choices=[RANKER_ITE, RANKER_ECP], default=RANKER_ECP)
    p.add_argument("--config", help="cost-benefit config JSON (required for ecp)")
    _add_summary_flag(p)
    p.set_defaults(handler=_cmd_rank)

    p = subparsers.add_parser("select", help="pick a treated prefix under a budget")
    p.add_argument("--in", required=True, help="input scores CSV path")
    p.add_argument("--out", required=True, help="output selection CSV path")
    p.add_argument("--config", required=True, help="cost-benefit config JSON")
    p.add_argument("--budget", type=float, required=True, help="spend ceiling")
    p.add_argument("--ranker", choices=[RANKER_ITE, RANKER_ECP], default=RANKER_ECP)
    _add_summary_flag(p)
    p.set_defaults(handler=_cmd_select)

    p = subparsers.add_parser(
        "evaluate", help="metrics and curves for a labeled score file"
    )
    p.add_argument("--in", required=True, help="labeled scores CSV path")
    p.add_argument("--config", required=True, help="cost-benefit config JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument(
        "--ranker", choices=[RANKER_ITE, RANKER_ECP, "both"], default="both"
    )
    p.add_argument("--plots", action="store_true", help="also emit SVG charts")
    _add_summary_flag(p)
    p.set_defaults(handler=_cmd_evaluate)

    p = subparsers.add_parser("experiment", help="run a full cross-validated sweep")
    p.add_argument("--plan", required=True, help="experiment plan JSON path")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--k-folds", type=int, default=None, help="override plan fold count")
    p.add_argument("--seed", type=int, default=None, help="override plan seed")
    p.add_argument("--plots", action="store_true", help="also emit SVG charts")
    _add_summary_flag(p)
    p.set_defaults(handler=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except _UsageError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 1
    except DegenerateCostStructure as exc:
        print(
            f"{parser.prog}: error: DegenerateCostStructure: {exc}", file=sys.stderr
        )
        return 1
    except (OSError, ValueError) as exc:
        # Covers unreadable paths, malformed JSON, and bad config values.
        print(f"{parser.prog}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except CausalProfitError as exc:
        print(f"{parser.prog}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
