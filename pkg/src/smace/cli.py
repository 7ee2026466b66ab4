"""Command line interface.

Subcommands::

    smace validate  --system sys.json
    smace explain   --system sys.json --instance inst.json [--rule NAME]
                    [--backend exact|linear] [--seed N] [--format table|json]
    smace compare   --system sys.json --instance inst.json
                    [--methods smace,shap,lime] [--seed N] [--format table|json]
    smace reproduce --case rules-generic|rules-violation|hybrid
                    [--analytic-bounds] [--seed N] [--format table|json]

Exit codes: 0 on success, 1 when validation or a reproduction check
fails, 2 on any component error (bad config, unknown rule, model
failure). ``SMACE_SEED`` is used when --seed is not given.
"""

from __future__ import annotations

import argparse
import os
import sys


from .aggregate import explain, rank
from .baselines import BaselineConfig, run_baseline
from .dsl import Severity
from .errors import SmaceError
from .io import load_instance, load_system
from .models_explain import make_engine
from .repro import CASE_NAMES, DEFAULT_SEED, run_case
from .reports import comparison_to_dict, emit_json, explanation_report
from .scaling import fit_scaler


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("SMACE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SmaceError(f"SMACE_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _load_ready_system(path):
    loaded = load_system(path, strict=True)
    if loaded.dataset is None:
        raise SmaceError(
            "the system config declares no reference dataset; one is required "
            "to fit the scaler and attribution background"
        )
    return loaded


def _format_value(value: float) -> str:
    return f"{value: .4f}"


def _print_table(header: list[str], rows: list[list[str]], out) -> None:
    widths = [max(len(str(r[i])) for r in [header, *rows]) for i in range(len(header))]
    line = "  ".join(str(h).ljust(w) for h, w in zip(header, widths))
    print(line, file=out)
    print("-" * len(line), file=out)
    for row in rows:
        print("  ".join(str(c).ljust(w) for c, w in zip(row, widths)), file=out)


def cmd_validate(args, out) -> int:
    loaded = load_system(args.system, strict=False)
    for diagnostic in loaded.diagnostics:
        print(str(diagnostic), file=out)
    errors = [d for d in loaded.diagnostics if d.severity is Severity.ERROR]
    if not errors:
        print("system config is valid", file=out)
        return 0
    return 1


def cmd_explain(args, out) -> int:
    loaded = _load_ready_system(args.system)
    system, dataset = loaded.system, loaded.dataset
    instance = load_instance(args.instance, system)
    scaler = fit_scaler(system, dataset)
    seed = _resolve_seed(args.seed)
    engine = make_engine(args.backend, dataset, seed=seed)
    explanation = explain(system, scaler, instance, rule=args.rule, engine=engine)

    if args.format == "json":
        out.write(explanation_report(explanation))
        return 0
    for warning in scaler.warnings:
        print(f"warning: {warning}", file=out)
    print(f"rule: {explanation.rule}    outcome: {explanation.outcome}", file=out)
    rows = []
    d = len(explanation.e)
    for j, name in enumerate(explanation.feature_names):
        r_j = _format_value(float(explanation.r[j]))
        e_j = _format_value(float(explanation.e[j])) if j < d else ""
        rows.append([name, r_j, e_j])
    _print_table(["feature", "r", "e"], rows, out)
    ranked = ", ".join(name for name, _ in rank(explanation))
    print(f"ranking by |e|: {ranked}", file=out)
    return 0


def cmd_compare(args, out) -> int:
    loaded = _load_ready_system(args.system)
    system, dataset = loaded.system, loaded.dataset
    instance = load_instance(args.instance, system)
    scaler = fit_scaler(system, dataset)
    seed = _resolve_seed(args.seed)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not methods:
        raise SmaceError("--methods must name at least one of smace, shap, lime")

    results = {}
    for method in methods:
        if method == "smace":
            engine = make_engine("exact", dataset, seed=seed)
            explanation = explain(system, scaler, instance, engine=engine)
            results["smace"] = explanation.e
        elif method in ("shap", "lime"):
            config = BaselineConfig(method=method, seed=seed)
            results[method] = run_baseline(method, system, instance, scaler, config)
        else:
            raise SmaceError(f"unknown method {method!r}; choose from smace, shap, lime")

    document = comparison_to_dict(system.input_names, instance.values, results)
    if args.format == "json":
        out.write(emit_json(document) + "\n")
        return 0
    rows = []
    for j, name in enumerate(system.input_names):
        row = [name, _format_value(float(instance.values[j]))]
        for method in results:
            row.append(_format_value(document["methods"][method][name]))
        rows.append(row)
    _print_table(["feature", "value", *results.keys()], rows, out)
    for method, flag in document.get("degenerate", {}).items():
        if flag:
            print(f"note: {method} was degenerate (no label variation in samples)", file=out)
    return 0


def cmd_reproduce(args, out) -> int:
    seed = _resolve_seed(args.seed)
    result = run_case(args.case, seed=seed, analytic=args.analytic_bounds)
    if args.format == "json":
        document = {
            "case": result.case,
            "seed": result.seed,
            "analytic_bounds": result.analytic,
            "checks": [
                {
                    "label": c.label,
                    "actual": c.actual,
                    "expected": c.expected,
                    "tolerance": c.tolerance,
                    "ok": c.ok,
                }
                for c in result.checks
            ],
            "passed": result.passed,
            "elapsed_seconds": result.elapsed_seconds,
        }
        out.write(emit_json(document) + "\n")
        return 0 if result.passed else 1

    scaling = "analytic bounds" if result.analytic else "empirical scaler"
    print(f"case {result.case} (seed {result.seed}, {scaling})", file=out)
    rows = [
        [c.label, f"{c.actual:+.4f}", f"{c.expected:+.4f}", f"{c.tolerance:g}",
         "PASS" if c.ok else "FAIL"]
        for c in result.checks
    ]
    _print_table(["quantity", "actual", "expected", "tolerance", "status"], rows, out)
    print(f"elapsed: {result.elapsed_seconds:.3f}s", file=out)
    print("PASS" if result.passed else "FAIL", file=out)
    return 0 if result.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smace",
        description="Explain decisions of systems combining models and threshold rules.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check a system config")
    p_validate.add_argument("--system", required=True)

    p_explain = sub.add_parser("explain", help="explain one decision")
    p_explain.add_argument("--system", required=True)
    p_explain.add_argument("--instance", required=True)
    p_explain.add_argument("--rule", default=None)
    p_explain.add_argument("--backend", choices=["exact", "linear"], default="exact")
    p_explain.add_argument("--seed", type=int, default=None)
    p_explain.add_argument("--format", choices=["table", "json"], default="table")

    p_compare = sub.add_parser("compare", help="side-by-side with baselines")
    p_compare.add_argument("--system", required=True)
    p_compare.add_argument("--instance", required=True)
    p_compare.add_argument("--methods", default="smace,shap,lime")
    p_compare.add_argument("--seed", type=int, default=None)
    p_compare.add_argument("--format", choices=["table", "json"], default="table")

    p_reproduce = sub.add_parser("reproduce", help="run a built-in benchmark case")
    p_reproduce.add_argument("--case", required=True, choices=list(CASE_NAMES))
    p_reproduce.add_argument("--analytic-bounds", action="store_true")
    p_reproduce.add_argument("--seed", type=int, default=None)
    p_reproduce.add_argument("--format", choices=["table", "json"], default="table")

    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    handlers = {
        "validate": cmd_validate,
        "explain": cmd_explain,
        "compare": cmd_compare,
        "reproduce": cmd_reproduce,
    }
    try:
        return handlers[args.command](args, out)
    except SmaceError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
