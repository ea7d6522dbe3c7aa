# src/cli.py
"""
Command-line front end.

    python -m src.cli analyze  <config>
    python -m src.cli simulate <config> --seed 7 --trials 100000
    python -m src.cli codebook <config> --stage 2 --n 8 --rate 0.5
    python -m src.cli codebook <config> --n 4 --rate 0.5      # every stage

Exit codes: 0 success, 1 input error, 2 failed self-check.
"""
from __future__ import annotations
import argparse
import json
import math
import sys
import time
from typing import Callable, Dict, List, Optional, Tuple

from .config import EQUIVALENCE_TOL, LOG_DIR, OUT_DIR, STANDARD_ERRORS
from .errors import ConfigError, GramError
from .logs import log_json, setup_logging
from .montecarlo_sim import SeedSpec, run_codebook_experiment, run_genie_dfe, union_error_bound
from .presets import read_config_text
from .reports import FORMATS, ReportBundle, matrix_rows
from .scenarios import (
    OBSERVED,
    build_joint_gram,
    dfe_filters,
    entropy_table,
    incremental_rates,
    stagewise_mutual_information,
)
from .schema import ParsedConfig, ScenarioConfig, canonical_json, parse_config, with_overrides

EXIT_OK, EXIT_INPUT, EXIT_CHECK = 0, 1, 2

RATE_COLUMNS = ["stage", "group", "rate_bits", "rate_nats"]
ENTROPY_COLUMNS = ["quantity", "nats", "bits"]
FILTER_COLUMNS = ["matrix", "row", "col", "re", "im"]
GENIE_COLUMNS = ["stage", "theory_var", "empirical_var", "rel_err", "n_trials"]
ORTHO_COLUMNS = ["quantity", "value", "bound", "passed"]
CODEBOOK_COLUMNS = ["stage", "n", "R_bits", "incremental_rate_bits", "trials", "wer"]

_LN2 = math.log(2.0)


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors (exit 1), not self-check failures
    def error(self, message: str):
        raise ConfigError(message)


def _in_base(nats: float, base: str) -> float:
    return nats / _LN2 if base == "bits" else nats


def _require(cfg: ScenarioConfig, key: str) -> int:
    value = getattr(cfg, key)
    if value is None:
        raise ConfigError(f"required for this command (config key or --{key})", key=key)
    return value


# ---------- Commands ----------
def cmd_analyze(p: ParsedConfig, args: argparse.Namespace) -> Tuple[ReportBundle, int]:
    j = build_joint_gram(p.scenario)
    order = list(p.order)
    profile = incremental_rates(j, order)
    stagewise = stagewise_mutual_information(j, order)
    f = dfe_filters(j, order)
    base = p.config.log_base

    bundle = ReportBundle("analyze")
    rows = [
        {"stage": i + 1, "group": name, "rate_bits": r / _LN2, "rate_nats": r}
        for i, (name, r) in enumerate(zip(order, profile.rates_nats))
    ]
    rows.append({"stage": "total", "group": "", "rate_bits": profile.total_bits, "rate_nats": profile.total_nats})
    mi = profile.reference_mi
    rows.append({"stage": "mutual_information", "group": "", "rate_bits": mi.bits, "rate_nats": mi.nats})
    bundle.add("rates", rows, RATE_COLUMNS)

    entropies = entropy_table(j, order)
    bundle.add("entropy", [{"quantity": k, "nats": v, "bits": v / _LN2} for k, v in entropies.items()],
               ENTROPY_COLUMNS)

    xs = list(f.input_labels)
    ys = j.group_labels(OBSERVED)
    filters = (
        matrix_rows("forward", f.forward, xs, ys)
        + matrix_rows("feedforward_std", f.feedforward_std, xs, ys)
        + matrix_rows("feedback", f.feedback_std, xs, xs)
        + matrix_rows("error_gram", f.error_gram.matrix, xs, xs)
    )
    bundle.add("filters", filters, FILTER_COLUMNS)

    stagewise_gap = max((abs(a - b) for a, b in zip(stagewise, profile.rates_nats)), default=0.0)
    checks = {
        "rate_sum": profile.rate_sum_gap <= EQUIVALENCE_TOL,
        "stagewise_mutual_information": stagewise_gap <= EQUIVALENCE_TOL,
    }
    bundle.summary = {
        "kind": p.scenario.kind.value,
        "order": order,
        "log_base": base,
        "rates": [_in_base(r, base) for r in profile.rates_nats],
        "total": _in_base(profile.total_nats, base),
        "mutual_information": _in_base(mi.nats, base),
        "rate_sum_gap_nats": profile.rate_sum_gap,
        "stagewise_gap_nats": stagewise_gap,
        "checks": checks,
        "config": json.loads(canonical_json(p.config)),
    }
    for name, r in zip(order, profile.rates_nats):
        print(f"R[{name}] = {_in_base(r, base):.12g} {base}")
    print(f"sum = {_in_base(profile.total_nats, base):.12g} {base}, I(X;Y) = {_in_base(mi.nats, base):.12g} {base}")
    return bundle, EXIT_OK if all(checks.values()) else EXIT_CHECK


def cmd_simulate(p: ParsedConfig, args: argparse.Namespace) -> Tuple[ReportBundle, int]:
    seed = _require(p.config, "seed")
    trials = _require(p.config, "trials")
    j = build_joint_gram(p.scenario)
    order = list(p.order)
    f = dfe_filters(j, order)
    report = run_genie_dfe(p.scenario, order, f, SeedSpec(seed), trials)

    bundle = ReportBundle("simulate")
    rows = [
        {"stage": i + 1, "theory_var": t, "empirical_var": e, "rel_err": r, "n_trials": report.n_trials}
        for i, (t, e, r) in enumerate(zip(report.theory_vars, report.empirical_vars, report.rel_errs))
    ]
    bundle.add("genie", rows, GENIE_COLUMNS)
    bundle.add("orthogonality", [
        {"quantity": "orthogonality_residual", "value": report.orthogonality_residual,
         "bound": report.orthogonality_bound, "passed": report.checks["orthogonality"]},
        {"quantity": "forward_error_max_score", "value": report.forward_error_max_score,
         "bound": STANDARD_ERRORS, "passed": report.checks["forward_error_gram"]},
        {"quantity": "stage_variance_max_score", "value": max(report.stage_variance_scores, default=0.0),
         "bound": STANDARD_ERRORS, "passed": report.checks["stage_variances"]},
    ], ORTHO_COLUMNS)
    bundle.summary = {
        "order": order,
        "seed": seed,
        "n_trials": trials,
        "checks": report.checks,
        "config": json.loads(canonical_json(p.config)),
    }
    for name, t, e in zip(order, report.theory_vars, report.empirical_vars):
        print(f"stage {name}: theory {t:.6g}, empirical {e:.6g}")
    print(f"checks: {report.checks}")
    return bundle, EXIT_OK if report.passed else EXIT_CHECK


def cmd_codebook(p: ParsedConfig, args: argparse.Namespace) -> Tuple[ReportBundle, int]:
    seed = _require(p.config, "seed")
    trials = _require(p.config, "trials")
    order = list(p.order)
    # no --stage: every stage, plus the union bound on the whole decoder
    stages = [args.stage] if args.stage is not None else list(range(1, len(order) + 1))
    runs = [
        run_codebook_experiment(p.scenario, order, k, args.n, args.rate, SeedSpec(seed), trials)
        for k in stages
    ]

    bundle = ReportBundle("codebook")
    bundle.add("wer", [{
        "stage": exp.stage, "n": exp.n, "R_bits": exp.rate_bits,
        "incremental_rate_bits": exp.incremental_rate_bits, "trials": exp.trials, "wer": exp.wer,
    } for exp in runs], CODEBOOK_COLUMNS)
    bundle.summary = {
        "groups": [exp.group for exp in runs],
        "codebook_size": runs[0].codebook_size,
        "errors": [exp.errors for exp in runs],
        "union_error_bound": union_error_bound(runs),
        "seed": seed,
        "config": json.loads(canonical_json(p.config)),
    }
    for exp in runs:
        print(f"stage {exp.stage} ({exp.group}): n={exp.n} R={exp.rate_bits:g} bits "
              f"(R_i={exp.incremental_rate_bits:.6g}) wer={exp.wer:.6g}")
    if len(runs) > 1:
        print(f"union bound on the decoder's word error rate: {bundle.summary['union_error_bound']:.6g}")
    return bundle, EXIT_OK


COMMANDS: Dict[str, Callable[[ParsedConfig, argparse.Namespace], Tuple[ReportBundle, int]]] = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "codebook": cmd_codebook,
}


# ---------- Entry point ----------
def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="python -m src.cli", description="Gram-matrix calculus for jointly Gaussian channels.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("config", help="Path to a scenario JSON file, or a bundled scenario name.")
        sp.add_argument("--out-dir", default=None)
        sp.add_argument("--format", choices=FORMATS, default="both")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--trials", type=int, default=None)
        if name == "codebook":
            sp.add_argument("--stage", type=int, default=None, help="1-based stage; all stages when omitted.")
            sp.add_argument("--n", type=int, required=True)
            sp.add_argument("--rate", type=float, required=True)
    return parser


def load(args: argparse.Namespace) -> ParsedConfig:
    try:
        text = read_config_text(args.config)
    except FileNotFoundError as exc:
        raise ConfigError(str(exc)) from exc
    parsed = parse_config(text)
    if args.seed is None and args.trials is None:
        return parsed
    cfg = with_overrides(parsed.config, seed=args.seed, trials=args.trials)
    return ParsedConfig(cfg, parsed.scenario, parsed.order)


def main(argv: Optional[List[str]] = None) -> int:
    setup_logging(LOG_DIR)
    started = time.perf_counter()
    command = None
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        parsed = load(args)
        bundle, code = COMMANDS[command](parsed, args)
        outputs = parsed.config.outputs
        out_dir = args.out_dir or (outputs.dir if outputs and outputs.dir else OUT_DIR)
        prefix = outputs.prefix if outputs else ""
        for path in bundle.write(out_dir, prefix, args.format):
            print(f"wrote {path}")
    except (GramError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_INPUT
        log_json(kind="command_error", command=command, error=type(exc).__name__, detail=str(exc))
    log_json(kind="command", command=command, exit_code=code, seconds=round(time.perf_counter() - started, 3))
    return code


if __name__ == "__main__":
    sys.exit(main())
