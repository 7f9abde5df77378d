"""Command-line entry points: run experiments, verify kernels, check bounds.

Subcommands
    run             execute an experiment config, write run.csv / curve.csv /
                    summary.json
    convergence     success curve plus geometric-bound verdicts and the
                    complete-convergence diagnostic
    verify          elitism / absorption / delta / bounded-from-zero /
                    goodness-of-fit for a named kernel on a named problem
    list-problems   catalog of builtin problems
    list-algorithms catalog of algorithm and diagnostic kernel ids

Exit codes: 0 success, 1 runtime failure, 2 invalid config,
3 enumeration cap exceeded (rerun with --mode mc).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import convergence as lab
from .algorithms import (
    ALGORITHM_IDS,
    DIAGNOSTIC_IDS,
    SGoalConfig,
    build_kernel,
    hc_kernel,
    gga_kernel,
    phc_kernel,
    ssga_kernel,
    uniform_population,
)
from .errors import DegenerateProblem, EnumerationTooLarge, OracleUnavailable, UnknownProblem
from .kernels import Kernel, compose, identity, iterate_chain, join
from .problems import builtin_problems, make_problem
from .reports import (
    ReportBundle,
    summary_payload,
    verdicts_payload,
    write_curve_csv,
    write_run_csv,
    write_summary,
)
from .spaces import best_value
from .streams import RandomStream
from .structural import projection_kernel
from .variation import bit_flip_kernel, default_mutation_kernel, single_bit_flip_kernel

VERIFY_KERNEL_IDS = (
    "hc",
    "hc-single-flip",
    "phc",
    "gga",
    "ssga",
    "identity",
    "mutation",
    "single-bit-flip",
)

_ALGO_BLURBS = {
    "hc": "hill climbing (n=1); keep the better of incumbent and variant",
    "phc": "parallel hill climbing; one independent climber per slot",
    "gga": "generational GA; n/2 pair productions, no mutation without crossover",
    "ssga": "steady-state GA; permute, vary front pair, keep best two of four",
    "de": "differential evolution; joined per-slot difference candidates",
    "identity": "diagnostic: state never moves",
    "mutation": "diagnostic: pure per-slot mutation, no selection",
}


class ConfigError(Exception):
    """Invalid experiment configuration (exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    problem_id: str
    dimension: Optional[int]
    problem_params: dict
    sgoal: SGoalConfig
    eps: tuple[float, ...]
    runs: int
    seed: int
    out_dir: Path

    def echo(self) -> dict:
        """Fully resolved config for the self-describing summary."""
        return {
            "problem": {
                "id": self.problem_id,
                "dimension": self.dimension,
                "params": dict(self.problem_params),
            },
            "algorithm": {
                "id": self.sgoal.algorithm,
                "n": self.sgoal.n,
                "T": self.sgoal.steps,
                "neutral": self.sgoal.neutral,
                "params": dict(self.sgoal.params),
            },
            "eps": list(self.eps),
            "runs": self.runs,
            "seed": self.seed,
            "out_dir": str(self.out_dir),
        }


def _section(raw: dict, key: str) -> dict:
    value = raw.get(key)
    if not isinstance(value, dict):
        raise ConfigError(f"config key {key!r} must be an object")
    return value


def _field(section: dict, path: str, key: str, required: bool = True, default=None):
    if key not in section:
        if required:
            raise ConfigError(f"missing config key {path}.{key}" if path else f"missing config key {key}")
        return default
    return section[key]


def load_experiment_config(
    path: Path,
    seed_override: Optional[int] = None,
    runs_override: Optional[int] = None,
    out_override: Optional[str] = None,
) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}"
        ) from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")

    problem = _section(raw, "problem")
    algorithm = _section(raw, "algorithm")
    problem_id = _field(problem, "problem", "id")
    dimension = _field(problem, "problem", "dimension", required=False)
    problem_params = _field(problem, "problem", "params", required=False, default={})

    seed = seed_override if seed_override is not None else _field(raw, "", "seed")
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer (and is mandatory)")
    runs = runs_override if runs_override is not None else _field(raw, "", "runs")
    if not isinstance(runs, int) or runs < 1:
        raise ConfigError(f"runs must be an integer >= 1, got {runs!r}")

    eps_raw = _field(raw, "", "eps")
    eps_values = eps_raw if isinstance(eps_raw, list) else [eps_raw]
    if not eps_values:
        raise ConfigError("eps list must not be empty")
    for e in eps_values:
        if not isinstance(e, (int, float)) or e <= 0:
            raise ConfigError(f"eps entries must be positive numbers, got {e!r}")

    out_dir = out_override if out_override is not None else _field(raw, "", "out_dir")

    try:
        sgoal = SGoalConfig(
            algorithm=_field(algorithm, "algorithm", "id"),
            n=_field(algorithm, "algorithm", "n"),
            steps=_field(algorithm, "algorithm", "T"),
            seed=seed,
            neutral=bool(_field(algorithm, "algorithm", "neutral", required=False, default=False)),
            params=_field(algorithm, "algorithm", "params", required=False, default={}),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"algorithm section: {exc}") from exc

    return ExperimentConfig(
        problem_id=problem_id,
        dimension=dimension,
        problem_params=dict(problem_params),
        sgoal=sgoal,
        eps=tuple(float(e) for e in eps_values),
        runs=runs,
        seed=seed,
        out_dir=Path(out_dir),
    )


# ---------------------------------------------------------------------------
# experiment execution shared by run and convergence


def _build(cfg: ExperimentConfig):
    try:
        problem = make_problem(cfg.problem_id, cfg.dimension, **cfg.problem_params)
    except UnknownProblem as exc:
        raise ConfigError(str(exc)) from exc
    try:
        kernel = build_kernel(cfg.sgoal, problem)
    except ValueError as exc:
        raise ConfigError(f"algorithm section: {exc}") from exc
    return problem, kernel


def _simulate(cfg: ExperimentConfig, problem, kernel):
    """All runs' gap series and best-so-far series, reproducibly seeded."""
    master = RandomStream(cfg.seed)
    gap_series = []
    best_series = []
    for r in range(cfg.runs):
        trace = iterate_chain(
            kernel,
            lambda s: uniform_population(problem.space, cfg.sgoal.n, s),
            cfg.sgoal.steps,
            master.derive(r),
            problem=problem,
        )
        gap_series.append(trace.gaps)
        best_sofar = []
        acc = None
        for state in trace.states:
            f = best_value(state, problem)
            acc = f if acc is None or f < acc else acc
            best_sofar.append(acc)
        best_series.append(tuple(best_sofar))
    return gap_series, best_series


def _exact_premises(kernel, problem, eps):
    """Exact delta and absorption when the space allows it, else None."""
    try:
        delta = lab.estimate_delta(kernel, problem, eps, mode=lab.EXACT)
        absorption = lab.check_absorption(kernel, problem, eps, mode=lab.EXACT)
        return delta, absorption
    except DegenerateProblem:
        # everything already eps-optimal: the bound is vacuous and holds
        delta = lab.DeltaEstimate(eps, 1.0, lab.EXACT, None, certified=True)
        absorption = lab.check_absorption(kernel, problem, eps, mode=lab.EXACT)
        return delta, absorption
    except (OracleUnavailable, EnumerationTooLarge):
        return None, None


def cmd_run(cfg: ExperimentConfig) -> ReportBundle:
    started = time.perf_counter()
    problem, kernel = _build(cfg)
    gap_series, best_series = _simulate(cfg, problem, kernel)

    rows = []
    for r, (gaps, bests) in enumerate(zip(gap_series, best_series)):
        for t, (gap, best_f) in enumerate(zip(gaps, bests)):
            rows.append((r, t, gap, best_f))

    eps0 = cfg.eps[0]
    curve = lab.success_curve_from_gaps(gap_series, eps0)
    delta, absorption = _exact_premises(kernel, problem, eps0)
    report = lab.convergence_report(
        cfg.sgoal.algorithm, problem.name, curve, delta, absorption
    )

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    run_csv = cfg.out_dir / "run.csv"
    curve_csv = cfg.out_dir / "curve.csv"
    summary = cfg.out_dir / "summary.json"
    write_run_csv(run_csv, rows)
    bound_value = delta.delta if report.premise == "ok" and delta else None
    write_curve_csv(curve_csv, curve, bound_value)
    write_summary(summary, summary_payload(cfg.echo(), delta, verdicts_payload(report)))
    elapsed = time.perf_counter() - started
    print(f"wrote {run_csv}, {curve_csv}, {summary} ({elapsed:.2f}s)")
    return ReportBundle(cfg.out_dir, run_csv, curve_csv, summary)


def cmd_convergence(cfg: ExperimentConfig) -> ReportBundle:
    started = time.perf_counter()
    problem, kernel = _build(cfg)
    gap_series, _ = _simulate(cfg, problem, kernel)
    eps0 = cfg.eps[0]
    curve = lab.success_curve_from_gaps(gap_series, eps0)
    delta, absorption = _exact_premises(kernel, problem, eps0)
    report = lab.convergence_report(
        cfg.sgoal.algorithm, problem.name, curve, delta, absorption
    )

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    curve_csv = cfg.out_dir / "curve.csv"
    summary = cfg.out_dir / "summary.json"
    bound_value = delta.delta if report.premise == "ok" and delta else None
    write_curve_csv(curve_csv, curve, bound_value)
    write_summary(summary, summary_payload(cfg.echo(), delta, verdicts_payload(report)))
    elapsed = time.perf_counter() - started

    print(f"premise: {report.premise}")
    if report.verdicts is not None:
        satisfied = sum(v.satisfied for v in report.verdicts)
        print(f"bound verdicts: {satisfied}/{len(report.verdicts)} steps satisfied")
    if report.partial_sums.reference is not None:
        print(
            f"partial sums: S({curve.horizon}) = {report.partial_sums.final():.4f}"
            f" vs reference {report.partial_sums.reference:.4f}"
        )
    print(f"wrote {curve_csv}, {summary} ({elapsed:.2f}s)")
    return ReportBundle(cfg.out_dir, None, curve_csv, summary)


# ---------------------------------------------------------------------------
# verify


def build_named_kernel(
    kernel_id: str,
    problem,
    n: int,
    flip_p: Optional[float],
    neutral: bool,
) -> Kernel:
    space = problem.space
    if kernel_id == "identity":
        return identity(n)
    if kernel_id == "single-bit-flip":
        return single_bit_flip_kernel(space)
    if kernel_id == "mutation":
        point = (
            bit_flip_kernel(space, flip_p)
            if flip_p is not None and space.is_bitstring
            else default_mutation_kernel(space)
        )
        if n == 1:
            return point
        return join(
            [compose(point, projection_kernel((i,), n)) for i in range(1, n + 1)]
        )
    if kernel_id == "hc":
        variate = (
            bit_flip_kernel(space, flip_p)
            if flip_p is not None and space.is_bitstring
            else default_mutation_kernel(space)
        )
        return hc_kernel(variate, problem, neutral)
    if kernel_id == "hc-single-flip":
        return hc_kernel(single_bit_flip_kernel(space), problem, neutral)
    if kernel_id == "phc":
        variate = (
            bit_flip_kernel(space, flip_p)
            if flip_p is not None and space.is_bitstring
            else default_mutation_kernel(space)
        )
        return phc_kernel(variate, problem, n, neutral)
    if kernel_id == "gga":
        return gga_kernel(problem, n, cr=0.7, flip_prob=flip_p)
    if kernel_id == "ssga":
        return ssga_kernel(problem, n, cr=0.7, flip_prob=flip_p)
    raise ConfigError(
        f"unknown kernel id {kernel_id!r}; available: {', '.join(VERIFY_KERNEL_IDS)}"
    )


def cmd_verify(args) -> int:
    try:
        problem = make_problem(args.problem, args.dimension)
    except UnknownProblem as exc:
        raise ConfigError(str(exc)) from exc
    kernel = build_named_kernel(
        args.kernel, problem, args.n, args.flip_p, args.neutral
    )
    eps_list = args.eps or [1.0]
    exact = args.mode == "exact"
    mode = lab.EXACT if exact else lab.MONTE_CARLO

    results: dict = {
        "kernel": args.kernel,
        "problem": problem.name,
        "dimension": problem.space.dimension,
        "n": kernel.input_arity,
        "mode": args.mode,
    }

    elitism = lab.check_elitist(kernel, problem, samples=args.samples, seed=args.seed)
    results["elitist"] = elitism.holds
    print(f"elitist: {str(elitism.holds).lower()} ({elitism.checked} transitions)")
    if not elitism.holds:
        state, out, f_in, f_out = elitism.counterexamples[0]
        print(f"  counterexample: {state} -> {out} (best f {f_in:g} -> {f_out:g})")
        results["counterexample"] = {
            "state": [list(v) for v in state],
            "output": [list(v) for v in out],
            "best_f_in": f_in,
            "best_f_out": f_out,
        }

    per_eps = []
    for eps in eps_list:
        try:
            delta = lab.estimate_delta(kernel, problem, eps, mode=mode, seed=args.seed)
        except DegenerateProblem as exc:
            print(f"eps={eps:g}: degenerate ({exc})")
            per_eps.append({"eps": eps, "degenerate": True})
            continue
        absorption = (
            lab.check_absorption(kernel, problem, eps, mode=mode, seed=args.seed)
            if kernel.is_square
            else None
        )
        line = f"eps={eps:g}: delta={delta.delta:g} [{delta.method}]"
        if absorption is not None:
            line += f", absorption={str(absorption.holds).lower()}"
        print(line)
        per_eps.append(
            {
                "eps": eps,
                "delta": delta.delta,
                "method": delta.method,
                "absorption": absorption.holds if absorption else None,
            }
        )
    results["per_eps"] = per_eps

    deltas = [e.get("delta") for e in per_eps if "delta" in e]
    bounded = bool(deltas) and all(d > 0 for d in deltas)
    results["bounded_from_zero"] = bounded
    print(f"bounded-from-zero: {str(bounded).lower()} over eps={eps_list}")

    if exact and kernel.has_exact_mass:
        fit = lab.kernel_goodness_of_fit(
            kernel, problem.space, kernel.input_arity,
            samples_per_row=args.fit_samples, seed=args.seed,
        )
        results["goodness_of_fit"] = {
            "max_tv": fit.max_tv,
            "min_p_value": fit.min_p_value,
            "samples_per_row": fit.samples_per_row,
        }
        print(
            f"goodness-of-fit: max TV {fit.max_tv:.4f} over {len(fit.rows)} rows "
            f"at {fit.samples_per_row} samples/row"
        )
    elif exact:
        print("goodness-of-fit: skipped (kernel has no exact mass)")

    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "verify.json"
        with open(path, "w") as fh:
            fh.write(json.dumps(results, indent=2, sort_keys=True))
            fh.write("\n")
        print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_config_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", required=True, type=Path, help="experiment config (JSON)")
    sub.add_argument("--seed", type=int, default=None, help="override the config seed")
    sub.add_argument("--runs", type=int, default=None, help="override the run count")
    sub.add_argument("--out", default=None, help="override the output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kernopt",
        description="stochastic global optimization with composable Markov kernels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute an experiment and write reports")
    _add_config_flags(run)

    conv = sub.add_parser("convergence", help="success curve and bound verdicts")
    _add_config_flags(conv)

    verify = sub.add_parser("verify", help="kernel property checks on a problem")
    verify.add_argument("kernel", choices=VERIFY_KERNEL_IDS)
    verify.add_argument("problem", help="builtin problem id")
    verify.add_argument("--dimension", type=int, default=2)
    verify.add_argument("--n", type=int, default=1, help="population arity")
    verify.add_argument("--flip-p", type=float, default=None, dest="flip_p")
    verify.add_argument("--neutral", action="store_true")
    verify.add_argument("--eps", type=float, action="append", default=None)
    verify.add_argument("--samples", type=int, default=10000, help="elitism transitions")
    verify.add_argument("--fit-samples", type=int, default=20000, dest="fit_samples")
    verify.add_argument("--mode", choices=("exact", "mc"), default="exact")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--out", default=None)

    sub.add_parser("list-problems", help="builtin problem catalog")
    sub.add_parser("list-algorithms", help="algorithm and diagnostic ids")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list-problems":
            for name in builtin_problems():
                print(name)
            return 0
        if args.command == "list-algorithms":
            for name in ALGORITHM_IDS + DIAGNOSTIC_IDS:
                print(f"{name}: {_ALGO_BLURBS[name]}")
            return 0
        if args.command == "verify":
            return cmd_verify(args)
        cfg = load_experiment_config(args.config, args.seed, args.runs, args.out)
        if args.command == "run":
            cmd_run(cfg)
        else:
            cmd_convergence(cfg)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except EnumerationTooLarge as exc:
        print(
            f"enumeration cap exceeded: {exc}\n"
            "hint: rerun with --mode mc for sampled (non-certifying) checks",
            file=sys.stderr,
        )
        return 3
    except Exception as exc:  # runtime failure contract: exit 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
