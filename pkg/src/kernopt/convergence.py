"""Empirical and exact verification of convergence guarantees.

The guarantee under test: if a square kernel moves every state that is
not yet strictly eps-optimal into the strict eps-optimal set with mass
at least delta > 0, and never leaves that set once inside (absorption),
then the t-step probability of being eps-optimal is at least
1 - (1 - delta)^t, and the failure probabilities sum to at most
(1 - delta) / delta.  On enumerable spaces everything here can be
checked exactly against the transition matrix; elsewhere the checks are
sampled and explicitly non-certifying.

Success always means the *strict* inequality d(P_t) < eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .algorithms import SGoalConfig, build_kernel, uniform_population
from .errors import DegenerateProblem
from .kernels import Kernel, TransitionMatrix, exact_matrix, iterate_chain
from .spaces import OptimizationProblem, Population, best_value, optimality_gap
from .streams import RandomStream

Z_95 = 1.959963984540054  # two-sided 95% normal quantile

EXACT = "exact-enumeration"
MONTE_CARLO = "monte-carlo-min"


def wilson_interval(
    successes: int, trials: int, z: float = Z_95
) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("need at least one trial")
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2.0 * trials)) / denom
    half = (z / denom) * math.sqrt(
        phat * (1.0 - phat) / trials + z2 / (4.0 * trials * trials)
    )
    return max(0.0, center - half), min(1.0, center + half)


def total_variation(p: Sequence[float], q: Sequence[float]) -> float:
    """Total-variation distance between two finite distributions."""
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


# ---------------------------------------------------------------------------
# success curves


@dataclass(frozen=True)
class SuccessCurve:
    """Per-step empirical probability of the strict eps-optimal event."""

    eps: float
    horizon: int
    runs: int
    successes: tuple[int, ...]          # index t = 0..horizon
    ci_lo: tuple[float, ...]
    ci_hi: tuple[float, ...]

    def rate(self, t: int) -> float:
        return self.successes[t] / self.runs

    def half_width(self, t: int) -> float:
        return 0.5 * (self.ci_hi[t] - self.ci_lo[t])


def success_curve_from_gaps(
    gap_series: Sequence[Sequence[float]], eps: float
) -> SuccessCurve:
    """Fold per-run gap trajectories into a success curve for one eps.

    Counting is associative, so the series may arrive in any order.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    runs = len(gap_series)
    if runs < 1:
        raise ValueError("runs must be >= 1")
    horizon = len(gap_series[0]) - 1
    successes = [0] * (horizon + 1)
    for gaps in gap_series:
        if len(gaps) != horizon + 1:
            raise ValueError("all runs must share one horizon")
        for t, gap in enumerate(gaps):
            if gap < eps:
                successes[t] += 1
    lo, hi = zip(*(wilson_interval(s, runs) for s in successes))
    return SuccessCurve(eps, horizon, runs, tuple(successes), lo, hi)


def estimate_success_curve(
    config: SGoalConfig,
    prob: OptimizationProblem,
    eps: float,
    horizon: int,
    runs: int,
    seed: Optional[int] = None,
) -> SuccessCurve:
    """Run independent chains and count d(P_t) < eps per step.

    Each run r draws its stream from (seed, r), so the curve is
    reproducible and runs may be executed in any order.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    kernel = build_kernel(config, prob)
    master = RandomStream(config.seed if seed is None else seed)
    gap_series = []
    for r in range(runs):
        trace = iterate_chain(
            kernel,
            lambda s: uniform_population(prob.space, config.n, s),
            horizon,
            master.derive(r),
            problem=prob,
        )
        gap_series.append(trace.gaps)
    return success_curve_from_gaps(gap_series, eps)


# ---------------------------------------------------------------------------
# one-step mass into the eps-optimal set


@dataclass(frozen=True)
class DeltaEstimate:
    """Lower bound on one-step mass into the strict eps-optimal set.

    Only the exact-enumeration method certifies anything; the
    monte-carlo method reports a confidence-bounded minimum over the
    states it happened to sample.
    """

    eps: float
    delta: float
    method: str
    argmin_state: Optional[tuple] = None
    certified: bool = False


def _eps_mask(states, prob: OptimizationProblem, eps: float) -> np.ndarray:
    return np.array([optimality_gap(s, prob) < eps for s in states])


def estimate_delta(
    kernel: Kernel,
    prob: OptimizationProblem,
    eps: float,
    mode: str = EXACT,
    budget: int = 64,
    samples_per_state: int = 200,
    seed: int = 0,
) -> DeltaEstimate:
    """min over non-optimal states x of K(x, strict eps-optimal set)."""
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if mode == EXACT:
        tm = exact_matrix(kernel, prob.space, kernel.input_arity)
        inside_cols = _eps_mask(tm.col_states, prob, eps)
        outside_rows = [
            i
            for i, s in enumerate(tm.row_states)
            if optimality_gap(s, prob) >= eps
        ]
        if not outside_rows:
            raise DegenerateProblem(
                f"every size-{kernel.input_arity} state is already within eps={eps}"
            )
        into = tm.matrix[:, inside_cols].sum(axis=1)
        best = min(outside_rows, key=lambda i: into[i])
        return DeltaEstimate(
            eps=eps,
            delta=float(into[best]),
            method=EXACT,
            argmin_state=tm.row_states[best].key(),
            certified=True,
        )
    if mode != MONTE_CARLO:
        raise ValueError(f"unknown delta mode {mode!r}")
    stream = RandomStream(seed)
    worst = None
    argmin = None
    found = 0
    for j in range(budget):
        state = uniform_population(prob.space, kernel.input_arity, stream.derive(2 * j))
        if optimality_gap(state, prob) < eps:
            continue
        found += 1
        sub = stream.derive(2 * j + 1)
        hits = sum(
            optimality_gap(kernel.sample(state, sub.derive(s)), prob) < eps
            for s in range(samples_per_state)
        )
        lower, _ = wilson_interval(hits, samples_per_state)
        if worst is None or lower < worst:
            worst, argmin = lower, state.key()
    if found == 0:
        raise DegenerateProblem(
            f"no state with gap >= eps={eps} found in {budget} uniform draws"
        )
    return DeltaEstimate(eps, float(worst), MONTE_CARLO, argmin, certified=False)


# ---------------------------------------------------------------------------
# premises: absorption and elitism


@dataclass(frozen=True)
class AbsorptionReport:
    """Whether mass-one absorption of the eps-optimal set holds."""

    eps: float
    holds: bool
    mode: str
    checked: int
    min_inside_mass: float
    violations: tuple = ()


def check_absorption(
    kernel: Kernel,
    prob: OptimizationProblem,
    eps: float,
    mode: str = EXACT,
    samples: int = 2000,
    seed: int = 0,
) -> AbsorptionReport:
    """Verify K(x, eps-optimal set) = 1 for every eps-optimal x."""
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if mode == EXACT:
        tm = exact_matrix(kernel, prob.space, kernel.input_arity)
        inside_cols = _eps_mask(tm.col_states, prob, eps)
        into = tm.matrix[:, inside_cols].sum(axis=1)
        masses = []
        violations = []
        for i, s in enumerate(tm.row_states):
            if optimality_gap(s, prob) < eps:
                masses.append(float(into[i]))
                if abs(into[i] - 1.0) > 1e-12:
                    violations.append(s.key())
        if not masses:
            return AbsorptionReport(eps, True, EXACT, 0, 1.0)
        return AbsorptionReport(
            eps, not violations, EXACT, len(masses), min(masses), tuple(violations[:5])
        )
    stream = RandomStream(seed)
    checked = 0
    violations = []
    for j in range(samples):
        state = uniform_population(prob.space, kernel.input_arity, stream.derive(2 * j))
        if optimality_gap(state, prob) >= eps:
            continue
        checked += 1
        out = kernel.sample(state, stream.derive(2 * j + 1))
        if optimality_gap(out, prob) >= eps:
            violations.append((state.key(), out.key()))
    holds = not violations
    return AbsorptionReport(
        eps, holds, "sampled", checked, 1.0 if holds else 0.0, tuple(violations[:5])
    )


@dataclass(frozen=True)
class ElitismReport:
    """Sampled check that the best objective value never degrades."""

    holds: bool
    checked: int
    counterexamples: tuple = ()  # (state key, output key, best f in, best f out)


def check_elitist(
    kernel: Kernel,
    prob: OptimizationProblem,
    samples: int = 10000,
    seed: int = 0,
) -> ElitismReport:
    """Sample transitions from uniform states; flag any increase in d.

    Comparing best objective values is equivalent to comparing gaps and
    works without a known optimum, so non-square replacement kernels
    are checked the same way.
    """
    stream = RandomStream(seed)
    counterexamples = []
    for j in range(samples):
        state = uniform_population(prob.space, kernel.input_arity, stream.derive(2 * j))
        out = kernel.sample(state, stream.derive(2 * j + 1))
        f_in = best_value(state, prob)
        f_out = best_value(out, prob)
        if f_out > f_in:
            counterexamples.append((state.key(), out.key(), f_in, f_out))
            if len(counterexamples) >= 5:
                break
    return ElitismReport(not counterexamples, samples, tuple(counterexamples))


def check_bounded_from_zero(
    kernel: Kernel,
    prob: OptimizationProblem,
    eps_list: Sequence[float],
    mode: str = EXACT,
    budget: int = 64,
    samples_per_state: int = 200,
    seed: int = 0,
) -> tuple[bool, list[DeltaEstimate]]:
    """Estimate delta(eps) per eps; positive verdict needs every one > 0."""
    estimates = [
        estimate_delta(kernel, prob, eps, mode, budget, samples_per_state, seed)
        for eps in eps_list
    ]
    return all(e.delta > 0.0 for e in estimates), estimates


# ---------------------------------------------------------------------------
# the geometric bound


@dataclass(frozen=True)
class BoundVerdict:
    t: int
    bound: float
    rate: float
    ci_hi: float
    satisfied: bool


def geometric_bound(delta: float, t: int) -> float:
    """1 - (1 - delta)^t, the t-step lower bound on success probability."""
    return 1.0 - (1.0 - delta) ** t


def check_lemma1_bound(
    curve: SuccessCurve,
    delta: DeltaEstimate,
    tolerance: Optional[float] = None,
) -> list[BoundVerdict]:
    """Per-step verdicts: does the empirical curve dominate the bound?

    A step is satisfied when the upper confidence limit reaches the
    bound minus the tolerance (default: that step's CI half-width).
    The absorption premise is checked separately by ``check_absorption``
    and reported alongside in assembled reports.
    """
    if curve.eps != delta.eps:
        raise ValueError(
            f"invalid comparison: curve eps {curve.eps} vs delta eps {delta.eps}"
        )
    verdicts = []
    for t in range(curve.horizon + 1):
        bound = geometric_bound(delta.delta, t)
        tol = curve.half_width(t) if tolerance is None else tolerance
        verdicts.append(
            BoundVerdict(
                t=t,
                bound=bound,
                rate=curve.rate(t),
                ci_hi=curve.ci_hi[t],
                satisfied=curve.ci_hi[t] >= bound - tol,
            )
        )
    return verdicts


@dataclass(frozen=True)
class PartialSums:
    """Running failure-probability sums against the geometric tail."""

    values: tuple[float, ...]        # S(t) for t = 1..horizon
    half_widths: tuple[float, ...]   # accumulated CI half-widths
    reference: Optional[float]       # (1 - delta) / delta, when delta known
    dominated: Optional[bool]

    def final(self) -> float:
        return self.values[-1] if self.values else 0.0


def complete_convergence_diagnostic(
    curve: SuccessCurve, delta: Optional[DeltaEstimate] = None
) -> PartialSums:
    """S(t) = sum of failure probabilities for steps 1..t.

    Complete convergence needs the infinite sum to stay finite; under
    the geometric bound it is at most (1 - delta) / delta.  The sum
    starts at step one, matching that reference series.
    """
    values = []
    widths = []
    acc = 0.0
    acc_w = 0.0
    for t in range(1, curve.horizon + 1):
        acc += 1.0 - curve.rate(t)
        acc_w += curve.half_width(t)
        values.append(acc)
        widths.append(acc_w)
    reference = None
    dominated = None
    if delta is not None and delta.delta > 0.0:
        reference = (1.0 - delta.delta) / delta.delta
        dominated = all(
            v <= reference + w for v, w in zip(values, widths)
        )
    return PartialSums(tuple(values), tuple(widths), reference, dominated)


# ---------------------------------------------------------------------------
# exact finite verification on enumerable spaces


@dataclass(frozen=True)
class ExactBoundReport:
    """Matrix-power verification of the geometric bound, zero tolerance."""

    eps: float
    delta: float
    absorption_holds: bool
    min_inside_mass: float
    bounds: tuple[float, ...]           # t = 1..horizon
    min_success: tuple[float, ...]      # min over start states of K^t(x, set)
    uniform_success: tuple[float, ...]  # success probability from uniform start
    dominates: bool


def verify_bound_exact(
    kernel: Kernel,
    prob: OptimizationProblem,
    eps: float,
    horizon: int,
) -> ExactBoundReport:
    """Check K^t(x, eps-set) >= 1 - (1 - delta)^t directly on the matrix.

    This is the finite-space counterpart of the geometric bound's
    induction: with delta taken from the matrix itself and absorption
    holding, domination is exact, with no statistical slack.
    """
    if not kernel.is_square:
        raise ValueError("exact bound verification needs a square kernel")
    tm = exact_matrix(kernel, prob.space, kernel.input_arity)
    inside = _eps_mask(tm.col_states, prob, eps)
    if inside.all():
        raise DegenerateProblem(f"every state is within eps={eps}")
    into = tm.matrix[:, inside].sum(axis=1)
    outside_rows = ~inside  # square kernel: row and column enumerations match
    delta = float(into[outside_rows].min())
    inside_masses = into[inside]
    min_inside = float(inside_masses.min()) if inside_masses.size else 1.0
    absorption = bool(inside_masses.size == 0 or min_inside == 1.0)

    v = inside.astype(float)
    bounds = []
    min_success = []
    uniform_success = []
    n_states = tm.matrix.shape[0]
    for t in range(1, horizon + 1):
        v = tm.matrix @ v
        bounds.append(geometric_bound(delta, t))
        min_success.append(float(v.min()))
        uniform_success.append(float(v.sum() / n_states))
    dominates = all(m >= b for m, b in zip(min_success, bounds))
    return ExactBoundReport(
        eps=eps,
        delta=delta,
        absorption_holds=absorption,
        min_inside_mass=min_inside,
        bounds=tuple(bounds),
        min_success=tuple(min_success),
        uniform_success=tuple(uniform_success),
        dominates=dominates,
    )


# ---------------------------------------------------------------------------
# sampling versus the exact matrix


@dataclass(frozen=True)
class RowFit:
    state: tuple
    tv: float
    chi2: float
    p_value: float


@dataclass(frozen=True)
class GoodnessOfFit:
    samples_per_row: int
    rows: tuple[RowFit, ...]

    @property
    def max_tv(self) -> float:
        return max(r.tv for r in self.rows)

    @property
    def min_p_value(self) -> float:
        return min(r.p_value for r in self.rows)


def kernel_goodness_of_fit(
    kernel: Kernel,
    space,
    n: int,
    samples_per_row: int = 100000,
    seed: int = 0,
) -> GoodnessOfFit:
    """Compare empirical transition frequencies to every exact row."""
    tm = exact_matrix(kernel, space, n)
    master = RandomStream(seed)
    rows = []
    for i, state in enumerate(tm.row_states):
        stream = master.derive(i)
        counts = np.zeros(len(tm.col_states))
        for s in range(samples_per_row):
            out = kernel.sample(state, stream.derive(s))
            counts[tm.col_index[out.key()]] += 1
        expected_p = tm.matrix[i]
        empirical = counts / samples_per_row
        tv = total_variation(empirical, expected_p)
        support = expected_p > 0.0
        if counts[~support].sum() > 0:
            chi2, p_value = math.inf, 0.0
        elif support.sum() < 2:
            chi2, p_value = 0.0, 1.0
        else:
            chi2, p_value = stats.chisquare(
                counts[support], expected_p[support] * samples_per_row
            )
        rows.append(RowFit(state.key(), float(tv), float(chi2), float(p_value)))
    return GoodnessOfFit(samples_per_row, tuple(rows))


# ---------------------------------------------------------------------------
# assembled report


@dataclass(frozen=True)
class ConvergenceReport:
    """Everything the convergence command serializes for one experiment."""

    algorithm: str
    problem: str
    curve: SuccessCurve
    delta: Optional[DeltaEstimate]
    absorption: Optional[AbsorptionReport]
    verdicts: Optional[list[BoundVerdict]]
    partial_sums: PartialSums
    premise: str  # "ok" or an explanation of why the bound is not asserted


def convergence_report(
    algorithm: str,
    problem_name: str,
    curve: SuccessCurve,
    delta: Optional[DeltaEstimate],
    absorption: Optional[AbsorptionReport],
) -> ConvergenceReport:
    """Attach bound verdicts only when the premises actually hold."""
    premise = "ok"
    verdicts = None
    if delta is None:
        premise = "premise unknown: no exact transition mass available"
    elif delta.delta <= 0.0:
        premise = f"premise violated: delta={delta.delta:g}"
    elif absorption is not None and not absorption.holds:
        premise = "premise violated: eps-optimal set is not absorbing"
    else:
        verdicts = check_lemma1_bound(curve, delta)
    partial = complete_convergence_diagnostic(
        curve, delta if premise == "ok" else None
    )
    return ConvergenceReport(
        algorithm, problem_name, curve, delta, absorption, verdicts, partial, premise
    )
