"""The classic stochastic search algorithms, assembled from kernels.

Each algorithm's one-step update is a single square kernel built out of
the combinators in ``kernels`` and ``structural``; ``Kernel.tree()``
prints the assembly.  The top-level loop (``run_sgoal``) just iterates
that kernel from a uniformly drawn initial population for a fixed
budget of steps.

Replacement semantics worth remembering:

* hill climbing with ``neutral=True`` keeps a variant that ties the
  incumbent; with ``neutral=False`` a tie keeps the incumbent,
* the generational GA does not mutate pairs that skip crossover; the
  steady-state GA mutates on both branches,
* differential evolution emits every candidate unconditionally; the
  classical keep-if-better survivor step is available behind the
  ``greedy`` flag as a clearly labeled extension.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .kernels import (
    Kernel,
    MarkovChainTrace,
    compose,
    identity,
    iterate_chain,
    join,
    mix,
    pipeline,
)
from .spaces import (
    Individual,
    OptimizationProblem,
    Population,
    SearchSpace,
    best_index,
    best_value,
)
from .streams import RandomStream
from .structural import (
    best_two_of_four_kernel,
    projection_kernel,
    random_scan_permutation,
    select_kernel,
    sort_two_kernel,
)
from .variation import (
    VariationOperator,
    default_crossover_kernel,
    default_mutation_kernel,
    pairwise,
)

ALGORITHM_IDS = ("hc", "phc", "gga", "ssga", "de")
#: square kernels accepted by the convergence commands purely as
#: diagnostics / negative controls
DIAGNOSTIC_IDS = ("identity", "mutation")


def replacement_keep_best(prob: OptimizationProblem) -> Kernel:
    """Pair replacement: survivor is the first slot of the sorted pair.

    The first argument wins only when strictly better; ties go to the
    second argument.  This single deterministic kernel carries both
    hill-climbing acceptance modes, depending on which side the
    incumbent is joined on.
    """
    out = pipeline(sort_two_kernel(prob), projection_kernel((1,), 2))
    return Kernel(2, 1, out.sampler, out.mass_fn, "keep-best", out.children)


def vr_kernel(variation: Kernel, replacement: Kernel, order: str = "pop-first") -> Kernel:
    """Variation-replacement step: generate candidates, then select.

    ``pop-first`` presents (state, variants) to the replacement kernel,
    ``var-first`` presents (variants, state).
    """
    if order not in ("pop-first", "var-first"):
        raise ValueError(f"order must be 'pop-first' or 'var-first', got {order!r}")
    eta = variation.input_arity
    stacked = (
        join([identity(eta), variation])
        if order == "pop-first"
        else join([variation, identity(eta)])
    )
    if replacement.input_arity != stacked.output_arity:
        raise ValueError(
            f"invalid composition: replacement expects arity "
            f"{replacement.input_arity}, variation stack yields {stacked.output_arity}"
        )
    return compose(replacement, stacked)


def hc_kernel(
    variate: Kernel, prob: OptimizationProblem, neutral: bool = False
) -> Kernel:
    """Hill climbing: variate one individual, keep the better of the two.

    ``neutral=True`` accepts variants that tie the incumbent.
    """
    if (variate.input_arity, variate.output_arity) != (1, 1):
        raise ValueError(
            f"invalid operator: hill climbing needs a 1->1 variation, got "
            f"{variate.input_arity}->{variate.output_arity}"
        )
    order = "pop-first" if neutral else "var-first"
    out = vr_kernel(variate, replacement_keep_best(prob), order)
    label = "hc-neutral" if neutral else "hc"
    return Kernel(1, 1, out.sampler, out.mass_fn, label, out.children)


def phc_kernel(
    variate: Kernel, prob: OptimizationProblem, n: int, neutral: bool = False
) -> Kernel:
    """Parallel hill climbing: one independent climber per slot."""
    if n < 1:
        raise ValueError("population size must be >= 1")
    climber = hc_kernel(variate, prob, neutral)
    out = join(
        [compose(climber, projection_kernel((i,), n)) for i in range(1, n + 1)]
    )
    return Kernel(n, n, out.sampler, out.mass_fn, f"phc({n})", out.children)


def pick_parents_kernel(n: int) -> Kernel:
    """Uniformly pick an ordered pair of distinct slots (n -> 2).

    A uniform mixture over the n(n-1) deterministic pair selections, so
    the exact mass is available on enumerable spaces.
    """
    if n < 2:
        raise ValueError("parent picking needs n >= 2")
    picks = [
        select_kernel((a, b), n)
        for a in range(1, n + 1)
        for b in range(1, n + 1)
        if b != a
    ]
    out = mix(picks, [1.0 / len(picks)] * len(picks))
    return Kernel(n, 2, out.sampler, out.mass_fn, f"pick-parents({n})", out.children)


def _pair_operators(
    prob: OptimizationProblem,
    mutate: Optional[Kernel],
    xover: Optional[Kernel],
    flip_prob: Optional[float],
    sigma: float,
) -> tuple[Kernel, Kernel]:
    space = prob.space
    if mutate is None:
        mutate = default_mutation_kernel(space, flip_prob, sigma)
    mutate_pair = pairwise(mutate) if mutate.input_arity == 1 else mutate
    if xover is None:
        xover = default_crossover_kernel(space)
    if (xover.input_arity, xover.output_arity) != (2, 2):
        raise ValueError("crossover must be a 2->2 kernel")
    if (mutate_pair.input_arity, mutate_pair.output_arity) != (2, 2):
        raise ValueError("pair mutation must be a 2->2 kernel")
    return mutate_pair, xover


def gga_kernel(
    prob: OptimizationProblem,
    n: int,
    cr: float,
    mutate: Optional[Kernel] = None,
    xover: Optional[Kernel] = None,
    flip_prob: Optional[float] = None,
    sigma: float = 0.1,
) -> Kernel:
    """Generational GA: n/2 independent pair productions.

    Each sub-kernel picks two distinct parents, and with probability
    ``cr`` emits the mutated crossover of the pair; otherwise the chosen
    parents pass through untouched (no mutation on that branch).
    """
    if n < 2 or n % 2 != 0:
        raise ValueError(f"invalid config: generational GA needs even n >= 2, got {n}")
    if not 0.0 <= cr <= 1.0:
        raise ValueError("crossover rate must lie in [0, 1]")
    mutate_pair, xover = _pair_operators(prob, mutate, xover, flip_prob, sigma)
    branch = mix([compose(mutate_pair, xover), identity(2)], [cr, 1.0 - cr])
    sub = compose(branch, pick_parents_kernel(n))
    out = join([sub] * (n // 2))
    return Kernel(n, n, out.sampler, out.mass_fn, f"gga({n})", out.children)


def ssga_kernel(
    prob: OptimizationProblem,
    n: int,
    cr: float,
    mutate: Optional[Kernel] = None,
    xover: Optional[Kernel] = None,
    flip_prob: Optional[float] = None,
    sigma: float = 0.1,
    variation_pair: Optional[Kernel] = None,
) -> Kernel:
    """Steady-state GA as permute, vary the front pair, keep the best two.

    The population is uniformly permuted so the parents sit at slots
    1..2; the variation pair kernel produces two children that are
    prepended (state grows to n+2); the best two of (children, parents)
    take the parents' slots while the remaining slots pass through.
    Unlike the generational GA, the no-crossover branch still mutates
    the parents.

    ``variation_pair`` overrides the whole 2->2 variation stage; it
    exists so callers can pin the children when testing replacement
    behavior.
    """
    if n < 2:
        raise ValueError(f"invalid config: steady-state GA needs n >= 2, got {n}")
    if not 0.0 <= cr <= 1.0:
        raise ValueError("crossover rate must lie in [0, 1]")
    if variation_pair is None:
        mutate_pair, xover = _pair_operators(prob, mutate, xover, flip_prob, sigma)
        variation_pair = mix(
            [compose(mutate_pair, xover), mutate_pair], [cr, 1.0 - cr]
        )
    if (variation_pair.input_arity, variation_pair.output_arity) != (2, 2):
        raise ValueError("variation_pair must be a 2->2 kernel")

    scan = random_scan_permutation(n)
    expand = join(
        [compose(variation_pair, projection_kernel((1, 2), n)), identity(n)]
    )
    survivors = compose(
        best_two_of_four_kernel(prob), projection_kernel((1, 2, 3, 4), n + 2)
    )
    if n > 2:
        reduce = join([survivors, projection_kernel(range(5, n + 3), n + 2)])
    else:
        reduce = join([survivors])
    out = pipeline(scan, expand, reduce)
    return Kernel(n, n, out.sampler, out.mass_fn, f"ssga({n})", out.children)


def pick_distinct_parents(n: int, i: int, stream: RandomStream) -> tuple[int, int, int]:
    """Ordered triple of distinct 0-based slots, all different from i."""
    a = stream.randint(0, n - 1)
    while a == i:
        a = stream.randint(0, n - 1)
    b = stream.randint(0, n - 1)
    while b == i or b == a:
        b = stream.randint(0, n - 1)
    c = stream.randint(0, n - 1)
    while c == i or c == a or c == b:
        c = stream.randint(0, n - 1)
    return a, b, c


def differential_mutant(
    base: tuple,
    donor_b: tuple,
    donor_c: tuple,
    target: tuple,
    f_weight: float,
    crossed: tuple,
    space: SearchSpace,
) -> tuple:
    """Candidate coordinates: base + F * (donor_b - donor_c) where crossed.

    Uncrossed coordinates come from the target vector.  The result is
    clamped to the box.
    """
    raw = (
        base[k] + f_weight * (donor_b[k] - donor_c[k]) if crossed[k] else target[k]
        for k in range(len(target))
    )
    return space.clamp(raw)


def de_kernel(
    prob: OptimizationProblem,
    n: int,
    f_weight: float = 0.5,
    cr: float = 0.9,
    greedy: bool = False,
) -> Kernel:
    """Differential evolution: one joined sub-kernel per population slot.

    Sub-kernel i draws three distinct other slots (a, b, c) and a forced
    dimension R, then builds the candidate coordinate-wise: the
    difference expression applies where a Bernoulli(cr) fires or at R,
    the current member's coordinate elsewhere.  The candidate is emitted
    unconditionally; pass ``greedy=True`` for the classical
    keep-if-better extension (not part of the faithful update).
    """
    space = prob.space
    if space.is_bitstring:
        raise ValueError("invalid space: differential evolution needs a real box")
    if n < 4:
        raise ValueError(f"invalid config: need n >= 4 for three distinct parents, got {n}")
    if not 0.0 <= cr <= 1.0:
        raise ValueError("crossover rate must lie in [0, 1]")
    if not 0.0 <= f_weight <= 2.0:
        raise ValueError("difference weight must lie in [0, 2]")
    d = space.dimension

    def make_sub(i: int) -> Kernel:
        def sampler(pop: Population, stream: RandomStream) -> Population:
            a, b, c = pick_distinct_parents(n, i, stream)
            forced = stream.randint(1, d)
            crossed = tuple(
                # the draw happens for every dimension, forced or not
                stream.bernoulli(cr) or (k + 1 == forced)
                for k in range(d)
            )
            values = differential_mutant(
                pop[a].values,
                pop[b].values,
                pop[c].values,
                pop[i].values,
                f_weight,
                crossed,
                space,
            )
            candidate = Individual(space, values)
            if greedy and prob.evaluate(candidate) > prob.evaluate(pop[i]):
                candidate = pop[i]
            return Population((candidate,))

        tag = "de-greedy" if greedy else "de"
        return Kernel(n, 1, sampler, None, label=f"{tag}-slot{i + 1}")

    out = join([make_sub(i) for i in range(n)])
    label = f"de-greedy({n})" if greedy else f"de({n})"
    return Kernel(n, n, out.sampler, out.mass_fn, label, out.children)


def uniform_population(space: SearchSpace, n: int, stream: RandomStream) -> Population:
    """n individuals drawn independently and uniformly from the space."""
    return Population(tuple(space.sample_uniform(stream) for _ in range(n)))


@dataclass(frozen=True)
class SGoalConfig:
    """Everything needed to reproduce one algorithm run."""

    algorithm: str
    n: int
    steps: int
    seed: int
    neutral: bool = False
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        known = ALGORITHM_IDS + DIAGNOSTIC_IDS
        if self.algorithm not in known:
            raise ValueError(
                f"unknown algorithm {self.algorithm!r}; pick one of {known}"
            )
        if self.n < 1:
            raise ValueError("population size n must be >= 1")
        if self.steps < 0:
            raise ValueError("iteration budget must be >= 0")
        object.__setattr__(self, "params", dict(self.params))
        unknown = set(self.params) - {
            "flip_prob",
            "sigma",
            "cr",
            "f_weight",
            "greedy",
            "variate",
        }
        if unknown:
            raise ValueError(f"unknown algorithm params: {sorted(unknown)}")


def build_kernel(config: SGoalConfig, prob: OptimizationProblem) -> Kernel:
    """Assemble the one-step kernel an algorithm config describes."""
    p = config.params
    variate_op = VariationOperator(
        name=p.get("variate", "default"),
        flip_prob=p.get("flip_prob"),
        sigma=p.get("sigma", 0.1),
    )
    if config.algorithm == "hc":
        if config.n != 1:
            raise ValueError("hill climbing uses a single-individual population (n=1)")
        return hc_kernel(variate_op.build(prob.space), prob, config.neutral)
    if config.algorithm == "phc":
        return phc_kernel(variate_op.build(prob.space), prob, config.n, config.neutral)
    if config.algorithm == "gga":
        return gga_kernel(
            prob,
            config.n,
            cr=p.get("cr", 0.7),
            flip_prob=p.get("flip_prob"),
            sigma=p.get("sigma", 0.1),
        )
    if config.algorithm == "ssga":
        return ssga_kernel(
            prob,
            config.n,
            cr=p.get("cr", 0.7),
            flip_prob=p.get("flip_prob"),
            sigma=p.get("sigma", 0.1),
        )
    if config.algorithm == "de":
        return de_kernel(
            prob,
            config.n,
            f_weight=p.get("f_weight", 0.5),
            cr=p.get("cr", 0.9),
            greedy=bool(p.get("greedy", False)),
        )
    if config.algorithm == "identity":
        return identity(config.n)
    if config.algorithm == "mutation":
        onepoint = variate_op.build(prob.space)
        if config.n == 1:
            return onepoint
        out = join(
            [
                compose(onepoint, projection_kernel((i,), config.n))
                for i in range(1, config.n + 1)
            ]
        )
        return Kernel(
            config.n, config.n, out.sampler, out.mass_fn, f"mutation({config.n})",
            out.children,
        )
    raise AssertionError(f"unhandled algorithm {config.algorithm!r}")


@dataclass(frozen=True)
class RunResult:
    """Outcome of one run: the best state seen and the full trace."""

    best: Individual
    best_f: float
    trace: MarkovChainTrace
    duration_seconds: float


def run_sgoal(config: SGoalConfig, prob: OptimizationProblem) -> RunResult:
    """Run the configured algorithm for its step budget from a uniform start.

    The reported best is the minimum of f(Best(P_t)) over the whole
    trace, which for an elitist algorithm is simply the final
    population's best.
    """
    started = time.perf_counter()
    kernel = build_kernel(config, prob)
    stream = RandomStream(config.seed)
    trace = iterate_chain(
        kernel,
        lambda s: uniform_population(prob.space, config.n, s),
        config.steps,
        stream,
        problem=prob,
    )
    bests = [best_value(state, prob) for state in trace.states]
    t_star = min(range(len(bests)), key=bests.__getitem__)
    winner = trace.states[t_star][best_index(trace.states[t_star], prob)]
    return RunResult(
        best=winner,
        best_f=bests[t_star],
        trace=trace,
        duration_seconds=time.perf_counter() - started,
    )
