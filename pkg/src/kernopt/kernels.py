"""Markov kernels as sampleable state transformers, plus their combinators.

A kernel maps a population of ``input_arity`` members to a random
population of ``output_arity`` members.  Three constructors build every
update mechanism in this package:

* ``deterministic``  lifts a plain function (all mass on its image),
* ``compose``        runs one kernel after another,
* ``mix``            picks one kernel by weight and applies it,
* ``join``           runs several kernels on the *same* input and
                     concatenates their outputs (a product measure).

On finite (bitstring) spaces a kernel may also expose an exact
transition mass ``K(x, {y})``.  The combinators propagate it: composition
sums over the enumerated intermediate states, mixing takes the weighted
sum, joining multiplies block marginals.  ``exact_matrix`` tabulates the
mass into a row-stochastic matrix, which is the oracle the convergence
lab checks sampling against.

Randomness discipline: a kernel owns the stream it is handed for one
invocation.  Sub-kernels get children via ``stream.derive(i)`` with
distinct indices, so join blocks are independent and every sample is a
pure function of (state, stream identity).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import OracleUnavailable
from .spaces import (
    OptimizationProblem,
    Population,
    SearchSpace,
    enumerate_states,
    optimality_gap,
)
from .streams import RandomStream

MASS_ATOL = 1e-12  # probability-measure tolerance for row sums

Sampler = Callable[[Population, RandomStream], Population]
MassFn = Callable[[Population, Population], float]


@dataclass(frozen=True, slots=True)
class Kernel:
    """A stochastic state transformer with an optional exact-mass oracle."""

    input_arity: int
    output_arity: int
    sampler: Sampler
    mass_fn: Optional[MassFn] = None
    label: str = "kernel"
    children: tuple["Kernel", ...] = ()

    def sample(self, state: Population, stream: RandomStream) -> Population:
        """Draw one successor state."""
        if len(state) != self.input_arity:
            raise ValueError(
                f"kernel {self.label!r} expects arity {self.input_arity}, "
                f"got a state of size {len(state)}"
            )
        return self.sampler(state, stream)

    def exact_mass(self, state: Population, target: Population) -> float:
        """Exact transition mass K(state, {target}) on enumerable spaces."""
        if self.mass_fn is None:
            raise OracleUnavailable(
                f"kernel {self.label!r} has no exact transition mass"
            )
        return self.mass_fn(state, target)

    @property
    def has_exact_mass(self) -> bool:
        return self.mass_fn is not None

    @property
    def is_square(self) -> bool:
        return self.input_arity == self.output_arity

    def tree(self) -> str:
        """Multi-line rendering of the combinator structure."""
        lines: list[str] = []

        def walk(k: Kernel, depth: int) -> None:
            lines.append("  " * depth + f"{k.label} [{k.input_arity}->{k.output_arity}]")
            for child in k.children:
                walk(child, depth + 1)

        walk(self, 0)
        return "\n".join(lines)

    def __repr__(self) -> str:
        return f"Kernel({self.label!r}, {self.input_arity}->{self.output_arity})"


def deterministic(
    fn: Callable[[Population], Population],
    input_arity: int,
    output_arity: int,
    label: str = "det",
) -> Kernel:
    """Kernel putting all mass on fn(state); the stream is ignored."""

    def sampler(state: Population, stream: RandomStream) -> Population:
        return fn(state)

    def mass(state: Population, target: Population) -> float:
        return 1.0 if fn(state).key() == target.key() else 0.0

    return Kernel(input_arity, output_arity, sampler, mass, label)


def identity(arity: int) -> Kernel:
    """The indicator kernel: state maps to itself with mass one."""
    return deterministic(lambda p: p, arity, arity, label=f"identity({arity})")


def compose(second: Kernel, first: Kernel) -> Kernel:
    """Right-to-left composition: ``first`` is applied, then ``second``.

    Exact mass sums first-mass times second-mass over every enumerated
    intermediate state.
    """
    if first.output_arity != second.input_arity:
        raise ValueError(
            f"invalid composition: {first.label!r} outputs arity "
            f"{first.output_arity} but {second.label!r} expects {second.input_arity}"
        )

    def sampler(state: Population, stream: RandomStream) -> Population:
        mid = first.sampler(state, stream.derive(0))
        return second.sampler(mid, stream.derive(1))

    mass = None
    if first.has_exact_mass and second.has_exact_mass:

        def mass(state: Population, target: Population) -> float:
            total = 0.0
            for mid in enumerate_states(state.space, first.output_arity):
                m1 = first.mass_fn(state, mid)
                if m1 == 0.0:
                    continue
                total += m1 * second.mass_fn(mid, target)
            return total

    return Kernel(
        first.input_arity,
        second.output_arity,
        sampler,
        mass,
        label="compose",
        children=(second, first),
    )


def pipeline(*stages: Kernel) -> Kernel:
    """Left-to-right chaining: pipeline(a, b, c) applies a, then b, then c."""
    if not stages:
        raise ValueError("pipeline needs at least one kernel")
    out = stages[0]
    for nxt in stages[1:]:
        out = compose(nxt, out)
    return out


def mix(kernels: Sequence[Kernel], weights: Sequence[float]) -> Kernel:
    """Convex combination: pick kernel i with probability weights[i], apply it.

    The mixing index is drawn before any component sampling; exactly one
    component consumes randomness per application.
    """
    if not kernels:
        raise ValueError("mix needs at least one kernel")
    if len(kernels) != len(weights):
        raise ValueError("one weight per kernel required")
    if any(w < 0 for w in weights):
        raise ValueError("invalid weights: negative entry")
    if abs(sum(weights) - 1.0) > MASS_ATOL:
        raise ValueError(f"invalid weights: sum {sum(weights)} is not 1")
    eta, ups = kernels[0].input_arity, kernels[0].output_arity
    for k in kernels:
        if (k.input_arity, k.output_arity) != (eta, ups):
            raise ValueError("mixed kernels must share input and output arities")

    weights = tuple(float(w) for w in weights)
    kernels = tuple(kernels)
    # cumulative thresholds; the final one is clamped so u < 1 always lands
    cuts = []
    acc = 0.0
    for w in weights:
        acc += w
        cuts.append(acc)
    cuts[-1] = 1.0

    def sampler(state: Population, stream: RandomStream) -> Population:
        u = stream.random()
        for i, cut in enumerate(cuts):
            if u < cut:
                return kernels[i].sampler(state, stream.derive(i))
        return kernels[-1].sampler(state, stream.derive(len(kernels) - 1))

    mass = None
    if all(k.has_exact_mass for k in kernels):

        def mass(state: Population, target: Population) -> float:
            return sum(
                w * k.mass_fn(state, target)
                for w, k in zip(weights, kernels)
                if w > 0.0
            )

    return Kernel(eta, ups, sampler, mass, label="mix", children=kernels)


def join(kernels: Sequence[Kernel]) -> Kernel:
    """Product kernel: run each component on the same input, concatenate.

    Components receive independent derived substreams, so the joint law
    is the product of the component laws; exact mass factorizes into
    block marginals.
    """
    if not kernels:
        raise ValueError("join needs at least one kernel")
    eta = kernels[0].input_arity
    for k in kernels:
        if k.input_arity != eta:
            raise ValueError(
                f"invalid join: component {k.label!r} expects arity "
                f"{k.input_arity}, others expect {eta}"
            )
    kernels = tuple(kernels)
    ups = sum(k.output_arity for k in kernels)
    offsets = []
    pos = 0
    for k in kernels:
        offsets.append(pos)
        pos += k.output_arity

    def sampler(state: Population, stream: RandomStream) -> Population:
        members: list = []
        for i, k in enumerate(kernels):
            members.extend(k.sampler(state, stream.derive(i)).members)
        return Population(tuple(members))

    mass = None
    if all(k.has_exact_mass for k in kernels):

        def mass(state: Population, target: Population) -> float:
            total = 1.0
            for k, off in zip(kernels, offsets):
                total *= k.mass_fn(state, target.block(off, k.output_arity))
                if total == 0.0:
                    return 0.0
            return total

    return Kernel(eta, ups, sampler, mass, label="join", children=kernels)


@dataclass(frozen=True, slots=True)
class MarkovChainTrace:
    """States P_0..P_T of one chain run, with per-step optimality gaps."""

    states: tuple[Population, ...]
    gaps: Optional[tuple[float, ...]] = None

    @property
    def initial(self) -> Population:
        return self.states[0]

    @property
    def horizon(self) -> int:
        return len(self.states) - 1

    def __len__(self) -> int:
        return len(self.states)


InitialState = Union[Population, Callable[[RandomStream], Population]]


def iterate_chain(
    kernel: Kernel,
    initial: InitialState,
    steps: int,
    stream: RandomStream,
    problem: Optional[OptimizationProblem] = None,
) -> MarkovChainTrace:
    """Run the chain P_{t+1} = K(P_t) for ``steps`` transitions.

    ``initial`` is either a fixed state or a sampler of the initial
    distribution.  When a problem with a known optimum is supplied, the
    trace carries d(P_t) for every step.
    """
    if not kernel.is_square:
        raise ValueError(
            f"invalid chain: kernel {kernel.label!r} has arity "
            f"{kernel.input_arity}->{kernel.output_arity}"
        )
    if steps < 0:
        raise ValueError("steps must be >= 0")
    state = initial(stream.derive(0)) if callable(initial) else initial
    states = [state]
    for t in range(1, steps + 1):
        state = kernel.sample(state, stream.derive(t))
        states.append(state)
    gaps = None
    if problem is not None and problem.optimum_value is not None:
        gaps = tuple(optimality_gap(s, problem) for s in states)
    return MarkovChainTrace(tuple(states), gaps)


@dataclass(frozen=True)
class TransitionMatrix:
    """Exact transition matrix over enumerated states (rows: from-state)."""

    matrix: np.ndarray
    row_states: tuple[Population, ...]
    col_states: tuple[Population, ...]
    row_index: dict = field(repr=False)
    col_index: dict = field(repr=False)

    def row_of(self, state: Population) -> np.ndarray:
        return self.matrix[self.row_index[state.key()]]

    def power(self, t: int) -> np.ndarray:
        """t-step transition matrix (square kernels only)."""
        if self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError("matrix powers need a square kernel")
        return np.linalg.matrix_power(self.matrix, t)


def exact_matrix(
    kernel: Kernel,
    space: SearchSpace,
    n: int,
    max_states: int = 4096,
) -> TransitionMatrix:
    """Tabulate the kernel's exact mass over all enumerable states.

    ``n`` must equal the kernel's input arity.  Every row is checked to
    sum to one within 1e-12.
    """
    if n != kernel.input_arity:
        raise ValueError(
            f"n={n} does not match kernel input arity {kernel.input_arity}"
        )
    if not kernel.has_exact_mass:
        raise OracleUnavailable(
            f"kernel {kernel.label!r} has no exact transition mass"
        )
    bits_in = space.dimension * kernel.input_arity
    bits_out = space.dimension * kernel.output_arity
    rows = enumerate_states(space, kernel.input_arity, max_bits=bits_in)
    cols = enumerate_states(space, kernel.output_arity, max_bits=bits_out)
    if len(rows) > max_states or len(cols) > max_states:
        from .errors import EnumerationTooLarge

        raise EnumerationTooLarge(
            f"{max(len(rows), len(cols))} states exceed the matrix cap of {max_states}"
        )
    matrix = np.empty((len(rows), len(cols)))
    for i, x in enumerate(rows):
        for j, y in enumerate(cols):
            matrix[i, j] = kernel.mass_fn(x, y)
        total = matrix[i].sum()
        if abs(total - 1.0) > MASS_ATOL:
            raise ValueError(
                f"row for state {x.key()} sums to {total!r}, not 1 "
                f"(kernel {kernel.label!r})"
            )
    return TransitionMatrix(
        matrix=matrix,
        row_states=tuple(rows),
        col_states=tuple(cols),
        row_index={s.key(): i for i, s in enumerate(rows)},
        col_index={s.key(): j for j, s in enumerate(cols)},
    )
