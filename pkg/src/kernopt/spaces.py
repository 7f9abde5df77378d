"""Search spaces, objective functions, populations and the optimality gap.

A state of a population-based search is an ordered tuple of individuals.
Everything in this module is immutable after construction and safe to
share between concurrently executing runs; all operations are pure.

Two space kinds are supported: ``real-box`` (an axis-aligned box in R^d)
and ``bitstring`` (fixed-length 0/1 vectors).  Problems are minimization
only; wrap a maximization objective with negation before constructing
the problem.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Optional

from .errors import EnumerationTooLarge, GapUnavailable
from .streams import RandomStream

REAL_BOX = "real-box"
BITSTRING = "bitstring"

#: default ceiling on dimension * population_size when enumerating bitstring
#: population states; 20 total bits is about a million states
DEFAULT_ENUMERATION_BITS = 20


@dataclass(frozen=True, slots=True)
class SearchSpace:
    """A feasible region: a real box or the set of fixed-length bitstrings."""

    kind: str
    dimension: int
    bounds: Optional[tuple[tuple[float, float], ...]] = None

    def __post_init__(self):
        if self.kind not in (REAL_BOX, BITSTRING):
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.kind == REAL_BOX:
            if self.bounds is None or len(self.bounds) != self.dimension:
                raise ValueError("real-box space needs one (lo, hi) pair per dimension")
            for lo, hi in self.bounds:
                if not lo < hi:
                    raise ValueError(f"invalid bound pair ({lo}, {hi}): need lo < hi")
        elif self.bounds is not None:
            raise ValueError("bitstring space takes no bounds")

    @staticmethod
    def bitstring(length: int) -> "SearchSpace":
        return SearchSpace(BITSTRING, length)

    @staticmethod
    def box(bounds: Iterable[tuple[float, float]]) -> "SearchSpace":
        bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        return SearchSpace(REAL_BOX, len(bounds), bounds)

    @staticmethod
    def cube(dimension: int, low: float, high: float) -> "SearchSpace":
        return SearchSpace.box(((low, high),) * dimension)

    @property
    def is_bitstring(self) -> bool:
        return self.kind == BITSTRING

    def contains(self, values: tuple) -> bool:
        if len(values) != self.dimension:
            return False
        if self.is_bitstring:
            return all(v in (0, 1) for v in values)
        return all(lo <= v <= hi for v, (lo, hi) in zip(values, self.bounds))

    def clamp(self, values: Iterable[float]) -> tuple[float, ...]:
        """Project real coordinates onto the box, one axis at a time."""
        if self.is_bitstring:
            raise ValueError("clamp is only defined for real-box spaces")
        return tuple(
            lo if v < lo else hi if v > hi else v
            for v, (lo, hi) in zip(values, self.bounds)
        )

    def sample_uniform(self, stream: RandomStream) -> "Individual":
        """One individual drawn uniformly from the space."""
        if self.is_bitstring:
            values = tuple(int(stream.bernoulli(0.5)) for _ in range(self.dimension))
        else:
            values = tuple(
                lo + (hi - lo) * stream.random() for lo, hi in self.bounds
            )
        return Individual(self, values)

    def enumerate_individuals(self) -> list["Individual"]:
        """All bitstring individuals in lexicographic order."""
        if not self.is_bitstring:
            raise EnumerationTooLarge("real-box spaces cannot be enumerated")
        return [
            Individual(self, bits)
            for bits in itertools.product((0, 1), repeat=self.dimension)
        ]


@dataclass(frozen=True, slots=True)
class Individual:
    """A point of the search space: a coordinate tuple tied to its space."""

    space: SearchSpace
    values: tuple

    def __post_init__(self):
        if len(self.values) != self.space.dimension:
            raise ValueError(
                f"expected {self.space.dimension} coordinates, got {len(self.values)}"
            )
        if self.space.is_bitstring:
            if any(v not in (0, 1) for v in self.values):
                raise ValueError("bitstring coordinates must be 0 or 1")
        else:
            for v, (lo, hi) in zip(self.values, self.space.bounds):
                if not lo <= v <= hi:
                    raise ValueError(f"coordinate {v} outside bound [{lo}, {hi}]")

    @staticmethod
    def from_bits(bits: str, space: Optional[SearchSpace] = None) -> "Individual":
        if space is None:
            space = SearchSpace.bitstring(len(bits))
        return Individual(space, tuple(int(b) for b in bits))

    @property
    def bits(self) -> str:
        """The coordinates rendered as a 0/1 string (bitstring spaces)."""
        if not self.space.is_bitstring:
            raise ValueError("bits only makes sense for bitstring individuals")
        return "".join(str(v) for v in self.values)

    def __getitem__(self, k: int):
        return self.values[k]

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, slots=True)
class Population:
    """An ordered, fixed-length tuple of individuals over one space."""

    members: tuple[Individual, ...]

    def __post_init__(self):
        if not self.members:
            raise ValueError("population must hold at least one individual")
        space = self.members[0].space
        for m in self.members:
            if m.space is not space and m.space != space:
                raise ValueError("all members must share one search space")

    @staticmethod
    def of(*members: Individual) -> "Population":
        return Population(tuple(members))

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def space(self) -> SearchSpace:
        return self.members[0].space

    def key(self) -> tuple:
        """Hashable identity for exact-mass lookups and matrix indexing."""
        return tuple(m.values for m in self.members)

    def block(self, start: int, length: int) -> "Population":
        """Contiguous sub-population (0-based start)."""
        return Population(self.members[start : start + length])

    def __getitem__(self, i: int) -> Individual:
        return self.members[i]

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


class EpsClass(Enum):
    """Position of a state relative to the epsilon-optimal sets."""

    STRICT_OPTIMAL = "strict-optimal"  # gap <  eps
    BOUNDARY = "boundary"              # gap == eps
    OUTSIDE = "outside"                # gap >  eps


@dataclass(frozen=True, slots=True)
class OptimizationProblem:
    """A search space, a deterministic objective, and (optionally) its optimum.

    The objective is evaluated through ``evaluate`` so that a known
    optimum value can be cross-checked opportunistically: no individual
    may ever score strictly below it.
    """

    space: SearchSpace
    objective: Callable[[Individual], float]
    optimum_value: Optional[float] = None
    name: str = field(default="custom", compare=False)

    def evaluate(self, individual: Individual) -> float:
        value = self.objective(individual)
        if self.optimum_value is not None and value < self.optimum_value:
            raise ValueError(
                f"objective returned {value}, below the declared optimum "
                f"{self.optimum_value} (problem {self.name!r})"
            )
        return value


def best_index(pop: Population, prob: OptimizationProblem) -> int:
    """0-based position of the best member; ties go to the earliest one."""
    best = 0
    best_f = prob.evaluate(pop[0])
    for i in range(1, len(pop)):
        f = prob.evaluate(pop[i])
        if f < best_f:
            best, best_f = i, f
    return best


def best_value(pop: Population, prob: OptimizationProblem) -> float:
    """Objective value of the best member."""
    return min(prob.evaluate(m) for m in pop)


def optimality_gap(pop: Population, prob: OptimizationProblem) -> float:
    """Best member's objective excess over the known optimum (>= 0)."""
    if prob.optimum_value is None:
        raise GapUnavailable(
            f"gap unavailable: problem {prob.name!r} has no known optimum value"
        )
    return best_value(pop, prob) - prob.optimum_value


def classify_eps(pop: Population, prob: OptimizationProblem, eps: float) -> EpsClass:
    """Classify a state against eps using the exact gap comparison."""
    if eps <= 0:
        raise ValueError("eps must be > 0")
    gap = optimality_gap(pop, prob)
    if gap < eps:
        return EpsClass.STRICT_OPTIMAL
    if gap == eps:
        return EpsClass.BOUNDARY
    return EpsClass.OUTSIDE


def enumerate_states(
    space: SearchSpace, n: int, max_bits: int = DEFAULT_ENUMERATION_BITS
) -> list[Population]:
    """All population states of size n, lexicographically, each exactly once.

    Only bitstring spaces are enumerable, and only while
    ``dimension * n`` stays within ``max_bits``.
    """
    if n < 1:
        raise ValueError("population size must be >= 1")
    if not space.is_bitstring:
        raise EnumerationTooLarge("only bitstring spaces can be enumerated")
    total_bits = space.dimension * n
    if total_bits > max_bits:
        raise EnumerationTooLarge(
            f"{total_bits} total bits exceed the enumeration cap of {max_bits}"
        )
    individuals = space.enumerate_individuals()
    return [
        Population(combo) for combo in itertools.product(individuals, repeat=n)
    ]
