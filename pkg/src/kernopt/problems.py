"""Builtin benchmark problems with analytically known optima.

Every entry reports its exact global minimum value, which the gap
computation d(x) = f(Best(x)) - f* requires.  Real-box problems use the
customary test-function boxes; bitstring problems are defined so their
minimum is zero.
"""

from __future__ import annotations

import math
from typing import Callable

from .errors import UnknownProblem
from .spaces import Individual, OptimizationProblem, SearchSpace


def sphere(dimension: int = 5) -> OptimizationProblem:
    """f(x) = sum x_k^2 on [-5.12, 5.12]^d; minimum 0 at the origin."""
    space = SearchSpace.cube(dimension, -5.12, 5.12)

    def f(ind: Individual) -> float:
        return sum(v * v for v in ind.values)

    return OptimizationProblem(space, f, optimum_value=0.0, name="sphere")


def rosenbrock(dimension: int = 5) -> OptimizationProblem:
    """The banana valley on [-2.048, 2.048]^d; minimum 0 at all ones."""
    if dimension < 2:
        raise ValueError("rosenbrock needs dimension >= 2")
    space = SearchSpace.cube(dimension, -2.048, 2.048)

    def f(ind: Individual) -> float:
        x = ind.values
        return sum(
            100.0 * (x[k + 1] - x[k] * x[k]) ** 2 + (1.0 - x[k]) ** 2
            for k in range(dimension - 1)
        )

    return OptimizationProblem(space, f, optimum_value=0.0, name="rosenbrock")


def rastrigin(dimension: int = 5) -> OptimizationProblem:
    """10d + sum(x_k^2 - 10 cos(2 pi x_k)) on [-5.12, 5.12]^d; minimum 0."""
    space = SearchSpace.cube(dimension, -5.12, 5.12)
    two_pi = 2.0 * math.pi

    def f(ind: Individual) -> float:
        return 10.0 * dimension + sum(
            v * v - 10.0 * math.cos(two_pi * v) for v in ind.values
        )

    return OptimizationProblem(space, f, optimum_value=0.0, name="rastrigin")


def onemax_min(dimension: int = 8) -> OptimizationProblem:
    """Count of zero bits; minimum 0 at the all-ones string."""
    space = SearchSpace.bitstring(dimension)

    def f(ind: Individual) -> float:
        return float(ind.values.count(0))

    return OptimizationProblem(space, f, optimum_value=0.0, name="onemax-min")


def deceptive_trap(dimension: int = 8, block: int = 4) -> OptimizationProblem:
    """Concatenated trap blocks; minimum 0 at all ones.

    A block of kappa bits costs 0 when fully set and (ones + 1)
    otherwise, so the gradient inside a block points away from the
    optimum.  ``dimension`` must be a multiple of ``block``.
    """
    if block < 2:
        raise ValueError("trap blocks need at least 2 bits")
    if dimension % block != 0:
        raise ValueError(f"dimension {dimension} is not a multiple of block {block}")
    space = SearchSpace.bitstring(dimension)

    def f(ind: Individual) -> float:
        total = 0
        for start in range(0, dimension, block):
            ones = sum(ind.values[start : start + block])
            if ones != block:
                total += ones + 1
        return float(total)

    return OptimizationProblem(space, f, optimum_value=0.0, name="deceptive-trap")


_CATALOG: dict[str, Callable[..., OptimizationProblem]] = {
    "sphere": sphere,
    "rosenbrock": rosenbrock,
    "rastrigin": rastrigin,
    "onemax-min": onemax_min,
    "deceptive-trap": deceptive_trap,
}


def builtin_problems() -> tuple[str, ...]:
    """Ids of every problem the catalog can build."""
    return tuple(sorted(_CATALOG))


def make_problem(problem_id: str, dimension: int | None = None, **params) -> OptimizationProblem:
    """Instantiate a catalog problem by id."""
    try:
        factory = _CATALOG[problem_id]
    except KeyError:
        raise UnknownProblem(
            f"unknown problem {problem_id!r}; available: {', '.join(builtin_problems())}"
        ) from None
    if dimension is None:
        return factory(**params)
    return factory(dimension, **params)
