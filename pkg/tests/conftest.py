import pytest

from kernopt import (
    Individual,
    OptimizationProblem,
    Population,
    SearchSpace,
    make_problem,
)


@pytest.fixture
def onemax2() -> OptimizationProblem:
    return make_problem("onemax-min", 2)


@pytest.fixture
def line_problem() -> OptimizationProblem:
    """1-d real problem whose objective is the coordinate itself.

    Handy for scripting exact objective values in sort and selection
    tests.
    """
    space = SearchSpace.cube(1, -100.0, 100.0)
    return OptimizationProblem(
        space, lambda ind: ind.values[0], optimum_value=-100.0, name="line"
    )


def value_pop(problem: OptimizationProblem, *values: float) -> Population:
    space = problem.space
    return Population(tuple(Individual(space, (float(v),)) for v in values))


def bits_pop(*bitstrings: str) -> Population:
    space = SearchSpace.bitstring(len(bitstrings[0]))
    return Population(tuple(Individual.from_bits(b, space) for b in bitstrings))
