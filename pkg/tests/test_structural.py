import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import bits_pop, value_pop
from kernopt import (
    Individual,
    Population,
    RandomStream,
    SearchSpace,
    best_two_of_four_kernel,
    bubble_pass_kernel,
    exact_matrix,
    full_sort_kernel,
    identity,
    make_problem,
    permutation_kernel,
    pipeline,
    projection_kernel,
    random_scan_permutation,
    sort_two_kernel,
    swap_kernel,
    sweep_kernel,
)

STREAM = RandomStream(0)


def letters_pop(problem, *values):
    return value_pop(problem, *values)


def f_sequence(problem, pop):
    return [problem.evaluate(m) for m in pop]


# -- swap ----------------------------------------------------------------------

def test_swap(line_problem):
    k = swap_kernel()
    pop = value_pop(line_problem, 1, 2)
    assert f_sequence(line_problem, k.sample(pop, STREAM)) == [2, 1]
    assert k.exact_mass(pop, value_pop(line_problem, 2, 1)) == 1.0


def test_swap_is_involution(onemax2):
    space = SearchSpace.bitstring(1)
    twice = pipeline(swap_kernel(), swap_kernel())
    m = exact_matrix(twice, space, 2)
    assert np.array_equal(m.matrix, np.eye(4))


# -- projection ----------------------------------------------------------------

def test_projection_selects_in_order(line_problem):
    k = projection_kernel((2, 3), 4)
    pop = value_pop(line_problem, 10, 20, 30, 40)
    assert f_sequence(line_problem, k.sample(pop, STREAM)) == [20, 30]


def test_projection_full_range_is_identity(line_problem):
    k = projection_kernel((1, 2, 3), 3)
    pop = value_pop(line_problem, 5, 6, 7)
    assert k.sample(pop, STREAM).key() == pop.key()


def test_projection_single(line_problem):
    k = projection_kernel((1,), 2)
    pop = value_pop(line_problem, 8, 9)
    assert f_sequence(line_problem, k.sample(pop, STREAM)) == [8]


def test_projection_validation():
    with pytest.raises(ValueError):
        projection_kernel((0, 1), 3)
    with pytest.raises(ValueError):
        projection_kernel((2, 2), 3)
    with pytest.raises(ValueError):
        projection_kernel((3, 1), 3)
    with pytest.raises(ValueError):
        projection_kernel((1, 4), 3)


# -- permutations ----------------------------------------------------------------

def test_permutation_two_is_swap():
    space = SearchSpace.bitstring(1)
    m1 = exact_matrix(permutation_kernel((2, 1)), space, 2).matrix
    m2 = exact_matrix(swap_kernel(), space, 2).matrix
    assert np.array_equal(m1, m2)


def test_permutation_identity(line_problem):
    pop = value_pop(line_problem, 1, 2, 3)
    k = permutation_kernel((1, 2, 3))
    assert k.sample(pop, STREAM).key() == pop.key()


def test_permutation_rearranges(line_problem):
    pop = value_pop(line_problem, 1, 2, 3)  # (a, b, c)
    k = permutation_kernel((3, 1, 2))
    assert f_sequence(line_problem, k.sample(pop, STREAM)) == [3, 1, 2]


def test_permutation_validation():
    with pytest.raises(ValueError):
        permutation_kernel((1, 1, 2))
    with pytest.raises(ValueError):
        permutation_kernel((1, 3))


def test_permutation_inverse_composes_to_identity():
    space = SearchSpace.bitstring(1)
    sigma = (3, 1, 2)
    inverse = (2, 3, 1)
    both = pipeline(permutation_kernel(inverse), permutation_kernel(sigma))
    m = exact_matrix(both, space, 3)
    assert np.array_equal(m.matrix, np.eye(8))


def test_random_scan_n1_is_identity():
    space = SearchSpace.bitstring(2)
    m = exact_matrix(random_scan_permutation(1), space, 1).matrix
    assert np.array_equal(m, np.eye(4))


def test_random_scan_mass_on_distinct_members(line_problem):
    k = random_scan_permutation(3)
    pop = value_pop(line_problem, 1, 2, 3)
    for ordering in itertools.permutations([1.0, 2.0, 3.0]):
        assert k.exact_mass(pop, value_pop(line_problem, *ordering)) == pytest.approx(
            1 / 6
        )


def test_random_scan_mass_with_repeats(line_problem):
    k = random_scan_permutation(3)
    pop = value_pop(line_problem, 1, 1, 2)
    # two of the six orderings produce each distinct arrangement
    assert k.exact_mass(pop, value_pop(line_problem, 1, 1, 2)) == pytest.approx(2 / 6)
    assert k.exact_mass(pop, value_pop(line_problem, 2, 1, 1)) == pytest.approx(2 / 6)


def test_random_scan_preserves_multiset(line_problem):
    k = random_scan_permutation(4)
    pop = value_pop(line_problem, 4, 7, 7, 1)
    stream = RandomStream(5)
    for i in range(300):
        out = k.sample(pop, stream.derive(i))
        assert sorted(m.values for m in out) == sorted(m.values for m in pop)


def test_random_scan_matrix_is_stochastic():
    space = SearchSpace.bitstring(1)
    tm = exact_matrix(random_scan_permutation(3), space, 3)
    assert np.max(np.abs(tm.matrix.sum(axis=1) - 1.0)) <= 1e-12


# -- sort-two --------------------------------------------------------------------

def test_sort_two(line_problem):
    k = sort_two_kernel(line_problem)
    assert f_sequence(line_problem, k.sample(value_pop(line_problem, 1, 2), STREAM)) == [1, 2]
    assert f_sequence(line_problem, k.sample(value_pop(line_problem, 2, 1), STREAM)) == [1, 2]


def test_sort_two_swaps_ties(line_problem):
    # the equal case takes the swap branch: member identity flips
    space = line_problem.space
    a = Individual(space, (1.0,))
    b = Individual(space, (1.0,))
    out = sort_two_kernel(line_problem).sample(Population((a, b)), STREAM)
    assert out[0] is b and out[1] is a


def _wide_line():
    from kernopt import OptimizationProblem

    space = SearchSpace.cube(1, -100.0, 100.0)
    return OptimizationProblem(space, lambda ind: abs(ind.values[0]), optimum_value=0.0)


WIDE = _wide_line()


@given(st.tuples(st.integers(-9, 9), st.integers(-9, 9)))
def test_sort_two_never_worsens_first_slot(pair):
    pop = Population(tuple(Individual(WIDE.space, (float(v),)) for v in pair))
    out = sort_two_kernel(WIDE).sample(pop, STREAM)
    assert WIDE.evaluate(out[0]) <= WIDE.evaluate(pop[0])


# -- comparator passes ------------------------------------------------------------

def test_bubble_pass_examples(line_problem):
    pop = value_pop(line_problem, 2, 1, 0)
    w1 = bubble_pass_kernel(3, 1, line_problem)
    w2 = bubble_pass_kernel(3, 2, line_problem)
    assert f_sequence(line_problem, w1.sample(pop, STREAM)) == [1, 2, 0]
    assert f_sequence(line_problem, w2.sample(pop, STREAM)) == [2, 0, 1]


def test_bubble_pass_idempotent_on_strict_pairs(line_problem):
    w = bubble_pass_kernel(4, 2, line_problem)
    pop = value_pop(line_problem, 3, 5, 1, 7)
    once = w.sample(pop, STREAM)
    twice = w.sample(once, STREAM)
    assert once.key() == twice.key()


def test_bubble_pass_validation(line_problem):
    with pytest.raises(ValueError):
        bubble_pass_kernel(3, 0, line_problem)
    with pytest.raises(ValueError):
        bubble_pass_kernel(3, 3, line_problem)


def test_sweep_carries_max_to_tail(line_problem):
    t = sweep_kernel(4, 3, line_problem)
    out = t.sample(value_pop(line_problem, 9, 2, 8, 1), STREAM)
    assert f_sequence(line_problem, out)[-1] == 9


# -- full sort ---------------------------------------------------------------------

def test_full_sort_examples(line_problem):
    s = full_sort_kernel(3, line_problem)
    assert f_sequence(line_problem, s.sample(value_pop(line_problem, 3, 2, 1), STREAM)) == [1, 2, 3]
    sorted_pop = value_pop(line_problem, 1, 2, 3)
    assert s.sample(sorted_pop, STREAM).key() == sorted_pop.key()


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=2, max_size=8))
def test_full_sort_sorts_and_conserves(values):
    pop = Population(tuple(Individual(WIDE.space, (float(v),)) for v in values))
    out = full_sort_kernel(len(values), WIDE).sample(pop, STREAM)
    fs = [WIDE.evaluate(m) for m in out]
    assert fs == sorted(fs)
    assert sorted(m.values for m in out) == sorted(m.values for m in pop)


def test_full_sort_with_ties(onemax2):
    pop = bits_pop("01", "10", "11", "01")  # f = 1, 1, 0, 1
    out = full_sort_kernel(4, onemax2).sample(pop, STREAM)
    assert [onemax2.evaluate(m) for m in out] == [0.0, 1.0, 1.0, 1.0]
    assert sorted(m.bits for m in out) == sorted(m.bits for m in pop)


def test_full_sort_needs_two(line_problem):
    with pytest.raises(ValueError):
        full_sort_kernel(1, line_problem)


# -- best two of four ----------------------------------------------------------------

def test_best_two_of_four_examples(line_problem):
    b24 = best_two_of_four_kernel(line_problem)
    out = b24.sample(value_pop(line_problem, 4, 3, 2, 1), STREAM)
    assert sorted(f_sequence(line_problem, out)) == [1, 2]
    out = b24.sample(value_pop(line_problem, 1, 1, 5, 5), STREAM)
    assert sorted(f_sequence(line_problem, out)) == [1, 1]


def test_best_two_of_four_exhaustive(line_problem):
    b24 = best_two_of_four_kernel(line_problem)
    for perm in itertools.permutations([1, 2, 3, 4]):
        out = b24.sample(value_pop(line_problem, *perm), STREAM)
        assert sorted(f_sequence(line_problem, out)) == [1, 2], perm


# -- structure-wide properties ---------------------------------------------------------

def test_deterministic_kernels_have_binary_matrices(onemax2):
    space = SearchSpace.bitstring(1)
    prob = make_problem("onemax-min", 1)
    for k, arity in [
        (swap_kernel(), 2),
        (projection_kernel((2,), 2), 2),
        (permutation_kernel((2, 1)), 2),
        (sort_two_kernel(prob), 2),
        (full_sort_kernel(3, prob), 3),
    ]:
        tm = exact_matrix(k, space, arity)
        assert set(np.unique(tm.matrix)) <= {0.0, 1.0}


def test_structural_trees_mention_their_pieces(line_problem):
    assert "sort2" in bubble_pass_kernel(3, 1, line_problem).tree()
    assert "w[4," in sweep_kernel(4, 2, line_problem).tree()
    assert "proj{1,2}" in best_two_of_four_kernel(line_problem).tree()
