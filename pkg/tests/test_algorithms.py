import itertools

import numpy as np
import pytest

import oracles
from conftest import bits_pop
from kernopt import (
    Individual,
    Population,
    RandomStream,
    SGoalConfig,
    SearchSpace,
    best_value,
    bit_flip_kernel,
    build_kernel,
    de_kernel,
    deterministic,
    differential_mutant,
    exact_matrix,
    gga_kernel,
    hc_kernel,
    make_problem,
    optimality_gap,
    phc_kernel,
    pick_distinct_parents,
    pick_parents_kernel,
    projection_kernel,
    replacement_keep_best,
    run_sgoal,
    ssga_kernel,
    uniform_population,
    vr_kernel,
    wilson_interval,
)


# -- hill climbing -------------------------------------------------------------

def test_hc_neutral_keeps_tied_variant(onemax2):
    space = onemax2.space
    # a deterministic "variation" that swaps the bits: same objective value
    swap_bits = deterministic(
        lambda p: Population((Individual(space, p[0].values[::-1]),)), 1, 1
    )
    x = bits_pop("01")
    neutral = hc_kernel(swap_bits, onemax2, neutral=True)
    strict = hc_kernel(swap_bits, onemax2, neutral=False)
    assert neutral.sample(x, RandomStream(0))[0].bits == "10"
    assert strict.sample(x, RandomStream(0))[0].bits == "01"


def test_hc_exact_row(onemax2):
    k = hc_kernel(bit_flip_kernel(onemax2.space, 0.5), onemax2, neutral=False)
    tm = exact_matrix(k, onemax2.space, 1)
    row = tm.row_of(bits_pop("01"))
    expected = {(1, 1): 0.25, (0, 1): 0.75}
    for j, state in enumerate(tm.col_states):
        assert row[j] == expected.get(state.key()[0], 0.0)


def test_hc_neutral_matrix_matches_oracle(onemax2):
    k = hc_kernel(bit_flip_kernel(onemax2.space, 0.5), onemax2, neutral=True)
    tm = exact_matrix(k, onemax2.space, 1)
    oracle = oracles.hc_matrix(2, 0.5, neutral=True)
    for bits, row in oracle.items():
        for target, mass in row.items():
            i = tm.row_index[(bits,)]
            j = tm.col_index[(target,)]
            assert tm.matrix[i, j] == pytest.approx(mass, abs=1e-15)


def test_hc_rejects_pair_variation(onemax2):
    with pytest.raises(ValueError):
        hc_kernel(projection_kernel((1,), 2), onemax2)


# -- variation-replacement constructor -------------------------------------------

def test_vr_reproduces_neutral_hc(onemax2):
    variate = bit_flip_kernel(onemax2.space, 0.5)
    direct = hc_kernel(variate, onemax2, neutral=True)
    via_vr = vr_kernel(variate, replacement_keep_best(onemax2), "pop-first")
    m1 = exact_matrix(direct, onemax2.space, 1).matrix
    m2 = exact_matrix(via_vr, onemax2.space, 1).matrix
    assert np.array_equal(m1, m2)


def test_vr_keep_originals_is_identity(onemax2):
    variate = bit_flip_kernel(onemax2.space, 0.3)
    k = vr_kernel(variate, projection_kernel((1,), 2), "pop-first")
    diff = exact_matrix(k, onemax2.space, 1).matrix - np.eye(4)
    assert np.max(np.abs(diff)) < 1e-12


def test_vr_keep_variants_is_variation(onemax2):
    variate = bit_flip_kernel(onemax2.space, 0.3)
    k = vr_kernel(variate, projection_kernel((2,), 2), "pop-first")
    assert np.array_equal(
        exact_matrix(k, onemax2.space, 1).matrix,
        exact_matrix(variate, onemax2.space, 1).matrix,
    )


def test_vr_validation(onemax2):
    variate = bit_flip_kernel(onemax2.space, 0.3)
    with pytest.raises(ValueError):
        vr_kernel(variate, replacement_keep_best(onemax2), "sideways")
    with pytest.raises(ValueError):
        vr_kernel(variate, projection_kernel((1,), 3), "pop-first")


# -- parallel hill climbing --------------------------------------------------------

def test_phc_single_slot_equals_hc(onemax2):
    variate = bit_flip_kernel(onemax2.space, 0.5)
    m1 = exact_matrix(phc_kernel(variate, onemax2, 1), onemax2.space, 1).matrix
    m2 = exact_matrix(hc_kernel(variate, onemax2), onemax2.space, 1).matrix
    assert np.array_equal(m1, m2)


def test_phc_factorizes_per_slot():
    one = make_problem("onemax-min", 1)
    variate = bit_flip_kernel(one.space, 0.3)
    hc = exact_matrix(hc_kernel(variate, one), one.space, 1).matrix
    phc = exact_matrix(phc_kernel(variate, one, 2), one.space, 2).matrix
    assert np.max(np.abs(phc - np.kron(hc, hc))) < 1e-12


def test_phc_slotwise_elitism():
    prob = make_problem("onemax-min", 4)
    k = phc_kernel(bit_flip_kernel(prob.space, 0.25), prob, 3)
    stream = RandomStream(17)
    for j in range(2000):
        pop = uniform_population(prob.space, 3, stream.derive(2 * j))
        out = k.sample(pop, stream.derive(2 * j + 1))
        for before, after in zip(pop, out):
            assert prob.evaluate(after) <= prob.evaluate(before)


# -- parent picking ------------------------------------------------------------------

def test_pick_parents_distinct_and_uniform(line_problem):
    k = pick_parents_kernel(3)
    pop = Population(
        tuple(Individual(line_problem.space, (float(v),)) for v in (1, 2, 3))
    )
    stream = RandomStream(5)
    counts = {}
    n = 24000
    for i in range(n):
        out = k.sample(pop, stream.derive(i))
        a, b = out[0].values[0], out[1].values[0]
        assert a != b
        counts[(a, b)] = counts.get((a, b), 0) + 1
    assert len(counts) == 6
    for c in counts.values():
        assert abs(c / n - 1 / 6) < 0.02


# -- generational GA -------------------------------------------------------------------

def test_gga_no_crossover_passes_parents_through():
    prob = make_problem("onemax-min", 4)
    k = gga_kernel(prob, 4, cr=0.0)
    stream = RandomStream(3)
    for j in range(500):
        pop = uniform_population(prob.space, 4, stream.derive(2 * j))
        out = k.sample(pop, stream.derive(2 * j + 1))
        assert {m.values for m in out} <= {m.values for m in pop}


def test_gga_always_crossover_applies_operators():
    # single-bit space: crossover is identity and p=1 mutation complements,
    # so every emitted pair is the complement of a distinct parent pair
    prob = make_problem("onemax-min", 1)
    k = gga_kernel(prob, 2, cr=1.0, flip_prob=1.0)
    pop = bits_pop("0", "1")
    stream = RandomStream(8)
    for i in range(300):
        out = k.sample(pop, stream.derive(i))
        assert {out[0].bits, out[1].bits} == {"0", "1"}


def gga_hand_matrix(cr: float, p: float) -> np.ndarray:
    """Independent enumeration of the n=2, single-bit generational GA."""

    def flip_mass(u, v):
        return p if u != v else 1.0 - p

    states = [(0, 0), (0, 1), (1, 0), (1, 1)]
    m = np.zeros((4, 4))
    for i, (x1, x2) in enumerate(states):
        for j, (y1, y2) in enumerate(states):
            total = 0.0
            for a, b in [(x1, x2), (x2, x1)]:
                operated = cr * flip_mass(a, y1) * flip_mass(b, y2)
                passed = (1.0 - cr) * float(y1 == a and y2 == b)
                total += 0.5 * (operated + passed)
            m[i, j] = total
    return m


def test_gga_exact_matrix_matches_hand_enumeration():
    prob = make_problem("onemax-min", 1)
    k = gga_kernel(prob, 2, cr=0.7, flip_prob=0.3)
    tm = exact_matrix(k, prob.space, 2)
    assert np.max(np.abs(tm.matrix - gga_hand_matrix(0.7, 0.3))) < 1e-12


def test_gga_empirical_row_matches_exact():
    prob = make_problem("onemax-min", 1)
    k = gga_kernel(prob, 2, cr=0.7, flip_prob=0.3)
    tm = exact_matrix(k, prob.space, 2)
    start = bits_pop("0", "1")
    stream = RandomStream(41)
    counts = np.zeros(4)
    n = 100000
    for i in range(n):
        out = k.sample(start, stream.derive(i))
        counts[tm.col_index[out.key()]] += 1
    tv = 0.5 * np.abs(counts / n - tm.row_of(start)).sum()
    assert tv < 0.01


def test_gga_validation():
    prob = make_problem("onemax-min", 4)
    with pytest.raises(ValueError):
        gga_kernel(prob, 3, cr=0.5)
    with pytest.raises(ValueError):
        gga_kernel(prob, 4, cr=1.5)


# -- steady-state GA ---------------------------------------------------------------------

def fixed_children_kernel(space, c1: str, c2: str):
    kids = (Individual.from_bits(c1, space), Individual.from_bits(c2, space))
    return deterministic(lambda p: Population(kids), 2, 2, label="fixed-kids")


def test_ssga_keeps_parents_when_children_worse(onemax2):
    space = onemax2.space
    pop = bits_pop("11", "11", "11", "11")
    k = ssga_kernel(
        onemax2, 4, cr=0.5, variation_pair=fixed_children_kernel(space, "00", "00")
    )
    out = k.sample(pop, RandomStream(2))
    assert [m.bits for m in out] == ["11", "11", "11", "11"]


def test_ssga_promotes_better_children(onemax2):
    space = onemax2.space
    pop = bits_pop("00", "00", "00", "00")
    k = ssga_kernel(
        onemax2, 4, cr=0.5, variation_pair=fixed_children_kernel(space, "11", "11")
    )
    out = k.sample(pop, RandomStream(2))
    assert sorted(m.bits for m in out) == ["00", "00", "11", "11"]


def test_ssga_minimum_population(onemax2):
    space = onemax2.space
    k = ssga_kernel(
        onemax2, 2, cr=0.5, variation_pair=fixed_children_kernel(space, "11", "10")
    )
    out = k.sample(bits_pop("00", "01"), RandomStream(1))
    # "10" (child) and "01" (parent) tie at f=1; survivors are graded by
    # f-value multiset, not identity
    assert sorted(onemax2.evaluate(m) for m in out) == [0.0, 1.0]
    with pytest.raises(ValueError):
        ssga_kernel(onemax2, 1, cr=0.5)


def test_ssga_elitism_sampled():
    prob = make_problem("onemax-min", 8)
    k = ssga_kernel(prob, 4, cr=0.7)
    stream = RandomStream(23)
    for j in range(2000):
        pop = uniform_population(prob.space, 4, stream.derive(2 * j))
        out = k.sample(pop, stream.derive(2 * j + 1))
        assert best_value(out, prob) <= best_value(pop, prob)


def test_ssga_mutates_on_both_branches():
    # cr=0 still mutates: with p=1 mutation the children are the
    # complements of the two permuted-front parents, so from an all-zeros
    # population the best two of four are always the two all-ones children
    prob = make_problem("onemax-min", 2)
    k = ssga_kernel(prob, 3, cr=0.0, flip_prob=1.0)
    pop = bits_pop("00", "00", "00")
    stream = RandomStream(6)
    for i in range(100):
        out = k.sample(pop, stream.derive(i))
        assert sorted(m.bits for m in out) == ["00", "11", "11"]


# -- differential evolution --------------------------------------------------------------

def test_differential_mutant_formula():
    space = SearchSpace.cube(2, -100.0, 100.0)
    q = differential_mutant(
        base=(1.0, 2.0),
        donor_b=(3.0, 4.0),
        donor_c=(2.0, 1.0),
        target=(9.0, 9.0),
        f_weight=0.5,
        crossed=(True, True),
        space=space,
    )
    assert q == (1.5, 3.5)


def distinct_coordinate_population(space, n):
    return Population(
        tuple(
            Individual(space, tuple(float(j + 10 * k) for k in range(space.dimension)))
            for j in range(n)
        )
    )


def test_de_cr_zero_crosses_exactly_one_dimension():
    space = SearchSpace.cube(3, -100.0, 100.0)
    prob = make_problem("sphere", 3)
    prob = type(prob)(space, prob.objective, 0.0, "wide-sphere")
    k = de_kernel(prob, 5, f_weight=0.0, cr=0.0)
    pop = distinct_coordinate_population(space, 5)
    stream = RandomStream(11)
    for i in range(400):
        out = k.sample(pop, stream.derive(i))
        for slot in range(5):
            target = pop[slot].values
            got = out[slot].values
            differing = [d for d in range(3) if got[d] != target[d]]
            assert len(differing) == 1
            d = differing[0]
            donors = {pop[j].values[d] for j in range(5) if j != slot}
            assert got[d] in donors


def test_de_zero_weight_full_crossover_copies_a_parent():
    space = SearchSpace.cube(2, -100.0, 100.0)
    prob = make_problem("sphere", 2)
    prob = type(prob)(space, prob.objective, 0.0, "wide-sphere")
    k = de_kernel(prob, 4, f_weight=0.0, cr=1.0)
    pop = distinct_coordinate_population(space, 4)
    stream = RandomStream(13)
    for i in range(300):
        out = k.sample(pop, stream.derive(i))
        for slot in range(4):
            others = {pop[j].values for j in range(4) if j != slot}
            assert out[slot].values in others


def test_de_clamps_to_box():
    prob = make_problem("sphere", 2)
    lo, hi = prob.space.bounds[0]
    corners = Population(
        tuple(
            Individual(prob.space, (float(v1), float(v2)))
            for v1, v2 in [(lo, lo), (hi, hi), (lo, hi), (hi, lo), (hi, lo)]
        )
    )
    k = de_kernel(prob, 5, f_weight=2.0, cr=1.0)
    stream = RandomStream(19)
    for i in range(500):
        out = k.sample(corners, stream.derive(i))
        for m in out:
            assert prob.space.contains(m.values)


def test_de_greedy_never_worsens_slots():
    prob = make_problem("sphere", 3)
    k = de_kernel(prob, 5, f_weight=0.8, cr=0.5, greedy=True)
    stream = RandomStream(29)
    for j in range(300):
        pop = uniform_population(prob.space, 5, stream.derive(2 * j))
        out = k.sample(pop, stream.derive(2 * j + 1))
        for slot in range(5):
            assert prob.evaluate(out[slot]) <= prob.evaluate(pop[slot])


def test_de_validation(onemax2):
    sphere = make_problem("sphere", 2)
    with pytest.raises(ValueError):
        de_kernel(sphere, 3)
    with pytest.raises(ValueError):
        de_kernel(onemax2, 5)
    with pytest.raises(ValueError):
        de_kernel(sphere, 5, cr=1.2)
    with pytest.raises(ValueError):
        de_kernel(sphere, 5, f_weight=2.5)


def test_pick_distinct_parents_properties():
    stream = RandomStream(37)
    for _ in range(5000):
        a, b, c = pick_distinct_parents(6, 2, stream)
        assert len({a, b, c, 2}) == 4
        assert all(0 <= v <= 5 for v in (a, b, c))


# -- arities and structure -----------------------------------------------------------------

def test_algorithm_kernels_preserve_population_size():
    bits8 = make_problem("onemax-min", 8)
    sphere = make_problem("sphere", 3)
    flip = bit_flip_kernel(bits8.space, 0.125)
    cases = [
        hc_kernel(bit_flip_kernel(make_problem("onemax-min", 2).space, 0.5),
                  make_problem("onemax-min", 2)),
        phc_kernel(flip, bits8, 6),
        gga_kernel(bits8, 6, cr=0.7),
        ssga_kernel(bits8, 5, cr=0.7),
        de_kernel(sphere, 5),
    ]
    for k in cases:
        assert k.input_arity == k.output_arity


def test_algorithm_trees_expose_combinators():
    bits8 = make_problem("onemax-min", 8)
    sphere = make_problem("sphere", 3)
    gga = gga_kernel(bits8, 4, cr=0.7).tree()
    assert "mix" in gga and "pick-parents" in gga
    ssga = ssga_kernel(bits8, 4, cr=0.7).tree()
    assert "random-scan" in ssga and "best2of4" in ssga
    de = de_kernel(sphere, 4).tree()
    assert "de-slot1" in de and "de-slot4" in de
    phc = phc_kernel(bit_flip_kernel(bits8.space, 0.125), bits8, 2).tree()
    assert phc.count("keep-best") == 2


# -- config and runner -----------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError):
        SGoalConfig("nope", 1, 5, seed=0)
    with pytest.raises(ValueError):
        SGoalConfig("hc", 0, 5, seed=0)
    with pytest.raises(ValueError):
        SGoalConfig("hc", 1, -1, seed=0)
    with pytest.raises(ValueError):
        SGoalConfig("hc", 1, 5, seed=0, params={"bogus": 1})


def test_build_kernel_enforces_algorithm_shapes(onemax2):
    with pytest.raises(ValueError):
        build_kernel(SGoalConfig("hc", 2, 5, seed=0), onemax2)
    with pytest.raises(ValueError):
        build_kernel(SGoalConfig("gga", 5, 5, seed=0), onemax2)
    with pytest.raises(ValueError):
        build_kernel(SGoalConfig("de", 5, 5, seed=0), onemax2)


def test_run_sgoal_zero_steps(onemax2):
    cfg = SGoalConfig("hc", 1, 0, seed=123, params={"flip_prob": 0.5})
    result = run_sgoal(cfg, onemax2)
    assert len(result.trace) == 1
    assert result.best_f == best_value(result.trace.initial, onemax2)


def test_run_sgoal_deterministic(onemax2):
    cfg = SGoalConfig("ssga", 4, 12, seed=77, params={"cr": 0.7})
    prob = make_problem("onemax-min", 6)
    r1 = run_sgoal(cfg, prob)
    r2 = run_sgoal(cfg, prob)
    assert r1.best_f == r2.best_f
    assert [s.key() for s in r1.trace.states] == [s.key() for s in r2.trace.states]
    assert r1.best.values == r2.best.values


def test_run_sgoal_tracks_best_over_trace():
    prob = make_problem("sphere", 2)
    cfg = SGoalConfig("de", 6, 15, seed=5, params={"f_weight": 0.7, "cr": 0.9})
    result = run_sgoal(cfg, prob)
    bests = [best_value(s, prob) for s in result.trace.states]
    assert result.best_f == min(bests)
    assert prob.evaluate(result.best) == result.best_f


def test_run_sgoal_hits_geometric_bound(onemax2):
    # derived from the exact chain: success(t) >= 1 - 0.75^t, checked with
    # a Wilson half-width of slack at 3000 runs
    runs, t = 3000, 5
    cfg = SGoalConfig("hc", 1, t, seed=2025, params={"flip_prob": 0.5})
    hits = 0
    for r in range(runs):
        out = run_sgoal(
            SGoalConfig("hc", 1, t, seed=9000 + r, params={"flip_prob": 0.5}),
            onemax2,
        )
        if out.trace.gaps[t] < 1.0:
            hits += 1
    rate = hits / runs
    lo, hi = wilson_interval(hits, runs)
    assert rate >= (1 - 0.75 ** t) - (hi - lo) / 2


def test_diagnostic_kernels(onemax2):
    ident = build_kernel(SGoalConfig("identity", 2, 1, seed=0), onemax2)
    pop = bits_pop("01", "10")
    assert ident.sample(pop, RandomStream(0)).key() == pop.key()
    mut = build_kernel(
        SGoalConfig("mutation", 2, 1, seed=0, params={"flip_prob": 0.5}), onemax2
    )
    assert mut.input_arity == mut.output_arity == 2
    assert mut.has_exact_mass
