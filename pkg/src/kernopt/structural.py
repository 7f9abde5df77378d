"""Structural kernels: swaps, projections, permutations and sort networks.

All positions in this module are 1-based, mirroring the comparator
network convention: a population of size n has slots 1..n.  (Plain
sequence lookups elsewhere, such as ``best_index``, stay 0-based Python
indices.)

Every kernel here is deterministic except ``random_scan_permutation``;
the deterministic ones have 0/1-valued exact matrices.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

from .kernels import Kernel, compose, deterministic, identity, join, pipeline
from .spaces import OptimizationProblem, Population
from .streams import RandomStream

#: largest n for which the random-scan kernel tabulates its n! mixture
RANDOM_SCAN_EXACT_LIMIT = 7


def swap_kernel() -> Kernel:
    """(x, y) maps to (y, x); an involution."""
    return deterministic(
        lambda p: Population((p[1], p[0])), 2, 2, label="swap"
    )


def _validate_index_set(indices: Sequence[int], n: int) -> tuple[int, ...]:
    idx = tuple(indices)
    if not idx:
        raise ValueError("invalid index set: empty")
    if any(k < 1 or k > n for k in idx):
        raise ValueError(f"invalid index set {idx}: positions must lie in 1..{n}")
    if any(a >= b for a, b in zip(idx, idx[1:])):
        raise ValueError(f"invalid index set {idx}: positions must strictly increase")
    return idx


def projection_kernel(indices: Sequence[int], n: int) -> Kernel:
    """Select the 1-based positions in ``indices`` (strictly increasing)."""
    idx = _validate_index_set(indices, n)
    zero_based = tuple(k - 1 for k in idx)
    label = "proj{" + ",".join(str(k) for k in idx) + "}"
    return deterministic(
        lambda p: Population(tuple(p.members[k] for k in zero_based)),
        n,
        len(idx),
        label=label,
    )


def select_kernel(positions: Sequence[int], n: int) -> Kernel:
    """Copy arbitrary (possibly repeated, unordered) 1-based positions.

    Built literally as a join of single-position projections, so it
    stays inside the combinator algebra.
    """
    pos = tuple(positions)
    if any(k < 1 or k > n for k in pos):
        raise ValueError(f"positions {pos} must lie in 1..{n}")
    return join([projection_kernel((k,), n) for k in pos])


def permutation_kernel(perm: Sequence[int]) -> Kernel:
    """Rearrange coordinates: output slot k holds input slot perm[k-1].

    ``perm`` must be a bijection of 1..n.  The kernel is the join of
    single-position projections.
    """
    n = len(perm)
    if sorted(perm) != list(range(1, n + 1)):
        raise ValueError(f"{perm!r} is not a permutation of 1..{n}")
    k = select_kernel(perm, n)
    label = "permute[" + ",".join(str(i) for i in perm) + "]"
    return Kernel(
        k.input_arity, k.output_arity, k.sampler, k.mass_fn, label, k.children
    )


def random_scan_permutation(n: int) -> Kernel:
    """Apply a uniformly random permutation of the n slots.

    Equivalent to the uniform mixture of all n! fixed-permutation
    kernels; the exact mass uses that mixture formula and is available
    while n! stays enumerable.
    """
    if n < 1:
        raise ValueError("n must be >= 1")

    def sampler(state: Population, stream: RandomStream) -> Population:
        order = stream.shuffle_indices(n)
        return Population(tuple(state.members[i] for i in order))

    mass = None
    if n <= RANDOM_SCAN_EXACT_LIMIT:
        total = math.factorial(n)

        def mass(state: Population, target: Population) -> float:
            x, y = state.key(), target.key()
            hits = sum(
                1
                for p in itertools.permutations(range(n))
                if tuple(x[i] for i in p) == y
            )
            return hits / total

    return Kernel(n, n, sampler, mass, label=f"random-scan({n})")


def sort_two_kernel(prob: OptimizationProblem) -> Kernel:
    """Order a pair by objective value; equal values are swapped.

    The pair stays put only when the first member is strictly better,
    so the first output slot never has a larger objective than the
    first input slot.
    """

    def fn(p: Population) -> Population:
        if prob.evaluate(p[0]) < prob.evaluate(p[1]):
            return p
        return Population((p[1], p[0]))

    return deterministic(fn, 2, 2, label="sort2")


def bubble_pass_kernel(n: int, k: int, prob: OptimizationProblem) -> Kernel:
    """One comparator: sort slots (k, k+1), leave every other slot fixed."""
    if not 1 <= k <= n - 1:
        raise ValueError(f"comparator position k={k} must lie in 1..{n - 1}")
    blocks: list[Kernel] = []
    if k > 1:
        blocks.append(projection_kernel(range(1, k), n))
    blocks.append(compose(sort_two_kernel(prob), projection_kernel((k, k + 1), n)))
    if k + 2 <= n:
        blocks.append(projection_kernel(range(k + 2, n + 1), n))
    out = join(blocks)
    return Kernel(
        n, n, out.sampler, out.mass_fn, f"w[{n},{k}]", out.children
    )


def sweep_kernel(n: int, k: int, prob: OptimizationProblem) -> Kernel:
    """Forward comparator sweep over slots 1..k+1: w_1, then w_2, ... w_k.

    One sweep carries the largest value among the first k+1 slots into
    slot k+1.
    """
    if not 1 <= k <= n - 1:
        raise ValueError(f"sweep length k={k} must lie in 1..{n - 1}")
    out = pipeline(*(bubble_pass_kernel(n, j, prob) for j in range(1, k + 1)))
    return Kernel(n, n, out.sampler, out.mass_fn, f"t[{n},{k}]", out.children)


def full_sort_kernel(n: int, prob: OptimizationProblem) -> Kernel:
    """Sort a population into non-decreasing objective order.

    Sweeps are applied with decreasing reach: the full sweep t[n, n-1]
    pins the maximum at slot n, the next sweep pins the runner-up at
    slot n-1, and so on down to a single comparator.  After sweep
    t[n, k] the tail slots k+2..n hold their final values, which is the
    invariant that makes the network sort every input.

    Ties are swapped by the pair comparator, so sorting is not stable;
    only the objective-value sequence is guaranteed.
    """
    if n < 2:
        raise ValueError("sorting needs n >= 2")
    out = pipeline(*(sweep_kernel(n, k, prob) for k in range(n - 1, 0, -1)))
    return Kernel(n, n, out.sampler, out.mass_fn, f"sort[{n}]", out.children)


def best_two_of_four_kernel(prob: OptimizationProblem) -> Kernel:
    """Reduce four candidates to the pair with the two smallest values.

    Two full forward sweeps pin the largest value at slot 4 and the
    runner-up at slot 3, so slots 1..2 are left holding the two best
    (in some order); projecting them off gives the survivor pair.
    """
    sweep = sweep_kernel(4, 3, prob)
    out = pipeline(sweep, sweep, projection_kernel((1, 2), 4))
    return Kernel(4, 2, out.sampler, out.mass_fn, "best2of4", out.children)
