"""Variation kernels: mutation and crossover for both space kinds.

Bitstring operators carry exact transition masses; real-space operators
are sampling-only.  Real coordinates produced outside the box are
clamped to the nearest bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .kernels import Kernel, compose, deterministic, identity, join, mix
from .spaces import Individual, Population, SearchSpace
from .streams import RandomStream
from .structural import projection_kernel


def bit_flip_kernel(space: SearchSpace, p: float) -> Kernel:
    """Flip each bit independently with probability p."""
    if not space.is_bitstring:
        raise ValueError("bit flips need a bitstring space")
    if not 0.0 <= p <= 1.0:
        raise ValueError("flip probability must lie in [0, 1]")
    length = space.dimension

    def sampler(state: Population, stream: RandomStream) -> Population:
        x = state[0].values
        values = tuple(v ^ 1 if stream.bernoulli(p) else v for v in x)
        return Population((Individual(space, values),))

    def mass(state: Population, target: Population) -> float:
        x, y = state[0].values, target[0].values
        flips = sum(a != b for a, b in zip(x, y))
        return (p ** flips) * ((1.0 - p) ** (length - flips))

    return Kernel(1, 1, sampler, mass, label=f"bit-flip(p={p:g})")


def single_bit_flip_kernel(space: SearchSpace) -> Kernel:
    """Flip exactly one uniformly chosen bit."""
    if not space.is_bitstring:
        raise ValueError("bit flips need a bitstring space")
    length = space.dimension

    def sampler(state: Population, stream: RandomStream) -> Population:
        k = stream.randint(0, length - 1)
        x = state[0].values
        values = x[:k] + (x[k] ^ 1,) + x[k + 1 :]
        return Population((Individual(space, values),))

    def mass(state: Population, target: Population) -> float:
        x, y = state[0].values, target[0].values
        flips = sum(a != b for a, b in zip(x, y))
        return 1.0 / length if flips == 1 else 0.0

    return Kernel(1, 1, sampler, mass, label="single-bit-flip")


def gaussian_step_kernel(space: SearchSpace, sigma: float) -> Kernel:
    """Add N(0, sigma^2) per coordinate, clamped to the box."""
    if space.is_bitstring:
        raise ValueError("gaussian steps need a real-box space")
    if sigma <= 0:
        raise ValueError("sigma must be > 0")

    def sampler(state: Population, stream: RandomStream) -> Population:
        x = state[0].values
        moved = (v + sigma * stream.gauss() for v in x)
        return Population((Individual(space, space.clamp(moved)),))

    return Kernel(1, 1, sampler, None, label=f"gauss-step(sigma={sigma:g})")


def single_point_crossover_kernel(space: SearchSpace) -> Kernel:
    """Swap suffixes of a pair at a uniform cut; a mixture of cut kernels.

    With a single coordinate there is no cut point and the pair passes
    through unchanged.
    """
    if not space.is_bitstring:
        raise ValueError("single-point crossover is the bitstring operator")
    length = space.dimension
    if length == 1:
        return identity(2)

    def cut_at(c: int) -> Kernel:
        def fn(p: Population) -> Population:
            a, b = p[0].values, p[1].values
            return Population(
                (
                    Individual(space, a[:c] + b[c:]),
                    Individual(space, b[:c] + a[c:]),
                )
            )

        return deterministic(fn, 2, 2, label=f"cut@{c}")

    cuts = [cut_at(c) for c in range(1, length)]
    out = mix(cuts, [1.0 / len(cuts)] * len(cuts))
    return Kernel(2, 2, out.sampler, out.mass_fn, "xover-1pt", out.children)


def uniform_crossover_kernel(space: SearchSpace) -> Kernel:
    """Exchange each coordinate of a pair with probability one half."""

    def sampler(state: Population, stream: RandomStream) -> Population:
        a, b = list(state[0].values), list(state[1].values)
        for k in range(space.dimension):
            if stream.bernoulli(0.5):
                a[k], b[k] = b[k], a[k]
        return Population(
            (Individual(space, tuple(a)), Individual(space, tuple(b)))
        )

    return Kernel(2, 2, sampler, None, label="xover-uniform")


def pairwise(op: Kernel) -> Kernel:
    """Lift a 1->1 kernel to act independently on both members of a pair."""
    if (op.input_arity, op.output_arity) != (1, 1):
        raise ValueError("pairwise lifts 1->1 kernels only")
    first = compose(op, projection_kernel((1,), 2))
    second = compose(op, projection_kernel((2,), 2))
    return join([first, second])


def default_mutation_kernel(
    space: SearchSpace,
    flip_prob: Optional[float] = None,
    sigma: float = 0.1,
) -> Kernel:
    """The standard per-space point mutation (1->1).

    Bitstrings flip each bit with probability 1/length unless overridden;
    real vectors take a clamped gaussian step.
    """
    if space.is_bitstring:
        p = 1.0 / space.dimension if flip_prob is None else flip_prob
        return bit_flip_kernel(space, p)
    return gaussian_step_kernel(space, sigma)


def default_crossover_kernel(space: SearchSpace) -> Kernel:
    """The standard per-space recombination (2->2)."""
    if space.is_bitstring:
        return single_point_crossover_kernel(space)
    return uniform_crossover_kernel(space)


_VARIATE_NAMES = ("bit-flip", "single-bit-flip", "gaussian-step", "default")


@dataclass(frozen=True)
class VariationOperator:
    """Named, parameterized recipe for a 1->1 variation kernel.

    Used by algorithm configs so that the variation step stays
    swappable without touching the kernel assembly.
    """

    name: str = "default"
    flip_prob: Optional[float] = None
    sigma: float = 0.1

    def __post_init__(self):
        if self.name not in _VARIATE_NAMES:
            raise ValueError(
                f"unknown variation operator {self.name!r}; pick one of {_VARIATE_NAMES}"
            )
        if self.flip_prob is not None and not 0.0 <= self.flip_prob <= 1.0:
            raise ValueError("flip_prob must lie in [0, 1]")
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")

    def build(self, space: SearchSpace) -> Kernel:
        if self.name == "bit-flip":
            p = 1.0 / space.dimension if self.flip_prob is None else self.flip_prob
            return bit_flip_kernel(space, p)
        if self.name == "single-bit-flip":
            return single_bit_flip_kernel(space)
        if self.name == "gaussian-step":
            return gaussian_step_kernel(space, self.sigma)
        return default_mutation_kernel(space, self.flip_prob, self.sigma)
