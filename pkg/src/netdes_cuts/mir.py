"""Mixed-integer rounding: single cuts, iterated cuts, and the closed-form
subadditive coefficient functions for multi-facility cut-sets.

Everything here is pure exact-rational arithmetic over anonymous variable
indices; callers map results onto instance variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .core import ZERO, frac


def floor_frac(x: Fraction) -> int:
    return math.floor(x)


def ceil_frac(x: Fraction) -> int:
    return math.ceil(x)


def frac_part(x: Fraction) -> Fraction:
    return x - math.floor(x)


@dataclass
class BaseInequality:
    """``sum a_j x_j + sum c_j y_j >= b`` with continuous x >= 0, integer y >= 0."""

    cont: dict[int, Fraction] = field(default_factory=dict)
    integ: dict[int, Fraction] = field(default_factory=dict)
    rhs: Fraction = ZERO

    def __post_init__(self):
        self.cont = {j: frac(v) for j, v in self.cont.items() if frac(v) != 0}
        self.integ = {j: frac(v) for j, v in self.integ.items()}
        self.rhs = frac(self.rhs)
        if not self.integ:
            raise ValueError("base inequality needs at least one integer variable")

    def scaled(self, factor) -> "BaseInequality":
        factor = frac(factor)
        if factor <= 0:
            raise ValueError("scaling factor must be positive")
        return BaseInequality(
            {j: v * factor for j, v in self.cont.items()},
            {j: v * factor for j, v in self.integ.items()},
            self.rhs * factor,
        )

    def integer_normal_form(self) -> tuple[tuple, tuple, Fraction]:
        """Coefficients cleared to coprime integers, for comparisons."""
        vals = list(self.cont.values()) + list(self.integ.values()) + [self.rhs]
        lcm = 1
        for v in vals:
            lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
        nums = [abs(int(v * lcm)) for v in vals if v != 0]
        g = 0
        for n in nums:
            g = math.gcd(g, n)
        scale = Fraction(lcm, g or 1)
        return (
            tuple(sorted((j, v * scale) for j, v in self.cont.items())),
            tuple(sorted((j, v * scale) for j, v in self.integ.items() if v != 0)),
            self.rhs * scale,
        )


def basic_mir(b) -> tuple[Fraction, int]:
    """Parameters (r, ceil(b)) of ``x + r*y >= r*ceil(b)`` for x + y >= b."""
    b = frac(b)
    return frac_part(b), ceil_frac(b)


def mir_cut(base: BaseInequality) -> BaseInequality:
    """One rounding step applied to a base inequality.

    Negative continuous terms are dropped, each integer coefficient c_j
    becomes ``r*floor(c_j) + min(frac(c_j), r)`` and the right-hand side
    ``r*ceil(b)``, with ``r = frac(b)``.  When b is integral the cut
    degenerates; the base is returned unchanged so iterated application
    can simply skip such steps.
    """
    r = frac_part(base.rhs)
    if r == 0:
        return BaseInequality(dict(base.cont), dict(base.integ), base.rhs)
    cont = {j: v for j, v in base.cont.items() if v > 0}
    integ = {}
    for j, c in base.integ.items():
        rj = frac_part(c)
        integ[j] = r * floor_frac(c) + min(rj, r)
    return BaseInequality(cont, integ, r * ceil_frac(base.rhs))


@dataclass(frozen=True)
class KnapsackCoverSet:
    """Integer points z >= 0 with ``sum c_m z_m >= b`` (c strictly increasing)."""

    capacities: tuple[int, ...]
    rhs: Fraction

    def __post_init__(self):
        object.__setattr__(self, "capacities", tuple(int(c) for c in self.capacities))
        object.__setattr__(self, "rhs", frac(self.rhs))
        caps = self.capacities
        if any(c <= 0 for c in caps):
            raise ValueError("capacities must be positive integers")
        if any(a >= b for a, b in zip(caps, caps[1:])):
            raise ValueError("capacities must be strictly increasing")

    def base_inequality(self) -> BaseInequality:
        return BaseInequality({}, {m: Fraction(c) for m, c in enumerate(self.capacities)}, self.rhs)

    def is_divisible(self) -> bool:
        return all(b % a == 0 for a, b in zip(self.capacities, self.capacities[1:]))


def iterative_mir(cover: KnapsackCoverSet, subsequence: Sequence[int]) -> BaseInequality:
    """Round repeatedly, dividing by each chosen capacity in turn.

    ``subsequence`` holds indices into ``cover.capacities`` in increasing
    order.  Each round divides the current inequality by the next
    capacity, applies the rounding step, and rescales by the reciprocal
    remainder so the next division sees the inequality in its rounded
    normal form (for an all-integer inequality this makes a divisor-1 step
    literal integer rounding).  Divisors run smallest to largest: that
    ordering, and only that ordering, recovers every hull facet of the
    divisible case -- largest-first misses e.g. ``z1 + 2*z2 >= 6`` for
    capacities (1, 3) with requirement 23/3.  The result is valid for the
    cover set regardless of divisibility.
    """
    idx = list(subsequence)
    if any(a >= b for a, b in zip(idx, idx[1:])) or not idx:
        raise ValueError("subsequence must be nonempty strictly increasing indices")
    if any(i < 0 or i >= len(cover.capacities) for i in idx):
        raise ValueError("subsequence index out of range")
    ineq = cover.base_inequality()
    for i in idx:
        ineq = mir_cut(ineq.scaled(Fraction(1, cover.capacities[i])))
        _, integ, rhs = ineq.integer_normal_form()
        ineq = BaseInequality({}, dict(integ), rhs)
    return ineq


def all_subsequences(n_facilities: int):
    """Every nonempty increasing index subsequence (meant for small n)."""
    for size in range(1, n_facilities + 1):
        yield from combinations(range(n_facilities), size)


def hull_inequalities(cover: KnapsackCoverSet) -> list[BaseInequality]:
    """Iterated-MIR cuts for every subsequence, deduplicated."""
    seen = {}
    for sub in all_subsequences(len(cover.capacities)):
        ineq = iterative_mir(cover, sub)
        seen.setdefault(ineq.integer_normal_form(), ineq)
    return list(seen.values())


# -- closed-form subadditive coefficient functions ----------------------------


@dataclass(frozen=True)
class PhiParams:
    """Rounding data of a base facility: divisor c_s, remainder and eta."""

    s: int
    c_s: Fraction
    r: Fraction
    eta: int

    @classmethod
    def from_rhs(cls, b, capacities: Sequence, s: int) -> "PhiParams":
        b = frac(b)
        c_s = frac(capacities[s])
        return cls(s=s, c_s=c_s, r=b - floor_frac(b / c_s) * c_s, eta=ceil_frac(b / c_s))

    def __post_init__(self):
        if not 0 <= self.r < self.c_s:
            raise ValueError(f"remainder {self.r} outside [0, {self.c_s})")


def _check_phi_args(p: PhiParams, c: Fraction):
    if c < 0:
        raise ValueError("phi is defined for nonnegative arguments")
    if p.r == 0:
        raise ValueError("degenerate remainder: the cut vanishes, skip it")


def phi_plus(p: PhiParams, c) -> Fraction:
    """Outbound coefficient function; piecewise linear, subadditive."""
    c = frac(c)
    _check_phi_args(p, c)
    k = floor_frac(c / p.c_s)
    if c < k * p.c_s + p.r:
        return c - k * (p.c_s - p.r)
    return (k + 1) * p.r


def phi_minus(p: PhiParams, c) -> Fraction:
    """Inbound coefficient function; mirror of ``phi_plus``."""
    c = frac(c)
    _check_phi_args(p, c)
    k = floor_frac(c / p.c_s)
    # intervals [k*c_s - r, k*c_s) take the flat branch
    if c >= (k + 1) * p.c_s - p.r:
        return (k + 1) * (p.c_s - p.r)
    return c - k * p.r
