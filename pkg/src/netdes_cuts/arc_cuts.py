"""Valid inequalities and separation for single-arc capacity relaxations.

A relaxation here is ``sum a_i x_i <= a_0 + y`` with ``x`` either boxed in
[0,1] (splittable) or binary (unsplittable) and ``y`` integer.  Cuts are
kept in the natural display form ``sum coef_i x_i <= const + y_coef * y``
(``ArcInequality``) and mapped back onto raw instance variables by the
engine using the relaxation's provenance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .core import ZERO, Instance, LinearCut, frac
from .mir import ceil_frac, floor_frac, frac_part

SPLITTABLE = "splittable"
UNSPLITTABLE = "unsplittable"


@dataclass
class ArcInequality:
    """``sum coefs_i x_i <= const + y_coef * y`` over one arc's commodities."""

    coefs: dict[int, Fraction]
    const: Fraction
    y_coef: Fraction
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coefs = {i: frac(v) for i, v in self.coefs.items() if frac(v) != 0}
        self.const = frac(self.const)
        self.y_coef = frac(self.y_coef)

    def violation(self, xbar: Mapping[int, Fraction], ybar) -> Fraction:
        lhs = sum((v * frac(xbar.get(i, 0)) for i, v in self.coefs.items()), ZERO)
        return lhs - self.const - self.y_coef * frac(ybar)

    def holds_at(self, x: Mapping[int, Fraction], y) -> bool:
        return self.violation(x, y) <= 0

    def normalized(self):
        """Integer-cleared canonical tuple for equality checks."""
        vals = list(self.coefs.values()) + [self.const, self.y_coef]
        lcm = 1
        for v in vals:
            lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
        nums = [abs(int(v * lcm)) for v in vals if v != 0]
        g = 0
        for n in nums:
            g = math.gcd(g, n)
        s = Fraction(lcm, g or 1)
        return (
            tuple(sorted((i, v * s) for i, v in self.coefs.items())),
            self.const * s,
            self.y_coef * s,
        )


@dataclass(frozen=True)
class ArcSetRelaxation:
    """Single-arc capacity relaxation over a commodity list."""

    a: tuple[Fraction, ...]
    a0: Fraction
    mode: str
    # provenance for mapping cuts back to instance variables
    arc: int | None = None
    facility: int | None = None
    commodities: tuple[int, ...] | None = None
    demands: tuple[Fraction, ...] | None = None
    capacity: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(frac(v) for v in self.a))
        object.__setattr__(self, "a0", frac(self.a0))
        if self.a0 < 0:
            raise ValueError("existing-capacity term a0 must be nonnegative")
        if any(v < 0 for v in self.a):
            raise ValueError("coefficients must be positive (complement first)")

    @property
    def n(self) -> int:
        return len(self.a)

    def a_sum(self, S: Iterable[int]) -> Fraction:
        return sum((self.a[i] for i in S), ZERO)

    def is_normalized(self) -> bool:
        return all(v < 1 for v in self.a) and self.a0 < 1


def from_capacity_row(
    instance: Instance, arc: int, mode: str | None = None, facility: int = 0
) -> ArcSetRelaxation:
    """Divide an arc's capacity row by one facility size.

    Commodity demands become the coefficients ``a_i = d_k / c`` and the
    existing capacity the offset ``a_0``.  Requires a single-facility view
    (pass ``facility`` explicitly when several exist and you accept the
    relaxation dropping the rest -- only sound if the others are absent).
    """
    c = instance.facilities[facility].capacity
    if c == 0:
        raise ValueError("facility capacity must be nonzero")
    if mode is None:
        mode = UNSPLITTABLE if instance.unsplittable else SPLITTABLE
    demands = tuple(com.total_supply for com in instance.commodities)
    return ArcSetRelaxation(
        a=tuple(d / c for d in demands),
        a0=instance.arcs[arc].existing_capacity / c,
        mode=mode,
        arc=arc,
        facility=facility,
        commodities=tuple(range(len(instance.commodities))),
        demands=demands,
        capacity=c,
    )


def normalize_unsplittable(rel: ArcSetRelaxation):
    """Reduce to fractional parts; returns ``(reduced, offsets, offset0)``.

    Coefficients with zero fractional part stay as zero entries (their
    variables cannot appear in reduced-space cuts); ``back_map_cut``
    restores the dropped integer parts.
    """
    if rel.mode != UNSPLITTABLE:
        raise ValueError("normalization applies to unsplittable relaxations")
    offsets = tuple(floor_frac(v) for v in rel.a)
    off0 = floor_frac(rel.a0)
    reduced = ArcSetRelaxation(
        a=tuple(frac_part(v) for v in rel.a),
        a0=frac_part(rel.a0),
        mode=UNSPLITTABLE,
        arc=rel.arc,
        facility=rel.facility,
        commodities=rel.commodities,
        demands=rel.demands,
        capacity=rel.capacity,
    )
    return reduced, offsets, off0


def back_map_cut(ineq: ArcInequality, offsets: Sequence[int], offset0: int) -> ArcInequality:
    """Translate a reduced-space cut to the original unsplittable set.

    Substituting the reduced capacity variable ``y' = y + floor(a0)
    - sum floor(a_i) x_i`` turns ``coefs*x <= const + b*y'`` into
    ``(coefs_i + b*floor(a_i))*x <= (const + b*floor(a0)) + b*y``.
    """
    b = ineq.y_coef
    coefs = dict(ineq.coefs)
    for i, off in enumerate(offsets):
        if off:
            coefs[i] = coefs.get(i, ZERO) + b * off
    return ArcInequality(coefs, ineq.const + b * offset0, b, dict(ineq.params))


# -- splittable: residual capacity ---------------------------------------------


def residual_capacity_cut(rel: ArcSetRelaxation, S: Iterable[int]) -> ArcInequality | None:
    """Rounding cut for a commodity subset; ``None`` when it degenerates."""
    S = sorted(set(S))
    if not S:
        raise ValueError("subset must be nonempty")
    gap = rel.a_sum(S) - rel.a0
    r = frac_part(gap)
    if r == 0:
        return None
    eta = ceil_frac(gap)
    # sum_{i in S} a_i (1 - x_i) >= r (eta - y), displayed in <= form
    coefs = {i: rel.a[i] for i in S}
    const = rel.a_sum(S) - r * eta
    return ArcInequality(coefs, const, r, params={"S": tuple(S), "r": r, "eta": eta})


def separate_residual_capacity(
    rel: ArcSetRelaxation, xbar: Mapping[int, Fraction] | Sequence, ybar
) -> ArcInequality | None:
    """Exact linear-time separation over all residual capacity cuts.

    Expects a point satisfying the box bounds and the capacity row.  The
    candidate set collects commodities whose flow exceeds the fractional
    part of the capacity variable; two closed-form checks then decide
    whether its cut is violated, and if they fail no cut in the family is.
    """
    xbar = _as_xmap(rel, xbar)
    ybar = frac(ybar)
    fy = frac_part(ybar)
    T = [i for i in range(rel.n) if xbar.get(i, ZERO) > fy]
    if not T:
        return None
    aT = rel.a_sum(T)
    lo = rel.a0 + floor_frac(ybar)
    hi = rel.a0 + ceil_frac(ybar)
    if not (lo < aT < hi):
        return None
    gap = ceil_frac(ybar) - ybar
    slack = sum((rel.a[i] * (1 - xbar.get(i, ZERO) - gap) for i in T), ZERO) + gap * lo
    if slack >= 0:
        return None
    return residual_capacity_cut(rel, T)


def _as_xmap(rel: ArcSetRelaxation, xbar) -> dict[int, Fraction]:
    if isinstance(xbar, Mapping):
        return {i: frac(v) for i, v in xbar.items()}
    return {i: frac(v) for i, v in enumerate(xbar)}


# -- unsplittable: rounding cuts ------------------------------------------------


def c_strong_value(rel: ArcSetRelaxation, S: Iterable[int]) -> int:
    S = list(S)
    return len(S) - ceil_frac(rel.a_sum(S) - rel.a0)


def c_strong_cut(rel: ArcSetRelaxation, S: Iterable[int]) -> ArcInequality:
    """``sum_{i in S} x_i <= c_S + y`` for a normalized unsplittable set."""
    _require_normalized(rel)
    S = sorted(set(S))
    return ArcInequality(
        {i: Fraction(1) for i in S},
        Fraction(c_strong_value(rel, S)),
        Fraction(1),
        params={"S": tuple(S), "c_S": c_strong_value(rel, S)},
    )


def is_maximal_c_strong(rel: ArcSetRelaxation, S: Iterable[int]) -> bool:
    """Facet test: dropping keeps c_S, adding raises it by exactly one."""
    _require_normalized(rel)
    S = set(S)
    c0 = c_strong_value(rel, S)
    for i in S:
        if c_strong_value(rel, S - {i}) != c0:
            return False
    for i in range(rel.n):
        if i not in S and c_strong_value(rel, S | {i}) != c0 + 1:
            return False
    return True


def separate_c_strong(
    rel: ArcSetRelaxation,
    xbar: Mapping[int, Fraction] | Sequence,
    ybar,
    enumeration_cap: int = 20,
) -> ArcInequality | None:
    """Most violated rounding cut; exact on the fractional support.

    Entries at 0 and 1 can be fixed at their values, so only fractional
    commodities are enumerated.  Beyond ``enumeration_cap`` of them a
    rounding heuristic (include when >= 1/2) runs instead and the result
    carries ``heuristic: True``.
    """
    _require_normalized(rel)
    xbar = _as_xmap(rel, xbar)
    ybar = frac(ybar)
    ones = [i for i in range(rel.n) if xbar.get(i, ZERO) == 1]
    fracs = [i for i in range(rel.n) if 0 < xbar.get(i, ZERO) < 1]

    def viol(S):
        return sum((xbar.get(i, ZERO) for i in S), ZERO) - c_strong_value(rel, S) - ybar

    heuristic = len(fracs) > enumeration_cap
    if heuristic:
        candidates = [ones + [i for i in fracs if xbar[i] >= Fraction(1, 2)]]
    else:
        candidates = [ones + list(sub) for size in range(len(fracs) + 1) for sub in combinations(fracs, size)]
    best, best_v = None, ZERO
    for S in candidates:
        if not S:
            continue
        v = viol(S)
        if v > best_v:
            best, best_v = S, v
    if best is None:
        return None
    cut = c_strong_cut(rel, best)
    cut.params.update({"violation": best_v, "heuristic": heuristic})
    return cut


def k_split_c_strong_cut(rel: ArcSetRelaxation, S: Iterable[int], k: int) -> ArcInequality:
    """Rounding cut for capacity sold in multiples of 1/k."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    S = sorted(set(S))
    ceil_in = {i: ceil_frac(k * rel.a[i]) for i in S}
    coefs = dict(ceil_in)
    for i in range(rel.n):
        if i not in coefs:
            coefs[i] = Fraction(floor_frac(k * rel.a[i]))
    c_sk = sum(ceil_in.values()) - ceil_frac(k * (rel.a_sum(S) - rel.a0))
    return ArcInequality(
        {i: Fraction(v) for i, v in coefs.items()},
        Fraction(c_sk),
        Fraction(k),
        params={"S": tuple(S), "k": k, "c_Sk": c_sk},
    )


def k_split_facet_check(rel: ArcSetRelaxation, S: Iterable[int], k: int) -> bool:
    """Sufficient facet conditions for the k-split cut (not necessary)."""
    _require_normalized(rel)
    S = set(S)
    rho = [frac_part(k * v) for v in rel.a]
    rho0 = frac_part(k * rel.a0)

    def g(T):
        return len(T) - ceil_frac(sum((rho[i] for i in T), ZERO) - rho0)

    g0 = g(S)
    for i in S:
        if g(S - {i}) != g0:
            return False
    for i in range(rel.n):
        if i not in S and g(S | {i}) != g0 + 1:
            return False
    f_S = frac_part(rel.a_sum(S) - rel.a0)
    if not (f_S > Fraction(k - 1, k) and rel.a0 >= 0):
        return False
    if any(rel.a[i] <= f_S for i in S):
        return False
    if any(rel.a[i] >= 1 - f_S for i in range(rel.n) if i not in S):
        return False
    return True


def _require_normalized(rel: ArcSetRelaxation):
    if rel.mode != UNSPLITTABLE:
        raise ValueError("operation requires an unsplittable relaxation")
    if not rel.is_normalized():
        raise ValueError("normalize the relaxation first")


# -- unsplittable: lifted cover cuts -------------------------------------------


@dataclass(frozen=True)
class CoverSpec:
    """Knapsack restriction (y fixed, some variables pinned) plus its cover."""

    ybar: int
    K0: frozenset[int]
    K1: frozenset[int]
    cover: tuple[int, ...]
    excess: Fraction
    minimal: bool

    @classmethod
    def build(cls, rel: ArcSetRelaxation, ybar: int, K0: Iterable[int], K1: Iterable[int]) -> "CoverSpec":
        K0, K1 = frozenset(K0), frozenset(K1)
        if K0 & K1:
            raise ValueError("fixed-zero and fixed-one sets overlap")
        C = tuple(sorted(set(range(rel.n)) - K0 - K1))
        excess = rel.a_sum(C) + rel.a_sum(K1) - rel.a0 - ybar
        if not C or excess <= 0:
            raise ValueError("remaining variables do not form a cover")
        minimal = all(rel.a[i] >= excess for i in C)
        return cls(ybar=ybar, K0=K0, K1=K1, cover=C, excess=excess, minimal=minimal)


def lifted_cover_cut(
    rel: ArcSetRelaxation,
    spec: CoverSpec,
    order: Sequence[int] | None = None,
    require_minimal: bool = False,
) -> ArcInequality:
    """Sequentially lifted cover inequality.

    The capacity variable is lifted first, taking the largest coefficient
    valid against the restrictions below ``ybar`` (this is what makes the
    whole construction cubic-time).  Pinned variables then enter one at a
    time, fixed-zero before fixed-one, ascending index unless ``order``
    overrides it; every coefficient is the exact optimum of its lifting
    problem.  Non-minimal covers lift to valid (weaker) inequalities and
    are allowed unless ``require_minimal``.
    """
    _require_normalized(rel)
    if require_minimal and not spec.minimal:
        raise ValueError("cover is not minimal")
    C = list(spec.cover)
    rhs = Fraction(len(C) - 1)

    # state: free 0/1 items with their current inequality coefficients
    items = [(i, Fraction(1)) for i in C]
    fixed_one = set(spec.K1)
    const = ZERO  # accumulated constants from lifted fixed-one terms

    def max_lhs(extra_load: Fraction, alpha: Fraction, include_items, skip_y=None):
        """max of current LHS over the set with given extra fixed load."""
        best = None
        load = rel.a_sum(fixed_one) + extra_load
        y_lo = ceil_frac(load - rel.a0)
        y_hi = ceil_frac(load + sum((rel.a[i] for i, p in include_items if p > 0), ZERO) - rel.a0)
        for y in range(y_lo, y_hi + 1):
            if skip_y is not None and y == skip_y:
                continue
            cap = rel.a0 + y - load
            if cap < 0:
                continue
            value = _knapsack_max(rel, include_items, cap) + const + alpha * (spec.ybar - y)
            if best is None or value > best:
                best = value
        return best

    # lift the capacity variable
    phis = {}
    restriction = [(i, Fraction(1)) for i in C]
    load = rel.a_sum(fixed_one)
    y_full = ceil_frac(load + rel.a_sum(C) - rel.a0)
    y_lo = max(ceil_frac(load - rel.a0), ceil_frac(-rel.a0))
    for y in range(y_lo, max(y_full, spec.ybar) + 2):
        cap = rel.a0 + y - load
        if cap < 0:
            continue
        phis[y] = _knapsack_max(rel, restriction, cap)
    uppers = [(rhs - phis[y]) / (spec.ybar - y) for y in phis if y < spec.ybar]
    lowers = [(phis[y] - rhs) / (y - spec.ybar) for y in phis if y > spec.ybar]
    alpha = min(uppers) if uppers else max(lowers)
    if lowers and alpha < max(lowers):
        raise ValueError("no valid linear lifting coefficient for the capacity variable")

    # lift pinned variables: fixed-zero ascending, then fixed-one ascending
    sequence = list(order) if order is not None else sorted(spec.K0) + sorted(spec.K1)
    if set(sequence) != spec.K0 | spec.K1:
        raise ValueError("lifting order must cover exactly the pinned variables")
    alphas = {}
    for j in sequence:
        if j in spec.K0:
            best = max_lhs(rel.a[j], alpha, items)
            aj = rhs - best if best is not None else ZERO
            alphas[j] = aj
            if aj != 0:
                items.append((j, aj))
        else:
            fixed_one.discard(j)
            best = max_lhs(ZERO, alpha, items)
            aj = rhs - best if best is not None else ZERO
            alphas[j] = aj
            const += aj
            if aj != 0:
                items.append((j, -aj))

    coefs = {i: Fraction(1) for i in C}
    for j in spec.K0:
        coefs[j] = alphas[j]
    for j in spec.K1:
        coefs[j] = -alphas[j]
    const_final = rhs - sum((alphas[j] for j in spec.K1), ZERO) - alpha * spec.ybar
    return ArcInequality(
        coefs,
        const_final,
        alpha,
        params={
            "ybar": spec.ybar,
            "C": spec.cover,
            "K0": tuple(sorted(spec.K0)),
            "K1": tuple(sorted(spec.K1)),
            "alpha_y": alpha,
            "alphas": dict(alphas),
            "minimal": spec.minimal,
        },
    )


def _knapsack_max(rel: ArcSetRelaxation, items, cap: Fraction) -> Fraction:
    """Exact 0/1 knapsack maximum; enumeration for small item counts,
    dynamic programming over the common-denominator grid otherwise."""
    live = [(i, p) for i, p in items if p > 0]
    if cap < 0:
        return ZERO
    if len(live) <= 16:
        best = ZERO
        n = len(live)
        for mask in range(1 << n):
            w = ZERO
            p = ZERO
            for t in range(n):
                if mask >> t & 1:
                    w += rel.a[live[t][0]]
                    p += live[t][1]
            if w <= cap and p > best:
                best = p
        return best
    denom = 1
    for i, _ in live:
        denom = denom * rel.a[i].denominator // math.gcd(denom, rel.a[i].denominator)
    denom = denom * cap.denominator // math.gcd(denom, cap.denominator)
    W = int(cap * denom)
    dp = [ZERO] * (W + 1)
    for i, p in live:
        w = int(rel.a[i] * denom)
        for c in range(W, w - 1, -1):
            cand = dp[c - w] + p
            if cand > dp[c]:
                dp[c] = cand
    return dp[W]


# -- mapping back to instance variables ----------------------------------------


def to_instance_cut(rel: ArcSetRelaxation, ineq: ArcInequality, family: str) -> LinearCut:
    """Express a relaxation cut over raw flow/installation variables.

    Relaxation flows are fractions of each commodity's supply, so raw
    coefficients are scaled by ``1/d_k``; the inequality flips to the
    ``>=`` orientation used by the pool.
    """
    if rel.arc is None or rel.demands is None:
        raise ValueError("relaxation lacks provenance; build it from a capacity row")
    flow = {}
    for i, coef in ineq.coefs.items():
        ki = rel.commodities[i]
        flow[(rel.arc, ki)] = -coef / rel.demands[i]
    cap = {(rel.arc, rel.facility): ineq.y_coef}
    params = dict(ineq.params)
    params["arc"] = rel.arc
    return LinearCut(flow=flow, cap=cap, rhs=-ineq.const, family=family, params=params)
