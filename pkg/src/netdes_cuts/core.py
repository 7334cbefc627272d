"""Instance model, commodity construction and the shared cut representation.

All instance data and all cut coefficients are exact rationals
(``fractions.Fraction``).  LP solves elsewhere may run in floating point,
but anything that ends up in a cut is re-derived or re-checked exactly:
rounding steps (floors/ceilings of right-hand sides) are discontinuous,
so float-derived cuts can silently be invalid.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

# Exact scalar type used throughout the package.  Fraction already keeps
# itself reduced with a positive denominator, which is all we need.
Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)

AGGREGATED = "aggregated"
DISAGGREGATED = "disaggregated"


def frac(value) -> Fraction:
    """Coerce ints, strings like ``"3/4"`` and Fractions to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError(f"refusing to coerce float {value!r}; pass a string or Fraction")
    return Fraction(value)


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def rationalize(x: float, max_denominator: int = 10**6) -> Fraction:
    """Nearest rational with bounded denominator (continued fractions)."""
    if isinstance(x, Fraction):
        return x
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot rationalize {x}")
    return Fraction(x).limit_denominator(max_denominator)


class InstanceError(ValueError):
    """Raised when instance data violates a structural invariant."""


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    existing_capacity: Fraction = ZERO

    def __post_init__(self):
        object.__setattr__(self, "existing_capacity", frac(self.existing_capacity))
        if self.tail == self.head:
            raise InstanceError(f"self-loop arc ({self.tail},{self.head})")

    @property
    def pair(self) -> tuple[int, int]:
        return (self.tail, self.head)


@dataclass(frozen=True)
class Facility:
    """A capacity unit installable in integer multiples on each arc."""

    capacity: Fraction
    costs: tuple[Fraction, ...]  # one entry per arc, aligned with Instance.arcs

    def __post_init__(self):
        object.__setattr__(self, "capacity", frac(self.capacity))
        object.__setattr__(self, "costs", tuple(frac(c) for c in self.costs))
        if self.capacity <= 0:
            raise InstanceError(f"facility capacity {self.capacity} not positive")


class DemandMatrix:
    """Ordered-pair traffic demands ``t[i, j] >= 0`` with ``t[i, i] = 0``."""

    def __init__(self, entries: Mapping[tuple[int, int], Fraction] | None = None):
        self._t: dict[tuple[int, int], Fraction] = {}
        for (i, j), amount in (entries or {}).items():
            self.set(i, j, amount)

    def set(self, i: int, j: int, amount) -> None:
        amount = frac(amount)
        if i == j:
            if amount != 0:
                raise InstanceError(f"diagonal demand t[{i},{i}] must be zero")
            return
        if amount < 0:
            raise InstanceError(f"negative demand t[{i},{j}] = {amount}")
        if amount == 0:
            self._t.pop((i, j), None)
        else:
            self._t[(i, j)] = amount

    def t(self, i: int, j: int) -> Fraction:
        return self._t.get((i, j), ZERO)

    def pairs(self) -> list[tuple[int, int, Fraction]]:
        return [(i, j, v) for (i, j), v in sorted(self._t.items())]

    def total(self) -> Fraction:
        return sum(self._t.values(), ZERO)

    def out_of(self, i: int) -> Fraction:
        return sum((v for (s, _), v in self._t.items() if s == i), ZERO)

    def __eq__(self, other):
        return isinstance(other, DemandMatrix) and self._t == other._t


@dataclass(frozen=True)
class Commodity:
    """One supply node plus the net demand it induces at every node.

    ``net_demand[i]`` is positive where the commodity must be delivered and
    equals minus the total shipped amount at the source, so the entries sum
    to zero.
    """

    source: int
    net_demand: Mapping[int, Fraction]
    sink: int | None = None  # set for pair (disaggregated) commodities

    @property
    def total_supply(self) -> Fraction:
        return -self.net_demand[self.source]

    def w(self, node: int) -> Fraction:
        return self.net_demand.get(node, ZERO)


def build_aggregated_commodities(demand: DemandMatrix, nodes: Sequence[int]) -> list[Commodity]:
    """One commodity per node with positive outgoing demand."""
    out = []
    for k in nodes:
        total = demand.out_of(k)
        if total == 0:
            continue
        w = {i: demand.t(k, i) for i in nodes if i != k and demand.t(k, i) != 0}
        w[k] = -total
        out.append(Commodity(source=k, net_demand=w))
    return out


def build_disaggregated_commodities(demand: DemandMatrix, nodes: Sequence[int]) -> list[Commodity]:
    """One commodity per ordered pair with positive demand."""
    out = []
    for i, j, amount in demand.pairs():
        out.append(Commodity(source=i, net_demand={i: -amount, j: amount}, sink=j))
    return out


def installation_cost(z, c1, c2, d1, d2) -> Fraction:
    """Least cost of covering ``z`` units with two facility sizes.

    Exact integer-programming minimum of ``d1*y1 + d2*y2`` subject to
    ``c1*y1 + c2*y2 >= z`` over nonnegative integers.  Requires ``c1 < c2``
    and economies of scale ``d1/c1 > d2/c2``.
    """
    z, c1, c2, d1, d2 = frac(z), frac(c1), frac(c2), frac(d1), frac(d2)
    if z < 0:
        raise ValueError(f"negative capacity requirement {z}")
    if not (0 < c1 < c2):
        raise ValueError("facility sizes must satisfy 0 < c1 < c2")
    if d1 / c1 <= d2 / c2:
        raise ValueError("expected economies of scale d1/c1 > d2/c2")
    if z == 0:
        return ZERO
    best = None
    for y2 in range(math.ceil(z / c2) + 1):
        rest = z - c2 * y2
        y1 = max(0, math.ceil(rest / c1))
        cost = d1 * y1 + d2 * y2
        if best is None or cost < best:
            best = cost
    return best


class Instance:
    """A directed network design instance.

    Flow variables are implicitly bounded above by their commodity's total
    supply; the oracles and the LP relaxation both enforce that, which is
    what makes single-arc relaxation cuts valid in the presence of cycles.
    """

    def __init__(
        self,
        nodes: Sequence[int],
        arcs: Sequence[Arc],
        facilities: Sequence[Facility],
        demand: DemandMatrix,
        flow_costs=ZERO,
        mode: str = AGGREGATED,
        unsplittable: bool = False,
        name: str = "",
    ):
        self.nodes = tuple(nodes)
        self.arcs = tuple(self._merge_parallel(arcs))
        self.facilities = tuple(facilities)
        self.demand = demand
        self.mode = mode
        self.unsplittable = unsplittable
        self.name = name

        self.node_index = {v: i for i, v in enumerate(self.nodes)}
        self.arc_index = {a.pair: i for i, a in enumerate(self.arcs)}
        self.out_arcs = {v: [] for v in self.nodes}
        self.in_arcs = {v: [] for v in self.nodes}
        for ai, a in enumerate(self.arcs):
            self.out_arcs[a.tail].append(ai)
            self.in_arcs[a.head].append(ai)

        if mode == AGGREGATED:
            self.commodities = tuple(build_aggregated_commodities(demand, self.nodes))
        elif mode == DISAGGREGATED:
            self.commodities = tuple(build_disaggregated_commodities(demand, self.nodes))
        else:
            raise InstanceError(f"unknown commodity mode {mode!r}")

        self.flow_costs = self._expand_flow_costs(flow_costs)

    @staticmethod
    def _merge_parallel(arcs: Iterable[Arc]) -> list[Arc]:
        merged: dict[tuple[int, int], Arc] = {}
        for a in arcs:
            if a.pair in merged:
                prev = merged[a.pair]
                merged[a.pair] = Arc(a.tail, a.head, prev.existing_capacity + a.existing_capacity)
            else:
                merged[a.pair] = a
        return list(merged.values())

    def _expand_flow_costs(self, spec) -> tuple[tuple[Fraction, ...], ...]:
        """Expand a flow-cost spec to a full (arc, commodity) table.

        Accepts a scalar, a per-arc sequence of scalars, a per-arc
        sequence of mappings keyed by commodity source node, or a per-arc
        sequence of per-commodity sequences (commodity order is the
        instance's, which is determined by the demand matrix).
        """
        n_arcs, n_comm = len(self.arcs), len(self.commodities)
        if isinstance(spec, (int, str, Fraction)):
            v = frac(spec)
            return tuple(tuple(v for _ in range(n_comm)) for _ in range(n_arcs))
        spec = list(spec)
        if len(spec) != n_arcs:
            raise InstanceError(f"flow cost list has {len(spec)} entries for {n_arcs} arcs")
        table = []
        for entry in spec:
            if isinstance(entry, Mapping):
                table.append(
                    tuple(
                        frac(entry.get(c.source, entry.get(str(c.source), 0)))
                        for c in self.commodities
                    )
                )
            elif isinstance(entry, (list, tuple)):
                if len(entry) != n_comm:
                    raise InstanceError(
                        f"per-commodity cost list has {len(entry)} entries for {n_comm} commodities"
                    )
                table.append(tuple(frac(v) for v in entry))
            else:
                v = frac(entry)
                table.append(tuple(v for _ in range(n_comm)))
        return tuple(table)

    # -- derived quantities ------------------------------------------------

    def facility_capacities(self) -> tuple[Fraction, ...]:
        return tuple(f.capacity for f in self.facilities)

    def commodity_supply(self, ki: int) -> Fraction:
        return self.commodities[ki].total_supply

    def arc_capacity(self, ai: int, y: Mapping[tuple[int, int], Fraction]) -> Fraction:
        """Total capacity of arc ``ai`` under installation vector ``y``."""
        cap = self.arcs[ai].existing_capacity
        for mi, f in enumerate(self.facilities):
            cap += f.capacity * y.get((ai, mi), ZERO)
        return cap

    def integral_capacities(self) -> bool:
        return all(f.capacity.denominator == 1 for f in self.facilities)


def validate_instance(instance: Instance) -> list[str]:
    """Return an itemized list of invariant violations (empty when ok)."""
    errors = []
    seen = set()
    for a in instance.arcs:
        if a.tail not in instance.node_index or a.head not in instance.node_index:
            errors.append(f"arc ({a.tail},{a.head}) references unknown node")
        if a.existing_capacity < 0:
            errors.append(f"arc ({a.tail},{a.head}) has negative existing capacity")
        if a.pair in seen:
            errors.append(f"duplicate arc ({a.tail},{a.head})")
        seen.add(a.pair)
    caps = instance.facility_capacities()
    for c_prev, c_next in zip(caps, caps[1:]):
        if c_prev >= c_next:
            errors.append(f"facility capacities not increasing: {c_prev} >= {c_next}")
    for mi, f in enumerate(instance.facilities):
        if len(f.costs) != len(instance.arcs):
            errors.append(f"facility {mi} has {len(f.costs)} costs for {len(instance.arcs)} arcs")
        if any(c < 0 for c in f.costs):
            errors.append(f"facility {mi} has a negative installation cost")
    for (i, j), v in instance.demand._t.items():
        if i not in instance.node_index or j not in instance.node_index:
            errors.append(f"demand ({i},{j}) references unknown node")
        if v < 0:
            errors.append(f"negative demand t[{i},{j}]")
    for c in instance.commodities:
        if sum(c.net_demand.values(), ZERO) != 0:
            errors.append(f"commodity {c.source} balance does not sum to zero")
    if instance.unsplittable:
        if instance.mode != DISAGGREGATED:
            errors.append("unsplittable routing requires disaggregated commodities")
        if any(f < 0 for row in instance.flow_costs for f in row):
            errors.append("unsplittable routing requires nonnegative flow costs")
    for com in instance.commodities:
        reachable = {com.source}
        frontier = [com.source]
        while frontier:
            node = frontier.pop()
            for ai in instance.out_arcs.get(node, ()):
                head = instance.arcs[ai].head
                if head not in reachable:
                    reachable.add(head)
                    frontier.append(head)
        for node, w in com.net_demand.items():
            if w > 0 and node not in reachable:
                errors.append(
                    f"demand {com.source}->{node} has no directed path: unroutable"
                )
    return errors


@dataclass
class FractionalPoint:
    """Exact snapshot of an LP-relaxation solution ``(x, y)``.

    ``x`` is keyed by (arc index, commodity index) and ``y`` by (arc index,
    facility index); missing keys are zero.
    """

    x: dict[tuple[int, int], Fraction] = field(default_factory=dict)
    y: dict[tuple[int, int], Fraction] = field(default_factory=dict)

    def x_value(self, ai: int, ki: int) -> Fraction:
        return self.x.get((ai, ki), ZERO)

    def y_value(self, ai: int, mi: int) -> Fraction:
        return self.y.get((ai, mi), ZERO)

    def y_total(self, ai: int, capacities: Sequence[Fraction]) -> Fraction:
        return sum((capacities[mi] * v for (a, mi), v in self.y.items() if a == ai), ZERO)


@dataclass
class LinearCut:
    """A sparse valid inequality ``flow·x + cap·y >= rhs`` over raw variables.

    ``flow`` is keyed by (arc index, commodity index) and ``cap`` by
    (arc index, facility index).  Coefficients are exact rationals; the
    sense is fixed to ``>=``.
    """

    flow: dict[tuple[int, int], Fraction]
    cap: dict[tuple[int, int], Fraction]
    rhs: Fraction
    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.flow = {k: frac(v) for k, v in self.flow.items() if frac(v) != 0}
        self.cap = {k: frac(v) for k, v in self.cap.items() if frac(v) != 0}
        self.rhs = frac(self.rhs)
        if not self.flow and not self.cap:
            raise ValueError("cut must have at least one nonzero coefficient")

    def lhs_value(self, point: FractionalPoint) -> Fraction:
        lhs = ZERO
        for key, coef in self.flow.items():
            lhs += coef * point.x.get(key, ZERO)
        for key, coef in self.cap.items():
            lhs += coef * point.y.get(key, ZERO)
        return lhs

    def violation(self, point: FractionalPoint) -> Fraction:
        """Positive iff the point violates the cut."""
        return self.rhs - self.lhs_value(point)

    def normalized_key(self):
        """Canonical hashable form: scaled so the first coefficient is ±1."""
        items = [("x", k, v) for k, v in sorted(self.flow.items())]
        items += [("y", k, v) for k, v in sorted(self.cap.items())]
        scale = ONE / abs(items[0][2])
        return (
            tuple((kind, key, coef * scale) for kind, key, coef in items),
            self.rhs * scale,
        )

    def scaled_integral(self) -> "LinearCut":
        """Equivalent cut scaled so all coefficients are coprime integers."""
        vals = list(self.flow.values()) + list(self.cap.values()) + [self.rhs]
        denom_lcm = 1
        for v in vals:
            denom_lcm = denom_lcm * v.denominator // math.gcd(denom_lcm, v.denominator)
        nums = [abs(int(v * denom_lcm)) for v in vals if v != 0]
        g = 0
        for n in nums:
            g = math.gcd(g, n)
        scale = Fraction(denom_lcm, g or 1)
        return LinearCut(
            {k: v * scale for k, v in self.flow.items()},
            {k: v * scale for k, v in self.cap.items()},
            self.rhs * scale,
            self.family,
            dict(self.params),
        )

    def __str__(self):
        terms = [f"{format_rational(c)}*x[{a},{k}]" for (a, k), c in sorted(self.flow.items())]
        terms += [f"{format_rational(c)}*y[{a},{m}]" for (a, m), c in sorted(self.cap.items())]
        return " + ".join(terms) + f" >= {format_rational(self.rhs)}"


# -- instance file format ----------------------------------------------------


def instance_to_dict(instance: Instance) -> dict:
    arcs = [
        {"tail": a.tail, "head": a.head, "existing_capacity": format_rational(a.existing_capacity)}
        for a in instance.arcs
    ]
    facilities = [
        {"capacity": format_rational(f.capacity), "cost": [format_rational(c) for c in f.costs]}
        for f in instance.facilities
    ]
    demands = [
        {"from": i, "to": j, "amount": format_rational(v)} for i, j, v in instance.demand.pairs()
    ]
    flow_costs = [
        [format_rational(instance.flow_costs[ai][ki]) for ki in range(len(instance.commodities))]
        for ai in range(len(instance.arcs))
    ]
    return {
        "name": instance.name,
        "commodity_mode": instance.mode,
        "unsplittable": instance.unsplittable,
        "nodes": list(instance.nodes),
        "arcs": arcs,
        "facilities": facilities,
        "demands": demands,
        "flow_costs": flow_costs,
    }


def instance_from_dict(data: Mapping) -> Instance:
    arcs = [
        Arc(a["tail"], a["head"], frac(a.get("existing_capacity", 0))) for a in data["arcs"]
    ]
    facilities = [
        Facility(frac(f["capacity"]), tuple(frac(c) for c in f["cost"])) for f in data["facilities"]
    ]
    demand = DemandMatrix()
    for d in data.get("demands", []):
        demand.set(d["from"], d["to"], frac(d["amount"]))
    return Instance(
        nodes=data["nodes"],
        arcs=arcs,
        facilities=facilities,
        demand=demand,
        flow_costs=data.get("flow_costs", ZERO),
        mode=data.get("commodity_mode", AGGREGATED),
        unsplittable=data.get("unsplittable", False),
        name=data.get("name", ""),
    )


def load_instance(path) -> Instance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


def save_instance(instance: Instance, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(instance), fh, indent=2)
        fh.write("\n")
