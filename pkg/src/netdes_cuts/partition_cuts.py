"""Node shrinking, metric-inequality separation, and partition-based cuts.

Shrinking a node partition gives a small instance whose valid inequalities
lift back by copying coefficients onto crossing arcs.  Two-partition
shrunk instances yield integer knapsack cover sets (iterated MIR turns
them into partition inequalities); three-partition ones yield the
total-capacity family, either by summing the six directed cut-set
inequalities or by pairing rounded metric inequalities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .core import (
    ZERO,
    Arc,
    DemandMatrix,
    Facility,
    FractionalPoint,
    Instance,
    LinearCut,
    frac,
)
from .lp import RoutingCertificate, check_feasible_routing, shortest_path_potentials
from .mir import KnapsackCoverSet, ceil_frac

# arc weights + node potentials certifying routing infeasibility; also the
# generator data of a metric inequality
MetricVector = RoutingCertificate


@dataclass(frozen=True)
class NodePartition:
    blocks: tuple[tuple[int, ...], ...]

    @classmethod
    def of(cls, *blocks: Iterable[int]) -> "NodePartition":
        return cls(tuple(tuple(b) for b in blocks))

    def validate(self, nodes: Sequence[int]) -> None:
        seen = set()
        if len(self.blocks) < 2:
            raise ValueError("a partition needs at least two blocks")
        for b in self.blocks:
            if not b:
                raise ValueError("empty partition block")
            if seen & set(b):
                raise ValueError("partition blocks overlap")
            seen |= set(b)
        if seen != set(nodes):
            raise ValueError("partition does not cover the node set")

    @property
    def p(self) -> int:
        return len(self.blocks)


@dataclass
class ShrunkInstance:
    """A p-node image of an instance with the bookkeeping to lift cuts."""

    base: Instance
    partition: NodePartition
    instance: Instance
    block_of: dict[int, int]
    arc_groups: dict[int, tuple[int, ...]] = field(default_factory=dict)

    def shrunk_commodity_of_block(self, block: int) -> int | None:
        for ki, com in enumerate(self.instance.commodities):
            if com.source == block:
                return ki
        return None


def shrink(instance: Instance, partition: NodePartition) -> ShrunkInstance:
    """Aggregate nodes blockwise: capacities and demands sum over crossings."""
    partition.validate(instance.nodes)
    block_of = {}
    for bi, block in enumerate(partition.blocks):
        for node in block:
            block_of[node] = bi

    cap: dict[tuple[int, int], Fraction] = {}
    groups: dict[tuple[int, int], list[int]] = {}
    cost_sum: dict[tuple[int, int], list[Fraction]] = {}
    n_fac = len(instance.facilities)
    for ai, arc in enumerate(instance.arcs):
        bi, bj = block_of[arc.tail], block_of[arc.head]
        if bi == bj:
            continue
        cap[(bi, bj)] = cap.get((bi, bj), ZERO) + arc.existing_capacity
        groups.setdefault((bi, bj), []).append(ai)
        costs = cost_sum.setdefault((bi, bj), [ZERO] * n_fac)
        for mi, f in enumerate(instance.facilities):
            costs[mi] += f.costs[ai]

    demand = DemandMatrix()
    for i, j, amount in instance.demand.pairs():
        bi, bj = block_of[i], block_of[j]
        if bi != bj:
            demand.set(bi, bj, demand.t(bi, bj) + amount)

    arcs = [Arc(i, j, cap[(i, j)]) for (i, j) in sorted(groups)]
    facilities = [
        Facility(f.capacity, tuple(cost_sum[a.pair][mi] for a in arcs))
        for mi, f in enumerate(instance.facilities)
    ]
    small = Instance(
        nodes=list(range(partition.p)),
        arcs=arcs,
        facilities=facilities,
        demand=demand,
        flow_costs=ZERO,
        mode="aggregated",
        name=f"{instance.name}/shrunk{partition.p}",
    )
    arc_groups = {
        small.arc_index[pair]: tuple(idxs) for pair, idxs in groups.items()
    }
    return ShrunkInstance(
        base=instance,
        partition=partition,
        instance=small,
        block_of=block_of,
        arc_groups=arc_groups,
    )


def lift_cut(cut: LinearCut, shrunk: ShrunkInstance) -> LinearCut:
    """Copy a shrunk-space cut onto the original network.

    Capacity coefficients replicate over every original arc in the
    crossing group; flow coefficients replicate additionally over every
    original commodity whose source lies in the shrunk commodity's block.
    The attached report states the conditions under which facets survive
    the lift: pure capacity form, positive rhs, connected blocks.
    """
    flow = {}
    for (s_arc, s_k), coef in cut.flow.items():
        src_block = shrunk.instance.commodities[s_k].source
        originals = [
            ki
            for ki, com in enumerate(shrunk.base.commodities)
            if shrunk.block_of[com.source] == src_block
        ]
        for ai in shrunk.arc_groups[s_arc]:
            for ki in originals:
                flow[(ai, ki)] = flow.get((ai, ki), ZERO) + coef
    cap = {}
    for (s_arc, mi), coef in cut.cap.items():
        for ai in shrunk.arc_groups[s_arc]:
            cap[(ai, mi)] = cap.get((ai, mi), ZERO) + coef
    report = {
        "alpha_zero": not cut.flow,
        "rhs_positive": cut.rhs > 0,
        "blocks_connected": all(
            _weakly_connected(shrunk.base, block) for block in shrunk.partition.blocks
        ),
    }
    params = dict(cut.params)
    params["lift_report"] = report
    params["blocks"] = shrunk.partition.blocks
    return LinearCut(flow=flow, cap=cap, rhs=cut.rhs, family=cut.family, params=params)


def _weakly_connected(instance: Instance, nodes: Sequence[int]) -> bool:
    nodes = set(nodes)
    if len(nodes) <= 1:
        return True
    adj = {n: set() for n in nodes}
    for arc in instance.arcs:
        if arc.tail in nodes and arc.head in nodes:
            adj[arc.tail].add(arc.head)
            adj[arc.head].add(arc.tail)
    stack = [next(iter(nodes))]
    seen = set(stack)
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen == nodes


# -- metric inequalities --------------------------------------------------------


def metric_cut_from_vector(vector: MetricVector, instance: Instance, integral: bool = False) -> LinearCut:
    """Capacity inequality generated by (v, u); optionally integer-rounded."""
    rhs = vector.demand_side(instance) - sum(
        (instance.arcs[ai].existing_capacity * va for ai, va in vector.v.items()), ZERO
    )
    cap = {}
    for ai, va in vector.v.items():
        for mi, f in enumerate(instance.facilities):
            cap[(ai, mi)] = va * f.capacity
    if integral:
        rhs = Fraction(ceil_frac(rhs))
    return LinearCut(
        flow={},
        cap=cap,
        rhs=rhs,
        family="metric-integral" if integral else "metric",
        params={"v": dict(vector.v), "u": dict(vector.u)},
    )


def separate_metric(
    instance: Instance,
    y: Mapping[tuple[int, int], Fraction] | None = None,
    capacities: Sequence | None = None,
    witness: FractionalPoint | None = None,
    exact: bool = True,
):
    """Violated metric inequality for a capacity vector, or ``None``.

    Feasibility of the routing LP decides existence.  The Farkas
    certificate is scaled to unit total arc weight, and the potentials are
    re-derived as exact shortest-path distances under the arc weights,
    which maximizes the right-hand side and lands exactly inside the dual
    cone by construction.
    """
    feasible, cert = check_feasible_routing(
        instance, y=y, capacities=capacities, witness=witness, exact=exact
    )
    if feasible:
        return None
    total = sum(cert.v.values(), ZERO)
    if total <= 0:
        raise ValueError("instance cannot route its demands under any capacity")
    v = {ai: va / total for ai, va in cert.v.items() if va > 0}
    u = shortest_path_potentials(instance, v)
    vector = MetricVector(v=v, u=u)
    cut = metric_cut_from_vector(vector, instance)
    if capacities is None:
        caps = [instance.arc_capacity(ai, y or {}) for ai in range(len(instance.arcs))]
    else:
        caps = [frac(c) for c in capacities]
    violation = vector.demand_side(instance) - vector.capacity_side(instance, caps)
    if violation <= 0:
        if exact:
            raise AssertionError("certificate lost its violation after tightening")
        return separate_metric(instance, y=y, capacities=capacities, exact=True)
    return vector, cut


def integral_metric_cut(vector: MetricVector, instance: Instance) -> LinearCut:
    """Rounded metric inequality; requires integral generator data."""
    if any(va.denominator != 1 for va in vector.v.values()) or any(
        uv.denominator != 1 for uv in vector.u.values()
    ):
        raise ValueError("integral rounding needs integral (v, u)")
    if not instance.integral_capacities():
        raise ValueError("integral rounding needs integer facility sizes")
    return metric_cut_from_vector(vector, instance, integral=True)


# -- knapsack covers and partition inequalities ----------------------------------


def knapsack_cover_from_two_partition(shrunk: ShrunkInstance) -> KnapsackCoverSet | None:
    """Crossing-capacity requirement of a 2-block shrunk instance.

    The demand from block 0 into block 1 minus existing crossing capacity
    must be covered by installed units: ``sum c_m z_m >= b`` with ``z_m``
    standing for the total count of facility m on crossing arcs.
    """
    if shrunk.partition.p != 2:
        raise ValueError("expected a two-block partition")
    if not shrunk.base.integral_capacities():
        raise ValueError("knapsack covers need integer facility sizes")
    small = shrunk.instance
    b = small.demand.t(0, 1) - (
        small.arcs[small.arc_index[(0, 1)]].existing_capacity
        if (0, 1) in small.arc_index
        else ZERO
    )
    if b <= 0:
        return None
    return KnapsackCoverSet(
        capacities=tuple(int(f.capacity) for f in small.facilities),
        rhs=b,
    )


def expand_knapsack_cut(
    ineq, shrunk: ShrunkInstance, family: str = "partition"
) -> LinearCut | None:
    """Map a cover-set inequality ``sum alpha_m z_m >= beta`` onto arcs."""
    if (0, 1) not in shrunk.instance.arc_index:
        return None
    group = shrunk.arc_groups[shrunk.instance.arc_index[(0, 1)]]
    cap = {}
    for mi, coef in ineq.integ.items():
        if coef == 0:
            continue
        for ai in group:
            cap[(ai, mi)] = coef
    if not cap:
        return None
    return LinearCut(
        flow={},
        cap=cap,
        rhs=ineq.rhs,
        family=family,
        params={"blocks": shrunk.partition.blocks},
    )


# -- three-partition total-capacity cuts -----------------------------------------


@dataclass
class ThreePartitionData:
    """Per-block surpluses and the six directed metric right-hand sides."""

    s: tuple[Fraction, Fraction, Fraction]  # outgoing traffic minus capacity
    t: tuple[Fraction, Fraction, Fraction]  # incoming traffic minus capacity
    d: dict[tuple[int, int], Fraction]


def three_partition_data(shrunk: ShrunkInstance) -> ThreePartitionData:
    small = shrunk.instance
    if shrunk.partition.p != 3:
        raise ValueError("expected a three-block partition")

    def tt(i, j):
        return small.demand.t(i, j)

    def cc(i, j):
        if (i, j) in small.arc_index:
            return small.arcs[small.arc_index[(i, j)]].existing_capacity
        return ZERO

    s = tuple(
        sum((tt(i, j) - cc(i, j) for j in range(3) if j != i), ZERO) for i in range(3)
    )
    t = tuple(
        sum((tt(j, i) - cc(j, i) for j in range(3) if j != i), ZERO) for i in range(3)
    )
    d = {}
    for i, j in ((0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)):
        h = 3 - i - j
        d[(i, j)] = (tt(i, j) + tt(i, h) + tt(j, h)) - (cc(i, j) + cc(i, h) + cc(j, h))
    return ThreePartitionData(s=s, t=t, d=d)


def _total_capacity_lhs(shrunk: ShrunkInstance) -> dict:
    cap = {}
    for s_arc, group in shrunk.arc_groups.items():
        for mi, f in enumerate(shrunk.base.facilities):
            for ai in group:
                cap[(ai, mi)] = f.capacity
    return cap


def three_partition_cut(instance: Instance, partition: NodePartition) -> LinearCut | None:
    """Half-sum of the six directed cut-set inequalities, rounded when odd.

    Every crossing capacity variable appears in exactly two of the six
    single-block cut-set inequalities, so their sum has left-hand side
    ``2 sum c_m y``; an odd right-hand side strengthens under division by
    two.  Emitted in the divided normal form either way.
    """
    if not instance.integral_capacities():
        raise ValueError("total-capacity cuts need integer facility sizes")
    shrunk = shrink(instance, partition)
    data = three_partition_data(shrunk)
    total = sum(ceil_frac(v) for v in data.s) + sum(ceil_frac(v) for v in data.t)
    cap = _total_capacity_lhs(shrunk)
    if not cap:
        return None
    rounded = total % 2 == 1
    rhs = Fraction(math.ceil(Fraction(total, 2)))
    return LinearCut(
        flow={},
        cap=cap,
        rhs=rhs,
        family="threepartition",
        params={
            "blocks": partition.blocks,
            "s": data.s,
            "t": data.t,
            "sum": total,
            "rounded": rounded,
        },
    )


def three_partition_metric_cut(instance: Instance, partition: NodePartition) -> LinearCut | None:
    """Total-capacity cut from paired rounded metric inequalities.

    The six 0/1 generator vectors pair into three complementary couples;
    adding the two couples with the largest rounded right-hand sides and
    halving gives a cut with the same left-hand side as the cut-set sum,
    possibly stronger, possibly weaker.
    """
    if not instance.integral_capacities():
        raise ValueError("total-capacity cuts need integer facility sizes")
    shrunk = shrink(instance, partition)
    data = three_partition_data(shrunk)
    pair_sums = []
    for (i, j), (k, l) in (((0, 1), (2, 1)), ((1, 0), (2, 0)), ((0, 2), (1, 2))):
        pair_sums.append(ceil_frac(data.d[(i, j)]) + ceil_frac(data.d[(k, l)]))
    pair_sums.sort(reverse=True)
    rhs = Fraction(math.ceil(Fraction(pair_sums[0] + pair_sums[1], 2)))
    cap = _total_capacity_lhs(shrunk)
    if not cap:
        return None
    return LinearCut(
        flow={},
        cap=cap,
        rhs=max(rhs, ZERO),
        family="threepartition-metric",
        params={"blocks": partition.blocks, "pair_sums": tuple(pair_sums), "d": dict(data.d)},
    )


def select_total_capacity_cut(candidates: Sequence[LinearCut]) -> LinearCut:
    """Keep the strongest of same-left-hand-side total-capacity cuts."""
    if not candidates:
        raise ValueError("no candidates")
    first = candidates[0]
    for cut in candidates[1:]:
        if cut.cap != first.cap or cut.flow != first.flow:
            raise ValueError("total-capacity candidates must share their left-hand side")
    return max(candidates, key=lambda cut: cut.rhs)


def knapsack_from_total_capacity(cut: LinearCut, instance: Instance) -> tuple[KnapsackCoverSet, dict] | None:
    """Cover set over per-facility totals implied by a total-capacity cut.

    Feeds iterated MIR; returns the cover set plus the arc support of each
    facility variable so resulting inequalities can be expanded back.
    """
    support: dict[int, list[int]] = {}
    for (ai, mi), coef in cut.cap.items():
        if coef != instance.facilities[mi].capacity:
            return None
        support.setdefault(mi, []).append(ai)
    if len(support) != len(instance.facilities) or cut.rhs <= 0:
        return None
    return (
        KnapsackCoverSet(
            capacities=tuple(int(f.capacity) for f in instance.facilities),
            rhs=cut.rhs,
        ),
        {mi: tuple(ais) for mi, ais in support.items()},
    )


# -- partition generators ---------------------------------------------------------


def all_three_partitions(nodes: Sequence[int], cap: int = 7):
    """Every unordered partition into three nonempty blocks (small n only)."""
    nodes = list(nodes)
    n = len(nodes)
    if n > cap:
        raise ValueError("exhaustive three-partition enumeration is capped")
    seen = set()
    for assign in range(3**n):
        blocks = ([], [], [])
        a = assign
        for node in nodes:
            blocks[a % 3].append(node)
            a //= 3
        if any(not b for b in blocks):
            continue
        key = frozenset(frozenset(b) for b in blocks)
        if key in seen:
            continue
        seen.add(key)
        yield NodePartition.of(*blocks)
