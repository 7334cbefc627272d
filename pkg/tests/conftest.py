from fractions import Fraction as F

import pytest

from netdes_cuts.arc_cuts import SPLITTABLE, UNSPLITTABLE, ArcSetRelaxation
from netdes_cuts.core import Arc, DemandMatrix, Facility, Instance


@pytest.fixture
def fs_example():
    """Splittable three-commodity arc set with coefficients (1/3, 2/3, 2/3)."""
    return ArcSetRelaxation(a=(F(1, 3), F(2, 3), F(2, 3)), a0=0, mode=SPLITTABLE)


@pytest.fixture
def fu_example():
    """Unsplittable five-commodity arc set (1/3, 1/3, 1/3, 1/2, 2/3)."""
    return ArcSetRelaxation(
        a=(F(1, 3), F(1, 3), F(1, 3), F(1, 2), F(2, 3)), a0=0, mode=UNSPLITTABLE
    )


@pytest.fixture
def star_instance():
    """Three nodes, demand 1/2 from 1 to 2, negative flow reward.

    Its cut around node 1 has two outflow arcs and one inflow arc, and the
    plain relaxation optimum is the fractional point x=y=1/2 on arc 0.
    """
    return Instance(
        nodes=[1, 2, 3],
        arcs=[Arc(1, 2), Arc(1, 3), Arc(2, 1)],
        facilities=[Facility(1, (F(1), F(1), F(1)))],
        demand=DemandMatrix({(1, 2): F(1, 2)}),
        flow_costs="-1",
    )


def make_triangle(t, cbar=0, facility_caps=(1,)):
    """Complete 3-node digraph with uniform demand ``t`` on every pair."""
    nodes = [1, 2, 3]
    pairs = [(i, j) for i in nodes for j in nodes if i != j]
    arcs = [Arc(i, j, cbar) for i, j in pairs]
    facilities = [Facility(c, tuple(F(1) for _ in arcs)) for c in facility_caps]
    return Instance(
        nodes=nodes,
        arcs=arcs,
        facilities=facilities,
        demand=DemandMatrix({p: F(t) for p in pairs}),
    )


@pytest.fixture
def triangle_half():
    return make_triangle(F(1, 2))


@pytest.fixture
def triangle_third():
    return make_triangle(F(1, 3))
