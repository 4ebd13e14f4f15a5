"""Exhaustive catalogue of small good orientations.

The counts for 4 and 6 vertices were derived by hand (listing the degree
multisets and checking which wirings are connected and acyclic); larger
counts are frozen from the first verified run and guard against
regressions in the canonical-form certificate.
"""

import itertools

import pytest

from reebkit.enumerate import (
    certificate,
    enumerate_cores,
    enumerate_good_graphs,
    spread_regulars,
)
from reebkit.graph import (
    ReebGraph,
    betti,
    canonical_graph,
    initial_graph,
    iso_oriented,
    is_good_orientation,
    smooth,
)

from conftest import mk

# cores = good orientations with no regular vertices; odd sizes are empty
# because sum(indeg - outdeg) over forks/extrema forces an even count
HAND_COUNTS = {2: 1, 3: 0, 4: 3, 5: 0, 6: 13}
FROZEN_COUNTS = {8: 116, 10: 1437}


@pytest.mark.parametrize("n,count", sorted(HAND_COUNTS.items()))
def test_core_counts_small(n, count):
    assert len(enumerate_cores(n)) == count


@pytest.mark.parametrize("n,count", sorted(FROZEN_COUNTS.items()))
def test_core_counts_frozen(n, count):
    assert len(enumerate_cores(n)) == count


def test_every_core_is_good_and_regular_free():
    for n in range(2, 9):
        for g in enumerate_cores(n):
            assert is_good_orientation(g)
            assert all(g.degree(v) != 2 for v in g.vertices)
            assert g.n_vertices == n


def test_cores_are_pairwise_noniso_at_six():
    cores = enumerate_cores(6)
    for a, b in itertools.combinations(cores, 2):
        assert iso_oriented(a, b) is None


def test_reference_shapes_show_up():
    def found(target):
        s = smooth(target)
        return any(iso_oriented(g, s) for g in enumerate_cores(s.n_vertices))

    assert found(canonical_graph(2))   # 6 vertices
    assert found(initial_graph(1))     # 4 vertices: the plain bigon


def test_certificate_matches_isomorphism():
    # same certificate <=> isomorphic, across a mixed bag of relabelings
    a = mk([("x", "p", "q"), ("y", "q", "r"), ("z", "q", "r"), ("w", "r", "s")])
    b = mk([("1", "d", "c"), ("2", "c", "b"), ("3", "c", "b"), ("4", "b", "a")])
    assert certificate(a) == certificate(b)
    assert iso_oriented(a, b)
    c = mk([("x", "p", "q"), ("y", "q", "r"), ("z", "q", "r"), ("w", "r", "s")],
           markers={"p"})
    assert certificate(a) == certificate(c)  # markers are not part of the shape

    # a bigon is reversal-symmetric, so flip something chiral instead
    tripod = mk([("x", "m", "d"), ("y", "d", "M1"), ("z", "d", "M2")])
    vee = mk([("x", "d", "m"), ("y", "M1", "d"), ("z", "M2", "d")])
    assert certificate(tripod) != certificate(vee)
    assert iso_oriented(tripod, vee) is None


def test_certificate_agrees_with_iso_on_all_six_vertex_pairs():
    cores = enumerate_cores(6)
    for a, b in itertools.combinations(cores, 2):
        same = certificate(a) == certificate(b)
        assert same == (iso_oriented(a, b) is not None)


class TestDecorations:
    def test_spread_regulars_subdivides(self):
        core = mk([("e0", "m", "M")])
        g = spread_regulars(core, (2,))
        assert g.n_vertices == 4 and g.n_edges == 3
        assert betti(g) == 0
        # chain keeps the original edge id on its first segment
        assert g.has_edge("e0")
        assert smooth(g).n_edges == 1

    def test_graph_budget_is_respected(self):
        for g in enumerate_good_graphs(6):
            assert g.n_vertices <= 6
            assert is_good_orientation(g)

    def test_decorated_counts_are_stable(self):
        # 1 core on 2 vertices + regular placements up to 6 vertices:
        # the single-edge core accepts 0..4 regulars on its only chain
        only_edge = [g for g in enumerate_good_graphs(6)
                     if smooth(g).n_edges == 1 and betti(g) == 0]
        assert len(only_edge) == 5

    def test_dedup_collapses_symmetric_placements(self):
        raw = list(enumerate_good_graphs(5))
        deduped = list(enumerate_good_graphs(5, dedup=True))
        assert len(deduped) < len(raw)
        certs = {certificate(g) for g in raw}
        assert len(deduped) == len(certs)


class TestDegreeFour:
    def test_no_degree_four_without_opting_in(self):
        for g in enumerate_cores(5):
            assert all(g.degree(v) <= 3 for v in g.vertices)
        assert enumerate_cores(5) == ()

    def test_smallest_degree_four_cores(self):
        five = enumerate_cores(5, max_degree=4)
        assert len(five) > 0
        assert any(max(g.degree(v) for v in g.vertices) == 4 for g in five)
        # the cross: two minima into a (2,2)-vertex feeding two maxima
        cross = mk([("a", "m1", "x"), ("b", "m2", "x"),
                    ("c", "x", "M1"), ("d", "x", "M2")])
        assert any(iso_oriented(g, cross) for g in five)

    def test_triple_edge_appears_at_four(self):
        four = enumerate_cores(4, max_degree=4)
        trip = mk([("a", "m", "x"), ("b", "x", "u"), ("c", "x", "u"),
                   ("d", "x", "u"), ("e", "u", "M")])
        assert any(iso_oriented(g, trip) for g in four)
        # the three degree<=3 classes plus the triple edge
        assert len(four) == 4
