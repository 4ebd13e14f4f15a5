"""Elementary move rewrites, pinned edge by edge, plus the trace algebra."""

import random

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from reebkit.enumerate import enumerate_cores, enumerate_good_graphs
from reebkit.errors import IllegalDirection, NotInvertible, SiteStale
from reebkit.graph import ReebGraph, betti, is_good_orientation, require_good_orientation
from reebkit.moves import (
    FORWARD,
    MOVE_KINDS,
    REVERSE,
    TWO_SIDED,
    MoveInstance,
    apply_move,
    invert,
    match_sites,
    replay,
)

from conftest import mk

SETTINGS = settings(max_examples=120, deadline=None,
                    suppress_health_check=[HealthCheck.too_slow])


def edges_of(g: ReebGraph) -> set[tuple[str, str, str]]:
    return {(e.id, e.src, e.dst) for e in g.edges}


# ---------------------------------------------------------------------------
# frozen rewrites, one per kind
# ---------------------------------------------------------------------------


class TestPinnedRewrites:
    def test_m1_swaps_adjacent_regulars(self):
        g = mk([("a", "m", "r1"), ("b", "r1", "r2"), ("c", "r2", "M")])
        m = MoveInstance.make("M1", lower="r1", upper="r2")
        assert edges_of(apply_move(g, m)) == {
            ("a", "m", "r2"), ("b", "r2", "r1"), ("c", "r1", "M"),
        }

    def test_m2_fork_descends_past_in_strand_regular(self):
        g = mk([("a", "m1", "r"), ("b", "r", "u"), ("c", "m2", "u"), ("d", "u", "M")])
        m = MoveInstance.make("M2", fork="u", regular="r")
        assert edges_of(apply_move(g, m)) == {
            ("a", "m1", "u"), ("b", "u", "r"), ("c", "m2", "u"), ("d", "r", "M"),
        }

    def test_m2p_regular_descends_onto_chosen_in_strand(self):
        g = mk([("a", "m1", "u"), ("c", "m2", "u"), ("b", "u", "r"), ("d", "r", "M")])
        m = MoveInstance.make("M2p", fork="u", regular="r", land="a")
        assert edges_of(apply_move(g, m)) == {
            ("a", "m1", "r"), ("b", "r", "u"), ("c", "m2", "u"), ("d", "u", "M"),
        }
        # the other landing strand gives the symmetric result
        m2 = MoveInstance.make("M2p", fork="u", regular="r", land="c")
        assert edges_of(apply_move(g, m2)) == {
            ("a", "m1", "u"), ("b", "r", "u"), ("c", "m2", "r"), ("d", "u", "M"),
        }

    def test_m3_regular_descends_onto_the_in_strand(self):
        g = mk([("a", "m", "d"), ("b", "d", "r"), ("c", "d", "M2"), ("e", "r", "M1")])
        m = MoveInstance.make("M3", fork="d", regular="r")
        assert edges_of(apply_move(g, m)) == {
            ("a", "m", "r"), ("b", "r", "d"), ("c", "d", "M2"), ("e", "d", "M1"),
        }

    def test_m3p_fork_descends_regular_lands_on_chosen_out_strand(self):
        g = mk([("a", "m", "r"), ("b", "r", "d"), ("c", "d", "M1"), ("e", "d", "M2")])
        m = MoveInstance.make("M3p", fork="d", regular="r", land="c")
        assert edges_of(apply_move(g, m)) == {
            ("a", "m", "d"), ("b", "d", "r"), ("c", "r", "M1"), ("e", "d", "M2"),
        }

    def test_m4_stacked_upforks_swap_with_strand_redistribution(self):
        g = mk([("e1", "m1", "z"), ("e2", "m2", "z"), ("e3", "m3", "w"),
                ("mid", "z", "w"), ("top", "w", "M")])
        m = MoveInstance.make("M4", sigma=(1, 2, 3),
                              lower="z", upper="w", s1="e3", s2="e1", s3="e2")
        assert edges_of(apply_move(g, m)) == {
            ("e1", "m1", "w"), ("e2", "m2", "w"), ("e3", "m3", "z"),
            ("mid", "w", "z"), ("top", "z", "M"),
        }

    def test_m4_sigma_picks_which_strand_climbs(self):
        g = mk([("e1", "m1", "z"), ("e2", "m2", "z"), ("e3", "m3", "w"),
                ("mid", "z", "w"), ("top", "w", "M")])
        m = MoveInstance.make("M4", sigma=(2, 1, 3),
                              lower="z", upper="w", s1="e3", s2="e1", s3="e2")
        assert edges_of(apply_move(g, m)) == {
            ("e1", "m1", "z"), ("e2", "m2", "w"), ("e3", "m3", "w"),
            ("mid", "w", "z"), ("top", "z", "M"),
        }

    def test_m5_stacked_downforks_swap(self):
        g = mk([("bot", "m", "z"), ("mid", "z", "w"), ("e3", "z", "M3"),
                ("e1", "w", "M1"), ("e2", "w", "M2")])
        m = MoveInstance.make("M5", sigma=(1, 2, 3),
                              lower="z", upper="w", s1="e3", s2="e1", s3="e2")
        assert edges_of(apply_move(g, m)) == {
            ("bot", "m", "w"), ("mid", "w", "z"), ("e3", "w", "M3"),
            ("e1", "z", "M1"), ("e2", "z", "M2"),
        }

    def test_m5_sigma_moves_a_chosen_strand_down(self):
        g = mk([("bot", "m", "z"), ("mid", "z", "w"), ("e3", "z", "M3"),
                ("e1", "w", "M1"), ("e2", "w", "M2")])
        m = MoveInstance.make("M5", sigma=(3, 1, 2),
                              lower="z", upper="w", s1="e3", s2="e1", s3="e2")
        assert edges_of(apply_move(g, m)) == {
            ("bot", "m", "w"), ("mid", "w", "z"), ("e2", "w", "M2"),
            ("e3", "z", "M3"), ("e1", "z", "M1"),
        }

    def test_m6_forward_slides_forks_past_each_other(self):
        g = mk([("a", "m", "d"), ("mid", "d", "u"), ("c", "d", "X"),
                ("b", "m2", "u"), ("dd", "u", "Y")])
        m = MoveInstance.make("M6", down="d", up="u")
        assert edges_of(apply_move(g, m)) == {
            ("a", "m", "u"), ("mid", "u", "d"), ("c", "d", "X"),
            ("b", "m2", "u"), ("dd", "d", "Y"),
        }

    def test_m6_reverse_needs_planner_context(self):
        g = mk([("a", "m", "u"), ("mid", "u", "d"), ("c", "d", "X"),
                ("b", "m2", "u"), ("dd", "d", "Y")])
        bare = MoveInstance.make("M6", REVERSE, up="u", down="d",
                                 drop_in="a", keep_out="c")
        with pytest.raises(IllegalDirection):
            apply_move(g, bare)
        flagged = MoveInstance.make("M6", REVERSE, planner_ctx=True, up="u",
                                    down="d", drop_in="a", keep_out="c")
        assert edges_of(apply_move(g, flagged)) == {
            ("a", "m", "d"), ("mid", "d", "u"), ("c", "d", "X"),
            ("b", "m2", "u"), ("dd", "u", "Y"),
        }

    def test_m7_collapses_bigon_and_drops_betti(self):
        g = mk([("a", "m", "d"), ("b1", "d", "u"), ("b2", "d", "u"), ("c", "u", "M")])
        m = MoveInstance.make("M7", down="d", up="u", keep="b1", drop="b2")
        out = apply_move(g, m)
        assert edges_of(out) == {("a", "m", "u"), ("b1", "u", "d"), ("c", "d", "M")}
        assert betti(g) == 1 and betti(out) == 0

    def test_m8_forward_cancels_min_against_upfork(self):
        g = mk([("ctx", "m1", "u"), ("stem", "m2", "u"), ("out", "u", "M")])
        m = MoveInstance.make("M8", min="m2", fork="u",
                              stem="stem", context_in="ctx", out="out")
        out = apply_move(g, m)
        assert edges_of(out) == {("ctx", "m1", "M")}
        assert set(out.vertices) == {"m1", "M"}

    def test_m8_reverse_inserts_a_fresh_pair(self):
        g = mk([("e0", "m", "M")])
        m = MoveInstance.make("M8", REVERSE, edge="e0",
                              fresh={"min": "t0", "fork": "t1", "stem": "t2", "out": "t3"})
        assert edges_of(apply_move(g, m)) == {
            ("e0", "m", "t1"), ("t2", "t0", "t1"), ("t3", "t1", "M"),
        }

    def test_m9_forward_cancels_max_against_downfork(self):
        g = mk([("inn", "m", "d"), ("stem", "d", "M1"), ("ctx", "d", "M2")])
        m = MoveInstance.make("M9", max="M1", fork="d", stem="stem",
                              context_out="ctx", **{"in": "inn"})
        out = apply_move(g, m)
        assert edges_of(out) == {("ctx", "m", "M2")}

    def test_m9_reverse_inserts_a_fresh_pair(self):
        g = mk([("e0", "m", "M")])
        m = MoveInstance.make("M9", REVERSE, edge="e0",
                              fresh={"max": "t0", "fork": "t1", "stem": "t2", "in": "t3"})
        assert edges_of(apply_move(g, m)) == {
            ("e0", "t1", "M"), ("t2", "t1", "t0"), ("t3", "m", "t1"),
        }


# ---------------------------------------------------------------------------
# guard rails
# ---------------------------------------------------------------------------


def test_one_sided_moves_refuse_reverse():
    g = mk([("a", "m1", "r"), ("b", "r", "u"), ("c", "m2", "u"), ("d", "u", "M")])
    for kind in ("M1", "M2", "M2p", "M3", "M3p", "M7"):
        with pytest.raises(IllegalDirection):
            apply_move(g, MoveInstance.make(kind, REVERSE, fork="u", regular="r"))
    assert match_sites(g, "M2", REVERSE) == []
    assert match_sites(g, "M7", REVERSE) == []


def test_stale_site_is_reported():
    g = mk([("a", "m", "r1"), ("b", "r1", "r2"), ("c", "r2", "M")])
    m = MoveInstance.make("M1", lower="r1", upper="r2")
    moved = apply_move(g, m)
    with pytest.raises(SiteStale):
        apply_move(moved, m)  # r1 is no longer below r2
    with pytest.raises(SiteStale):
        apply_move(g, MoveInstance.make("M1", lower="r1", upper="ghost"))


def test_sigma_is_validated():
    g = mk([("e1", "m1", "z"), ("e2", "m2", "z"), ("e3", "m3", "w"),
            ("mid", "z", "w"), ("top", "w", "M")])
    bad = MoveInstance.make("M4", sigma=(1, 1, 3),
                            lower="z", upper="w", s1="e3", s2="e1", s3="e2")
    with pytest.raises(SiteStale):
        apply_move(g, bad)
    wrong_strand = MoveInstance.make("M4", sigma=(1, 2, 3),
                                     lower="z", upper="w", s1="e1", s2="e3", s3="e2")
    with pytest.raises(SiteStale):
        apply_move(g, wrong_strand)


def test_m8_reverse_rejects_taken_ids():
    g = mk([("e0", "m", "M")])
    clash = MoveInstance.make("M8", REVERSE, edge="e0",
                              fresh={"min": "m", "fork": "t1", "stem": "t2", "out": "t3"})
    with pytest.raises(SiteStale):
        apply_move(g, clash)


def test_replay_reports_failing_step_index():
    g = mk([("a", "m", "r1"), ("b", "r1", "r2"), ("c", "r2", "M")])
    good = MoveInstance.make("M1", lower="r1", upper="r2")
    with pytest.raises(SiteStale) as exc:
        replay(g, (good, good))
    assert exc.value.step_index == 1


def test_moves_drop_levels_and_keep_markers():
    g = mk([("a", "m", "r1"), ("b", "r1", "r2"), ("c", "r2", "M")],
           markers={"r1"})
    g = g.with_levels({"m": 0, "r1": 1, "r2": 2, "M": 3})
    out = apply_move(g, MoveInstance.make("M1", lower="r1", upper="r2"))
    assert out.levels is None
    assert out.markers == frozenset({"r1"})


# ---------------------------------------------------------------------------
# site discovery
# ---------------------------------------------------------------------------


class TestMatchSites:
    def test_m4_emits_the_three_distinct_sigmas(self):
        g = mk([("e1", "m1", "z"), ("e2", "m2", "z"), ("e3", "m3", "w"),
                ("mid", "z", "w"), ("top", "w", "M")])
        sites = match_sites(g, "M4")
        # the pair sent to the new lower fork is unordered, so sigma is
        # canonicalized with sigma[1] < sigma[2]: three genuinely distinct
        # outcomes per stacked pair
        assert {s.sigma for s in sites} == {(1, 2, 3), (2, 1, 3), (3, 1, 2)}
        assert {s.direction for s in sites} == {FORWARD}
        assert len(match_sites(g, "M4", REVERSE)) == 3

    def test_m6_reverse_lists_four_choices(self):
        g = mk([("a", "m", "u"), ("mid", "u", "d"), ("c", "d", "X"),
                ("b", "m2", "u"), ("dd", "d", "Y")])
        sites = match_sites(g, "M6", REVERSE)
        assert len(sites) == 4
        assert all(not s.planner_ctx for s in sites)  # the caller opts in

    def test_m7_one_site_per_bigon_keep_is_smaller_id(self):
        g = mk([("a", "m", "d"), ("b2", "d", "u"), ("b1", "d", "u"), ("c", "u", "M")])
        (site,) = match_sites(g, "M7")
        assert site.at("keep") == "b1" and site.at("drop") == "b2"

    def test_m8_reverse_offers_every_edge(self):
        g = mk([("a", "m", "d"), ("b1", "d", "u"), ("b2", "d", "u"), ("c", "u", "M")])
        sites = match_sites(g, "M8", REVERSE)
        assert {s.at("edge") for s in sites} == {"a", "b1", "b2", "c"}
        fresh = dict(sites[0].fresh)
        assert sorted(fresh) == ["fork", "min", "out", "stem"]
        assert not any(g.has_vertex(v) for v in fresh.values())

    def test_m6_requires_the_shared_edge_to_be_the_only_climb(self):
        # v02 also reaches v04 through v03, so sliding the forks past each
        # other would close the cycle v02 -> v03 -> v04 -> v02
        g = mk([("e0", "m1", "d"), ("e1", "m2", "w"), ("e2", "d", "w"),
                ("e3", "d", "u"), ("e4", "w", "u"), ("e5", "u", "M")])
        pairs = {(s.at("down"), s.at("up")) for s in match_sites(g, "M6")}
        assert ("d", "u") not in pairs
        assert ("d", "w") in pairs  # no alternative climb there, still legal
        with pytest.raises(SiteStale):
            apply_move(g, MoveInstance.make("M6", down="d", up="u"))

    def test_parallel_pair_is_not_an_m6_site(self):
        g = mk([("a", "m", "d"), ("b1", "d", "u"), ("b2", "d", "u"), ("c", "u", "M")])
        assert match_sites(g, "M6") == []
        assert len(match_sites(g, "M7")) == 1

    def test_determinism(self):
        g = mk([("a", "m", "d"), ("b1", "d", "u"), ("b2", "d", "u"), ("c", "u", "M")])
        for kind in MOVE_KINDS:
            assert match_sites(g, kind) == match_sites(g, kind)


# ---------------------------------------------------------------------------
# invariants over the enumerated corpus
# ---------------------------------------------------------------------------


def all_legal_instances(g: ReebGraph) -> list[MoveInstance]:
    out = []
    for kind in MOVE_KINDS:
        out.extend(match_sites(g, kind))
        if kind in TWO_SIDED:
            out.extend(match_sites(g, kind, REVERSE))
    return out


@pytest.mark.parametrize("n", [4, 6])
def test_every_site_on_every_core_behaves(n):
    for g in enumerate_cores(n):
        b0 = betti(g)
        for m in all_legal_instances(g):
            out = apply_move(g, m)
            require_good_orientation(out)
            expected = b0 - 1 if (m.kind == "M7" and m.direction == FORWARD) else b0
            assert betti(out) == expected, f"{m!r} changed betti wrongly"


def test_edge_ids_survive_every_move():
    for g in enumerate_good_graphs(6, with_regulars=True):
        ids0 = {e.id for e in g.edges}
        for m in all_legal_instances(g):
            ids1 = {e.id for e in apply_move(g, m).edges}
            if m.kind == "M7":
                assert ids1 == ids0 - {m.at("drop")}
            elif m.kind in ("M8", "M9") and m.direction == FORWARD:
                assert ids1 == ids0 - {m.at("stem"), m.at("out" if m.kind == "M8" else "in")}
            elif m.kind in ("M8", "M9"):
                assert ids0 < ids1 and len(ids1 - ids0) == 2
            else:
                assert ids1 == ids0


def test_roundtrip_through_invert_on_cores():
    skipped = 0
    for g in enumerate_good_graphs(6, with_regulars=True):
        for m in all_legal_instances(g):
            if m.kind == "M7":
                with pytest.raises(NotInvertible):
                    invert(g, (m,))
                skipped += 1
                continue
            (inv,) = invert(g, (m,))
            assert replay(apply_move(g, m), (inv,)) == g, f"{m!r} then {inv!r}"
    assert skipped > 0  # the corpus does exercise the uninvertible case


def test_invert_reverses_a_whole_trace():
    g = mk([("e0", "m", "M")])
    rng = random.Random(11)
    steps = []
    cur = g
    for _ in range(25):
        options = [m for m in all_legal_instances(cur) if m.kind != "M7"]
        m = rng.choice(options)
        steps.append(m)
        cur = apply_move(cur, m)
    back = invert(g, tuple(steps))
    assert replay(cur, back) == g


def test_invert_annotates_bad_step():
    g = mk([("a", "m", "d"), ("b1", "d", "u"), ("b2", "d", "u"), ("c", "u", "M")])
    (m7,) = match_sites(g, "M7")
    ins = match_sites(g, "M8", REVERSE)[0]
    with pytest.raises(NotInvertible) as exc:
        invert(g, (ins, m7))
    assert exc.value.step_index == 1


# ---------------------------------------------------------------------------
# randomized walks (criterion-2 style, small scale)
# ---------------------------------------------------------------------------


@SETTINGS
@given(seed=st.integers(0, 2**32 - 1))
def test_random_walks_preserve_good_orientation(seed):
    rng = random.Random(seed)
    cores = enumerate_cores(6)
    cur = cores[rng.randrange(len(cores))]
    for _ in range(12):
        options = all_legal_instances(cur)
        if not options:
            break
        m = options[rng.randrange(len(options))]
        before = betti(cur)
        cur = apply_move(cur, m)
        assert is_good_orientation(cur)
        drop = 1 if (m.kind == "M7" and m.direction == FORWARD) else 0
        assert betti(cur) == before - drop
