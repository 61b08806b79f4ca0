import json

import pytest

from orbitforge.covering import (Piece, _edge, _explore, build_band_alphabet, build_covering_graph,
                                 chain_walk, find_closed_subchain, find_orbit, iterate_until_covers,
                                 locate_periodic_orbit, replay_cycle, replay_edge, seed_pieces)
from orbitforge.errors import GrowthFailure, IncompleteGraphError, InvalidInputError, NonHyperbolicOrbit
from orbitforge.geometry import Band, Curve
from orbitforge.models import appendix_composite, geo_lorenz, identity_map, tent_map

from oracles import brute_force_covers, symbolic_lorenz_orbits

# frozen from the symbolic oracle for mu = 1.9, word (-, -, -, +)
GEO_PERIOD4_LEAVES = [-0.944889088355, -0.795289267875, -0.511049608963, 0.0290057429709]


def test_geo_lorenz_alphabet():
    al = build_band_alphabet(geo_lorenz(mu=1.9))
    assert al.endpoints[0] == pytest.approx((-1.0, -0.9, 0.9, 1.0))
    assert len(al.bands) == 6
    assert al.dropped == ()
    tags = al.provenance[(0, -1.0)]
    assert "L-" in tags and "L0+" in tags


def test_alphabet_drops_tiny_bands():
    al = build_band_alphabet(geo_lorenz(mu=1.9), min_width=0.15)
    assert len(al.dropped) == 2
    assert all(b.width >= 0.15 for b in al.bands)


def test_seed_pieces_split_at_cut():
    fm = geo_lorenz()
    pcs = seed_pieces(fm, Band(0, -0.9, 0.9))
    assert [(p.lo, p.hi) for p in pcs] == [(-0.9, 0.0), (0.0, 0.9)]
    assert pcs[0].reach_lo and not pcs[0].reach_hi
    assert not pcs[1].reach_lo and pcs[1].reach_hi


def test_piece_cover_respects_reach():
    b = Band(0, -0.5, 0.5)
    assert Piece(0, -0.5, 0.5, True, True).covers(b)
    assert not Piece(0, -0.5, 0.5, False, True).covers(b)
    assert Piece(0, -0.6, 0.5, False, True).covers(b)


def test_identity_has_no_growth_edges():
    fm = identity_map()
    with pytest.raises(IncompleteGraphError) as info:
        build_covering_graph(fm)
    assert len(info.value.dead_ends) == len(build_band_alphabet(fm).bands)


def test_identity_without_growth_floor_is_not_hyperbolic():
    fm = identity_map()
    g = build_covering_graph(fm, floor=0.0)
    cyc = find_closed_subchain(g)
    with pytest.raises(NonHyperbolicOrbit) as info:
        locate_periodic_orbit(fm, cyc)
    assert info.value.orbit.lambda_h == pytest.approx(1.0)


def test_tent_self_loop_and_interior_fixed_point():
    fm = tent_map()
    al = build_band_alphabet(fm)
    whole = Band(0, -1.0, 1.0)
    g = build_covering_graph(fm, al)
    assert g.edge(whole, whole) is not None
    # seeding on the right half picks the interior fixed leaf s* = 1/3
    seed = Piece(0, 0.0, 1.0, True, True)
    n, node = _explore(fm, al, seed, 4, 1.0 + 1e-6)[whole]
    e = _edge(fm, whole, whole, seed, 0.0, n, node)
    orb = locate_periodic_orbit(fm, [e])
    assert orb.period == 1
    assert orb.points[0][1] == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert orb.lambda_h == pytest.approx(2.0)


def test_geo_lorenz_graph_against_brute_force_oracle():
    fm = geo_lorenz(mu=1.9)
    al = build_band_alphabet(fm)
    g = build_covering_graph(fm, al)
    strict, loose = brute_force_covers(fm, al.bands, g.max_iters)
    assert strict
    for pair, n in strict.items():
        e = g.edge(*pair)
        assert e is not None and e.n <= n, pair
    for e in g.edges:
        assert e.n in loose.get((e.source, e.target), ()), (e.source, e.target, e.n)


def test_chain_walk_pigeonhole():
    for fm in (geo_lorenz(), appendix_composite().restrict([0]), tent_map()):
        g = build_covering_graph(fm)
        path, start = chain_walk(g)
        assert len(path) <= len(g.nodes) + 1
        cyc = path[start:]
        assert cyc[-1].target == cyc[0].source


def test_every_edge_replays():
    fm = geo_lorenz()
    g = build_covering_graph(fm)
    for e in g.edges:
        assert replay_edge(fm, e).ok, e


def test_replay_catches_a_tampered_witness():
    fm = geo_lorenz()
    g = build_covering_graph(fm)
    e = g.edges[0]
    bad = type(e)(e.source, e.target, e.n, (0, -0.5, 0.5), e.y, e.itinerary, e.image, e.stretch)
    assert not replay_edge(fm, bad).ok


def test_geo_lorenz_orbit_matches_symbolic_oracle():
    fm = geo_lorenz(mu=1.9)
    _, g, cyc, orb = find_orbit(fm)
    assert replay_cycle(fm, cyc).ok
    assert orb.period == 4 and orb.minimal_period == 4
    assert orb.leaves == pytest.approx(GEO_PERIOD4_LEAVES, abs=1e-10)
    word = tuple(-1 if s < 0 else 1 for s in orb.leaves)
    assert symbolic_lorenz_orbits(1.9, 6)[word] == pytest.approx(orb.leaves, abs=1e-10)
    assert orb.lambda_h == pytest.approx(1.9 ** 4, rel=1e-9)
    assert orb.lambda_v == pytest.approx(0.3 ** 4, rel=1e-6)
    assert orb.residual <= 1e-8


def test_appendix_top_period_three():
    fm = appendix_composite(mu_t=1.8).restrict([0])
    _, _, cyc, orb = find_orbit(fm)
    assert orb.period == 3
    assert orb.leaves == pytest.approx([-0.836092715232, -0.504966887417, 0.091059602649], abs=1e-10)
    assert orb.lambda_h == pytest.approx(1.8 ** 3, rel=1e-9)


def test_appendix_bottom_is_growth_failure():
    fm = appendix_composite().restrict([1])
    al = build_band_alphabet(fm)
    with pytest.raises(IncompleteGraphError):
        build_covering_graph(fm, al)


def test_greedy_iteration_covers_quickly():
    fm = geo_lorenz(mu=1.9)
    al = build_band_alphabet(fm)
    c = Curve.segment(0, (0.1, -0.2), (0.2, -0.17))
    sub, n, band = iterate_until_covers(fm, c, al)
    assert n <= 9
    assert band in al.bands
    lo, hi = sub.points[0, 0], sub.points[-1, 0]
    assert 0.1 <= lo < hi <= 0.2


def test_greedy_rejects_bad_curves():
    fm = geo_lorenz()
    al = build_band_alphabet(fm)
    with pytest.raises(InvalidInputError):
        iterate_until_covers(fm, Curve.segment(0, (-0.1, 0.0), (0.1, 0.0)), al)
    with pytest.raises(InvalidInputError):
        iterate_until_covers(fm, Curve.segment(0, (0.1, 0.0), (0.12, 0.5)), al)


def test_greedy_on_identity_fails_to_grow():
    fm = identity_map()
    al = build_band_alphabet(fm)
    with pytest.raises(GrowthFailure):
        iterate_until_covers(fm, Curve.segment(0, (0.1, 0.0), (0.2, 0.0)), al, max_iters=20)


def test_greedy_graph_strategy_finds_an_orbit():
    fm = geo_lorenz()
    _, g, cyc, orb = find_orbit(fm, strategy="greedy")
    assert g.strategy == "greedy"
    assert orb.lambda_h > 1 and abs(orb.lambda_v) < 1


def test_graph_json_is_stable():
    fm = geo_lorenz()
    a = json.dumps(build_covering_graph(fm).to_json(), sort_keys=True)
    b = json.dumps(build_covering_graph(fm).to_json(), sort_keys=True)
    assert a == b
    assert "digraph" in build_covering_graph(fm).to_dot()
