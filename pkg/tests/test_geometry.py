from __future__ import annotations

import itertools
import json
from collections import Counter

import numpy as np
import pytest
from shapely.geometry import Point, Polygon

from rhombforge.cyclotomic import CycloInt, DomainError
from rhombforge.edge import edge_polyline, has_loops, inflation_factor, multiset, partial_sums, validate
from rhombforge.geometry import (
    VARIANTS,
    DegenerateProbe,
    build_substitution_tile,
    coverage_many,
    expand_edge,
    grow,
    mirror_patch,
    patch_from_json,
    patch_to_json,
    prototile,
    rhomb_corners,
    sample_probes,
    signed_coverage,
    substitute,
    variant_arrows,
    winding_number,
    worm_decompose,
)
from rhombforge.spectra import tile_counts

from conftest import random_sequences


def shp(tile) -> Polygon:
    return Polygon([(z.real, z.imag) for z in (v.complex_value() for v in tile.vertices())])


def oracle_coverage(patch, probes) -> np.ndarray:
    polys = [(shp(t), t.sign) for t in patch.tiles if not t.degenerate]
    out = []
    for z in probes:
        pt = Point(z.real, z.imag)
        out.append(sum(sgn for poly, sgn in polys if poly.contains(pt)))
    return np.array(out)


def sin2i(n: int, s: int) -> CycloInt:
    return CycloInt.zeta(4 * n, 2 * s) - CycloInt.zeta(4 * n, -2 * s)


def chain_boundary(patch) -> Counter:
    """Tile edges that do not cancel against an oppositely oriented copy.

    Vertices run a -> a+p -> a+p+q -> a+q, which is already clockwise for
    negative tiles, so the signed chain needs no extra flip.
    """
    c: Counter = Counter()
    for t in patch.tiles:
        v = t.vertices()
        for i in range(4):
            a, b = v[i], v[(i + 1) % 4]
            if a == b:
                continue
            if c[(b, a)] > 0:
                c[(b, a)] -= 1
            else:
                c[(a, b)] += 1
    return +c


def traced_boundary(patch) -> Counter:
    pts = patch.boundary.points()
    c: Counter = Counter()
    for a, b in zip(pts, pts[1:]):
        if c[(b, a)] > 0:
            c[(b, a)] -= 1
        else:
            c[(a, b)] += 1
    return +c


# -- substitution tiles -------------------------------------------------------------


def test_grid_examples_n9():
    e = validate(9, [1, -1])
    t4 = build_substitution_tile(e, 4)
    assert [t.s for t in t4.tiles] == [4, 6, 2, 4]
    assert all(t.sign > 0 for t in t4.tiles)
    t0 = build_substitution_tile(e, 0)
    assert [t.s for t in t0.tiles] == [0, 2, 16, 0]
    assert t0.area2i().is_zero()
    t9 = build_substitution_tile(e, 9)
    assert sorted(t.sign for t in t9.tiles if not t.degenerate) == [-1, 1]
    assert t9.area2i().is_zero()


def test_grid_vertices_are_partial_sums():
    e = validate(9, [1, 2, 3, -3, -2, -1])
    s = 7
    tile = build_substitution_tile(e, s)
    P = partial_sums(e, 0)
    Q = partial_sums(e, 2 * s)
    N = e.N
    for b, a in itertools.product(range(N), range(N)):
        t = tile.tiles[b * N + a]
        assert t.anchor == P[a] + Q[b]
        assert t.s == (s + (e.ks2[b] - e.ks2[a]) // 2) % (2 * e.n)


def test_type_inventory_matches_tile_counts():
    for e in random_sequences(60, seed=3):
        tc = tile_counts(multiset(e))
        for s in range(e.n + 1):
            got = Counter(t.s for t in build_substitution_tile(e, s).tiles)
            assert got == Counter({c: k for c, k in enumerate(tc.for_tile(s)) if k})


def test_invalid_tile_index():
    with pytest.raises(DomainError):
        build_substitution_tile(validate(5, [1, -1]), 6)


def test_substitute_example_and_identity():
    e = validate(5, [1, -1])
    p = substitute(prototile(5, 2), e, "a", annihilate_pairs=False)
    assert [t.s for t in p.tiles] == [2, 4, 0, 2]
    assert p.generation == 1 and p.variant_history == ("a",)
    straight = validate(5, [0])
    q = substitute(prototile(5, 3), straight, "a")
    assert q.tiles[0].vertices() == prototile(5, 3).tiles[0].vertices()


def test_area_conservation_multi_generation():
    for e in random_sequences(25, seed=17, N_max=4):
        L = inflation_factor(e)
        for s in (1, e.n // 2, e.n - 1):
            if s <= 0:
                continue
            for v in ("a", "b"):
                p = grow(e, s, 2, v)
                assert p.area2i() == L ** 4 * sin2i(e.n, s)


def test_boundary_matches_tile_chain_and_corners():
    cases = [((9, [1, -1]), 4), ((5, ["1/2", "-1/2"]), 2), ((7, [0, 1, -1, 0]), 3), ((9, [1, 2, -2, -1]), 5)]
    for (n, ks), s in cases:
        e = validate(n, ks)
        for v in VARIANTS:
            p = grow(e, s, 2, v, annihilate_pairs=False)
            assert chain_boundary(p) == traced_boundary(p)
            pts = p.boundary.points()
            assert pts[0] == pts[-1]
            corners = rhomb_corners(p)
            N2 = e.N**2
            assert [pts[i * N2] for i in range(4)] == corners


def test_variants_and_arrows():
    assert variant_arrows("a", 3) == (1, 1, 1)
    assert variant_arrows("b", 2) == (-1, -1)
    assert variant_arrows("c", 4) == (1, -1, 1, -1)
    assert variant_arrows("d", 2) == (-1, 1)
    assert variant_arrows("0110", 4) == (1, -1, -1, 1)
    with pytest.raises(ValueError):
        variant_arrows("01", 3)
    with pytest.raises(ValueError):
        variant_arrows("x", 2)


def test_mirror_symmetry_of_variants():
    e = validate(5, [1, -1])
    for s in range(6):
        a = grow(e, s, 2, "a")
        b = grow(e, s, 2, "b")
        assert mirror_patch(a) == a.vertex_multiset()
        assert mirror_patch(b) == b.vertex_multiset()
        c = grow(e, s, 2, "c")
        assert mirror_patch(c) != c.vertex_multiset() or s in (0, 5)


def test_transpose_switch_is_pinned_by_coverage():
    # both readings of the grid conserve area; only the untransposed one tiles the rhomb once
    for n, ks, s in [(9, [1, -1], 4), (7, [0, 1, -1, 0], 3)]:
        e = validate(n, ks)
        good = build_substitution_tile(e, s)
        bad = build_substitution_tile(e, s, transpose=True)
        assert good.area2i() == bad.area2i()
        probes = sample_probes(good, 300, seed=4)
        assert (coverage_many(good, probes)[0] == 1).all()
        assert not (coverage_many(bad, probes)[0] == 1).all()


# -- edges ----------------------------------------------------------------------


def test_expand_edge_generations():
    e = validate(5, [1, -1])
    assert expand_edge(e, 0).ks2 == (0,)
    assert expand_edge(e, 1).ks2 == e.ks2
    two = expand_edge(e, 2, "a")
    assert two.ks2 == tuple(h + g for h in e.ks2 for g in e.ks2)
    for v in VARIANTS:
        x = expand_edge(e, 4, v)
        assert x.N == 16
        assert edge_polyline(x)[-1] == inflation_factor(e) ** 4


def test_expand_edge_rotated_rule_is_reversal():
    # the reversed orientation lays the sequence backwards
    e = validate(9, [1, 2, -2, -1])
    x = expand_edge(e, 2, "b")
    assert x.ks2 == tuple(h + g for h in e.ks2 for g in e.ks2[::-1])


def test_expand_edge_per_step_list():
    e = validate(5, [1, -1])
    assert expand_edge(e, 3, ["b", "a", "a"]).ks2 != expand_edge(e, 3, "a").ks2
    with pytest.raises(ValueError):
        expand_edge(e, 3, ["a", "b"])
    with pytest.raises(ValueError):
        expand_edge(e, -1)


def test_koch_edge_is_loop_free():
    e = validate(5, [1, -1])
    k = expand_edge(e, 8, "b")
    assert k.N == 256 and not has_loops(k)


# -- coverage -------------------------------------------------------------------


def test_coverage_against_shapely():
    cases = [((9, [1, -1]), 8, "a"), ((5, [1, -1]), 1, "c"), ((9, [1, 2, 3, -3, -2, -1]), 7, "a"), ((5, ["1/2", "-1/2"]), 4, "b")]
    rng = np.random.default_rng(0)
    for (n, ks), s, v in cases:
        p = grow(validate(n, ks), s, 2 if len(ks) <= 2 else 1, v, annihilate_pairs=False)
        bf = p.boundary_float
        pts = rng.uniform(bf.real.min() - 0.5, bf.real.max() + 0.5, 600) + 1j * rng.uniform(
            bf.imag.min() - 0.5, bf.imag.max() + 0.5, 600
        )
        counts, near = coverage_many(p, pts)
        pts, counts = pts[~near], counts[~near]
        assert (counts == oracle_coverage(p, pts)).all()


def test_coverage_equals_winding_number():
    for (n, ks), s in [((9, [1, -1]), 4), ((9, [1, 2, 3, -3, -2, -1]), 7), ((5, [1, -1]), 1)]:
        p = grow(validate(n, ks), s, 2 if len(ks) <= 2 else 1, "a", annihilate_pairs=False)
        probes = sample_probes(p, 500, seed=2)
        counts, _ = coverage_many(p, probes)
        assert (counts == winding_number(p.boundary_float, probes)).all()


def test_winding_number_against_shapely():
    e = validate(9, [1, -1])
    p = grow(e, 4, 2, "b")
    poly = Polygon([(z.real, z.imag) for z in p.boundary_float])
    assert poly.is_valid
    rng = np.random.default_rng(1)
    bf = p.boundary_float
    pts = rng.uniform(bf.real.min(), bf.real.max(), 400) + 1j * rng.uniform(bf.imag.min(), bf.imag.max(), 400)
    w = winding_number(bf, pts)
    ref = np.array([poly.contains(Point(z.real, z.imag)) for z in pts])
    assert (np.abs(w) == ref.astype(int)).all()


def test_signed_coverage_examples():
    e = validate(9, [1, -1])
    t4 = build_substitution_tile(e, 4)
    centre = sum((v.complex_value() for v in rhomb_corners(t4)), 0j) / 4
    assert signed_coverage(t4, centre) == 1

    t0 = build_substitution_tile(e, 0)
    t2 = next(t for t in t0.tiles if t.s == 2)
    assert signed_coverage(t0, sum((v.complex_value() for v in t2.vertices()), 0j) / 4) == 0

    t8 = build_substitution_tile(e, 8)
    eights = [shp(t) for t in t8.tiles if t.s == 8]
    overlap = eights[0].intersection(eights[1])
    assert overlap.area > 0
    q = overlap.representative_point()
    assert signed_coverage(t8, (q.x, q.y)) == 1
    # the negative remnant left over by the subtraction tile
    neg = shp(t8.tiles[1]).difference(eights[0].union(eights[1]).union(shp(t8.tiles[2])))
    q = neg.representative_point()
    assert signed_coverage(t8, (q.x, q.y)) == -1


def test_degenerate_probe():
    p = prototile(5, 2)
    corner = p.tiles[0].vertices()[1]
    with pytest.raises(DegenerateProbe):
        signed_coverage(p, corner, attempts=0)
    assert signed_coverage(p, corner, attempts=8) in (0, 1)


def test_loop_edges_report_observed_layers():
    # n = 9, s = 4, variant a: the generation-3 boundary crosses itself near an acute corner
    e = validate(9, [1, -1])
    p = grow(e, 4, 3, "a", annihilate_pairs=False)
    poly = Polygon([(z.real, z.imag) for z in p.boundary_float])
    assert not poly.is_valid
    probes = sample_probes(p, 1000, seed=11)
    counts, _ = coverage_many(p, probes)
    assert set(counts.tolist()) == {-1, 1}
    assert (counts == winding_number(p.boundary_float, probes)).all()


def test_annihilation_removes_cancelling_pairs():
    e = validate(9, [1, -1])
    raw = grow(e, 0, 1, "a", annihilate_pairs=False)
    clean = grow(e, 0, 1, "a")
    assert len(raw) == 4 and len(clean) == 2
    assert raw.area2i() == clean.area2i()


def test_lb_odd_subset_contains_negatives():
    e = validate(5, ["1/2", "-1/2"])
    p = grow(e, 5, 3, "c")
    assert p.negative_tiles()


# -- worms ----------------------------------------------------------------------


def test_worms_small_tile():
    tile = build_substitution_tile(validate(5, [1, -1]), 2)
    worms = worm_decompose(tile)
    assert len(worms) == 2 and all(len(w.tiles) == 2 for w in worms)


@pytest.mark.parametrize("axis", ["row", "column"])
def test_worms_n9(axis):
    e = validate(9, [1, 2, 3, -3, -2, -1])
    tile = build_substitution_tile(e, 7)
    worms = worm_decompose(tile, axis)
    assert len(worms) == 6
    assert sorted(id(t) for w in worms for t in w.tiles) == sorted(id(t) for t in tile.tiles)
    for w in worms:
        off = w.offset
        assert all(u - l == off for l, u in zip(w.lower, w.upper))
        assert off * off.conjugate() == 1
        steps = [b - a for a, b in zip(w.lower, w.lower[1:])]
        assert sum(steps, CycloInt.zero(36)) == inflation_factor(e).shift(0 if axis == "row" else 14)
    assert any(t.sign < 0 for w in worms for t in w.tiles)


def test_worms_need_a_single_tile():
    with pytest.raises(ValueError):
        worm_decompose(grow(validate(5, [1, -1]), 2, 2, "a"))
    with pytest.raises(ValueError):
        worm_decompose(build_substitution_tile(validate(5, [1, -1]), 2), "diagonal")


# -- serialization --------------------------------------------------------------


def test_patch_json_roundtrip():
    p = grow(validate(7, [0, 1, -1, 0]), 3, 2, ["c", "b"])
    text = json.dumps(patch_to_json(p))
    q = patch_from_json(text)
    assert q.tiles == p.tiles
    assert q.boundary == p.boundary
    assert q.variant_history == ("c", "b")
    assert q.area2i() == p.area2i()
