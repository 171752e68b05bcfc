"""Signed rhomb prototiles, substitution tiles, multi-generation patches and coverage.

Every placed tile is a parallelogram ``anchor + [0,1]*p + [0,1]*q`` with unit
vectors ``p = zeta**orient2`` and ``q = zeta**(orient2 + 2s)`` in the ring of
order 4n.  The type index s is kept modulo 2n: types in (n, 2n) have
negative area and act as subtraction tiles, types 0 and n are zero-area
lines.  The two spanning vectors double as edge arrows, which decide the
orientation in which each edge is replaced on the next substitution.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .cyclotomic import CycloInt, DomainError
from .edge import EdgeSequence, from_ks2, inflation_factor, partial_sums

EPS = 1e-9
VARIANTS = ("a", "b", "c", "d")


class DegenerateProbe(RuntimeError):
    """A coverage probe kept landing on a tile edge."""


@dataclass(frozen=True)
class SignedTile:
    n: int
    s: int
    orient2: int
    anchor: CycloInt
    generation: int = 0

    @property
    def order(self) -> int:
        return 4 * self.n

    @property
    def sign(self) -> int:
        return 1 if self.s <= self.n else -1

    @property
    def degenerate(self) -> bool:
        return self.s in (0, self.n)

    @property
    def p_dir(self) -> int:
        return self.orient2 % self.order

    @property
    def q_dir(self) -> int:
        return (self.orient2 + 2 * self.s) % self.order

    def vectors(self) -> tuple[CycloInt, CycloInt]:
        return CycloInt.zeta(self.order, self.p_dir), CycloInt.zeta(self.order, self.q_dir)

    def vertices(self) -> tuple[CycloInt, CycloInt, CycloInt, CycloInt]:
        p, q = self.vectors()
        a = self.anchor
        return a, a + p, a + p + q, a + q

    def area2i(self) -> CycloInt:
        """Exact ``2i * area``."""
        return CycloInt.zeta(self.order, 2 * self.s) - CycloInt.zeta(self.order, -2 * self.s)

    @property
    def area(self) -> float:
        return math.sin(self.s * math.pi / self.n)

    def rotated(self) -> SignedTile:
        """Same region and type with both edge arrows reversed."""
        p, q = self.vectors()
        return SignedTile(self.n, self.s, self.orient2 + 2 * self.n, self.anchor + p + q, self.generation)

    def relabeled(self) -> SignedTile:
        """Same region carried by the congruent type n - s."""
        p, _ = self.vectors()
        return SignedTile(self.n, (self.n - self.s) % (2 * self.n), self.orient2 + 2 * self.s, self.anchor + p, self.generation)


@dataclass(frozen=True)
class Boundary:
    """Closed boundary as a start point plus unit segments ``(direction, arrow)``.

    ``arrow`` is +1 when the owning tile's edge arrow points along the
    traversal and -1 otherwise; it fixes how the segment is replaced next.
    """

    order: int
    start: CycloInt
    segments: tuple[tuple[int, int], ...]

    def points(self) -> list[CycloInt]:
        pts = [self.start]
        for d, _ in self.segments:
            pts.append(pts[-1] + CycloInt.zeta(self.order, d))
        return pts

    def directions(self) -> list[int]:
        return [d for d, _ in self.segments]


@dataclass(frozen=True)
class Patch:
    n: int
    tiles: tuple[SignedTile, ...]
    boundary: Boundary
    generation: int = 0
    variant_history: tuple[str, ...] = ()
    edge: EdgeSequence | None = None
    start: SignedTile | None = None

    @property
    def order(self) -> int:
        return 4 * self.n

    def __len__(self) -> int:
        return len(self.tiles)

    def area2i(self) -> CycloInt:
        total = CycloInt.zero(self.order)
        for t in self.tiles:
            total = total + t.area2i()
        return total

    @property
    def area(self) -> float:
        return sum(t.area for t in self.tiles)

    def type_counts(self) -> Counter:
        return Counter(t.s for t in self.tiles)

    def negative_tiles(self) -> list[SignedTile]:
        return [t for t in self.tiles if t.sign < 0]

    def vertex_multiset(self) -> Counter:
        return Counter((frozenset(t.vertices()), t.sign) for t in self.tiles)

    @cached_property
    def _float_tiles(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        order = self.order
        zf = np.exp(2j * np.pi * np.arange(order) / order)
        anchors = np.array([t.anchor.complex_value() for t in self.tiles], dtype=complex)
        p = zf[[t.p_dir for t in self.tiles]] if self.tiles else np.zeros(0, complex)
        q = zf[[t.q_dir for t in self.tiles]] if self.tiles else np.zeros(0, complex)
        return anchors, p, q

    @cached_property
    def boundary_float(self) -> np.ndarray:
        return np.array([p.complex_value() for p in self.boundary.points()], dtype=complex)


# -- construction ---------------------------------------------------------------


def prototile(n: int, s: int, *, orient2: int = 0, anchor: CycloInt | None = None) -> Patch:
    """Generation-0 patch holding a single prototile T_s."""
    if not 0 <= s <= n:
        raise DomainError(f"tile index s={s} outside [0, {n}]")
    order = 4 * n
    a = anchor if anchor is not None else CycloInt.zero(order)
    t = SignedTile(n, s, orient2, a, 0)
    o = orient2
    segs = ((o, 1), (o + 2 * s, 1), (o + 2 * n, -1), (o + 2 * s + 2 * n, -1))
    segs = tuple((d % order, arrow) for d, arrow in segs)
    return Patch(n, (t,), Boundary(order, a, segs), 0, (), None, t)


def variant_arrows(variant: str | Sequence[int], N: int) -> tuple[int, ...]:
    """Edge-arrow pattern for one substitution step.

    ``a``: every constituent as laid out; ``b``: every constituent rotated
    by pi; ``c``: off-diagonal constituents carried by the congruent type
    n - t (alternating arrows starting forward); ``d``: ``c`` rotated by pi.
    A string of 0/1 of length N (1 = reversed) or a sequence of +-1 selects
    any of the 2^N orientations directly.
    """
    if isinstance(variant, str):
        v = variant.strip().lower()
        if v == "a":
            return (1,) * N
        if v == "b":
            return (-1,) * N
        if v == "c":
            return tuple(1 if i % 2 == 0 else -1 for i in range(N))
        if v == "d":
            return tuple(-1 if i % 2 == 0 else 1 for i in range(N))
        if set(v) <= {"0", "1"} and v:
            if len(v) != N:
                raise ValueError(f"orientation string {variant!r} has length {len(v)}, expected {N}")
            return tuple(1 if ch == "0" else -1 for ch in v)
        raise ValueError(f"unknown variant {variant!r}")
    arrows = tuple(int(x) for x in variant)
    if len(arrows) != N or any(x not in (1, -1) for x in arrows):
        raise ValueError(f"orientation pattern {variant!r} must be {N} entries of +-1")
    return arrows


def _variant_label(variant: str | Sequence[int]) -> str:
    if isinstance(variant, str):
        return variant.strip().lower()
    return "".join("0" if x == 1 else "1" for x in variant)


def _children(
    tile: SignedTile,
    e: EdgeSequence,
    L: CycloInt,
    sums: list[CycloInt],
    arrows: tuple[int, ...],
    generation: int,
    transpose: bool = False,
) -> list[SignedTile]:
    n = tile.n
    order = 4 * n
    N = e.N
    o, t = tile.orient2, tile.s
    base = L * tile.anchor
    along_p = [x.shift(o) for x in sums]
    along_q = [x.shift(o + 2 * t) for x in sums]
    out = []
    for b in range(1, N + 1):
        for a in range(1, N + 1):
            ha, hb = e.ks2[a - 1], e.ks2[b - 1]
            corner = base + along_p[a - 1] + along_q[b - 1]
            pd = o + ha
            if transpose:
                tau = (2 * t + ha - hb) // 2
                out.append(SignedTile(n, tau % (2 * n), pd % order, corner, generation))
                continue
            qd = o + 2 * t + hb
            tau = (qd - pd) // 2
            child = SignedTile(n, tau % (2 * n), pd % order, corner, generation)
            ea, eb = arrows[a - 1], arrows[b - 1]
            if ea == 1 and eb == -1:
                child = child.relabeled().rotated()
            elif ea == -1 and eb == 1:
                child = child.relabeled()
            elif ea == -1 and eb == -1:
                child = child.rotated()
            out.append(
                SignedTile(n, child.s, child.orient2 % order, child.anchor, generation)
            )
    return out


def _expand_segments(
    segments: Iterable[tuple[int, int]], ks2: Sequence[int], arrows: Sequence[int], order: int
) -> list[tuple[int, int]]:
    out = []
    N = len(ks2)
    for d, sigma in segments:
        if sigma == 1:
            out.extend(((d + ks2[i]) % order, arrows[i]) for i in range(N))
        else:
            out.extend(((d + ks2[i]) % order, -arrows[i]) for i in reversed(range(N)))
    return out


def annihilate(tiles: Sequence[SignedTile]) -> list[SignedTile]:
    """Remove pairs of coincident tiles with opposite orientation and matching edge arrows.

    Such pairs cover the same region with opposite sign and their
    substitutions cancel at every later generation.
    """
    net: dict[tuple, int] = {}
    first: dict[tuple, int] = {}
    for idx, t in enumerate(tiles):
        pd, qd = t.p_dir, t.q_dir
        if pd == qd:
            continue
        key = (t.anchor, min(pd, qd), max(pd, qd))
        net[key] = net.get(key, 0) + (1 if pd < qd else -1)
        first.setdefault(key, idx)
    keep_budget = {k: abs(v) for k, v in net.items()}
    out = []
    for t in tiles:
        pd, qd = t.p_dir, t.q_dir
        if pd == qd:
            out.append(t)
            continue
        key = (t.anchor, min(pd, qd), max(pd, qd))
        orient = 1 if pd < qd else -1
        if net[key] * orient > 0 and keep_budget[key] > 0:
            keep_budget[key] -= 1
            out.append(t)
    return out


def substitute(
    patch: Patch,
    e: EdgeSequence | None = None,
    variant: str | Sequence[int] = "a",
    *,
    annihilate_pairs: bool = True,
) -> Patch:
    """Inflate by L and replace every tile by its substitution tile.

    ``variant`` sets the edge arrows of the new constituents (see
    ``variant_arrows``); it shapes the edges produced by the *next*
    substitution.  Coincident cancelling pairs are dropped unless
    ``annihilate_pairs`` is false.
    """
    e = e if e is not None else patch.edge
    if e is None:
        raise ValueError("no edge sequence given")
    if e.n != patch.n:
        raise ValueError(f"edge sequence is for n={e.n}, patch has n={patch.n}")
    arrows = variant_arrows(variant, e.N)
    L = inflation_factor(e)
    sums = partial_sums(e)
    gen = patch.generation + 1
    tiles: list[SignedTile] = []
    for t in patch.tiles:
        tiles.extend(_children(t, e, L, sums, arrows, gen))
    if annihilate_pairs:
        tiles = annihilate(tiles)
    b = patch.boundary
    boundary = Boundary(b.order, L * b.start, tuple(_expand_segments(b.segments, e.ks2, arrows, b.order)))
    return Patch(
        patch.n, tuple(tiles), boundary, gen, patch.variant_history + (_variant_label(variant),), e, patch.start
    )


def build_substitution_tile(e: EdgeSequence, s: int, *, transpose: bool = False) -> Patch:
    """First-generation substitution tile of T_s as the full N x N grid.

    Cell (a, b) sits at ``P(a-1, b-1)`` and is spanned by the a-th segment of
    the lower edge and the b-th segment of the left edge.  Tiles are listed
    row by row (b outer, a inner).  ``transpose`` swaps the type assignment
    to the mirrored reading of the grid matrix; it keeps the total area but
    the cells no longer fit the grid.
    """
    if not 0 <= s <= e.n:
        raise DomainError(f"tile index s={s} outside [0, {e.n}]")
    base = prototile(e.n, s)
    if not transpose:
        return substitute(base, e, "a", annihilate_pairs=False)
    L = inflation_factor(e)
    tiles = _children(base.tiles[0], e, L, partial_sums(e), (1,) * e.N, 1, transpose=True)
    b = base.boundary
    boundary = Boundary(b.order, b.start, tuple(_expand_segments(b.segments, e.ks2, (1,) * e.N, b.order)))
    return Patch(e.n, tuple(tiles), boundary, 1, ("a",), e, base.start)


def grow(
    e: EdgeSequence,
    s: int,
    generations: int,
    variant: str | Sequence[int] | Sequence[str] = "a",
    *,
    annihilate_pairs: bool = True,
) -> Patch:
    """Grow a patch from a single T_s over ``generations`` substitutions.

    ``variant`` is either one selector used at every step or a list with
    one selector per step.
    """
    steps = _per_step(variant, generations)
    patch = prototile(e.n, s)
    for v in steps:
        patch = substitute(patch, e, v, annihilate_pairs=annihilate_pairs)
    return patch


def _per_step(variant, generations: int) -> list:
    if isinstance(variant, str) or (variant and isinstance(variant[0], int)):
        return [variant] * generations
    steps = list(variant)
    if len(steps) != generations:
        raise ValueError(f"{len(steps)} variant selectors given for {generations} generations")
    return steps


def expand_edge(
    e: EdgeSequence,
    generations: int,
    orientation: str | Sequence[int] | Sequence[str] = "a",
) -> EdgeSequence:
    """Edge of the generation-``generations`` substitution tile (N**g segments).

    Generation 0 is the straight prototile edge and generation 1 is ``e``.
    ``orientation`` is a selector applied at every step or a list of one
    selector per generation; the selector of the last generation only sets
    arrows and does not change the returned shape.
    """
    if generations < 0:
        raise ValueError("generations must be >= 0")
    order = e.order
    steps = _per_step(orientation, generations)
    segs: list[tuple[int, int]] = [(0, 1)]
    for v in steps:
        segs = _expand_segments(segs, e.ks2, variant_arrows(v, e.N), order)
    ks2 = []
    for d, _ in segs:
        d %= order
        if d > order // 2:
            d -= order
        ks2.append(d)
    return from_ks2(e.n, ks2, strict=False)


def rhomb_corners(patch: Patch) -> list[CycloInt]:
    """Corners of the inflated start rhomb."""
    if patch.start is None:
        raise ValueError("patch has no start tile")
    st = patch.start
    scale = patch.edge and inflation_factor(patch.edge) ** patch.generation
    if not scale:
        scale = CycloInt.one(patch.order)
    return [scale * v for v in st.vertices()]


def mirror_point(patch: Patch, z: CycloInt) -> CycloInt:
    """Reflect z across the short diagonal of the inflated start rhomb."""
    a, b, c, d = rhomb_corners(patch)
    st = patch.start
    o = st.orient2
    w = (z - a).shift(-o)
    scale = b - a  # L^g along orientation o
    span = scale.shift(-o)  # real: L^g
    r = span + span.shift(2 * st.s) - w.conjugate().shift(2 * st.s)
    return a + r.shift(o)


def mirror_patch(patch: Patch) -> Counter:
    """Vertex multiset of the patch reflected across the short diagonal of its start rhomb."""
    return Counter(
        (frozenset(mirror_point(patch, v) for v in t.vertices()), t.sign) for t in patch.tiles
    )


# -- worms ----------------------------------------------------------------------


@dataclass(frozen=True)
class Worm:
    tiles: tuple[SignedTile, ...]
    lower: tuple[CycloInt, ...]
    upper: tuple[CycloInt, ...]

    @property
    def offset(self) -> CycloInt:
        return self.upper[0] - self.lower[0]


def worm_decompose(patch: Patch, axis: str = "row") -> list[Worm]:
    """Split a first-generation substitution tile into its N rows or columns of tiles."""
    e = patch.edge
    if e is None or patch.generation != 1 or patch.start is None or len(patch.tiles) != e.N**2:
        raise ValueError("worms are defined for a single, complete substitution tile")
    N = e.N
    st = patch.start
    L = inflation_factor(e)
    origin = L * st.anchor
    p_edge = [origin + x for x in partial_sums(e, st.orient2)]
    q_rel = partial_sums(e, st.orient2 + 2 * st.s)
    worms = []
    if axis == "row":
        for b in range(N):
            tiles = patch.tiles[b * N : (b + 1) * N]
            worms.append(Worm(tuple(tiles), tuple(x + q_rel[b] for x in p_edge), tuple(x + q_rel[b + 1] for x in p_edge)))
    elif axis == "column":
        for a in range(N):
            tiles = patch.tiles[a::N]
            left = [origin + y for y in q_rel]
            shift0 = p_edge[a] - origin
            shift1 = p_edge[a + 1] - origin
            worms.append(Worm(tuple(tiles), tuple(x + shift0 for x in left), tuple(x + shift1 for x in left)))
    else:
        raise ValueError(f"axis must be 'row' or 'column', got {axis!r}")
    return worms


# -- coverage -------------------------------------------------------------------


def _seg_dist(x: np.ndarray, a: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Distance from points x (m,) to segments a + [0,1]*d (k,) -> (k, m)."""
    rel = x[None, :] - a[:, None]
    dd = np.abs(d) ** 2
    tpar = np.clip((rel * np.conj(d)[:, None]).real / np.where(dd == 0, 1, dd)[:, None], 0, 1)
    return np.abs(rel - tpar * d[:, None])


def coverage_many(patch: Patch, probes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Signed layer count at each probe (complex array) and a mask of probes too close to an edge."""
    probes = np.asarray(probes, dtype=complex).ravel()
    A, P, Q = patch._float_tiles
    if A.size == 0:
        return np.zeros(probes.shape, int), np.zeros(probes.shape, bool)
    D = (np.conj(P) * Q).imag
    rel = probes[None, :] - A[:, None]
    safe = np.where(np.abs(D) < 1e-12, 1.0, D)[:, None]
    alpha = (rel.real * Q.imag[:, None] - rel.imag * Q.real[:, None]) / safe
    beta = (P.real[:, None] * rel.imag - P.imag[:, None] * rel.real) / safe
    inside = (alpha > 0) & (alpha < 1) & (beta > 0) & (beta < 1) & (np.abs(D) >= 1e-12)[:, None]
    sign = np.sign(D).astype(int)
    counts = (inside * sign[:, None]).sum(axis=0)
    near = np.zeros(probes.shape, bool)
    for a, d in ((A, P), (A, Q), (A + P, Q), (A + Q, P)):
        near |= (_seg_dist(probes, a, d) < EPS).any(axis=0)
    return counts.astype(int), near


def signed_coverage(patch: Patch, probe: CycloInt | complex | tuple[float, float], *, attempts: int = 8, seed: int = 0) -> int:
    """Signed number of tiles strictly containing the probe.

    A probe within 1e-9 of a tile edge is nudged by a small seeded random
    offset; after ``attempts`` failures ``DegenerateProbe`` is raised.
    """
    if isinstance(probe, CycloInt):
        z = probe.complex_value()
    elif isinstance(probe, tuple):
        z = complex(probe[0], probe[1])
    else:
        z = complex(probe)
    rng = np.random.default_rng(seed)
    for _ in range(attempts + 1):
        counts, near = coverage_many(patch, np.array([z]))
        if not near[0]:
            return int(counts[0])
        z = z + complex(*rng.normal(scale=1e-6, size=2))
    raise DegenerateProbe(f"probe stays within {EPS} of a tile edge after {attempts} attempts")


def winding_number(polygon: np.ndarray, probes: np.ndarray) -> np.ndarray:
    """Winding number of the closed polyline ``polygon`` (complex) around each probe."""
    poly = np.asarray(polygon, dtype=complex)
    if poly[0] != poly[-1]:
        poly = np.append(poly, poly[0])
    probes = np.asarray(probes, dtype=complex).ravel()
    x0, y0 = poly[:-1].real[:, None], poly[:-1].imag[:, None]
    x1, y1 = poly[1:].real[:, None], poly[1:].imag[:, None]
    px, py = probes.real[None, :], probes.imag[None, :]
    cross = (x1 - x0) * (py - y0) - (px - x0) * (y1 - y0)
    up = (y0 <= py) & (y1 > py) & (cross > 0)
    down = (y0 > py) & (y1 <= py) & (cross < 0)
    return up.sum(axis=0) - down.sum(axis=0)


def sample_probes(patch: Patch, count: int, *, seed: int = 0, region: str = "interior") -> np.ndarray:
    """Stratified random probes inside (winding != 0) or outside the patch boundary.

    Probes closer than 1e-9 to any tile edge are rejected.
    """
    rng = np.random.default_rng(seed)
    bf = patch.boundary_float
    lo = complex(bf.real.min(), bf.imag.min())
    hi = complex(bf.real.max(), bf.imag.max())
    if region == "exterior":
        pad = 0.25 * max(hi.real - lo.real, hi.imag - lo.imag)
        lo, hi = lo - complex(pad, pad), hi + complex(pad, pad)
    elif region != "interior":
        raise ValueError(f"region must be 'interior' or 'exterior', got {region!r}")
    found: list[complex] = []
    k = max(4, int(math.ceil(math.sqrt(count))))
    for _ in range(12):
        ix, iy = np.meshgrid(np.arange(k), np.arange(k))
        jitter = rng.random((2, k * k))
        xs = lo.real + (ix.ravel() + jitter[0]) / k * (hi.real - lo.real)
        ys = lo.imag + (iy.ravel() + jitter[1]) / k * (hi.imag - lo.imag)
        pts = xs + 1j * ys
        rng.shuffle(pts)
        w = winding_number(bf, pts)
        keep = (w != 0) if region == "interior" else (w == 0)
        pts = pts[keep]
        if pts.size:
            _, near = coverage_many(patch, pts)
            pts = pts[~near]
            if region == "exterior":
                pts = pts[_boundary_dist(bf, pts) > EPS]
        found.extend(pts.tolist())
        if len(found) >= count:
            return np.array(found[:count])
        k *= 2
    raise DegenerateProbe(f"could only place {len(found)} of {count} {region} probes")


def _boundary_dist(bf: np.ndarray, pts: np.ndarray) -> np.ndarray:
    a = bf[:-1]
    d = bf[1:] - bf[:-1]
    return _seg_dist(pts, a, d).min(axis=0)


# -- serialization ----------------------------------------------------------------


def patch_to_json(patch: Patch) -> dict:
    def tile_json(t: SignedTile) -> dict:
        z = t.anchor.complex_value()
        return {
            "s": t.s,
            "orient2": t.orient2,
            "anchor": [round(z.real, 12), round(z.imag, 12)],
            "anchor_exact": t.anchor.to_json(),
            "sign": t.sign,
            "generation": t.generation,
        }

    pts = patch.boundary.points()
    return {
        "n": patch.n,
        "order": patch.order,
        "generation": patch.generation,
        "variant_history": list(patch.variant_history),
        "edge": patch.edge.to_json() if patch.edge else None,
        "start": None if patch.start is None else tile_json(patch.start),
        "tiles": [tile_json(t) for t in patch.tiles],
        "boundary": [[round(p.real_value(), 12), round(p.complex_value().imag, 12)] for p in pts],
        "boundary_exact": {
            "start": patch.boundary.start.to_json(),
            "segments": [list(s) for s in patch.boundary.segments],
        },
    }


def patch_from_json(data: dict | str) -> Patch:
    if isinstance(data, str):
        data = json.loads(data)
    n = int(data["n"])
    order = 4 * n

    def tile(d: dict) -> SignedTile:
        return SignedTile(n, int(d["s"]), int(d["orient2"]), CycloInt(order, d["anchor_exact"]), int(d.get("generation", 0)))

    be = data["boundary_exact"]
    boundary = Boundary(order, CycloInt(order, be["start"]), tuple((int(a), int(b)) for a, b in be["segments"]))
    edge = None
    if data.get("edge"):
        edge = from_ks2(int(data["edge"]["n"]), data["edge"]["ks2"], strict=False)
    start = tile(data["start"]) if data.get("start") else None
    return Patch(
        n,
        tuple(tile(t) for t in data["tiles"]),
        boundary,
        int(data["generation"]),
        tuple(data.get("variant_history", ())),
        edge,
        start,
    )
