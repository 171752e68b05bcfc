"""Edge and tile substitution matrices, their spectra, and PV classification."""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .cyclotomic import CycloInt, make_cos_combo
from .edge import (
    AngleMultiset,
    EdgeSequence,
    EdgeSequenceError,
    inflation_factor,
    multiset,
    validate,
)

PV_TOLERANCE = 1e-9


@dataclass(frozen=True)
class CirculantMatrix:
    """A circulant matrix stored by its first row.

    ``ring_order`` fixes the cyclotomic ring the eigenvalues live in; it is
    twice the size for ordinary matrices and stays at 4n for matrices of
    half-integer sequences that were laid out on the doubled order 2n.
    """

    first_row: tuple[int, ...]
    ring_order: int = 0

    def __post_init__(self) -> None:
        if not self.ring_order:
            object.__setattr__(self, "ring_order", 2 * len(self.first_row))

    @property
    def size(self) -> int:
        return len(self.first_row)

    def entry(self, i: int, j: int) -> int:
        return self.first_row[(j - i) % self.size]

    def full(self) -> list[list[int]]:
        m = self.size
        return [[self.first_row[(j - i) % m] for j in range(m)] for i in range(m)]

    def is_palindromic(self) -> bool:
        r = self.first_row
        return all(r[j] == r[-j] for j in range(1, self.size))

    def __matmul__(self, other: CirculantMatrix) -> CirculantMatrix:
        m = self.size
        if other.size != m:
            raise ValueError("circulant sizes differ")
        a, b = self.first_row, other.first_row
        row = [0] * m
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        row[(i + j) % m] += x * y
        return CirculantMatrix(tuple(row), self.ring_order)

    def to_json(self) -> dict:
        return {"size": self.size, "first_row": list(self.first_row)}


@dataclass(frozen=True)
class TileCounts:
    """Tile counts n_t for t = 0..n of a substitution tile.

    ``row`` is the full first row of the tile matrix indexed by the offset
    t in 0..2n-1 (in units of pi/n of the original symmetry order).
    """

    n: int
    counts: tuple[int, ...]
    row: tuple[int, ...]

    def area_sum(self) -> CycloInt:
        """Exact n_0 + sum_t 2 n_t cos(t pi/n) over the whole row."""
        order = 4 * self.n
        return CycloInt.from_powers(order, {2 * t: c for t, c in enumerate(self.row) if c})

    def for_tile(self, s: int) -> list[int]:
        """Number of children of each type 0..2n-1 in the substitution of tile s."""
        m = 2 * self.n
        return [self.row[(c - s) % m] for c in range(m)]


@dataclass(frozen=True)
class PvReport:
    L: CycloInt
    L_float: float
    conjugates: list[tuple[int, float]]
    is_pv: bool | None
    degree: int
    eigen_rule_is_pv: bool | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def indeterminate(self) -> bool:
        return self.is_pv is None

    @property
    def max_conjugate_modulus(self) -> float:
        return max((m for _, m in self.conjugates), default=0.0)


def edge_matrix(ms: AngleMultiset) -> CirculantMatrix:
    """circ(m_0, m_1, ..., m_n, ..., m_1); half-integer multisets go to the doubled order."""
    if ms.is_half_integer:
        size = 4 * ms.n
        ring_order = 4 * ms.n
        step = 1
    else:
        size = 2 * ms.n
        ring_order = 4 * ms.n
        step = 2
    row = [0] * size
    for h, c in ms.counts.items():
        k = h // step
        if k == 0 or 2 * k == size:
            row[k % size] += c
        else:
            row[k % size] += c
            row[-k % size] += c
    return CirculantMatrix(tuple(row), ring_order)


def tile_matrix(M: CirculantMatrix) -> CirculantMatrix:
    """S = M @ M."""
    return M @ M


def tile_counts(ms: AngleMultiset) -> TileCounts:
    S = tile_matrix(edge_matrix(ms))
    n = ms.n
    if ms.is_half_integer:
        # doubled layout: only even offsets are populated
        row = tuple(S.first_row[0::2])
    else:
        row = S.first_row
    return TileCounts(n, tuple(row[: n + 1]), row)


def eigenvalues(M: CirculantMatrix) -> list[CycloInt]:
    """lambda_j = sum_l M[0, l] eps^(j l), eps = exp(2 pi i / size), j = 0..size-1."""
    m = M.size
    order = M.ring_order
    step = order // m
    out = []
    for j in range(m):
        terms: dict[int, int] = {}
        for l, c in enumerate(M.first_row):
            if c:
                p = (step * j * l) % order
                terms[p] = terms.get(p, 0) + c
        out.append(CycloInt.from_powers(order, terms))
    return out


def galois_orbit(x: CycloInt) -> list[tuple[int, CycloInt]]:
    """Distinct images of x under the Galois group, with the smallest j producing each."""
    seen: dict[CycloInt, int] = {}
    for j in range(1, x.order):
        if math.gcd(j, x.order) == 1:
            y = x.galois(j)
            if y not in seen:
                seen[y] = j
    return [(j, y) for y, j in seen.items()]


def pv_classify(e: EdgeSequence) -> PvReport:
    L = inflation_factor(e)
    L_float = L.real_value()
    orbit = galois_orbit(L)
    conj = [(j, abs(y.complex_value())) for j, y in orbit if y != L]
    degree = len(orbit)

    def decide(moduli: Iterable[float]) -> bool | None:
        moduli = list(moduli)
        if abs(L_float - 1) < PV_TOLERANCE or any(abs(m - 1) < PV_TOLERANCE for m in moduli):
            return None
        return L_float > 1 and all(m < 1 for m in moduli)

    is_pv = decide(m for _, m in conj)

    # Alternative rule: eigenvalues lambda_j of the edge matrix with j coprime to n.
    M = edge_matrix(multiset(e))
    lam = eigenvalues(M)
    nn = M.size // 2
    L_lift = L if L.order == M.ring_order else L.lift(M.ring_order)
    alt = [abs(lam[j].complex_value()) for j in range(1, M.size) if math.gcd(j, nn) == 1 and lam[j] != L_lift]
    eigen_is_pv = decide(alt)
    notes = []
    if eigen_is_pv != is_pv:
        notes.append("eigenvalue rule (j coprime to n) disagrees with the Galois conjugate set")
    return PvReport(L, L_float, conj, is_pv, degree, eigen_is_pv, notes)


@dataclass(frozen=True)
class PvScanRow:
    m0: int
    m1: int
    m2: int
    n: int
    L_float: float
    max_conjugate_modulus: float
    is_pv: bool | None
    reducible: bool
    rational: bool


def single_dent_sequence(m0: int, m1: int, m2: int, n: int) -> EdgeSequence:
    return validate(n, [0] * m0 + [1, -1] * m1 + [2, -2] * m2)


def _scan_one(args: tuple[int, int, int, int]) -> PvScanRow | None:
    m0, m1, m2, n = args
    try:
        e = single_dent_sequence(m0, m1, m2, n)
    except EdgeSequenceError:
        return None
    rep = pv_classify(e)
    nonzero = [abs(h) // 2 for h in e.ks2 if h]
    g = 0
    for k in nonzero:
        g = math.gcd(g, k)
    return PvScanRow(
        m0, m1, m2, n, rep.L_float, rep.max_conjugate_modulus, rep.is_pv,
        reducible=math.gcd(g, n) > 1, rational=rep.degree == 1,
    )


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("RHOMBFORGE_THREADS", "1")))
    except ValueError:
        return 1


def pv_scan(
    m0_values: Sequence[int] = (0, 1, 2),
    m1_values: Sequence[int] = (0, 1),
    m2_values: Sequence[int] = (0, 1),
    n_max: int = 12,
    *,
    n_min: int = 3,
    all_rows: bool = False,
) -> list[PvScanRow]:
    """Scan single-dent families (at most one of m1, m2 nonzero) for PV inflation factors.

    Hits exclude rational inflation factors (periodic tilings) and
    sequences whose angles all share a factor with n (they repeat a
    tiling of smaller symmetry order).
    """
    grid = [
        (m0, m1, m2, n)
        for m0 in m0_values
        for m1 in m1_values
        for m2 in m2_values
        if not (m1 and m2) and (m0 or m1 or m2)
        for n in range(n_min, n_max + 1)
    ]
    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_scan_one, grid))
    else:
        rows = [_scan_one(g) for g in grid]
    rows = [r for r in rows if r is not None]
    if all_rows:
        return rows
    return [r for r in rows if r.is_pv and not r.reducible and not r.rational]


def pv_table(rows: Iterable[PvScanRow]) -> dict[tuple[int, int, int], list[int]]:
    """Group hits as {(m0, m1, m2): [n, ...]}."""
    table: dict[tuple[int, int, int], list[int]] = {}
    for r in rows:
        table.setdefault((r.m0, r.m1, r.m2), []).append(r.n)
    return {k: sorted(v) for k, v in sorted(table.items())}


def pv_csv(rows: Iterable[PvScanRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m0", "m1", "m2", "n", "L_float", "max_conjugate_modulus", "is_pv"])
    for r in rows:
        w.writerow([r.m0, r.m1, r.m2, r.n, f"{r.L_float:.12f}", f"{r.max_conjugate_modulus:.12f}",
                    "" if r.is_pv is None else str(r.is_pv).lower()])
    return buf.getvalue()


def reduce_prototile_set(counts: TileCounts, s: int, mode: str = "signed") -> dict[int, int]:
    """Reduce the children of tile s to positive prototile representatives.

    ``signed``: n'_c = n_c - n_{2n-c} for c = 1..n-1.
    ``congruent``: n''_c = n_c + n_{n-c} - n_{n+c} - n_{2n-c} for c = 1..floor(n/2).
    Zero-area types 0 and n are dropped in both modes.
    """
    n = counts.n
    m = 2 * n
    cnt = counts.for_tile(s)
    if mode == "signed":
        return {c: cnt[c] - cnt[m - c] for c in range(1, n)}
    if mode == "congruent":
        out = {}
        for c in range(1, n // 2 + 1):
            if 2 * c == n:
                out[c] = cnt[c] - cnt[n + c]
            else:
                out[c] = cnt[c] + cnt[n - c] - cnt[n + c] - cnt[m - c]
        return out
    raise ValueError(f"unknown reduction mode {mode!r}")


def reduced_matrix(counts: TileCounts, mode: str = "signed") -> list[list[int]]:
    """Substitution matrix over reduced prototiles; row i lists the children of representative i."""
    n = counts.n
    reps = list(range(1, n)) if mode == "signed" else list(range(1, n // 2 + 1))
    out = []
    for s in reps:
        red = reduce_prototile_set(counts, s, mode)
        out.append([red[c] for c in reps])
    return out
