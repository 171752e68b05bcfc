"""Edge sequences of rhomb substitution tiles.

An edge sequence lists the angles ``k_i * pi / n`` between the prototile
edges along a substitution-tile edge and the straight rhomb edge it
replaces.  All k_i are integers or all are half-integers; internally they
are kept in half-units (``ks2 = 2*k``) so both families share one
representation and one cyclotomic ring of order 4n.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cyclotomic import CycloInt, DomainError


class EdgeSequenceError(ValueError):
    """Base class for invalid edge sequences; ``reason`` is machine readable."""

    reason = "InvalidSequence"


class MixedParity(EdgeSequenceError):
    reason = "MixedParity"


class UnbalancedPairs(EdgeSequenceError):
    reason = "UnbalancedPairs"


class OverhangExceeded(EdgeSequenceError):
    reason = "OverhangExceeded"


def _to_half_units(k: object) -> int:
    if isinstance(k, str):
        k = Fraction(k.strip())
    h = Fraction(k) * 2  # type: ignore[arg-type]
    if h.denominator != 1:
        raise EdgeSequenceError(f"edge angle fraction {k} is not a multiple of 1/2")
    return int(h)


def _fmt_half(h: int) -> str:
    return str(h // 2) if h % 2 == 0 else f"{h}/2"


@dataclass(frozen=True)
class EdgeSequence:
    n: int
    ks2: tuple[int, ...]
    strict: bool = True

    @property
    def N(self) -> int:
        return len(self.ks2)

    @property
    def order(self) -> int:
        return 4 * self.n

    @property
    def is_half_integer(self) -> bool:
        return self.ks2[0] % 2 == 1

    @property
    def parity(self) -> str:
        return "half-integer" if self.is_half_integer else "integer"

    @property
    def ks(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(h, 2) for h in self.ks2)

    def __str__(self) -> str:
        return "(" + ", ".join(_fmt_half(h) for h in self.ks2) + f") n={self.n}"

    def reversed(self) -> EdgeSequence:
        """The same edge laid in the other orientation (twofold rotation)."""
        return EdgeSequence(self.n, self.ks2[::-1], self.strict)

    def doubled(self) -> EdgeSequence:
        """Integer sequence on the doubled symmetry order 2n with identical geometry."""
        if not self.is_half_integer:
            raise DomainError("only half-integer sequences are doubled")
        return EdgeSequence(2 * self.n, tuple(2 * h for h in self.ks2), self.strict)

    def to_json(self) -> dict:
        return {"n": self.n, "ks2": list(self.ks2)}

    @classmethod
    def from_json(cls, data: Mapping | str, *, strict: bool = True) -> EdgeSequence:
        if isinstance(data, str):
            data = json.loads(data)
        return from_ks2(int(data["n"]), data["ks2"], strict=strict)


def _check(n: int, ks2: Sequence[int], strict: bool) -> None:
    if n < 3:
        raise EdgeSequenceError(f"symmetry order must be >= 3, got {n}")
    if not ks2:
        raise EdgeSequenceError("edge sequence is empty")
    if len({h % 2 for h in ks2}) > 1:
        raise MixedParity(f"integer and half-integer angles mixed: {list(ks2)}")
    limit = n if strict else 2 * n
    for h in ks2:
        if abs(h) > limit:
            raise OverhangExceeded(
                f"|k| = {_fmt_half(abs(h))} exceeds {'n/2' if strict else 'n'} = {Fraction(limit, 2)}"
            )
    counts = Counter(h for h in ks2 if h not in (0, 2 * n, -2 * n))
    for h, c in counts.items():
        if h > 0 and counts.get(-h, 0) != c:
            raise UnbalancedPairs(f"angle {_fmt_half(h)} occurs {c} times but {_fmt_half(-h)} occurs {counts.get(-h, 0)} times")
        if h < 0 and -h not in counts:
            raise UnbalancedPairs(f"angle {_fmt_half(h)} has no positive partner")


def validate(n: int, ks: Iterable[object], *, strict: bool = True) -> EdgeSequence:
    """Validate angle fractions ``ks`` (ints, Fractions, floats or "p/q" strings)."""
    ks2 = tuple(_to_half_units(k) for k in ks)
    _check(n, ks2, strict)
    return EdgeSequence(n, ks2, strict)


def from_ks2(n: int, ks2: Iterable[int], *, strict: bool = True) -> EdgeSequence:
    ks2 = tuple(int(h) for h in ks2)
    _check(n, ks2, strict)
    return EdgeSequence(n, ks2, strict)


@dataclass(frozen=True)
class AngleMultiset:
    """Pair counts m_k keyed by |k| in half-units (key 2 means k = 1)."""

    n: int
    counts: Mapping[int, int] = field(default_factory=dict)

    @classmethod
    def from_m(cls, n: int, m: Mapping[object, int]) -> AngleMultiset:
        counts = {}
        for k, c in m.items():
            if c:
                counts[_to_half_units(k)] = int(c)
        return cls(n, counts)

    @property
    def is_half_integer(self) -> bool:
        return any(h % 2 for h in self.counts)

    def m(self, k: object) -> int:
        return self.counts.get(abs(_to_half_units(k)), 0)

    def length(self) -> int:
        """Number of segments N of any sequence with this multiset."""
        return sum(c if h in (0, 2 * self.n) else 2 * c for h, c in self.counts.items())

    def as_list(self) -> list[int]:
        """``[m_0, m_1, ..., m_top]`` for integer multisets, ``[m_1/2, m_3/2, ...]`` otherwise."""
        if self.is_half_integer:
            top = max(self.counts)
            return [self.counts.get(h, 0) for h in range(1, top + 1, 2)]
        top = max(self.counts, default=0)
        return [self.counts.get(h, 0) for h in range(0, top + 1, 2)]

    def sequence(self) -> EdgeSequence:
        """A canonical edge sequence with this multiset: zeros first, then +k/-k pairs."""
        ks2: list[int] = []
        for h in sorted(self.counts):
            c = self.counts[h]
            if h in (0, 2 * self.n):
                ks2 += [h] * c
            else:
                ks2 += [h, -h] * c
        return from_ks2(self.n, ks2, strict=False)


def multiset(e: EdgeSequence) -> AngleMultiset:
    c = Counter(abs(h) for h in e.ks2)
    counts = {h: (v if h in (0, 2 * e.n) else v // 2) for h, v in c.items()}
    return AngleMultiset(e.n, counts)


def inflation_factor(e: EdgeSequence) -> CycloInt:
    """Exact L = sum_i cos(k_i pi / n); equal to the sum of the unit segment vectors."""
    return CycloInt.from_powers(e.order, Counter(e.ks2))


def partial_sums(e: EdgeSequence, base: int = 0) -> list[CycloInt]:
    pts = [CycloInt.zero(e.order)]
    for h in e.ks2:
        pts.append(pts[-1] + CycloInt.zeta(e.order, base + h))
    return pts


def edge_polyline(e: EdgeSequence, base_direction: int = 0) -> list[CycloInt]:
    """Exact vertices of the edge laid from the origin along ``base_direction`` (half-units)."""
    return partial_sums(e, base_direction)


def _cross_exact(a: CycloInt, b: CycloInt) -> CycloInt:
    # 2i * Im(conj(a) * b)
    return a.conjugate() * b - a * b.conjugate()


def _orient_sign(a: CycloInt, b: CycloInt, c: CycloInt, approx: float) -> int:
    if abs(approx) > 1e-9:
        return 1 if approx > 0 else -1
    w = _cross_exact(b - a, c - a)
    if w.is_zero():
        return 0
    # w = 2i * cross, so cross has the sign of Im(w)
    v = w.mp_value(60).imag
    return 1 if v > 0 else -1


def _on_segment(p: complex, q: complex, r: complex) -> bool:
    # r collinear with p, q: is it within the closed bounding box?
    tol = 1e-9
    return (
        min(p.real, q.real) - tol <= r.real <= max(p.real, q.real) + tol
        and min(p.imag, q.imag) - tol <= r.imag <= max(p.imag, q.imag) + tol
    )


def polyline_has_loops(points: Sequence[CycloInt], dirs: Sequence[int] | None = None, order: int | None = None) -> bool:
    """Self-intersection test for an open polyline of exact points.

    Consecutive segments only meet at their shared vertex unless they fold
    back onto each other; any contact between non-consecutive segments counts.
    """
    m = len(points) - 1
    if m < 2:
        return False
    if dirs is not None and order is not None:
        for a, b in zip(dirs, dirs[1:]):
            if (b - a) % order == order // 2:
                return True
    fl = np.array([p.complex_value() for p in points])
    x, y = fl.real, fl.imag
    p0x, p0y, p1x, p1y = x[:-1], y[:-1], x[1:], y[1:]
    if dirs is None:
        dx, dy = p1x - p0x, p1y - p0y
        for i in range(m - 1):
            cr = dx[i] * dy[i + 1] - dy[i] * dx[i + 1]
            dot = dx[i] * dx[i + 1] + dy[i] * dy[i + 1]
            if abs(cr) < 1e-9 and dot < 0:
                return True

    def orient(ax, ay, bx, by, cx, cy):
        return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)

    minx, maxx = np.minimum(p0x, p1x), np.maximum(p0x, p1x)
    miny, maxy = np.minimum(p0y, p1y), np.maximum(p0y, p1y)
    for i in range(m - 2):
        js = np.arange(i + 2, m)
        box = (
            (minx[js] <= maxx[i] + 1e-9)
            & (maxx[js] >= minx[i] - 1e-9)
            & (miny[js] <= maxy[i] + 1e-9)
            & (maxy[js] >= miny[i] - 1e-9)
        )
        js = js[box]
        if js.size == 0:
            continue
        o1 = orient(p0x[i], p0y[i], p1x[i], p1y[i], p0x[js], p0y[js])
        o2 = orient(p0x[i], p0y[i], p1x[i], p1y[i], p1x[js], p1y[js])
        o3 = orient(p0x[js], p0y[js], p1x[js], p1y[js], p0x[i], p0y[i])
        o4 = orient(p0x[js], p0y[js], p1x[js], p1y[js], p1x[i], p1y[i])
        for idx, j in enumerate(js):
            a, b, c, d = points[i], points[i + 1], points[j], points[j + 1]
            s1 = _orient_sign(a, b, c, o1[idx])
            s2 = _orient_sign(a, b, d, o2[idx])
            s3 = _orient_sign(c, d, a, o3[idx])
            s4 = _orient_sign(c, d, b, o4[idx])
            if s1 * s2 < 0 and s3 * s4 < 0:
                return True
            fa, fb, fc, fd = fl[i], fl[i + 1], fl[j], fl[j + 1]
            if s1 == 0 and _on_segment(fa, fb, fc):
                return True
            if s2 == 0 and _on_segment(fa, fb, fd):
                return True
            if s3 == 0 and _on_segment(fc, fd, fa):
                return True
            if s4 == 0 and _on_segment(fc, fd, fb):
                return True
    return False


def has_loops(e: EdgeSequence) -> bool:
    return polyline_has_loops(edge_polyline(e), e.ks2, e.order)


# Named edge sequences of known tilings.  ``n`` may be overridden by callers.
PRESETS: dict[str, tuple[int, tuple[int, ...]]] = {
    "ab": (4, (0, 2, -2)),
    "penrose-a": (5, (2, -2)),
    "penrose-b": (5, (0, 4, -4)),
    "lb": (5, (1, -1)),
    "harriss": (7, (0, 2, -2, 0)),
    "maloney11": (
        11,
        tuple(
            2 * k
            for k in (
                1, -1, -3, 3, 0, 2, -2, -1, 1, 0, -5, 5, -3, 3, -1, 1, 4, -4,
                2, -2, 0, -1, 1, 2, -2, -3, 3, 0, 4, -4, -1, 1, 2, -2, 0,
            )
        ),
    ),
}


def load_presets(path: str) -> dict[str, tuple[int, tuple[int, ...]]]:
    """Read extra presets from a JSON file ``{name: {"n": .., "ks2": [..]}}``."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return {name: (int(v["n"]), tuple(int(h) for h in v["ks2"])) for name, v in data.items()}


def resolve_preset(name: str, n: int | None = None, *, presets: Mapping | None = None, strict: bool = True) -> EdgeSequence:
    table = dict(PRESETS)
    if presets:
        table.update(presets)
    key = name.strip().lower()
    if key not in table:
        raise KeyError(f"unknown preset {name!r}; known: {', '.join(sorted(table))}")
    default_n, ks2 = table[key]
    return from_ks2(n if n is not None else default_n, ks2, strict=strict)
