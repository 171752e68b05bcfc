"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 failed coverage assertion.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import geometry, render, spectra
from .edge import (
    EdgeSequence,
    EdgeSequenceError,
    has_loops,
    inflation_factor,
    load_presets,
    multiset,
    resolve_preset,
    validate,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_ASSERT = 3


class InvalidInput(Exception):
    def __init__(self, reason: str, message: str) -> None:
        super().__init__(message)
        self.reason = reason


@dataclass
class JobConfig:
    edge: str
    s: int = 1
    generations: int = 1
    variant: str = "a"
    seed: int = 0
    n: int | None = None
    out: str = "."
    probes: int = 1000
    assert_coverage: bool = False
    presets: dict = field(default_factory=dict)


def parse_edge(ref: str, n: int | None = None, presets: dict | None = None) -> EdgeSequence:
    """Preset name, or an inline sequence like ``(1,-1)``, ``[0,2,-2]`` or ``["1/2","-1/2"]``.

    Inline sequences need ``n``.
    """
    text = ref.strip()
    if text and text[0] not in "([{-0123456789":
        try:
            return resolve_preset(text, n, presets=presets)
        except KeyError as exc:
            raise InvalidInput("UnknownPreset", str(exc.args[0])) from None
        except EdgeSequenceError as exc:
            raise InvalidInput(type(exc).__name__, str(exc)) from None
    if text.startswith("{"):
        try:
            data = json.loads(text)
            return EdgeSequence.from_json(data)
        except EdgeSequenceError as exc:
            raise InvalidInput(type(exc).__name__, str(exc)) from None
        except (ValueError, KeyError, TypeError) as exc:
            raise InvalidInput("ParseError", f"bad edge object {ref!r}: {exc}") from None
    body = text.strip("()[] ")
    try:
        ks = [Fraction(tok.strip().strip('"\'')) for tok in body.split(",") if tok.strip()]
    except ValueError:
        raise InvalidInput("ParseError", f"cannot parse edge sequence {ref!r}") from None
    if n is None:
        raise InvalidInput("MissingN", "an inline edge sequence needs --n")
    try:
        return validate(n, ks)
    except EdgeSequenceError as exc:
        raise InvalidInput(type(exc).__name__, str(exc)) from None


def parse_variant(text: str) -> str | list[str]:
    """A single selector (a|b|c|d|0/1-string) or a comma list with one selector per generation."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise InvalidInput("BadVariant", "empty variant")
    for p in parts:
        if p.lower() not in geometry.VARIANTS and not set(p) <= {"0", "1"}:
            raise InvalidInput("BadVariant", f"unknown variant {p!r}")
    return parts[0] if len(parts) == 1 else parts


def _emit(obj, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        for k, v in obj.items():
            print(f"{k}: {v}")


def _fail(exc: InvalidInput) -> int:
    print(json.dumps({"valid": False, "reason": exc.reason, "message": str(exc)}), file=sys.stderr)
    return EXIT_INVALID


def _presets(args) -> dict | None:
    if getattr(args, "presets", None):
        try:
            return load_presets(args.presets)
        except (OSError, ValueError, KeyError) as exc:
            raise InvalidInput("BadPresets", f"cannot read presets file: {exc}") from None
    return None


# -- commands ---------------------------------------------------------------------


def cmd_validate(args) -> int:
    e = parse_edge(args.edge, args.n, _presets(args))
    L = inflation_factor(e)
    ms = multiset(e)
    report = {
        "valid": True,
        "n": e.n,
        "sequence": str(e),
        "parity": e.parity,
        "m": ms.as_list(),
        "L_exact": str(L),
        "L": round(L.real_value(), 12),
        "loops": has_loops(e),
    }
    _emit(report, args.format)
    return EXIT_OK


def cmd_matrix(args) -> int:
    e = parse_edge(args.edge, args.n, _presets(args))
    ms = multiset(e)
    M = spectra.edge_matrix(ms)
    S = spectra.tile_matrix(M)
    full_m = np.array(M.full(), dtype=object)
    s_ok = S.full() == (full_m.dot(full_m)).tolist()
    lam = spectra.eigenvalues(M)
    lam_s = spectra.eigenvalues(S)
    eig_ok = all(b == a * a for a, b in zip(lam, lam_s))
    counts = spectra.tile_counts(ms)
    if args.format == "csv":
        lines = ["matrix,row," + ",".join(f"c{j}" for j in range(M.size))]
        for name, mat in (("M", M), ("S", S)):
            for i, row in enumerate(mat.full()):
                lines.append(f"{name},{i}," + ",".join(str(x) for x in row))
        print("\n".join(lines))
    else:
        out = {
            "n": e.n,
            "M": M.full(),
            "S": S.full(),
            "S_equals_M_squared": s_ok,
            "eigenvalues_S_equal_squares": eig_ok,
            "eigenvalues": [round(x.real_value(), 12) for x in lam],
            "eigenvalues_exact": [x.to_json() for x in lam],
            "tile_counts": list(counts.counts),
            "area_identity": counts.area_sum() == inflation_factor(e) * inflation_factor(e),
        }
        print(json.dumps(out, indent=2 if args.format == "json" else None, sort_keys=True))
    return EXIT_OK


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InvalidInput("ParseError", f"expected a comma separated integer list, got {text!r}") from None


def cmd_pvscan(args) -> int:
    rows = spectra.pv_scan(
        _int_list(args.m0), _int_list(args.m1), _int_list(args.m2), args.n_max,
        n_min=args.n_min, all_rows=args.all,
    )
    if args.format == "json":
        table = spectra.pv_table(rows)
        print(json.dumps({",".join(map(str, k)): v for k, v in table.items()}, indent=2))
    else:
        sys.stdout.write(spectra.pv_csv(rows))
    return EXIT_OK


def _coverage_sample(patch: geometry.Patch, probes: int, seed: int) -> dict:
    inner = geometry.sample_probes(patch, probes, seed=seed)
    outer = geometry.sample_probes(patch, max(1, probes // 5), seed=seed + 1, region="exterior")
    cin, _ = geometry.coverage_many(patch, inner)
    cout, _ = geometry.coverage_many(patch, outer)
    vin = {int(k): int(v) for k, v in zip(*np.unique(cin, return_counts=True))}
    vout = {int(k): int(v) for k, v in zip(*np.unique(cout, return_counts=True))}
    return {"interior": vin, "exterior": vout, "ok": set(vin) == {1} and set(vout) == {0}}


def run_build(cfg: JobConfig) -> tuple[int, dict]:
    e = parse_edge(cfg.edge, cfg.n, cfg.presets or None)
    if not 0 <= cfg.s <= e.n:
        raise InvalidInput("BadTileIndex", f"s={cfg.s} outside [0, {e.n}]")
    if cfg.generations < 0:
        raise InvalidInput("BadGenerations", "generations must be >= 0")
    variant = parse_variant(cfg.variant)
    try:
        patch = geometry.grow(e, cfg.s, cfg.generations, variant)
    except ValueError as exc:
        raise InvalidInput("BadVariant", str(exc)) from None
    os.makedirs(cfg.out, exist_ok=True)
    stem = os.path.join(cfg.out, "patch")
    with open(stem + ".json", "w", encoding="utf-8") as fh:
        json.dump(geometry.patch_to_json(patch), fh, sort_keys=True)
    with open(stem + ".svg", "w", encoding="utf-8") as fh:
        fh.write(render.render_patch(patch))
    L = inflation_factor(e)
    expected = (L ** (2 * cfg.generations)) * (
        geometry.prototile(e.n, cfg.s).tiles[0].area2i()
    )
    summary = {
        "tiles": len(patch),
        "negative_tiles": len(patch.negative_tiles()),
        "area": round(patch.area, 12),
        "area_exact_ok": patch.area2i() == expected,
        "files": [stem + ".json", stem + ".svg"],
    }
    code = EXIT_OK
    if cfg.probes > 0 and abs(patch.area) > 1e-9:
        cov = _coverage_sample(patch, cfg.probes, cfg.seed)
        summary["coverage"] = cov
        if cfg.assert_coverage and not cov["ok"]:
            code = EXIT_ASSERT
    elif cfg.assert_coverage:
        summary["coverage"] = "skipped: zero-area patch"
    return code, summary


def cmd_build(args) -> int:
    cfg = JobConfig(
        edge=args.edge, s=args.s, generations=args.generations, variant=args.variant,
        seed=args.seed, n=args.n, out=args.out, probes=args.probes,
        assert_coverage=args.assert_coverage, presets=_presets(args) or {},
    )
    code, summary = run_build(cfg)
    print(json.dumps(summary, indent=2, sort_keys=True))
    if code == EXIT_ASSERT:
        print("coverage assertion failed", file=sys.stderr)
    return code


def cmd_render(args) -> int:
    try:
        with open(args.patch, encoding="utf-8") as fh:
            patch = geometry.patch_from_json(json.load(fh))
    except (OSError, ValueError, KeyError) as exc:
        raise InvalidInput("BadPatchFile", str(exc)) from None
    style = render.RenderStyle.load(args.style) if args.style else None
    svg = render.render_patch(patch, style, show_boundary=args.boundary)
    if args.out == "-":
        sys.stdout.write(svg)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(svg)
    return EXIT_OK


def cmd_koch(args) -> int:
    e = parse_edge(args.edge, args.n, _presets(args))
    if args.generations < 0:
        raise InvalidInput("BadGenerations", "generations must be >= 0")
    os.makedirs(args.out, exist_ok=True)
    gens = range(1, args.generations + 1) if args.generations else [0]
    for g in gens:
        path = os.path.join(args.out, f"koch_g{g}.svg")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(render.render_edge(e, g, "b"))
        print(f"{path} segments={e.N ** g}")
    return EXIT_OK


# -- entry point ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rhombforge", description="Rhomb substitution tilings from edge sequences.")
    sub = p.add_subparsers(dest="command", required=True)

    def edge_args(sp, default=None):
        sp.add_argument("--edge", default=default, required=default is None,
                        help="preset name or inline sequence such as '(1,-1)'")
        sp.add_argument("--n", type=int, default=None, help="symmetry order (overrides the preset)")
        sp.add_argument("--presets", default=None, help="JSON file with extra presets")

    sp = sub.add_parser("validate", help="check an edge sequence")
    edge_args(sp)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("matrix", help="edge and tile substitution matrices")
    edge_args(sp)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.set_defaults(func=cmd_matrix)

    sp = sub.add_parser("pvscan", help="scan single-dent families for PV inflation factors")
    sp.add_argument("--m0", default="0,1,2")
    sp.add_argument("--m1", default="0,1")
    sp.add_argument("--m2", default="0,1")
    sp.add_argument("--n-min", type=int, default=3)
    sp.add_argument("--n-max", type=int, default=12)
    sp.add_argument("--all", action="store_true", help="list every scanned row, not only PV hits")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.set_defaults(func=cmd_pvscan)

    sp = sub.add_parser("build", help="grow a patch and write JSON plus SVG")
    edge_args(sp)
    sp.add_argument("--s", type=int, default=1)
    sp.add_argument("--generations", type=int, default=1)
    sp.add_argument("--variant", default="a", help="a|b|c|d, a 0/1 orientation string, or a comma list per generation")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--probes", type=int, default=1000)
    sp.add_argument("--assert-coverage", action="store_true")
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_build)

    sp = sub.add_parser("render", help="render a patch JSON file to SVG")
    sp.add_argument("patch")
    sp.add_argument("--out", default="-")
    sp.add_argument("--style", default=None, help="JSON style sidecar")
    sp.add_argument("--boundary", action="store_true")
    sp.add_argument("--format", choices=("svg",), default="svg")
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("koch", help="edge SVG series under the rotated (b) rule")
    edge_args(sp, default="penrose-a")
    sp.add_argument("--generations", type=int, default=8)
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_koch)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidInput as exc:
        return _fail(exc)


if __name__ == "__main__":
    sys.exit(main())
