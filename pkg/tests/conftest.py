from __future__ import annotations

import random
from fractions import Fraction

import pytest

from rhombforge.edge import EdgeSequence, validate

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def random_sequences(count: int, seed: int, n_max: int = 12, N_max: int = 8) -> list[EdgeSequence]:
    """Seeded random valid edge sequences (both parities, strict overhang bound)."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(3, n_max)
        half = rng.random() < 0.3
        N = rng.randint(1, N_max)
        ks: list[Fraction] = []
        if half:
            # half-integers cannot be zero, so N must be even
            N += N % 2
            N = min(N, N_max - N_max % 2)
            for _ in range(N // 2):
                k = Fraction(2 * rng.randint(0, n // 2) + 1, 2)
                if k > Fraction(n, 2):
                    k = Fraction(1, 2)
                ks += [k, -k]
        else:
            pairs = rng.randint(0, N // 2)
            ks += [Fraction(0)] * (N - 2 * pairs)
            for _ in range(pairs):
                k = Fraction(rng.randint(1, n // 2))
                ks += [k, -k]
        rng.shuffle(ks)
        out.append(validate(n, ks))
    return out


@pytest.fixture(scope="session")
def sequences200() -> list[EdgeSequence]:
    return random_sequences(200, seed=20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        ok, desc = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {desc}")
