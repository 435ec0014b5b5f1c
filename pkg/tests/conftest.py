"""Independent reference implementations used as oracles across the test modules."""

from __future__ import annotations

import itertools
from fractions import Fraction

import pytest


def radical_inverse(n: int, b: int) -> Fraction:
    """Classical van der Corput value of ``n`` in base ``b``."""
    out, scale = Fraction(0), Fraction(1, b)
    while n:
        n, r = divmod(n, b)
        out += r * scale
        scale /= b
    return out


def recursive_sbox(levels: int, b: int, d: int, level_maps=None) -> list[tuple[Fraction, ...]]:
    """First ``b^(d*levels)`` points, built by concatenating shifted copies of the previous block.

    ``level_maps[m]`` is an array ``pi`` with ``pi[0] = 0``; the k-th shift at
    level ``m`` is the lexicographic digit vector number ``pi[k]``.
    """
    vectors = list(itertools.product(range(b), repeat=d))
    S = [tuple(Fraction(0) for _ in range(d))]
    for m in range(levels):
        pi = level_maps[m] if level_maps is not None else list(range(b**d))
        block = list(S)
        scale = Fraction(1, b ** (m + 1))
        for k in range(1, b**d):
            H = vectors[int(pi[k])]
            S.extend(tuple(x + h * scale for x, h in zip(p, H)) for p in block)
    return S


def brute_star(values, grid: int = 10**6) -> float:
    """``sup_t |#{x <= t} - N t|`` over a uniform grid of ``t`` and both sides of each point."""
    import numpy as np

    x = np.sort(np.asarray(values, dtype=np.float64))
    t = np.concatenate([np.linspace(0.0, 1.0, grid, endpoint=False)[1:], x, np.nextafter(x, -1.0)])
    t = t[(t > 0) & (t < 1)]
    counts = np.searchsorted(x, t, side="right")
    return float(np.max(np.abs(counts - len(x) * t)))


def quad_lp(values, p: float) -> float:
    """``int_0^1 |#{x < t} - N t|^p dt`` by adaptive quadrature on each smooth piece."""
    import numpy as np
    from scipy.integrate import quad

    x = np.sort(np.asarray(values, dtype=np.float64))
    N = len(x)
    cuts = {0.0, 1.0, *x.tolist()}
    cuts |= {c / N for c in range(N + 1)}
    cuts = sorted(c for c in cuts if 0.0 <= c <= 1.0)
    total = 0.0
    for lo, hi in zip(cuts, cuts[1:]):
        if hi <= lo:
            continue
        c = int(np.searchsorted(x, 0.5 * (lo + hi), side="left"))
        val, _ = quad(lambda t: abs(c - N * t) ** p, lo, hi, epsabs=0.0, epsrel=1e-11, limit=200)
        total += val
    return total


@pytest.fixture(scope="session")
def rng():
    import numpy as np

    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
