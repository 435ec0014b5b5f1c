"""Sizes of the sets ``B_b(delta, N) = {m < N : D(E_{Z_m}) <= delta log m}``.

Natural logarithms throughout.  ``m = 1`` belongs to the set only if
``D(E_{Z_1}) <= 0``, which never happens for sup-type discrepancies.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .radix import MAX_N

EXACT_CAP = 2**14


def count_exact(D: Callable[[int], float] | Sequence[float], delta: float, N: int) -> int:
    """``#{1 <= m < N : D(m) <= delta log m}``.

    ``D`` is either a callable ``m -> D(E_{Z_m})`` or a sequence whose entry
    ``m - 1`` holds ``D(E_{Z_m})``.
    """
    if N > EXACT_CAP:
        raise ValueError(f"exact counting is capped at N <= {EXACT_CAP}")
    if callable(D):
        values = np.array([float(D(m)) for m in range(1, N)])
    else:
        values = np.asarray([float(x) for x in D[: N - 1]])
        if len(values) < N - 1:
            raise ValueError(f"need discrepancies for m = 1..{N - 1}")
    m = np.arange(1, N)
    return int(np.count_nonzero(values <= delta * np.log(m)))


def _qualifies(C: float, s: int, delta: float, m: int) -> bool:
    return C * s <= delta * math.log(m)


def _threshold(C: float, s: int, delta: float) -> int:
    """Smallest ``m >= 1`` with ``C s <= delta log m`` (same float predicate as brute force).

    Gallops away from the analytic guess and bisects: near 2^64 the float log
    is flat over long runs of ``m``, so a step-by-step walk would crawl.
    """
    if C * s <= 0:
        return 1
    if delta <= 0:
        return MAX_N + 1
    x = C * s / delta
    if x > math.log(MAX_N) + 1:
        return MAX_N + 1
    guess = max(1, math.ceil(math.exp(x)))
    hi, step = guess, 1
    while not _qualifies(C, s, delta, hi):
        hi, step = guess + step, step * 2
    lo, step = hi, 1
    while lo > 1 and _qualifies(C, s, delta, lo):
        lo, step = max(1, hi - step), step * 2
    if _qualifies(C, s, delta, lo):
        return lo
    while hi - lo > 1:  # invariant: lo fails, hi qualifies
        mid = (lo + hi) // 2
        if _qualifies(C, s, delta, mid):
            hi = mid
        else:
            lo = mid
    return hi


@lru_cache(maxsize=None)
def _digit_sum_counts(q: int, length: int) -> tuple[int, ...]:
    """``out[s]`` = number of ``length``-digit strings in base ``q`` with digit sum ``s``."""
    counts = [1]
    for _ in range(length):
        nxt = [0] * (len(counts) + q - 1)
        for s, c in enumerate(counts):
            if c:
                for e in range(q):
                    nxt[s + e] += c
        counts = nxt
    return tuple(counts)


def count_digit_sum_below(x: int, q: int) -> list[int]:
    """``out[s] = #{0 <= m < x : digit sum of m in base q = s}``."""
    digits = []
    rest = x
    while rest:
        rest, e = divmod(rest, q)
        digits.append(e)
    out = [0] * (len(digits) * (q - 1) + 1)
    prefix = 0
    for pos in range(len(digits) - 1, -1, -1):
        tail = _digit_sum_counts(q, pos)
        for e in range(digits[pos]):
            for s, c in enumerate(tail):
                out[prefix + e + s] += c
        prefix += digits[pos]
    return out


def count_surrogate(C: float, b: int, d: int, delta: float, N: int) -> int:
    """``#{1 <= m < N : C * digit_sum(m) <= delta log m}`` with digits in base ``b^d``.

    Counted by digit sum: for each ``s`` the qualifying ``m`` form the range
    ``[threshold(s), N)``.
    """
    if N > MAX_N:
        raise ValueError("N exceeds the 64-bit range")
    if N <= 1:
        return 0
    q = b**d
    below_n = count_digit_sum_below(N, q)
    total = 0
    for s in range(1, len(below_n)):
        lo = _threshold(C, s, delta)
        if lo >= N:
            continue
        below_lo = count_digit_sum_below(lo, q)
        total += below_n[s] - (below_lo[s] if s < len(below_lo) else 0)
    return total


def binary_entropy(alpha: float) -> float:
    return -(alpha * math.log2(alpha) + (1 - alpha) * math.log2(1 - alpha))


def exponent_at(alpha: float, b: int, d: int) -> float:
    """``h(alpha, b, d) = -log(alpha^alpha (1-alpha)^(1-alpha)) / log(b^d)`` for ``0 < alpha <= 1/2``."""
    if not 0 < alpha <= 0.5:
        raise ValueError("alpha must lie in (0, 1/2]")
    nats = -(alpha * math.log(alpha) + (1 - alpha) * math.log1p(-alpha))
    return nats / (d * math.log(b))


def entropy_exponent(b: int, d: int, beta: float, tau: float) -> float:
    """``h(alpha, b, d)`` at ``alpha = (1 - tau) / beta``, which needs ``beta > 2`` and ``0 < tau < 1``."""
    if not beta > 2:
        raise ValueError("beta must exceed 2")
    if not 0 < tau < 1:
        raise ValueError("tau must lie in (0, 1)")
    alpha = (1.0 - tau) / beta
    if not 0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 1/2)")
    return exponent_at(alpha, b, d)


@dataclass(frozen=True)
class BinomialTail:
    total: int
    log_total: float
    ratio: float

    @property
    def value(self) -> float:
        try:
            return float(self.total)
        except OverflowError:
            return math.inf


def binomial_tail(n: int, alpha: float) -> BinomialTail:
    """``sum_{j <= alpha n} C(n, j)`` exactly, and its ratio to ``2^(n H(alpha)) / sqrt n``."""
    if not 0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 1/2)")
    top = math.floor(alpha * n + 1e-9)
    if top < 1:
        raise ValueError("alpha * n must be >= 1")
    total = 0
    term = 1
    for j in range(top + 1):
        total += term
        term = term * (n - j) // (j + 1)
    log_total = math.log(total)
    log_ref = (n * binary_entropy(alpha) - 0.5 * math.log2(n)) * math.log(2)
    return BinomialTail(total, log_total, math.exp(log_total - log_ref))


def plot_rows(D: Sequence[float], b: int, d: int) -> list[tuple[int, float, int]]:
    """``(m, D(E_{Z_m}), digit sum of m in base b^d)`` for ``m = 1 .. len(D)``."""
    q = b**d
    rows = []
    for m, value in enumerate(D, start=1):
        s, rest = 0, m
        while rest:
            rest, e = divmod(rest, q)
            s += e
        rows.append((m, float(value), s))
    return rows


@dataclass
class CountReport:
    delta: float
    N: int
    surrogate_count: int
    predicted_exponent: float | None = None
    exact_count: int | None = None
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["schema_version"] = 1
        return out


@dataclass
class LowerBoundReport:
    kappa: float
    exponent: float
    delta: float
    grid: list[int]
    counts: list[int]
    slack: list[float]
    slope: float | None

    @property
    def ok(self) -> bool:
        return self.kappa > 0

    def to_dict(self) -> dict:
        out = asdict(self)
        out["schema_version"] = 1
        out["ok"] = self.ok
        return out


def verify_lower_bound(C: float, b: int, d: int, beta: float, tau: float,
                       grid: Sequence[int]) -> LowerBoundReport:
    """Fit ``kappa`` with ``count_surrogate(N) >= kappa N^h / sqrt(log N)`` on ``grid``.

    ``delta = C / (beta log b^d)``.  Every grid point must satisfy
    ``log N > beta log(b^d) / tau``.
    """
    h = entropy_exponent(b, d, beta, tau)
    logq = d * math.log(b)
    delta = C / (beta * logq)
    grid = [int(N) for N in grid]
    bad = [N for N in grid if not math.log(N) > beta * logq / tau]
    if bad:
        raise ValueError(f"grid points {bad} violate log N > beta log(b^d) / tau")
    counts = [count_surrogate(C, b, d, delta, N) for N in grid]
    scale = [N**h / math.sqrt(math.log(N)) for N in grid]
    ratios = [c / s for c, s in zip(counts, scale)]
    kappa = min(ratios)
    slack = [r / kappa - 1.0 if kappa > 0 else math.nan for r in ratios]
    slope = None
    if len(grid) >= 2 and all(counts):
        slope = float(np.polyfit(np.log(grid), np.log(counts), 1)[0])
    return LowerBoundReport(kappa, h, delta, grid, counts, slack, slope)
