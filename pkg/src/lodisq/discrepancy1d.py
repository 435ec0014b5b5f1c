"""Exact star and L^p discrepancy of finite multisets on [0, 1).

Both quantities are returned unnormalized: ``star_discrepancy`` gives
``N * D_inf`` and ``lp_discrepancy`` gives ``N**p * D_p``.  Star counts use
closed intervals ``[0, t]``; the L^p integrand counts the half-open ``[0, t)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .points import PointSet


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure1D:
    """Sum of unit point masses on [0, 1).

    ``values`` are the distinct support points in increasing order with
    multiplicities ``counts``.  If ``numerators`` is set the support is exact,
    ``values == numerators / denominator``.
    """

    values: np.ndarray
    counts: np.ndarray
    numerators: np.ndarray | None = None
    denominator: int | None = None

    @classmethod
    def from_values(cls, values) -> "EmpiricalMeasure1D":
        vals = np.asarray(values, dtype=np.float64).ravel()
        if vals.size == 0:
            raise ValueError("empirical measure needs at least one point")
        if vals.min() < 0.0 or vals.max() >= 1.0:
            raise ValueError("points must lie in [0, 1)")
        vals, counts = np.unique(vals, return_counts=True)
        return cls(vals, counts)

    @classmethod
    def from_exact(cls, numerators, denominator: int) -> "EmpiricalMeasure1D":
        num = np.asarray(numerators).ravel()
        if num.size == 0:
            raise ValueError("empirical measure needs at least one point")
        num, counts = np.unique(num, return_counts=True)
        if num[0] < 0 or num[-1] >= denominator:
            raise ValueError("points must lie in [0, 1)")
        return cls(num.astype(np.float64) / denominator, counts, num, int(denominator))

    @classmethod
    def from_points(cls, points: PointSet) -> "EmpiricalMeasure1D":
        if points.dim != 1:
            raise ValueError("one-dimensional point set required")
        if points.exact:
            return cls.from_exact(points.numerators[:, 0], points.denominator)
        return cls.from_values(points.values[:, 0])

    @property
    def N(self) -> int:
        return int(self.counts.sum())

    @property
    def exact(self) -> bool:
        return self.numerators is not None

    def samples(self) -> np.ndarray:
        return np.repeat(self.values, self.counts)

    def __add__(self, other: "EmpiricalMeasure1D") -> "EmpiricalMeasure1D":
        if self.exact and other.exact:
            den = self.denominator * other.denominator // np.gcd(self.denominator, other.denominator)
            a = np.repeat(self.numerators, self.counts) * (den // self.denominator)
            b = np.repeat(other.numerators, other.counts) * (den // other.denominator)
            return EmpiricalMeasure1D.from_exact(np.concatenate([a, b]), den)
        return EmpiricalMeasure1D.from_values(np.concatenate([self.samples(), other.samples()]))


def _as_measure(mu) -> EmpiricalMeasure1D:
    if isinstance(mu, EmpiricalMeasure1D):
        return mu
    if isinstance(mu, PointSet):
        return EmpiricalMeasure1D.from_points(mu)
    return EmpiricalMeasure1D.from_values(mu)


def star_discrepancy(mu) -> Fraction | float:
    """``sup_{0<t<1} |#{z_j <= t} - N t|``.

    The supremum of the piecewise-linear counting error is attained as a
    one-sided limit at a support point, so only those candidates are scanned.
    Exact input yields a :class:`~fractions.Fraction`.
    """
    mu = _as_measure(mu)
    N = mu.N
    cum = np.cumsum(mu.counts)
    below = cum - mu.counts
    if mu.exact:
        den = mu.denominator
        num = mu.numerators
        if N * den >= 2**62:
            num, cum, below = num.astype(object), cum.astype(object), below.astype(object)
        upper = np.abs(cum * den - N * num)
        lower = np.abs(below * den - N * num)[num > 0]
        best = max(upper.max(), lower.max() if lower.size else 0)
        return Fraction(int(best), den)
    x = mu.values
    upper = np.abs(cum - N * x)
    lower = np.abs(below - N * x)[x > 0]
    return float(max(upper.max(), lower.max() if lower.size else 0.0))


def _signed_primitive(u: np.ndarray, p: float) -> np.ndarray:
    # odd antiderivative of |u|^p, so no split at the zero crossing is needed
    return np.sign(u) * np.abs(u) ** (p + 1.0) / (p + 1.0)


def lp_discrepancy(mu, p: float) -> float:
    """``int_0^1 |#{z_j < t} - N t|^p dt`` integrated exactly segment by segment."""
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    p = float(p)
    mu = _as_measure(mu)
    N = mu.N
    x = mu.values
    cum = np.cumsum(mu.counts)
    left = np.concatenate([[0.0], x])
    right = np.concatenate([x, [1.0]])
    c = np.concatenate([[0], cum]).astype(np.float64)
    seg = _signed_primitive(c - N * left, p) - _signed_primitive(c - N * right, p)
    return float(seg.sum() / N)


def closed_form_lattice_lp(b: int, m: int, v: float, p: float) -> float:
    """Normalized ``D_p`` of ``omega(b, m, v) = [0, 1) ∩ (Z + v) b^-m``."""
    if not p > 0:
        raise ValueError("p must be positive")
    return (v ** (p + 1) + (1 - v) ** (p + 1)) / (p + 1) * float(b) ** (-m * p)


def shifted_lattice(b: int, m: int, v: float) -> np.ndarray:
    K = b**m
    return (np.arange(K) + v) / K


def extremal_pair_set(b: int, m: int) -> np.ndarray:
    """Pairs of coincident points at ``2i / b^m``; a single leftover point when ``b^m`` is odd."""
    K = b**m
    return (2 * (np.arange(K) // 2)) / K


def extremal_pair_lp(b: int, m: int, p: float) -> float:
    """Normalized ``D_p`` of the paired configuration, in closed form."""
    if not p > 0:
        raise ValueError("p must be positive")
    K = b**m
    pairs, single = divmod(K, 2)
    return (pairs * 2.0 ** (p + 1) + single) / ((p + 1) * float(K) ** (p + 1))


def verify_perturbed_lattice(points: PointSet, b: int, m: int) -> bool:
    """True iff each cell ``q + b^-m [0,1)^d`` of the grid holds exactly one point."""
    K = b**m
    if len(points) != K**points.dim:
        raise ValueError(f"expected {K**points.dim} points, got {len(points)}")
    hits = np.bincount(points.cell_codes(K), minlength=K**points.dim)
    return bool(hits.size == K**points.dim and np.all(hits == 1))


@dataclass(frozen=True)
class FSublinearityWitness:
    """``f(n) = max(n^(p-1), 1)``, the sublinearity factor of ``|x|^p``."""

    p: float

    def __call__(self, n: int) -> float:
        return max(float(n) ** (self.p - 1.0), 1.0)


def check_f_sublinearity(D: Callable[[EmpiricalMeasure1D], float], f: Callable[[int], float],
                         parts: Sequence[EmpiricalMeasure1D], rtol: float = 1e-9) -> bool:
    if not parts:
        raise ValueError("need at least one part")
    parts = [_as_measure(x) for x in parts]
    total = parts[0]
    for part in parts[1:]:
        total = total + part
    lhs = float(D(total))
    rhs = f(len(parts)) * sum(float(D(x)) for x in parts)
    return lhs <= rhs + rtol * abs(rhs)


def prefix_star_discrepancies(points: PointSet) -> list:
    """``N * D_inf`` of every prefix ``N = 1 .. len(points)`` of a 1-d point set."""
    out = []
    for N in range(1, len(points) + 1):
        out.append(star_discrepancy(points.head(N)))
    return out


def prefix_lp_discrepancies(points: PointSet, p: float) -> np.ndarray:
    """``N**p * D_p`` of every prefix of a 1-d point set."""
    vals = points.values[:, 0]
    out = np.empty(len(vals))
    for N in range(1, len(vals) + 1):
        out[N - 1] = lp_discrepancy(EmpiricalMeasure1D.from_values(vals[:N]), p)
    return out
