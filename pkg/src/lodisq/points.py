"""Finite ordered multisets of points in the unit cube, exact or floating."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

_INT64_SAFE = 2**62


@dataclass(frozen=True, eq=False)
class PointSet:
    """Ordered multiset of points in ``[0, 1)^d``.

    When ``numerators`` is set the points are exact: coordinate ``(i, j)`` equals
    ``numerators[i, j] / denominator``.  Floating sets (CSV input, sphere
    preimages, translates) carry only ``values``.
    """

    values: np.ndarray
    numerators: np.ndarray | None = None
    denominator: int | None = None
    base: int | None = None
    resolution_hint: int | None = None

    @classmethod
    def from_exact(cls, numerators, denominator: int, base: int | None = None,
                   resolution_hint: int | None = None) -> "PointSet":
        num = np.asarray(numerators)
        if num.ndim == 1:
            num = num[:, None]
        denominator = int(denominator)
        if num.size and (num.min() < 0 or num.max() >= denominator):
            raise ValueError("exact coordinates must lie in [0, 1)")
        values = num.astype(np.float64) / float(denominator)
        if denominator >= 2**53:
            # plain float division of two large ints loses the bottom bits
            values = np.array([[float(Fraction(int(x), denominator)) for x in row] for row in num],
                              dtype=np.float64).reshape(num.shape)
        return cls(values, num, denominator, base, resolution_hint)

    @classmethod
    def from_floats(cls, values, resolution_hint: int | None = None) -> "PointSet":
        vals = np.asarray(values, dtype=np.float64)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.size and (vals.min() < 0.0 or vals.max() >= 1.0):
            raise ValueError("points must lie in [0, 1)^d")
        return cls(vals, resolution_hint=resolution_hint)

    @property
    def exact(self) -> bool:
        return self.numerators is not None

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __len__(self) -> int:
        return self.values.shape[0]

    def head(self, n: int) -> "PointSet":
        if self.exact:
            return PointSet(self.values[:n], self.numerators[:n], self.denominator, self.base)
        return PointSet(self.values[:n])

    def fraction(self, i: int, j: int = 0) -> Fraction:
        if self.exact:
            return Fraction(int(self.numerators[i, j]), self.denominator)
        return Fraction(float(self.values[i, j]))

    def as_fractions(self) -> list[tuple[Fraction, ...]]:
        return [tuple(self.fraction(i, j) for j in range(self.dim)) for i in range(len(self))]

    def cells(self, K: int) -> np.ndarray:
        """Integer grid-cell coordinates ``floor(K * x)`` of every point, shape ``(N, d)``."""
        if self.exact:
            if self.denominator % K == 0:
                return self.numerators // (self.denominator // K)
            if self.denominator * K < _INT64_SAFE:
                return (self.numerators * K) // self.denominator
            num = self.numerators.astype(object)
            return (num * K) // self.denominator
        return np.minimum(np.floor(self.values * K).astype(np.int64), K - 1)

    def cell_codes(self, K: int) -> np.ndarray:
        """Row-major flattened cell index, first coordinate most significant."""
        c = np.asarray(self.cells(K), dtype=np.int64)
        code = np.zeros(len(self), dtype=np.int64)
        for j in range(self.dim):
            code = code * K + c[:, j]
        return code


def lattice_set(K: int, d: int) -> PointSet:
    """The grid ``(Z^d / K) ∩ [0, 1)^d`` in row-major order."""
    axes = np.meshgrid(*([np.arange(K)] * d), indexing="ij")
    num = np.stack([a.ravel() for a in axes], axis=1).astype(np.int64)
    return PointSet.from_exact(num, K, resolution_hint=K)
