"""Digit expansions of integers in base ``b**d`` and the digit sums used by the bounds."""

from __future__ import annotations

from dataclasses import dataclass

MAX_N = 2**64 - 1


@dataclass(frozen=True)
class RadixExpansion:
    """Little-endian digits of ``value`` in base ``base ** dim``.

    ``digits[j]`` multiplies ``(base ** dim) ** j``; the top digit is nonzero
    unless ``value == 0``, in which case ``digits`` is empty.
    """

    base: int
    dim: int
    digits: tuple[int, ...]
    value: int

    @property
    def radix(self) -> int:
        return self.base**self.dim

    @property
    def n(self) -> int:
        """Index of the leading digit, ``floor(log N / (d log b))``; -1 for N = 0."""
        return len(self.digits) - 1

    def reassemble(self) -> int:
        q = self.radix
        total = 0
        for eps in reversed(self.digits):
            total = total * q + eps
        return total


def _check_params(b: int, d: int) -> None:
    if b < 2:
        raise ValueError(f"base b must be >= 2, got {b}")
    if d < 1:
        raise ValueError(f"dimension d must be >= 1, got {d}")


def expand(N: int, b: int, d: int = 1) -> RadixExpansion:
    """Return the base ``b**d`` expansion of ``N``.

    >>> expand(37, 2, 2).digits
    (1, 1, 2)
    """
    _check_params(b, d)
    N = int(N)
    if N < 0 or N > MAX_N:
        raise ValueError(f"N must lie in [0, 2**64), got {N}")
    q = b**d
    digits = []
    rest = N
    while rest:
        rest, eps = divmod(rest, q)
        digits.append(eps)
    return RadixExpansion(b, d, tuple(digits), N)


def digit_sum(e: RadixExpansion) -> int:
    return sum(e.digits)


def m_b(e: RadixExpansion) -> int:
    """``min(sum eps_j, b(n+1) - n + 1 - sum eps_j)`` for a one-dimensional expansion."""
    if e.dim != 1:
        raise ValueError("m_b is defined for d = 1 only")
    if e.value <= 0:
        raise ValueError("m_b requires N > 0")
    s = digit_sum(e)
    n = e.n
    return min(s, e.base * (n + 1) - n + 1 - s)


def complement(e: RadixExpansion) -> int:
    """``N' = 1 + sum_j (b^d - 1 - eps_j) (b^d)^j``, so that ``N + N' = (b^d)^(n+1)``."""
    if e.value <= 0:
        raise ValueError("complement requires N > 0")
    q = e.radix
    total = 0
    for eps in reversed(e.digits):
        total = total * q + (q - 1 - eps)
    return total + 1


def complement_digit_sum(e: RadixExpansion) -> int:
    """``sum_j (b^d - 1 - eps_j)`` over the ``n + 1`` stored digits."""
    return (e.radix - 1) * len(e.digits) - digit_sum(e)
