"""Self-similar lattice sequences ``S^box`` and their guided perturbations ``S^boxplus``.

``S^box_{b,d}`` in closed form: with ``n = sum_r eps_r (b^d)^r`` the point is
``s_n = sum_r H^{(r)}_{eps_r} b^{-r-1}``, where ``H^{(r)}`` is the level-``r``
enumeration of ``{0..b-1}^d \\ {0}`` (``H_0`` is always the origin).  For
``d = 1`` and the identity policy this is the base-``b`` van der Corput
sequence.

A guided sequence ``(q_0, q_1, ...)`` fills, at each level ``m``, the ``b^d``
sub-cells of every box ``s_r + b^{-m}[0,1)^d`` with exactly one point, the
point ``q_{r + k b^{dm}}`` (``1 <= k < b^d``) always landing inside that box.
All coordinates are kept as integers over a common denominator so that the
lattice identities can be checked exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ._keys import uniform_bits
from .points import PointSet
from .radix import expand

IN_CELL_BITS = 32

PERM_MODES = ("identity", "per-level-explicit", "seeded-random")
CELL_CHOICES = ("mimic-sbox", "seeded-random")
IN_CELL_POSITIONS = ("cell-origin", "cell-center", "seeded-random-uniform")


class CheckFailed(AssertionError):
    """A structural identity that must hold by construction was violated."""


@lru_cache(maxsize=None)
def _h_table(b: int, d: int) -> np.ndarray:
    out = np.zeros((b**d, d), dtype=np.int64)
    for k in range(b**d):
        out[k] = canonical_H(b, d, k)
    out.setflags(write=False)
    return out


def canonical_H(b: int, d: int, k: int) -> tuple[int, ...]:
    """Base-``b`` digits of ``k`` as a ``d``-vector, most significant digit first."""
    if not 0 <= k < b**d:
        raise ValueError(f"k must lie in [0, {b**d}), got {k}")
    digits = []
    for _ in range(d):
        k, r = divmod(k, b)
        digits.append(r)
    return tuple(reversed(digits))


@dataclass(frozen=True)
class PermutationPolicy:
    """Choice of the enumeration ``H^{(m)}`` at each level.

    ``tables[m]`` is a tuple ``(pi(1), ..., pi(b^d - 1))`` and means
    ``H^{(m)}_k = canonical_H(pi(k))``.  Levels missing from an explicit table
    use the identity.
    """

    mode: str = "identity"
    tables: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.mode not in PERM_MODES:
            raise ValueError(f"unknown permutation mode {self.mode!r}")
        for level, table in self.tables.items():
            if sorted(table) != list(range(1, len(table) + 1)):
                raise ValueError(f"level {level} table is not a bijection on 1..{len(table)}")

    @classmethod
    def identity(cls) -> "PermutationPolicy":
        return cls()

    @classmethod
    def seeded(cls, seed: int) -> "PermutationPolicy":
        return cls("seeded-random", seed=seed)

    def level_map(self, b: int, d: int, level: int) -> np.ndarray:
        """Array ``pi`` of length ``b^d`` with ``pi[0] = 0``."""
        q = b**d
        if self.mode == "identity":
            return np.arange(q, dtype=np.int64)
        if self.mode == "per-level-explicit":
            table = self.tables.get(level)
            if table is None:
                return np.arange(q, dtype=np.int64)
            if len(table) != q - 1:
                raise ValueError(f"level {level} table must have {q - 1} entries")
            return np.array((0, *table), dtype=np.int64)
        keys = uniform_bits(62, self.seed, 0x5B0C, level, np.arange(1, q))
        return np.concatenate([[0], 1 + np.argsort(keys, kind="stable")]).astype(np.int64)


@dataclass(frozen=True)
class GuidedPolicy:
    cell_choice: str = "mimic-sbox"
    in_cell_position: str = "cell-origin"
    q0: tuple[float, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.cell_choice not in CELL_CHOICES:
            raise ValueError(f"unknown cell choice {self.cell_choice!r}")
        if self.in_cell_position not in IN_CELL_POSITIONS:
            raise ValueError(f"unknown in-cell position {self.in_cell_position!r}")
        if self.q0 is not None and not all(0.0 <= x < 1.0 for x in self.q0):
            raise ValueError("q0 must lie in [0, 1)^d")

    @classmethod
    def seeded(cls, seed: int) -> "GuidedPolicy":
        return cls("seeded-random", "seeded-random-uniform", None, seed)


@dataclass(frozen=True)
class LatticePoint:
    """Exact point ``numerators / base**depth``."""

    numerators: tuple[int, ...]
    depth: int
    base: int

    def as_fractions(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(x, self.base**self.depth) for x in self.numerators)

    def reduced(self) -> list[tuple[int, int]]:
        """Per-coordinate ``(numerator, depth)`` with minimal depth."""
        out = []
        for x in self.numerators:
            depth = self.depth
            while depth and x % self.base == 0:
                x //= self.base
                depth -= 1
            out.append((x, depth if x else 0))
        return out


def levels_for(N: int, q: int) -> int:
    """Smallest ``L`` with ``q**L >= N``."""
    L = 0
    while q**L < N:
        L += 1
    return L


def sbox_numerators(indices, b: int, d: int, policy: PermutationPolicy, depth: int) -> np.ndarray:
    """Numerators over ``b**depth`` of ``s_n`` for every ``n`` in ``indices``."""
    idx = np.asarray(indices, dtype=np.int64)
    q = b**d
    if idx.size and idx.max() >= q**depth:
        raise ValueError(f"index {idx.max()} needs more than {depth} levels")
    H = _h_table(b, d)
    num = np.zeros(idx.shape + (d,), dtype=np.int64)
    rest = idx.copy()
    for r in range(depth):
        eps = rest % q
        rest //= q
        num += H[policy.level_map(b, d, r)[eps]] * b ** (depth - r - 1)
    return num


def sbox_point(n: int, b: int, d: int, policy: PermutationPolicy | None = None) -> LatticePoint:
    policy = policy or PermutationPolicy()
    depth = len(expand(n, b, d).digits)
    num = sbox_numerators([n], b, d, policy, depth)[0]
    return LatticePoint(tuple(int(x) for x in num), depth, b)


def sbox_prefix(N: int, b: int, d: int, policy: PermutationPolicy | None = None) -> PointSet:
    """First ``N`` points of ``S^box_{b,d}``, exact over ``b**L`` with ``b**(dL) >= N``."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    policy = policy or PermutationPolicy()
    depth = levels_for(N, b**d)
    num = sbox_numerators(np.arange(N), b, d, policy, depth)
    return PointSet.from_exact(num.reshape(N, d), b**depth, base=b)


def _codes(digits: np.ndarray, b: int) -> np.ndarray:
    code = np.zeros(digits.shape[:-1], dtype=np.int64)
    for j in range(digits.shape[-1]):
        code = code * b + digits[..., j]
    return code


class GuidedState:
    """Occupancy bookkeeping while a guided prefix is filled level by level.

    Points are integer numerators over ``b**L * 2**bits``; ``bits`` of dyadic
    resolution are reserved for the in-cell offset.
    """

    def __init__(self, N: int, b: int, d: int, perm: PermutationPolicy, guided: GuidedPolicy):
        self.N, self.b, self.d = N, b, d
        self.q = b**d
        self.perm, self.guided = perm, guided
        self.L = levels_for(N, self.q)
        bits = IN_CELL_BITS
        while bits > 1 and b**self.L * 2**bits * max(N, 1) >= 2**62:
            bits -= 1
        self.bits = bits
        self.denominator = b**self.L * 2**bits
        self.nums = np.zeros((N, d), dtype=np.int64)
        if N:
            q0 = guided.q0 if guided.q0 is not None else (0.0,) * d
            if len(q0) != d:
                raise ValueError(f"q0 must have {d} coordinates")
            self.nums[0] = [int(Fraction(x) * self.denominator) for x in q0]

    def occupants(self, m: int) -> np.ndarray:
        """Index of the unique earlier point in each depth-``m`` cell (row-major code)."""
        count = self.q**m
        unit = self.denominator // self.b**m
        codes = _codes(self.nums[:count] // unit, self.b**m)
        occ = np.full(count, -1, dtype=np.int64)
        occ[codes] = np.arange(count)
        if np.bincount(codes, minlength=count).max() != 1:
            raise CheckFailed(f"lattice filling broken at depth {m}")
        return occ

    def fill_level(self, m: int) -> None:
        b, q = self.b, self.q
        start, stop = q**m, min(q ** (m + 1), self.N)
        if start >= stop:
            return
        idx = np.arange(start, stop)
        r, k = idx % q**m, idx // q**m
        box = sbox_numerators(r, b, self.d, self.perm, m)
        occ = self.occupants(m)[_codes(box, b**m)]
        sub_unit = self.denominator // b ** (m + 1)
        occ_code = _codes(self.nums[occ] // sub_unit - b * box, b)

        g = self.guided
        if g.cell_choice == "mimic-sbox":
            pref = self.perm.level_map(b, self.d, m)[k]
            code = np.where(pref == occ_code, 0, pref)
        else:
            keys = uniform_bits(62, g.seed, 0xCE11, m, r[:, None], np.arange(q)[None, :])
            keys[np.arange(len(idx)), occ_code] = -1
            order = np.argsort(keys, axis=1, kind="stable")
            code = order[np.arange(len(idx)), k]

        corner = b * box + _h_table(b, self.d)[code]
        scale = b ** (self.L - m - 1)
        if g.in_cell_position == "cell-origin":
            offset = np.zeros_like(corner)
        elif g.in_cell_position == "cell-center":
            offset = np.full_like(corner, 2 ** (self.bits - 1))
        else:
            offset = uniform_bits(self.bits, g.seed, 0x0FF5, m, r[:, None], k[:, None],
                                  np.arange(self.d)[None, :])
        self.nums[start:stop] = corner * sub_unit + offset * scale

    def build(self) -> PointSet:
        for m in range(self.L):
            self.fill_level(m)
        return PointSet.from_exact(self.nums, self.denominator, base=self.b)


def sboxplus_prefix(N: int, b: int, d: int, perm: PermutationPolicy | None = None,
                    guided: GuidedPolicy | None = None) -> PointSet:
    """First ``N`` points of an ``S^box``-guided sequence.

    Parameters
    ----------
    N : int
        Prefix length.
    b, d : int
        Base and dimension.
    perm : PermutationPolicy
        Enumeration policy of the guiding ``S^box`` sequence.
    guided : GuidedPolicy
        How free sub-cells are chosen and where the point sits inside its cell.
        ``GuidedPolicy()`` (mimic, cell-origin, ``q0 = 0``) reproduces ``S^box``.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    return GuidedState(N, b, d, perm or PermutationPolicy(), guided or GuidedPolicy()).build()


@dataclass
class GuidanceReport:
    ok: bool
    message: str = ""
    cell: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_guidance(points: PointSet, b: int, d: int,
                   perm: PermutationPolicy | None = None) -> GuidanceReport:
    """Check lattice filling and guidance at every level fully covered by ``points``."""
    perm = perm or PermutationPolicy()
    q = b**d
    n = len(points)
    top = 0
    while q ** (top + 1) < n:
        top += 1
    if q ** (top + 1) != n:
        return GuidanceReport(False, f"length {n} is not a power of {q} (>= {q})")
    for m in range(top + 1):
        count = q ** (m + 1)
        K = b ** (m + 1)
        cells = np.asarray(points.head(count).cells(K), dtype=np.int64)
        codes = _codes(cells, K)
        hits = np.bincount(codes, minlength=K**d)
        bad = np.flatnonzero(hits != 1)
        if bad.size:
            c = int(bad[0])
            cell = tuple(int(x) for x in np.unravel_index(c, (K,) * d))
            return GuidanceReport(False, f"depth {m + 1} cell {cell} holds {hits[c]} points", cell)
        idx = np.arange(q**m, count)
        box = sbox_numerators(idx % q**m, b, d, perm, m)
        own = np.asarray(points.head(count).cells(b**m), dtype=np.int64)[idx]
        wrong = np.flatnonzero(np.any(own != box, axis=1))
        if wrong.size:
            i = int(idx[wrong[0]])
            return GuidanceReport(False, f"q_{i} lies outside its guiding box at depth {m}",
                                  tuple(int(x) for x in own[wrong[0]]))
    return GuidanceReport(True)


def _as_eps(eps, m: int, q: int) -> list[int]:
    eps = [int(e) for e in eps]
    if len(eps) != m or any(not 0 <= e < q for e in eps):
        raise ValueError(f"eps must be {m} digits in [0, {q})")
    return eps


def lemma_index(eps, t: int, q: int) -> int:
    """``K(t) = sum_{r=t}^m eps_r q^r`` with ``eps = (eps_1, ..., eps_m)``."""
    return sum(e * q**r for r, e in enumerate(eps, start=1) if r >= t)


def check_lemma1(b: int, d: int, policy: PermutationPolicy | None, m: int, eps, t: int,
                 k: int) -> tuple[Fraction, ...]:
    """Return the shift ``v`` with ``s_{K(t)+j} = v + s_j`` for ``j <= k``; raise on failure."""
    policy = policy or PermutationPolicy()
    q = b**d
    eps = _as_eps(eps, m, q)
    if not 1 <= t <= m:
        raise ValueError("need 1 <= t <= m")
    if not 0 <= k < q**t:
        raise ValueError(f"need 0 <= k < b^(dt) = {q**t}")
    K = lemma_index(eps, t, q)
    depth = m + 1
    seg = sbox_numerators(np.arange(K, K + k + 1), b, d, policy, depth)
    base = sbox_numerators(np.arange(k + 1), b, d, policy, depth)
    v = seg[0] - base[0]
    diff = seg - base
    mismatch = np.flatnonzero(np.any(diff != v, axis=1))
    if mismatch.size:
        j = int(mismatch[0])
        raise CheckFailed(f"segment shift fails at index {K + j}: shift {diff[j]} != {v} (over b^{depth})")
    # v must lie in [0, b^-t)^d on the grid b^(-m-1) Z^d
    if np.any(v < 0) or np.any(v >= b ** (depth - t)):
        raise CheckFailed(f"segment shift {v} outside [0, b^-{t})")
    return tuple(Fraction(int(x), b**depth) for x in v)


def check_lemma2(b: int, d: int, perm: PermutationPolicy | None, guided: GuidedPolicy | None,
                 m: int, eps, t: int, points: PointSet | None = None) -> tuple[Fraction, ...]:
    """Return ``v`` such that ``{q_{K(t)}, ..., q_{K(t)+b^(dt)-1}} - v`` is a perturbed lattice set.

    ``points`` may supply a precomputed guided prefix of sufficient length.
    """
    perm = perm or PermutationPolicy()
    q = b**d
    eps = _as_eps(eps, m, q)
    if not 0 < t <= m:
        raise ValueError("need 0 < t <= m")
    K = lemma_index(eps, t, q)
    need = K + q**t
    if points is None:
        points = sboxplus_prefix(need, b, d, perm, guided)
    if len(points) < need:
        raise ValueError(f"need at least {need} points")
    top = max((r for r, e in enumerate(eps, start=1) if e), default=0)
    v_num = np.zeros(d, dtype=np.int64)
    depth = m
    for r in range(t, top):
        v_num += _h_table(b, d)[perm.level_map(b, d, r)[eps[r - 1]]] * b ** (depth - r - 1)
    if np.any(v_num >= b ** (depth - t)):
        raise CheckFailed(f"lattice shift {v_num} outside [0, b^-{t})")
    den = points.denominator
    # work over den * b^m so that v is integral whatever the prefix depth
    shifted = points.numerators[K:need].astype(object) * b**depth - v_num.astype(object) * den
    if np.any(shifted < 0):
        raise CheckFailed("lattice shift leaves the unit cube")
    cells = (shifted // (den * b ** (depth - t))).astype(np.int64)
    hits = np.bincount(_codes(cells, b**t), minlength=q**t)
    if hits.max() != 1 or hits.size != q**t:
        bad = int(np.flatnonzero(hits != 1)[0])
        raise CheckFailed(f"shifted segment is not a perturbed lattice: cell {bad} holds {hits[bad]} points")
    return tuple(Fraction(int(x), b**depth) for x in v_num)


def tail_gaps(b: int, d: int, perm: PermutationPolicy | None, guided: GuidedPolicy | None,
              t_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Sup-norm gaps ``|s_t - q_t|`` and the scaled gaps ``|s_t - q_t| b^{m(t)}`` for ``1 <= t <= t_max``."""
    N = t_max + 1
    S = sbox_prefix(N, b, d, perm)
    Q = sboxplus_prefix(N, b, d, perm, guided)
    lift = Q.denominator // S.denominator
    diff = np.abs(Q.numerators - S.numerators * lift).max(axis=1)[1:]
    t = np.arange(1, N)
    mt = np.zeros_like(t)
    q = b**d
    while np.any(q ** (mt + 1) <= t):
        mt += q ** (mt + 1) <= t
    gaps = diff / Q.denominator
    scaled = (diff * b**mt).astype(np.float64) / Q.denominator
    return gaps, scaled


def tail_distance(b: int, d: int, perm: PermutationPolicy | None, guided: GuidedPolicy | None,
                  t_max: int) -> float:
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    return float(tail_gaps(b, d, perm, guided, t_max)[1].max())
