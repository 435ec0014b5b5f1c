"""Digit-sum discrepancy bounds.

The general engine turns per-resolution bounds ``h_m`` on the discrepancy of
(translated, possibly perturbed) lattice images into a bound for any prefix
length ``N``, once through the digits of ``N`` (``eq1``) and once through the
digits of its complement ``N'`` (``eq2``).  The one-dimensional and sphere
bounds are specializations with closed-form or fitted ``h``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._keys import derive_seed, uniform_bits
from .points import lattice_set
from .radix import RadixExpansion, complement_digit_sum, digit_sum, expand, m_b
from .seqgen import GuidedPolicy, sboxplus_prefix
from .sphere import CenterSpec, cap_discrepancy_estimate, g_projection, lambert

SQRT2 = math.sqrt(2.0)
LAMBERT_CONST = 7.0 * SQRT2
HEALPIX_CONST = 4.0 * (5.0 + SQRT2)

H_KINDS = ("lattice-1d-star", "lattice-1d-lp", "perturbed-1d-star", "perturbed-1d-lp",
           "sphere-lambert", "sphere-healpix")


def lp_factor(p: float) -> Callable[[int], float]:
    """``f(n) = max(n^(p-1), 1)``; ``f = 1`` for ``p = inf``."""
    if math.isinf(p):
        return lambda n: 1.0
    return lambda n: max(float(n) ** (p - 1.0), 1.0)


def _unit(n: int) -> float:
    return 1.0


@dataclass
class HTable:
    """Per-resolution bounds ``h_m`` with a provenance tag per entry.

    ``values[m]`` is ``h_m^inf`` or, when fitted, the finite sup ``h_m^n`` over
    sampled translates at depth ``depth[m]``.
    """

    values: dict[int, float] = field(default_factory=dict)
    provenance: dict[int, str] = field(default_factory=dict)
    depth: dict[int, int] = field(default_factory=dict)
    kind: str = "supplied"
    default: float | None = None
    default_provenance: str = "closed-form"

    @classmethod
    def constant(cls, h: float, kind: str = "supplied", provenance: str = "closed-form") -> "HTable":
        return cls(kind=kind, default=float(h), default_provenance=provenance)

    def __getitem__(self, m: int) -> float:
        if m in self.values:
            return self.values[m]
        if self.default is not None:
            return self.default
        raise KeyError(f"h-table has no entry for resolution index {m}")

    def tag(self, m: int) -> str:
        return self.provenance.get(m, self.default_provenance)

    def set(self, m: int, h: float, provenance: str, depth: int | None = None) -> None:
        self.values[m] = float(h)
        self.provenance[m] = provenance
        if depth is not None:
            self.depth[m] = depth

    def to_json(self) -> str:
        return json.dumps({
            "schema_version": 1,
            "kind": self.kind,
            "default": self.default,
            "default_provenance": self.default_provenance,
            "entries": [
                {"m": m, "h": self.values[m], "provenance": self.provenance[m],
                 "depth": self.depth.get(m)}
                for m in sorted(self.values)
            ],
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "HTable":
        raw = json.loads(text)
        table = cls(kind=raw["kind"], default=raw["default"],
                    default_provenance=raw["default_provenance"])
        for e in raw["entries"]:
            table.set(int(e["m"]), e["h"], e["provenance"], e.get("depth"))
        return table


def theorem1_eq1(e: RadixExpansion, h: HTable, f: Callable[[int], float] = _unit) -> float:
    """``f(sum eps_j) * sum_j eps_j h_j``."""
    return f(digit_sum(e)) * sum(eps * h[j] for j, eps in enumerate(e.digits) if eps)


def theorem1_eq2(e: RadixExpansion, h: HTable, f: Callable[[int], float] = _unit) -> float:
    """``f(2 + sum (b^d-1-eps_j)) * (h_{n+1} + h_0 + sum_j (b^d-1-eps_j) h_j)``."""
    q = e.radix
    n = e.n
    rest = sum((q - 1 - eps) * h[j] for j, eps in enumerate(e.digits) if q - 1 - eps)
    return f(2 + complement_digit_sum(e)) * (h[n + 1] + h[0] + rest)


@dataclass
class BoundReport:
    N: int
    expansion: RadixExpansion
    bound_eq1: float
    bound_eq2: float
    f_spec: str
    h_provenance: dict

    @property
    def best(self) -> float:
        return min(self.bound_eq1, self.bound_eq2)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "N": self.N,
            "base": self.expansion.base,
            "dim": self.expansion.dim,
            "digits": list(self.expansion.digits),
            "bound_eq1": self.bound_eq1,
            "bound_eq2": self.bound_eq2,
            "best": self.best,
            "f": self.f_spec,
            "h_provenance": {str(k): v for k, v in self.h_provenance.items()},
        }


def bound_report(N: int, b: int, d: int, h: HTable, p: float = math.inf) -> BoundReport:
    """Both digit bounds for ``N`` with ``f`` chosen for ``L^p`` (or sup, ``p = inf``)."""
    e = expand(N, b, d)
    if N <= 0:
        raise ValueError("N must be positive")
    f = lp_factor(p)
    eq1 = theorem1_eq1(e, h, f)
    eq2 = theorem1_eq2(e, h, f)
    prov = {j: h.tag(j) for j in range(e.n + 2)}
    f_spec = "1" if math.isinf(p) else f"max(n^{p - 1:g}, 1)"
    return BoundReport(N, e, eq1, eq2, f_spec, prov)


def _check_p(p: float) -> float:
    p = float(p)
    if not p > 0:
        raise ValueError(f"p must lie in (0, inf], got {p}")
    return p


def thm2_bound(N: int, b: int, p: float) -> float:
    """Bound on ``N * D_p^(1/p)`` (``N * D_inf`` for ``p = inf``) of ``S^box_{b,1}``."""
    p = _check_p(p)
    M = m_b(expand(N, b, 1))
    if math.isinf(p):
        return float(M)
    if p < 1:
        return (M / (p + 1.0)) ** (1.0 / p)
    return M / (p + 1.0) ** (1.0 / p)


def thm3_bound(N: int, b: int, p: float) -> float:
    """Bound for guided sequences: twice the lattice bound for every ``p``."""
    return 2.0 * thm2_bound(N, b, p)


def closed_form_h(kind: str, p: float = math.inf) -> HTable:
    """Exact ``h`` for the one-dimensional kinds, for ``D = N * D_inf`` or ``D = N^p D_p``."""
    if kind == "lattice-1d-star":
        return HTable.constant(1.0, kind)
    if kind == "perturbed-1d-star":
        return HTable.constant(2.0, kind)
    p = _check_p(p)
    if kind == "lattice-1d-lp":
        return HTable.constant(1.0 / (p + 1.0), kind)
    if kind == "perturbed-1d-lp":
        return HTable.constant(2.0**p / (p + 1.0), kind)
    raise ValueError(f"no closed form for kind {kind!r}")


def engine_thm2(N: int, b: int, p: float, perturbed: bool = False) -> float:
    """The 1-d theorem bounds recomputed through the general engine."""
    p = _check_p(p)
    star = math.isinf(p)
    kind = ("perturbed" if perturbed else "lattice") + ("-1d-star" if star else "-1d-lp")
    h = closed_form_h(kind, p)
    best = bound_report(N, b, 1, h, p).best
    return best if star else best ** (1.0 / p)


def _weighted_digits(e: RadixExpansion) -> int:
    return sum(eps * e.base**j for j, eps in enumerate(e.digits))


@dataclass(frozen=True)
class SphereBound:
    digit_form: float
    simplified: float


def thm4_bound(N: int, b: int, fitted_c: float = 0.0) -> SphereBound:
    """Cap-discrepancy bound ``D_inf`` for the Lambert image of a guided ``S^boxplus_{b,2}``."""
    if N < 1:
        raise ValueError("N must be positive")
    e = expand(N, b, 2)
    s = _weighted_digits(e)
    tail = fitted_c * math.log(N) / N
    digit = LAMBERT_CONST / N * min(s, b ** (e.n + 1) * (b + 2) - s) + tail
    simple = 7.0 / SQRT2 * b * (b + 2) / math.sqrt(N) + tail
    if simple < digit * (1 - 1e-12):
        raise ArithmeticError(f"simplified bound below digit bound at N={N}")
    return SphereBound(digit, simple)


def thm5_bound(N: int, fitted_c: float = 0.0) -> SphereBound:
    """Cap-discrepancy bound for the G-image of ``S^box_{2,2}``, ``N = 12 K + k``."""
    if N < 1:
        raise ValueError("N must be positive")
    K = N // 12
    tail = fitted_c * math.log(N) / N
    digit = tail
    if K:
        e = expand(K, 2, 2)
        s = _weighted_digits(e)
        digit += HEALPIX_CONST / N * min(s, 2 ** (e.n + 1) * 4 - s)
    simple = 8.0 / math.sqrt(3.0) * (5.0 + SQRT2) / math.sqrt(N) + tail
    if simple < digit * (1 - 1e-12):
        raise ArithmeticError(f"simplified bound below digit bound at N={N}")
    return SphereBound(digit, simple)


def fit_constant(measured, baseline) -> float:
    """Smallest ``C >= 0`` with ``measured <= baseline + C`` elementwise."""
    gap = np.asarray(measured, dtype=np.float64) - np.asarray(baseline, dtype=np.float64)
    return float(max(0.0, gap.max()))


@dataclass(frozen=True)
class SamplingSpec:
    m_values: tuple[int, ...] = (1, 2, 3)
    samples: int = 8
    translate_depth: int | None = None
    max_translates: int = 10_000
    seed: int = 0
    n_random_centers: int = 256


def _translates(b: int, m: int, depth: int, count: int, seed: int, max_grid: int) -> np.ndarray:
    """Sample of ``W_m^{depth}`` = ``b^(-depth-1) Z^2 ∩ [0, b^-m)^2`` in grid units."""
    side = b ** (depth + 1 - m)
    if side * side <= min(count, max_grid):
        g = np.arange(side)
        return np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    raw = uniform_bits(62, seed, 0x7A5, m, np.arange(count)[:, None], np.arange(2)[None, :])
    raw[0] = 0  # the zero shift is valid for every set
    return raw % side


def fit_h_table(kind: str, b: int = 2, p: float = math.inf,
                sampling: SamplingSpec | None = None) -> HTable:
    """``h`` per resolution: exact for the 1-d kinds, estimated for the sphere kinds.

    The sphere estimates take the maximum cap-discrepancy estimate over sampled
    valid translates ``v`` (and, for ``sphere-lambert``, over seeded perturbed
    lattice sets) at translate depth ``n``; entries are tagged ``fitted``.
    """
    if kind not in H_KINDS:
        raise ValueError(f"unknown h kind {kind!r}")
    if not kind.startswith("sphere"):
        return closed_form_h(kind, p)

    sampling = sampling or SamplingSpec()
    if kind == "sphere-healpix" and b != 2:
        raise ValueError("sphere-healpix uses base 2")
    table = HTable(kind=kind)
    for m in sampling.m_values:
        depth = sampling.translate_depth if sampling.translate_depth is not None else m + 1
        if depth < m:
            raise ValueError("translate depth must be >= m")
        grid = b ** (depth + 1)
        K = b**m
        vs = _translates(b, m, depth, sampling.samples, sampling.seed, sampling.max_translates)
        centers = CenterSpec(n_random=sampling.n_random_centers, seed=sampling.seed)
        best = 0.0
        for i, v in enumerate(vs):
            if kind == "sphere-healpix":
                base = lattice_set(K, 2).values
            else:
                guided = GuidedPolicy.seeded(derive_seed(sampling.seed, f"fit/{m}/{i}"))
                base = sboxplus_prefix(K * K, b, 2, None, guided).values
            moved = base + v / grid
            if moved.max() >= 1.0:
                continue  # not a valid translate of this perturbed set
            pts = g_projection(moved).reshape(-1, 3) if kind == "sphere-healpix" else lambert(moved)
            best = max(best, cap_discrepancy_estimate(pts, centers))
        table.set(m, best, "fitted", depth)
    return table
