"""Measured-versus-bound sweeps over prefix lengths, shared by ``verify`` and the acceptance suite."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ._keys import derive_seed
from .bounds import HEALPIX_CONST, LAMBERT_CONST, fit_constant, thm2_bound, thm3_bound
from .discrepancy1d import EmpiricalMeasure1D, lp_discrepancy, star_discrepancy
from .points import PointSet
from .seqgen import GuidedPolicy, PermutationPolicy, sbox_prefix, sboxplus_prefix
from .sphere import CenterSpec, cap_discrepancy_estimate, sphere_prefix

LP_TOL = 1e-9


@dataclass
class Row:
    instance: int
    N: int
    p: float
    measured: float
    bound: float

    @property
    def slack(self) -> float:
        return self.bound - self.measured


@dataclass
class SweepResult:
    rows: list[Row] = field(default_factory=list)
    violations: list[Row] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def extend(self, other: "SweepResult") -> None:
        self.rows.extend(other.rows)
        self.violations.extend(other.violations)


def permutation_instances(seed: int, count: int) -> list[PermutationPolicy]:
    """Identity first, then seeded random enumerations."""
    out = [PermutationPolicy.identity()]
    out += [PermutationPolicy.seeded(derive_seed(seed, f"perm/{i}")) for i in range(1, count)]
    return out[:count]


def guided_instances(seed: int, count: int) -> list[tuple[PermutationPolicy, GuidedPolicy]]:
    return [(PermutationPolicy.seeded(derive_seed(seed, f"gperm/{i}")),
             GuidedPolicy.seeded(derive_seed(seed, f"guided/{i}")))
            for i in range(count)]


def measured_1d(mu: EmpiricalMeasure1D, p: float):
    """``N D_inf`` (exact when possible) or ``N D_p^(1/p)``."""
    if math.isinf(p):
        return star_discrepancy(mu)
    return lp_discrepancy(mu, p) ** (1.0 / p)


def sweep_1d(points: PointSet, b: int, ps: Sequence[float], bound: Callable[[int, int, float], float],
             instance: int = 0, n_min: int = 1) -> SweepResult:
    """Compare every prefix ``N >= n_min`` of ``points`` with ``bound(N, b, p)``."""
    res = SweepResult()
    for N in range(n_min, len(points) + 1):
        mu = EmpiricalMeasure1D.from_points(points.head(N))
        for p in ps:
            value = measured_1d(mu, p)
            limit = bound(N, b, p)
            if math.isinf(p):
                bad = Fraction(value) > Fraction(limit)
            else:
                bad = value > limit + LP_TOL
            row = Row(instance, N, p, float(value), float(limit))
            res.rows.append(row)
            if bad:
                res.violations.append(row)
    return res


def _run(jobs, threads: int):
    if threads <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: job(), jobs))


def verify_thm2(b: int, nmax: int, ps: Sequence[float], policies: Sequence[PermutationPolicy],
                threads: int = 1) -> SweepResult:
    jobs = [lambda i=i, pol=pol: sweep_1d(sbox_prefix(nmax, b, 1, pol), b, ps, thm2_bound, i)
            for i, pol in enumerate(policies)]
    out = SweepResult()
    for r in _run(jobs, threads):
        out.extend(r)
    return out


def verify_thm3(b: int, nmax: int, ps: Sequence[float],
                instances: Sequence[tuple[PermutationPolicy, GuidedPolicy]], threads: int = 1) -> SweepResult:
    jobs = [lambda i=i, pg=pg: sweep_1d(sboxplus_prefix(nmax, b, 1, *pg), b, ps, thm3_bound, i)
            for i, pg in enumerate(instances)]
    out = SweepResult()
    for r in _run(jobs, threads):
        out.extend(r)
    return out


def log_star_bound(N: int) -> float:
    return math.log(N) / (2 * math.log(2)) + 1.5


@dataclass
class SphereSweep:
    m_values: list[int]
    N: list[int]
    estimate: list[float]
    baseline: list[float]
    fitted_c: float
    simplified_ok: list[bool]
    lower_bound_ok: list[bool] | None = None

    @property
    def ok(self) -> bool:
        within = all(e <= bl + self.fitted_c + 1e-9 for e, bl in zip(self.estimate, self.baseline))
        return within and all(self.simplified_ok)

    def rows(self) -> list[tuple]:
        return [(N, e, bl + self.fitted_c, bl + self.fitted_c - e)
                for N, e, bl in zip(self.N, self.estimate, self.baseline)]

    def to_dict(self) -> dict:
        return {
            "m": self.m_values, "N": self.N, "estimate_N_Dinf": self.estimate,
            "baseline": self.baseline, "fitted_C": self.fitted_c,
            "simplified_ok": self.simplified_ok, "lower_bound_ok": self.lower_bound_ok,
            "ok": self.ok,
        }


def center_spec(caps: int, seed: int) -> CenterSpec:
    """Points and antipodes (at most ``caps`` of each) plus ``caps`` random centers."""
    return CenterSpec(True, True, caps, derive_seed(seed, "caps"), caps)


def verify_thm4(b: int, m_values: Sequence[int], caps: int, seed: int = 0) -> SphereSweep:
    """Lambert image of a seeded guided sequence at ``N = b^(2m)`` against ``7 sqrt2 b^m + C``."""
    perm = PermutationPolicy.seeded(derive_seed(seed, "thm4/perm"))
    guided = GuidedPolicy.seeded(derive_seed(seed, "thm4/guided"))
    Ns, est, base = [], [], []
    top = b ** (2 * max(m_values))
    Z = sphere_prefix("lambert-sboxplus", top, b, perm, guided)
    for m in m_values:
        N = b ** (2 * m)
        Ns.append(N)
        est.append(cap_discrepancy_estimate(Z[:N], center_spec(caps, seed)))
        base.append(LAMBERT_CONST * b**m)
    C = fit_constant(est, base)
    simple = [e / math.sqrt(N) <= 7 / math.sqrt(2) * b * (b + 2) + C * math.log(N) / math.sqrt(N) + 1e-9
              for e, N in zip(est, Ns)]
    return SphereSweep(list(m_values), Ns, est, base, C, simple)


def verify_thm5(m_values: Sequence[int], caps: int, seed: int = 0) -> SphereSweep:
    """G-image of ``S^box_{2,2}`` at ``N = 12 * 4^m`` against ``4 (5 + sqrt2) 2^m + C``."""
    Ns, est, base, lower = [], [], [], []
    top = 12 * 4 ** max(m_values)
    Z = sphere_prefix("healpix-sbox", top, 2)
    for m in m_values:
        N = 12 * 4**m
        Ns.append(N)
        e = cap_discrepancy_estimate(Z[:N], center_spec(caps, seed))
        est.append(e)
        base.append(HEALPIX_CONST * 2**m)
        lower.append(e / N >= 1 / math.sqrt(3 * N))
    C = fit_constant(est, base)
    simple = [e / math.sqrt(N) <= 8 / math.sqrt(3) * (5 + math.sqrt(2)) + C * math.log(N) / math.sqrt(N) + 1e-9
              for e, N in zip(est, Ns)]
    return SphereSweep(list(m_values), Ns, est, base, C, simple, lower)


def prefix_profile(points: PointSet, ps: Sequence[float], prefixes: Sequence[int]) -> list[dict]:
    """Discrepancy values of selected prefixes for the ``disc`` report."""
    out = []
    for N in prefixes:
        if not 1 <= N <= len(points):
            raise ValueError(f"prefix length {N} outside 1..{len(points)}")
        mu = EmpiricalMeasure1D.from_points(points.head(N))
        entry = {"N": int(N)}
        for p in ps:
            if math.isinf(p):
                v = star_discrepancy(mu)
                entry["N_Dinf"] = float(v)
                if isinstance(v, Fraction):
                    entry["N_Dinf_exact"] = f"{v.numerator}/{v.denominator}"
            else:
                entry[f"Np_Dp[p={p:g}]"] = lp_discrepancy(mu, p)
                entry[f"N_Dp_root[p={p:g}]"] = lp_discrepancy(mu, p) ** (1.0 / p)
        out.append(entry)
    return out


def tail_check(b: int, d: int, t_max: int, seeds: Sequence[int]) -> tuple[bool, float]:
    """Worst ratio ``|s_t - q_t| / (b t^(-1/d))`` over seeded guided sequences."""
    from .seqgen import tail_gaps

    worst = 0.0
    ok = True
    t = np.arange(1, t_max + 1, dtype=np.float64)
    for s in seeds:
        perm = PermutationPolicy.seeded(derive_seed(s, "tail/perm"))
        gaps, scaled = tail_gaps(b, d, perm, GuidedPolicy.seeded(derive_seed(s, "tail/guided")), t_max)
        ratio = gaps / (b * t ** (-1.0 / d))
        worst = max(worst, float(ratio.max()))
        ok &= bool(np.all(ratio <= 1.0)) and bool(np.all(scaled <= 1.0))
    return ok, worst
