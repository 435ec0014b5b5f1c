"""Equal-area maps from the unit square to S^2 and a spherical-cap discrepancy estimator."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from ._keys import uniform01, uniform_bits
from .seqgen import GuidedPolicy, PermutationPolicy, sbox_prefix, sboxplus_prefix

QUARTER_PI = np.pi / 4

# Centers of the 12 base facets in the HEALPix plane (x, y), ring order.
FACET_CENTERS = np.array(
    [((2 * f + 1) * QUARTER_PI, QUARTER_PI) for f in range(4)]
    + [(f * 2 * QUARTER_PI, 0.0) for f in range(4)]
    + [((2 * f + 1) * QUARTER_PI, -QUARTER_PI) for f in range(4)]
)

SPHERE_KINDS = ("lambert-sboxplus", "healpix-sbox")


def _check_unit_square(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if u.shape[-1] != 2:
        raise ValueError("points in [0,1)^2 expected")
    if u.size and (u.min() < 0.0 or u.max() >= 1.0):
        raise ValueError("input outside [0,1)^2")
    return u


def _from_z_phi(z: np.ndarray, phi: np.ndarray) -> np.ndarray:
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


def lambert(u) -> np.ndarray:
    """Lambert cylindrical equal-area map: longitude ``2 pi u_1``, height ``z = 2 u_2 - 1``."""
    u = _check_unit_square(u)
    return _from_z_phi(2.0 * u[..., 1] - 1.0, 2.0 * np.pi * u[..., 0])


def healpix_plane_to_sphere(x, y, facet) -> np.ndarray:
    """Inverse HEALPix projection from the plane to unit vectors.

    ``facet`` (0..11, ring order) fixes the polar column, which keeps facet
    boundaries unambiguous.
    """
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    facet = np.broadcast_to(np.asarray(facet), x.shape)
    polar = np.abs(y) > QUARTER_PI
    z = np.where(polar, 0.0, y * 8.0 / (3.0 * np.pi))
    phi = x.copy()
    sigma = 2.0 - np.abs(y[polar]) / QUARTER_PI
    z[polar] = np.sign(y[polar]) * (1.0 - sigma**2 / 3.0)
    xc = FACET_CENTERS[facet[polar], 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        phi[polar] = np.where(sigma > 0, xc + (x[polar] - xc) / sigma, xc)
    return _from_z_phi(z, phi)


def facet_plane_coords(u) -> tuple[np.ndarray, np.ndarray]:
    """The 12 rotated, scaled copies of ``u`` in the HEALPix plane, shape ``(..., 12)``."""
    u = _check_unit_square(u)
    du = QUARTER_PI * (u[..., 0] - u[..., 1])
    dv = QUARTER_PI * (u[..., 0] + u[..., 1] - 1.0)
    x = FACET_CENTERS[:, 0] + du[..., None]
    y = FACET_CENTERS[:, 1] + dv[..., None]
    return x, y


def g_projection(u) -> np.ndarray:
    """Map ``u`` (shape ``(..., 2)``) to its 12 facet images, shape ``(..., 12, 3)``.

    Each facet is a diamond of half-diagonal ``pi/4`` and the unit square is
    laid on it with ``u = (1/2, 1/2)`` at the facet center.
    """
    x, y = facet_plane_coords(u)
    return healpix_plane_to_sphere(x, y, np.arange(12))


@dataclass(frozen=True)
class CapQuery:
    center: np.ndarray
    radius: float

    @property
    def measure(self) -> float:
        return (1.0 - np.cos(self.radius)) / 2.0


@dataclass(frozen=True)
class CenterSpec:
    """Which cap centers the estimator scans.

    ``max_point_centers`` caps how many of the points (and antipodes) are used,
    picked by a seeded ranking when the set is larger.
    """

    use_points: bool = True
    use_antipodes: bool = True
    n_random: int = 0
    seed: int = 0
    max_point_centers: int | None = None


def random_sphere_points(n: int, seed: int) -> np.ndarray:
    """Uniform points on S^2; the first ``n`` are the same for every larger ``n``."""
    i = np.arange(n)
    z = 2.0 * uniform01(seed, 0xCA95, i, 0) - 1.0
    phi = 2.0 * np.pi * uniform01(seed, 0xCA95, i, 1)
    return _from_z_phi(z, phi)


def cap_centers(points: np.ndarray, spec: CenterSpec) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    chosen = pts
    if spec.max_point_centers is not None and len(pts) > spec.max_point_centers:
        rank = np.argsort(uniform_bits(62, spec.seed, 0x5E1, np.arange(len(pts))), kind="stable")
        chosen = pts[np.sort(rank[: spec.max_point_centers])]
    parts = []
    if spec.use_points:
        parts.append(chosen)
    if spec.use_antipodes:
        parts.append(-chosen)
    if spec.n_random:
        parts.append(random_sphere_points(spec.n_random, spec.seed))
    if not parts:
        raise ValueError("center spec selects no centers")
    return np.concatenate(parts, axis=0)


def cap_discrepancy_per_center(points, centers, chunk: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """For every center, ``sup_t |#B(w, t) - N (1 - cos t)/2|`` over one-sided limits.

    Returns the per-center suprema and the radius where each is attained.
    """
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) == 0:
        raise ValueError("empty point set")
    W = np.asarray(centers, dtype=np.float64)
    N = len(pts)
    k = np.arange(1, N + 1, dtype=np.float64)
    best = np.empty(len(W))
    where = np.empty(len(W))
    for start in range(0, len(W), chunk):
        dots = np.clip(W[start:start + chunk] @ pts.T, -1.0, 1.0)
        dots = -np.sort(-dots, axis=1)
        mu = (1.0 - dots) / 2.0
        upper = np.abs(k - N * mu)
        lower = np.abs(k - 1.0 - N * mu)
        both = np.maximum(upper, lower)
        j = np.argmax(both, axis=1)
        rows = np.arange(len(j))
        best[start:start + chunk] = both[rows, j]
        where[start:start + chunk] = np.arccos(dots[rows, j])
    return best, where


@dataclass
class CapReport:
    value: float
    center: np.ndarray
    radius: float
    per_center: np.ndarray = field(repr=False)
    per_center_radius: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "value": float(self.value),
            "center": [float(x) for x in self.center],
            "radius": float(self.radius),
            "n_centers": int(len(self.per_center)),
            "per_center": [float(x) for x in self.per_center],
            "per_center_radius": [float(x) for x in self.per_center_radius],
        }


def cap_discrepancy_report(points, spec: CenterSpec | None = None) -> CapReport:
    spec = spec or CenterSpec()
    W = cap_centers(points, spec)
    per, radius = cap_discrepancy_per_center(points, W)
    i = int(np.argmax(per))
    return CapReport(float(per[i]), W[i], float(radius[i]), per, radius)


def cap_discrepancy_estimate(points, spec: CenterSpec | None = None) -> float:
    """Lower estimate of ``N * D_inf`` (cap discrepancy) over the centers of ``spec``."""
    return cap_discrepancy_report(points, spec).value


def sphere_prefix(kind: str, N: int, b: int = 2, perm: PermutationPolicy | None = None,
                  guided: GuidedPolicy | None = None) -> np.ndarray:
    """First ``N`` points of a sphere sequence, shape ``(N, 3)``.

    ``lambert-sboxplus`` maps a guided sequence in base ``b`` through the
    Lambert projection; ``healpix-sbox`` appends the 12 images of each point
    of ``S^box_{2,2}`` in facet order.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    if kind == "lambert-sboxplus":
        return lambert(sboxplus_prefix(N, b, 2, perm, guided).values)
    if kind == "healpix-sbox":
        if b != 2:
            raise ValueError("healpix-sbox uses base 2")
        K = -(-N // 12)
        return g_projection(sbox_prefix(K, 2, 2, perm).values).reshape(-1, 3)[:N]
    raise ValueError(f"unknown sphere sequence kind {kind!r}")


def iter_sphere_sequence(kind: str, b: int = 2, perm: PermutationPolicy | None = None,
                         guided: GuidedPolicy | None = None, block: int = 1024) -> Iterator[np.ndarray]:
    """Yield the points of a sphere sequence one by one (regenerating in doubling blocks)."""
    done = 0
    size = block
    while True:
        pts = sphere_prefix(kind, size, b, perm, guided)
        yield from pts[done:]
        done = size
        size *= 2
