import math

import healpy as hp
import numpy as np
import pytest
from scipy import stats

from lodisq.points import lattice_set
from lodisq.seqgen import GuidedPolicy, PermutationPolicy, sbox_prefix
from lodisq.sphere import (CapQuery, CenterSpec, cap_centers, cap_discrepancy_estimate,
                           cap_discrepancy_per_center, cap_discrepancy_report, g_projection, iter_sphere_sequence,
                           lambert, random_sphere_points, sphere_prefix)


def test_lambert_examples():
    assert np.allclose(lambert([0.0, 0.5]), [1, 0, 0], atol=1e-15)
    assert np.allclose(lambert([0.25, 0.5]), [0, 1, 0], atol=1e-15)
    assert np.allclose(lambert([0.5, 0.0]), [0, 0, -1], atol=1e-7)
    with pytest.raises(ValueError):
        lambert([1.0, 0.2])


def test_lambert_cap_area():
    n = 1000
    g = (np.arange(n) + 0.5) / n
    u = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    z = lambert(u)[:, 2]
    for t in (0.1, 0.5, 1.0, 2.0, 3.0):
        assert np.mean(z >= math.cos(t)) == pytest.approx((1 - math.cos(t)) / 2, abs=3e-3)


def test_base_facet_centers_match_healpix():
    ours = g_projection(np.array([0.5, 0.5]))
    ref = np.array(hp.pix2vec(1, np.arange(12))).T
    assert np.allclose(ours, ref, atol=1e-14)


@pytest.mark.parametrize("nside", [2, 4, 8, 16])
def test_cell_centers_are_healpix_pixel_centers(nside):
    g = (np.arange(nside) + 0.5) / nside
    u = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    vec = g_projection(u).reshape(-1, 3)
    pix = hp.vec2pix(nside, vec[:, 0], vec[:, 1], vec[:, 2])
    assert len(np.unique(pix)) == 12 * nside**2
    ref = np.array(hp.pix2vec(nside, pix)).T
    assert np.abs(ref - vec).max() < 1e-12
    facets = hp.vec2pix(1, vec[:, 0], vec[:, 1], vec[:, 2]).reshape(-1, 12)
    assert np.all(facets == np.arange(12))


def test_unit_norm():
    for kind in ("lambert-sboxplus", "healpix-sbox"):
        Z = sphere_prefix(kind, 999, 2, PermutationPolicy.seeded(1), GuidedPolicy.seeded(1))
        assert Z.shape == (999, 3)
        assert np.abs(np.linalg.norm(Z, axis=1) - 1).max() < 1e-12


def _chi_square(points, rng, caps=100):
    centers = random_sphere_points(caps, int(rng.integers(2**31)))
    radii = np.arccos(1 - 2 * rng.uniform(0.05, 0.95, caps))
    N = len(points)
    stat = 0.0
    for w, t in zip(centers, radii):
        p = CapQuery(w, t).measure
        k = np.count_nonzero(points @ w >= math.cos(t))
        stat += (k - N * p) ** 2 / (N * p * (1 - p))
    return stats.chi2.sf(stat, caps)


def test_equal_area_chi_square(rng):
    u = rng.random((10**6, 2))
    assert _chi_square(lambert(u), rng) > 1e-3
    v = rng.random((10**6 // 12, 2))
    assert _chi_square(g_projection(v).reshape(-1, 3), rng) > 1e-3


def test_first_points():
    Z = sphere_prefix("lambert-sboxplus", 4, 2, None, GuidedPolicy("seeded-random", "seeded-random-uniform", (0.0, 0.5), 3))
    assert np.allclose(Z[0], [1, 0, 0], atol=1e-15)
    H = sphere_prefix("healpix-sbox", 12)
    assert np.allclose(H, g_projection(np.zeros(2)))
    H2 = sphere_prefix("healpix-sbox", 30)
    assert len(H2) == 30
    assert np.allclose(H2[12:24], g_projection(sbox_prefix(2, 2, 2).values[1]))
    with pytest.raises(ValueError):
        sphere_prefix("healpix-sbox", 12, 3)
    with pytest.raises(ValueError):
        sphere_prefix("octahedral", 12)


def test_iterator_matches_prefix():
    it = iter_sphere_sequence("healpix-sbox", block=16)
    first = np.array([next(it) for _ in range(50)])
    assert np.allclose(first, sphere_prefix("healpix-sbox", 50))


def test_single_point_estimate():
    x = lambert([0.3, 0.7])
    assert cap_discrepancy_estimate(x[None, :]) == pytest.approx(1.0)


def test_antipodal_centers_agree(rng):
    pts = random_sphere_points(300, 5)
    W = random_sphere_points(64, 6)
    a, _ = cap_discrepancy_per_center(pts, W)
    b, _ = cap_discrepancy_per_center(pts, -W)
    assert np.allclose(a, b, atol=1e-9)


def test_estimate_monotone_in_random_centers():
    pts = sphere_prefix("lambert-sboxplus", 256, 2, PermutationPolicy.seeded(2), GuidedPolicy.seeded(2))
    values = [cap_discrepancy_estimate(pts, CenterSpec(False, False, M, 7)) for M in (16, 32, 64, 128, 256)]
    assert values == sorted(values)
    assert np.array_equal(random_sphere_points(16, 7), random_sphere_points(256, 7)[:16])


def test_center_selection():
    pts = random_sphere_points(100, 1)
    W = cap_centers(pts, CenterSpec(True, True, 5, 3, max_point_centers=10))
    assert W.shape == (25, 3)
    assert np.allclose(W[:10], -W[10:20])
    with pytest.raises(ValueError):
        cap_centers(pts, CenterSpec(False, False, 0))


def test_report_contents():
    pts = random_sphere_points(50, 2)
    rep = cap_discrepancy_report(pts, CenterSpec(n_random=10, seed=1))
    d = rep.to_dict()
    assert d["n_centers"] == 110 and d["value"] == max(d["per_center"])
    assert 0 <= d["radius"] <= math.pi
    with pytest.raises(ValueError):
        cap_discrepancy_report(np.zeros((0, 3)))


def test_lattice_pushforward_within_bound():
    for m in range(1, 5):
        K = 2**m
        pts = lambert(lattice_set(K, 2).values)
        est = cap_discrepancy_estimate(pts, CenterSpec(n_random=256, seed=1))
        assert est <= 7 * math.sqrt(2) * K


def test_decay_trend():
    Z = sphere_prefix("lambert-sboxplus", 4**5, 2, PermutationPolicy.seeded(3), GuidedPolicy.seeded(3))
    for m in range(2, 6):
        N = 4**m
        assert cap_discrepancy_estimate(Z[:N], CenterSpec(n_random=512, seed=2)) / math.sqrt(N) <= 7 * math.sqrt(2)
