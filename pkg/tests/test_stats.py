import math

import numpy as np
import pytest

from jellium import (
    CoefficientLaw,
    EmpiricalCDF,
    Model,
    circle,
    extremal_campaign,
    finite_kernel,
    fubini_study,
    kernel_sup_diff,
    ks_distance,
    potential,
    sample_jellium,
    uniform_disk,
)
from jellium.polynomials import find_roots, sample_polynomial, sample_weyl
from jellium.stats import campaign_moduli, kernel_grid, replica_rng


def uniform_cdf(t):
    return np.clip(t, 0, 1)


def test_ks_hand_cases():
    assert ks_distance([0.5], uniform_cdf).distance == pytest.approx(0.5)
    assert ks_distance([0.25, 0.75], uniform_cdf).distance == pytest.approx(0.25)
    assert ks_distance([0.9, 0.95, 0.99], uniform_cdf).distance == pytest.approx(0.9)
    r = ks_distance(np.arange(1, 101) / 100 - 0.005, uniform_cdf)
    assert r.distance == pytest.approx(0.005, abs=1e-12)
    assert r.band == pytest.approx(0.136)
    with pytest.raises(ValueError):
        ks_distance([], uniform_cdf)


def test_ks_band_calibration():
    # a correct model stays inside the 95% band in at least ~95% of trials
    rng = np.random.default_rng(0)
    hits = sum(ks_distance(rng.random(400), uniform_cdf).passes() for _ in range(400))
    assert hits >= 370


def test_ks_invariant_under_monotone_transform():
    rng = np.random.default_rng(1)
    x = rng.random(300)
    d1 = ks_distance(x, uniform_cdf).distance
    d2 = ks_distance(np.exp(3 * x), lambda t: uniform_cdf(np.log(t) / 3)).distance
    assert d1 == pytest.approx(d2, abs=1e-14)


def test_empirical_cdf():
    F = EmpiricalCDF.from_samples([3.0, 1.0, 2.0, 2.0])
    assert F.count == 4
    assert list(F(np.array([0.5, 1.0, 2.0, 2.5, 3.0]))) == [0.0, 0.25, 0.75, 0.75, 1.0]
    assert list(F.raw) == [3.0, 1.0, 2.0, 2.0]


def test_kernel_sup_diff():
    K = finite_kernel(potential(fubini_study()), 10)
    assert kernel_sup_diff(K, K).sup_abs == 0.0
    d = kernel_sup_diff(lambda z, w: 2 * K(z, w), K)
    assert d.sup_abs == pytest.approx(d.reference_max, rel=1e-14)
    assert d.sup_rel == pytest.approx(1.0, rel=1e-12)
    z, w = kernel_grid(radius=0.7, side=5, random_pairs=7)
    assert z.shape == w.shape == (32,)
    assert np.all(np.abs(z) <= 0.7 + 1e-15)


def test_campaign_matches_individual_samples():
    m, n, seed = uniform_disk(1.0), 12, 99
    mods = campaign_moduli(Model("jellium", n, m), 5, seed, threads=1)
    for j in range(5):
        single = np.sort(np.abs(sample_jellium(m, n, replica_rng(seed, j)).points))
        assert np.allclose(np.sort(mods[j]), single, rtol=1e-14)


def test_polynomial_campaign_matches_individual_samples():
    m, n, seed = fubini_study(), 15, 3
    law = CoefficientLaw("symmetric_bernoulli_complex")
    mods = campaign_moduli(Model("poly_zeros", n, m, law), 3, seed, threads=1)
    for j in range(3):
        r = np.sort(np.abs(find_roots(sample_polynomial(m, n, law, replica_rng(seed, j))).roots))
        assert np.allclose(np.sort(mods[j]), r, rtol=1e-10)
    w = campaign_moduli(Model("weyl", n), 2, seed, threads=1)
    r = np.sort(np.abs(find_roots(sample_weyl(n, CoefficientLaw(), replica_rng(seed, 1))).roots))
    assert np.allclose(np.sort(w[1]), r, rtol=1e-10)


def test_campaign_independent_of_threads_and_chunks():
    model = Model("poly_zeros", 20, uniform_disk(1.0))
    a = campaign_moduli(model, 37, 5, threads=1, chunk=4)
    b = campaign_moduli(model, 37, 5, threads=4, chunk=9)
    assert np.array_equal(a, b)


def test_campaign_statistics():
    model = Model("jellium", 8, circle(1.0))
    mx = extremal_campaign(model, "max_mod", 200, 1)
    inv = extremal_campaign(model, "inverse_max", 200, 1)
    mn = extremal_campaign(model, "min_mod", 200, 1)
    assert mx.count == 200
    assert np.allclose(inv.raw, 1 / mx.raw, rtol=1e-15)
    assert np.all(mn.raw <= mx.raw)
    with pytest.raises(ValueError):
        extremal_campaign(model, "median", 10, 1)


def test_single_particle_median():
    F = extremal_campaign(Model("jellium", 1, circle(1.0)), "max_mod", 20000, 8)
    assert abs(F.quantile(0.5) - 1.0) < 0.02


def test_model_validation():
    with pytest.raises(ValueError):
        Model("gue", 5, circle(1.0))
    with pytest.raises(ValueError):
        Model("jellium", 5)
    with pytest.raises(ValueError):
        Model("weyl", 0)
