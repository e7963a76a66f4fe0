import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from jellium import (
    PolynomialSample,
    bulk_max_cdf,
    circle,
    evaluate,
    finite_kernel,
    fubini_study,
    invert,
    ks_distance,
    max_modulus_cdf_outside,
    min_modulus_cdf_disk,
    pareto_tail,
    potential,
    power_origin,
    radial_density,
    scale,
    uniform_disk,
)

SETTINGS = settings(max_examples=30, deadline=None)

alphas = st.floats(0.5, 4.0)
lams = st.floats(0.2, 5.0)
radii = st.floats(0.2, 5.0)


def measures():
    return st.one_of(
        st.builds(circle, radii),
        st.builds(uniform_disk, radii),
        st.just(fubini_study()),
        st.builds(pareto_tail, alphas, lams),
        st.builds(power_origin, alphas, lams),
    )


@SETTINGS
@given(measures(), st.lists(st.floats(1e-3, 1e3), min_size=2, max_size=20))
def test_mass_monotone_and_bounded(m, rs):
    r = np.sort(np.array(rs))
    mass = m.mass_in_disk(r)
    assert np.all(np.diff(mass) >= -1e-15)
    assert np.all((mass >= 0) & (mass <= 1 + 1e-15))


@SETTINGS
@given(measures(), st.floats(0.05, 20.0), st.floats(0.3, 3.0))
def test_potential_scaling_and_inversion(m, r, s):
    pot, spot, ipot = potential(m), potential(scale(m, s)), potential(invert(m))
    assert math.isclose(spot(r), pot(r / s) - pot(1 / s), rel_tol=1e-9, abs_tol=1e-9)
    # V_inv(r) = V(1/r) + log r
    assert math.isclose(ipot(r), pot(1 / r) + math.log(r), rel_tol=1e-9, abs_tol=1e-9)


@SETTINGS
@given(st.floats(0.3, 3.0), st.lists(st.floats(1.0, 50.0), min_size=2, max_size=15))
def test_bergman_product_monotone(R, ts):
    x = np.sort(np.array(ts))
    F = max_modulus_cdf_outside(R, R * x)
    assert np.all(np.diff(F) >= -1e-15) and np.all((F >= 0) & (F <= 1))
    G = min_modulus_cdf_disk(R, R / x[::-1][x[::-1] > 1] if np.any(x > 1) else np.array([0.5 * R]))
    assert np.all(np.diff(G) >= -1e-15) and np.all((G >= 0) & (G <= 1))


@SETTINGS
@given(alphas, lams, st.lists(st.floats(0.05, 30.0), min_size=2, max_size=10))
def test_bulk_product_monotone(alpha, lam, ts):
    t = np.sort(np.array(ts))
    F = bulk_max_cdf(alpha, lam, t)
    assert np.all(np.diff(F) >= -1e-13) and np.all((F >= 0) & (F <= 1))


@SETTINGS
@given(measures(), st.integers(1, 25), st.data())
def test_kernel_hermitian(m, n, data):
    K = finite_kernel(potential(m), n)
    c = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)
    z, w = data.draw(c), data.draw(c)
    a, b = K(z, w), np.conj(K(w, z))
    assert abs(a - b) <= 1e-12 * max(abs(a), 1e-300)
    assert K(z, z).real >= 0


@SETTINGS
@given(measures(), st.integers(1, 40), st.data(), st.floats(0.01, 0.99))
def test_quantile_cdf_round_trip(m, n, data, u):
    k = data.draw(st.integers(0, n - 1))
    d = radial_density(potential(m), n, k)
    assert abs(d.cdf(d.quantile(u)) - u) < 1e-8


@SETTINGS
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=50), st.floats(0.5, 3.0))
def test_ks_invariant_under_increasing_map(xs, p):
    x = np.array(xs)
    d1 = ks_distance(x, lambda t: np.clip(t, 0, 1)).distance
    d2 = ks_distance(x ** p, lambda t: np.clip(t, 0, 1) ** (1 / p)).distance
    assert abs(d1 - d2) < 1e-12


@SETTINGS
@given(st.lists(st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False),
                min_size=2, max_size=12),
       st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_evaluate_matches_direct_sum(coeffs, z):
    p = PolynomialSample.from_coefficients(coeffs)
    lg, arg = evaluate(p, z)
    direct = np.polynomial.polynomial.polyval(z, np.array(coeffs))
    scale_ = sum(abs(c) * abs(z) ** k for k, c in enumerate(coeffs))
    assert abs(np.exp(lg + 1j * arg) - direct) <= 1e-12 * scale_
