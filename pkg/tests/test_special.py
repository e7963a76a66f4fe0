import math

import numpy as np
import pytest
from scipy import special as sp

from jellium.special import gamma_p, gamma_q, log_gamma_q, log_upper_incomplete_gamma, upper_incomplete_gamma


def test_exponential_case():
    x = np.array([0.0, 0.5, 3.0, 40.0])
    assert np.allclose(upper_incomplete_gamma(1.0, x), np.exp(-x), rtol=1e-14, atol=0)


def test_zero_argument_is_complete_gamma():
    for s in (0.5, 1.0, 3.7, 20.0):
        assert upper_incomplete_gamma(s, 0.0) == pytest.approx(math.gamma(s), rel=1e-14)


def test_integer_order():
    assert upper_incomplete_gamma(2.0, 1.0) == pytest.approx(2 / math.e, rel=1e-14)


def test_frozen_values():
    # 30-digit reference values
    assert upper_incomplete_gamma(0.5, 2.0) == pytest.approx(0.0806471179603176907700663289297, rel=1e-13)
    assert upper_incomplete_gamma(10.0, 3.0) == pytest.approx(362479.929107343695186655380508, rel=1e-13)
    assert upper_incomplete_gamma(3.5, 30.0) == pytest.approx(5.01678207883977590820143856848e-10, rel=1e-12)


def test_regularized_pair_sums_to_one():
    s = np.array([0.3, 1.0, 4.0, 50.0, 300.0])
    x = np.array([0.1, 2.0, 4.0, 49.0, 320.0])
    assert np.allclose(gamma_p(s, x) + gamma_q(s, x), 1.0, atol=1e-14)


def test_against_scipy_random():
    rng = np.random.default_rng(3)
    s = np.exp(rng.uniform(-3, 6, 400))
    x = s * np.exp(rng.uniform(-2, 2, 400))
    assert np.max(np.abs(gamma_q(s, x) - sp.gammaincc(s, x))) < 1e-12
    assert np.max(np.abs(gamma_p(s, x) - sp.gammainc(s, x))) < 1e-12


def test_log_form_deep_tail():
    # Q(s, x) far below double range stays finite in log form
    lq = log_gamma_q(2.0, 2000.0)
    assert lq == pytest.approx(-2000.0 + math.log(2001.0), rel=1e-13)
    assert log_upper_incomplete_gamma(2.0, 2000.0) == pytest.approx(-2000.0 + math.log(2001.0), rel=1e-13)
