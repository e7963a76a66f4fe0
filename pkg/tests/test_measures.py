import json
import math

import numpy as np
import pytest
from scipy import integrate

from jellium import (
    builtin_measure,
    circle,
    fubini_study,
    invert,
    pareto_tail,
    potential,
    power_origin,
    scale,
    tabulated,
    uniform_disk,
)
from jellium.errors import DivergenceError
from jellium.measures import measure_from_dict, measure_from_json

GRID = np.exp(np.linspace(-6, 6, 97))


def test_circle_open_disk_convention():
    m = circle(1.0)
    assert m.mass_in_disk(0.5) == 0.0
    assert m.mass_in_disk(1.0) == 0.0
    assert m.mass_in_closed_disk(1.0) == 1.0
    assert m.mass_in_disk(1.0000001) == 1.0


def test_uniform_disk_area_ratio():
    assert uniform_disk(1.0).mass_in_disk(0.5) == pytest.approx(0.25)
    assert uniform_disk(2.0).mass_in_disk(1.0) == pytest.approx(0.25)


def test_fubini_study_mass_matches_integrated_density():
    m = fubini_study()
    for r in (0.1, 0.5, 1.0, 3.0, 40.0):
        val, _ = integrate.quad(lambda s: 2 * s / (1 + s * s) ** 2, 0, r, epsabs=1e-14)
        assert m.mass_in_disk(r) == pytest.approx(r * r / (1 + r * r), rel=1e-14)
        assert m.mass_in_disk(r) == pytest.approx(val, rel=1e-12)


def test_exponent_metadata():
    fs = fubini_study()
    assert fs.origin_exponent == (2.0, 1.0)
    assert fs.tail_exponent == (2.0, 1.0)
    assert pareto_tail(1.5, 2.0).tail_exponent == (1.5, 2.0)
    assert power_origin(3.0, 0.5).origin_exponent == (3.0, 0.5)
    assert uniform_disk(2.0).origin_exponent == (2.0, 0.25)


@pytest.mark.parametrize("name,params", [
    ("circle", {"R": 0.0}),
    ("circle", {"R": -1.0}),
    ("uniform_disk", {"R": float("nan")}),
    ("pareto_tail", {"alpha": 0.0, "lam": 1.0}),
    ("power_origin", {"alpha": 1.0, "lam": -2.0}),
])
def test_invalid_parameters_rejected(name, params):
    with pytest.raises(ValueError):
        builtin_measure(name, **params)


def test_unknown_builtin_rejected():
    with pytest.raises(ValueError):
        builtin_measure("lemniscate")


def test_mass_limits_and_monotone(builtins):
    for m in builtins.values():
        vals = m.mass_in_disk(GRID)
        assert np.all(np.diff(vals) >= 0)
        assert m.mass_in_disk(0.0) == 0.0
        assert m.mass_in_disk(1e12) == pytest.approx(1.0, abs=1e-12)


def test_atoms_jump_by_weight():
    m = tabulated(atoms=[(0.5, 0.25), (2.0, 0.25)], density_table=[[1.0, 0.5], [2.0, 0.5]])
    for r, w in m.atoms:
        jump = m.mass_in_closed_disk(r) - m.mass_in_disk(r)
        assert jump == pytest.approx(w)
    assert m.mass_in_disk(1.5) == pytest.approx(0.25 + 0.25)


def test_tabulated_must_be_normalized():
    with pytest.raises(ValueError):
        tabulated(atoms=[(1.0, 0.5)])


def test_atoms_need_positive_radius():
    with pytest.raises(ValueError):
        tabulated(atoms=[(0.0, 1.0)])


# ---------------------------------------------------------------- potentials

def test_table_potentials():
    r = np.exp(np.linspace(-20, 20, 201))
    assert np.max(np.abs(potential(circle(1.0))(r) - np.maximum(np.log(r), 0))) < 1e-12
    disk = np.where(r < 1, (r * r - 1) / 2, np.log(r))
    assert np.max(np.abs(potential(uniform_disk(1.0))(r) - disk)) < 1e-12
    fs = 0.5 * np.log1p(r * r) - 0.5 * math.log(2)
    assert np.max(np.abs(potential(fubini_study())(r) - fs)) < 1e-12


def test_potential_pareto_against_closed_form():
    # V(r) = log(r/r0) + (2/1.5)(r^-1.5 - r0^-1.5) beyond r0 = 2^(2/3); values from 30-digit arithmetic
    pot = potential(pareto_tail(1.5, 2.0))
    assert pot(3.0) == pytest.approx(0.226447621267979847662, rel=1e-12)
    assert pot(10.0) == pytest.approx(1.21598400808966057017, rel=1e-12)
    assert pot(1.2) == 0.0


def test_potential_normalized_at_one(builtins):
    for m in builtins.values():
        assert potential(m)(1.0) == 0.0


def test_potential_derivative_is_mass(builtins):
    for m in builtins.values():
        pot = potential(m)
        kinks = np.exp(m.kinks_u())
        r = GRID[np.all(np.abs(GRID[:, None] / kinks[None, :] - 1) > 1e-3, axis=1)] if kinks.size else GRID
        h = 1e-5
        deriv = (pot(r * (1 + h)) - pot(r * (1 - h))) / (np.log1p(h) - np.log1p(-h))
        assert np.max(np.abs(deriv - m.mass_in_disk(r))) < 1e-7


def test_potential_positive_beyond_support_starting_at_one():
    pot = potential(circle(1.0))
    assert np.all(pot(np.linspace(1.01, 10, 20)) > 0)
    pot = potential(pareto_tail(1.5, 2.0))
    assert np.all(pot(np.linspace(1.6, 10, 20)) > 0)


def test_potential_log_growth_for_compact_support():
    for m in (circle(1.0), uniform_disk(2.0)):
        pot = potential(m)
        R = 1e6
        assert abs(pot(2 * R) - pot(R) - math.log(2)) < 1e-12


def test_potential_value_at_origin():
    assert potential(uniform_disk(1.0)).value_at_origin == pytest.approx(-0.5, abs=1e-13)
    assert potential(fubini_study()).value_at_origin == pytest.approx(-0.5 * math.log(2), abs=1e-13)


def test_log_moment_checked():
    assert math.isfinite(pareto_tail(1.5, 2.0).log_moment())
    assert circle(3.0).log_moment() == pytest.approx(math.log(3.0))


# ---------------------------------------------------------------- pushforwards

def test_invert_circle_is_circle():
    m = invert(circle(1.0))
    assert m.atoms == ((1.0, 1.0),)


def test_invert_uniform_disk():
    m = invert(uniform_disk(1.0))
    r = np.array([0.5, 0.99, 1.0, 1.5, 2.0, 10.0])
    expected = np.where(r >= 1, 1 - r ** -2.0, 0.0)
    assert np.allclose(m.mass_in_disk(r), expected, atol=1e-15)


def test_invert_swaps_exponents():
    m = invert(pareto_tail(1.7, 0.3))
    assert m.origin_exponent == (1.7, 0.3)
    assert m.tail_exponent is None


def test_double_inversion(builtins):
    for m in builtins.values():
        mm = invert(invert(m))
        assert np.max(np.abs(mm.mass_in_disk(GRID) - m.mass_in_disk(GRID))) < 1e-12


def test_scale_circle():
    m = scale(circle(1.0), 2.0)
    assert m.atoms == ((2.0, 1.0),)
    assert m.support_outer == 2.0


def test_scale_identity(builtins):
    for m in builtins.values():
        assert np.array_equal(scale(m, 1.0).mass_in_disk(GRID), m.mass_in_disk(GRID))


def test_scaled_potential_differs_by_constant(builtins):
    s = 2.5
    for m in builtins.values():
        d = potential(scale(m, s))(GRID) - potential(m)(GRID / s)
        assert np.ptp(d) < 1e-10
        # int_1^r nu(D_{x/s})/x dx = V(r/s) - V(1/s)
        assert d[0] == pytest.approx(-potential(m)(1 / s), abs=1e-10)


def test_inverted_potential_identity(builtins):
    for m in builtins.values():
        d = potential(invert(m))(GRID) - (potential(m)(1 / GRID) + np.log(GRID))
        assert np.ptp(d) < 1e-10


def test_json_round_trip(builtins):
    for m in builtins.values():
        for mm in (m, invert(m), scale(m, 3.0)):
            back = measure_from_json(mm.to_json())
            assert np.array_equal(back.mass_in_disk(GRID), mm.mass_in_disk(GRID))
    d = {"atoms": [{"r": 1.0, "w": 0.5}], "density_table": [[1.0, 0.5], [2.0, 0.5]]}
    m = measure_from_dict(d)
    assert m.mass_in_disk(3.0) == pytest.approx(1.0)
    assert json.loads(m.to_json())
