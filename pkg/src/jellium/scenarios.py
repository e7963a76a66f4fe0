"""Named verification scenarios.

Each scenario runs a set of checks, each with a statistic and a threshold,
and can draw a figure of what it measured. The command line ``verify``
subcommand and the acceptance tests both call these functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from . import plotting
from .dpp import coefficient_bkn, exact_extremal_cdf, finite_kernel, radial_density
from .limits import (
    bergman_kernel_eval,
    bulk_limit_kernel,
    bulk_max_cdf,
    max_modulus_cdf_outside,
    min_modulus_cdf_disk,
    mittag_leffler,
    ml_parameter_for_origin_exponent,
)
from .measures import builtin_measure, circle, fubini_study, invert, pareto_tail, potential, uniform_disk
from .polynomials import CoefficientLaw, basis_norms
from .special import log_gamma_p
from .stats import Model, campaign_moduli, kernel_grid, kernel_sup_diff, ks_distance, replica_rng

DEFAULT_SEED = 1


@dataclass
class Check:
    name: str
    stat: float
    threshold: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name}: {self.stat:.6g} (threshold {self.threshold:.6g})"


@dataclass
class ScenarioResult:
    scenario: str
    checks: list
    figure: Optional[Callable] = None
    detail: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def report(self):
        main = self.checks[0]
        return {
            "scenario": self.scenario,
            "stat": main.stat,
            "threshold": main.threshold,
            "pass": self.passed,
            "checks": [
                {"name": c.name, "stat": c.stat, "threshold": c.threshold, "pass": c.passed, **c.detail}
                for c in self.checks
            ],
            **self.detail,
        }

    def write_figure(self, path):
        if self.figure is not None:
            self.figure(path)


def _check_le(name, stat, threshold, **detail):
    return Check(name, float(stat), float(threshold), bool(stat <= threshold), detail)


def _inverse_cdf_of_min(t):
    # the reference CDF is only defined on [0, 1); values at or above 1 are certain
    t = np.asarray(t, dtype=float)
    inside = t < 1
    out = np.ones(t.shape)
    if np.any(inside):
        out[inside] = min_modulus_cdf_disk(1.0, np.maximum(t[inside], 0.0))
    return out


# ---------------------------------------------------------------- coefficient limit

def coefficient_limit(seed=DEFAULT_SEED, n=200, kmax=5, tol=0.02):
    pot = potential(circle(1.0))
    b = np.array([coefficient_bkn(pot, n, k) for k in range(n)])
    k = np.arange(n)
    rel = np.abs(math.pi * b[: kmax + 1] / (k[: kmax + 1] + 1) - 1)
    bound_gap = float(np.max(b - (k + 1) / math.pi))
    checks = [
        _check_le(f"max_k<={kmax} |pi b_(k,{n})/(k+1) - 1|", rel.max(), tol, per_k=rel.tolist()),
        Check(f"max_k (b_(k,{n}) - (k+1)/pi) <= 0", bound_gap, 0.0, bound_gap <= 0.0),
    ]

    def fig(path):
        plotting.series_svg(np.arange(kmax + 1), [rel], path, threshold=tol, title="relative gap to (k+1)/pi")

    return ScenarioResult("coefficient_limit", checks, fig)


# ---------------------------------------------------------------- kernel convergence

def kernel_convergence(seed=DEFAULT_SEED, sizes=(50, 100, 200), radius=0.7, frac=0.05):
    pot = potential(circle(1.0))
    grid = kernel_grid(radius=radius, seed=seed)

    def bergman(z, w):
        return bergman_kernel_eval(1.0, "inside", z, w)

    diffs = [kernel_sup_diff(finite_kernel(pot, n), bergman, grid) for n in sizes]
    sup = [d.sup_abs for d in diffs]
    kmax = diffs[-1].reference_max
    monotone = all(a > b for a, b in zip(sup[:-1], sup[1:]))
    checks = [
        _check_le(f"sup |K_{sizes[-1]} - K_Bergman| on |z|,|w| <= {radius}", sup[-1], frac * kmax, max_K=kmax),
        Check("sup-diff decreasing in n", float(monotone), 1.0, monotone, {"n": list(sizes), "sup_diff": sup}),
    ]

    def fig(path):
        plotting.series_svg(np.array(sizes), [sup], path, threshold=frac * kmax, logy=True, title="sup |K_n - K_Bergman|")

    return ScenarioResult("kernel_convergence", checks, fig)


# ---------------------------------------------------------------- Monte Carlo scenarios

def figure3(seed=DEFAULT_SEED, n=50, replicas=2000, tol=0.05):
    m = circle(1.0)
    pot = potential(m)
    mods = campaign_moduli(Model("jellium", n, m), replicas, seed)
    mx = mods.max(axis=1)
    ks_lim = ks_distance(1.0 / mx, _inverse_cdf_of_min)
    ks_fin = ks_distance(mx, lambda t: exact_extremal_cdf(pot, n, t, "max"))
    checks = [
        _check_le("KS(1/max modulus, Bergman min-modulus CDF)", ks_lim.distance, tol, N=replicas),
        _check_le("KS(max modulus, exact finite-n CDF)", ks_fin.distance, ks_fin.band, N=replicas),
    ]

    def fig(path):
        plotting.histogram_svg(1.0 / mx, path, plotting.density_from_cdf(_inverse_cdf_of_min),
                               title=f"inverse max modulus, jellium n={n}")

    return ScenarioResult("figure3", checks, fig, {"seed": seed, "n": n, "replicas": replicas})


def figure4(seed=DEFAULT_SEED, n=200, replicas=2000, tol=0.05):
    mods = campaign_moduli(Model("poly_zeros", n, circle(1.0), CoefficientLaw("complex_gaussian")), replicas, seed)
    inv = 1.0 / mods.max(axis=1)
    ks = ks_distance(inv, _inverse_cdf_of_min)
    checks = [_check_le("KS(1/max root modulus, Bergman min-modulus CDF)", ks.distance, tol, N=replicas)]

    def fig(path):
        plotting.histogram_svg(inv, path, plotting.density_from_cdf(_inverse_cdf_of_min),
                               title=f"inverse max root modulus, Kac n={n}")

    return ScenarioResult("figure4", checks, fig, {"seed": seed, "n": n, "replicas": replicas})


def bulk_max(seed=DEFAULT_SEED, n=100, replicas=2000, tol=0.06, n_exact=400, tol_exact=0.02):
    m = fubini_study()
    mods = campaign_moduli(Model("jellium", n, m), replicas, seed)
    scaled = mods.max(axis=1) / math.sqrt(n)
    ks = ks_distance(scaled, lambda t: bulk_max_cdf(2.0, 1.0, t))
    t = np.linspace(0.5, 3.0, 51)
    exact = exact_extremal_cdf(potential(m), n_exact, t * math.sqrt(n_exact), "max")
    gap = float(np.max(np.abs(exact - bulk_max_cdf(2.0, 1.0, t))))
    checks = [
        _check_le("KS(n^-1/2 max modulus, incomplete-gamma product)", ks.distance, tol, N=replicas),
        _check_le(f"max |exact n={n_exact} CDF - limit| on [0.5, 3]", gap, tol_exact),
    ]

    def fig(path):
        plotting.histogram_svg(scaled, path, plotting.density_from_cdf(lambda s: bulk_max_cdf(2.0, 1.0, s)),
                               title=f"rescaled max modulus, spherical jellium n={n}")

    return ScenarioResult("bulk_max", checks, fig, {"seed": seed, "n": n, "replicas": replicas})


def ginibre(seed=DEFAULT_SEED, radius=3.0, tol=1e-8):
    K = bulk_limit_kernel(2.0, 1.0)
    z, w = kernel_grid(radius=radius, seed=seed)

    def gin(z, w):
        return np.exp(z * np.conj(w) - (np.abs(z) ** 2 + np.abs(w) ** 2) / 2) / math.pi

    d = kernel_sup_diff(K, gin, (z, w))
    checks = [_check_le(f"sup |K_bulk - K_Ginibre| on |z|,|w| <= {radius}", d.sup_abs, tol)]

    def fig(path):
        err = np.sort(np.abs(K(z, w) - gin(z, w)))
        plotting.series_svg(np.arange(err.size), [np.maximum(err, 1e-20)], path, threshold=tol, logy=True,
                            title="sorted |K_bulk - K_Ginibre|")

    return ScenarioResult("ginibre", checks, fig)


def mittag_leffler_counts(seed=DEFAULT_SEED, n=400, replicas=500, window=1.5, alpha=2.0, lam=1.0):
    """Zero counts in the window: rescaled polynomial zeros vs the limiting random series."""
    m = builtin_measure("power_origin", alpha=alpha, lam=lam)
    law = CoefficientLaw("complex_gaussian")
    mods = campaign_moduli(Model("poly_zeros", n, m, law), replicas, seed)
    model_counts = np.sum(mods * n ** (1.0 / alpha) <= window, axis=1)
    a, l2 = ml_parameter_for_origin_exponent(alpha, lam)
    oracle_counts = np.empty(replicas)
    for j in range(replicas):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(j, 1)))
        f = mittag_leffler(a, l2, law, rng, window * 1.2)
        oracle_counts[j] = f.zeros(window).n
    diff = float(model_counts.mean() - oracle_counts.mean())
    se = math.sqrt(model_counts.var(ddof=1) / replicas + oracle_counts.var(ddof=1) / replicas)
    checks = [_check_le("|mean count (model) - mean count (series)| / SE", abs(diff) / se, 3.0,
                        model_mean=float(model_counts.mean()), series_mean=float(oracle_counts.mean()), se=se)]

    def fig(path):
        plotting.histogram_svg(model_counts, path, bins=np.arange(-0.5, max(model_counts.max(), oracle_counts.max()) + 1.5),
                               title="zeros in the window (bars: polynomial model)")

    return ScenarioResult("mittag_leffler", checks, fig, {"seed": seed, "n": n, "replicas": replicas,
                                                          "series_parameters": [a, l2]})


def weyl(seed=DEFAULT_SEED, n=200, replicas=1000, tol=0.06):
    mods = campaign_moduli(Model("weyl", n, law=CoefficientLaw("complex_gaussian")), replicas, seed)
    mx = mods.max(axis=1)
    ks = ks_distance(mx, lambda t: max_modulus_cdf_outside(1.0, t))
    checks = [_check_le("KS(max root modulus, prod (1 - t^-2k))", ks.distance, tol, N=replicas)]

    def fig(path):
        plotting.histogram_svg(mx, path, plotting.density_from_cdf(lambda t: max_modulus_cdf_outside(1.0, t)),
                               title=f"max root modulus, Weyl n={n}")

    return ScenarioResult("weyl", checks, fig, {"seed": seed, "n": n, "replicas": replicas})


# ---------------------------------------------------------------- deterministic identities

def _ratio_spread(log_ratio):
    r = np.exp(np.asarray(log_ratio) - np.mean(log_ratio))
    return float(np.max(np.abs(r / r[0] - 1)))


def equivariance(seed=DEFAULT_SEED, n=20, tol_q=1e-6, tol_h=1e-8):
    u = np.linspace(0.1, 0.9, 9)
    worst_q = {}
    for name, m in (("circle", circle(1.0)), ("uniform_disk", uniform_disk(1.0))):
        pot, ipot = potential(m), potential(invert(m))
        err = 0.0
        for k in range(n):
            q1 = radial_density(pot, n, k).quantile(u)
            q2 = radial_density(ipot, n, n - 1 - k).quantile(1 - u)
            err = max(err, float(np.max(np.abs(q1 * q2 - 1))))
        worst_q[name] = err
    worst_h = {}
    for name, m in (("circle", circle(1.0)), ("uniform_disk", uniform_disk(1.0)), ("fubini_study", fubini_study()),
                    ("pareto_tail", pareto_tail(1.5, 2.0))):
        h = basis_norms(m, n).log_h
        hi = basis_norms(invert(m), n).log_h
        worst_h[name] = _ratio_spread(h - hi[::-1])
    checks = [
        _check_le("max |Q_(m,k)(u) Q_(inv m,n-1-k)(1-u) - 1|", max(worst_q.values()), tol_q, per_measure=worst_q),
        _check_le("relative spread of h_k / h'_(n-k)", max(worst_h.values()), tol_h, per_measure=worst_h),
    ]

    def fig(path):
        names = list(worst_h)
        plotting.series_svg(np.arange(len(names)), [np.maximum([worst_h[x] for x in names], 1e-18)], path,
                            threshold=tol_h, logy=True, title="norm reversal spread per measure")

    return ScenarioResult("equivariance", checks, fig)


@lru_cache(maxsize=None)
def _independent_potential(m, r):
    # V(r) = int_1^r nu(D_s)/s ds, by scipy's adaptive quadrature
    pts = [x for x in (m.support_inner, m.support_outer, *m.breakpoints, *(a for a, _ in m.atoms))
           if 0 < x < math.inf and min(1.0, r) < x < max(1.0, r)]
    val, _ = integrate.quad(lambda s: float(m.mass_in_disk(s)) / s, 1.0, r, points=pts or None, limit=200,
                            epsabs=1e-13, epsrel=1e-13)
    return val


def independent_radial_moment(m, n, p):
    """int r^p exp(-2n V(r)) dmu(r) with scipy quadrature and an independently computed V."""
    total = sum(w * r ** p * math.exp(-2 * n * _independent_potential(m, r)) for r, w in m.atoms)
    if m.density is not None:
        def f(r):
            return r ** p * math.exp(-2 * n * _independent_potential(m, r)) * float(m.density(r))

        lo = m.support_inner
        hi = m.support_outer
        cuts = sorted({x for x in (1.0, *m.breakpoints) if lo < x < hi})
        edges = [lo, *cuts, hi]
        for a, b in zip(edges[:-1], edges[1:]):
            val, _ = integrate.quad(f, a, b, limit=400, epsabs=0.0, epsrel=1e-12)
            total += val
    return total


def gram_matrix(m, n, angles=64):
    """<R_j, R_k> by tensor quadrature: exact trapezoid in angle, scipy quadrature in radius."""
    logh = basis_norms(m, n).log_h
    th = 2 * math.pi * np.arange(angles) / angles
    j = np.arange(n + 1)
    ang = np.mean(np.exp(1j * (j[:, None] - j[None, :])[..., None] * th), axis=-1)
    rad = np.array([[independent_radial_moment(m, n, a + b) for b in j] for a in j])
    return ang * rad / np.exp(0.5 * (logh[:, None] + logh[None, :]))


def orthonormality(seed=DEFAULT_SEED, n_gram=10, n_table=100, tol_gram=1e-6, tol_table=1e-8):
    gram = {}
    for name, m in (("circle", circle(1.0)), ("uniform_disk", uniform_disk(1.0)), ("fubini_study", fubini_study()),
                    ("pareto_tail", pareto_tail(1.5, 2.0))):
        G = gram_matrix(m, n_gram)
        gram[name] = float(np.max(np.abs(G - np.eye(n_gram + 1))))
    k = np.arange(n_table + 1)
    lbin = np.array([math.lgamma(n_table + 1) - math.lgamma(x + 1) - math.lgamma(n_table - x + 1) for x in k])
    fs = _ratio_spread(basis_norms(fubini_study(), n_table).log_h + lbin)
    lfac = np.array([math.lgamma(x + 1) for x in k])
    disk_closed = n_table - (k + 1) * math.log(n_table) + lfac + log_gamma_p(k + 1.0, float(n_table))
    disk = _ratio_spread(basis_norms(uniform_disk(1.0), n_table).log_h - disk_closed)
    checks = [
        _check_le(f"max |Gram - I| (n={n_gram})", max(gram.values()), tol_gram, per_measure=gram),
        _check_le(f"spread of h_k C(n,k), spherical (n={n_table})", fs, tol_table),
        _check_le(f"spread of h_k n^(k+1) e^-n / (k! - Gamma(k+1,n)), disk (n={n_table})", disk, tol_table),
    ]

    def fig(path):
        names = list(gram)
        plotting.series_svg(np.arange(len(names)), [np.maximum([gram[x] for x in names], 1e-18)], path,
                            threshold=tol_gram, logy=True, title="Gram deviation per measure")

    return ScenarioResult("orthonormality", checks, fig)


SCENARIOS = {
    "coefficient_limit": coefficient_limit,
    "kernel_convergence": kernel_convergence,
    "figure3": figure3,
    "figure4": figure4,
    "bulk_max": bulk_max,
    "ginibre": ginibre,
    "mittag_leffler": mittag_leffler_counts,
    "weyl": weyl,
    "equivariance": equivariance,
    "orthonormality": orthonormality,
}


def run_scenario(name, seed=DEFAULT_SEED, **overrides) -> ScenarioResult:
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    return SCENARIOS[name](seed=seed, **overrides)
