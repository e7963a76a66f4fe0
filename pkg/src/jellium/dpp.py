"""Finite-n radial jellium at inverse temperature 2.

The gas is a determinantal point process with kernel

    K_n(z, w) = sum_{k<n} b_{k,n} (z conj(w))^k exp(-(n+1)(V(z) + V(w))),
    1 / b_{k,n} = 2 pi int_0^inf r^(2k+1) exp(-2(n+1) V(r)) dr,

and, the weight being radial, its set of moduli has the law of independent
variables Y_0, ..., Y_{n-1} with Y_k proportional to r^(2k+1) exp(-2(n+1)V(r)).
Sampling draws each Y_k by inverting its CDF and attaches uniform angles.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _quad
from .errors import DivergenceError
from .measures import RadialMeasure, RadialPotential, potential

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class PointConfiguration:
    """A finite multiset of complex points with a provenance tag."""

    points: np.ndarray
    provenance: str = ""

    @property
    def n(self):
        return int(self.points.size)

    @property
    def moduli(self):
        return np.abs(self.points)

    def __len__(self):
        return self.n


class RadialWeightDensity:
    """Law of the radius proportional to r^(2k+1) exp(-c V(r)) dr.

    Internally everything is expressed in u = log r, where the log-density
    (2k+2) u - c V(e^u) is concave because dV/du = nu(D_{e^u}) is
    nondecreasing. The CDF is held as exact panel integrals; quantiles are
    found by safeguarded Newton steps inside the right panel.
    """

    def __init__(self, pot: RadialPotential, k: int, exponent_scale: float):
        if k < 0 or int(k) != k:
            raise ValueError("k must be a nonnegative integer")
        self.potential = pot
        self.k = int(k)
        self.exponent_scale = c = float(exponent_scale)
        slope_inf = 2 * k + 2 - c * pot._m_hi
        slope_zero = 2 * k + 2 - c * pot._m_lo
        if slope_inf >= 0 or slope_zero <= 0:
            raise DivergenceError(
                f"r^{2 * k + 1} exp(-{c:g} V) is not integrable (k={k} too large for this exponent)"
            )
        a = 2.0 * k + 2.0

        def logf(u):
            return a * u - c * pot.eval_u(u)

        self._logf = logf
        table = a * pot.table_u - c * pot.table_v
        u0 = float(pot.table_u[int(np.argmax(table))])
        lo, hi = _quad.decay_bounds(logf, u0, drop=50.0)
        kinks = [x for x in pot.source.kinks_u() if lo < x < hi] + [u0]
        panels = _quad.refine_panels(logf, _quad.initial_edges(lo, hi, kinks, width=(hi - lo) / 32), rtol=1e-15)
        self._panels = panels
        self.log_integral = panels.log_total
        self._edges = np.concatenate([panels.a, panels.b[-1:]])
        logcum = panels.log_cumulative()
        self._cdf_edges = np.concatenate([[0.0], np.exp(logcum - self.log_integral)])
        logsf = np.logaddexp.accumulate(panels.logval[::-1])[::-1]
        self._sf_edges = np.concatenate([np.exp(logsf - self.log_integral), [0.0]])

    @property
    def log_normalization(self):
        """log of 2 pi int r^(2k+1) exp(-c V(r)) dr."""
        return LOG_2PI + self.log_integral

    @property
    def normalization(self):
        return math.exp(self.log_normalization)

    def logpdf_u(self, u):
        return self._logf(np.asarray(u, dtype=float)) - self.log_integral

    def pdf(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            u = np.log(r)
        return np.where(r > 0, np.exp(self.logpdf_u(u)) / np.where(r > 0, r, 1.0), 0.0)

    def _partial(self, i, u):
        # mass of the density between the left edge of panel i and u
        return np.exp(_quad.log_gl(self._logf, self._edges[i], u) - self.log_integral)

    def _locate(self, u):
        u = np.asarray(u, dtype=float)
        i = np.clip(np.searchsorted(self._edges, u, side="right") - 1, 0, len(self._edges) - 2)
        below = u <= self._edges[0]
        above = u >= self._edges[-1]
        return i, below, above

    def cdf(self, t):
        """P(Y <= t)."""
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            u = np.log(t)
        i, below, above = self._locate(u)
        mid = ~(below | above)
        out = np.where(above, 1.0, 0.0)
        if np.any(mid):
            out = out.astype(float)
            out[mid] = self._cdf_edges[i[mid]] + self._partial(i[mid], u[mid])
        return np.clip(out, 0.0, 1.0)

    def sf(self, t):
        """P(Y > t), computed without cancellation near the upper tail."""
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            u = np.log(t)
        i, below, above = self._locate(u)
        mid = ~(below | above)
        out = np.where(below, 1.0, 0.0)
        if np.any(mid):
            out = out.astype(float)
            out[mid] = self._sf_edges[i[mid]] - self._partial(i[mid], u[mid])
        return np.clip(out, 0.0, 1.0)

    def quantile(self, p, tol=1e-13, max_iter=60):
        """Inverse CDF, refined until the probability error is below ``tol``."""
        p = np.asarray(p, dtype=float)
        if np.any((p < 0) | (p > 1)):
            raise ValueError("probabilities must lie in [0, 1]")
        flat = p.ravel()
        i = np.clip(np.searchsorted(self._cdf_edges, flat, side="right") - 1, 0, len(self._edges) - 2)
        lo = self._edges[i].copy()
        hi = self._edges[i + 1].copy()
        c0 = self._cdf_edges[i]
        c1 = self._cdf_edges[i + 1]
        frac = np.where(c1 > c0, (flat - c0) / np.where(c1 > c0, c1 - c0, 1.0), 0.5)
        u = lo + np.clip(frac, 0.0, 1.0) * (hi - lo)
        active = np.ones(flat.shape, dtype=bool)
        for _ in range(max_iter):
            idx = np.nonzero(active)[0]
            if idx.size == 0:
                break
            ua = u[idx]
            g = c0[idx] + self._partial(i[idx], ua) - flat[idx]
            d = np.exp(self.logpdf_u(ua))
            done = np.abs(g) <= tol
            lo[idx] = np.where(g < 0, ua, lo[idx])
            hi[idx] = np.where(g > 0, ua, hi[idx])
            with np.errstate(divide="ignore", invalid="ignore"):
                step = ua - g / d
            bad = ~np.isfinite(step) | (step <= lo[idx]) | (step >= hi[idx])
            nxt = np.where(bad, 0.5 * (lo[idx] + hi[idx]), step)
            done |= (hi[idx] - lo[idx]) <= 1e-15 * np.maximum(1.0, np.abs(ua))
            u[idx] = np.where(done, ua, nxt)
            active[idx[done]] = False
        return np.exp(u).reshape(p.shape)

    def sample(self, rng, size=None):
        return self.quantile(rng.random(size))


@functools.lru_cache(maxsize=8192)
def radial_density(pot: RadialPotential, n: int, k: int) -> RadialWeightDensity:
    """Law of the k-th independent radius of the n-particle jellium."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 <= k <= n - 1:
        raise ValueError(f"k must lie in 0..{n - 1}")
    return RadialWeightDensity(pot, k, 2.0 * (n + 1))


def log_coefficient_bkn(pot, n, k):
    return -radial_density(pot, n, k).log_normalization


def coefficient_bkn(pot: RadialPotential, n: int, k: int) -> float:
    """b_{k,n} = 1 / (2 pi int r^(2k+1) exp(-2(n+1)V(r)) dr)."""
    return math.exp(log_coefficient_bkn(pot, n, k))


@dataclass(frozen=True)
class KernelSeries:
    """Kernel sum_k c_k z^{p_k} conj(w)^{p_k} g(|z|) g(|w|) stored in log form.

    ``powers`` defaults to 0..K; series at infinity use negative powers.
    ``log_weight`` maps a radius to log g.
    """

    log_coeffs: np.ndarray
    log_weight: Callable
    powers: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.powers is None:
            object.__setattr__(self, "powers", np.arange(len(self.log_coeffs), dtype=float))

    @property
    def coefficients(self):
        return np.exp(self.log_coeffs)

    @property
    def truncation(self):
        return len(self.log_coeffs) - 1

    def __call__(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        z, w = np.broadcast_arrays(z, w)
        with np.errstate(divide="ignore"):
            lz = np.log(np.abs(z))
            lw = np.log(np.abs(w))
        theta = np.angle(z) - np.angle(w)
        p = self.powers
        with np.errstate(invalid="ignore"):
            mag = self.log_coeffs + p * (lz + lw)[..., None]
        mag = np.where(p == 0, self.log_coeffs, mag)
        top = np.max(mag, axis=-1)
        top = np.where(np.isfinite(top), top, 0.0)
        s = np.sum(np.exp(mag - top[..., None]) * np.exp(1j * p * theta[..., None]), axis=-1)
        lg = self.log_weight(np.abs(z)) + self.log_weight(np.abs(w))
        return np.exp(top + lg) * s

    def diagonal(self, r):
        r = np.asarray(r, dtype=float)
        return self(r.astype(complex), r.astype(complex)).real


def finite_kernel(pot: RadialPotential, n: int) -> KernelSeries:
    """Correlation kernel of the n-particle jellium."""
    logs = np.array([log_coefficient_bkn(pot, n, k) for k in range(n)])
    return KernelSeries(logs, lambda r: -(n + 1) * pot(r))


def rescaled_kernel(pot: RadialPotential, n: int, s: float) -> KernelSeries:
    """Kernel of the dilated configuration {s x_1, ..., s x_n}.

    By the change-of-variables rule this is K_n(z/s, w/s) / s^2.
    """
    if not s > 0:
        raise ValueError("scale factor must be positive")
    base = finite_kernel(pot, n)
    k = np.arange(n)
    logs = base.log_coeffs - (2.0 * k + 2.0) * math.log(s)
    return KernelSeries(logs, lambda r: -(n + 1) * pot(np.asarray(r) / s))


class Jellium:
    """The n-particle jellium of a radial measure, with its radial laws cached."""

    def __init__(self, measure: RadialMeasure, n: int):
        if n < 1:
            raise ValueError("n must be at least 1")
        self.measure = measure
        self.n = int(n)
        self.potential = potential(measure)
        self.densities = [radial_density(self.potential, self.n, k) for k in range(self.n)]

    def radii_from_uniforms(self, u):
        """Map an array of shape (..., n) of uniforms to the radii Y_0..Y_{n-1}."""
        u = np.asarray(u, dtype=float)
        out = np.empty_like(u)
        for k, dens in enumerate(self.densities):
            out[..., k] = dens.quantile(u[..., k])
        return out

    def sample(self, rng) -> PointConfiguration:
        u = rng.random(self.n)
        theta = 2.0 * math.pi * rng.random(self.n)
        radii = self.radii_from_uniforms(u)
        return PointConfiguration(radii * np.exp(1j * theta), provenance="jellium")

    def max_cdf(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            logs = sum(np.log(d.cdf(t)) for d in self.densities)
        return np.exp(logs)

    def min_cdf(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            logs = sum(np.log(d.sf(t)) for d in self.densities)
        return -np.expm1(logs)


@functools.lru_cache(maxsize=64)
def jellium(measure: RadialMeasure, n: int) -> Jellium:
    return Jellium(measure, n)


def sample_jellium(m: RadialMeasure, n: int, rng) -> PointConfiguration:
    """One exact draw of the n-particle jellium associated to ``m``."""
    return jellium(m, n).sample(rng)


def exact_extremal_cdf(pot: RadialPotential, n: int, t, which="max"):
    """Exact finite-n CDF of the largest (or smallest) modulus."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    dens = [radial_density(pot, n, k) for k in range(n)]
    with np.errstate(divide="ignore"):
        if which == "max":
            return np.exp(sum(np.log(d.cdf(t)) for d in dens))
        if which == "min":
            return -np.expm1(sum(np.log(d.sf(t)) for d in dens))
    raise ValueError("which must be 'max' or 'min'")


def kernel_trace(kernel: KernelSeries, breaks=()) -> float:
    """int K(z, z) dA(z); equals the number of points for a projection kernel."""

    def logf(u):
        r = np.exp(u)
        with np.errstate(divide="ignore"):
            return LOG_2PI + 2.0 * u + np.log(np.maximum(kernel.diagonal(r), 0.0))

    return math.exp(_quad.log_integrate(logf, -np.inf, np.inf, breaks=breaks, rtol=1e-12).log_total)
