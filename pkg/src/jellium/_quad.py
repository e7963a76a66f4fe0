"""Composite Gauss-Legendre quadrature with adaptive panel refinement.

Everything here works with the logarithm of a nonnegative integrand, so the
same machinery serves the potential (integrand = radial mass) and the very
peaked weights r^(2k+1) exp(-2(n+1)V(r)) met at large n.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, QuadratureError

GL_ORDER = 20
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)


def gl_nodes(a, b):
    """Nodes and weights of the 20-point rule mapped onto each [a_i, b_i]."""
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (_GL_X + 1.0), half * _GL_W


def _logsum(lf, w):
    # log(sum(w * exp(lf))) along the last axis, with all -inf rows mapped to -inf
    m = np.max(lf, axis=-1)
    finite = np.isfinite(m)
    safe_m = np.where(finite, m, 0.0)
    with np.errstate(invalid="ignore", under="ignore"):
        s = np.sum(w * np.exp(lf - safe_m[..., None]), axis=-1)
    with np.errstate(divide="ignore"):
        out = safe_m + np.log(np.abs(s))
    return np.where(finite & (s > 0), out, -np.inf)


def log_gl(logf, a, b):
    """log of the 20-point Gauss-Legendre estimate of the integral of exp(logf) on each [a_i, b_i]."""
    x, w = gl_nodes(a, b)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lf = logf(x)
    lf = np.where(np.isnan(lf), -np.inf, lf)
    return _logsum(lf, np.broadcast_to(w, lf.shape))


@dataclass(frozen=True)
class Panels:
    """Accepted panels [a_i, b_i] and log of the integral over each one."""

    a: np.ndarray
    b: np.ndarray
    logval: np.ndarray
    error: float

    @property
    def log_total(self):
        if self.logval.size == 0:
            return -np.inf
        return float(np.logaddexp.reduce(self.logval))

    def log_cumulative(self):
        """log of the integral from the first edge up to each b_i."""
        return np.logaddexp.accumulate(self.logval)


def refine_panels(logf, edges, rtol=1e-14, atol=0.0, max_rounds=60):
    """Bisect panels until 20-point and split 2x20-point estimates agree.

    ``edges`` is a sorted sequence of breakpoints; each gap is one starting
    panel. A panel is accepted when the difference of the two estimates is at
    most ``max(rtol * total, atol)``, the total being the running estimate of
    the whole integral.
    """
    edges = np.unique(np.asarray(edges, dtype=float))
    a = edges[:-1]
    b = edges[1:]
    coarse = log_gl(logf, a, b)
    done_a, done_b, done_v = [], [], []
    worst = 0.0
    for _ in range(max_rounds):
        if a.size == 0:
            break
        mid = 0.5 * (a + b)
        left = log_gl(logf, a, mid)
        right = log_gl(logf, mid, b)
        fine = np.logaddexp(left, right)
        pool = np.concatenate(done_v + [fine]) if done_v else fine
        log_total = np.logaddexp.reduce(pool) if pool.size else -np.inf
        if not np.isfinite(log_total):
            # integrand vanishes identically on what is left
            done_a += [a, mid]
            done_b += [mid, b]
            done_v += [left, right]
            a = b = np.empty(0)
            break
        with np.errstate(invalid="ignore"):
            err = np.abs(np.exp(fine - log_total) - np.exp(coarse - log_total))
        err = np.where(np.isnan(err), 0.0, err)
        tol = max(rtol, atol * np.exp(-log_total))
        ok = (err <= tol) | (b - a < 1e-13 * np.maximum(1.0, np.abs(a)))
        if np.any(ok):
            with np.errstate(over="ignore"):
                worst = max(worst, float(np.max(err[ok])) * float(np.exp(log_total)))
            done_a += [a[ok], mid[ok]]
            done_b += [mid[ok], b[ok]]
            done_v += [left[ok], right[ok]]
        bad = ~ok
        a, b, mid = a[bad], b[bad], mid[bad]
        coarse = np.concatenate([left[bad], right[bad]])
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
    if a.size:
        raise QuadratureError("adaptive quadrature did not converge", achieved=float(np.max(err)))
    pa = np.concatenate(done_a)
    order = np.argsort(pa)
    return Panels(pa[order], np.concatenate(done_b)[order], np.concatenate(done_v)[order], worst)


def decay_bounds(logf, u0, lo=-np.inf, hi=np.inf, drop=50.0, limit=2000.0):
    """Walk outward from ``u0`` until ``logf`` falls ``drop`` below ``logf(u0)``.

    Assumes the integrand is unimodal around ``u0`` (true for log-concave
    weights). Returns the clipped interval; raises DivergenceError if the
    integrand has not decayed by ``limit`` in either direction.
    """
    peak = float(logf(np.array([u0]))[0])
    bounds = []
    for sign, stop in ((-1.0, lo), (1.0, hi)):
        h = 1e-3
        u = u0
        while True:
            u = u0 + sign * h
            if (sign < 0 and u <= stop) or (sign > 0 and u >= stop):
                u = stop
                break
            if float(logf(np.array([u]))[0]) < peak - drop:
                break
            if h > limit:
                raise DivergenceError("integrand does not decay; the integral diverges")
            h *= 1.6
        bounds.append(u)
    return bounds[0], bounds[1]


def log_integrate(logf, lo, hi, u0=None, breaks=(), rtol=1e-14, drop=50.0):
    """log of the integral of exp(logf(u)) du over [lo, hi] (infinite ends allowed).

    Without ``u0`` the integrand is scanned on a grid; the integration range
    spans every grid point within ``drop`` of the peak and is then extended
    outward until the integrand has decayed, so several modes are tolerated.
    """
    if u0 is not None:
        a, b = decay_bounds(logf, u0, lo, hi, drop=drop)
        return integrate_between(logf, a, b, breaks, rtol=rtol)
    grid = np.linspace(max(lo, -80.0), min(hi, 80.0), 2561)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = logf(grid)
    vals = np.where(np.isnan(vals), -np.inf, vals)
    top = np.max(vals)
    if not np.isfinite(top):
        raise DivergenceError("integrand is not finite anywhere on the scan grid")
    near = np.nonzero(vals > top - drop)[0]
    a = decay_bounds(logf, grid[near[0]], lo, hi, drop=drop)[0]
    b = decay_bounds(logf, grid[near[-1]], lo, hi, drop=drop)[1]
    peaks = [grid[int(np.argmax(vals))]]
    return integrate_between(logf, a, b, list(breaks) + peaks, rtol=rtol)


def initial_edges(a, b, breaks=(), width=0.5):
    """Breakpoints inside (a, b) plus a uniform subdivision of the given width."""
    pts = [a, b] + [x for x in breaks if a < x < b]
    pts = np.unique(np.asarray(pts, dtype=float))
    out = [pts[:1]]
    for lo, hi in zip(pts[:-1], pts[1:]):
        m = max(1, int(np.ceil((hi - lo) / width)))
        out.append(np.linspace(lo, hi, m + 1)[1:])
    return np.concatenate(out)


def integrate_between(logf, a, b, breaks=(), rtol=1e-14, width=0.5):
    return refine_panels(logf, initial_edges(a, b, breaks, width), rtol=rtol)
