"""Random polynomials orthonormalized against a radial background measure.

For a radial measure the monomials are orthogonal for

    <P, Q> = int P(z) conj(Q(z)) exp(-2n V(z)) dnu(z),

so the random polynomial is sum_k a_k z^k / sqrt(h_k) with
h_k = int r^(2k) exp(-2n V(r)) dmu(r). The h_k span hundreds of orders of
magnitude, hence coefficients are kept as (log-magnitude, phase) pairs.
Zeros are computed by Aberth-Ehrlich iteration, batched over replicas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _quad
from .dpp import PointConfiguration
from .errors import DivergenceError
from .measures import RadialMeasure, potential

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class BasisNorms:
    """log h_k for k = 0..n."""

    n: int
    log_h: np.ndarray

    @property
    def h(self):
        return np.exp(self.log_h)

    def log_coefficient_scale(self):
        """log of 1/sqrt(h_k), the monomial coefficients of the orthonormal basis."""
        return -0.5 * self.log_h


def basis_norms(m: RadialMeasure, n: int) -> BasisNorms:
    """h_k = int r^(2k) exp(-2n V(r)) dmu(r), k = 0..n, in log form."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    pot = potential(m)
    lo = math.log(m.support_inner) if m.support_inner > 0 else -np.inf
    hi = math.log(m.support_outer) if m.support_outer < math.inf else np.inf
    out = np.empty(n + 1)
    for k in range(n + 1):
        parts = []
        for r, w in m.atoms:
            parts.append(math.log(w) + 2 * k * math.log(r) - 2 * n * float(pot(r)))
        if m.density is not None:

            def logf(u, k=k):
                return 2 * k * u - 2 * n * pot.eval_u(u) + m.log_density_u(u)

            try:
                panels = _quad.log_integrate(logf, lo, hi, breaks=m.kinks_u(), rtol=1e-14)
            except DivergenceError as exc:
                raise DivergenceError(f"h_{k} diverges for degree {n}") from exc
            parts.append(panels.log_total)
        val = float(np.logaddexp.reduce(parts)) if parts else -np.inf
        if not np.isfinite(val):
            raise DivergenceError(f"h_{k} is not a positive finite number for degree {n}")
        out[k] = val
    return BasisNorms(n, out)


@dataclass(frozen=True)
class CoefficientLaw:
    """Law of the i.i.d. coefficients a_k.

    kinds: complex_gaussian (E|a|^2 = 1), uniform_disk_coeff (uniform on the
    unit disk), symmetric_bernoulli_complex ((+-1 +- i)/sqrt 2 with equal
    probabilities) and user_table (finite table of values and probabilities).
    """

    kind: str = "complex_gaussian"
    values: tuple = ()
    probs: tuple = ()

    KINDS = ("complex_gaussian", "uniform_disk_coeff", "symmetric_bernoulli_complex", "user_table")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown coefficient law {self.kind!r}")
        if self.kind == "user_table":
            vals = np.asarray(self.values, dtype=complex)
            p = np.asarray(self.probs, dtype=float)
            if vals.size == 0 or vals.shape != p.shape:
                raise ValueError("user_table needs matching values and probabilities")
            if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
                raise ValueError("probabilities must be nonnegative and sum to 1")
            if np.any((vals == 0) & (p > 0)):
                raise ValueError("the coefficient law must not charge 0")
            if np.count_nonzero(p > 0) < 2:
                raise ValueError("the coefficient law must not be deterministic")

    def sample(self, rng, size):
        if self.kind == "complex_gaussian":
            z = rng.standard_normal(size) + 1j * rng.standard_normal(size)
            return z / math.sqrt(2.0)
        if self.kind == "uniform_disk_coeff":
            r = np.sqrt(rng.random(size))
            return r * np.exp(2j * math.pi * rng.random(size))
        if self.kind == "symmetric_bernoulli_complex":
            shape = (size,) if np.isscalar(size) else tuple(size)
            s = rng.integers(0, 2, size=(2,) + shape)
            return ((2 * s[0] - 1) + 1j * (2 * s[1] - 1)) / math.sqrt(2.0)
        vals = np.asarray(self.values, dtype=complex)
        idx = rng.choice(vals.size, size=size, p=np.asarray(self.probs, dtype=float))
        return vals[idx]

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "user_table":
            d["values"] = [[v.real, v.imag] for v in np.asarray(self.values, dtype=complex)]
            d["probs"] = list(self.probs)
        return d

    @classmethod
    def from_dict(cls, d):
        if isinstance(d, str):
            return cls(d)
        vals = tuple(complex(*v) if isinstance(v, (list, tuple)) else complex(v) for v in d.get("values", ()))
        return cls(d["kind"], vals, tuple(d.get("probs", ())))


def _draw_nonzero(law, rng, size):
    a = law.sample(rng, size)
    zero = a == 0
    if np.any(zero):
        # probability zero event; one resample
        a[zero] = law.sample(rng, int(np.count_nonzero(zero)))
    if np.any(a == 0):
        raise RuntimeError("coefficient law produced zeros twice in a row")
    return a


@dataclass(frozen=True)
class PolynomialSample:
    """Polynomial sum_k c_k z^k with c_k = exp(log_mag[k] + i phase[k])."""

    log_mag: np.ndarray
    phase: np.ndarray
    provenance: str = ""

    @property
    def degree(self):
        return len(self.log_mag) - 1

    @property
    def coefficients(self):
        return np.exp(self.log_mag + 1j * self.phase)

    @classmethod
    def from_coefficients(cls, coeffs, provenance=""):
        """Build from plain complex coefficients c_0, ..., c_n (lowest degree first)."""
        c = np.asarray(coeffs, dtype=complex)
        with np.errstate(divide="ignore"):
            return cls(np.log(np.abs(c)), np.angle(c), provenance)

    def reversed(self):
        """z^n p(1/z)."""
        return PolynomialSample(self.log_mag[::-1].copy(), self.phase[::-1].copy(), self.provenance)


def _scaled_coefficients(log_mag, phase):
    """Coefficients divided by a power of two so that the largest modulus lies in [1/2, 1)."""
    top = np.max(log_mag, axis=-1, keepdims=True)
    e = np.floor(top / math.log(2.0)) + 1.0
    mag = np.exp(log_mag - e * math.log(2.0))
    return mag * np.exp(1j * phase), e[..., 0] * math.log(2.0)


def sample_polynomial(m: RadialMeasure, n: int, law: CoefficientLaw, rng, norms: BasisNorms = None) -> PolynomialSample:
    """P_n = sum_k a_k z^k / sqrt(h_k) with a_k i.i.d. from ``law``."""
    if norms is None:
        norms = basis_norms(m, n)
    if norms.n != n:
        raise ValueError("basis norms computed for a different degree")
    a = _draw_nonzero(law, rng, n + 1)
    return PolynomialSample(np.log(np.abs(a)) + norms.log_coefficient_scale(), np.angle(a), "poly_zeros")


def weyl_log_scale(n):
    """log of sqrt(n^k / k!), the monomial weights of the rescaled Weyl polynomial."""
    k = np.arange(n + 1)
    return 0.5 * (k * math.log(n) - np.array([math.lgamma(j + 1.0) for j in k]))


def sample_weyl(n: int, law: CoefficientLaw, rng) -> PolynomialSample:
    a = _draw_nonzero(law, rng, n + 1)
    return PolynomialSample(np.log(np.abs(a)) + weyl_log_scale(n), np.angle(a), "weyl")


# ---------------------------------------------------------------- evaluation

def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


_SPLIT = 134217729.0  # 2^27 + 1


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, al * bl - (((p - ah * bh) - al * bh) - ah * bl)


def _comp_horner(c, x):
    """Compensated Horner for complex coefficients c (highest degree last) at x.

    ``c`` has shape (n+1,) or (n+1,) + x.shape for per-point coefficients.
    """
    xr, xi = x.real, x.imag
    sr = np.broadcast_to(c[-1].real, x.shape).copy()
    si = np.broadcast_to(c[-1].imag, x.shape).copy()
    er = np.zeros(x.shape)
    ei = np.zeros(x.shape)
    for coef in c[-2::-1]:
        p1, e1 = _two_prod(sr, xr)
        p2, e2 = _two_prod(si, xi)
        p3, e3 = _two_prod(sr, xi)
        p4, e4 = _two_prod(si, xr)
        r, e5 = _two_sum(p1, -p2)
        i, e6 = _two_sum(p3, p4)
        r, e7 = _two_sum(r, coef.real)
        i, e8 = _two_sum(i, coef.imag)
        # error polynomial, evaluated by plain Horner
        er, ei = er * xr - ei * xi + (e1 - e2 + e5 + e7), er * xi + ei * xr + (e3 + e4 + e6 + e8)
        sr, si = r, i
    return (sr + er) + 1j * (si + ei)


_EVAL_CHUNK = 2048


def evaluate(p: PolynomialSample, z):
    """Value of p at z as (log|p(z)|, arg p(z)).

    At each point z = |z| e^(i theta) the terms c_k |z|^k are rescaled by a
    power of two so the largest has modulus in [1/2, 1), then compensated
    Horner runs at e^(i theta). Nothing overflows and no dominant term
    underflows, whatever the spread of the coefficients.
    """
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    out_log = np.empty(flat.shape)
    out_arg = np.empty(flat.shape)
    k = np.arange(p.degree + 1)[:, None]
    ln2 = math.log(2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        for s in range(0, flat.size, _EVAL_CHUNK):
            zc = flat[s:s + _EVAL_CHUNK]
            r = np.abs(zc)
            L = p.log_mag[:, None] + np.where(k == 0, 0.0, k * np.log(r)[None, :])
            top = np.max(L, axis=0)
            e = np.where(np.isfinite(top), np.floor(top / ln2) + 1.0, 0.0)
            d = np.exp(L - e * ln2) * np.exp(1j * p.phase)[:, None]
            zeta = np.where(r > 0, zc / np.where(r > 0, r, 1.0), 1.0)
            v = _comp_horner(d, zeta)
            out_log[s:s + _EVAL_CHUNK] = np.log(np.abs(v)) + e * ln2
            out_arg[s:s + _EVAL_CHUNK] = np.angle(v)
    return out_log.reshape(z.shape), out_arg.reshape(z.shape)


def evaluate_complex(p: PolynomialSample, z):
    lg, arg = evaluate(p, z)
    return np.exp(lg + 1j * arg)


# ---------------------------------------------------------------- root finding

@dataclass(frozen=True)
class RootSet:
    """Roots of a polynomial, with the iteration report.

    ``backward_error`` is max_i |p(z_i)| / sum_k |c_k| |z_i|^k.
    """

    roots: np.ndarray
    backward_error: float
    converged: bool
    sweeps: int
    distinct: np.ndarray = field(default=None)
    multiplicity: np.ndarray = field(default=None)

    @property
    def n(self):
        return int(self.roots.size)

    @property
    def valid(self):
        return self.converged

    def as_points(self, provenance="root set"):
        return PointConfiguration(self.roots.copy(), provenance)


def _newton_polygon_guess(logc, rng_phase=0.4):
    """Initial approximations on circles read off the upper convex hull of (k, log|c_k|)."""
    n = len(logc) - 1
    hull = []
    for k in range(n + 1):
        if not np.isfinite(logc[k]):
            continue
        while len(hull) >= 2:
            k1, k2 = hull[-2], hull[-1]
            if (logc[k2] - logc[k1]) * (k - k1) <= (logc[k] - logc[k1]) * (k2 - k1):
                hull.pop()
            else:
                break
        hull.append(k)
    guess = np.empty(n, dtype=complex)
    pos = 0
    for k1, k2 in zip(hull[:-1], hull[1:]):
        cnt = k2 - k1
        radius = math.exp((logc[k1] - logc[k2]) / cnt)
        ang = 2 * math.pi * np.arange(cnt) / cnt + 2 * math.pi * k1 / n + rng_phase
        guess[pos:pos + cnt] = radius * np.exp(1j * ang)
        pos += cnt
    if hull[0] > 0:
        # exact zero coefficients at the bottom mean roots at the origin
        guess[pos:] = 0.0
    return guess


def _horner_pair(c, x, n):
    """p(x) and p'(x) for coefficient rows c (batch, n+1), plus sum |c_k||x|^k."""
    p = np.broadcast_to(c[:, n:n + 1], x.shape).astype(complex)
    dp = np.zeros_like(p)
    ax = np.abs(x)
    mag = np.broadcast_to(np.abs(c[:, n:n + 1]), x.shape).astype(float)
    for j in range(n - 1, -1, -1):
        dp = dp * x + p
        p = p * x + c[:, j:j + 1]
        mag = mag * ax + np.abs(c[:, j:j + 1])
    return p, dp, mag


def _newton_ratio(c, crev, z, n):
    """p(z)/p'(z) and the relative residual |p(z)| / sum |c_k||z|^k."""
    big = np.abs(z) > 1
    w = np.where(big, 1.0 / np.where(big, z, 1.0), z)
    p, dp, mag = _horner_pair(c, w, n)
    q, dq, qmag = _horner_pair(crev, w, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio_small = p / dp
        ratio_big = z * q / (n * q - w * dq)
        ratio = np.where(big, ratio_big, ratio_small)
        resid = np.where(big, np.abs(q) / qmag, np.abs(p) / mag)
    return ratio, resid


def find_roots_batch(log_mag, phase, max_sweeps=512, tol=1e-13):
    """Aberth-Ehrlich iteration on a batch of polynomials of equal degree.

    Returns roots (batch, n), per-polynomial convergence flags, backward
    errors and the number of sweeps.
    """
    log_mag = np.atleast_2d(np.asarray(log_mag, dtype=float))
    phase = np.atleast_2d(np.asarray(phase, dtype=float))
    batch, n1 = log_mag.shape
    n = n1 - 1
    if n < 1:
        raise ValueError("degree must be at least 1")
    if np.any(~np.isfinite(log_mag[:, n])):
        raise ValueError("leading coefficient must be nonzero")
    c, _ = _scaled_coefficients(log_mag, phase)
    crev = c[:, ::-1].copy()
    z = np.stack([_newton_polygon_guess(row) for row in log_mag])
    active = np.ones(z.shape, dtype=bool)
    bound = 4.0 * n * _EPS
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        rows = np.nonzero(active.any(axis=1))[0]
        if rows.size == 0:
            sweeps -= 1
            break
        zr = z[rows]
        ratio, resid = _newton_ratio(c[rows], crev[rows], zr, n)
        diff = zr[:, :, None] - zr[:, None, :]
        idx = np.arange(n)
        diff[:, idx, idx] = np.inf
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.sum(1.0 / diff, axis=2)
            corr = ratio / (1.0 - ratio * s)
        corr = np.where(np.isfinite(corr), corr, 0.0)
        act = active[rows]
        small = np.abs(corr) <= tol * np.maximum(np.abs(zr), 1e-300)
        at_noise = resid <= bound
        zr = np.where(act & ~at_noise, zr - corr, zr)
        z[rows] = zr
        active[rows] = act & ~(small | at_noise)
    _, resid = _newton_ratio(c, crev, z, n)
    backward = np.max(resid, axis=1)
    converged = ~active.any(axis=1) & (backward <= 1e-10)
    return z, converged, backward, sweeps


def _merge(roots):
    """Group roots closer than 1e-8 (1 + |z|) into distinct values with multiplicity."""
    order = np.argsort(roots.real)
    r = roots[order]
    used = np.zeros(r.size, dtype=bool)
    distinct, mult = [], []
    for i in range(r.size):
        if used[i]:
            continue
        tol = 1e-8 * (1 + abs(r[i]))
        close = (~used) & (np.abs(r - r[i]) <= tol)
        used |= close
        distinct.append(r[close].mean())
        mult.append(int(close.sum()))
    return np.array(distinct, dtype=complex), np.array(mult, dtype=int)


def find_roots(p: PolynomialSample, max_sweeps=512) -> RootSet:
    """All roots of ``p`` by Aberth-Ehrlich iteration with a residual report."""
    if p.degree < 1:
        raise ValueError("degree must be at least 1")
    z, conv, back, sweeps = find_roots_batch(p.log_mag, p.phase, max_sweeps=max_sweeps)
    roots = z[0]
    distinct, mult = _merge(roots)
    return RootSet(roots, float(back[0]), bool(conv[0]), sweeps, distinct, mult)


def split_by_region(points: PointConfiguration, region) -> PointConfiguration:
    """Keep the points in an open region: ("disk", R), ("complement", R) or ("annulus", a, b).

    The complement of the closed disk of radius R is used for "complement".
    """
    kind = region[0]
    r = np.abs(points.points)
    if kind == "disk":
        keep = r < region[1]
    elif kind == "complement":
        keep = r > region[1]
    elif kind == "annulus":
        keep = (r > region[1]) & (r < region[2])
    else:
        raise ValueError(f"unknown region {kind!r}")
    return PointConfiguration(points.points[keep], points.provenance)
