"""Limiting objects: Bergman kernels, infinite-product CDFs, bulk kernels,
Mittag-Leffler random series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _quad
from .dpp import KernelSeries, PointConfiguration
from .errors import QuadratureError, TruncationError
from .polynomials import CoefficientLaw, PolynomialSample, _draw_nonzero, find_roots_batch
from .special import log_gamma_q

LOG_UNDERFLOW = -745.0



def _as_output(out):
    out = np.asarray(out, dtype=float)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------- Bergman kernels

def _check_region(R, region, z, w):
    if not R > 0:
        raise ValueError("R must be positive")
    for x in (z, w):
        a = np.abs(x)
        if region == "inside" and np.any(a >= R):
            raise ValueError("points must lie in the open disk of radius R")
        if region == "outside" and np.any(a <= R):
            raise ValueError("points must lie outside the closed disk of radius R")
    if region not in ("inside", "outside"):
        raise ValueError("region must be 'inside' or 'outside'")


def bergman_kernel_eval(R, region, z, w):
    """Bergman kernel of the disk of radius R or of the complement of its closure.

    Inside: R^2 / (pi (R^2 - z conj w)^2). Outside the kernel is the pullback
    of the inner one under z -> R^2 / z, which gives R^2 / (pi (z conj w - R^2)^2).
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    _check_region(R, region, z, w)
    zw = z * np.conj(w)
    R2 = float(R) ** 2
    if region == "inside":
        return R2 / (math.pi * (R2 - zw) ** 2)
    return R2 / (math.pi * (zw - R2) ** 2)


def bergman_series(R=1.0, region="inside", K=400) -> KernelSeries:
    """Truncated power series of the Bergman kernel (terms k = 0..K)."""
    k = np.arange(K + 1, dtype=float)
    if region == "inside":
        logs = np.log((k + 1) / math.pi) - (2 * k + 2) * math.log(R)
        return KernelSeries(logs, lambda r: np.zeros(np.shape(r)))
    logs = np.log((k + 1) / math.pi) + (2 * k + 2) * math.log(R)
    return KernelSeries(logs, lambda r: np.zeros(np.shape(r)), powers=-(k + 2))


# ---------------------------------------------------------------- product CDFs

@dataclass(frozen=True)
class ProductCDF:
    """F(t) = prod_{k>=1} factor(k, t), truncated with a certified tail bound.

    ``log_factor(k, t)`` returns log factor_k(t) for integer arrays k;
    ``tail_bound(K, t)`` bounds sum_{k>K} -log factor_k(t).
    """

    log_factor: Callable
    tail_bound: Callable
    tol: float = 1e-13
    chunk: int = 32
    max_terms: int = 10_000_000

    def log_cdf(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        flat = t.ravel()
        total = np.zeros(flat.shape)
        active = np.ones(flat.shape, dtype=bool)
        K = 0
        while np.any(active) and K < self.max_terms:
            idx = np.nonzero(active)[0]
            k = np.arange(K + 1, K + self.chunk + 1)
            lf = self.log_factor(k[None, :], flat[idx, None])
            total[idx] += np.sum(lf, axis=1)
            K += self.chunk
            with np.errstate(over="ignore", invalid="ignore"):
                tail = self.tail_bound(K, flat[idx])
            done = (tail < self.tol) | (total[idx] < LOG_UNDERFLOW)
            active[idx[done]] = False
        if np.any(active):
            raise TruncationError("product did not reach its tail tolerance")
        total = np.where(total < LOG_UNDERFLOW, -np.inf, total)
        return total.reshape(t.shape)

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.exp(self.log_cdf(t_arr))
        return out.reshape(t_arr.shape) if t_arr.ndim else float(out.ravel()[0])


def geometric_tail_bound(K, q):
    """Bound on sum_{k>K} -log(1 - q^k), using -log(1 - x) <= x / (1 - x)."""
    with np.errstate(divide="ignore"):
        qk = np.power(q, K + 1)
        return qk / ((1 - q) * (1 - qk))


def _geometric_product(q):
    """log prod_{k>=1} (1 - q^k) for q in [0, 1), with its tail bound."""

    def log_factor(k, qq):
        with np.errstate(divide="ignore"):
            return np.log1p(-np.power(qq, k))

    return ProductCDF(log_factor, geometric_tail_bound)(q)


def max_modulus_cdf_outside(R, t):
    """prod_{k>=1} (1 - (t/R)^{-2k}) for t > R, 0 otherwise."""
    t = np.asarray(t, dtype=float)
    if not R > 0:
        raise ValueError("R must be positive")
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    inside = t <= R
    q = np.where(inside, 0.0, (R / np.where(inside, 1.0, t)) ** 2)
    out = np.where(inside, 0.0, _geometric_product(q))
    return _as_output(out)


def min_modulus_cdf_disk(R, t):
    """1 - prod_{k>=1} (1 - (t/R)^{2k}) for t in [0, R)."""
    t = np.asarray(t, dtype=float)
    if not R > 0:
        raise ValueError("R must be positive")
    if np.any((t < 0) | (t >= R)):
        raise ValueError("t must lie in [0, R)")
    out = 1.0 - _geometric_product((t / R) ** 2)
    return _as_output(out)


def _gamma_tail(s_of_k, x, K):
    # sum_{k>K} -log(1 - P(s_k, x)) with P(s, x) <= x^s e^-x / (Gamma(s+1)(1 - x/(s+1))).
    # The bound B(s_k) has ratios decreasing in k once s > x, so a geometric tail applies.
    s1 = s_of_k(K + 1)
    s2 = s_of_k(K + 2)
    x = np.asarray(x, dtype=float)
    lgam = np.vectorize(math.lgamma, otypes=[float])
    with np.errstate(divide="ignore", invalid="ignore"):
        lb1 = s1 * np.log(x) - x - lgam(s1 + 1) - np.log1p(-x / (s1 + 1))
        lb2 = s2 * np.log(x) - x - lgam(s2 + 1) - np.log1p(-x / (s2 + 1))
        rho = np.exp(lb2 - lb1)
        b1 = np.exp(lb1)
        bound = 2.0 * b1 / (1.0 - rho)
    ok = (s1 > x + 1) & (rho < 1) & (b1 < 0.5)
    bound = np.where(x == 0, 0.0, bound)
    return np.where(ok | (x == 0), bound, np.inf)


def bulk_max_cdf(alpha, lam, t):
    """Limit CDF of n^{-1/alpha} max |x_k| for a measure with tail exponent (alpha, lam).

    prod_{k>=1} Gamma(2k/alpha, x) / Gamma(2k/alpha) at x = 2 lam / (alpha t^alpha).
    """
    if not (alpha > 0 and lam > 0):
        raise ValueError("alpha and lambda must be positive")
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    x = 2.0 * lam / (alpha * t ** alpha)

    def s_of_k(k):
        return 2.0 * np.asarray(k, dtype=float) / alpha

    def log_factor(k, xx):
        return log_gamma_q(s_of_k(k), np.broadcast_to(xx, np.broadcast_shapes(np.shape(k), np.shape(xx))))

    cdf = ProductCDF(log_factor, lambda K, xx: _gamma_tail(s_of_k, xx, K), chunk=8)
    return _as_output(cdf(x))


def bulk_min_cdf(alpha, lam, t):
    """Limit CDF of n^{1/alpha} min |x_k| for a measure with origin exponent (alpha, lam).

    1 - prod_{k>=1} Gamma(2k/alpha, y) / Gamma(2k/alpha) at y = 2 lam t^alpha / alpha.
    """
    if not (alpha > 0 and lam > 0):
        raise ValueError("alpha and lambda must be positive")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    tt = np.where(t > 0, t, 1.0)
    out = np.where(t > 0, 1.0 - bulk_max_cdf(alpha, lam, 1.0 / tt), 0.0)
    return _as_output(out)


# ---------------------------------------------------------------- bulk kernels

def bulk_log_coefficient(alpha, lam, k):
    """log b_k with 1/b_k = 2 pi int r^(2k+1) exp(-2 gamma r^alpha) dr, gamma = lam/alpha."""
    gamma = lam / alpha
    k = np.asarray(k, dtype=float)
    s = (2 * k + 2) / alpha
    lg = np.vectorize(math.lgamma, otypes=[float])(s)
    return -(math.log(2 * math.pi / alpha) - s * math.log(2 * gamma) + lg)


def _bulk_coefficient_by_quadrature(alpha, lam, k):
    gamma = lam / alpha

    def logf(u):
        return (2 * k + 2) * u - 2 * gamma * np.exp(alpha * u)

    panels = _quad.log_integrate(logf, -np.inf, np.inf, rtol=1e-14)
    return -(math.log(2 * math.pi) + panels.log_total)


class BulkLimitKernel:
    """Limit kernel of the rescaled gas at the origin or at infinity.

    origin:   sum_k b_k (z conj w)^k exp(-gamma |z|^alpha - gamma |w|^alpha)
    infinity: sum_k b_k (z conj w)^{-(k+2)} exp(-gamma |z|^-alpha - gamma |w|^-alpha)

    The series is summed in log form up to the index where terms have fallen
    below 1e-20 of the largest one, so it is accurate on any bounded set.
    """

    def __init__(self, alpha, lam, region="origin", check_terms=(0, 1, 2, 5, 10, 40)):
        if not (alpha > 0 and lam > 0):
            raise ValueError("alpha and lambda must be positive")
        if region not in ("origin", "infinity"):
            raise ValueError("region must be 'origin' or 'infinity'")
        self.alpha = float(alpha)
        self.lam = float(lam)
        self.gamma = self.lam / self.alpha
        self.region = region
        for k in check_terms:
            closed = float(bulk_log_coefficient(alpha, lam, k))
            quad = _bulk_coefficient_by_quadrature(self.alpha, self.lam, k)
            if abs(math.expm1(closed - quad)) > 1e-8:
                raise QuadratureError(f"closed form for b_{k} disagrees with quadrature", achieved=abs(closed - quad))

    def log_coefficients(self, K):
        return bulk_log_coefficient(self.alpha, self.lam, np.arange(K + 1))

    def coefficients(self, K):
        return np.exp(self.log_coefficients(K))

    def _truncation(self, log_abs_zw):
        # terms b_k e^{k L}: log b_k ~ -(2k/alpha) log k, so a finite K suffices
        L = float(np.max(log_abs_zw)) if np.size(log_abs_zw) else 0.0
        K = 64
        while True:
            lt = self.log_coefficients(K) + np.arange(K + 1) * L
            peak = int(np.argmax(lt))
            if peak < K and lt[-1] < lt[peak] - 46.0:
                return K
            K *= 2

    def series(self, K) -> KernelSeries:
        logs = self.log_coefficients(K)
        g, a = self.gamma, self.alpha
        if self.region == "origin":
            return KernelSeries(logs, lambda r: -g * np.asarray(r, dtype=float) ** a)
        with np.errstate(divide="ignore"):
            return KernelSeries(logs, lambda r: -g * np.asarray(r, dtype=float) ** (-a), powers=-(np.arange(K + 1) + 2.0))

    def __call__(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        with np.errstate(divide="ignore"):
            lzw = np.log(np.abs(z)) + np.log(np.abs(w))
        if self.region == "infinity":
            lzw = -lzw
        lzw = lzw[np.isfinite(lzw)]
        K = self._truncation(lzw)
        return self.series(K)(z, w)


def bulk_limit_kernel(alpha, lam, region="origin") -> BulkLimitKernel:
    return BulkLimitKernel(alpha, lam, region)


# ---------------------------------------------------------------- Mittag-Leffler series

def ml_log_scale(alpha, lam, k):
    """log sigma_k = (k/alpha) log(lam/alpha) - lgamma(1 + 2k/alpha) / 2."""
    k = np.asarray(k, dtype=float)
    lg = np.vectorize(math.lgamma, otypes=[float])(1.0 + 2.0 * k / alpha)
    return (k / alpha) * math.log(lam / alpha) - 0.5 * lg


def ml_parameter_for_origin_exponent(alpha, lam):
    """Parameter of the Mittag-Leffler series describing the zeros near 0.

    For a background measure with nu(D_r) ~ lam r^alpha, the rescaled
    orthonormal coefficients n^{k/alpha} / sqrt(h_k) converge to
    (2 lam / alpha)^{k/alpha} / Gamma(1 + 2k/alpha)^{1/2} up to a common
    factor, i.e. to the series with parameters (alpha, 2 lam).
    """
    return float(alpha), 2.0 * float(lam)


@dataclass(frozen=True)
class MittagLefflerFn:
    """Truncation of sum_k a_k sigma_k z^k, sigma_k = (lam/alpha)^{k/alpha} / Gamma(1+2k/alpha)^{1/2}."""

    alpha: float
    lam: float
    coefficients: np.ndarray
    radius: float
    tail_bound: float

    @property
    def truncation(self):
        return len(self.coefficients) - 1

    def log_scales(self):
        return ml_log_scale(self.alpha, self.lam, np.arange(self.truncation + 1))

    def polynomial(self) -> PolynomialSample:
        a = self.coefficients
        return PolynomialSample(np.log(np.abs(a)) + self.log_scales(), np.angle(a), "mittag_leffler")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        c = np.exp(self.log_scales()) * self.coefficients
        return np.polynomial.polynomial.polyval(z, c)

    def zeros(self, radius=None):
        """Zeros of the truncation in the closed disk of the given radius."""
        rho = self.radius if radius is None else radius
        p = self.polynomial()
        z, conv, back, _ = find_roots_batch(p.log_mag, p.phase)
        roots = z[0]
        return PointConfiguration(roots[np.abs(roots) <= rho], "mittag_leffler")


def ml_truncation(alpha, lam, rho, amax=1.0, tol=1e-12, start=8):
    """Smallest K with sum_{k>K} sigma_k rho^k (1 + amax) < tol * max_k sigma_k rho^k."""
    K = start
    while True:
        k = np.arange(4 * K + 200)
        lt = ml_log_scale(alpha, lam, k) + k * math.log(rho)
        peak = np.max(lt[: K + 1])
        tail = np.logaddexp.reduce(lt[K + 1:]) + math.log1p(amax)
        # terms beyond the table decay faster than geometrically; the last one bounds them
        if lt[-1] < lt[-2] and tail < math.log(tol) + peak and lt[-1] < peak - 80:
            return K
        K = int(K * 1.25) + 4


def mittag_leffler(alpha, lam, law: CoefficientLaw, rng, rho, tol=1e-12, extra=0) -> MittagLefflerFn:
    """Random series truncated so the omitted tail is below ``tol`` relative on |z| <= rho.

    Coefficients are drawn in index order, so a truncation with ``extra``
    more terms shares its first coefficients with the shorter one.
    """
    if not (alpha > 0 and lam > 0 and rho > 0):
        raise ValueError("alpha, lambda and rho must be positive")
    K0 = ml_truncation(alpha, lam, rho, amax=1.0, tol=tol)
    # the bound must hold for the realized coefficients; grow K until it does
    a = _draw_nonzero(law, rng, K0 + 1)
    K = K0
    while True:
        amax = float(np.max(np.abs(a)))
        need = ml_truncation(alpha, lam, rho, amax=amax, tol=tol, start=K)
        if need <= K:
            break
        a = np.concatenate([a, _draw_nonzero(law, rng, need - K)])
        K = need
    if extra:
        a = np.concatenate([a, _draw_nonzero(law, rng, extra)])
    k = np.arange(len(a), len(a) + 400)
    lt = ml_log_scale(alpha, lam, k) + k * math.log(rho)
    tail = math.exp(np.logaddexp.reduce(lt)) * (1 + float(np.max(np.abs(a))))
    return MittagLefflerFn(float(alpha), float(lam), a, float(rho), tail)


# ---------------------------------------------------------------- Bergman samplers

def sample_bergman_norms(R, region, k_max, rng):
    """Moduli {R U_k^{1/(2k)}} (inside) or {R U_k^{-1/(2k)}} (outside), k = 1..k_max."""
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if region not in ("inside", "outside"):
        raise ValueError("region must be 'inside' or 'outside'")
    k = np.arange(1, k_max + 1)
    u = rng.random(k_max)
    sign = 1.0 if region == "inside" else -1.0
    return R * np.exp(sign * np.log(u) / (2 * k))


def bergman_truncation(rho, amax, tol=1e-12):
    """K with sum_{k>K} amax rho^k < tol, the tail of a series with |a_k| <= amax."""
    if not 0 < rho < 1:
        raise ValueError("window radius must lie in (0, 1)")
    K = math.log(tol * (1 - rho) / max(amax, 1e-300)) / math.log(rho)
    return max(1, int(math.ceil(K)))


def sample_bergman_disk(rng, K, rho, tol=1e-10) -> PointConfiguration:
    """Zeros in |z| <= rho of sum_{k<=K} a_k z^k with standard complex Gaussian a_k.

    The truncation is accepted when amax rho^(K+1) / (1 - rho) < tol, where
    amax is the largest drawn modulus, floored at 6 (the omitted Gaussian
    coefficients exceed 6 in modulus with probability e^-36 each).
    """
    if not 0 <= rho < 1:
        raise ValueError("window radius must lie in [0, 1)")
    law = CoefficientLaw("complex_gaussian")
    a = _draw_nonzero(law, rng, K + 1)
    if rho > 0:
        amax = max(float(np.max(np.abs(a))), 6.0)
        tail = amax * rho ** (K + 1) / (1 - rho)
        if tail > tol:
            raise TruncationError(f"truncation K={K} leaves a tail bound {tail:.3g} on |z| <= {rho}")
    p = PolynomialSample(np.log(np.abs(a)), np.angle(a), "bergman")
    z, conv, back, _ = find_roots_batch(p.log_mag, p.phase)
    roots = z[0]
    return PointConfiguration(roots[np.abs(roots) <= rho], "bergman")
