"""Empirical CDFs, Kolmogorov-Smirnov distances, kernel diagnostics and
seeded Monte Carlo campaigns of extremal moduli.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dpp import jellium
from .measures import RadialMeasure
from .polynomials import CoefficientLaw, basis_norms, find_roots_batch, _draw_nonzero, weyl_log_scale

DKW_95 = 1.36


@dataclass(frozen=True)
class EmpiricalCDF:
    """Right-continuous empirical distribution function.

    ``raw`` keeps the values in replica order, ``values`` sorted.
    """

    values: np.ndarray
    raw: Optional[np.ndarray] = None

    @classmethod
    def from_samples(cls, samples):
        raw = np.asarray(samples, dtype=float).ravel()
        return cls(np.sort(raw), raw)

    @property
    def count(self):
        return int(self.values.size)

    def __call__(self, t):
        return np.searchsorted(self.values, np.asarray(t, dtype=float), side="right") / self.count

    def quantile(self, p):
        return np.quantile(self.values, p)


@dataclass(frozen=True)
class KSResult:
    distance: float
    n: int

    @property
    def band(self):
        """DKW 95% band 1.36 / sqrt(N)."""
        return DKW_95 / math.sqrt(self.n)

    def passes(self, threshold=None):
        return self.distance <= (self.band if threshold is None else threshold)

    def to_dict(self, threshold=None):
        thr = self.band if threshold is None else threshold
        return {"distance": self.distance, "N": self.n, "band": self.band, "threshold": thr, "pass": bool(self.distance <= thr)}


def ks_distance(samples, cdf) -> KSResult:
    """sup_t |F_emp(t) - F(t)| by the order-statistics formula."""
    x = np.sort(np.asarray(getattr(samples, "values", samples), dtype=float).ravel())
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    F = np.clip(np.asarray(cdf(x), dtype=float), 0.0, 1.0)
    i = np.arange(1, n + 1)
    d = max(np.max(i / n - F), np.max(F - (i - 1) / n))
    return KSResult(float(d), int(n))


@dataclass(frozen=True)
class KernelDiff:
    sup_abs: float
    sup_rel: float
    reference_max: float
    points: int


def kernel_grid(radius=0.7, side=41, random_pairs=200, seed=0):
    """(z, w) pairs: a side x side tensor grid of real z, w plus random pairs in the disk."""
    x = np.linspace(-radius, radius, side)
    zr, wr = np.meshgrid(x, x, indexing="ij")
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.random((2, random_pairs)))
    th = 2 * math.pi * rng.random((2, random_pairs))
    pts = r * np.exp(1j * th)
    z = np.concatenate([zr.ravel().astype(complex), pts[0]])
    w = np.concatenate([wr.ravel().astype(complex), pts[1]])
    return z, w


def kernel_sup_diff(K1, K2, grid=None) -> KernelDiff:
    """Max |K1 - K2| over the grid, and max relative difference where |K2| > 1e-6."""
    z, w = kernel_grid() if grid is None else grid
    a = np.asarray(K1(z, w))
    b = np.asarray(K2(z, w))
    diff = np.abs(a - b)
    big = np.abs(b) > 1e-6
    rel = float(np.max(diff[big] / np.abs(b[big]))) if np.any(big) else 0.0
    return KernelDiff(float(np.max(diff)), rel, float(np.max(np.abs(b))), int(diff.size))


# ---------------------------------------------------------------- campaigns

@dataclass(frozen=True)
class Model:
    """Model for a campaign: kind in {jellium, poly_zeros, weyl}."""

    kind: str
    n: int
    measure: Optional[RadialMeasure] = None
    law: CoefficientLaw = CoefficientLaw()

    def __post_init__(self):
        if self.kind not in ("jellium", "poly_zeros", "weyl"):
            raise ValueError(f"unknown model {self.kind!r}")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.kind in ("jellium", "poly_zeros") and self.measure is None:
            raise ValueError(f"{self.kind} needs a background measure")


STATISTICS = ("max_mod", "min_mod", "inverse_max")


def replica_rng(seed, j):
    """Stream of replica j: independent of scheduling and of the other replicas."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(j,)))


def default_threads():
    try:
        return max(1, int(os.environ.get("JELLIUM_THREADS", "1")))
    except ValueError:
        return 1


def _moduli_batch(model: Model, seeds, seed, norms):
    """Moduli of the configurations of the given replica indices, shape (len, n)."""
    n = model.n
    if model.kind == "jellium":
        u = np.empty((len(seeds), n))
        for i, j in enumerate(seeds):
            rng = replica_rng(seed, j)
            u[i] = rng.random(n)
            rng.random(n)  # angles, drawn as in a full sample
        return jellium(model.measure, n).radii_from_uniforms(u)
    logm = np.empty((len(seeds), n + 1))
    ph = np.empty((len(seeds), n + 1))
    for i, j in enumerate(seeds):
        a = _draw_nonzero(model.law, replica_rng(seed, j), n + 1)
        logm[i] = np.log(np.abs(a)) + norms
        ph[i] = np.angle(a)
    z, conv, back, _ = find_roots_batch(logm, ph)
    if not np.all(conv):
        bad = [seeds[i] for i in np.nonzero(~conv)[0]]
        raise RuntimeError(f"root finding did not converge for replicas {bad}")
    return np.abs(z)


def campaign_moduli(model: Model, replicas: int, seed: int, threads=None, chunk=None):
    """All moduli of every replica, array (replicas, n)."""
    if replicas < 1:
        raise ValueError("replicas must be at least 1")
    norms = None
    if model.kind == "poly_zeros":
        norms = basis_norms(model.measure, model.n).log_coefficient_scale()
    elif model.kind == "weyl":
        norms = weyl_log_scale(model.n)
    if chunk is None:
        chunk = 256 if model.kind == "jellium" else max(4, 8192 // model.n)
    blocks = [list(range(s, min(s + chunk, replicas))) for s in range(0, replicas, chunk)]
    threads = default_threads() if threads is None else threads
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _moduli_batch(model, b, seed, norms), blocks))
    else:
        parts = [_moduli_batch(model, b, seed, norms) for b in blocks]
    return np.concatenate(parts, axis=0)


def extremal_campaign(model: Model, statistic: str, replicas: int, seed: int, threads=None) -> EmpiricalCDF:
    """Empirical law of an extremal modulus over seeded replicas."""
    if statistic not in STATISTICS:
        raise ValueError(f"statistic must be one of {STATISTICS}")
    mods = campaign_moduli(model, replicas, seed, threads)
    if statistic == "max_mod":
        vals = mods.max(axis=1)
    elif statistic == "min_mod":
        vals = mods.min(axis=1)
    else:
        vals = 1.0 / mods.max(axis=1)
    return EmpiricalCDF.from_samples(vals)
