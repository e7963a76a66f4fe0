"""Deterministic SVG figures (no timestamps, fixed element ids)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

HIST_BINS = 40
CURVE_POINTS = 400


def _save(fig, path):
    with matplotlib.rc_context({"svg.hashsalt": "jellium", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def scatter_svg(points, path, title=None, unit_circle=True):
    """Complex points as markers in the plane."""
    pts = np.asarray(points, dtype=complex).ravel()
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(pts.real, pts.imag, linestyle="none", marker="o", markersize=3, color="tab:blue", gid="points")
    if unit_circle:
        th = np.linspace(0, 2 * np.pi, 361)
        ax.plot(np.cos(th), np.sin(th), color="0.6", linewidth=0.8)
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    _save(fig, path)


def histogram_svg(samples, path, density=None, bins=HIST_BINS, curve_points=CURVE_POINTS, title=None, xlabel=None):
    """Normalized histogram with an optional reference density drawn on top."""
    x = np.asarray(samples, dtype=float).ravel()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(x, bins=bins, density=True, color="tab:blue", alpha=0.6)
    if density is not None:
        lo, hi = float(np.min(x)), float(np.max(x))
        t = np.linspace(lo, hi, curve_points)
        ax.plot(t, density(t), color="tab:red", linewidth=1.5)
    if title:
        ax.set_title(title)
    if xlabel:
        ax.set_xlabel(xlabel)
    _save(fig, path)


def cdf_svg(samples, path, cdf=None, curve_points=CURVE_POINTS, title=None):
    """Empirical CDF step plot against a reference CDF."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.step(x, np.arange(1, x.size + 1) / x.size, where="post", color="tab:blue")
    if cdf is not None:
        t = np.linspace(x[0], x[-1], curve_points)
        ax.plot(t, cdf(t), color="tab:red")
    if title:
        ax.set_title(title)
    _save(fig, path)


def series_svg(x, ys, path, labels=None, threshold=None, logy=False, title=None):
    """Line plot of one or several series, with an optional horizontal threshold."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for i, y in enumerate(ys):
        ax.plot(x, y, marker="o", label=None if labels is None else labels[i])
    if threshold is not None:
        ax.axhline(threshold, color="tab:red", linestyle="--")
    if logy:
        ax.set_yscale("log")
    if labels is not None:
        ax.legend()
    if title:
        ax.set_title(title)
    _save(fig, path)


def density_from_cdf(cdf, h=1e-5):
    """Central-difference density of a CDF, for overlays."""
    def dens(t):
        t = np.asarray(t, dtype=float)
        return (np.asarray(cdf(t + h)) - np.asarray(cdf(np.maximum(t - h, 1e-300)))) / (2 * h)
    return dens
