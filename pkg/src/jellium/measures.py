"""Rotationally invariant probability measures and their logarithmic potentials.

A measure is described by its radial mass function ``r -> nu(D_r)`` on open
disks, an explicit atom list and an optional radial density. The potential is
normalised so that it vanishes on the unit circle::

    V(r) = int_1^r nu(D_s) / s ds

and is tabulated once, at construction, by adaptive Gauss-Legendre quadrature
in the variable ``u = log r`` (so ``V(e^u) = int_0^u nu(D_{e^t}) dt``).
"""
from __future__ import annotations

import functools
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _quad
from .errors import QuadratureError

Exponent = Optional[tuple]

# the potential is tabulated on u = log r in [-U_RANGE, U_RANGE]
U_RANGE = 64.0


@dataclass(frozen=True, eq=False)
class RadialMeasure:
    """A rotationally invariant probability measure on the plane.

    ``mass_in_disk(r)`` is nu(D_r) for the open disk D_r, so an atom on the
    circle of radius r only counts for radii strictly larger than r.
    ``density`` is the density of the absolutely continuous part of the
    radial law, with respect to dr.
    """

    mass_in_disk: Callable
    atoms: tuple = ()
    density: Optional[Callable] = None
    support_inner: float = 0.0
    support_outer: float = math.inf
    origin_exponent: Exponent = None
    tail_exponent: Exponent = None
    breakpoints: tuple = ()
    description: dict = field(default_factory=dict)

    def __post_init__(self):
        for r, w in self.atoms:
            if not (r > 0 and w > 0):
                raise ValueError(f"atoms need positive radius and weight, got ({r}, {w})")

    @property
    def key(self):
        return json.dumps(self.description, sort_keys=True)

    def mass_in_closed_disk(self, r):
        r = np.asarray(r, dtype=float)
        out = np.asarray(self.mass_in_disk(r), dtype=float)
        for ra, w in self.atoms:
            out = out + w * (r == ra)
        return out

    def log_density_u(self, u):
        """log of f(e^u) e^u, the density of log|z| (without atoms)."""
        if self.density is None:
            return np.full(np.shape(u), -np.inf)
        r = np.exp(u)
        with np.errstate(divide="ignore"):
            return np.log(self.density(r)) + u

    def kinks_u(self):
        """Points (in log-radius) where the mass function is not smooth."""
        pts = [math.log(r) for r, _ in self.atoms]
        for r in (self.support_inner, self.support_outer, *self.breakpoints):
            if 0 < r < math.inf:
                pts.append(math.log(r))
        return sorted(set(pts))

    def log_moment(self):
        """int |log r| dmu(r); finite exactly when the measure has a finite potential."""
        total = sum(w * abs(math.log(r)) for r, w in self.atoms)
        if self.density is None:
            return total
        lo = math.log(self.support_inner) if self.support_inner > 0 else -np.inf
        hi = math.log(self.support_outer) if self.support_outer < math.inf else np.inf

        def logf(u):
            with np.errstate(divide="ignore"):
                return np.log(np.abs(u)) + self.log_density_u(u)

        panels = _quad.log_integrate(logf, lo, hi, breaks=self.kinks_u() + [0.0], rtol=1e-12)
        return total + math.exp(panels.log_total)

    def to_dict(self):
        return dict(self.description)

    def to_json(self):
        return json.dumps(self.description, sort_keys=True)


def _positive(**params):
    for name, value in params.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise ValueError(f"parameter {name} must be a positive real, got {value!r}")


def circle(R=1.0):
    _positive(R=R)
    R = float(R)
    return RadialMeasure(
        mass_in_disk=lambda r: (np.asarray(r, dtype=float) > R).astype(float),
        atoms=((R, 1.0),),
        support_inner=R,
        support_outer=R,
        description={"name": "circle", "params": {"R": R}},
    )


def uniform_disk(R=1.0):
    _positive(R=R)
    R = float(R)

    def density(r):
        r = np.asarray(r, dtype=float)
        return np.where(r < R, 2.0 * r / R**2, 0.0)

    return RadialMeasure(
        mass_in_disk=lambda r: np.minimum((np.asarray(r, dtype=float) / R) ** 2, 1.0),
        density=density,
        support_inner=0.0,
        support_outer=R,
        origin_exponent=(2.0, 1.0 / R**2),
        description={"name": "uniform_disk", "params": {"R": R}},
    )


def fubini_study():
    def mass(r):
        r2 = np.asarray(r, dtype=float) ** 2
        with np.errstate(invalid="ignore"):
            return np.where(np.isinf(r2), 1.0, r2 / (1.0 + r2))

    def density(r):
        r = np.asarray(r, dtype=float)
        return 2.0 * r / (1.0 + r * r) ** 2

    return RadialMeasure(
        mass_in_disk=mass,
        density=density,
        origin_exponent=(2.0, 1.0),
        tail_exponent=(2.0, 1.0),
        description={"name": "fubini_study", "params": {}},
    )


def pareto_tail(alpha, lam):
    """Pure power tail: nu(D_r) = 1 - lam r^-alpha beyond r0 = lam^(1/alpha)."""
    _positive(alpha=alpha, lam=lam)
    alpha, lam = float(alpha), float(lam)
    r0 = lam ** (1.0 / alpha)

    def mass(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(r > r0, 1.0 - lam * r ** (-alpha), 0.0)

    def density(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(r > r0, alpha * lam * r ** (-alpha - 1.0), 0.0)

    return RadialMeasure(
        mass_in_disk=mass,
        density=density,
        support_inner=r0,
        tail_exponent=(alpha, lam),
        description={"name": "pareto_tail", "params": {"alpha": alpha, "lam": lam}},
    )


def power_origin(alpha, lam):
    """nu(D_r) = min(1, lam r^alpha), supported on the disk of radius lam^(-1/alpha)."""
    _positive(alpha=alpha, lam=lam)
    alpha, lam = float(alpha), float(lam)
    r1 = lam ** (-1.0 / alpha)

    def density(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(r < r1, alpha * lam * r ** (alpha - 1.0), 0.0)

    return RadialMeasure(
        mass_in_disk=lambda r: np.minimum(lam * np.asarray(r, dtype=float) ** alpha, 1.0),
        density=density,
        support_outer=r1,
        origin_exponent=(alpha, lam),
        description={"name": "power_origin", "params": {"alpha": alpha, "lam": lam}},
    )


BUILTINS = {
    "circle": circle,
    "uniform_disk": uniform_disk,
    "fubini_study": fubini_study,
    "pareto_tail": pareto_tail,
    "power_origin": power_origin,
}


def builtin_measure(name, **params):
    """Construct one of the named measures and check its log-moment is finite."""
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown measure {name!r}; expected one of {sorted(BUILTINS)}") from None
    m = factory(**params)
    if not math.isfinite(m.log_moment()):
        raise ValueError(f"{name} with {params} has an infinite logarithmic moment")
    return m


def tabulated(atoms=(), density_table=()):
    """Measure from an atom list and a piecewise-linear radial density table."""
    atoms = tuple((float(r), float(w)) for r, w in atoms)
    table = np.asarray(density_table, dtype=float).reshape(-1, 2)
    if table.size and (np.any(np.diff(table[:, 0]) <= 0) or table[0, 0] < 0 or np.any(table[:, 1] < 0)):
        raise ValueError("density_table needs increasing nonnegative radii and nonnegative values")
    node_r = table[:, 0]
    node_f = table[:, 1]
    seg = 0.5 * (node_f[1:] + node_f[:-1]) * np.diff(node_r) if table.size else np.zeros(0)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1] + sum(w for _, w in atoms)
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"total mass is {total}, expected 1")
    scale = 1.0 / total
    cum = cum * scale
    node_f = node_f * scale
    atoms = tuple((r, w * scale) for r, w in atoms)

    def ac_mass(r):
        r = np.asarray(r, dtype=float)
        if not table.size:
            return np.zeros_like(r)
        i = np.clip(np.searchsorted(node_r, r, side="right") - 1, 0, len(node_r) - 2)
        x0, f0, f1 = node_r[i], node_f[i], node_f[i + 1]
        slope = (f1 - f0) / (node_r[i + 1] - x0)
        d = np.clip(r, node_r[0], node_r[-1]) - x0
        inside = cum[i] + f0 * d + 0.5 * slope * d * d
        return np.where(r <= node_r[0], 0.0, np.where(r >= node_r[-1], cum[-1], inside))

    def mass(r):
        r = np.asarray(r, dtype=float)
        out = ac_mass(r)
        for ra, w in atoms:
            out = out + w * (r > ra)
        return out

    density = None
    if table.size:
        def density(r):
            r = np.asarray(r, dtype=float)
            return np.interp(r, node_r, node_f, left=0.0, right=0.0)

    radii = [r for r, _ in atoms]
    if table.size:
        nz = node_r[np.nonzero(node_f)[0]]
        if nz.size:
            lo = node_r[max(np.nonzero(node_f)[0][0] - 1, 0)]
            radii += [lo, nz[-1]]
    m = RadialMeasure(
        mass_in_disk=mass,
        atoms=atoms,
        density=density,
        support_inner=min(radii) if radii else 0.0,
        support_outer=max(radii) if radii else 0.0,
        breakpoints=tuple(float(x) for x in node_r),
        description={
            "atoms": [{"r": r, "w": w} for r, w in atoms],
            "density_table": [[float(a), float(b)] for a, b in zip(node_r, node_f)],
        },
    )
    if atoms and min(radii) <= 0:
        raise ValueError("atom at the origin is not allowed")
    if not math.isfinite(m.log_moment()):
        warnings.warn("measure appears to have an infinite logarithmic moment", RuntimeWarning)
    return m


def invert(m: RadialMeasure) -> RadialMeasure:
    """Pushforward by z -> 1/z."""
    def mass(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(r > 0, 1.0 - m.mass_in_closed_disk(1.0 / r), 0.0)

    density = None
    if m.density is not None:
        def density(r):
            r = np.asarray(r, dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(r > 0, m.density(1.0 / r) / (r * r), 0.0)

    inner = 0.0 if m.support_outer == math.inf else 1.0 / m.support_outer
    outer = math.inf if m.support_inner == 0 else 1.0 / m.support_inner
    return RadialMeasure(
        mass_in_disk=mass,
        atoms=tuple((1.0 / r, w) for r, w in m.atoms),
        density=density,
        support_inner=inner,
        support_outer=outer,
        origin_exponent=m.tail_exponent,
        tail_exponent=m.origin_exponent,
        breakpoints=tuple(1.0 / b for b in m.breakpoints if b > 0),
        description={"invert": m.to_dict()},
    )


def scale(m: RadialMeasure, factor: float) -> RadialMeasure:
    """The measure nu(. / factor), i.e. the pushforward by z -> factor * z."""
    _positive(factor=factor)
    s = float(factor)

    def mass(r):
        return m.mass_in_disk(np.asarray(r, dtype=float) / s)

    density = None
    if m.density is not None:
        def density(r):
            return m.density(np.asarray(r, dtype=float) / s) / s

    origin = None if m.origin_exponent is None else (m.origin_exponent[0], m.origin_exponent[1] * s ** -m.origin_exponent[0])
    tail = None if m.tail_exponent is None else (m.tail_exponent[0], m.tail_exponent[1] * s ** m.tail_exponent[0])
    return RadialMeasure(
        mass_in_disk=mass,
        atoms=tuple((s * r, w) for r, w in m.atoms),
        density=density,
        support_inner=s * m.support_inner,
        support_outer=s * m.support_outer,
        origin_exponent=origin,
        tail_exponent=tail,
        breakpoints=tuple(s * b for b in m.breakpoints),
        description={"scale": {"factor": s, "measure": m.to_dict()}},
    )


def measure_from_dict(d) -> RadialMeasure:
    """Inverse of ``RadialMeasure.to_dict``."""
    if "name" in d:
        return builtin_measure(d["name"], **d.get("params", {}))
    if "invert" in d:
        return invert(measure_from_dict(d["invert"]))
    if "scale" in d:
        return scale(measure_from_dict(d["scale"]["measure"]), d["scale"]["factor"])
    if "atoms" in d or "density_table" in d:
        atoms = [(a["r"], a["w"]) for a in d.get("atoms", [])]
        return tabulated(atoms, d.get("density_table", []))
    raise ValueError(f"cannot build a measure from {d!r}")


def measure_from_json(text) -> RadialMeasure:
    return measure_from_dict(json.loads(text))


class RadialPotential:
    """Logarithmic potential of a radial measure, normalised by V(1) = 0.

    Immutable after construction. Evaluation at a radius costs one 20-point
    Gauss-Legendre rule over the part of a precomputed panel.
    """

    def __init__(self, source: RadialMeasure, rtol=1e-15):
        self.source = source
        m = source

        def log_mass(u):
            with np.errstate(divide="ignore"):
                return np.log(m.mass_in_disk(np.exp(u)))

        self._log_mass = log_mass
        kinks = [k for k in m.kinks_u() if -U_RANGE < k < U_RANGE]
        left = _quad.refine_panels(log_mass, _quad.initial_edges(-U_RANGE, 0.0, kinks), rtol=rtol, atol=1e-14)
        right = _quad.refine_panels(log_mass, _quad.initial_edges(0.0, U_RANGE, kinks), rtol=rtol, atol=1e-14)
        self.quadrature_error = left.error + right.error
        lv = np.exp(left.logval)
        rv = np.exp(right.logval)
        # V at left panel edges is minus the mass integrated from the edge up to 0
        v_left = -np.cumsum(lv[::-1])[::-1]
        v_right = np.concatenate([[0.0], np.cumsum(rv)])
        self._edges = np.concatenate([left.a, right.a, right.b[-1:]])
        self._v_edges = np.concatenate([v_left, v_right])
        self._v_lo = float(self._v_edges[0])
        self._v_hi = float(self._v_edges[-1])
        self._m_lo = float(m.mass_in_disk(np.exp(-U_RANGE)))
        self._m_hi = float(m.mass_in_disk(np.exp(U_RANGE)))
        self.table_u = np.linspace(-U_RANGE, U_RANGE, 8193)
        self.table_v = self.eval_u(self.table_u)

    def eval_u(self, u):
        """V(e^u) for an array of log-radii (``-inf`` allowed)."""
        u = np.asarray(u, dtype=float)
        flat = u.ravel()
        out = np.empty_like(flat)
        inside = (flat >= -U_RANGE) & (flat <= U_RANGE)
        if np.any(inside):
            ui = flat[inside]
            i = np.clip(np.searchsorted(self._edges, ui, side="right") - 1, 0, len(self._edges) - 2)
            a = self._edges[i]
            x, w = _quad.gl_nodes(a, ui)
            part = np.sum(w * self.source.mass_in_disk(np.exp(x)), axis=-1)
            out[inside] = self._v_edges[i] + part
        low = flat < -U_RANGE
        if np.any(low):
            ul = flat[low]
            if self.source.origin_exponent is not None:
                al, la = self.source.origin_exponent
                out[low] = self._v_lo - la / al * (math.exp(-al * U_RANGE) - np.exp(al * ul))
            elif self._m_lo == 0.0:
                out[low] = self._v_lo
            else:
                with np.errstate(invalid="ignore"):
                    out[low] = self._v_lo - self._m_lo * (-U_RANGE - ul)
        high = flat > U_RANGE
        if np.any(high):
            uh = flat[high]
            if self.source.tail_exponent is not None:
                al, la = self.source.tail_exponent
                out[high] = self._v_hi + (uh - U_RANGE) - la / al * (math.exp(-al * U_RANGE) - np.exp(-al * uh))
            else:
                out[high] = self._v_hi + self._m_hi * (uh - U_RANGE)
        return out.reshape(u.shape)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return self.eval_u(np.log(r))

    @property
    def value_at_origin(self):
        return float(self.eval_u(np.array([-np.inf]))[0])


@functools.lru_cache(maxsize=64)
def potential(m: RadialMeasure) -> RadialPotential:
    """The (cached) normalised potential of ``m``."""
    pot = RadialPotential(m)
    if pot.quadrature_error > 1e-10:
        raise QuadratureError("potential quadrature above tolerance 1e-10", achieved=pot.quadrature_error)
    return pot
