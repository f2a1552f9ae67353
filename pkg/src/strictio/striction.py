"""Striction curves, striction surfaces and second striction curves.

For a pseudo-non-degenerate f in the adapted unit-speed gauge the striction
surface is the plane-coordinate line ``s = -a r - b3``, parametrized as
``sigma1(t, r) = gt(t) + r Xt(t)`` with ``gt = gamma - b3 X`` and
``Xt = (-a X + Y) / |-a X + Y|``.  Its own striction curve is the second
striction curve ``sigma2 = gt + omega sqrt(1 + a^2) / a' * Xt`` where
``omega = a b2 + b1 - b3'``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import jets
from .framefield import InvariantJets
from .hypersurface import TwoRuled
from .jets import Jet

__all__ = [
    "CylindricalLocus",
    "ruled_striction",
    "omega",
    "StrictionSurface",
    "striction_surface",
    "SecondStrictionCurve",
    "second_striction",
    "surface_type",
    "SurfaceTypeReport",
    "adjacent_distance_oracle",
    "striction_line_residual",
]

TYPE_TOL = 1e-8


class CylindricalLocus(ValueError):
    pass


def ruled_striction(gamma, X, t):
    """Striction parameter s(t) = -<gamma', X'> / <X', X'> of gamma + sX, |X| = 1."""
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(tt)
    for i, ti in enumerate(tt):
        g = gamma.jet(float(ti), 1).d(1)
        xp = X.jet(float(ti), 1).d(1)
        nn = float(xp @ xp)
        if nn <= 1e-18:
            raise CylindricalLocus(
                f"X' vanishes at t={ti!r}: any s(t) is a striction curve on a cylindrical locus"
            )
        out[i] = -float(g @ xp) / nn
    return out if np.ndim(t) else float(out[0])


def omega(inv: InvariantJets) -> Jet:
    """omega = a b2 + b1 - b3' (one order lower than the input jets)."""
    n = inv.order - 1
    return inv.a.truncate(n) * inv.b2.truncate(n) + inv.b1.truncate(n) - inv.b3.derivative().truncate(n)


def _tilde_jets(f: TwoRuled, t: float, order: int):
    """Jets of gt = gamma - b3 X and Xt = (-a X + Y)/|-a X + Y| at t."""
    inv = f.invariants(t, order)
    g, X, Y = f.jets_at(t, order)
    gt = g - inv.b3 * X
    v = -inv.a * X + Y
    Xt = v / jets.norm(v)
    return gt, Xt, inv


@dataclass
class StrictionSurface:
    t: np.ndarray
    gamma_tilde: np.ndarray
    X_tilde: np.ndarray
    a: np.ndarray
    b3: np.ndarray

    def sigma1(self, i: int, r):
        """Points sigma1(t_i, r)."""
        r = np.asarray(r, dtype=float)[..., None]
        return self.gamma_tilde[i] + r * self.X_tilde[i]

    def s_of(self, i: int, r):
        """Plane coordinate s on the striction surface at node i."""
        return -self.a[i] * np.asarray(r, dtype=float) - self.b3[i]

    def grid_points(self, r_values) -> np.ndarray:
        r = np.asarray(r_values, dtype=float)
        return self.gamma_tilde[:, None, :] + r[None, :, None] * self.X_tilde[:, None, :]


def striction_surface(f: TwoRuled, grid=None) -> StrictionSurface:
    f = f.unit_speed()
    grid = np.linspace(*f.domain, 51) if grid is None else np.asarray(grid, dtype=float)
    gt, Xt, A, B3 = [], [], [], []
    for t in grid:
        g, x, inv = _tilde_jets(f, float(t), 0)
        gt.append(g.value)
        Xt.append(x.value)
        A.append(inv.a.value)
        B3.append(inv.b3.value)
    return StrictionSurface(grid, np.array(gt), np.array(Xt), np.array(A), np.array(B3))


@dataclass
class SecondStrictionCurve:
    t: np.ndarray
    sigma2: np.ndarray
    omega: np.ndarray
    r_closed: np.ndarray  # coefficient omega sqrt(1+a^2)/a' of Xt
    r_direct: np.ndarray  # -<gt', Xt'> / <Xt', Xt'>
    cross_check: float = field(default=0.0)


def second_striction(f: TwoRuled, grid=None, tol: float = 1e-9) -> SecondStrictionCurve:
    f = f.unit_speed()
    grid = np.linspace(*f.domain, 51) if grid is None else np.asarray(grid, dtype=float)
    pts, om, rc, rd = [], [], [], []
    for t in grid:
        gt, Xt, inv = _tilde_jets(f, float(t), 2)
        ap = inv.a.d(1)
        if abs(ap) <= tol:
            raise CylindricalLocus(f"a' vanishes at t={float(t)!r}: cylinder-type locus; second striction undefined")
        w = omega(inv).value
        a = inv.a.value
        coef = w * math.sqrt(1.0 + a * a) / ap
        gtp, Xtp = gt.d(1), Xt.d(1)
        direct = -float(gtp @ Xtp) / float(Xtp @ Xtp)
        pts.append(gt.value + coef * Xt.value)
        om.append(w)
        rc.append(coef)
        rd.append(direct)
    rc, rd = np.array(rc), np.array(rd)
    return SecondStrictionCurve(grid, np.array(pts), np.array(om), rc, rd, float(np.max(np.abs(rc - rd))))


@dataclass
class SurfaceTypeReport:
    label: str
    residuals: dict
    grid: list
    tolerance: float
    zero_locations: list = field(default_factory=list)


def surface_type(f: TwoRuled, grid=None, tol: float = TYPE_TOL) -> SurfaceTypeReport:
    """cylinder_type > cone_type > tangent_developable_type > generic."""
    f = f.unit_speed()
    grid = np.linspace(*f.domain, 41) if grid is None else np.asarray(grid, dtype=float)
    ap, cone, om, b4 = [], [], [], []
    for t in grid:
        inv = f.invariants(float(t), 3)
        w = omega(inv)
        a1, a2 = inv.a.d(1), inv.a.d(2)
        ap.append(a1)
        cone.append(a2 * w.d(0) - a1 * (w.d(1) + a1 * inv.b2.d(0)))
        om.append(w.d(0))
        b4.append(inv.b4.d(0))
    ap, cone, om, b4 = map(np.abs, map(np.array, (ap, cone, om, b4)))
    res = {
        "a_prime": float(ap.max()),
        "cone": float(cone.max()),
        "omega": float(om.max()),
        "b4": float(b4.max()),
        "min_abs_a_prime": float(ap.min()),
    }
    g = [float(x) for x in grid]
    if res["a_prime"] <= tol:
        return SurfaceTypeReport("cylinder_type", res, g, tol)
    if res["cone"] <= tol:
        zeros = [g[i] for i in np.flatnonzero(ap <= tol)]
        if zeros:
            return SurfaceTypeReport("mixed", res, g, tol, zeros)
        return SurfaceTypeReport("cone_type", res, g, tol)
    if res["omega"] <= tol and res["b4"] <= tol:
        return SurfaceTypeReport("tangent_developable_type", res, g, tol)
    return SurfaceTypeReport("generic", res, g, tol)


def adjacent_distance_oracle(f: TwoRuled, t0: float, eps: float):
    """Minimizer (s1, r1, s2, r2) of |f(t0, s1, r1) - f(t0 + eps, s2, r2)|^2 / 2.

    The objective is quadratic, so this is a linear least-squares problem;
    the minimum-norm solution is returned when it is rank deficient.
    """
    if not 1e-4 <= eps <= 1e-1:
        raise ValueError("eps must lie in [1e-4, 1e-1]")
    t1 = t0 + eps
    M = np.stack([f.X(t0), f.Y(t0), -f.X(t1), -f.Y(t1)], axis=1)
    rhs = f.gamma(t1) - f.gamma(t0)
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    return tuple(float(x) for x in sol)


def striction_line_residual(a: float, b3: float, s: float, r: float) -> float:
    """Distance of (s, r) from the line s + a r + b3 = 0 in the plane coordinates."""
    return abs(s + a * r + b3) / math.sqrt(1.0 + a * a)
