"""Invariant data (a, delta, B) of a pseudo-non-degenerate pair of directors.

With X, Y orthonormal, constrictively adapted (<X, Y'> = <X', Y> = 0) and
|X'| = 1, the frame {X, Y, X', Z} with Z = X ^ Y ^ X' satisfies::

    X'  = X'
    Y'  = a X'
    X'' = -X - a Y + delta Z
    Z'  = -delta X'

and gamma' = b1 X + b2 Y + b3 X' + b4 Z.  This module goes both ways:
:func:`integrate_frame` rebuilds the frame from (a, delta, B), and
:func:`extract_invariants` / :class:`Gauge` recover the data from curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import flow, jets
from .expr import Expr
from .jets import Jet

__all__ = [
    "InvariantData",
    "InvariantJets",
    "FrameField",
    "GaugeViolated",
    "integrate_frame",
    "extract_invariants",
    "invariants_from_jets",
    "frame_matrix",
    "default_initial_frame",
    "local_frame_jets",
    "adapt_directors",
    "AdaptedDirectors",
    "Gauge",
    "LocalGauge",
    "reparametrize_unit_speed_director",
]

GAUGE_TOL = 1e-8


class GaugeViolated(ValueError):
    def __init__(self, what: str, residual: float, t: float):
        self.what = what
        self.residual = residual
        self.t = t
        super().__init__(f"gauge violated at t={t!r}: {what} residual {residual:.3e}")


# ---------------------------------------------------------------------------
# invariant data
# ---------------------------------------------------------------------------


@dataclass
class InvariantJets:
    """Jets of the invariant data at one parameter value."""

    t: float
    a: Jet
    delta: Jet
    b1: Jet
    b2: Jet
    b3: Jet
    b4: Jet

    @property
    def order(self) -> int:
        return min(j.order for j in (self.a, self.delta, self.b1, self.b2, self.b3, self.b4))

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("a", "delta", "b1", "b2", "b3", "b4")}

    def truncate(self, order: int) -> "InvariantJets":
        return InvariantJets(self.t, *(getattr(self, k).truncate(order) for k in ("a", "delta", "b1", "b2", "b3", "b4")))


@dataclass
class InvariantData:
    """The functions a, delta, b1..b4 as expressions in t."""

    a: Expr
    delta: Expr
    b1: Expr
    b2: Expr
    b3: Expr
    b4: Expr = field(default_factory=lambda: Expr("0"))
    domain: tuple = (0.0, 1.0)

    def __post_init__(self):
        for k in ("a", "delta", "b1", "b2", "b3", "b4"):
            setattr(self, k, Expr(getattr(self, k)))
        self.domain = (float(self.domain[0]), float(self.domain[1]))

    @property
    def frontal_flag(self) -> bool:
        """True when b4 is the literal constant zero."""
        return self.b4.is_zero

    def invariant_jets(self, t: float, order: int) -> InvariantJets:
        return InvariantJets(float(t), *(getattr(self, k).jet(t, order) for k in ("a", "delta", "b1", "b2", "b3", "b4")))

    def coef(self, ts):
        return frame_matrix(self.a(ts), self.delta(ts))

    def vel(self, ts):
        return np.stack([self.b1(ts), self.b2(ts), self.b3(ts), self.b4(ts)], -1)

    def sources(self) -> dict:
        return {k: getattr(self, k).source for k in ("a", "delta", "b1", "b2", "b3", "b4")}


def frame_matrix(a, delta, one=None):
    """A(t) with (X, Y, X', Z)' = A (X, Y, X', Z), stacked over the leading axes of a, delta."""
    a = np.asarray(a, dtype=float)
    d = np.asarray(delta, dtype=float)
    a, d = np.broadcast_arrays(a, d)
    z = np.zeros_like(a)
    one = np.ones_like(a) if one is None else np.asarray(one, dtype=float)
    return np.stack(
        [
            np.stack([z, z, one, z], -1),
            np.stack([z, z, a, z], -1),
            np.stack([-one, -a, z, d], -1),
            np.stack([z, z, -d, z], -1),
        ],
        -2,
    )


def default_initial_frame() -> np.ndarray:
    """(E1, E2, E3, E1^E2^E3): orthonormal with Z = X ^ Y ^ X'."""
    W = np.eye(4)
    W[3] = jets.wedge3(W[0], W[1], W[2])
    return W


def _frame_matrix_jet(a: Jet, delta: Jet) -> Jet:
    one = np.zeros_like(a.coeffs)
    one[0] = 1.0
    return Jet(a.base_point, frame_matrix(a.coeffs, delta.coeffs, one))


def local_frame_jets(inv: InvariantJets, W0=None, g0=None):
    """Jets of X, Y, X', Z and gamma from invariant jets and a frame value.

    Returns (W, gamma) where W is a matrix jet with rows X, Y, X', Z; the
    result has the order of ``inv``.  By isometry invariance any frame with
    Z = X ^ Y ^ X' may be used as ``W0``.
    """
    n = inv.order
    W0 = default_initial_frame() if W0 is None else np.asarray(W0, dtype=float)
    g0 = np.zeros(4) if g0 is None else np.asarray(g0, dtype=float)
    if n == 0:
        return Jet(inv.t, W0[None]), jets.JetVec4(inv.t, g0[None])
    A = _frame_matrix_jet(inv.a.truncate(n - 1), inv.delta.truncate(n - 1))
    W = jets.linear_flow(A, W0)
    Bt = jets.stack([inv.b1, inv.b2, inv.b3, inv.b4]).truncate(n - 1)
    Wt = W.truncate(n - 1)
    # gamma' = sum_i b_i W_i, Cauchy product of row coefficients with rows
    vel = sum((Bt[i] * Wt[i] for i in range(4)), jets.lift_constant(np.zeros(4), inv.t, n - 1))
    return W, vel.antiderivative(g0)


# ---------------------------------------------------------------------------
# frame integration
# ---------------------------------------------------------------------------


@dataclass
class FrameField:
    """Frame {X, Y, X', Z} and base point sampled on a parameter grid."""

    t: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    Xp: np.ndarray
    Z: np.ndarray
    gamma: np.ndarray
    data: InvariantData | None = None
    step: float = 1e-3
    orientation: int = -1  # sign of det(X, Y, X', Z); -1 means Z = X ^ Y ^ X'

    @property
    def frames(self) -> np.ndarray:
        return np.stack([self.X, self.Y, self.Xp, self.Z], axis=1)

    def state(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Frame rows and base point at any ``t`` by RK4 from the nearest node."""
        t = float(t)
        i = int(np.argmin(np.abs(self.t - t)))
        W0 = self.frames[i]
        if t == self.t[i]:
            return W0.copy(), self.gamma[i].copy()
        if self.data is None:
            raise ValueError("no invariant data attached; only node values available")
        W, g = flow.integrate(self.data.coef, self.data.vel, [self.t[i], t], W0, self.gamma[i], self.step)
        return W[-1], g[-1]

    def hermite(self, t: float) -> np.ndarray:
        """Cubic Hermite interpolation of the base point using gamma' at nodes."""
        if self.data is None:
            raise ValueError("no invariant data attached")
        t = float(t)
        i = int(np.clip(np.searchsorted(self.t, t) - 1, 0, len(self.t) - 2))
        t0, t1 = self.t[i], self.t[i + 1]
        h = t1 - t0
        u = (t - t0) / h
        v0 = self.data.vel(np.array([t0]))[0] @ self.frames[i]
        v1 = self.data.vel(np.array([t1]))[0] @ self.frames[i + 1]
        h00 = 2 * u**3 - 3 * u**2 + 1
        h10 = u**3 - 2 * u**2 + u
        h01 = -2 * u**3 + 3 * u**2
        h11 = u**3 - u**2
        return h00 * self.gamma[i] + h10 * h * v0 + h01 * self.gamma[i + 1] + h11 * h * v1

    def sampled_curves(self, window: int = 9):
        """gamma, X, Y as curves interpolating the node samples only.

        The jet at t comes from the degree ``window - 1`` polynomial through
        the ``window`` nearest nodes, so no invariant data is consulted.
        """
        from .curve import JetCurve

        if window > len(self.t):
            raise ValueError("window larger than the grid")

        def make(values):
            def fn(t, order):
                i = int(np.searchsorted(self.t, t))
                lo = int(np.clip(i - window // 2, 0, len(self.t) - window))
                x = self.t[lo : lo + window] - t
                V = np.vander(x, window, increasing=True)
                c = np.linalg.solve(V, values[lo : lo + window])
                k = np.arange(order + 1)
                coeffs = np.zeros((order + 1, 4))
                m = min(order + 1, window)
                coeffs[:m] = c[:m] * jets._FACT[k[:m], None]
                return jets.JetVec4(t, coeffs)
            return JetCurve(fn, (self.t[0], self.t[-1]))

        return make(self.gamma), make(self.X), make(self.Y)

    def curves(self):
        """gamma, X, Y as jet-evaluable curves backed by this field."""
        from .curve import JetCurve

        def make(row):
            def fn(t, order):
                W, g = self.state(t)
                inv = self.data.invariant_jets(t, order)
                Wj, gj = local_frame_jets(inv, W, g)
                return gj if row is None else Wj[row]
            return JetCurve(fn, self.data.domain if self.data else (-math.inf, math.inf))

        return make(None), make(0), make(1)


def integrate_frame(data: InvariantData, t0: float, initial=None, grid=None, step: float = 1e-3,
                    project: bool = True) -> FrameField:
    """Solve W' = A W, gamma' = B W from ``t0`` over ``grid``.

    ``initial`` holds rows (X, Y, X', Z) at ``t0``; it must be orthonormal
    within 1e-12.  Grid nodes on either side of ``t0`` are reached by
    forward and backward integration; ``gamma(t0) = 0``.
    """
    W0 = default_initial_frame() if initial is None else np.asarray(initial, dtype=float)
    if W0.shape != (4, 4):
        raise ValueError("initial frame must be a 4x4 array of row vectors")
    defect = flow.orthonormality_defect(W0)
    if defect > 1e-12:
        raise ValueError(f"initial frame is not orthonormal (defect {defect:.3e})")
    t0 = float(t0)
    grid = np.array([t0] if grid is None else grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    orientation = int(np.sign(np.linalg.det(W0)))

    fwd = grid[grid > t0]
    bwd = grid[grid < t0][::-1]
    out_t = [np.array([t0])]
    out_W = [W0[None]]
    out_g = [np.zeros((1, 4))]
    for seg in (fwd, bwd):
        if seg.size == 0:
            continue
        nodes = np.concatenate([[t0], seg])
        W, g = flow.integrate(data.coef, data.vel, nodes, W0, np.zeros(4), step, project)
        out_t.append(seg)
        out_W.append(W[1:])
        out_g.append(g[1:])
    t_all = np.concatenate(out_t)
    order = np.argsort(t_all)
    W_all = np.concatenate(out_W)[order]
    g_all = np.concatenate(out_g)[order]
    t_all = t_all[order]
    if t0 not in grid:
        keep = t_all != t0
        t_all, W_all, g_all = t_all[keep], W_all[keep], g_all[keep]
    return FrameField(t_all, W_all[:, 0], W_all[:, 1], W_all[:, 2], W_all[:, 3], g_all, data, step, orientation)


# ---------------------------------------------------------------------------
# extraction
# ---------------------------------------------------------------------------


def invariants_from_jets(gamma: Jet, X: Jet, Y: Jet) -> InvariantJets:
    """a, delta, b1..b4 from jets of an adapted unit-speed pair.

    Needs X of order n+2, Y and gamma of order n+1; returns order n.
    """
    n = X.order - 2
    Xp = X.derivative()
    Xpp = Xp.derivative()
    Yp = Y.derivative()
    Xn, Yn, Xpn = X.truncate(n), Y.truncate(n), Xp.truncate(n)
    Z = jets.wedge3(Xn, Yn, Xpn)
    a = jets.dot(Yp.truncate(n), Xpn)
    delta = -jets.det4(Xn, Yn, Xpn, Xpp)
    gp = gamma.derivative().truncate(n)
    b = [jets.dot(gp, v) for v in (Xn, Yn, Xpn, Z)]
    return InvariantJets(X.base_point, a, delta, *b)


def _check_adapted(X: Jet, Y: Jet, t: float, tol: float, unit_speed: bool = True) -> None:
    x, y = X.d(0), Y.d(0)
    xp, yp = X.d(1), Y.d(1)
    checks = [
        ("|X| - 1", abs(np.linalg.norm(x) - 1)),
        ("|Y| - 1", abs(np.linalg.norm(y) - 1)),
        ("<X, Y>", abs(x @ y)),
        ("<X, Y'>", abs(x @ yp)),
        ("<X', Y>", abs(xp @ y)),
    ]
    if unit_speed:
        checks.append(("|X'| - 1", abs(np.linalg.norm(xp) - 1)))
    for what, res in checks:
        if res > tol:
            raise GaugeViolated(what, float(res), t)


def extract_invariants(gamma, X, Y, t: float, order: int = 6, tol: float = GAUGE_TOL) -> InvariantJets:
    """Invariant jets of f = gamma + sX + rY at ``t`` for an adapted unit-speed pair."""
    t = float(t)
    Xj = X.jet(t, order + 2)
    Yj = Y.jet(t, order + 1)
    _check_adapted(Xj, Yj, t, tol)
    return invariants_from_jets(gamma.jet(t, order + 1), Xj, Yj)


# ---------------------------------------------------------------------------
# gauge adaptation
# ---------------------------------------------------------------------------


def _orthonormalize(X: Jet, Y: Jet) -> tuple[Jet, Jet]:
    nx = jets.norm(X)
    Xb = X / nx
    Yo = Y - jets.dot(Y, Xb) * Xb
    return Xb, Yo / jets.norm(Yo)


def _rotate(Xb: Jet, Yb: Jet, theta: Jet) -> tuple[Jet, Jet]:
    c, s = jets.cos(theta), jets.sin(theta)
    return c * Xb - s * Yb, s * Xb + c * Yb


def _theta_rate_and_speed(Xb: Jet, Yb: Jet):
    """<X', Y> and the normal components u = X'_perp, w = Y'_perp at the base point."""
    x, y = Xb.d(0), Yb.d(0)
    xp, yp = Xb.d(1), Yb.d(1)
    P = np.eye(4) - np.outer(x, x) - np.outer(y, y)
    return float(xp @ y), P @ xp, P @ yp


def best_theta0(u: np.ndarray, w: np.ndarray) -> float:
    """Angle maximizing |cos(th) u - sin(th) w|, i.e. the speed of the rotated X."""
    return 0.5 * math.atan2(-2.0 * float(u @ w), float(u @ u - w @ w))


@dataclass
class AdaptedDirectors:
    """Gauge angle theta(t) and arc length tau(t) = int |X^'| of the rotated pair."""

    X: object
    Y: object
    t_ref: float
    theta0: float
    domain: tuple
    _sol: object = None

    def raw_jets(self, t: float, order: int) -> tuple[Jet, Jet]:
        return _orthonormalize(self.X.jet(t, order), self.Y.jet(t, order))

    def theta(self, t: float) -> float:
        return float(self._sol.sol(float(t))[0])

    def tau(self, t: float) -> float:
        return float(self._sol.sol(float(t))[1])

    def pair(self, t: float, order: int) -> tuple[Jet, Jet, Jet]:
        """Jets of (X^, Y^, theta) at ``t``."""
        Xb, Yb = self.raw_jets(t, max(order, 1))
        if order == 0:
            theta = jets.lift_constant(self.theta(t), float(t), 0)
        else:
            rate = jets.dot(Xb.derivative(), Yb.truncate(order - 1))
            theta = rate.antiderivative(self.theta(t))
        Xh, Yh = _rotate(Xb.truncate(order), Yb.truncate(order), theta)
        return Xh, Yh, theta

    def __call__(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        Xh, Yh, _ = self.pair(t, 0)
        return Xh.value, Yh.value


def adapt_directors(X, Y, domain, t_ref: float | None = None, theta0: float | None = None,
                    rtol: float = 1e-12, atol: float = 1e-13) -> AdaptedDirectors:
    """Rotate (X, Y) so that <X^', Y^> = 0; theta' = <X', Y> from theta(t_ref) = theta0.

    Inputs are orthonormalized first (Gram-Schmidt, X first).  When
    ``theta0`` is None it is chosen to maximize |X^'| at ``t_ref``.
    """
    lo, hi = float(domain[0]), float(domain[1])
    t_ref = (0.0 if lo <= 0.0 <= hi else lo) if t_ref is None else float(t_ref)
    Xb, Yb = _orthonormalize(X.jet(t_ref, 1), Y.jet(t_ref, 1))
    _, u, w = _theta_rate_and_speed(Xb, Yb)
    if theta0 is None:
        theta0 = best_theta0(u, w)

    def rhs(t, y):
        Xb, Yb = _orthonormalize(X.jet(t, 1), Y.jet(t, 1))
        rate, u, w = _theta_rate_and_speed(Xb, Yb)
        c, s = math.cos(y[0]), math.sin(y[0])
        return [rate, float(np.linalg.norm(c * u - s * w))]

    ad = AdaptedDirectors(X, Y, t_ref, float(theta0), (lo, hi))
    ad._sol = _two_sided_ivp(rhs, t_ref, (lo, hi), [float(theta0), 0.0], rtol, atol)
    return ad


class _TwoSided:
    def __init__(self, t_ref, fwd, bwd, y0):
        self.t_ref, self.fwd, self.bwd, self.y0 = t_ref, fwd, bwd, np.asarray(y0, dtype=float)

    def sol(self, t):
        if t > self.t_ref and self.fwd is not None:
            return self.fwd.sol(t)
        if t < self.t_ref and self.bwd is not None:
            return self.bwd.sol(t)
        return self.y0


def _two_sided_ivp(rhs, t_ref, domain, y0, rtol, atol):
    lo, hi = domain
    fwd = bwd = None
    if hi > t_ref:
        fwd = solve_ivp(rhs, (t_ref, hi), y0, method="DOP853", dense_output=True, rtol=rtol, atol=atol)
        if not fwd.success:
            raise FloatingPointError(f"gauge integration failed: {fwd.message}")
    if lo < t_ref:
        bwd = solve_ivp(rhs, (t_ref, lo), y0, method="DOP853", dense_output=True, rtol=rtol, atol=atol)
        if not bwd.success:
            raise FloatingPointError(f"gauge integration failed: {bwd.message}")
    return _TwoSided(t_ref, fwd, bwd, y0)


@dataclass
class LocalGauge:
    """Everything needed at one raw parameter value ``t``.

    ``inv`` holds jets in the unit-speed parameter ``t_tilde = tau(t)``;
    ``to_adapted`` maps raw plane coordinates (s, r) along the user's X, Y
    to coordinates along (X^, Y^).
    """

    t: float
    t_tilde: float
    theta: float
    speed: float  # |X^'| in the raw parameter
    inv: InvariantJets
    X_raw: np.ndarray
    Y_raw: np.ndarray
    X_hat: np.ndarray
    Y_hat: np.ndarray
    gamma: np.ndarray
    frame_jets: tuple = ()  # jets in t_tilde of gamma, X^, Y^

    def to_adapted(self, s: float, r: float) -> tuple[float, float]:
        P = s * self.X_raw + r * self.Y_raw
        return float(P @ self.X_hat), float(P @ self.Y_hat)

    def from_adapted(self, s_hat: float, r_hat: float) -> tuple[float, float]:
        P = s_hat * self.X_hat + r_hat * self.Y_hat
        M = np.stack([self.X_raw, self.Y_raw], axis=1)
        sol, *_ = np.linalg.lstsq(M, P, rcond=None)
        return float(sol[0]), float(sol[1])


class Gauge:
    """Adapted, unit-speed gauge of f = gamma + sX + rY with X, Y arbitrary spanning fields."""

    def __init__(self, gamma, X, Y, domain, t_ref=None, theta0=None):
        self.gamma, self.X, self.Y = gamma, X, Y
        self.domain = (float(domain[0]), float(domain[1]))
        self.adapted = adapt_directors(X, Y, self.domain, t_ref, theta0)

    @property
    def theta0(self) -> float:
        return self.adapted.theta0

    def speed(self, t: float) -> float:
        Xh, _, _ = self.adapted.pair(t, 1)
        return float(np.linalg.norm(Xh.d(1)))

    def local(self, t: float, order: int = 6, min_speed: float = 1e-9) -> LocalGauge:
        t = float(t)
        n = int(order)
        Xh, Yh, theta = self.adapted.pair(t, n + 2)
        rho = jets.norm_or_none(Xh.derivative(), min_speed)
        if rho is None:
            raise GaugeViolated("|X^'| vanishes;", float(np.linalg.norm(Xh.d(1))), t)
        tau = rho.antiderivative(self.adapted.tau(t))
        t_of = jets.invert(tau)
        Xt = jets.compose(Xh, t_of)
        Yt = jets.compose(Yh, t_of)
        gt = jets.compose(self.gamma.jet(t, n + 2), t_of)
        inv = invariants_from_jets(gt.truncate(n + 1), Xt, Yt.truncate(n + 1))
        Xr, Yr = self.X.jet(t, 0).value, self.Y.jet(t, 0).value
        return LocalGauge(
            t, tau.value, theta.value, rho.value, inv, Xr, Yr, Xh.value, Yh.value,
            gt.value, (gt, Xt, Yt),
        )


def reparametrize_unit_speed_director(gamma, X, Y, domain, **kw) -> Gauge:
    """Adapted pair reparametrized by t_tilde = int |X^'| dt.

    Refuses (GaugeViolated) if |X^'| vanishes at a sampled point.
    """
    g = Gauge(gamma, X, Y, domain, **kw)
    for t in np.linspace(g.domain[0], g.domain[1], 33):
        if g.speed(t) <= 1e-9:
            raise GaugeViolated("|X^'| vanishes;", g.speed(t), float(t))
    return g
