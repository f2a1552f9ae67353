"""Two-ruled hypersurfaces f(t, s, r) = gamma(t) + s X(t) + r Y(t)."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import jets
from .curve import JetCurve
from .framefield import (
    Gauge,
    GaugeViolated,
    InvariantData,
    InvariantJets,
    LocalGauge,
    extract_invariants,
    integrate_frame,
    _orthonormalize,
)
from .jets import wedge3 as triple_wedge

__all__ = [
    "TwoRuled",
    "FamilyReport",
    "FrontalVerdict",
    "StateError",
    "triple_wedge",
    "classify_family",
    "is_frontal",
    "is_front_at",
    "plane_rank",
    "RANK_TOL",
]

RANK_TOL = 1e-9
FRONTAL_TOL = 1e-9
FAMILY_LABELS = {2: "cylinder", 3: "pseudo_non_degenerate", 4: "non_degenerate"}


class StateError(ValueError):
    pass


class TwoRuled:
    """f(t, s, r) = gamma(t) + s X(t) + r Y(t).

    ``state`` is ``"raw"`` for user-supplied directors and ``"unit_speed"``
    when X, Y are constrictively adapted with |X'| = 1 (either built from
    invariant data or produced by :meth:`unit_speed`).
    """

    def __init__(self, gamma, X, Y, domain, name: str | None = None, state: str = "raw",
                 data: InvariantData | None = None, gauge_options: dict | None = None):
        self.gamma, self.X, self.Y = gamma, X, Y
        self.domain = (float(domain[0]), float(domain[1]))
        if not self.domain[0] < self.domain[1]:
            raise ValueError("empty domain")
        self.name = name
        self.state = state
        self.data = data
        self.gauge_options = dict(gauge_options or {})
        self._gauge = None
        self.parent = None  # raw hypersurface this one was reparametrized from

    # -- construction ---------------------------------------------------------
    @classmethod
    def from_invariants(cls, data: InvariantData, t0: float | None = None, initial=None,
                        nodes: int = 201, step: float = 1e-3, name: str | None = None) -> "TwoRuled":
        lo, hi = data.domain
        t0 = (0.0 if lo <= 0.0 <= hi else lo) if t0 is None else float(t0)
        grid = np.linspace(lo, hi, nodes)
        field_ = integrate_frame(data, t0, initial, grid, step)
        gamma, X, Y = field_.curves()
        f = cls(gamma, X, Y, data.domain, name=name, state="unit_speed", data=data)
        f.frame_field = field_
        return f

    # -- evaluation -----------------------------------------------------------
    def check_domain(self, t) -> None:
        lo, hi = self.domain
        tt = np.asarray(t, dtype=float)
        if np.any(tt < lo - 1e-12) or np.any(tt > hi + 1e-12):
            raise ValueError(f"t={t!r} outside domain [{lo}, {hi}]")

    def evaluate(self, t, s, r):
        self.check_domain(t)
        tt = np.asarray(t, dtype=float)
        ss = np.asarray(s, dtype=float)[..., None]
        rr = np.asarray(r, dtype=float)[..., None]
        if tt.ndim == 0:
            return self.gamma(float(tt)) + ss * self.X(float(tt)) + rr * self.Y(float(tt))
        return self.gamma(tt) + ss * self.X(tt) + rr * self.Y(tt)

    __call__ = evaluate

    def jets_at(self, t: float, order: int):
        return self.gamma.jet(t, order), self.X.jet(t, order), self.Y.jet(t, order)

    def raw_partials(self, t: float, s: float, r: float):
        """(f_t, f_s, f_r) by differentiating the directors directly."""
        g, X, Y = self.jets_at(float(t), 1)
        ft = g.d(1) + s * X.d(1) + r * Y.d(1)
        return ft, X.value, Y.value

    # -- invariants -------------------------------------------------------------
    def invariants(self, t: float, order: int = 6) -> InvariantJets:
        if self.state != "unit_speed":
            raise StateError("state not adapted: call unit_speed() first")
        if self.data is not None:
            return self.data.invariant_jets(t, order)
        return extract_invariants(self.gamma, self.X, self.Y, t, order)

    def frame(self, t: float) -> np.ndarray:
        """Rows X, Y, X', Z at ``t`` (adapted state only)."""
        if self.state != "unit_speed":
            raise StateError("state not adapted: call unit_speed() first")
        X = self.X.jet(t, 1)
        Y = self.Y.jet(t, 0).value
        x, xp = X.d(0), X.d(1)
        return np.array([x, Y, xp, triple_wedge(x, Y, xp)])

    def partials(self, t: float, s: float, r: float):
        """(f_t, f_s, f_r, f_t ^ f_s ^ f_r) in the adapted unit-speed gauge."""
        inv = self.invariants(t, 0)
        X, Y, Xp, Z = self.frame(t)
        lam = inv.b3.value + s + r * inv.a.value
        ft = inv.b1.value * X + inv.b2.value * Y + lam * Xp + inv.b4.value * Z
        wedge = lam * triple_wedge(X, Y, Xp) + inv.b4.value * triple_wedge(X, Y, Z)
        return ft, X, Y, wedge

    # -- gauge -------------------------------------------------------------------
    def gauge(self) -> Gauge:
        if self._gauge is None:
            self._gauge = Gauge(self.gamma, self.X, self.Y, self.domain, **self.gauge_options)
        return self._gauge

    def local(self, t: float, order: int = 6) -> LocalGauge:
        """Adapted unit-speed jets at raw parameter ``t``."""
        if self.state == "unit_speed":
            inv = self.invariants(t, order)
            X = self.X.jet(t, 0).value
            Y = self.Y.jet(t, 0).value
            g = self.gamma.jet(t, 0).value
            return LocalGauge(float(t), float(t), 0.0, 1.0, inv, X, Y, X, Y, g, ())
        return self.gauge().local(t, order)

    def unit_speed(self) -> "TwoRuled":
        """The same hypersurface reparametrized by arc length of the adapted X."""
        if self.state == "unit_speed":
            return self
        g = self.gauge()
        lo, hi = self.domain
        tl, th = g.adapted.tau(lo), g.adapted.tau(hi)
        if not th > tl:
            raise GaugeViolated("|X^'| vanishes;", 0.0, lo)

        def raw_t(tt):
            if tt <= tl:
                return lo
            if tt >= th:
                return hi
            return brentq(lambda x: g.adapted.tau(x) - tt, lo, hi, xtol=1e-15, rtol=1e-15)

        @functools.lru_cache(maxsize=256)
        def local(tt, order):
            return g.local(raw_t(tt), order)

        def comp(k):
            def fn(tt, order):
                lg = local(float(tt), max(order, 0))
                jet_tt = lg.frame_jets[k]
                return jets.JetVec4(tt, jet_tt.coeffs[: order + 1])
            return JetCurve(fn, (tl, th))

        f = TwoRuled(comp(0), comp(1), comp(2), (tl, th), name=self.name, state="unit_speed")
        f.parent = self
        f.raw_parameter = raw_t
        return f

    # -- normal ------------------------------------------------------------------
    def normal(self, t: float) -> np.ndarray:
        """Unit vector along X ^ Y ^ (normal part of the director derivatives)."""
        Xb, Yb = _orthonormalize(self.X.jet(t, 1), self.Y.jet(t, 1))
        x, y = Xb.value, Yb.value
        P = np.eye(4) - np.outer(x, x) - np.outer(y, y)
        u, w = P @ Xb.d(1), P @ Yb.d(1)
        v = u if np.linalg.norm(u) >= np.linalg.norm(w) else w
        n = triple_wedge(x, y, v)
        return n / np.linalg.norm(n)


# ---------------------------------------------------------------------------
# family classification
# ---------------------------------------------------------------------------


def plane_rank(X, Y, t: float, rel_tol: float = RANK_TOL) -> int:
    Xj, Yj = X.jet(t, 1), Y.jet(t, 1)
    M = np.array([Xj.d(0), Yj.d(0), Xj.d(1), Yj.d(1)])
    sv = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(sv > rel_tol * sv[0]))


@dataclass
class FamilyReport:
    label: str
    ranks: list
    grid: list
    transitions: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"label": self.label, "ranks": self.ranks, "grid": self.grid, "transitions": self.transitions}


def classify_family(f: TwoRuled, grid=None, rel_tol: float = RANK_TOL) -> FamilyReport:
    grid = np.linspace(*f.domain, 41) if grid is None else np.asarray(grid, dtype=float)
    ranks = [plane_rank(f.X, f.Y, float(t), rel_tol) for t in grid]
    trans = [float(0.5 * (grid[i] + grid[i + 1])) for i in range(len(grid) - 1) if ranks[i] != ranks[i + 1]]
    if not trans:
        label = FAMILY_LABELS.get(ranks[0], f"degenerate rank {ranks[0]}")
    else:
        label = "mixed"
    return FamilyReport(label, ranks, [float(t) for t in grid], trans)


@dataclass
class FrontalVerdict:
    label: str  # frontal, not_frontal, trivially_regular
    family: str
    max_abs_b4: float | None = None
    min_abs_b4: float | None = None
    immersion: bool = False
    normal: object = None  # callable t -> unit normal, when frontal
    grid: list = field(default_factory=list)
    tolerance: float = FRONTAL_TOL


def is_frontal(f: TwoRuled, grid=None, tol: float = FRONTAL_TOL) -> FrontalVerdict:
    """Frontality of a two-ruled hypersurface.

    non-degenerate: never frontal at its singular points.
    pseudo-non-degenerate: frontal iff b4 vanishes on the whole grid, with
    unit normal X ^ Y ^ X'.  Otherwise ``not_frontal``; ``immersion`` is set
    when b4 has no zero on the grid (then f has no singular point).
    cylinder: ``trivially_regular`` when gamma' stays off the plane of X, Y;
    cylinders with singular points are outside the scope of this test.
    """
    grid = np.linspace(*f.domain, 41) if grid is None else np.asarray(grid, dtype=float)
    fam = classify_family(f, grid)
    g = [float(t) for t in grid]
    if fam.label == "non_degenerate":
        return FrontalVerdict("not_frontal", fam.label, grid=g, tolerance=tol)
    if fam.label == "cylinder":
        off = []
        for t in grid:
            gj, Xj, Yj = f.jets_at(float(t), 1)
            Xb, Yb = _orthonormalize(Xj, Yj)
            v = gj.d(1)
            off.append(np.linalg.norm(v - (v @ Xb.value) * Xb.value - (v @ Yb.value) * Yb.value))
        if min(off) > tol:
            return FrontalVerdict("trivially_regular", fam.label, immersion=True, grid=g, tolerance=tol)
        raise ValueError("cylinder with singular points: frontality is not decided by this test")
    if fam.label != "pseudo_non_degenerate":
        raise ValueError(f"family is {fam.label}; frontality test needs a constant family type")
    b4 = [abs(f.local(float(t), 0).inv.b4.value) for t in grid]
    mx, mn = max(b4), min(b4)
    if mx <= tol:
        return FrontalVerdict("frontal", fam.label, mx, mn, normal=f.normal, grid=g, tolerance=tol)
    return FrontalVerdict("not_frontal", fam.label, mx, mn, immersion=mn > tol, grid=g, tolerance=tol)


def is_front_at(f: TwoRuled, t: float, tol: float = FRONTAL_TOL) -> bool:
    """det(X, Y, X', X'') = -delta is non-zero at ``t`` (raw parameter)."""
    return abs(f.local(t, 0).inv.delta.value) > tol
