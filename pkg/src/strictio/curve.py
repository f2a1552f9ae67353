"""Curves in R^4 and their Frenet-type frame.

The frame is built in three normalization stages::

    gamma' = l e1,   e1' = k1 e2,   e2' + k1 e1 = k4 e3,   e4 = e1 ^ e2 ^ e3

and ``k6 = <e3', e4>``.  All quantities are computed as jets, so the
returned curvatures carry their derivatives.

Two kinds of framed curve are provided: :class:`CurveModel` (explicit
components, frame computed by differentiation) and :class:`CurvatureCurve`
(curvature functions given, frame obtained by integrating the Frenet
equations).  Both expose ``frame_jets(t, order)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import flow, jets
from .expr import Expr
from .jets import Jet, JetVec4

__all__ = [
    "CurveModel",
    "CurvatureCurve",
    "FrameJets",
    "FrenetFrame",
    "FrameDegenerate",
    "frenet_frame",
    "frenet_jets",
    "osculation_type",
    "frenet_matrix",
    "JetCurve",
]

FRAME_TOL = 1e-9


class FrameDegenerate(ValueError):
    def __init__(self, t: float, stage: int, detail: str = ""):
        self.t = t
        self.stage = stage
        msg = f"frame degenerate at t={t!r}: rank deficiency at stage {stage}"
        super().__init__(msg + (f" ({detail})" if detail else ""))


def _as_callable(c):
    if isinstance(c, (str, int, float, Expr)):
        return Expr(c)
    if callable(c):
        return c
    raise TypeError(f"cannot use {c!r} as a curve component")


class CurveModel:
    """A map t -> R^4 given by four scalar functions.

    Components may be expression strings, :class:`Expr` objects or Python
    callables that accept floats, arrays and jets alike.
    """

    def __init__(self, components: Sequence, domain=(-math.inf, math.inf), name: str | None = None):
        if len(components) != 4:
            raise ValueError("a curve in R^4 needs four components")
        self.components = tuple(_as_callable(c) for c in components)
        self.domain = (float(domain[0]), float(domain[1]))
        self.name = name

    @classmethod
    def constant(cls, v, domain=(-math.inf, math.inf), name=None) -> "CurveModel":
        return cls([repr(float(x)) if x >= 0 else f"-{-float(x)!r}" for x in v], domain, name)

    @property
    def sources(self) -> list[str] | None:
        if all(isinstance(c, Expr) for c in self.components):
            return [c.source for c in self.components]
        return None

    def check_domain(self, t) -> None:
        lo, hi = self.domain
        tt = np.asarray(t, dtype=float)
        if np.any(tt < lo - 1e-12) or np.any(tt > hi + 1e-12):
            raise ValueError(f"t={t!r} outside domain [{lo}, {hi}]")

    def __call__(self, t):
        if isinstance(t, Jet):
            return jets.compose(self.jet(t.value, t.order), t)
        tt = np.asarray(t, dtype=float)
        cols = [np.broadcast_to(np.asarray(c(tt), dtype=float), tt.shape) for c in self.components]
        return np.stack(cols, axis=-1)

    def jet(self, t0: float, order: int) -> JetVec4:
        if order == 0:
            return JetVec4(t0, self(float(t0))[None, :])
        tv = jets.lift_variable(t0, order)
        parts = []
        for c in self.components:
            v = c(tv)
            parts.append(v if isinstance(v, Jet) else jets.lift_constant(float(v), t0, order))
        return jets.stack(parts)

    def derivative(self, t, k: int = 1):
        return self.jet(float(t), k).d(k)

    def frame_jets(self, t: float, order: int = 6) -> "FrameJets":
        self.check_domain(t)
        return frenet_jets(self, t, order)

    def state(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Frenet frame (rows e1..e4) and point at ``t``."""
        fj = self.frame_jets(t, 0)
        return np.array([v.value for v in fj.e]), fj.gamma.value

    def reparametrized(self, phi: Callable, name: str | None = None) -> "CurveModel":
        """The curve ``u -> self(phi(u))``; ``phi`` must be jet-polymorphic."""
        comps = [(lambda u, c=c: c(phi(u))) for c in self.components]
        return CurveModel(comps, name=name or self.name)


@dataclass
class FrameJets:
    """Jets (in the curve parameter) of a framed curve at ``t``."""

    t: float
    gamma: JetVec4
    e: tuple  # four JetVec4, e1..e4
    l: Jet
    kappa1: Jet
    kappa4: Jet
    kappa6: Jet

    def truncate(self, order: int) -> "FrameJets":
        return FrameJets(
            self.t,
            self.gamma.truncate(order),
            tuple(v.truncate(order) for v in self.e),
            self.l.truncate(order),
            self.kappa1.truncate(order),
            self.kappa4.truncate(order),
            self.kappa6.truncate(order),
        )


@dataclass
class FrenetFrame:
    t: float
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray
    e4: np.ndarray
    l: float
    kappa1: float
    kappa4: float
    kappa6: float
    jets: FrameJets | None = None

    @property
    def matrix(self) -> np.ndarray:
        return np.array([self.e1, self.e2, self.e3, self.e4])


def frenet_jets(curve: CurveModel, t: float, order: int = 6, tol: float = FRAME_TOL) -> FrameJets:
    """Frenet-type frame jets of an explicit curve at ``t``."""
    t = float(t)
    n = int(order)
    g = curve.jet(t, n + 4)
    gp = g.derivative()
    l = jets.norm_or_none(gp, tol)
    if l is None:
        raise FrameDegenerate(t, 1, "gamma' vanishes")
    e1 = gp / l
    e1p = e1.derivative()
    k1 = jets.norm_or_none(e1p, tol)
    if k1 is None:
        raise FrameDegenerate(t, 2, "e1' vanishes")
    e2 = e1p / k1
    v = e2.derivative() + k1.truncate(n + 1) * e1.truncate(n + 1)
    k4 = jets.norm_or_none(v, tol)
    if k4 is None:
        raise FrameDegenerate(t, 3, "e2' + k1 e1 vanishes")
    e3 = v / k4
    e1c, e2c = e1.truncate(n + 1), e2.truncate(n + 1)
    e4 = jets.wedge3(e1c, e2c, e3)
    k6 = jets.dot(e3.derivative(), e4.truncate(n))
    return FrameJets(
        t,
        g.truncate(n),
        (e1.truncate(n), e2.truncate(n), e3.truncate(n), e4.truncate(n)),
        l.truncate(n),
        k1.truncate(n),
        k4.truncate(n),
        k6,
    )


def _frame_from_jets(fj: FrameJets) -> FrenetFrame:
    return FrenetFrame(
        fj.t,
        *(v.value for v in fj.e),
        fj.l.value,
        fj.kappa1.value,
        fj.kappa4.value,
        fj.kappa6.value,
        jets=fj,
    )


def frenet_frame(curve, t: float, order: int = 6) -> FrenetFrame:
    """Frenet-type frame at ``t`` with curvature jets up to ``order``."""
    if isinstance(curve, CurveModel):
        curve.check_domain(t)
        return _frame_from_jets(frenet_jets(curve, t, order))
    return _frame_from_jets(curve.frame_jets(t, order))


def osculation_type(curve: CurveModel, t: float, max_order: int = 8, rel_tol: float = 1e-9) -> str:
    """Rank of (gamma', ..., gamma^(max_order)) at ``t`` as an osculation label."""
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    g = curve.jet(float(t), max_order)
    G = g.coeffs[1:].T
    sv = np.linalg.svd(G, compute_uv=False)
    rank = 0 if sv[0] == 0 else int(np.sum(sv > rel_tol * sv[0]))
    if rank == 4:
        return "finite"
    if rank == 3:
        return "pseudo_finite"
    return f"rank {rank}"


def frenet_matrix(l, k1, k4, k6):
    """Coefficient matrix K with (e1, e2, e3, e4)' = K (e1, e2, e3, e4)."""
    del l
    z = np.zeros_like(np.asarray(k1, dtype=float))
    return np.stack(
        [
            np.stack([z, k1, z, z], -1),
            np.stack([-k1, z, k4, z], -1),
            np.stack([z, -k4, z, k6], -1),
            np.stack([z, z, -k6, z], -1),
        ],
        -2,
    )


def _frenet_matrix_jet(k1: Jet, k4: Jet, k6: Jet) -> Jet:
    c = frenet_matrix(None, k1.coeffs, k4.coeffs, k6.coeffs)
    return Jet(k1.base_point, c)


class CurvatureCurve:
    """Framed curve determined by l, k1, k4, k6 and an initial frame.

    The Frenet equations are integrated once on a fine node grid covering
    ``domain``; values elsewhere are obtained by a short RK4 run from the
    nearest node.  The initial frame at ``t_ref`` is (E1, E2, E3, E1^E2^E3)
    unless given, and ``gamma(t_ref) = 0``.
    """

    def __init__(self, l, kappa1, kappa4, kappa6, domain=(-1.0, 1.0), t_ref: float | None = None,
                 initial=None, step: float = 1e-3, node_spacing: float = 0.01, name: str | None = None):
        self.l, self.kappa1, self.kappa4, self.kappa6 = (Expr(x) for x in (l, kappa1, kappa4, kappa6))
        self.domain = (float(domain[0]), float(domain[1]))
        if not self.domain[0] < self.domain[1]:
            raise ValueError("empty domain")
        lo, hi = self.domain
        self.t_ref = float(t_ref) if t_ref is not None else (0.0 if lo <= 0.0 <= hi else lo)
        if initial is None:
            initial = np.eye(4)
            initial[3] = jets.wedge3(initial[0], initial[1], initial[2])
        self.initial = np.asarray(initial, dtype=float)
        self.step = step
        self.name = name
        left = np.linspace(self.t_ref, lo, max(2, math.ceil((self.t_ref - lo) / node_spacing) + 1))
        right = np.linspace(self.t_ref, hi, max(2, math.ceil((hi - self.t_ref) / node_spacing) + 1))
        parts_t, parts_W, parts_g = [], [], []
        for seg in (left, right):
            if seg[0] == seg[-1]:
                continue
            W, g = flow.integrate(self._coef, self._vel, seg, self.initial, np.zeros(4), step)
            parts_t.append(seg)
            parts_W.append(W)
            parts_g.append(g)
        t_all = np.concatenate(parts_t)
        order = np.argsort(t_all, kind="stable")
        t_all = t_all[order]
        keep = np.concatenate([[True], np.diff(t_all) > 0])
        self._nodes = t_all[keep]
        self._W = np.concatenate(parts_W)[order][keep]
        self._g = np.concatenate(parts_g)[order][keep]

    def _coef(self, ts):
        return frenet_matrix(None, self.kappa1(ts), self.kappa4(ts), self.kappa6(ts))

    def _vel(self, ts):
        lv = self.l(ts)
        z = np.zeros_like(lv)
        return np.stack([lv, z, z, z], -1)

    def state(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Frame (rows e1..e4) and point at ``t``."""
        t = float(t)
        lo, hi = self.domain
        if t < lo - 1e-12 or t > hi + 1e-12:
            raise ValueError(f"t={t!r} outside domain [{lo}, {hi}]")
        i = int(np.argmin(np.abs(self._nodes - t)))
        t0 = self._nodes[i]
        if t == t0:
            return self._W[i].copy(), self._g[i].copy()
        W, g = flow.integrate(self._coef, self._vel, [t0, t], self._W[i], self._g[i], self.step)
        return W[-1], g[-1]

    def __call__(self, t):
        tt = np.asarray(t, dtype=float)
        if tt.ndim == 0:
            return self.state(float(tt))[1]
        return np.array([self.state(x)[1] for x in tt])

    def frame_jets(self, t: float, order: int = 6) -> FrameJets:
        t = float(t)
        n = int(order)
        W, g = self.state(t)
        l, k1, k4, k6 = (x.jet(t, n) for x in (self.l, self.kappa1, self.kappa4, self.kappa6))
        if n == 0:
            E = Jet(t, W[None])
            gam = JetVec4(t, g[None])
        else:
            K = _frenet_matrix_jet(k1.truncate(n - 1), k4.truncate(n - 1), k6.truncate(n - 1))
            E = jets.linear_flow(K, W)
            gam = (l.truncate(n - 1) * E[0].truncate(n - 1)).antiderivative(g)
        return FrameJets(t, gam, tuple(E[i] for i in range(4)), l, k1, k4, k6)

    def jet(self, t0: float, order: int) -> JetVec4:
        return self.frame_jets(t0, order).gamma


class JetCurve:
    """Curve defined by a function returning its jet at a point.

    ``jet_fn(t, order)`` must return a JetVec4.  Values are the order-0 jets.
    """

    def __init__(self, jet_fn: Callable[[float, int], JetVec4], domain=(-math.inf, math.inf), name=None):
        self._jet_fn = jet_fn
        self.domain = (float(domain[0]), float(domain[1]))
        self.name = name

    def jet(self, t0: float, order: int) -> JetVec4:
        return self._jet_fn(float(t0), int(order))

    def __call__(self, t):
        tt = np.asarray(t, dtype=float)
        if tt.ndim == 0:
            return self.jet(float(tt), 0).value
        return np.array([self.jet(float(x), 0).value for x in tt.ravel()]).reshape(tt.shape + (4,))
