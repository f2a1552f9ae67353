"""Singularities of pseudo-non-degenerate two-ruled hypersurfaces.

Everything is evaluated in the adapted unit-speed gauge, where

    f_t = b1 X + b2 Y + (b3 + s + r a) X' + b4 Z,  f_s = X,  f_r = Y.

For a frontal (b4 = 0) the identifier of singularities is
``lambda = b3 + s + r a`` and the null vector field is
``eta = d/dt - b1 d/ds - b2 d/dr``.  Iterated eta-derivatives are computed
as t-derivatives of lambda along the integral curve of eta, and compared
with the closed-form criteria (ce, q0, q1, q2).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import jets
from .framefield import InvariantJets, LocalGauge, local_frame_jets
from .hypersurface import TwoRuled
from .jets import Jet
from .striction import omega

__all__ = [
    "TAU",
    "SingularityReport",
    "CriterionError",
    "lambda_eta",
    "eta_derivatives",
    "closed_forms",
    "q1_without_a_factor",
    "classify_front_point",
    "whitney_test",
    "psi_bar",
    "crosscap_test",
    "classify_point",
    "classify_adapted",
    "singular_sets",
    "SingularSets",
]

TAU = 1e-9
LABELS = ("regular", "CE", "SW_A", "SW_B", "CB", "CCR_I", "WU_I", "unresolved")


class CriterionError(ValueError):
    pass


@dataclass
class SingularityReport:
    point: tuple  # (t, s, r) in the coordinates of the queried hypersurface
    label: str
    witnesses: dict
    tolerances: dict
    gauge_info: dict = field(default_factory=dict)
    adapted_point: tuple = ()
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["point"] = list(self.point)
        d["adapted_point"] = list(self.adapted_point)
        return d


# ---------------------------------------------------------------------------
# lambda, eta and their derivatives
# ---------------------------------------------------------------------------


@dataclass
class LambdaEta:
    f: TwoRuled

    def lam(self, t: float, s: float, r: float, order: int = 0) -> Jet:
        """Jet in t of lambda(t, s, r) with s, r frozen."""
        inv = self.f.invariants(t, order)
        return inv.b3 + s + r * inv.a

    def eta(self, t: float):
        """Coefficients (1, -b1, -b2) of eta at t."""
        inv = self.f.invariants(t, 0)
        return (1.0, -inv.b1.value, -inv.b2.value)


def lambda_eta(f: TwoRuled, check_frontal: bool = True, tol: float = TAU) -> LambdaEta:
    f = f.unit_speed()
    if check_frontal:
        for t in np.linspace(*f.domain, 21):
            if abs(f.invariants(float(t), 0).b4.value) > tol:
                raise CriterionError(f"not a frontal: b4({float(t)!r}) != 0")
    return LambdaEta(f)


def _eta_curve(inv: InvariantJets, s0: float, r0: float) -> tuple[Jet, Jet]:
    """s(t), r(t) of the integral curve of eta through (t0, s0, r0)."""
    n = inv.order
    s = (-inv.b1.truncate(n - 1)).antiderivative(s0)
    r = (-inv.b2.truncate(n - 1)).antiderivative(r0)
    return s, r


def eta_derivatives(inv: InvariantJets, s: float, r: float, depth: int = 3) -> tuple:
    """(eta lambda, eta eta lambda, ...) at (t0, s, r) up to ``depth``."""
    if inv.order < depth:
        raise CriterionError(f"jet order insufficient: need {depth}, have {inv.order}")
    sj, rj = _eta_curve(inv, s, r)
    lam = inv.b3 + sj + rj * inv.a
    return tuple(lam.d(k) for k in range(1, depth + 1))


def closed_forms(inv: InvariantJets, r: float) -> dict:
    """Closed-form criterion values at (t0, r); needs jets of order 3."""
    if inv.order < 3:
        raise CriterionError("jet order insufficient: closed forms need order 3")
    a, a1, a2, a3 = (inv.a.d(k) for k in range(4))
    b1, b1p, b1pp = (inv.b1.d(k) for k in range(3))
    b2, b2p, b2pp = (inv.b2.d(k) for k in range(3))
    b3p, b3pp, b3ppp = (inv.b3.d(k) for k in range(1, 4))
    ce = r * a1 - a * b2 - b1 + b3p
    q0 = -a * b2p + r * a2 - 2 * b2 * a1 - b1p + b3pp
    q1 = a * (b2 * a2 - a1 * b2p) + (b1 - b3p) * a2 - 2 * b2 * a1**2 - a1 * b1p + a1 * b3pp
    q2 = (a * (b2 * a3 - a1 * b2pp) + a3 * (b1 - b3p) - 3 * b2 * a1 * a2
          - 3 * a1**2 * b2p + a1 * (-b1pp + b3ppp))
    omega_v = a * b2 + b1 - b3p
    return {"ce": ce, "q0": q0, "q1": q1, "q2": q2, "a_prime": a1, "sw_a_base": -omega_v, "omega": omega_v}


def q1_without_a_factor(inv: InvariantJets) -> float:
    """The swallowtail quantity with the first bracket not multiplied by a.

    Kept only to document the difference from :func:`closed_forms`; it agrees
    with a' * (eta eta lambda) on the swallowtail locus only where a = 1 or
    b2 a'' = a' b2'.
    """
    a, a1, a2 = (inv.a.d(k) for k in range(3))
    b1, b1p = inv.b1.d(0), inv.b1.d(1)
    b2, b2p = inv.b2.d(0), inv.b2.d(1)
    b3p, b3pp = inv.b3.d(1), inv.b3.d(2)
    return (b2 * a2 - a1 * b2p) + (b1 - b3p) * a2 - 2 * b2 * a1**2 - a1 * b1p + a1 * b3pp


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


def _tol_dict(tau: float) -> dict:
    return {"tau": tau, "locus_rel": tau}


def classify_front_point(inv: InvariantJets, s: float, r: float, tau: float = TAU) -> tuple[str, dict]:
    """Front-point decision table: CE, SW_A, SW_B, CB or unresolved.

    Returns (label, witnesses).  ``inv`` must have order >= 3.
    """
    lam = inv.b3.d(0) + s + r * inv.a.d(0)
    if abs(lam) > tau:
        raise CriterionError(f"point is not singular (lambda = {lam:.3e})")
    delta = inv.delta.d(0)
    if abs(delta) <= tau:
        raise CriterionError(f"not a front at this point (delta = {delta:.3e})")
    cf = closed_forms(inv, r)
    e1, e2, e3 = eta_derivatives(inv, s, r, 3)
    w = {
        "lambda": lam,
        "eta_lambda": cf["ce"],
        "eta_lambda_jet": e1,
        "eta_eta_lambda_jet": e2,
        "eta_eta_eta_lambda_jet": e3,
        "q0": cf["q0"],
        "q1": cf["q1"],
        "q2": cf["q2"],
        "a_prime": cf["a_prime"],
        "delta": delta,
        "delta_prime": inv.delta.d(1) if inv.delta.order >= 1 else None,
        "b4": inv.b4.d(0),
    }
    ap = cf["a_prime"]
    if abs(cf["ce"]) > tau:
        return "CE", w
    if abs(ap) <= tau:
        if abs(cf["sw_a_base"]) <= tau and abs(cf["q0"]) > tau:
            return "SW_A", w
        return "unresolved", w
    locus = abs(r - cf["omega"] / ap) <= tau * (1 + abs(r))
    w["sw_locus_residual"] = abs(r - cf["omega"] / ap)
    if locus and abs(cf["q1"]) > tau:
        return "SW_B", w
    if locus and abs(cf["q1"]) <= tau and abs(cf["q2"]) > tau:
        return "CB", w
    return "unresolved", w


def _straightened_fdet(inv: InvariantJets, s0: float, r0: float):
    """det(f_S, f_R, f_RT, f_TT), det(f_S, f_R, f_ST, f_TT) and |f_T| where T runs along eta."""
    W, g = local_frame_jets(inv.truncate(3))
    X, Y = W[0], W[1]
    sj, rj = _eta_curve(inv.truncate(3), s0, r0)
    fc = g + sj * X + rj * Y
    fS, fR = X.value, Y.value
    fST, fRT = X.d(1), Y.d(1)
    fT, fTT = fc.d(1), fc.d(2)
    return (
        jets.det4(fS, fR, fRT, fTT),
        jets.det4(fS, fR, fST, fTT),
        float(np.linalg.norm(fT)),
    )


def whitney_test(inv: InvariantJets, s: float, r: float, tau: float = TAU) -> tuple[str, dict]:
    """Whitney umbrella x interval test at a point where the null direction kills f.

    Requires f_T = 0 for T along eta (i.e. lambda = 0 and b4 = 0).  The
    label is WU_I iff b4' != 0; it is cross-checked against the
    determinant criterion evaluated from jets of f along eta.
    """
    lam = inv.b3.d(0) + s + r * inv.a.d(0)
    b4, b4p = inv.b4.d(0), inv.b4.d(1)
    det_rt, det_st, fT = _straightened_fdet(inv, s, r)
    w = {
        "lambda": lam,
        "b4": b4,
        "b4_prime": b4p,
        "det_fs_fr_frt_ftt": det_rt,
        "det_fs_fr_fst_ftt": det_st,
        "abs_f_T": fT,
        "a": inv.a.d(0),
    }
    if abs(lam) > tau or abs(b4) > tau:
        raise CriterionError(
            f"preconditions unmet: f has no null direction here (lambda = {lam:.3e}, b4 = {b4:.3e})"
        )
    closed = abs(b4p) > tau
    by_det = abs(det_rt) > tau or abs(det_st) > tau
    w["determinant_agrees"] = closed == by_det
    if closed != by_det:
        return "unresolved", w
    return ("WU_I" if closed else "unresolved"), w


def _psi_bar_path(inv: InvariantJets, W: Jet, sj: Jet, rj: Jet, nu: Jet, nup: Jet) -> Jet:
    """det(xi1 f, xi2 f, nu, eta nu) along a path given by jets in one variable."""
    X, Y, Xp, Z = (W[i] for i in range(4))
    a, b1, b2, b3, b4 = inv.a, inv.b1, inv.b2, inv.b3, inv.b4
    b3p, ap = inv.b3p, inv.ap
    lam = b3 + sj + rj * a
    xi1f = (b1 - b3p - rj * ap) * X + b2 * Y + lam * Xp + b4 * Z
    xi2f = -a * X + Y
    return jets.det4(xi1f, xi2f, nu, nup)


@dataclass
class _PathInv:
    a: Jet
    b1: Jet
    b2: Jet
    b3: Jet
    b4: Jet
    b3p: Jet
    ap: Jet


def psi_bar(inv: InvariantJets, s: float, r: float) -> tuple[float, float, float]:
    """psi_bar and its derivatives along xi1 = d/dt - (b3' + r a') d/ds, xi2 = -a d/ds + d/dr."""
    if inv.order < 3:
        raise CriterionError("jet order insufficient: psi_bar needs order 3")
    t0 = inv.t
    W, _ = local_frame_jets(inv.truncate(3))
    nu2 = jets.wedge3(W[0].truncate(2), W[1].truncate(2), W[2].truncate(2))
    nu, nup = nu2.truncate(1), nu2.derivative()
    W1 = W.truncate(1)

    # path 1: (t0 + u, s - c u, r), c = b3'(t0) + r a'(t0)
    c = inv.b3.d(1) + r * inv.a.d(1)
    tv = jets.lift_variable(t0, 1)
    s1 = s - c * (tv - t0)
    r1 = jets.lift_constant(r, t0, 1)
    p1 = _PathInv(inv.a.truncate(1), inv.b1.truncate(1), inv.b2.truncate(1), inv.b3.truncate(1),
                  inv.b4.truncate(1), inv.b3.derivative().truncate(1), inv.a.derivative().truncate(1))
    j1 = _psi_bar_path(p1, W1, s1, r1, nu, nup)

    # path 2: (t0, s - a u, r + u); t frozen, so every t-dependent factor is constant
    def const(x):
        return jets.lift_constant(x, 0.0, 1)

    uv = jets.lift_variable(0.0, 1)
    a0 = inv.a.d(0)
    s2 = s - a0 * uv
    r2 = r + uv
    p2 = _PathInv(const(a0), const(inv.b1.d(0)), const(inv.b2.d(0)), const(inv.b3.d(0)),
                  const(inv.b4.d(0)), const(inv.b3.d(1)), const(inv.a.d(1)))
    Wc = jets.lift_constant(W.value, 0.0, 1)
    j2 = _psi_bar_path(p2, Wc, s2, r2, const(nu.value), const(nup.value))
    return j1.d(0), j1.d(1), j2.d(1)


def crosscap_test(inv: InvariantJets, s: float, r: float, tau: float = TAU) -> tuple[str, dict]:
    """Cuspidal cross cap x interval test at a frontal singular point.

    Two derivations are computed: the psi_bar criterion along the adapted
    triple, and the (delta, delta') shortcut.  Disagreement gives unresolved.
    """
    e1 = eta_derivatives(inv, s, r, 1)[0]
    lam = inv.b3.d(0) + s + r * inv.a.d(0)
    pb, x1, x2 = psi_bar(inv, s, r)
    d0, d1 = inv.delta.d(0), inv.delta.d(1)
    w = {
        "lambda": lam,
        "eta_lambda": e1,
        "psi_bar": pb,
        "xi1_psi_bar": x1,
        "xi2_psi_bar": x2,
        "delta": d0,
        "delta_prime": d1,
        "b4": inv.b4.d(0),
    }
    if abs(e1) <= tau:
        raise CriterionError("criterion inapplicable: eta lambda vanishes")
    by_psi = abs(pb) <= tau and math.hypot(x1, x2) > tau
    by_delta = abs(d0) <= tau and abs(d1) > tau
    w["psi_delta_agree"] = by_psi == by_delta
    if by_psi and by_delta:
        return "CCR_I", w
    return "unresolved", w


def _frontal_here(inv: InvariantJets, tau: float) -> bool:
    return bool(np.all(np.abs(inv.b4.coeffs) <= tau))


def classify_point(f: TwoRuled, p, tau: float = TAU, order: int = 6) -> SingularityReport:
    """Stratum of f at p = (t, s, r), given in f's own coordinates."""
    t, s, r = (float(x) for x in p)
    lg: LocalGauge = f.local(t, order)
    sh, rh = lg.to_adapted(s, r)
    return classify_adapted(lg.inv, sh, rh, tau, point=(t, s, r), gauge=lg)


def classify_adapted(inv: InvariantJets, s: float, r: float, tau: float = TAU, point=None,
                     gauge: LocalGauge | None = None) -> SingularityReport:
    lam = inv.b3.d(0) + s + r * inv.a.d(0)
    b4 = inv.b4.d(0)
    info = {}
    if gauge is not None:
        info = {"t_tilde": gauge.t_tilde, "theta": gauge.theta, "speed": gauge.speed}
    point = point if point is not None else (inv.t, s, r)
    adapted = (inv.t, s, r)
    tols = _tol_dict(tau)
    if abs(lam) > tau or abs(b4) > tau:
        return SingularityReport(point, "regular", {"lambda": lam, "b4": b4}, tols, info, adapted)
    if not _frontal_here(inv, tau):
        label, w = whitney_test(inv, s, r, tau)
        return SingularityReport(point, label, w, tols, info, adapted)
    if abs(inv.delta.d(0)) > tau:
        label, w = classify_front_point(inv, s, r, tau)
        return SingularityReport(point, label, w, tols, info, adapted)
    try:
        label, w = crosscap_test(inv, s, r, tau)
    except CriterionError as exc:
        return SingularityReport(point, "unresolved", {"lambda": lam, "delta": inv.delta.d(0)}, tols, info,
                                 adapted, [str(exc)])
    return SingularityReport(point, label, w, tols, info, adapted)


# ---------------------------------------------------------------------------
# singular sets
# ---------------------------------------------------------------------------


@dataclass
class SingularSets:
    t: np.ndarray
    a: np.ndarray
    b3: np.ndarray
    s2_t: np.ndarray  # nodes where the second singular set is defined
    s2_s: np.ndarray
    s2_r: np.ndarray
    s2_points: np.ndarray  # images f(S2) in R^4

    def s_on_S(self, i: int, r):
        return -self.b3[i] - self.a[i] * np.asarray(r, dtype=float)


def singular_sets(f: TwoRuled, grid=None, tau: float = TAU) -> SingularSets:
    """S(f) as the graph s = -b3 - r a and S2(f) = {r = omega / a'} where |a'| > tau."""
    fu = f.unit_speed()
    grid = np.linspace(*fu.domain, 51) if grid is None else np.asarray(grid, dtype=float)
    A, B3, T2, S2, R2, P2 = [], [], [], [], [], []
    for t in grid:
        inv = fu.invariants(float(t), 2)
        A.append(inv.a.d(0))
        B3.append(inv.b3.d(0))
        ap = inv.a.d(1)
        if abs(ap) > tau:
            w = omega(inv).d(0)
            r = w / ap
            s = -inv.b3.d(0) - inv.a.d(0) * r
            T2.append(float(t))
            S2.append(s)
            R2.append(r)
            P2.append(fu.evaluate(float(t), s, r))
    return SingularSets(grid, np.array(A), np.array(B3), np.array(T2), np.array(S2), np.array(R2),
                        np.array(P2).reshape(-1, 4))
