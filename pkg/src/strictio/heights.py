"""Height functions along a framed curve and the developable frontals S1..S4.

For a unit vector field v along gamma, H_v(t, x) = <v(t), x - gamma(t)>.
The envelope {H_v = H_v' = 0} for v = e_i is swept by the two-ruled
hypersurface S_i built here.  Each S_i comes with two independent accounts
of its invariant data: closed forms in l, k1, k4, k6 and the gauge angle
theta, and the generic numerical extraction on its directors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import jets
from .curve import JetCurve
from .framefield import GaugeViolated, InvariantJets, _two_sided_ivp
from .hypersurface import TwoRuled, classify_family
from .jets import Jet
from .singular import TAU, SingularityReport, classify_adapted
from .striction import TYPE_TOL

__all__ = [
    "HeightFamily",
    "DevelopableSi",
    "ApplicabilityError",
    "build_Si",
    "envelope_residual",
    "si_invariant_data",
    "SiInvariantData",
    "s1_lambda_chain",
    "w1c_closed",
    "s1_classify",
    "f1cone",
    "s1_cone_test",
    "s1_w1s_on_locus",
    "raw_lambda",
    "si_singularity_scan",
]

APPLICABILITY_TOL = 1e-9


class ApplicabilityError(ValueError):
    pass


def _fj(curve, t: float, order: int):
    return curve.frame_jets(float(t), order)


# ---------------------------------------------------------------------------
# height functions
# ---------------------------------------------------------------------------


@dataclass
class HeightFamily:
    curve: object
    i: int

    def __post_init__(self):
        if self.i not in (1, 2, 3, 4):
            raise ValueError("direction index must be 1..4")

    def H(self, t: float, x) -> float:
        fj = _fj(self.curve, t, 0)
        return float(fj.e[self.i - 1].value @ (np.asarray(x, dtype=float) - fj.gamma.value))

    def H_prime(self, t: float, x) -> float:
        """d/dt H_v(t, x) with x fixed."""
        fj = _fj(self.curve, t, 1)
        v = fj.e[self.i - 1]
        d = np.asarray(x, dtype=float) - fj.gamma.value
        return float(v.d(1) @ d - v.value @ fj.gamma.d(1))


# ---------------------------------------------------------------------------
# S1..S4
# ---------------------------------------------------------------------------


def _directors(i: int, fj):
    """(base, X, Y) jets of S_i from frame jets."""
    e1, e2, e3, e4 = fj.e
    k1, k4, k6 = fj.kappa1, fj.kappa4, fj.kappa6
    if i == 1:
        return fj.gamma + (fj.l / k1) * e2, e3, e4
    if i == 2:
        A2 = jets.sqrt(k1 * k1 + k4 * k4)
        return fj.gamma, e4, (k4 * e1 + k1 * e3) / A2
    if i == 3:
        A3 = jets.sqrt(k4 * k4 + k6 * k6)
        return fj.gamma, e1, (k6 * e2 + k4 * e4) / A3
    return fj.gamma, e1, e2


def _applicability(i: int, k1: float, k4: float, k6: float) -> tuple[bool, str]:
    tol = APPLICABILITY_TOL
    if i == 1:
        return abs(k1) > tol, "kappa1"
    if i == 2:
        return math.hypot(k1, k4) > tol, "(kappa1, kappa4)"
    if i == 3:
        return math.hypot(k4, k6) > tol, "(kappa4, kappa6)"
    return abs(k6) > tol, "kappa6"


def _theta_rate(i: int, fj) -> Jet:
    """Gauge angle rate in the curve parameter, as a jet."""
    k1, k4, k6 = fj.kappa1, fj.kappa4, fj.kappa6
    if i == 1:
        return k6
    if i == 2:
        return -k1 * k6 / jets.sqrt(k1 * k1 + k4 * k4)
    if i == 3:
        return k1 * k6 / jets.sqrt(k4 * k4 + k6 * k6)
    return k1


def _d(j: Jet) -> Jet:
    return j.derivative()


@dataclass
class DevelopableSi:
    i: int
    curve: object
    surface: TwoRuled
    domain: tuple
    t_ref: float
    theta0: float
    orientation: float  # det(e1, e2, e3, e4) of the curve's frame
    flags: dict = field(default_factory=dict)
    _theta_sol: object = None

    def theta(self, t: float) -> float:
        return float(self._theta_sol.sol(float(t))[0]) if self._theta_sol is not None else self.theta0

    def frame_jets(self, t: float, order: int):
        return _fj(self.curve, t, order)


def _branch_value(i: int, fj, theta: float) -> float:
    P, Q = _branch_values(i, fj)
    return P * math.cos(theta) + Q * math.sin(theta)


def _branch_values(i: int, fj) -> tuple[float, float]:
    k1, k4, k6 = (x.d(0) for x in (fj.kappa1, fj.kappa4, fj.kappa6))
    if i == 1:
        return k4, 0.0
    if i == 4:
        return 0.0, k4
    k1p, k4p, k6p = (x.d(1) for x in (fj.kappa1, fj.kappa4, fj.kappa6))
    if i == 2:
        return k4 * k6 * math.hypot(k1, k4), k1p * k4 - k1 * k4p
    return k1 * k4 * math.hypot(k4, k6), k4p * k6 - k4 * k6p


def build_Si(curve, i: int, grid=None, theta0: float | None = None, t_ref: float | None = None) -> DevelopableSi:
    """S_i along ``curve`` (a CurveModel or CurvatureCurve).

    The gauge angle theta starts at ``theta0`` (default: maximal branch
    margin at ``t_ref``) and is integrated with the rate of S_i.
    """
    if i not in (1, 2, 3, 4):
        raise ValueError("direction index must be 1..4")
    lo, hi = float(curve.domain[0]), float(curve.domain[1])
    grid = np.linspace(lo, hi, 41) if grid is None else np.asarray(grid, dtype=float)
    t_ref = 0.5 * (lo + hi) if t_ref is None else float(t_ref)

    for t in grid:
        fj = _fj(curve, float(t), 0)
        ok, what = _applicability(i, fj.kappa1.d(0), fj.kappa4.d(0), fj.kappa6.d(0))
        if not ok:
            raise ApplicabilityError(f"S{i} not applicable: {what} vanishes at t={float(t)!r}")

    fj0 = _fj(curve, t_ref, 1)
    E = np.array([e.value for e in fj0.e])
    orientation = float(np.sign(np.linalg.det(E)))
    if theta0 is None:
        P, Q = _branch_values(i, fj0)
        theta0 = math.atan2(Q, P)

    def rhs(t, y):
        return [float(_theta_rate(i, _fj(curve, t, 0)).d(0))]

    sol = _two_sided_ivp(rhs, t_ref, (lo, hi), [float(theta0)], 1e-12, 1e-13)

    branch = np.array([_branch_value(i, _fj(curve, float(t), 1), float(sol.sol(float(t))[0])) for t in grid])
    margins = np.abs(branch)
    if margins.min() <= APPLICABILITY_TOL:
        k = int(np.argmin(margins))
        raise GaugeViolated(f"S{i} gauge branch condition fails;", float(margins[k]), float(grid[k]))
    # a sign change between nodes hides a zero the node test cannot see
    flips = np.flatnonzero(np.sign(branch[:-1]) != np.sign(branch[1:]))
    if flips.size:
        k = int(flips[0])
        raise GaugeViolated(f"S{i} gauge branch condition fails between nodes;",
                            float(min(margins[k], margins[k + 1])), float(0.5 * (grid[k] + grid[k + 1])))

    def comp(k):
        def fn(t, order):
            fj = _fj(curve, t, order)
            return jets.JetVec4(float(t), _directors(i, fj)[k].coeffs)
        return JetCurve(fn, (lo, hi), name=f"S{i}.{'gXY'[k]}")

    surf = TwoRuled(comp(0), comp(1), comp(2), (lo, hi), name=f"S{i}",
                    gauge_options={"t_ref": t_ref, "theta0": float(theta0)})
    fam = classify_family(surf, grid)
    flags = {
        "applicable": True,
        "family": fam.label,
        "pseudo_non_degenerate": fam.label == "pseudo_non_degenerate",
        "branch_margin_min": float(min(margins)),
        "branch_margin_start": float(margins[0]),
    }
    return DevelopableSi(i, curve, surf, (lo, hi), t_ref, float(theta0), orientation, flags, sol)


def envelope_residual(Si: DevelopableSi, t: float, s: float, r: float) -> tuple[float, float]:
    hf = HeightFamily(Si.curve, Si.i)
    x = Si.surface.evaluate(float(t), s, r)
    return hf.H(t, x), hf.H_prime(t, x)


# ---------------------------------------------------------------------------
# closed-form invariant data
# ---------------------------------------------------------------------------


def _closed_raw(Si: DevelopableSi, t: float, order: int) -> dict:
    """Closed-form a, delta, b1..b4 and rho = |X^'| as jets in the curve parameter."""
    i, eps = Si.i, Si.orientation
    fj = _fj(Si.curve, t, order + 1)
    l, k1, k4, k6 = fj.l, fj.kappa1, fj.kappa4, fj.kappa6
    n = order
    theta = _theta_rate(i, fj).truncate(n - 1).antiderivative(Si.theta(t)) if n > 0 else \
        jets.lift_constant(Si.theta(t), t, 0)
    c, s = jets.cos(theta), jets.sin(theta)
    l, k1, k4, k6 = (x.truncate(n) for x in (l, k1, k4, k6))
    dk1, dk4, dk6, dl = (_d(x) for x in (fj.kappa1, fj.kappa4, fj.kappa6, fj.l))
    zero = k1 * 0.0
    if i == 1:
        rho = jets.fabs(c * k4)
        a = s / c
        delta = -eps * k1 / rho
        b1 = l * k4 * c / (k1 * rho)
        b2 = l * k4 * s / (k1 * rho)
        b3 = (l * dk1 - dl * k1) / (k1 * k1 * k4 * c)
    elif i == 2:
        A2 = jets.sqrt(k1 * k1 + k4 * k4)
        D = k4 * k6 * A2 * c + (dk1 * k4 - k1 * dk4) * s
        rho = jets.fabs(D) / (A2 * A2)
        a = (k4 * k6 * A2 * s + (k1 * dk4 - dk1 * k4) * c) / D
        delta = eps * A2 / rho
        b1 = -l * k4 * s / (A2 * rho)
        b2 = l * k4 * c / (A2 * rho)
        b3 = l * k1 * A2 / D
    elif i == 3:
        A3 = jets.sqrt(k4 * k4 + k6 * k6)
        D = k1 * k4 * A3 * c + (dk4 * k6 - k4 * dk6) * s
        rho = jets.fabs(D) / (A3 * A3)
        a = (k1 * k4 * A3 * s + (k4 * dk6 - dk4 * k6) * c) / D
        delta = -eps * A3 / rho
        b1 = l * c / rho
        b2 = l * s / rho
        b3 = zero
    else:
        rho = jets.fabs(k4 * s)
        a = -c / s
        delta = -eps * k6 / rho
        b1 = l * c / rho
        b2 = l * s / rho
        b3 = zero
    return {"a": a, "delta": delta, "b1": b1, "b2": b2, "b3": b3, "b4": zero, "rho": rho, "theta": theta}


@dataclass
class SiInvariantData:
    """Closed-form invariant data of S_i in the adapted unit-speed gauge.

    ``invariant_jets(t, order)`` takes the curve parameter t and returns
    jets in the unit-speed parameter.
    """

    Si: DevelopableSi
    cross_check: float = float("nan")
    domain: tuple = ()

    def raw(self, t: float, order: int) -> dict:
        return _closed_raw(self.Si, float(t), order)

    def invariant_jets(self, t: float, order: int) -> InvariantJets:
        t = float(t)
        raw = _closed_raw(self.Si, t, order + 1)
        tau = raw["rho"].truncate(order).antiderivative(0.0)
        t_of = jets.invert(tau)
        out = {k: jets.compose(raw[k].truncate(order), t_of) for k in ("a", "delta", "b1", "b2", "b3", "b4")}
        return InvariantJets(t, **out)


def si_invariant_data(Si: DevelopableSi, grid=None, order: int = 3, tol: float = 1e-6,
                      check: bool = True) -> SiInvariantData:
    """Closed forms, cross-checked against numerical extraction on ``grid``."""
    data = SiInvariantData(Si, domain=Si.domain)
    if not check:
        return data
    grid = np.linspace(*Si.domain, 9) if grid is None else np.asarray(grid, dtype=float)
    worst = 0.0
    for t in grid:
        closed = data.invariant_jets(float(t), order)
        num = Si.surface.local(float(t), order).inv
        for k in ("a", "delta", "b1", "b2", "b3", "b4"):
            diff = np.max(np.abs(getattr(closed, k).coeffs - getattr(num, k).coeffs))
            worst = max(worst, float(diff))
    data.cross_check = worst
    if worst > tol:
        raise GaugeViolated(f"S{Si.i} closed-form invariants disagree with extraction;", worst, float("nan"))
    return data


# ---------------------------------------------------------------------------
# raw identifiers of singularities
# ---------------------------------------------------------------------------


def raw_lambda(Si: DevelopableSi, t: float, s: float, r: float) -> float:
    """Identifier of singularities of S_i in its own (raw) coordinates."""
    fj = _fj(Si.curve, t, 1)
    l, lp = fj.l.d(0), fj.l.d(1)
    k1, k1p = fj.kappa1.d(0), fj.kappa1.d(1)
    k4, k4p = fj.kappa4.d(0), fj.kappa4.d(1)
    k6, k6p = fj.kappa6.d(0), fj.kappa6.d(1)
    if Si.i == 1:
        return -s * k4 * k1**2 + lp * k1 - l * k1p
    if Si.i == 2:
        return math.hypot(k1, k4) * (l * k1 + s * k4 * k6) + r * (-k4 * k1p + k1 * k4p)
    if Si.i == 3:
        return s * k1 * k4 * math.hypot(k4, k6) + r * (-k6 * k4p + k4 * k6p)
    return r * k4


def _raw_line(Si: DevelopableSi, t: float):
    """(alpha, beta, c) with raw lambda = alpha s + beta r + c."""
    c0 = raw_lambda(Si, t, 0.0, 0.0)
    return raw_lambda(Si, t, 1.0, 0.0) - c0, raw_lambda(Si, t, 0.0, 1.0) - c0, c0


# ---------------------------------------------------------------------------
# S1 raw-gauge criteria
# ---------------------------------------------------------------------------


def _s1_eta_curve(fj, s0: float, r0: float, order: int) -> tuple[Jet, Jet]:
    """Integral curve of eta1 = d/dt - (l k4/k1 - r k6) d/ds - s k6 d/dr through (t, s0, r0)."""
    n = order
    l, k1, k4, k6 = (x.truncate(n - 1) for x in (fj.l, fj.kappa1, fj.kappa4, fj.kappa6))
    g = l * k4 / k1
    s = jets.lift_constant(s0, fj.t, n)
    r = jets.lift_constant(r0, fj.t, n)
    for _ in range(n + 1):
        s_new = (-g + r.truncate(n - 1) * k6).antiderivative(s0)
        r_new = (-s.truncate(n - 1) * k6).antiderivative(r0)
        s, r = s_new, r_new
    return s, r


def s1_lambda_chain(Si: DevelopableSi, t: float, s: float, r: float, depth: int = 3) -> tuple:
    """(lambda1, eta1 lambda1, eta1^2 lambda1, ...) at a raw point of S1."""
    if Si.i != 1:
        raise ValueError("S1 only")
    fj = _fj(Si.curve, t, depth + 1)
    sj, rj = _s1_eta_curve(fj, s, r, depth)
    l, k1, k4 = (x.truncate(depth) for x in (fj.l, fj.kappa1, fj.kappa4))
    lam = -sj * k4 * k1 * k1 + _d(fj.l) * k1 - l * _d(fj.kappa1)
    return tuple(lam.d(k) for k in range(depth + 1))


def w1c_closed(fj, theta: float, r_hat: float) -> float:
    """The cuspidal-edge quantity of S1 in terms of l, k1, k4, k6, theta and the adapted r."""
    l, lp, lpp = (fj.l.d(k) for k in range(3))
    k1, k1p, k1pp = (fj.kappa1.d(k) for k in range(3))
    k4, k4p = fj.kappa4.d(0), fj.kappa4.d(1)
    k6 = fj.kappa6.d(0)
    c, s = math.cos(theta), math.sin(theta)
    return (r_hat * k1**3 * k4**2 * k6
            + c * (-2 * k4 * l * k1p**2 + k1 * (2 * k4 * k1p * lp + l * (-k1p * k4p + k4 * k1pp))
                   - k1**2 * (k4**3 * l - k4p * lp + k4 * lpp))
            + s * (k1 * k4 * k6 * (l * k1p - k1 * lp)))


def _adapted_point(Si: DevelopableSi, t: float, s: float, r: float) -> tuple[float, float]:
    th = Si.theta(t)
    c, sn = math.cos(th), math.sin(th)
    # s X + r Y = s_hat (c X - sn Y) + r_hat (sn X + c Y)
    return c * s - sn * r, sn * s + c * r


def s1_classify(Si: DevelopableSi, p, tau: float = TAU, data: SiInvariantData | None = None) -> SingularityReport:
    """Stratum of S1 at the raw point p = (t, s, r).

    The raw-gauge chain eta1^k lambda1 decides the label; the general front
    criteria on the closed-form adapted data give a second label.
    """
    if Si.i != 1:
        raise ValueError("S1 only")
    t, s, r = (float(x) for x in p)
    fj = _fj(Si.curve, t, 4)
    k1, k1p = fj.kappa1.d(0), fj.kappa1.d(1)
    tols = {"tau": tau}
    if abs(k1) <= tau:
        w = {"kappa1": k1, "kappa1_prime": k1p}
        return SingularityReport((t, s, r), "CCR_I" if abs(k1p) > tau else "unresolved", w, tols,
                                 {"theta": Si.theta(t)})
    lam, w1c, w1s, w1b = s1_lambda_chain(Si, t, s, r, 3)
    th = Si.theta(t)
    sh, rh = _adapted_point(Si, t, s, r)
    w = {
        "lambda1": lam,
        "W1c": w1c,
        "W1s": w1s,
        "W1b": w1b,
        "W1c_closed": w1c_closed(fj, th, rh),
        "kappa6": fj.kappa6.d(0),
    }
    if abs(lam) > tau:
        label = "regular"
    elif abs(w1c) > tau:
        label = "CE"
    elif abs(w1s) > tau:
        label = "SW_B" if abs(fj.kappa6.d(0)) > tau else "SW_A"
    elif abs(fj.kappa6.d(0)) > tau and abs(w1b) > tau:
        label = "CB"
    else:
        label = "unresolved"
    data = data or si_invariant_data(Si, check=False)
    general = classify_adapted(data.invariant_jets(t, 6), sh, rh, tau)
    w["general_label"] = general.label
    w["labels_agree"] = general.label == label
    return SingularityReport((t, s, r), label, w, tols, {"theta": th, "theta0": Si.theta0},
                             (t, sh, rh))


def s1_w1s_on_locus(Si: DevelopableSi, t: float) -> tuple[float, float, float]:
    """(s, r, W1s) at the raw point of S1 where lambda1 = W1c = 0."""
    fj = _fj(Si.curve, t, 4)
    l, lp = fj.l.d(0), fj.l.d(1)
    k1, k1p = fj.kappa1.d(0), fj.kappa1.d(1)
    k4, k6 = fj.kappa4.d(0), fj.kappa6.d(0)
    s = (lp * k1 - l * k1p) / (k4 * k1**2)
    # eta1 lambda1 is affine in r at fixed s
    w0 = s1_lambda_chain(Si, t, s, 0.0, 1)[1]
    w1 = s1_lambda_chain(Si, t, s, 1.0, 1)[1]
    r = -w0 / (w1 - w0)
    return s, r, s1_lambda_chain(Si, t, s, r, 2)[2]


def f1cone(fj) -> float:
    """The cone-type polynomial of S1, term by term in blocks of l, l', l'', l'''."""
    l, l1, l2, l3 = (fj.l.d(k) for k in range(4))
    k1, k1_1, k1_2, k1_3 = (fj.kappa1.d(k) for k in range(4))
    k4, k4_1, k4_2 = (fj.kappa4.d(k) for k in range(3))
    k6, k6_1 = fj.kappa6.d(0), fj.kappa6.d(1)
    block_l = l * (
        k1**3 * k4**3 * (k6 * k4_1 - k4 * k6_1)
        + k1**2 * (
            -k1_1 * k4**4 * k6
            - 2 * k1_1 * k4_1**2 * k6
            - k1_1 * k4 * k4_1 * k6_1
            + k1_1 * k4 * k4_2 * k6
            - k1_1 * k4**2 * k6**3
            + 2 * k1_2 * k4 * k4_1 * k6
            + k1_2 * k4**2 * k6_1
            - k1_3 * k4**2 * k6
        )
        + k1 * (
            -4 * k1_1**2 * k4 * k4_1 * k6
            - 2 * k1_1**2 * k4**2 * k6_1
            + 6 * k1_1 * k1_2 * k4**2 * k6
        )
        - 6 * k1_1**3 * k4**2 * k6
    )
    block_l1 = l1 * k1 * (
        k1**2 * (
            k4**4 * k6
            + k4**2 * k6**3
            + 2 * k6 * k4_1**2
            + k4 * k4_1 * k6_1
            - k4 * k4_2 * k6
        )
        + k1 * k4 * (
            4 * k1_1 * k4_1 * k6
            + 2 * k1_1 * k4 * k6_1
            - 3 * k1_2 * k4 * k6
        )
        + 6 * k1_1**2 * k4**2 * k6
    )
    block_l2 = -l2 * k1**2 * k4 * (k1 * (2 * k4_1 * k6 + k4 * k6_1) + 3 * k1_1 * k4 * k6)
    block_l3 = l3 * k1**3 * k4**2 * k6
    return block_l + block_l1 + block_l2 + block_l3


@dataclass
class ConeReport:
    label: str
    residuals: dict
    grid: list
    values: list
    tolerance: float


def s1_cone_test(Si: DevelopableSi, grid=None, tol: float = TYPE_TOL) -> ConeReport:
    if Si.i != 1:
        raise ValueError("S1 only")
    grid = np.linspace(*Si.domain, 41) if grid is None else np.asarray(grid, dtype=float)
    k6s, vals = [], []
    for t in grid:
        fj = _fj(Si.curve, float(t), 3)
        if abs(fj.kappa1.d(0) * fj.kappa4.d(0)) <= APPLICABILITY_TOL:
            raise ApplicabilityError(f"k1 k4 vanishes at t={float(t)!r}")
        k6s.append(abs(fj.kappa6.d(0)))
        vals.append(f1cone(fj))
    res = {"kappa6": float(max(k6s)), "f1cone": float(np.max(np.abs(vals)))}
    g = [float(x) for x in grid]
    if res["kappa6"] <= tol:
        label = "cylinder_type"
    elif res["f1cone"] <= tol:
        label = "cone_type"
    else:
        label = "generic"
    return ConeReport(label, res, g, [float(v) for v in vals], tol)


# ---------------------------------------------------------------------------
# scan
# ---------------------------------------------------------------------------


def si_singularity_scan(Si: DevelopableSi, grid=None, r_window=(-1.0, 1.0), samples: int = 3,
                        tau: float = TAU, data: SiInvariantData | None = None) -> list:
    """Classify representative singular points of S_i along ``grid``.

    For each t the singular line is located from the raw identifier, points
    on it are mapped to the adapted gauge and classified with the general
    front criteria.  The second singular point (r_hat = omega / a') is
    added when it lies in the window.
    """
    data = data or si_invariant_data(Si, check=False)
    grid = np.linspace(*Si.domain, 21) if grid is None else np.asarray(grid, dtype=float)
    out = []
    for t in grid:
        t = float(t)
        inv = data.invariant_jets(t, 6)
        a, b3 = inv.a.d(0), inv.b3.d(0)
        rhs = list(np.linspace(r_window[0], r_window[1], samples))
        ap = inv.a.d(1)
        if abs(ap) > tau:
            w = inv.a.d(0) * inv.b2.d(0) + inv.b1.d(0) - inv.b3.d(1)
            r2 = w / ap
            if r_window[0] <= r2 <= r_window[1]:
                rhs.append(r2)
        alpha, beta, c0 = _raw_line(Si, t)
        for rh in rhs:
            sh = -b3 - a * rh
            th = Si.theta(t)
            cs, sn = math.cos(th), math.sin(th)
            s, r = cs * sh + sn * rh, -sn * sh + cs * rh
            rep = classify_adapted(inv, sh, rh, tau, point=(t, s, r))
            scale = max(abs(alpha), abs(beta), abs(c0), 1.0) * (1 + abs(s) + abs(r))
            rep.witnesses["raw_lambda"] = alpha * s + beta * r + c0
            rep.witnesses["raw_lambda_scaled"] = rep.witnesses["raw_lambda"] / scale
            rep.gauge_info = {"theta": th, "theta0": Si.theta0}
            out.append(rep)
    return out
