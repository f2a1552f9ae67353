import math

import numpy as np
import pytest

from strictio import catalog
from strictio.curve import CurvatureCurve, CurveModel
from strictio.heights import (
    ApplicabilityError,
    HeightFamily,
    build_Si,
    envelope_residual,
    f1cone,
    raw_lambda,
    s1_classify,
    s1_cone_test,
    s1_lambda_chain,
    s1_w1s_on_locus,
    si_invariant_data,
    si_singularity_scan,
    w1c_closed,
)

CONST = ("1", "2", "1.5", "0.7")


@pytest.fixture(scope="module")
def moment():
    c = catalog.curve("moment_curve")
    return {i: build_Si(c, i) for i in (1, 2, 3, 4)}


@pytest.fixture(scope="module")
def const_curve():
    return CurvatureCurve(*CONST, domain=(-0.6, 0.6))


# -- height functions ------------------------------------------------------------------


def test_height_function_vanishes_on_curve_and_is_affine():
    c = catalog.curve("helix4")
    for i in (1, 2, 3, 4):
        H = HeightFamily(c, i)
        assert H.H(0.4, c(0.4)) == 0.0
        x, y = np.array([1.0, 2, 0, -1]), np.array([0.5, -1, 3, 2])
        h0 = H.H(0.4, c(0.4))
        assert H.H(0.4, 0.3 * x + 0.7 * y) - h0 == pytest.approx(0.3 * H.H(0.4, x) + 0.7 * H.H(0.4, y) - h0)
    with pytest.raises(ValueError):
        HeightFamily(c, 5)


# -- construction ------------------------------------------------------------------------


def test_all_four_constructible_on_moment_curve(moment):
    for i, Si in moment.items():
        assert Si.flags["pseudo_non_degenerate"], i
        assert Si.flags["branch_margin_min"] > 1e-9


def test_s4_refused_on_curve_in_hyperplane():
    c = CurveModel(["t", "t^2", "t^3", "0"], (0.1, 1.0))
    with pytest.raises(ApplicabilityError, match="kappa6"):
        build_Si(c, 4)
    assert build_Si(c, 1).flags["applicable"]


@pytest.mark.parametrize("i", [1, 2, 3, 4])
def test_envelope_and_normal(moment, i):
    Si = moment[i]
    rng = np.random.default_rng(i)
    lo, hi = Si.domain
    worst = 0.0
    for _ in range(200):
        t = rng.uniform(lo, hi)
        s, r = rng.uniform(-2, 2, 2)
        worst = max(worst, *map(abs, envelope_residual(Si, t, s, r)))
    assert worst <= 1e-8
    for t in np.linspace(lo, hi, 9):
        n = Si.surface.normal(t)
        e = Si.frame_jets(t, 0).e[i - 1].value
        assert min(np.linalg.norm(n - e), np.linalg.norm(n + e)) <= 1e-8


@pytest.mark.parametrize("i", [1, 2, 3, 4])
def test_closed_forms_match_extraction(moment, i):
    data = si_invariant_data(moment[i], np.linspace(*moment[i].domain, 5))
    assert data.cross_check <= 1e-6
    for t in (0.3, 0.8):
        assert data.invariant_jets(t, 2).b4.coeffs.tolist() == [0.0, 0.0, 0.0]


@pytest.mark.parametrize("i", [1, 2, 3, 4])
def test_closed_forms_constant_curvatures(const_curve, i):
    Si = build_Si(const_curve, i, np.linspace(-0.6, 0.6, 9))
    assert si_invariant_data(Si, np.linspace(-0.6, 0.6, 5)).cross_check <= 1e-8


def test_gauge_seed_examples(const_curve):
    S4 = build_Si(const_curve, 4, theta0=math.pi / 2, t_ref=0.0)
    inv = si_invariant_data(S4, check=False).invariant_jets(0.0, 1)
    assert inv.a.value == pytest.approx(0.0, abs=1e-15)
    S1 = build_Si(const_curve, 1, theta0=0.0, t_ref=0.0)
    inv = si_invariant_data(S1, check=False).invariant_jets(0.0, 1)
    assert inv.delta.value == pytest.approx(2 / 1.5)
    # the gauge angle follows its rate: theta' = kappa6 for S1, kappa1 for S4
    assert S1.theta(0.5) == pytest.approx(0.7 * 0.5, abs=1e-10)
    assert S4.theta(0.5) == pytest.approx(math.pi / 2 + 2 * 0.5, abs=1e-10)


def test_branch_condition_is_enforced(const_curve):
    from strictio.framefield import GaugeViolated

    # S1 with cos(theta) passing through zero on the domain
    with pytest.raises(GaugeViolated, match="branch"):
        build_Si(const_curve, 1, theta0=math.pi / 2 - 0.2, t_ref=0.0)


# -- raw identifiers -----------------------------------------------------------------------


def test_raw_lambda_shapes(const_curve):
    S4 = build_Si(const_curve, 4)
    assert raw_lambda(S4, 0.2, 3.0, 0.5) == pytest.approx(0.5 * 1.5)
    S3 = build_Si(const_curve, 3)
    assert raw_lambda(S3, 0.2, 0.4, 9.0) == pytest.approx(0.4 * 2 * 1.5 * math.hypot(1.5, 0.7))
    S2 = build_Si(const_curve, 2)
    assert raw_lambda(S2, 0.2, 0.4, 9.0) == pytest.approx(raw_lambda(S2, 0.2, 0.4, -3.0))


def test_raw_lambda_vanishes_where_adapted_lambda_does(moment):
    for i in (2, 3, 4):
        Si = moment[i]
        data = si_invariant_data(Si, check=False)
        reps = si_singularity_scan(Si, np.linspace(0.2, 0.9, 4), samples=3, data=data)
        for rep in reps:
            assert abs(rep.witnesses["raw_lambda_scaled"]) <= 1e-8


def test_s4_singular_set_is_r_zero(moment):
    reps = si_singularity_scan(moment[4], np.linspace(0.2, 0.9, 5), samples=3)
    for rep in reps:
        assert abs(rep.point[2]) <= 1e-9
        assert rep.label != "regular"


# -- S1 criteria -------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def s1_const(const_curve):
    return build_Si(const_curve, 1, theta0=0.0, t_ref=0.0)


def test_s1_constant_curvature_edges(s1_const):
    rep = s1_classify(s1_const, (0.0, 0.0, 0.3))
    assert rep.label == "CE" and rep.witnesses["labels_agree"]
    # W1c = r k1^3 k4^2 k6 - cos(theta) k1^2 k4^3 l in the adapted r
    k1, k4, k6, l = 2.0, 1.5, 0.7, 1.0
    assert rep.witnesses["W1c_closed"] == pytest.approx(0.3 * k1**3 * k4**2 * k6 - k1**2 * k4**3 * l)


def test_w1c_closed_is_multiple_of_raw_chain(s1_const):
    for t, s, r in [(0.0, 0.0, 0.3), (0.4, 0.0, -0.8)]:
        fj = s1_const.frame_jets(t, 3)
        th = s1_const.theta(t)
        raw = s1_lambda_chain(s1_const, t, s, r, 1)[1]
        c, sn = math.cos(th), math.sin(th)
        rh = sn * s + c * r
        expected = -fj.kappa1.d(0) * fj.kappa4.d(0) * c * raw
        assert w1c_closed(fj, th, rh) == pytest.approx(expected, rel=1e-10)


def test_s1_constant_curvature_on_edge_locus(s1_const):
    s, r, w1s = s1_w1s_on_locus(s1_const, 0.0)
    r_star = 1.0 * 1.5 / (2.0 * 0.7)  # cos(theta) l k4 / (k1 k6)
    assert s == pytest.approx(0.0, abs=1e-14) and r == pytest.approx(r_star)
    assert abs(w1s) <= 1e-12
    rep = s1_classify(s1_const, (0.0, s, r))
    assert rep.label == "unresolved" and rep.witnesses["labels_agree"]


def test_s1_labels_agree_on_varying_curve():
    c = CurvatureCurve("1+t^2", "1", "1", "1", domain=(-0.5, 0.6))
    S1 = build_Si(c, 1)
    for t in (-0.3, 0.1, 0.4):
        for r in (-0.5, 0.5):
            fj = S1.frame_jets(t, 1)
            s = (fj.l.d(1) * fj.kappa1.d(0) - fj.l.d(0) * fj.kappa1.d(1)) / (fj.kappa4.d(0) * fj.kappa1.d(0) ** 2)
            rep = s1_classify(S1, (t, s, r))
            assert rep.witnesses["labels_agree"], rep.witnesses
        _, r2, _ = s1_w1s_on_locus(S1, t)
        rep = s1_classify(S1, (t, s, r2))
        assert rep.label == "SW_B" and rep.witnesses["labels_agree"]


def test_s1_cross_cap_at_simple_zero_of_kappa1():
    c = CurvatureCurve("1", "t", "1", "1", domain=(-0.5, 0.6))
    S1 = build_Si(c, 1)
    assert s1_classify(S1, (0.0, 0.0, 0.0)).label == "CCR_I"


# -- cone test -------------------------------------------------------------------------------


def test_cone_examples(s1_const):
    rep = s1_cone_test(s1_const)
    assert rep.label == "cone_type" and rep.residuals["f1cone"] <= 1e-10
    cyl = build_Si(CurvatureCurve("1", "2", "1.5", "0", domain=(-1, 1)), 1)
    assert s1_cone_test(cyl).label == "cylinder_type"
    gen = build_Si(CurvatureCurve("1+t", "2", "1.5", "0.7", domain=(-0.5, 0.5)), 1)
    assert s1_cone_test(gen).label == "generic"


def _sign_changes(ts, vals):
    v = np.asarray(vals)
    idx = np.flatnonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)
    return [0.5 * (ts[i] + ts[i + 1]) for i in idx]


@pytest.mark.parametrize(
    "curv, zero",
    [(("1", "1", "1", "1+(t-0.3)^2"), None), (("1+t^2", "1", "1", "1"), 0.0)],
)
def test_f1cone_zero_set_matches_swallowtail_quantity(curv, zero):
    c = CurvatureCurve(*curv, domain=(-0.5, 0.6))
    S1 = build_Si(c, 1)
    ts = np.linspace(-0.443, 0.557, 41)  # no node on a zero
    fc = [f1cone(S1.frame_jets(t, 3)) for t in ts]
    ws = [s1_w1s_on_locus(S1, t)[2] for t in ts]
    za, zb = _sign_changes(ts, fc), _sign_changes(ts, ws)
    h = ts[1] - ts[0]
    assert len(za) == len(zb) == 1
    if zero is not None:
        assert abs(za[0] - zero) <= h
    assert all(abs(x - y) <= h for x, y in zip(za, zb))
    # the ratio is smooth and nonvanishing away from the zeros
    ratio = [w / f for w, f in zip(ws, fc) if abs(f) > 1e-6]
    assert min(np.abs(ratio)) > 0


def test_f1cone_fixture_zeros():
    # l = 1 + t^2, other curvatures 1: W1s on the locus equals f1cone, simple zero at t = 0
    c = CurvatureCurve("1+t^2", "1", "1", "1", domain=(-0.5, 0.6))
    S1 = build_Si(c, 1)
    ts = np.linspace(-0.443, 0.557, 41)
    assert _sign_changes(ts, [f1cone(S1.frame_jets(t, 3)) for t in ts]) == pytest.approx([0.0], abs=0.03)
