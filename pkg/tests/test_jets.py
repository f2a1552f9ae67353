import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from strictio import jets
from strictio.jets import Jet, JetError, lift_constant, lift_variable

small = st.floats(-2.0, 2.0, allow_nan=False)


def tvar(t0, n=6):
    return lift_variable(t0, n)


# -- lifting and basic arithmetic ----------------------------------------------


@pytest.mark.parametrize(
    "c, t0, n, expected",
    [(5, 0, 3, [5, 0, 0, 0]), (0, 1, 2, [0, 0, 0]), (-1, 0, 0, [-1])],
)
def test_lift_constant(c, t0, n, expected):
    assert lift_constant(c, t0, n).coeffs.tolist() == expected


@pytest.mark.parametrize(
    "t0, n, expected",
    [(2, 3, [2, 1, 0, 0]), (0, 1, [0, 1]), (-0.5, 4, [-0.5, 1, 0, 0, 0])],
)
def test_lift_variable(t0, n, expected):
    assert lift_variable(t0, n).coeffs.tolist() == expected


def test_lift_variable_rejects_order_zero():
    with pytest.raises(ValueError):
        lift_variable(0.0, 0)


def test_arith_examples():
    t = lift_variable(2.0, 2)
    assert (t * t).coeffs.tolist() == [4, 4, 2]
    inv = jets.jet_arith(lift_constant(1.0, 1.0, 2), lift_variable(1.0, 2), "div")
    np.testing.assert_allclose(inv.coeffs, [1, -1, 2], atol=1e-15)
    s = jets.jet_arith(Jet(0, [1, 2]), Jet(0, [3, 4]), "add")
    assert s.coeffs.tolist() == [4, 6]


def test_elementary_examples():
    np.testing.assert_allclose(jets.jet_elementary(lift_variable(0, 3), "sin").coeffs, [0, 1, 0, -1], atol=1e-15)
    np.testing.assert_allclose(jets.jet_elementary(Jet(2, [4, 4, 2]), "sqrt").coeffs, [2, 1, 0], atol=1e-15)
    assert jets.jet_elementary(Jet(0, [-3, 1]), "abs_nonvanishing").coeffs.tolist() == [3, -1]


def test_errors():
    with pytest.raises(JetError, match="pole"):
        lift_constant(1.0, 0, 2) / lift_constant(0.0, 0, 2)
    with pytest.raises(JetError, match="undefined"):
        jets.sqrt(lift_constant(0.0, 0, 2))
    with pytest.raises(JetError, match="undefined"):
        jets.fabs(lift_variable(0.0, 2))
    with pytest.raises(JetError):
        Jet(0, [1, 2]) + Jet(1, [1, 2])
    with pytest.raises(JetError):
        Jet(0, [1, 2]) + Jet(0, [1, 2, 3])


# -- symbolic oracle on a fixed corpus -------------------------------------------

T = sp.Symbol("t")
CORPUS = [
    sp.sin(T) * sp.exp(T),
    sp.cos(T**2) / (2 + T),
    sp.sqrt(1 + T**2) * T**3,
    (T**4 - 3 * T) / (1 + sp.exp(T)),
    sp.sin(sp.cos(T)) + T**5,
    sp.exp(-T**2) * sp.cos(3 * T),
    1 / sp.sqrt(2 + sp.sin(T)),
]


def _to_jet(expr, t0, n):
    f = sp.lambdify(T, expr, modules=[{"sin": jets.sin, "cos": jets.cos, "exp": jets.exp, "sqrt": jets.sqrt}])
    return f(lift_variable(t0, n))


@pytest.mark.parametrize("k", range(len(CORPUS)))
@pytest.mark.parametrize("t0", [-0.7, 0.0, 0.4])
def test_jet_matches_symbolic_derivatives(k, t0):
    e = CORPUS[k]
    j = _to_jet(e, t0, 6)
    for m in range(7):
        ref = float(sp.diff(e, T, m).subs(T, t0))
        assert j.d(m) == pytest.approx(ref, rel=1e-11, abs=1e-11)


def _fd(fn, t0, k, h=1e-2):
    # central differences of order k with an 8th-order accurate stencil
    if k == 0:
        return fn(t0)
    pts = np.arange(-6, 7)
    A = np.vander(pts * h, len(pts), increasing=True).T
    rhs = np.zeros(len(pts))
    rhs[k] = math.factorial(k)
    w = np.linalg.solve(A, rhs)
    return float(sum(wi * fn(t0 + p * h) for wi, p in zip(w, pts)))


def test_jet_matches_finite_differences_on_random_corpus():
    rng = np.random.default_rng(7)
    atoms = ["sin", "cos", "exp"]
    for _ in range(20):
        a, b = rng.choice(atoms, 2)
        c1, c2, c3 = rng.uniform(0.5, 1.5, 3)

        def fn(x, a=a, b=b, c1=c1, c2=c2, c3=c3):
            F = {"sin": jets.sin, "cos": jets.cos, "exp": jets.exp}
            return F[a](c1 * x) * (c2 + x * x) + F[b](c3 * x) / (2.0 + x * x)

        t0 = float(rng.uniform(-1, 1))
        j = fn(lift_variable(t0, 6))
        for k in range(4):
            ref = _fd(lambda x: float(fn(x)), t0, k)
            assert j.d(k) == pytest.approx(ref, rel=1e-5, abs=1e-7)


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=7), small)
def test_polynomials_exact(coefs, t0):
    n = len(coefs) - 1
    t = lift_variable(t0, max(n, 1))
    p = sum((c * t**k for k, c in enumerate(coefs)), lift_constant(0.0, t0, max(n, 1)))
    P = np.polynomial.Polynomial(coefs)
    for k in range(n + 1):
        ref = P.deriv(k)(t0) if k else P(t0)
        assert p.d(k) == pytest.approx(ref, rel=1e-13, abs=1e-12)


# -- algebraic properties ------------------------------------------------------------


@given(small, st.lists(small, min_size=4, max_size=4), st.lists(small, min_size=4, max_size=4))
def test_product_rule(t0, ca, cb):
    a, b = Jet(t0, ca), Jet(t0, cb)
    p = a * b
    assert p.d(1) == pytest.approx(a.d(0) * b.d(1) + a.d(1) * b.d(0), abs=1e-12)
    assert p.d(2) == pytest.approx(a.d(2) * b.d(0) + 2 * a.d(1) * b.d(1) + a.d(0) * b.d(2), abs=1e-11)


@given(small, st.lists(small, min_size=5, max_size=5))
def test_sin_cos_identity(t0, c):
    x = Jet(t0, c)
    one = jets.sin(x) * jets.sin(x) + jets.cos(x) * jets.cos(x)
    np.testing.assert_allclose(one.coeffs, [1, 0, 0, 0, 0], atol=1e-9)


@given(small, st.floats(0.3, 2.0), st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_compose_with_inverse_is_identity(t0, slope, rest):
    tau = Jet(t0, [0.7, slope, *rest])
    inv = jets.invert(tau)
    ident = jets.compose(tau, inv)
    np.testing.assert_allclose(ident.coeffs, lift_variable(0.7, 5).coeffs, atol=1e-9)


def test_invert_rejects_zero_slope():
    with pytest.raises(JetError):
        jets.invert(Jet(0, [1, 0, 1]))


@given(st.lists(st.floats(-1, 1), min_size=6, max_size=6))
def test_linear_flow_matches_expm_for_constant_matrix(v):
    K = np.zeros((4, 4))
    K[np.triu_indices(4, 1)] = v
    K = K - K.T
    order = 8
    Kj = lift_constant(K, 0.0, order - 1)
    W = jets.linear_flow(Kj, np.eye(4))
    h = 0.05
    series = sum(W.d(k) * h**k / math.factorial(k) for k in range(order + 1))
    np.testing.assert_allclose(series, expm(h * K), atol=1e-12)


@given(st.lists(st.floats(-2, 2), min_size=12, max_size=12))
def test_wedge_orthogonality_and_det(vals):
    u, v, w = np.array(vals).reshape(3, 4)
    n = jets.wedge3(u, v, w)
    for x in (u, v, w):
        assert abs(n @ x) <= 1e-12 * (1 + np.linalg.norm(n) * np.linalg.norm(x))
    x = np.array([0.3, -1.0, 0.5, 2.0])
    assert n @ x == pytest.approx(np.linalg.det(np.array([x, u, v, w])), abs=1e-11)


def test_wedge_of_standard_basis():
    E = np.eye(4)
    np.testing.assert_array_equal(jets.wedge3(E[0], E[1], E[2]), -E[3])
    np.testing.assert_array_equal(jets.wedge3(E[0], E[0], E[2]), np.zeros(4))
    np.testing.assert_array_equal(jets.wedge3(E[1], E[0], E[2]), E[3])


def test_jet_wedge_and_det_agree_with_numeric():
    t = lift_variable(0.3, 3)
    u = jets.stack([jets.cos(t), jets.sin(t), t, 1.0])
    v = jets.stack([t * t, 1.0, jets.exp(t), t])
    w = jets.stack([1.0, t, 0.0, jets.sin(t)])
    x = jets.stack([t, 2.0, 1.0, jets.cos(t)])
    d = jets.det4(u, v, w, x)
    ref = np.linalg.det(np.array([u.value, v.value, w.value, x.value]))
    assert d.value == pytest.approx(ref, abs=1e-13)
    # derivative via finite differences of numeric determinants
    def numeric(tt):
        rows = [
            [math.cos(tt), math.sin(tt), tt, 1.0],
            [tt * tt, 1.0, math.exp(tt), tt],
            [1.0, tt, 0.0, math.sin(tt)],
            [tt, 2.0, 1.0, math.cos(tt)],
        ]
        return np.linalg.det(np.array(rows))

    h = 1e-5
    assert d.d(1) == pytest.approx((numeric(0.3 + h) - numeric(0.3 - h)) / (2 * h), rel=1e-8)
