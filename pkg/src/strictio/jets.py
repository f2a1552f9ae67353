"""Truncated Taylor arithmetic in one variable.

A :class:`Jet` carries the value and the first ``order`` derivatives of a
function at ``base_point``.  ``coeffs[k]`` is the k-th *derivative* (not the
Taylor coefficient); products and elementary functions are evaluated on
Taylor coefficients internally and converted back.

Jets may be vector valued: ``coeffs`` then has shape ``(order + 1, *shape)``.
:class:`JetVec4` is the four-component case used for curves in R^4.
"""

from __future__ import annotations

import math
from numbers import Real

import numpy as np

__all__ = [
    "Jet",
    "JetVec4",
    "JetError",
    "lift_constant",
    "lift_variable",
    "jet_arith",
    "jet_elementary",
    "sin",
    "cos",
    "exp",
    "sqrt",
    "fabs",
    "dot",
    "norm",
    "norm_or_none",
    "wedge3",
    "det4",
    "compose",
    "invert",
    "stack",
    "linear_flow",
]

_MAX_ORDER = 40
_FACT = np.array([math.factorial(k) for k in range(_MAX_ORDER + 1)], dtype=float)


class JetError(ArithmeticError):
    """Raised when a jet operation has no derivative at the base point."""


def _same_point(t0: float, t1: float) -> bool:
    return math.isclose(t0, t1, rel_tol=1e-12, abs_tol=1e-12)


def _scale(n: int, ndim: int) -> np.ndarray:
    return _FACT[: n + 1].reshape((n + 1,) + (1,) * ndim)


def _cauchy(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # scalar-by-vector products: pad the lower-rank operand with trailing axes
    if a.ndim < b.ndim:
        a = a.reshape(a.shape + (1,) * (b.ndim - a.ndim))
    elif b.ndim < a.ndim:
        b = b.reshape(b.shape + (1,) * (a.ndim - b.ndim))
    n = a.shape[0]
    out = np.zeros((n,) + np.broadcast_shapes(a.shape[1:], b.shape[1:]))
    for j in range(n):
        out[j:] += a[j] * b[: n - j]
    return out


class Jet:
    """Value and derivatives of a (possibly vector valued) function at a point."""

    __slots__ = ("base_point", "coeffs")
    __array_priority__ = 100

    def __init__(self, base_point: float, coeffs) -> None:
        c = np.array(coeffs, dtype=float)
        if c.ndim == 0:
            c = c.reshape(1)
        if c.shape[0] > _MAX_ORDER + 1:
            raise ValueError(f"jet order above {_MAX_ORDER} is not supported")
        self.base_point = float(base_point)
        self.coeffs = c

    # -- construction helpers -------------------------------------------------
    @classmethod
    def from_taylor(cls, base_point: float, taylor: np.ndarray) -> "Jet":
        n = taylor.shape[0] - 1
        return _wrap(base_point, taylor * _scale(n, taylor.ndim - 1))

    def taylor(self) -> np.ndarray:
        return self.coeffs / _scale(self.order, self.coeffs.ndim - 1)

    # -- basic properties -----------------------------------------------------
    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def shape(self) -> tuple:
        return self.coeffs.shape[1:]

    @property
    def value(self):
        v = self.coeffs[0]
        return float(v) if v.ndim == 0 else v.copy()

    def d(self, k: int):
        """k-th derivative at the base point."""
        v = self.coeffs[k]
        return float(v) if v.ndim == 0 else v.copy()

    def __len__(self) -> int:
        return self.coeffs.shape[0]

    def __repr__(self) -> str:
        return f"{type(self).__name__}(t0={self.base_point!r}, coeffs={self.coeffs.tolist()!r})"

    def __getitem__(self, idx) -> "Jet":
        if not self.shape:
            raise TypeError("scalar jet is not indexable")
        idx = idx if isinstance(idx, tuple) else (idx,)
        return _wrap(self.base_point, self.coeffs[(slice(None),) + idx])

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise JetError(f"cannot raise jet order {self.order} to {order}")
        return _wrap(self.base_point, self.coeffs[: order + 1])

    def derivative(self) -> "Jet":
        if self.order == 0:
            raise JetError("jet order insufficient for differentiation")
        return _wrap(self.base_point, self.coeffs[1:])

    def antiderivative(self, value) -> "Jet":
        """Jet of the primitive taking ``value`` at the base point."""
        v = np.broadcast_to(np.asarray(value, dtype=float), self.shape)
        return _wrap(self.base_point, np.concatenate([v[None], self.coeffs]))

    # -- coercion -------------------------------------------------------------
    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if not _same_point(self.base_point, other.base_point):
                raise JetError(
                    f"jets at different base points {self.base_point} and {other.base_point}"
                )
            if other.order != self.order:
                raise JetError(f"jet orders differ ({self.order} vs {other.order})")
            return other
        if isinstance(other, (Real, np.ndarray, list, tuple)):
            c = np.asarray(other, dtype=float)
            return lift_constant(c, self.base_point, self.order)
        return NotImplemented

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return _wrap(self.base_point, self.coeffs + o.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return _wrap(self.base_point, self.coeffs - o.coeffs)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return _wrap(self.base_point, o.coeffs - self.coeffs)

    def __neg__(self):
        return _wrap(self.base_point, -self.coeffs)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, Real):
            return _wrap(self.base_point, self.coeffs * float(other))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet.from_taylor(self.base_point, _cauchy(self.taylor(), o.taylor()))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Real):
            if other == 0:
                raise JetError("pole at evaluation point")
            return _wrap(self.base_point, self.coeffs / float(other))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return _div(self, o)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return _div(o, self)

    def __pow__(self, m):
        return pow_int(self, m)


class JetVec4(Jet):
    """Jet of a curve in R^4."""

    __slots__ = ()

    def __init__(self, base_point: float, coeffs) -> None:
        super().__init__(base_point, coeffs)
        if self.coeffs.shape[1:] != (4,):
            raise ValueError(f"JetVec4 needs coefficient shape (n+1, 4), got {self.coeffs.shape}")

    @property
    def components(self) -> tuple[Jet, Jet, Jet, Jet]:
        return tuple(Jet(self.base_point, self.coeffs[:, i]) for i in range(4))


def _wrap(base_point: float, coeffs: np.ndarray) -> Jet:
    if coeffs.shape[1:] == (4,):
        return JetVec4(base_point, coeffs)
    return Jet(base_point, coeffs)


def stack(parts) -> Jet:
    """Stack scalar jets (or numbers) into one vector jet."""
    parts = list(parts)
    ref = next((p for p in parts if isinstance(p, Jet)), None)
    if ref is None:
        raise ValueError("stack needs at least one jet")
    cols = [ref._coerce(p).coeffs for p in parts]
    return _wrap(ref.base_point, np.stack(cols, axis=-1))


# ---------------------------------------------------------------------------
# lifting
# ---------------------------------------------------------------------------


def lift_constant(c, t0: float, n: int) -> Jet:
    if n < 0:
        raise ValueError("jet order must be non-negative")
    c = np.asarray(c, dtype=float)
    coeffs = np.zeros((n + 1,) + c.shape)
    coeffs[0] = c
    return _wrap(t0, coeffs)


def lift_variable(t0: float, n: int) -> Jet:
    if n < 1:
        raise ValueError("order-0 jet cannot carry the derivative of the identity")
    coeffs = np.zeros(n + 1)
    coeffs[0] = t0
    coeffs[1] = 1.0
    return Jet(t0, coeffs)


# ---------------------------------------------------------------------------
# arithmetic kernels
# ---------------------------------------------------------------------------


def _div(a: Jet, b: Jet) -> Jet:
    if b.shape:
        raise TypeError("division by a vector jet")
    bt = b.taylor()
    if bt[0] == 0.0:
        raise JetError("pole at evaluation point")
    at = a.taylor()
    if at.ndim > 1:
        bt = bt.reshape(bt.shape + (1,) * (at.ndim - 1))
    n = at.shape[0]
    ct = np.zeros_like(at)
    for k in range(n):
        acc = at[k].copy() if at.ndim > 1 else at[k]
        for j in range(1, k + 1):
            acc = acc - bt[j] * ct[k - j]
        ct[k] = acc / bt[0]
    return Jet.from_taylor(a.base_point, ct)


def pow_int(a: Jet, m: int) -> Jet:
    if int(m) != m:
        raise TypeError("only integer powers are supported")
    m = int(m)
    if m < 0:
        return _div(lift_constant(1.0, a.base_point, a.order), pow_int(a, -m))
    result = lift_constant(np.ones(a.shape), a.base_point, a.order)
    base = a
    while m:
        if m & 1:
            result = result * base
        m >>= 1
        if m:
            base = base * base
    return result


def _exp(a: Jet) -> Jet:
    at = a.taylor()
    n = at.shape[0]
    et = np.zeros_like(at)
    et[0] = np.exp(at[0])
    for k in range(1, n):
        et[k] = sum(j * at[j] * et[k - j] for j in range(1, k + 1)) / k
    return Jet.from_taylor(a.base_point, et)


def _sincos(a: Jet) -> tuple[Jet, Jet]:
    at = a.taylor()
    n = at.shape[0]
    st = np.zeros_like(at)
    ct = np.zeros_like(at)
    st[0] = np.sin(at[0])
    ct[0] = np.cos(at[0])
    for k in range(1, n):
        st[k] = sum(j * at[j] * ct[k - j] for j in range(1, k + 1)) / k
        ct[k] = -sum(j * at[j] * st[k - j] for j in range(1, k + 1)) / k
    return Jet.from_taylor(a.base_point, st), Jet.from_taylor(a.base_point, ct)


def _sqrt(a: Jet) -> Jet:
    at = a.taylor()
    if np.any(at[0] <= 0.0):
        raise JetError("derivative undefined: sqrt at a non-positive value")
    n = at.shape[0]
    qt = np.zeros_like(at)
    qt[0] = np.sqrt(at[0])
    for k in range(1, n):
        acc = at[k] - sum(qt[j] * qt[k - j] for j in range(1, k))
        qt[k] = acc / (2.0 * qt[0])
    return Jet.from_taylor(a.base_point, qt)


def _abs(a: Jet) -> Jet:
    v = a.coeffs[0]
    if np.any(v == 0.0):
        raise JetError("derivative undefined: abs at zero")
    return _wrap(a.base_point, a.coeffs * np.sign(v))


# ---------------------------------------------------------------------------
# polymorphic elementary functions (floats, arrays and jets)
# ---------------------------------------------------------------------------


def sin(x):
    return _sincos(x)[0] if isinstance(x, Jet) else np.sin(x)


def cos(x):
    return _sincos(x)[1] if isinstance(x, Jet) else np.cos(x)


def exp(x):
    return _exp(x) if isinstance(x, Jet) else np.exp(x)


def sqrt(x):
    if isinstance(x, Jet):
        return _sqrt(x)
    return np.sqrt(x)


def fabs(x):
    return _abs(x) if isinstance(x, Jet) else np.abs(x)


def jet_arith(a: Jet, b: Jet, op: str) -> Jet:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown jet operation {op!r}")


def jet_elementary(a: Jet, fn: str, power: int | None = None) -> Jet:
    if fn == "sin":
        return _sincos(a)[0]
    if fn == "cos":
        return _sincos(a)[1]
    if fn == "sqrt":
        return _sqrt(a)
    if fn == "exp":
        return _exp(a)
    if fn == "abs_nonvanishing":
        return _abs(a)
    if fn == "pow_int":
        if power is None:
            raise ValueError("pow_int needs an integer power")
        return pow_int(a, power)
    raise ValueError(f"unknown elementary function {fn!r}")


# ---------------------------------------------------------------------------
# vector algebra on jets (also accepts plain arrays)
# ---------------------------------------------------------------------------


def dot(u, v):
    """Euclidean inner product over the last axis."""
    if isinstance(u, Jet) or isinstance(v, Jet):
        ref = u if isinstance(u, Jet) else v
        uu = ref._coerce(u)
        vv = ref._coerce(v)
        tc = _cauchy(uu.taylor(), vv.taylor()).sum(axis=-1)
        return Jet.from_taylor(ref.base_point, tc)
    return float(np.dot(u, v))


def norm(u):
    return sqrt(dot(u, u))


def norm_or_none(u: Jet, tol: float):
    """Norm jet of ``u``, or None when ``|u|`` is at most ``tol`` at the base point."""
    if float(np.linalg.norm(u.coeffs[0])) <= tol:
        return None
    return norm(u)


# Signed 3x3 minors of the formal determinant
#   | e1  e2  e3  e4  |
#   | u1  u2  u3  u4  |
#   | v1  v2  v3  v4  |
#   | w1  w2  w3  w4  |
# expanded along the first row.
_MINOR_COLS = ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2))
_PERMS3 = (((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1), ((0, 2, 1), -1), ((2, 1, 0), -1), ((1, 0, 2), -1))


def _det3_taylor(u, v, w, cols):
    acc = None
    for perm, sign in _PERMS3:
        term = _cauchy(_cauchy(u[:, cols[perm[0]]], v[:, cols[perm[1]]]), w[:, cols[perm[2]]])
        acc = sign * term if acc is None else acc + sign * term
    return acc


def wedge3(u, v, w):
    """Triple exterior product of three vectors in R^4.

    Defined as the formal expansion along the basis row, so that
    ``<u^v^w, x> = det(x, u, v, w)`` and ``det(u, v, w, u^v^w) = -|u^v^w|^2``.
    For the standard basis this gives ``E1^E2^E3 = -E4``.
    """
    if not any(isinstance(x, Jet) for x in (u, v, w)):
        m = np.array([u, v, w], dtype=float)
        out = np.empty(4)
        for j, cols in enumerate(_MINOR_COLS):
            out[j] = (-1) ** j * np.linalg.det(m[:, cols])
        return out
    ref = next(x for x in (u, v, w) if isinstance(x, Jet))
    ut, vt, wt = (ref._coerce(x).taylor() for x in (u, v, w))
    cols = [(-1) ** j * _det3_taylor(ut, vt, wt, c) for j, c in enumerate(_MINOR_COLS)]
    return Jet.from_taylor(ref.base_point, np.stack(cols, axis=-1))


def det4(u, v, w, x):
    """Determinant of the 4x4 matrix with rows u, v, w, x."""
    if not any(isinstance(y, Jet) for y in (u, v, w, x)):
        return float(np.linalg.det(np.array([u, v, w, x], dtype=float)))
    return -dot(wedge3(u, v, w), x)


# ---------------------------------------------------------------------------
# change of variable
# ---------------------------------------------------------------------------


def compose(outer: Jet, inner: Jet) -> Jet:
    """Jet of ``outer(inner(u))`` in the variable of ``inner``.

    ``outer`` is a jet in t at t0 and ``inner`` a scalar jet whose value is t0.
    """
    if inner.shape:
        raise TypeError("inner jet must be scalar")
    if not _same_point(inner.value, outer.base_point):
        raise JetError(
            f"inner jet value {inner.value} does not match outer base point {outer.base_point}"
        )
    n = min(outer.order, inner.order)
    ct = outer.taylor()[: n + 1]
    u = inner.truncate(n) - inner.value
    result = lift_constant(ct[n], inner.base_point, n)
    for k in range(n - 1, -1, -1):
        result = result * u + lift_constant(ct[k], inner.base_point, n)
    return result


def invert(tau: Jet, base_point: float | None = None) -> Jet:
    """Jet of the inverse function of a scalar jet with non-zero slope.

    ``tau`` is a jet in t at t0 with value s0; the result is the jet of
    ``t(s)`` at ``s0`` (or at ``base_point`` if given, which must equal s0).
    """
    if tau.shape:
        raise TypeError("only scalar jets can be inverted")
    if tau.order < 1 or tau.coeffs[1] == 0.0:
        raise JetError("derivative undefined: inverse of a jet with zero slope")
    s0 = tau.value if base_point is None else base_point
    n = tau.order
    t0 = tau.base_point
    slope = tau.coeffs[1]
    svar = lift_variable(s0, n)
    t_of_s = lift_constant(t0, s0, n) + (svar - s0) / slope
    for _ in range(n + 1):
        t_of_s = t_of_s - (compose(tau, t_of_s) - svar) / slope
    return t_of_s


def linear_flow(K: Jet, W0) -> Jet:
    """Jet of the solution of ``W' = K(t) W`` with ``W(t0) = W0``.

    ``K`` is a matrix-valued jet of order n-1; the result has order n.
    """
    kt = K.taylor()
    w0 = np.asarray(W0, dtype=float)
    n = kt.shape[0]
    wt = np.zeros((n + 1,) + w0.shape)
    wt[0] = w0
    for k in range(n):
        acc = np.zeros_like(w0)
        for j in range(k + 1):
            acc = acc + kt[j] @ wt[k - j]
        wt[k + 1] = acc / (k + 1)
    return Jet.from_taylor(K.base_point, wt)
