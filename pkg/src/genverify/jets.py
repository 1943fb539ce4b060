"""Forward-mode jet arithmetic, exact to second order.

Every derivative in the package (metric partials, Christoffel symbols,
curvature, Nijenhuis tensors) is obtained by evaluating expressions on
``Jet2`` values seeded at a chart point.  A lighter first-order ``Jet1``
carries derived quantities that already contain one metric derivative
(dual-connection coefficients, lifted-connection blocks), for which only
one further derivative is ever taken.

A central-difference oracle (`fd_oracle`) provides an independent check
of the jet arithmetic itself.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "Jet2",
    "Jet1",
    "JetDomainError",
    "seed",
    "const",
    "exp",
    "log",
    "sin",
    "cos",
    "sqrt",
    "pow_const",
    "fd_oracle",
]


class JetDomainError(ArithmeticError):
    """Raised when a jet operation leaves its numeric domain."""


def _is_int(c: float) -> bool:
    return abs(c - round(c)) < 1e-12


class Jet2:
    """A scalar with its first and second partials w.r.t. n coordinates.

    The Hessian stays symmetric by construction: every primitive either
    preserves symmetry exactly or is built from the unary chain rule
    ``f'*H + f''*g (x) g`` which does.
    """

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value: float, grad: np.ndarray, hess: np.ndarray):
        self.value = float(value)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = np.asarray(hess, dtype=float)

    @property
    def n(self) -> int:
        return self.grad.shape[0]

    def __repr__(self) -> str:
        return f"Jet2({self.value!r}, grad={self.grad!r})"

    # -- helpers --------------------------------------------------------

    def _coerce(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return const(float(other), self.n)
        return NotImplemented

    # -- ring operations ------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet2(self.value + o.value, self.grad + o.grad, self.hess + o.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.value, -self.grad, -self.hess)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet2(self.value - o.value, self.grad - o.grad, self.hess - o.hess)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        cross = np.outer(self.grad, o.grad)
        return Jet2(
            self.value * o.value,
            self.value * o.grad + o.value * self.grad,
            self.value * o.hess + o.value * self.hess + cross + cross.T,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.value == 0.0:
            raise JetDomainError("division by zero")
        return self * _compose(o, 1.0 / o.value, -1.0 / o.value**2, 2.0 / o.value**3)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __pow__(self, c):
        if isinstance(c, Jet2):
            return NotImplemented
        return pow_const(self, float(c))


def _compose(a: Jet2, f: float, fp: float, fpp: float) -> Jet2:
    """Order-2 chain rule for a unary map with values (f, f', f'') at a.value."""
    outer = np.outer(a.grad, a.grad)
    return Jet2(f, fp * a.grad, fp * a.hess + fpp * outer)


def seed(coordinate_index: int, value: float, n: int) -> Jet2:
    """Jet of the coordinate function x_{i+1} at the given value."""
    if not 0 <= coordinate_index < n:
        raise IndexError(f"coordinate index {coordinate_index} out of range for n={n}")
    g = np.zeros(n)
    g[coordinate_index] = 1.0
    return Jet2(value, g, np.zeros((n, n)))


def const(value: float, n: int) -> Jet2:
    return Jet2(value, np.zeros(n), np.zeros((n, n)))


def seed_point(x) -> list:
    """Seed every coordinate of a point, giving the jet environment at x."""
    x = np.asarray(x, dtype=float)
    return [seed(i, x[i], x.shape[0]) for i in range(x.shape[0])]


def exp(a):
    if not isinstance(a, Jet2):
        return math.exp(a)
    e = math.exp(a.value)
    return _compose(a, e, e, e)


def log(a):
    if not isinstance(a, Jet2):
        if a <= 0.0:
            raise JetDomainError(f"log of non-positive value {a}")
        return math.log(a)
    if a.value <= 0.0:
        raise JetDomainError(f"log of non-positive value {a.value}")
    return _compose(a, math.log(a.value), 1.0 / a.value, -1.0 / a.value**2)


def sin(a):
    if not isinstance(a, Jet2):
        return math.sin(a)
    s, c = math.sin(a.value), math.cos(a.value)
    return _compose(a, s, c, -s)


def cos(a):
    if not isinstance(a, Jet2):
        return math.cos(a)
    s, c = math.sin(a.value), math.cos(a.value)
    return _compose(a, c, -s, -c)


def sqrt(a):
    if not isinstance(a, Jet2):
        if a <= 0.0:
            raise JetDomainError(f"sqrt of non-positive value {a}")
        return math.sqrt(a)
    if a.value <= 0.0:
        raise JetDomainError(f"sqrt of non-positive value {a.value}")
    r = math.sqrt(a.value)
    return _compose(a, r, 0.5 / r, -0.25 / (r * a.value))


def pow_const(a, c: float):
    """a**c for a constant real exponent.

    Integer exponents work for any base (nonzero when c < 0); fractional
    exponents require a positive base.
    """
    if not isinstance(a, Jet2):
        return _pow_float(float(a), c)
    v = a.value
    if c == 0.0:
        return const(1.0, a.n)
    if c == 1.0:
        return Jet2(v, a.grad.copy(), a.hess.copy())
    if _is_int(c):
        if v == 0.0 and c < 0:
            raise JetDomainError("zero base with negative exponent")
        f = _pow_float(v, c)
        fp = c * _pow_float(v, c - 1) if not (v == 0.0 and c - 1 < 0) else 0.0
        if v == 0.0 and c - 2 < 0:
            fpp = 0.0
        else:
            fpp = c * (c - 1) * _pow_float(v, c - 2)
        return _compose(a, f, fp, fpp)
    if v <= 0.0:
        raise JetDomainError(f"non-positive base {v} with fractional exponent {c}")
    f = v**c
    return _compose(a, f, c * f / v, c * (c - 1) * f / v**2)


def _pow_float(v: float, c: float) -> float:
    if _is_int(c):
        if v == 0.0 and c < 0:
            raise JetDomainError("zero base with negative exponent")
        return float(v ** int(round(c)))
    if v <= 0.0:
        raise JetDomainError(f"non-positive base {v} with fractional exponent {c}")
    return float(v**c)


class Jet1:
    """A scalar with first partials only.

    Used for quantities that already carry one derivative of field data
    (e.g. dual-connection coefficients contain dh), whose own Hessian
    would need third field derivatives.  Only one further derivative is
    ever taken of such quantities, so first order suffices.
    """

    __slots__ = ("value", "grad")

    def __init__(self, value: float, grad: np.ndarray):
        self.value = float(value)
        self.grad = np.asarray(grad, dtype=float)

    @property
    def n(self) -> int:
        return self.grad.shape[0]

    def __repr__(self) -> str:
        return f"Jet1({self.value!r}, grad={self.grad!r})"

    def _coerce(self, other) -> "Jet1":
        if isinstance(other, Jet1):
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet1(float(other), np.zeros(self.grad.shape[0]))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet1(self.value + o.value, self.grad + o.grad)

    __radd__ = __add__

    def __neg__(self):
        return Jet1(-self.value, -self.grad)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet1(self.value - o.value, self.grad - o.grad)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet1(self.value * o.value, self.value * o.grad + o.value * self.grad)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.value == 0.0:
            raise JetDomainError("division by zero")
        inv = 1.0 / o.value
        return Jet1(
            self.value * inv,
            inv * self.grad - (self.value * inv * inv) * o.grad,
        )

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def sqrt(self) -> "Jet1":
        if self.value <= 0.0:
            raise JetDomainError(f"sqrt of non-positive value {self.value}")
        r = math.sqrt(self.value)
        return Jet1(r, (0.5 / r) * self.grad)


# -- object-array helpers ---------------------------------------------------
#
# Tensors of jets are held in numpy object arrays; numpy's dot/matmul
# dispatch to the operators above, so contractions read like plain
# linear algebra.


def oarray(shape) -> np.ndarray:
    return np.empty(shape, dtype=object)


def j2_array(values: np.ndarray, grads: np.ndarray, hesses: np.ndarray) -> np.ndarray:
    """Object array of Jet2 from stacked component arrays.

    values has shape S, grads S+(n,), hesses S+(n,n).
    """
    values = np.asarray(values, dtype=float)
    out = oarray(values.shape)
    for idx in np.ndindex(values.shape):
        out[idx] = Jet2(values[idx], grads[idx], hesses[idx])
    return out


def j1_array(values: np.ndarray, grads: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    out = oarray(values.shape)
    for idx in np.ndindex(values.shape):
        out[idx] = Jet1(values[idx], grads[idx])
    return out


def j1_const_array(values: np.ndarray, n: int) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return j1_array(values, np.zeros(values.shape + (n,)))


def jvalues(arr: np.ndarray) -> np.ndarray:
    """Float array of .value over an object array of jets."""
    arr = np.asarray(arr)
    out = np.empty(arr.shape, dtype=float)
    for idx in np.ndindex(arr.shape):
        out[idx] = arr[idx].value
    return out


def jgrads(arr: np.ndarray) -> np.ndarray:
    """Float array of .grad, with the coordinate axis appended last."""
    arr = np.asarray(arr)
    first = arr[next(iter(np.ndindex(arr.shape)))] if arr.shape else arr[()]
    n = first.n
    out = np.empty(arr.shape + (n,), dtype=float)
    for idx in np.ndindex(arr.shape):
        out[idx] = arr[idx].grad
    return out


def jhesses(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr)
    first = arr[next(iter(np.ndindex(arr.shape)))]
    n = first.n
    out = np.empty(arr.shape + (n, n), dtype=float)
    for idx in np.ndindex(arr.shape):
        out[idx] = arr[idx].hess
    return out


def to_j1(arr: np.ndarray) -> np.ndarray:
    """Downgrade an object array of Jet2 to Jet1."""
    arr = np.asarray(arr)
    out = oarray(arr.shape)
    for idx in np.ndindex(arr.shape):
        j = arr[idx]
        out[idx] = Jet1(j.value, j.grad)
    return out


def partial_j1(arr: np.ndarray, k: int) -> np.ndarray:
    """Jet1 array of the k-th partial of a Jet2 array.

    The value is grad[k] and the gradient row comes from the Hessian, so
    the result is exact.
    """
    arr = np.asarray(arr)
    out = oarray(arr.shape)
    for idx in np.ndindex(arr.shape):
        j = arr[idx]
        out[idx] = Jet1(j.grad[k], j.hess[k])
    return out


def fd_oracle(f, x, step: float = 1e-4):
    """Central-difference gradient and Hessian of a scalar callable.

    Independent of the jet arithmetic: plain stencils, nothing shared.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    h = float(step)
    grad = np.zeros(n)
    hess = np.zeros((n, n))
    f0 = f(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        fp = f(x + ei)
        fm = f(x - ei)
        grad[i] = (fp - fm) / (2 * h)
        hess[i, i] = (fp - 2 * f0 + fm) / h**2
    for i in range(n):
        for j in range(i + 1, n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = h
            ej[j] = h
            val = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (
                4 * h**2
            )
            hess[i, j] = val
            hess[j, i] = val
    return grad, hess
