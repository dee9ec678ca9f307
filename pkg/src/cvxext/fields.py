"""Scalar fields with derivative oracles, and the closed-form field catalog."""
from __future__ import annotations

from math import pi

import numpy as np

from . import taylor as tl
from .errors import InvalidArgument
from .taylor import Jet


class Field:
    """A function R^n -> R that can report Taylor jets at batches of points.

    Subclasses implement :meth:`jet`; :meth:`value` may be overridden with a
    cheaper path.
    """

    n: int
    order: int | None = None  # highest meaningful derivative order, None = any
    name: str = "field"

    def jet(self, X, order: int) -> Jet:
        raise NotImplementedError

    def value(self, X) -> np.ndarray:
        return self.jet(X, 0).value.copy()

    def __call__(self, X):
        return self.value(X)

    def gradient(self, X) -> np.ndarray:
        return self.jet(X, 1).gradient()

    def hessian(self, X) -> np.ndarray:
        return self.jet(X, 2).hessian()

    def taylor(self, X, order: int) -> Jet:
        return self.jet(X, order)

    def _points(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, self.n) if self.n > 1 or X.size == 0 else X[:, None]
        if X.shape[1] != self.n:
            raise InvalidArgument(f"{self.name}: expected points in R^{self.n}, got shape {X.shape}")
        return X


class ScalarField(Field):
    """Field defined by a function of the coordinate list.

    ``fn`` receives ``[x_0, ..., x_{n-1}]`` (numpy arrays or jets) and must be
    written with operators and the elementary functions of :mod:`taylor`.
    """

    def __init__(self, n: int, fn, name: str = "field", order: int | None = None,
                 params: dict | None = None):
        self.n = n
        self.fn = fn
        self.name = name
        self.order = order
        self.params = params or {}

    def value(self, X):
        X = self._points(X)
        with np.errstate(all="ignore"):
            out = self.fn([X[:, i] for i in range(self.n)])
        return np.broadcast_to(np.asarray(out, dtype=float), (X.shape[0],)).copy()

    def jet(self, X, order):
        X = self._points(X)
        xs = tl.variables(X, order)
        with np.errstate(all="ignore"):
            out = self.fn(xs)
        if not isinstance(out, Jet):
            out = Jet.constant(np.broadcast_to(np.asarray(out, float), (X.shape[0],)),
                               xs[0].basis)
        return out


class PolynomialField(Field):
    """``sum_alpha c_alpha (x - center)^alpha``."""

    def __init__(self, center, coeffs, degree: int, name: str = "polynomial"):
        self.center = np.asarray(center, dtype=float)
        self.n = self.center.size
        self.degree = degree
        self.basis = tl.basis(self.n, degree)
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.name = name

    def value(self, X):
        X = self._points(X)
        return self.basis.powers(X - self.center) @ self.coeffs

    def jet(self, X, order):
        X = self._points(X)
        xs = tl.variables(X, order)
        hs = [x - c for x, c in zip(xs, self.center)]
        pw = [[Jet.constant(1.0, xs[0].basis, X.shape[0])] for _ in hs]
        for i, h in enumerate(hs):
            for _ in range(self.degree):
                pw[i].append(pw[i][-1] * h)
        out = Jet.constant(0.0, xs[0].basis, X.shape[0])
        for c, e in zip(self.coeffs, self.basis.exps):
            if c == 0.0:
                continue
            term = pw[0][e[0]]
            for i in range(1, self.n):
                if e[i]:
                    term = term * pw[i][e[i]]
            out = out + term * c
        return out


class SumField(Field):
    """Linear combination ``sum_i c_i F_i``."""

    def __init__(self, terms, name="sum"):
        self.terms = [(float(c), f) for c, f in terms]
        self.n = self.terms[0][1].n
        self.name = name

    def value(self, X):
        return sum(c * f.value(X) for c, f in self.terms)

    def jet(self, X, order):
        out = None
        for c, f in self.terms:
            j = f.jet(X, order) * c
            out = j if out is None else out + j
        return out


class ProductField(Field):
    def __init__(self, a: Field, b: Field, name="product"):
        self.a, self.b = a, b
        self.n = a.n
        self.name = name

    def value(self, X):
        return self.a.value(X) * self.b.value(X)

    def jet(self, X, order):
        return self.a.jet(X, order) * self.b.jet(X, order)


# ---------------------------------------------------------------------------
# catalog


def quadratic(A=None, b=None, c=0.0, n=2) -> ScalarField:
    """``x^T A x + b.x + c`` (``A`` defaults to the identity)."""
    A = np.eye(n) if A is None else np.asarray(A, dtype=float)
    n = A.shape[0]
    b = np.zeros(n) if b is None else np.asarray(b, dtype=float)

    def fn(x):
        out = c
        for i in range(n):
            out = out + b[i] * x[i]
            for j in range(n):
                if A[i, j] != 0.0:
                    out = out + A[i, j] * (x[i] * x[j])
        return out

    return ScalarField(n, fn, "quadratic",
                       params={"A": A.tolist(), "b": b.tolist(), "c": float(c)})


def cubic_1d() -> ScalarField:
    """``x^2 - x^3``."""
    return ScalarField(1, lambda x: x[0] ** 2 - x[0] ** 3, "cubic_1d")


def cubic_nd(n=2) -> ScalarField:
    """``|x|^2 - x_1^3``."""
    return ScalarField(n, lambda x: sum(xi ** 2 for xi in x) - x[0] ** 3, "cubic_nd",
                       params={"n": n})


def singleton_cubic(n=2) -> ScalarField:
    """``|x|^2 + x_1^3``."""
    return ScalarField(n, lambda x: sum(xi ** 2 for xi in x) + x[0] ** 3, "singleton_cubic",
                       params={"n": n})


def strip_theta(y):
    return (1.0 - tl.cos(2.0 * pi * y)) / (2.0 * pi)


def flat_strip(m=4) -> ScalarField:
    """``theta(y) x^m`` with ``theta(y) = (1 - cos 2 pi y) / (2 pi)``."""
    if m < 2 or m % 2:
        raise InvalidArgument("flat_strip needs an even m >= 2")
    return ScalarField(2, lambda x: strip_theta(x[1]) * x[0] ** m, "flat_strip",
                       params={"m": m})


def hyperbola() -> ScalarField:
    """``-2 sqrt(xy) + 1/(x+1) + 1/(y+1)`` on the positive quadrant."""
    def fn(x):
        return -2.0 * tl.sqrt(x[0] * x[1]) + tl.reciprocal(x[0] + 1.0) + tl.reciprocal(x[1] + 1.0)
    return ScalarField(2, fn, "hyperbola")


def hyperbola_gradient(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    return np.stack([-np.sqrt(y / x) - 1.0 / (x + 1.0) ** 2,
                     -np.sqrt(x / y) - 1.0 / (y + 1.0) ** 2], axis=-1)


def ellipse(center=(0.0, 0.0), axes=(1.0, 1.0)) -> ScalarField:
    """``sum ((x_i - c_i) / a_i)^2``; strongly convex with constant ``2 / max(a)^2``."""
    center = np.asarray(center, dtype=float)
    axes = np.asarray(axes, dtype=float)
    n = center.size

    def fn(x):
        return sum(((x[i] - center[i]) / axes[i]) ** 2 for i in range(n))

    f = ScalarField(n, fn, "ellipse", params={"center": center.tolist(), "axes": axes.tolist()})
    f.strong_convexity = 2.0 / float(np.max(axes)) ** 2
    return f


def abs_field(n=1) -> ScalarField:
    """``|x|`` (nonsmooth control)."""
    return ScalarField(n, lambda x: tl.sqrt(sum(xi ** 2 for xi in x)), "abs", order=1,
                       params={"n": n})


def quartic_control() -> ScalarField:
    """``x^2 - x^4`` (non-convex control)."""
    return ScalarField(1, lambda x: x[0] ** 2 - x[0] ** 4, "quartic_control")


def zero(n=2) -> ScalarField:
    return ScalarField(n, lambda x: 0.0 * x[0], "zero", params={"n": n})


CATALOG = {
    "quadratic": quadratic,
    "cubic_1d": cubic_1d,
    "cubic_nd": cubic_nd,
    "singleton_cubic": singleton_cubic,
    "flat_strip": flat_strip,
    "hyperbola": hyperbola,
    "ellipse": ellipse,
    "abs": abs_field,
    "quartic_control": quartic_control,
    "zero": zero,
}


def build_field(name: str, params: dict | None = None) -> ScalarField:
    try:
        factory = CATALOG[name]
    except KeyError:
        raise InvalidArgument(f"unknown field {name!r}; known: {sorted(CATALOG)}") from None
    try:
        return factory(**(params or {}))
    except TypeError as exc:
        raise InvalidArgument(f"bad parameters for field {name!r}: {exc}") from None
