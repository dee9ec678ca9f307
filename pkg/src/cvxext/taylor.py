"""Truncated multivariate Taylor arithmetic.

A :class:`Jet` holds, for a batch of base points, the coefficients of the
Taylor polynomial of some function in the displacement ``h = x - x0``::

    f(x0 + h) = sum_{|alpha| <= order} c_alpha h^alpha + O(|h|^(order+1))

Arithmetic on jets propagates derivatives exactly (up to rounding), so any
field written with the operators and the elementary functions of this module
yields all its partial derivatives up to ``order``.  The functions
:func:`exp`, :func:`log`, :func:`sqrt`, :func:`sin`, :func:`cos` and
:func:`smooth_step` dispatch on their argument, so the same field code also
runs on plain numpy arrays.
"""
from __future__ import annotations

from functools import lru_cache
from math import factorial

import numpy as np


class MonomialBasis:
    """Monomials in ``n`` variables of total degree ``<= order``.

    Ordered by degree, then lexicographically descending inside a degree
    (``x0^2, x0 x1, x1^2`` for ``n=2``).
    """

    def __init__(self, n: int, order: int):
        if n < 1 or order < 0:
            raise ValueError(f"bad basis n={n} order={order}")
        self.n = n
        self.order = order
        exps = []
        for d in range(order + 1):
            exps.extend(_compositions(d, n))
        self.exps = np.array(exps, dtype=int).reshape(-1, n)
        self.size = len(exps)
        self.index = {e: i for i, e in enumerate(exps)}
        self.degree = self.exps.sum(axis=1)
        self.alpha_factorial = np.array(
            [np.prod([factorial(a) for a in e]) for e in exps], dtype=float)
        self._starts = np.searchsorted(self.degree, np.arange(order + 2))
        self._build_product_table()

    def degree_slice(self, d: int) -> slice:
        return slice(self._starts[d], self._starts[d + 1])

    def _build_product_table(self):
        ia, ib, ic = [], [], []
        for i, ei in enumerate(self.exps):
            for j, ej in enumerate(self.exps):
                if self.degree[i] + self.degree[j] > self.order:
                    continue
                ia.append(i)
                ib.append(j)
                ic.append(self.index[tuple(ei + ej)])
        ia, ib, ic = map(np.asarray, (ia, ib, ic))
        order = np.argsort(ic, kind="stable")
        self._ia, self._ib, ic = ia[order], ib[order], ic[order]
        self._targets, self._starts_pairs = np.unique(ic, return_index=True)

    def product(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        terms = a[:, self._ia] * b[:, self._ib]
        out = np.zeros((a.shape[0], self.size))
        out[:, self._targets] = np.add.reduceat(terms, self._starts_pairs, axis=1)
        return out

    def powers(self, h: np.ndarray) -> np.ndarray:
        """Matrix of ``h^alpha``, shape ``(N, size)``."""
        h = np.atleast_2d(np.asarray(h, dtype=float))
        out = np.ones((h.shape[0], self.size))
        for k in range(self.n):
            out *= h[:, k:k + 1] ** self.exps[:, k]
        return out

    def derivative_map(self, var: int) -> np.ndarray:
        """Linear map on coefficient vectors implementing d/dx_var."""
        D = np.zeros((self.size, self.size))
        for i, e in enumerate(self.exps):
            if e[var] == 0:
                continue
            e2 = e.copy()
            e2[var] -= 1
            D[self.index[tuple(e2)], i] = e[var]
        return D


def _compositions(d, n):
    if n == 1:
        return [(d,)]
    out = []
    for first in range(d, -1, -1):
        for rest in _compositions(d - first, n - 1):
            out.append((first,) + rest)
    return out


@lru_cache(maxsize=None)
def basis(n: int, order: int) -> MonomialBasis:
    return MonomialBasis(n, order)


class Jet:
    """Batch of truncated Taylor polynomials sharing one basis."""

    __array_priority__ = 1000

    def __init__(self, coeffs: np.ndarray, mb: MonomialBasis):
        self.c = coeffs
        self.basis = mb

    # construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, mb: MonomialBasis, size: int | None = None):
        value = np.asarray(value, dtype=float)
        if value.ndim == 0:
            value = np.full(size or 1, float(value))
        c = np.zeros((value.shape[0], mb.size))
        c[:, 0] = value
        return cls(c, mb)

    @property
    def value(self) -> np.ndarray:
        return self.c[:, 0]

    def __len__(self):
        return self.c.shape[0]

    def _lift(self, other) -> Jet:
        if isinstance(other, Jet):
            return other
        return Jet.constant(np.broadcast_to(np.asarray(other, float), (len(self),)),
                            self.basis)

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.c + other.c, self.basis)
        c = self.c.copy()
        c[:, 0] += other
        return Jet(c, self.basis)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.basis)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return Jet(self.basis.product(self.c, other.c), self.basis)
        other = np.asarray(other, dtype=float)
        if other.ndim == 1:
            other = other[:, None]
        return Jet(self.c * other, self.basis)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * reciprocal(other)
        other = np.asarray(other, dtype=float)
        if other.ndim == 1:
            other = other[:, None]
        return Jet(self.c / other, self.basis)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) and p >= 0:
            if p == 0:
                return Jet.constant(1.0, self.basis, len(self))
            result, base = None, self
            while p:
                if p & 1:
                    result = base if result is None else result * base
                p >>= 1
                if p:
                    base = base * base
            return result
        return power(self, float(p))

    def __abs__(self):
        return self * np.sign(self.value)

    # derivative access ------------------------------------------------
    def homogeneous(self, d: int) -> np.ndarray:
        """Coefficients of the degree-``d`` part, shape ``(N, n_d)``."""
        return self.c[:, self.basis.degree_slice(d)]

    def partials(self) -> np.ndarray:
        """All partial derivatives ``D^alpha f(x0)`` (coefficients times alpha!)."""
        return self.c * self.basis.alpha_factorial

    def gradient(self) -> np.ndarray:
        n = self.basis.n
        return self.c[:, 1:1 + n].copy()

    def hessian(self) -> np.ndarray:
        n = self.basis.n
        H = np.empty((len(self), n, n))
        for i in range(n):
            for j in range(i, n):
                e = [0] * n
                e[i] += 1
                e[j] += 1
                k = self.basis.index[tuple(e)]
                val = self.c[:, k] * (2.0 if i == j else 1.0)
                H[:, i, j] = val
                H[:, j, i] = val
        return H

    def take(self, idx) -> Jet:
        return Jet(self.c[idx], self.basis)


def variables(points: np.ndarray, order: int) -> list[Jet]:
    """Identity jets ``x_i`` at each of ``points`` (shape ``(N, n)``)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    N, n = points.shape
    mb = basis(n, order)
    out = []
    for i in range(n):
        c = np.zeros((N, mb.size))
        c[:, 0] = points[:, i]
        if order >= 1:
            e = [0] * n
            e[i] = 1
            c[:, mb.index[tuple(e)]] = 1.0
        out.append(Jet(c, mb))
    return out


def compose(u: Jet, derivs: np.ndarray) -> Jet:
    """``f(u)`` given ``derivs[k] = f^(k)(u.value)`` for ``k = 0..order``."""
    order = u.basis.order
    delta = u.c.copy()
    delta[:, 0] = 0.0
    out = np.zeros_like(u.c)
    out[:, 0] = derivs[0]
    term = None
    for k in range(1, order + 1):
        term = delta if term is None else u.basis.product(term, delta)
        out += (derivs[k] / factorial(k))[:, None] * term
    return Jet(out, u.basis)


def _unary(name, np_fn, deriv_fn):
    def fn(x):
        if isinstance(x, Jet):
            return compose(x, deriv_fn(x.value, x.basis.order))
        return np_fn(x)
    fn.__name__ = name
    return fn


def _exp_derivs(u0, J):
    e = np.exp(u0)
    return [e] * (J + 1)


def _log_derivs(u0, J):
    out = [np.log(u0)]
    for k in range(1, J + 1):
        out.append((-1.0) ** (k - 1) * factorial(k - 1) / u0 ** k)
    return out


def _power_derivs(p):
    def derivs(u0, J):
        out, coef = [], 1.0
        for k in range(J + 1):
            if isinstance(p, int) and k > p:
                out.append(np.zeros_like(u0))
            else:
                out.append(coef * u0 ** (p - k))
            coef *= (p - k)
        return out
    return derivs


def _sin_derivs(u0, J):
    s, c = np.sin(u0), np.cos(u0)
    cyc = [s, c, -s, -c]
    return [cyc[k % 4] for k in range(J + 1)]


def _cos_derivs(u0, J):
    s, c = np.sin(u0), np.cos(u0)
    cyc = [c, -s, -c, s]
    return [cyc[k % 4] for k in range(J + 1)]


exp = _unary("exp", np.exp, _exp_derivs)
log = _unary("log", np.log, _log_derivs)
sin = _unary("sin", np.sin, _sin_derivs)
cos = _unary("cos", np.cos, _cos_derivs)
sqrt = _unary("sqrt", np.sqrt, _power_derivs(0.5))


def reciprocal(x):
    if isinstance(x, Jet):
        return compose(x, _power_derivs(-1.0)(x.value, x.basis.order))
    return 1.0 / x


def power(x, p: float):
    if isinstance(x, Jet):
        return compose(x, _power_derivs(p)(x.value, x.basis.order))
    return np.asarray(x, dtype=float) ** p


# Below this argument exp(-1/z) and all its derivatives up to moderate order
# are far below double precision relative to the partner term.
_FLAT_CUTOFF = 1.0 / 300.0


def _flat_exp(z):
    """``exp(-1/z)`` for ``z > 0`` else 0."""
    if isinstance(z, Jet):
        z0 = z.value
        live = z0 > _FLAT_CUTOFF
        out = np.zeros_like(z.c)
        if np.any(live):
            zl = z.take(live)
            out[live] = exp(-reciprocal(zl)).c
        return Jet(out, z.basis)
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    live = z > _FLAT_CUTOFF
    out[live] = np.exp(-1.0 / z[live])
    return out


def smooth_step(z):
    """C-infinity transition: 0 for ``z <= 0``, 1 for ``z >= 1``.

    ``S(z) = e(z) / (e(z) + e(1 - z))`` with ``e(z) = exp(-1/z)``.
    """
    if isinstance(z, Jet):
        z0 = z.value
        out = np.zeros_like(z.c)
        out[z0 >= 1.0, 0] = 1.0
        mid = (z0 > 0.0) & (z0 < 1.0)
        if np.any(mid):
            zm = z.take(mid)
            a = _flat_exp(zm)
            b = _flat_exp(1.0 - zm)
            out[mid] = (a / (a + b)).c
        return Jet(out, z.basis)
    z = np.asarray(z, dtype=float)
    a = _flat_exp(z)
    b = _flat_exp(1.0 - z)
    with np.errstate(invalid="ignore"):
        s = a / (a + b)
    return np.where(z >= 1.0, 1.0, np.where(z <= 0.0, 0.0, s))
