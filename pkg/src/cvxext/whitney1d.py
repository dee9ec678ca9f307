"""One-dimensional profiles: the dyadic partition of unity, the flat function
``eps``, its rescaled version ``eps_tilde`` and double primitive ``g`` (smooth
pipeline), plus the piecewise-affine modulus ``omega`` and its iterated
primitives (finite-order pipelines).

All evaluators accept numpy arrays; the partition and ``eps`` evaluators also
accept 1D :class:`~cvxext.taylor.Jet` arguments, which is how exact
higher derivatives are obtained.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np
from scipy.interpolate import BPoly, PPoly

from . import taylor as tl
from .errors import InvalidArgument, RangeError
from .taylor import Jet

K_MIN = -40
K_MAX = 11


def _as_jet(t, order):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return tl.variables(t[:, None], order)[0]


def _value(t):
    return t.value if isinstance(t, Jet) else np.asarray(t, dtype=float)


# ---------------------------------------------------------------------------
# dyadic cover and partition of unity


@dataclass(frozen=True)
class DyadicCover:
    k_min: int = K_MIN
    k_max: int = K_MAX

    def midpoint(self, k):
        return 1.5 * np.exp2(k)

    def length(self, k):
        return np.exp2(np.asarray(k, dtype=float))

    def interval(self, k):
        return (2.0 ** k, 2.0 ** (k + 1))

    def starred(self, k):
        return (0.75 * 2.0 ** k, 2.25 * 2.0 ** k)

    def base_index(self, t):
        with np.errstate(divide="ignore"):
            return np.floor(np.log2(np.maximum(_value(t), 1e-300))).astype(int)

    def active(self, t):
        """Indices ``k`` with ``t`` inside the open starred interval."""
        t = float(t)
        k0 = int(np.floor(np.log2(t)))
        out = []
        for k in (k0 - 1, k0, k0 + 1):
            lo, hi = self.starred(k)
            if self.k_min <= k <= self.k_max and lo < t < hi:
                out.append(k)
        return out

    def covered(self, t):
        v = _value(t)
        return (v >= 2.0 ** self.k_min) & (v <= 2.0 ** (self.k_max + 1))


def theta0(u):
    """Bump equal to 1 on ``[-1/2, 1/2]`` and supported in ``(-3/4, 3/4)``."""
    return tl.smooth_step(3.0 - 4.0 * abs(u))


def _theta_k(t, k, cover):
    k = np.asarray(k)
    valid = (k >= cover.k_min) & (k <= cover.k_max)
    u = (t - cover.midpoint(k)) / cover.length(k)
    th = theta0(u)
    if isinstance(th, Jet):
        th.c[~valid] = 0.0
        return th
    return np.where(valid, th, 0.0)


def _neighbours(t, cover):
    k0 = cover.base_index(t)
    return [k0 - 1, k0, k0 + 1]


def phi_sum(t, cover: DyadicCover = DyadicCover()):
    """``Phi(t) = sum_k theta_k(t)``."""
    return sum(_theta_k(t, k, cover) for k in _neighbours(t, cover))


def partition_member(k, t, cover: DyadicCover = DyadicCover()):
    """``theta_k^*(t) = theta_k(t) / Phi(t)``."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise InvalidArgument("partition members are defined for t > 0")
    kk = np.broadcast_to(np.asarray(k), t.shape)
    return _theta_k(t, kk, cover) / phi_sum(t, cover)


def partition_derivative(j, k, t, cover: DyadicCover = DyadicCover()):
    """``j``-th derivative of ``theta_k^*`` at ``t``."""
    tj = _as_jet(t, j)
    kk = np.full(len(tj), k)
    out = _theta_k(tj, kk, cover) / phi_sum(tj, cover)
    return out.c[:, j] * factorial(j)


def derivative_constants(J, cover: DyadicCover = DyadicCover(), ks=None, points=4000):
    """Grid estimates ``A_j = sup |(theta_k^*)^(j)| l_k^j`` for ``j = 0..J``."""
    ks = range(-5, 6) if ks is None else ks
    A = np.zeros(J + 1)
    for k in ks:
        lo, hi = cover.starred(k)
        t = np.linspace(lo, hi, points + 2)[1:-1]
        tj = _as_jet(t, J)
        th = _theta_k(tj, np.full(len(t), k), cover) / phi_sum(tj, cover)
        der = th.c * np.array([factorial(j) for j in range(J + 1)])
        A = np.maximum(A, np.max(np.abs(der), axis=0) * cover.length(k) ** np.arange(J + 1))
    return A


# ---------------------------------------------------------------------------
# delta sequence, gamma exponents and eps


def build_delta_sequence(r_sequence, P: int) -> np.ndarray:
    """``delta_1..delta_P`` from ``r_sequence`` indexed so that ``r_sequence[m] = r_m``.

    ``r_sequence`` may be a dict or a list whose index 0 corresponds to
    ``r_0``; entries ``r_3 .. r_{P+2}`` are used.
    """
    r = dict(r_sequence) if isinstance(r_sequence, dict) else dict(enumerate(r_sequence))
    delta = np.empty(P + 1)
    delta[0] = np.nan
    for p in range(1, P + 1):
        rp = r.get(p + 2)
        if rp is None or not rp > 0:
            raise InvalidArgument(f"r_{p + 2} must be a positive number")
        cand = min(float(rp), 1.0 / factorial(p + 2))
        delta[p] = cand if p == 1 else min(cand, 0.49 * delta[p - 1])
    return delta


def band_index(t, delta) -> np.ndarray:
    """``q`` with ``delta_{q+1} <= t < delta_q`` (0 if ``t >= delta_1``, capped at ``P``)."""
    d = delta[1:]
    t = np.asarray(t, dtype=float)
    return np.sum(d[None, :] > t.reshape(-1, 1), axis=1).reshape(t.shape)


def _tpow(t, gam):
    """``t ** gam`` for per-sample integer exponents ``gam``."""
    if isinstance(t, Jet):
        J = t.basis.order
        derivs, coef = [], np.ones(len(t))
        for j in range(J + 1):
            derivs.append(coef * t.value ** (gam - j))
            coef = coef * (gam - j)
        return tl.compose(t, derivs)
    return t ** gam


@dataclass
class EpsilonMachinery:
    """Flat profile data for the smooth pipeline."""

    delta: np.ndarray
    n: int
    P: int
    cover: DyadicCover = field(default_factory=DyadicCover)
    coverage: float = 8.0
    knots: int = 20000
    t_lo: float = 1e-12

    def __post_init__(self):
        self._g1 = None
        self._g0 = None

    @classmethod
    def build(cls, r_sequence, n, P, coverage=8.0, **kw):
        return cls(build_delta_sequence(r_sequence, P), n, P, coverage=coverage, **kw)

    def gamma(self, k):
        """Exponent attached to the interval of index ``k``."""
        ell = self.cover.length(k)
        g = np.sum(self.delta[1:][None, :] > np.reshape(ell, (-1, 1)), axis=1)
        g = np.clip(g, 1, self.P)
        return g.reshape(np.shape(ell)) if np.ndim(ell) else int(g[0])

    def gamma_table(self):
        return {int(k): int(self.gamma(k)) for k in range(self.cover.k_min, self.cover.k_max + 1)}

    def epsilon(self, t):
        """``eps(t) = sum_k t^gamma_k theta_k^*(t)`` for ``t > 0``, else 0."""
        jet = isinstance(t, Jet)
        tv = _value(t)
        pos = tv > 0
        if jet:
            out = Jet(np.zeros_like(t.c), t.basis)
            if pos.any():
                tp = t.take(pos)
                out.c[pos] = self._eps_pos(tp).c
            return out
        tv = np.atleast_1d(tv)
        out = np.zeros_like(tv)
        if pos.any():
            out[pos] = self._eps_pos(tv[pos])
        return out

    def _eps_pos(self, t):
        ks = _neighbours(t, self.cover)
        thetas = [_theta_k(t, k, self.cover) for k in ks]
        Phi = sum(thetas)
        phiv = _value(Phi)
        live = phiv > 0
        num = sum(_tpow(t, self.gamma(k)) * th for k, th in zip(ks, thetas))
        if isinstance(t, Jet):
            safe = Jet(Phi.c.copy(), Phi.basis)
            safe.c[~live, 0] = 1.0
            out = num / safe
            out.c[~live] = 0.0
            return out
        return np.where(live, num / np.where(live, Phi, 1.0), 0.0)

    def epsilon_tilde(self, t):
        """``eps(2t) / t^(n+3)`` for ``t > 0``, else 0."""
        jet = isinstance(t, Jet)
        tv = _value(t)
        pos = tv > 0
        if jet:
            out = Jet(np.zeros_like(t.c), t.basis)
            if pos.any():
                tp = t.take(pos)
                out.c[pos] = (self.epsilon(2.0 * tp) * tl.power(tp, -(self.n + 3.0))).c
            return out
        tv = np.atleast_1d(np.asarray(tv, dtype=float))
        out = np.zeros_like(tv)
        if pos.any():
            tp = tv[pos]
            out[pos] = self.epsilon(2.0 * tp) / tp ** (self.n + 3)
        return out

    def epsilon_tilde_derivative(self, j, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if j == 0:
            return self.epsilon_tilde(t)
        return self.epsilon_tilde(_as_jet(t, j)).c[:, j] * factorial(j)

    # g and its derivatives ---------------------------------------------
    def _build_g(self):
        knots = np.concatenate([[0.0], np.geomspace(self.t_lo, self.coverage, self.knots)])
        knots = knots[1:]
        xg, wg = np.polynomial.legendre.leggauss(12)
        a, b = knots[:-1], knots[1:]
        half = 0.5 * (b - a)
        nodes = (0.5 * (a + b))[:, None] + half[:, None] * xg[None, :]
        et = self.epsilon_tilde(nodes.ravel()).reshape(nodes.shape)
        inc1 = half * (et @ wg)
        inc0 = half * ((et * (b[:, None] - nodes)) @ wg)
        g1 = np.concatenate([[0.0], np.cumsum(inc1)])
        g0 = np.zeros_like(g1)
        for i in range(1, len(knots)):
            g0[i] = g0[i - 1] + g1[i - 1] * (knots[i] - knots[i - 1]) + inc0[i - 1]
        e0 = self.epsilon_tilde(knots)
        e1 = self.epsilon_tilde_derivative(1, knots)
        self._g1 = BPoly.from_derivatives(knots, np.stack([g1, e0, e1], axis=1))
        self._g0 = BPoly.from_derivatives(knots, np.stack([g0, g1, e0], axis=1))
        self._knots = knots

    def _check_range(self, t):
        if np.any(t > self.coverage):
            raise RangeError(f"t={float(np.max(t)):.4g} beyond tabulated range {self.coverage}")

    def g_derivative(self, j, t):
        """``g^(j)(t)``; zero for ``t <= 0``."""
        t = np.asarray(t, dtype=float)
        self._check_range(t)
        if j >= 2:
            out = np.zeros(t.shape)
            pos = t > 0
            if pos.any():
                out[pos] = self.epsilon_tilde_derivative(j - 2, t[pos])
            return out
        if self._g1 is None:
            self._build_g()
        spline = self._g1 if j == 1 else self._g0
        out = np.zeros(t.shape)
        pos = t > self.t_lo
        if pos.any():
            out[pos] = spline(t[pos])
        return out

    def g_smooth(self, t):
        """``(g, g', g'')`` at ``t``."""
        return tuple(self.g_derivative(j, t) for j in range(3))

    def to_json(self):
        return {"delta": self.delta[1:].tolist(), "P": self.P, "n": self.n,
                "gamma": {str(k): v for k, v in self.gamma_table().items()},
                "coverage": self.coverage}


# ---------------------------------------------------------------------------
# omega and the finite-order profiles


@dataclass
class OmegaMachinery:
    """Piecewise-affine nondecreasing ``omega`` with nodes ``omega(r_p)``."""

    r: np.ndarray  # r[0] = r_1 > r[1] = r_2 > ...
    M: float

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if r.ndim != 1 or r.size < 1 or np.any(r <= 0) or np.any(np.diff(r) >= 0):
            raise InvalidArgument("omega breakpoints must be positive and strictly decreasing")
        if not self.M > 1:
            raise InvalidArgument("omega needs M > 1")
        self.r = r
        P = r.size
        vals = np.array([self.M] + [1.0 / (p - 1) for p in range(2, P + 1)])
        self.nodes = np.concatenate([[0.0], r[::-1]])
        self.values = np.concatenate([[0.0], vals[::-1]])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.interp(t, self.nodes, self.values, left=0.0, right=self.M)

    def ppoly(self, scale=1.0) -> PPoly:
        """``omega(scale * s)`` as a piecewise polynomial in ``s`` on ``[0, inf)``."""
        x = self.nodes / scale
        slopes = np.diff(self.values) / np.diff(x)
        c = np.vstack([np.append(slopes, 0.0), self.values])
        brk = np.append(x, x[-1] + 1.0)
        return PPoly(c, brk, extrapolate=True)

    def to_json(self):
        return {"r": self.r.tolist(), "M": self.M}


def build_omega(r_sequence, M, P=None) -> OmegaMachinery:
    r = np.asarray(r_sequence, dtype=float)
    if P is not None:
        r = r[:P]
    return OmegaMachinery(r, float(M))


class PiecewiseProfile:
    """Profile ``g`` given by a :class:`PPoly`, zero on ``(-inf, 0]``."""

    def __init__(self, poly: PPoly, depth: int, label: str = "g"):
        self.poly = poly
        self.depth = depth
        self.label = label
        self._ders = {0: poly}

    def derivative_poly(self, j):
        if j not in self._ders:
            self._ders[j] = self.poly.derivative(j)
        return self._ders[j]

    def g_derivative(self, j, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        pos = t > 0
        if pos.any():
            out[pos] = self.derivative_poly(j)(t[pos])
        return out

    def __call__(self, t):
        return self.g_derivative(0, t)

    def to_json(self):
        return {"label": self.label, "depth": self.depth,
                "breakpoints": self.poly.x.tolist(), "coefficients": self.poly.c.T.tolist()}


def g_finite(omega: OmegaMachinery, depth: int, scale: float) -> PiecewiseProfile:
    """``depth``-fold iterated primitive of ``s -> omega(scale s)`` from 0."""
    if depth < 1:
        raise InvalidArgument("depth must be >= 1")
    return PiecewiseProfile(omega.ppoly(scale).antiderivative(depth), depth, "g_finite")


class ScaledProfile:
    """``h(t) = g(c t)`` with chain-rule derivatives."""

    def __init__(self, g, c: float):
        if not c > 0:
            raise InvalidArgument("scale must be positive")
        self.g, self.c = g, float(c)

    def g_derivative(self, j, t):
        return self.c ** j * self.g.g_derivative(j, self.c * np.asarray(t, dtype=float))

    def __call__(self, t):
        return self.g_derivative(0, t)

    def to_json(self):
        return {"scale": self.c, "inner": self.g.to_json()}


def h_scaled(g, c: float) -> ScaledProfile:
    return ScaledProfile(g, c)


class PowerProfile:
    """``g(t) = t_+^p``."""

    def __init__(self, p: int):
        self.p = int(p)

    def g_derivative(self, j, t):
        t = np.asarray(t, dtype=float)
        if j > self.p:
            return np.zeros(t.shape)
        coef = factorial(self.p) / factorial(self.p - j)
        return np.where(t > 0, coef * np.maximum(t, 0.0) ** (self.p - j), 0.0)

    def __call__(self, t):
        return self.g_derivative(0, t)

    def to_json(self):
        return {"power": self.p}
