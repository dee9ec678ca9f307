"""Convexifying functions that vanish to high order on a body.

Two forms are provided: a sphere integral of a 1D profile composed with
``<x, w> - h(w)`` (any body), and a sum of profiles composed with
``psi_j - 1`` for finite intersections of ovaloids.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np
from scipy.stats import qmc

from . import taylor as tl
from ._linalg import min_eigenvalue
from .errors import ConstructionFailure, InvalidArgument
from .fields import Field
from .geometry import ConvexBody, Intersection, cap_constant, sphere_volume
from .taylor import Jet

CHUNK = 2048


@dataclass(frozen=True)
class SphereQuadrature:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n(self):
        return self.nodes.shape[1]

    def integrate(self, values):
        return values @ self.weights


def build_quadrature(n: int, resolution: int | None = None, seed: int = 0,
                     focus=None) -> SphereQuadrature:
    """Deterministic rules for ``n <= 3``, scrambled Halton points otherwise.

    ``resolution`` is the number of angles for ``n = 2`` (default 720) and
    the number of polar nodes for ``n = 3`` (default 64, with twice as many
    azimuthal nodes).  For ``n = 2``, ``focus`` directions (facet normals of
    a polygon) get geometrically graded extra nodes, with periodic
    trapezoid weights.
    """
    if n < 1:
        raise InvalidArgument("dimension must be positive")
    if n == 1:
        return SphereQuadrature(np.array([[1.0], [-1.0]]), np.ones(2))
    if n == 2:
        k = resolution or 720
        a = 2 * pi * np.arange(k) / k
        if focus is None or len(focus) == 0:
            return SphereQuadrature(np.stack([np.cos(a), np.sin(a)], axis=1),
                                    np.full(k, 2 * pi / k))
        grade = np.geomspace(1e-7, 2 * pi / k, 48)[:-1]
        extra = [np.arctan2(u[1], u[0]) + s * grade for u in np.atleast_2d(focus)
                 for s in (-1.0, 1.0)]
        extra += [np.arctan2(u[1], u[0]) for u in np.atleast_2d(focus)]
        a = np.concatenate([a, np.hstack(extra)]) % (2 * pi)
        a = np.unique(a)
        gap = np.diff(np.concatenate([a, [a[0] + 2 * pi]]))
        w = 0.5 * (gap + np.roll(gap, 1))
        return SphereQuadrature(np.stack([np.cos(a), np.sin(a)], axis=1), w)
    if n == 3:
        p = resolution or 64
        z, wz = np.polynomial.legendre.leggauss(p)
        az = 2 * pi * (np.arange(2 * p) + 0.5) / (2 * p)
        Z, A = np.meshgrid(z, az, indexing="ij")
        s = np.sqrt(1 - Z ** 2)
        nodes = np.stack([s * np.cos(A), s * np.sin(A), Z], axis=-1).reshape(-1, 3)
        weights = np.outer(wz, np.full(2 * p, 2 * pi / (2 * p))).ravel()
        return SphereQuadrature(nodes, weights)
    k = resolution or 4096
    from scipy.special import ndtri

    u = qmc.Halton(d=n, scramble=True, seed=seed).random(k)
    X = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    return SphereQuadrature(X, np.full(k, sphere_volume(n - 1) / k))


class IntegralConvexifier(Field):
    """``phi(x) = int g(<x, w> - h(w)) dw`` via a sphere quadrature."""

    name = "phi"

    def __init__(self, body: ConvexBody, profile, quad: SphereQuadrature):
        if quad.n != body.n:
            raise InvalidArgument("quadrature dimension does not match body")
        self.body = body
        self.profile = profile
        self.quad = quad
        self.n = body.n
        self.h = body.support(quad.nodes)

    def _slack(self, X):
        return X @ self.quad.nodes.T - self.h

    def value(self, X):
        X = self._points(X)
        out = np.empty(len(X))
        for s in range(0, len(X), CHUNK):
            S = self._slack(X[s:s + CHUNK])
            G = np.zeros_like(S)
            pos = S > 0
            if pos.any():
                G[pos] = self.profile.g_derivative(0, S[pos])
            out[s:s + CHUNK] = G @ self.quad.weights
        return out

    def jet(self, X, order):
        X = self._points(X)
        mb = tl.basis(self.n, order)
        Wp = mb.powers(self.quad.nodes) / mb.alpha_factorial
        out = np.zeros((len(X), mb.size))
        for s in range(0, len(X), CHUNK):
            S = self._slack(X[s:s + CHUNK])
            pos = S > 0
            if not pos.any():
                continue
            for d in range(order + 1):
                G = np.zeros_like(S)
                G[pos] = self.profile.g_derivative(d, S[pos])
                sl = mb.degree_slice(d)
                out[s:s + CHUNK, sl] = (G * self.quad.weights) @ Wp[:, sl]
        return Jet(out, mb)


class FioConvexifier(Field):
    """``phi(x) = sum_j h(psi_j(x) - 1)``."""

    name = "phi_fio"

    def __init__(self, psis, profile):
        self.psis = list(psis)
        self.profile = profile
        self.n = self.psis[0].n

    def value(self, X):
        X = self._points(X)
        return sum(self.profile.g_derivative(0, p.value(X) - 1.0) for p in self.psis)

    def jet(self, X, order):
        X = self._points(X)
        out = None
        for p in self.psis:
            u = p.jet(X, order) - 1.0
            derivs = [self.profile.g_derivative(k, u.value) for k in range(order + 1)]
            term = tl.compose(u, derivs)
            out = term if out is None else out + term
        return out


# ---------------------------------------------------------------------------
# constants and scale


def smooth_constant(n: int, diam: float) -> float:
    """``C(n) = V(n) / (36 (1 + diam)^(n+1))``."""
    return cap_constant(n) / (36.0 * (1.0 + diam) ** (n + 1))


def finite_constant(n: int, m: int, diam: float) -> float:
    expo = sum(range(2, m - n - 1))
    return cap_constant(n) / (36.0 * 2.0 ** expo * (1.0 + diam) ** (n + 1))


def fio_constant(M: float, L: float, beta: float, m: int) -> float:
    return M * L / beta / 2.0 ** sum(range(1, m - 1))


def compute_constants(n: int, diam: float, m: int, pipeline: str, L=None, beta=None,
                      M=None) -> dict:
    rec = {"n": n, "diam": float(diam), "m": m, "pipeline": pipeline,
           "V": cap_constant(n) if n >= 1 else None}
    if pipeline in ("smooth", "strict"):
        rec["C"] = smooth_constant(n, diam)
    elif pipeline == "finite":
        if m < n + 3:
            raise InvalidArgument("finite pipeline needs m >= n + 3")
        rec["k"] = finite_constant(n, m, diam)
    elif pipeline == "fio":
        if None in (L, beta, M):
            raise InvalidArgument("fio constants need L, beta and M")
        if m < 3:
            raise InvalidArgument("fio pipeline needs m >= 3")
        rec.update(L=float(L), beta=float(beta), M=float(M), k=fio_constant(M, L, beta, m))
    else:
        raise InvalidArgument(f"unknown pipeline {pipeline!r}")
    return rec


def shell_samples(body: ConvexBody, r: float, outer: float, count: int, rng,
                  support_center=None, support_radius=None):
    """Points with ``r <= d(x, C) <= outer`` (and inside the given ball, if any)."""
    c = body.interior_point() if not isinstance(body, Intersection) else body.center
    U = rng.normal(size=(count, body.n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    try:
        rho = body.ray_lengths(c, U)
    except Exception:
        rho = np.zeros(count)
    s = np.geomspace(r, outer, count)
    rng.shuffle(s)
    X = c + (rho + s)[:, None] * U
    _, d = body.project_many(X)
    keep = (d >= r) & (d <= outer)
    if support_center is not None:
        keep &= np.linalg.norm(X - support_center, axis=1) <= support_radius
    return X[keep], d[keep]


def choose_scale(f_field: Field, phi: Field, body: ConvexBody, r: float, unit: float,
                 f_samples, shell_count=1500, rng=None, support_center=None,
                 support_radius=None, outer=2.0) -> dict:
    """Scale ``a`` making ``f + a phi`` convex away from the ``r``-neighbourhood.

    ``sup |D^2 f|`` is sampled on ``f_samples`` and on the shell, which should
    reach past the support of ``f``.  ``unit`` turns ``phi`` into the
    normalized convexifier ``psi = unit * phi``; the result is ``a = 2 M^2 unit``.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    X, d = shell_samples(body, r, outer, shell_count, rng, support_center, support_radius)
    Y = np.vstack([np.atleast_2d(f_samples).reshape(-1, body.n), X])
    sup_f = float(np.max(np.abs(np.linalg.eigvalsh(f_field.hessian(Y))))) if len(Y) else 0.0
    if len(X) == 0:
        inf_psi = np.inf
    else:
        inf_psi = float(np.min(min_eigenvalue(unit * phi.hessian(X))))
        if not inf_psi > 0:
            raise ConstructionFailure(
                f"convexifier Hessian not positive on the shell (min {inf_psi:.3e}); "
                "increase quadrature resolution")
    M = max(1.0, sup_f, 1.0 / inf_psi if np.isfinite(inf_psi) else 1.0)
    A = 2.0 * M * M
    return {"M": M, "A": A, "a": A * unit, "sup_hessian_f": sup_f,
            "inf_hessian_psi": inf_psi, "shell_samples": int(len(X)), "r": float(r)}
