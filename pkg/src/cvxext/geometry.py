"""Compact convex bodies: support functions, projections, gauges and caps.

Four representations are supported: :class:`Polytope` (V-representation),
:class:`Ball`, :class:`Ovaloid` (sublevel set ``psi <= 1`` of a strongly
convex field) and :class:`Intersection` of ovaloids.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import gamma, pi

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from .errors import DegenerateBody, InvalidArgument, NumericFailure
from .fields import Field, ScalarField, ellipse

UNIT_TOL = 1e-9


@dataclass(frozen=True)
class ProjectionResult:
    point: np.ndarray
    distance: float
    direction: np.ndarray | None


@dataclass(frozen=True)
class Cap:
    w0: np.ndarray
    half_angle: float


# ---------------------------------------------------------------------------
# bodies


class ConvexBody:
    n: int
    kind: str

    def support(self, W) -> np.ndarray:
        """Support function at each row of ``W`` (not checked for unit norm)."""
        raise NotImplementedError

    def contains(self, X, tol: float = 0.0) -> np.ndarray:
        raise NotImplementedError

    def project(self, x) -> ProjectionResult:
        raise NotImplementedError

    def interior_point(self) -> np.ndarray:
        raise NotImplementedError

    def ray_lengths(self, center, U) -> np.ndarray:
        """Distance from ``center`` (interior) to the boundary along each row of ``U``."""
        raise NotImplementedError

    def is_interior(self, c) -> bool:
        raise NotImplementedError

    def project_many(self, X) -> tuple[np.ndarray, np.ndarray]:
        res = [self.project(x) for x in np.atleast_2d(X)]
        return np.array([r.point for r in res]), np.array([r.distance for r in res])

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Points of the body (boundary and interior mixed)."""
        c = self.interior_point()
        U = _random_unit(rng, count, self.n)
        rho = self.ray_lengths(c, U)
        s = rng.uniform(0.0, 1.0, count)
        s[: count // 3] = 1.0
        return self._pull_inside(c + (s * rho)[:, None] * U, c)

    def boundary_sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Points within a few ulps of the boundary that still pass ``contains``."""
        c = self.interior_point()
        U = _random_unit(rng, count, self.n)
        return self._pull_inside(c + self.ray_lengths(c, U)[:, None] * U, c)

    def _pull_inside(self, X, c):
        for _ in range(60):
            bad = ~self.contains(X)
            if not bad.any():
                break
            X[bad] = c + (X[bad] - c) * (1.0 - 4e-15)
        return X

    def to_json(self) -> dict:
        raise NotImplementedError


def _random_unit(rng, count, n):
    U = rng.normal(size=(count, n))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def _bisect_rays(inside, center, U, hi0):
    """Largest rho with center + rho u inside, by expanding bracket then bisection."""
    K = U.shape[0]
    lo = np.zeros(K)
    hi = np.full(K, float(hi0))
    for _ in range(200):
        out = ~inside(center + hi[:, None] * U)
        if out.all():
            break
        lo = np.where(out, lo, hi)
        hi = np.where(out, hi, 2.0 * hi)
    else:
        raise DegenerateBody("body appears unbounded along a probe ray")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        ins = inside(center + mid[:, None] * U)
        lo = np.where(ins, mid, lo)
        hi = np.where(ins, hi, mid)
        if np.all(hi - lo <= 4e-16 * np.maximum(hi, 1e-300)):
            break
    return 0.5 * (lo + hi)


class Polytope(ConvexBody):
    kind = "polytope"

    def __init__(self, vertices):
        V = np.atleast_2d(np.asarray(vertices, dtype=float))
        if V.size == 0:
            raise InvalidArgument("polytope needs at least one vertex")
        self.n = V.shape[1]
        V = np.unique(V, axis=0)
        self.hull = None
        if V.shape[0] > self.n and np.linalg.matrix_rank(V[1:] - V[0], tol=1e-12) == self.n:
            try:
                if self.n == 1:
                    self.hull = None
                else:
                    self.hull = ConvexHull(V)
                    V = V[self.hull.vertices]
            except QhullError:
                self.hull = None
        if self.n == 1:
            V = np.array([[V.min()], [V.max()]]) if V.shape[0] > 1 else V
        self.vertices = V
        if self.hull is not None:
            eq = self.hull.equations
            self.normals = eq[:, :-1]
            self.offsets = -eq[:, -1]
        elif self.n == 1 and V.shape[0] == 2:
            self.normals = np.array([[1.0], [-1.0]])
            self.offsets = np.array([V[1, 0], -V[0, 0]])
        else:
            self.normals = None
            self.offsets = None

    @property
    def full_dimensional(self):
        return self.normals is not None

    def support(self, W):
        W = np.atleast_2d(W)
        return np.max(W @ self.vertices.T, axis=1)

    def contains(self, X, tol=0.0):
        X = np.atleast_2d(X)
        if self.full_dimensional:
            return np.all(X @ self.normals.T - self.offsets <= tol, axis=1)
        _, d = self.project_many(X)
        return d <= max(tol, 1e-12)

    def is_interior(self, c):
        return self.full_dimensional and bool(np.all(self.normals @ c - self.offsets < -1e-12))

    def interior_point(self):
        return self.vertices.mean(axis=0)

    def project(self, x):
        x = np.asarray(x, dtype=float)
        if self.full_dimensional and np.all(self.normals @ x - self.offsets <= 0.0):
            return ProjectionResult(x.copy(), 0.0, None)
        p = x + min_norm_point(self.vertices - x)
        return _result(x, p)

    def ray_lengths(self, center, U):
        U = np.atleast_2d(U)
        if not self.full_dimensional:
            raise DegenerateBody("polytope has empty interior")
        slack = self.offsets - self.normals @ center
        rate = U @ self.normals.T
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            lengths = np.where(rate > 0, slack / rate, np.inf)
        return lengths.min(axis=1)

    def sample(self, count, rng):
        if self.full_dimensional:
            return super().sample(count, rng)
        lam = rng.dirichlet(np.ones(len(self.vertices)), size=count)
        X = lam @ self.vertices
        X[: len(self.vertices)] = self.vertices[: min(count, len(self.vertices))]
        return X

    def boundary_sample(self, count, rng):
        if self.full_dimensional:
            return super().boundary_sample(count, rng)
        return self.sample(count, rng)

    def to_json(self):
        return {"type": "polytope", "vertices": self.vertices.tolist()}


class Ball(ConvexBody):
    kind = "ball"

    def __init__(self, center, radius):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.radius = float(radius)
        if self.radius <= 0:
            raise InvalidArgument("ball radius must be positive")
        self.n = self.center.size

    def support(self, W):
        W = np.atleast_2d(W)
        return W @ self.center + self.radius * np.linalg.norm(W, axis=1)

    def contains(self, X, tol=0.0):
        X = np.atleast_2d(X)
        return np.linalg.norm(X - self.center, axis=1) <= self.radius + tol

    def is_interior(self, c):
        return bool(np.linalg.norm(np.asarray(c) - self.center) < self.radius)

    def interior_point(self):
        return self.center.copy()

    def project(self, x):
        x = np.asarray(x, dtype=float)
        d = np.linalg.norm(x - self.center)
        if d <= self.radius:
            return ProjectionResult(x.copy(), 0.0, None)
        u = (x - self.center) / d
        return ProjectionResult(self.center + self.radius * u, d - self.radius, u)

    def ray_lengths(self, center, U):
        U = np.atleast_2d(U)
        q = np.asarray(center) - self.center
        b = U @ q
        return -b + np.sqrt(b * b - (q @ q - self.radius ** 2))

    def as_ovaloid(self) -> "Ovaloid":
        psi = ellipse(self.center, np.full(self.n, self.radius))
        return Ovaloid(psi, psi.strong_convexity, center=self.center)

    def to_json(self):
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}


class Ovaloid(ConvexBody):
    """``{psi <= 1}`` for a field with ``D^2 psi >= M``."""

    kind = "ovaloid"

    def __init__(self, psi: Field, M: float, center=None, spec: dict | None = None):
        if M <= 0:
            raise InvalidArgument("strong convexity constant must be positive")
        self.psi = psi
        self.M = float(M)
        self.n = psi.n
        self.spec = spec
        if center is None:
            res = minimize(lambda z: float(psi.value(z[None])[0]), np.zeros(self.n),
                           jac=lambda z: psi.gradient(z[None])[0], method="BFGS",
                           options={"gtol": 1e-12})
            center = res.x
        self.center = np.asarray(center, dtype=float)
        if psi.value(self.center[None])[0] > 1.0:
            raise InvalidArgument("ovaloid sublevel set is empty")

    def support(self, W):
        W = np.atleast_2d(W)
        return np.einsum("ij,ij->i", W, self.support_points(W))

    def support_points(self, W):
        W = np.atleast_2d(np.asarray(W, dtype=float))
        nw = np.linalg.norm(W, axis=1)
        U = W / nw[:, None]
        Z = self.center + self.ray_lengths(self.center, U)[:, None] * U
        G = self.psi.gradient(Z)
        lam = nw / np.linalg.norm(G, axis=1)
        n = self.n
        for _ in range(100):
            J = self.psi.jet(Z, 2)
            G, H, val = J.gradient(), J.hessian(), J.value
            res = np.concatenate([lam[:, None] * G - W, (val - 1.0)[:, None]], axis=1)
            err = np.abs(res).max()
            if err < 1e-14 * max(1.0, nw.max()):
                break
            A = np.zeros((len(Z), n + 1, n + 1))
            A[:, :n, :n] = lam[:, None, None] * H
            A[:, :n, n] = G
            A[:, n, :n] = G
            step = np.linalg.solve(A, -res[..., None])[..., 0]
            Z = Z + step[:, :n]
            lam = lam + step[:, n]
        else:
            raise NumericFailure("ovaloid support Newton did not converge", err)
        return Z

    def contains(self, X, tol=0.0):
        return self.psi.value(np.atleast_2d(X)) <= 1.0 + tol

    def is_interior(self, c):
        return bool(self.psi.value(np.atleast_2d(c))[0] < 1.0)

    def interior_point(self):
        return self.center.copy()

    def ray_lengths(self, center, U):
        U = np.atleast_2d(U)
        return _bisect_rays(self.contains, np.asarray(center, float), U, 1.0)

    def project(self, x):
        x = np.asarray(x, dtype=float)
        if self.psi.value(x[None])[0] <= 1.0:
            return ProjectionResult(x.copy(), 0.0, None)
        z = _kkt_projection(x, [self.psi], self._start(x))
        return _result(x, z)

    def _start(self, x):
        u = x - self.center
        u = u / np.linalg.norm(u)
        return self.center + self.ray_lengths(self.center, u[None])[0] * u

    def boundary_gradient_floor(self, count=720, seed=0):
        """Sampled and refined minimum of ``|grad psi|`` on the boundary."""
        return _gradient_floor(self, count, seed)

    def to_json(self):
        if self.spec is not None:
            return dict(self.spec)
        return {"type": "ovaloid", "psi": self.psi.name,
                "params": getattr(self.psi, "params", {}), "M": self.M}


class Intersection(ConvexBody):
    kind = "fio"

    def __init__(self, ovaloids):
        ovaloids = [o.as_ovaloid() if isinstance(o, Ball) else o for o in ovaloids]
        if not ovaloids:
            raise InvalidArgument("intersection needs at least one ovaloid")
        self.parts = ovaloids
        self.n = ovaloids[0].n
        self.center = self._find_center()

    def _max_psi(self, X):
        return np.max([o.psi.value(np.atleast_2d(X)) for o in self.parts], axis=0)

    def _find_center(self):
        z0 = np.mean([o.center for o in self.parts], axis=0)
        cons = [{"type": "ineq", "fun": (lambda z, o=o: z[-1] - o.psi.value(z[None, :-1])[0]),
                 "jac": (lambda z, o=o: np.append(-o.psi.gradient(z[None, :-1])[0], 1.0))}
                for o in self.parts]
        s0 = float(self._max_psi(z0)[0])
        res = minimize(lambda z: z[-1], np.append(z0, s0), jac=lambda z: np.eye(len(z))[-1],
                       constraints=cons, method="SLSQP", options={"ftol": 1e-14, "maxiter": 500})
        c = res.x[:-1]
        if self._max_psi(c)[0] > 1.0:
            raise InvalidArgument("intersection of ovaloids is empty")
        return c

    def contains(self, X, tol=0.0):
        return self._max_psi(X) <= 1.0 + tol

    def is_interior(self, c):
        return bool(self._max_psi(c)[0] < 1.0)

    def interior_point(self):
        return self.center.copy()

    def ray_lengths(self, center, U):
        return np.min([o.ray_lengths(center, U) for o in self.parts], axis=0)

    def support(self, W):
        W = np.atleast_2d(np.asarray(W, dtype=float))
        out = np.empty(len(W))
        pts = [o.support_points(W) for o in self.parts]
        for i, w in enumerate(W):
            order = np.argsort([p[i] @ w for p in pts])
            for j in order:
                z = pts[j][i]
                if self._max_psi(z)[0] <= 1.0 + 1e-12:
                    out[i] = z @ w
                    break
            else:
                out[i] = self._support_general(w) @ w
        return out

    def _support_general(self, w):
        cons = [{"type": "ineq", "fun": (lambda z, o=o: 1.0 - o.psi.value(z[None])[0]),
                 "jac": (lambda z, o=o: -o.psi.gradient(z[None])[0])} for o in self.parts]
        res = minimize(lambda z: -z @ w, self.center, jac=lambda z: -w, constraints=cons,
                       method="SLSQP", options={"ftol": 1e-15, "maxiter": 500})
        z = res.x
        active = [o.psi for o in self.parts if o.psi.value(z[None])[0] > 1.0 - 1e-6]
        return _kkt_support(w, active, z)

    def project(self, x):
        x = np.asarray(x, dtype=float)
        if self.contains(x[None])[0]:
            return ProjectionResult(x.copy(), 0.0, None)
        best = None
        for o in self.parts:
            r = o.project(x)
            if r.distance > 0 and self._max_psi(r.point)[0] <= 1.0 + 1e-12:
                if best is None or r.distance > best.distance:
                    best = r
        if best is not None:
            return best
        cons = [{"type": "ineq", "fun": (lambda z, o=o: 1.0 - o.psi.value(z[None])[0]),
                 "jac": (lambda z, o=o: -o.psi.gradient(z[None])[0])} for o in self.parts]
        res = minimize(lambda z: 0.5 * np.sum((z - x) ** 2), self.center, jac=lambda z: z - x,
                       constraints=cons, method="SLSQP", options={"ftol": 1e-15, "maxiter": 500})
        z = res.x
        active = [o.psi for o in self.parts if o.psi.value(z[None])[0] > 1.0 - 1e-6]
        for k in range(len(active), 0, -1):
            for sub in combinations(active, k):
                try:
                    zz = _kkt_projection(x, list(sub), z)
                except NumericFailure:
                    continue
                if self._max_psi(zz)[0] <= 1.0 + 1e-12:
                    return _result(x, zz)
        return _result(x, z)

    def boundary_gradient_floor(self, count=720, seed=0):
        return min(o.boundary_gradient_floor(count, seed) for o in self.parts)

    def to_json(self):
        return {"type": "fio", "ovaloids": [o.to_json() for o in self.parts]}


def _result(x, p):
    d = float(np.linalg.norm(x - p))
    if d == 0.0:
        return ProjectionResult(p, 0.0, None)
    return ProjectionResult(p, d, (x - p) / d)


def _kkt_projection(x, psis, z0):
    """Newton on ``z - x + sum lam_i grad psi_i(z) = 0``, ``psi_i(z) = 1``."""
    n, k = len(x), len(psis)
    z = np.array(z0, dtype=float)
    G = np.array([p.gradient(z[None])[0] for p in psis])
    lam = np.linalg.lstsq(G.T, x - z, rcond=None)[0]
    lam = np.maximum(lam, 1e-12)
    err = np.inf
    for _ in range(200):
        jets = [p.jet(z[None], 2) for p in psis]
        G = np.array([j.gradient()[0] for j in jets])
        H = sum(l * j.hessian()[0] for l, j in zip(lam, jets))
        res = np.concatenate([z - x + G.T @ lam, [j.value[0] - 1.0 for j in jets]])
        new_err = np.abs(res).max()
        if new_err < 1e-15 * max(1.0, np.abs(x).max()):
            break
        A = np.zeros((n + k, n + k))
        A[:n, :n] = np.eye(n) + H
        A[:n, n:] = G.T
        A[n:, :n] = G
        step = np.linalg.lstsq(A, -res, rcond=None)[0]
        z, lam = z + step[:n], lam + step[n:]
        if new_err >= err and new_err < 1e-12:
            break
        err = new_err
    else:
        raise NumericFailure("projection Newton did not converge", err)
    if np.any(lam < -1e-10):
        raise NumericFailure("projection multipliers negative", float(lam.min()))
    return z


def _kkt_support(w, psis, z0):
    n, k = len(w), len(psis)
    z = np.array(z0, dtype=float)
    G = np.array([p.gradient(z[None])[0] for p in psis])
    lam = np.maximum(np.linalg.lstsq(G.T, w, rcond=None)[0], 1e-12)
    for _ in range(200):
        jets = [p.jet(z[None], 2) for p in psis]
        G = np.array([j.gradient()[0] for j in jets])
        H = sum(l * j.hessian()[0] for l, j in zip(lam, jets))
        res = np.concatenate([G.T @ lam - w, [j.value[0] - 1.0 for j in jets]])
        if np.abs(res).max() < 1e-14:
            break
        A = np.zeros((n + k, n + k))
        A[:n, :n] = H
        A[:n, n:] = G.T
        A[n:, :n] = G
        step = np.linalg.lstsq(A, -res, rcond=None)[0]
        z, lam = z + step[:n], lam + step[n:]
    return z


def min_norm_point(P, tol=1e-14, max_iter=1000):
    """Wolfe's algorithm: point of minimum norm in the convex hull of rows of ``P``."""
    P = np.atleast_2d(P)
    scale = max(1.0, float(np.max(np.sum(P * P, axis=1))))
    j = int(np.argmin(np.sum(P * P, axis=1)))
    S, lam = [j], np.array([1.0])
    x = P[j].copy()
    for _ in range(max_iter):
        j = int(np.argmin(P @ x))
        if x @ x - P[j] @ x <= tol * scale or j in S:
            break
        S.append(j)
        lam = np.append(lam, 0.0)
        while True:
            Q = P[S]
            k = len(S)
            A = np.ones((k + 1, k + 1))
            A[:k, :k] = Q @ Q.T
            A[k, k] = 0.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            mu = np.linalg.lstsq(A, rhs, rcond=None)[0][:k]
            if np.all(mu > 1e-15):
                lam = mu
                break
            dec = mu < lam
            theta = np.min(lam[dec] / (lam[dec] - mu[dec])) if dec.any() else 1.0
            lam = lam + theta * (mu - lam)
            keep = lam > 1e-15
            if keep.all():
                keep[np.argmin(lam)] = False
            S = [s for s, kp in zip(S, keep) if kp]
            lam = lam[keep]
            lam = lam / lam.sum()
        x = lam @ P[S]
    return x


def _gradient_floor(ov: Ovaloid, count, seed):
    c = ov.center
    if ov.n == 2:
        ang = np.linspace(0.0, 2 * pi, count, endpoint=False)

        def grad_at(a):
            u = np.array([[np.cos(a), np.sin(a)]])
            z = c + ov.ray_lengths(c, u)[:, None] * u
            return float(np.linalg.norm(ov.psi.gradient(z)[0]))

        U = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        Z = c + ov.ray_lengths(c, U)[:, None] * U
        g = np.linalg.norm(ov.psi.gradient(Z), axis=1)
        i = int(np.argmin(g))
        step = 2 * pi / count
        res = minimize_scalar(grad_at, bounds=(ang[i] - step, ang[i] + step), method="bounded",
                              options={"xatol": 1e-12})
        return min(float(g[i]), float(res.fun))
    U = fibonacci_sphere(count) if ov.n == 3 else _random_unit(np.random.default_rng(seed), count, ov.n)
    Z = c + ov.ray_lengths(c, U)[:, None] * U
    return float(np.linalg.norm(ov.psi.gradient(Z), axis=1).min())


# ---------------------------------------------------------------------------
# public operations


def _unit(w, n=None):
    w = np.asarray(w, dtype=float)
    if abs(np.linalg.norm(w) - 1.0) > UNIT_TOL:
        raise InvalidArgument("direction must be a unit vector")
    if n is not None and w.size != n:
        raise InvalidArgument(f"direction must lie in R^{n}")
    return w


def support_function(body: ConvexBody, w) -> float:
    w = _unit(w, body.n)
    return float(body.support(w[None])[0])


def metric_projection(body: ConvexBody, x) -> ProjectionResult:
    x = np.asarray(x, dtype=float)
    if x.size != body.n:
        raise InvalidArgument(f"point must lie in R^{body.n}")
    return body.project(x)


def minkowski_functional(body: ConvexBody, x, center) -> float:
    """Gauge of ``C - center`` evaluated at ``x - center``."""
    center = np.asarray(center, dtype=float)
    if not body.is_interior(center):
        raise InvalidArgument("gauge center must be an interior point")
    d = np.asarray(x, dtype=float) - center
    r = np.linalg.norm(d)
    if r == 0.0:
        return 0.0
    return float(r / body.ray_lengths(center, (d / r)[None])[0])


def fibonacci_sphere(count: int) -> np.ndarray:
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    phi = pi * (3.0 - np.sqrt(5.0)) * i
    s = np.sqrt(1.0 - z * z)
    return np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)


def probe_directions(n: int, count: int | None = None, seed: int = 0) -> np.ndarray:
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        count = count or 720
        a = np.linspace(0.0, 2 * pi, count, endpoint=False)
        return np.stack([np.cos(a), np.sin(a)], axis=1)
    if n == 3:
        return fibonacci_sphere(count or 2000)
    return _random_unit(np.random.default_rng(seed), count or 4000, n)


def gauge_constants(body: ConvexBody, center) -> tuple[float, float, float]:
    """Inscribed radius ``r``, circumscribed radius ``R`` about ``center`` and ``L = R / r``."""
    center = np.asarray(center, dtype=float)
    if isinstance(body, Ball):
        off = np.linalg.norm(center - body.center)
        r, R = body.radius - off, body.radius + off
    elif isinstance(body, Polytope):
        if not body.full_dimensional:
            raise DegenerateBody("polytope has empty interior")
        r = float(np.min(body.offsets - body.normals @ center))
        R = float(np.max(np.linalg.norm(body.vertices - center, axis=1)))
    else:
        U = probe_directions(body.n)
        rho = body.ray_lengths(center, U)
        r = _refine_extreme(body, center, U, rho, np.argmin(rho), 1.0)
        R = _refine_extreme(body, center, U, rho, np.argmax(rho), -1.0)
    if r < 1e-8:
        raise DegenerateBody(f"inscribed radius {r:.3e} too small")
    return float(r), float(R), float(R / r)


def _refine_extreme(body, center, U, rho, i, sign):
    f = lambda u: sign * float(body.ray_lengths(center, (u / np.linalg.norm(u))[None])[0])
    if body.n == 2:
        a0 = np.arctan2(U[i, 1], U[i, 0])
        step = 2 * pi / len(U)
        res = minimize_scalar(lambda a: f(np.array([np.cos(a), np.sin(a)])),
                              bounds=(a0 - step, a0 + step), method="bounded",
                              options={"xatol": 1e-13})
    else:
        res = minimize(f, U[i], method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15})
    best = sign * min(sign * rho[i], res.fun)
    return best


def diameter(body: ConvexBody) -> float:
    if isinstance(body, Ball):
        return 2.0 * body.radius
    if isinstance(body, Polytope):
        V = body.vertices
        return float(pdist(V).max()) if len(V) > 1 else 0.0
    _, R, _ = gauge_constants(body, body.interior_point())
    return 2.0 * R


def alpha_angle(t: float, diam: float) -> float:
    if t <= 0:
        raise InvalidArgument("alpha_angle needs t > 0")
    if diam < 0:
        raise InvalidArgument("diameter must be nonnegative")
    return t / (t + diam)


def angle_between(a, b) -> np.ndarray:
    """Angle between rows of ``a`` and ``b``, accurate for tiny angles."""
    a, b = np.atleast_2d(a), np.atleast_2d(b)
    cross = np.linalg.norm(a[:, :, None] * b[:, None, :] - a[:, None, :] * b[:, :, None],
                           axis=(1, 2)) / np.sqrt(2.0)
    return np.arctan2(cross, np.sum(a * b, axis=1))


def select_cap(x, v, body: ConvexBody, diam: float | None = None) -> Cap:
    """Cap of directions around ``w0`` with half-angle ``alpha_x / 12``.

    ``w0`` sits at angle ``5 alpha_x / 12`` from the outward direction ``u_x``
    and is rotated toward ``v`` (which is flipped if ``<u_x, v> < 0``).
    """
    if body.n < 2:
        raise InvalidArgument("caps need dimension >= 2")
    v = _unit(v, body.n)
    proj = body.project(np.asarray(x, dtype=float))
    if proj.distance <= 0.0:
        raise InvalidArgument("x must lie outside the body")
    u = proj.direction
    if u @ v < 0:
        v = -v
    alpha = alpha_angle(proj.distance, diameter(body) if diam is None else diam)
    e = v - (u @ v) * u
    if np.linalg.norm(e) < 1e-12:
        for i in range(body.n):
            axis = np.zeros(body.n)
            axis[i] = 1.0
            e = axis - (u @ axis) * u
            if np.linalg.norm(e) > 1e-8:
                break
    e = e / np.linalg.norm(e)
    b = 5.0 * alpha / 12.0
    return Cap(np.cos(b) * u + np.sin(b) * e, alpha / 12.0)


def sample_cap(cap: Cap, count: int, rng: np.random.Generator, include_rim=True) -> np.ndarray:
    n = cap.w0.size
    Z = rng.normal(size=(count, n))
    Z -= np.outer(Z @ cap.w0, cap.w0)
    Z /= np.linalg.norm(Z, axis=1, keepdims=True)
    beta = rng.uniform(0.0, cap.half_angle, count)
    if include_rim and count >= 2:
        beta[0], beta[1] = 0.0, cap.half_angle
    return np.cos(beta)[:, None] * cap.w0 + np.sin(beta)[:, None] * Z


def sphere_volume(k: int) -> float:
    """Surface measure of the unit sphere ``S^k`` in ``R^(k+1)``."""
    return 2.0 * pi ** ((k + 1) / 2.0) / gamma((k + 1) / 2.0)


def cap_constant(n: int) -> float:
    """``V(n)``; uses measure 1 for ``S^0`` and ``V(1) := 1``."""
    if n < 1:
        raise InvalidArgument("dimension must be positive")
    if n == 1:
        return 1.0
    vol = 1.0 if n == 2 else sphere_volume(n - 2)
    return vol / (12.0 * (n - 1) * 24.0 ** (n - 2))


def cap_volume_bound(n: int, alpha: float) -> float:
    if n < 2:
        raise InvalidArgument("cap bound needs n >= 2")
    if not 0.0 <= alpha <= 1.0:
        raise InvalidArgument("alpha must lie in [0, 1]")
    return cap_constant(n) * alpha ** (n - 1)


def exact_cap_measure(n: int, half_angle: float) -> float:
    """True surface measure of a spherical cap in ``S^(n-1)``."""
    if n == 2:
        return 2.0 * half_angle
    if n == 3:
        return 2.0 * pi * (1.0 - np.cos(half_angle))
    from scipy.integrate import quad
    return sphere_volume(n - 2) * quad(lambda b: np.sin(b) ** (n - 2), 0.0, half_angle)[0]


# ---------------------------------------------------------------------------
# JSON


def body_from_json(spec: dict) -> ConvexBody:
    from .fields import build_field

    try:
        kind = spec["type"]
        if kind == "polytope":
            return Polytope(spec["vertices"])
        if kind == "ball":
            return Ball(spec["center"], spec["radius"])
        if kind == "ovaloid":
            psi = build_field(spec["psi"], spec.get("params"))
            M = spec.get("M", getattr(psi, "strong_convexity", None))
            if M is None:
                raise InvalidArgument("ovaloid needs a strong convexity constant M")
            return Ovaloid(psi, M, spec=dict(spec))
        if kind == "fio":
            return Intersection([body_from_json(s) for s in spec["ovaloids"]])
    except KeyError as exc:
        raise InvalidArgument(f"body spec missing key {exc}") from None
    raise InvalidArgument(f"unknown body type {spec.get('type')!r}")
