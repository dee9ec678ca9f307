"""Jet families on a body and the checks built on them.

A jet family stores, at each base point ``y``, the coefficients of a
polynomial ``P_y`` in the displacement ``x - y``.  The convexity-compatibility
quotient at order ``m`` is

    Q_m(t, y, v, w) = v^T D^2 P_y^m(y + t w) v / t^(m-2),

where ``P_y^m`` is ``P_y`` truncated at degree ``m``; minimizing over unit
``v`` gives the smallest eigenvalue of that Hessian.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import factorial

import numpy as np

from . import taylor as tl
from ._linalg import min_eigenpair, min_eigenvalue
from .errors import InvalidArgument
from .fields import Field, PolynomialField
from .geometry import probe_directions

DEFAULT_T_GRID = np.geomspace(1e-6, 1.0, 40)
EPS_TEST = 1e-3


@dataclass
class JetFamily:
    order: int
    points: np.ndarray
    coeffs: np.ndarray
    field: Field | None = None

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        if self.order < 1:
            raise InvalidArgument("jet order must be >= 1")
        if self.coeffs.shape != (len(self.points), self.basis.size):
            raise InvalidArgument("coefficient table does not match basis size")

    @property
    def n(self):
        return self.points.shape[1]

    @property
    def basis(self):
        return tl.basis(self.points.shape[1], self.order)

    def __len__(self):
        return len(self.points)

    @classmethod
    def from_field(cls, f: Field, points, order: int) -> "JetFamily":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return cls(order, pts, f.jet(pts, order).c, field=f)

    def truncated(self, k: int) -> "JetFamily":
        if k > self.order:
            raise InvalidArgument(f"cannot raise jet order {self.order} to {k}")
        size = tl.basis(self.n, k).size
        return JetFamily(k, self.points, self.coeffs[:, :size], self.field)

    def polynomial(self, i: int) -> PolynomialField:
        return PolynomialField(self.points[i], self.coeffs[i], self.order)

    def values(self):
        return self.coeffs[:, 0]

    def gradients(self):
        return self.coeffs[:, 1:1 + self.n]

    def to_json(self) -> dict:
        exps = [tuple(int(a) for a in e) for e in self.basis.exps]
        pts = []
        for y, c in zip(self.points, self.coeffs):
            pts.append({"y": y.tolist(),
                        "coeffs": {str(e).replace(" ", ""): float(v)
                                   for e, v in zip(exps, c) if v != 0.0}})
        return {"order": self.order, "points": pts}

    @classmethod
    def from_json(cls, data: dict) -> "JetFamily":
        try:
            order = int(data["order"])
            entries = data["points"]
            if not entries:
                raise InvalidArgument("jet file has no points")
            pts = np.array([e["y"] for e in entries], dtype=float).reshape(len(entries), -1)
            mb = tl.basis(pts.shape[1], order)
            C = np.zeros((len(entries), mb.size))
            for i, e in enumerate(entries):
                for key, val in e["coeffs"].items():
                    alpha = tuple(int(a) for a in re.findall(r"-?\d+", key))
                    if alpha not in mb.index:
                        raise InvalidArgument(f"multi-index {key} outside order {order}")
                    C[i, mb.index[alpha]] = float(val)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidArgument):
                raise
            raise InvalidArgument(f"malformed jet file: {exc}") from None
        return cls(order, pts, C)


# ---------------------------------------------------------------------------
# Hessians of the stored polynomials


def _second_derivative_maps(mb):
    D = [mb.derivative_map(i) for i in range(mb.n)]
    return {(i, k): D[i] @ D[k] for i in range(mb.n) for k in range(i, mb.n)}


def polynomial_hessians(coeffs, mb, disp):
    """Hessians of the polynomials at displacements.

    ``coeffs`` has shape ``(N, size)``, ``disp`` shape ``(N, K, n)``; returns
    ``(N, K, n, n)``.
    """
    N, K, n = disp.shape
    pw = mb.powers(disp.reshape(-1, n)).reshape(N, K, mb.size)
    H = np.empty((N, K, n, n))
    for (i, k), Dik in _second_derivative_maps(mb).items():
        E = coeffs @ Dik.T
        H[:, :, i, k] = np.einsum("na,nka->nk", E, pw)
        H[:, :, k, i] = H[:, :, i, k]
    return H


def directional_taylor(family: JetFamily, i: int, j: int, w, v) -> float:
    """``D^j P_y(y)(w^(j-2), v^2)`` for the ``i``-th base point."""
    if not 2 <= j <= family.order:
        raise InvalidArgument(f"order j={j} outside [2, {family.order}]")
    mb = family.basis
    c = np.zeros(mb.size)
    sl = mb.degree_slice(j)
    c[sl] = family.coeffs[i, sl]
    w = np.asarray(w, dtype=float).reshape(1, 1, -1)
    v = np.asarray(v, dtype=float)
    H = polynomial_hessians(c[None], mb, w)[0, 0]
    return float(factorial(j - 2) * v @ H @ v)


def q_quotient(family: JetFamily, i: int, v, w, t: float, m: int) -> float:
    if t <= 0:
        raise InvalidArgument("t must be positive")
    fam = family.truncated(m)
    w = np.asarray(w, dtype=float)
    v = np.asarray(v, dtype=float)
    H = polynomial_hessians(fam.coeffs[i:i + 1], fam.basis, (t * w).reshape(1, 1, -1))[0, 0]
    return float(v @ H @ v) / t ** (m - 2)


def _q_min_table(fam: JetFamily, m: int, t_grid, dirs):
    """Per-t minimum of ``Q_m`` with argmin data."""
    mb = fam.basis
    n = fam.n
    Wp = mb.powers(dirs)
    maps = _second_derivative_maps(mb)
    E = {ik: fam.coeffs @ Dik.T for ik, Dik in maps.items()}
    rows = []
    for t in t_grid:
        scale = t ** mb.degree
        H = np.empty((len(fam), len(dirs), n, n))
        for (i, k), Eik in E.items():
            H[:, :, i, k] = (Eik * scale) @ Wp.T
            H[:, :, k, i] = H[:, :, i, k]
        q = min_eigenvalue(H) / t ** (m - 2)
        y, w = np.unravel_index(np.argmin(q), q.shape)
        lam, vec = min_eigenpair(H[y, w])
        rows.append((float(t), float(lam / t ** (m - 2)), int(y), int(w), vec))
    return rows


@dataclass
class CwReport:
    order: int
    passed: bool
    t_eps: float | None
    eps_test: float
    witness: dict | None
    q_profile: list
    r_sequence: dict = field(default_factory=dict)
    strict: tuple | None = None
    flags: list = field(default_factory=list)
    grid: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"order": self.order, "pass": self.passed, "t_eps": self.t_eps,
                "eps_test": self.eps_test, "witness": self.witness,
                "q_profile": [[t, q] for t, q in self.q_profile],
                "r_sequence": {str(k): v for k, v in self.r_sequence.items()},
                "strict": None if self.strict is None else list(self.strict),
                "flags": list(self.flags), "grid": self.grid}


def _check_inputs(fam, m, t_grid, dirs):
    if m > fam.order:
        raise InvalidArgument(f"order {m} exceeds stored jet order {fam.order}")
    if m < 2:
        raise InvalidArgument("condition order must be >= 2")
    t_grid = np.sort(np.asarray(t_grid if t_grid is not None else DEFAULT_T_GRID, dtype=float))
    dirs = probe_directions(fam.n) if dirs is None else np.atleast_2d(dirs)
    if t_grid.size == 0 or len(dirs) == 0:
        raise InvalidArgument("empty t or direction grid")
    if np.any(t_grid <= 0):
        raise InvalidArgument("t grid must be positive")
    return t_grid, dirs


def check_cw(family: JetFamily, m: int, t_grid=None, dir_grid=None, eps_test=EPS_TEST,
             with_r=True) -> CwReport:
    """Sampled check of the order-``m`` convexity-compatibility condition."""
    t_grid, dirs = _check_inputs(family, m, t_grid, dir_grid)
    fam = family.truncated(m)
    rows = _q_min_table(fam, m, t_grid, dirs)
    t_eps = None
    for t, q, *_ in rows:
        if q >= -eps_test:
            t_eps = t
        else:
            break
    passed = t_eps is not None
    worst = min(rows, key=lambda r: r[1]) if not passed else None
    if passed:
        # most negative value at or below t_eps, for information
        below = [r for r in rows if r[0] <= t_eps]
        worst_info = min(below, key=lambda r: r[1])
    else:
        worst_info = worst
    t, q, y, w, v = worst_info
    witness = {"y": fam.points[y].tolist(), "v": v.tolist(), "w": dirs[w].tolist(),
               "t": t, "Q": q}
    report = CwReport(m, passed, t_eps, eps_test, witness, [(r[0], r[1]) for r in rows],
                      grid={"points": len(fam), "directions": len(dirs), "t": len(t_grid),
                            "t_floor": float(t_grid[0]), "t_max": float(t_grid[-1])})
    if with_r:
        r, flag = estimate_r(family, m, t_grid, dirs, rows=rows)
        report.r_sequence[m] = r
        if flag:
            report.flags.append(flag)
    return report


def check_cw_strict(family: JetFamily, k: int, t_grid=None, dir_grid=None):
    """``(eta, t0)`` with sampled ``Q_k >= eta > 0`` on ``(0, t0]``, or ``None``."""
    if k < 2:
        raise InvalidArgument("strict order must be >= 2")
    t_grid, dirs = _check_inputs(family, k, t_grid, dir_grid)
    rows = _q_min_table(family.truncated(k), k, t_grid, dirs)
    best = None
    running = np.inf
    for t, q, *_ in rows:
        running = min(running, q)
        if running > 0:
            best = (float(running), float(t))
        else:
            break
    return best


def check_1d_endpoint(derivatives, side: str = "right") -> bool:
    """Endpoint criterion from one-sided derivatives ``f^(2) .. f^(m)``."""
    if side not in ("left", "right"):
        raise InvalidArgument("side must be 'left' or 'right'")
    for order, val in enumerate(derivatives, start=2):
        if val != 0:
            return bool(val > 0 and order % 2 == 0)
    return True


def minimal_convex_extension(points, values, gradients, x) -> np.ndarray:
    """``max_i f(y_i) + <grad f(y_i), x - y_i>`` at each row of ``x``."""
    Y = np.atleast_2d(np.asarray(points, dtype=float))
    if len(Y) == 0:
        raise InvalidArgument("need at least one sample")
    G = np.atleast_2d(np.asarray(gradients, dtype=float))
    f = np.asarray(values, dtype=float).ravel()
    X = np.atleast_2d(np.asarray(x, dtype=float))
    planes = f - np.sum(G * Y, axis=1)
    return np.max(X @ G.T + planes, axis=1)


def tensor_norm_probes(n: int, count: int = 2000, seed: int = 0) -> np.ndarray:
    U = np.random.default_rng(seed).normal(size=(count, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    return np.vstack([np.eye(n), -np.eye(n), U])


def homogeneous_norm(coeffs_j, mb, j, probes):
    """``||D^j P||`` from degree-``j`` coefficients (rows), via probe maximization."""
    if j == 0:
        return np.abs(coeffs_j[:, 0])
    Up = mb.powers(probes)[:, mb.degree_slice(j)]
    return factorial(j) * np.max(np.abs(coeffs_j @ Up.T), axis=1)


def whitney_defect(family: JetFamily, m: int, delta: float, probes=None) -> float:
    """Sampled ``rho_m(C, delta)`` over pairs of base points."""
    if m > family.order:
        raise InvalidArgument("m exceeds jet order")
    fam = family.truncated(m)
    N = len(fam)
    if N < 2:
        return 0.0
    mb = fam.basis
    probes = tensor_norm_probes(fam.n) if probes is None else probes
    D = np.linalg.norm(fam.points[:, None] - fam.points[None], axis=2)
    best = 0.0
    for i in range(N):
        js = np.nonzero((D[i] > 0) & (D[i] <= delta))[0]
        if js.size == 0:
            continue
        moved = fam.polynomial(i).jet(fam.points[js], m).c
        diff = moved - fam.coeffs[js]
        for j in range(m + 1):
            sl = mb.degree_slice(j)
            block = np.zeros_like(diff)
            block[:, sl] = diff[:, sl]
            norms = homogeneous_norm(block if j == 0 else diff[:, sl], mb, j, probes)
            best = max(best, float(np.max(norms / D[i, js] ** (m - j))))
    return best


# ---------------------------------------------------------------------------
# r-sequence estimation


def modulus_table(f: Field, points, m, t_grid, dirs_count=6, probes=None, max_points=24):
    """Cumulative sampled ``eps_m(t) = sup ||D^m f(z) - D^m f(z')||`` over ``|z - z'| <= t``."""
    pts = np.atleast_2d(points)
    if len(pts) > max_points:
        pts = pts[np.linspace(0, len(pts) - 1, max_points).astype(int)]
    n = pts.shape[1]
    dirs = probe_directions(n, dirs_count) if n != 2 else probe_directions(2, dirs_count)
    if n > 3:
        dirs = dirs[:dirs_count]
    probes = tensor_norm_probes(n) if probes is None else probes
    mb = tl.basis(n, m)
    sl = mb.degree_slice(m)
    base = f.jet(pts, m).c[:, sl]
    Z = pts[:, None, None, :] + t_grid[None, :, None, None] * dirs[None, None, :, :]
    shape = Z.shape[:3]
    moved = f.jet(Z.reshape(-1, n), m).c[:, sl].reshape(*shape, -1)
    diff = moved - base[:, None, None, :]
    norms = homogeneous_norm(diff.reshape(-1, diff.shape[-1]), mb, m, probes).reshape(shape)
    per_t = np.nan_to_num(norms, nan=np.inf).max(axis=(0, 2))
    return np.maximum.accumulate(per_t)


def estimate_r(family: JetFamily, m: int, t_grid=None, dirs=None, rows=None,
               q_floor=-0.5, eps_cap=0.5):
    """Largest contiguous grid ``t`` with ``min Q_m >= q_floor`` and ``eps_m <= eps_cap``."""
    rs, flag = r_thresholds(family, m, [(q_floor, eps_cap)], t_grid, dirs, rows)
    return rs[0], flag


def r_thresholds(family: JetFamily, m: int, bounds, t_grid=None, dirs=None, rows=None):
    """:func:`estimate_r` for several ``(q_floor, eps_cap)`` pairs sharing one sweep."""
    t_grid, dirs = _check_inputs(family, m, t_grid, dirs)
    if rows is None:
        rows = _q_min_table(family.truncated(m), m, t_grid, dirs)
    flag = None
    if family.field is not None:
        eps = modulus_table(family.field, family.points, m, t_grid)
    else:
        eps = np.zeros(len(t_grid))
        flag = "jet-only"
    out = []
    for q_floor, eps_cap in bounds:
        r = None
        for (t, q, *_), e in zip(rows, eps):
            if q >= q_floor and e <= eps_cap:
                r = t
            else:
                break
        out.append(r)
    return out, flag


def r_sequence(family: JetFamily, orders, t_grid=None, dirs=None):
    out, flags = {}, set()
    for m in orders:
        r, flag = estimate_r(family, m, t_grid, dirs)
        out[m] = r
        if flag:
            flags.add(flag)
    return out, sorted(flags)
