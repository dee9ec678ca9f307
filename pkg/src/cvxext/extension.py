"""Assemble ``F = chi f + a phi`` for each pipeline and verify the result.

Pipelines:

``smooth``  flat profile from the epsilon machinery, jets certified to ``P_max``.
``finite``  piecewise-polynomial profile from ``omega``, class ``C^(m-n-1)``.
``fio``     ``sum_j h(psi_j - 1)`` on a finite intersection of ovaloids, ``C^(m-1)``.
``strict``  strict condition at some order ``k``: ``f`` is already convex near the
            body, so the plain profile ``t_+^(m+1)`` suffices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import taylor as tl
from ._linalg import min_eigenvalue
from .convexifier import (FioConvexifier, IntegralConvexifier, build_quadrature, choose_scale,
                          compute_constants, shell_samples)
from .errors import ConstructionFailure, CwFailure, InvalidArgument, RangeError
from .fields import Field, ProductField, ScalarField, SumField
from .geometry import (Ball, ConvexBody, Intersection, Ovaloid, Polytope, diameter,
                       gauge_constants, probe_directions)
from .jets import (DEFAULT_T_GRID, JetFamily, check_cw, check_cw_strict, homogeneous_norm,
                   r_sequence, r_thresholds, tensor_norm_probes)
from .whitney1d import EpsilonMachinery, PowerProfile, build_omega, g_finite, h_scaled

PIPELINES = ("smooth", "finite", "fio", "strict")
DEFAULT_P_MAX = 6
OMEGA_DEPTH = 12
FD_HESSIAN_STEP = 1e-4


# ---------------------------------------------------------------------------
# cutoff


def _cutoff_expr(xs, center, R0):
    outer, inner = (R0 + 2.0) ** 2, (R0 + 1.0) ** 2
    r2 = sum((x - c) ** 2 for x, c in zip(xs, center))
    return tl.smooth_step((outer - r2) / (outer - inner))


def cutoff(x, center, R0) -> np.ndarray:
    """Radial cutoff: 1 on ``|x - center| <= R0 + 1`` and 0 beyond ``R0 + 2``."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    X = np.asarray(x, dtype=float).reshape(-1, center.size)
    return np.asarray(_cutoff_expr([X[:, i] for i in range(center.size)], center, R0))


def cutoff_field(center, R0) -> ScalarField:
    center = np.atleast_1d(np.asarray(center, dtype=float))
    return ScalarField(center.size, lambda xs: _cutoff_expr(xs, center, R0), "cutoff",
                       params={"center": center.tolist(), "R0": float(R0)})


# ---------------------------------------------------------------------------
# jet-only input


class BlendedJetField(Field):
    """Field equal to ``P_i`` near each base point ``y_i``.

    Disjoint flat bumps of radius ``rho`` around the base points blend the
    prescribed polynomials with a background polynomial (the jet at the base
    point closest to the centroid).
    """

    name = "blended_jets"

    def __init__(self, family: JetFamily, radius: float | None = None):
        self.family = family
        self.n = family.n
        pts = family.points
        if radius is None and len(pts) > 1:
            dist = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
            np.fill_diagonal(dist, np.inf)
            radius = 0.5 * float(dist.min())
        elif radius is None:
            radius = 1.0
        self.radius = radius
        self.polys = [family.polynomial(i) for i in range(len(pts))]
        self.background = int(np.argmin(np.linalg.norm(pts - pts.mean(axis=0), axis=1)))

    def jet(self, X, order):
        X = self._points(X)
        xs = tl.variables(X, order)
        rho2 = self.radius ** 2
        total = None
        wsum = None
        for y, P in zip(self.family.points, self.polys):
            d2 = sum((x - c) ** 2 for x, c in zip(xs, y))
            b = tl.smooth_step((rho2 - d2) / (0.75 * rho2))
            term = b * P.jet(X, order)
            total = term if total is None else total + term
            wsum = b if wsum is None else wsum + b
        return total + (1.0 - wsum) * self.polys[self.background].jet(X, order)


# ---------------------------------------------------------------------------
# problem and results


@dataclass
class Problem:
    body: ConvexBody
    field: Field | None = None
    jets: JetFamily | None = None
    order: int | None = None
    pipeline: str = "smooth"
    box: tuple | None = None
    step: float | None = None
    quad_res: int | None = None
    seed: int = 0
    boundary_points: int | None = None
    interior_points: int | None = None
    boundary_only: bool = False

    def __post_init__(self):
        if self.pipeline not in PIPELINES:
            raise InvalidArgument(f"unknown pipeline {self.pipeline!r}; use one of {PIPELINES}")
        if self.field is None and self.jets is None:
            raise InvalidArgument("problem needs a field or a jet family")
        n = self.body.n
        if self.field is not None and self.field.n != n:
            raise InvalidArgument("field dimension does not match body")
        if self.jets is not None and self.jets.n != n:
            raise InvalidArgument("jet dimension does not match body")
        if self.order is None:
            self.order = {"smooth": DEFAULT_P_MAX, "finite": n + 3, "fio": 3,
                          "strict": 3}[self.pipeline]
        m = self.order
        if m < 2:
            raise InvalidArgument("order must be >= 2")
        if self.pipeline == "finite" and m < n + 3:
            raise InvalidArgument(f"finite pipeline needs m >= n + 3 = {n + 3}, got {m}")
        if self.pipeline == "fio":
            if m < 3:
                raise InvalidArgument("fio pipeline needs m >= 3")
            if isinstance(self.body, Ball):
                self.body = Intersection([self.body])
            elif isinstance(self.body, Ovaloid):
                self.body = Intersection([self.body])
            elif not isinstance(self.body, Intersection):
                raise InvalidArgument("fio pipeline needs an intersection of ovaloids")
        if self.box is not None:
            lo, hi = (np.asarray(b, dtype=float).reshape(n) for b in self.box)
            if np.any(hi <= lo):
                raise InvalidArgument("box must satisfy lo < hi")
            self.box = (lo, hi)
        if self.step is not None and not self.step > 0:
            raise InvalidArgument("grid step must be positive")

    @property
    def n(self):
        return self.body.n


@dataclass
class VerificationReport:
    jet_error: dict
    value_error_on_C: float
    min_hessian_eig: float
    argmin: list
    grid: dict
    spikes: list
    midpoint_violations: int
    midpoint_triples: int
    flags: list = field(default_factory=list)
    grid_points: np.ndarray | None = None
    grid_values: np.ndarray | None = None
    grid_min_eig: np.ndarray | None = None

    def to_json(self) -> dict:
        return {"jet_error": {str(k): v for k, v in self.jet_error.items()},
                "value_error_on_C": self.value_error_on_C,
                "min_hessian_eig": self.min_hessian_eig, "argmin": self.argmin,
                "grid": self.grid, "spikes": self.spikes,
                "midpoint_violations": self.midpoint_violations,
                "midpoint_triples": self.midpoint_triples, "flags": list(self.flags)}

    def csv_rows(self):
        if self.grid_points is None:
            return []
        return [(*map(float, x), float(v), float(e))
                for x, v, e in zip(self.grid_points, self.grid_values, self.grid_min_eig)]


@dataclass
class ExtensionResult:
    F: Field
    f: Field
    f_cut: Field
    phi: Field
    a: float
    unit: float
    pipeline: str
    order: int
    guaranteed_order: int
    center: np.ndarray
    R0: float
    constants: dict
    scale: dict
    machinery: dict
    cw: list
    flags: list
    profile: object = None
    report: VerificationReport | None = None

    def H(self) -> Field:
        """``f + unit * phi``, the normalized sum before the final scaling."""
        return SumField([(1.0, self.f_cut), (self.unit, self.phi)], name="H")

    def to_json(self) -> dict:
        return {"pipeline": self.pipeline, "order": self.order,
                "guaranteed_order": self.guaranteed_order, "a": self.a, "unit": self.unit,
                "center": np.asarray(self.center).tolist(), "R0": self.R0,
                "constants": self.constants, "scale": self.scale, "machinery": self.machinery,
                "cw": [r.to_json() for r in self.cw], "flags": sorted(set(self.flags)),
                "report": None if self.report is None else self.report.to_json()}


# ---------------------------------------------------------------------------
# helpers


def body_center(body: ConvexBody) -> np.ndarray:
    if isinstance(body, Intersection):
        return body.center.copy()
    return np.asarray(body.interior_point(), dtype=float)


def circumradius(body: ConvexBody, center) -> float:
    center = np.asarray(center, dtype=float)
    if isinstance(body, Ball):
        return body.radius + float(np.linalg.norm(center - body.center))
    if isinstance(body, Polytope):
        return float(np.max(np.linalg.norm(body.vertices - center, axis=1)))
    return gauge_constants(body, center)[1] * (1.0 + 1e-9)


def default_box(body: ConvexBody, margin=2.5):
    E = np.eye(body.n)
    return -body.support(-E) - margin, body.support(E) + margin


def base_points(body: ConvexBody, rng, boundary=None, interior=None, boundary_only=False):
    n = body.n
    if isinstance(body, Polytope) and not body.full_dimensional:
        return body.sample(max(len(body.vertices), 8), rng) if len(body.vertices) > 1 \
            else body.vertices.copy()
    nb = boundary or (2 if n == 1 else 64 if n == 2 else 48 * n)
    ni = interior or (4 if n == 1 else 16)
    pts = body.boundary_sample(nb, rng)
    if isinstance(body, Polytope):
        pts = np.vstack([body.vertices, pts])
    elif isinstance(body, Ball):
        E = np.vstack([np.eye(n), -np.eye(n)])
        pts = np.vstack([body.center + body.radius * E, pts])
    if not boundary_only:
        pts = np.vstack([pts, body.sample(ni, rng)])
    return np.unique(pts, axis=0)


def _fail(report, what):
    raise CwFailure(f"{what} fails at order {report.order}", report.witness, report)


def _omega(family, f_cut, body, m, rng, support_center, support_radius, flags):
    bounds = [(-1.0 / (2 * p), 1.0 / (2 * p)) for p in range(1, OMEGA_DEPTH + 1)]
    rs, flag = r_thresholds(family, m, bounds)
    if flag:
        flags.append(flag)
    if rs[0] is None:
        raise CwFailure(f"no radius r_1 found for order {m} at the sampled resolution")
    r = []
    for val in rs:
        if val is None:
            break
        r.append(val if not r else min(val, 0.99 * r[-1]))
    r = np.array(r)
    # direct Hessian deficit of the cut-off field, normalized by t^(m-2)
    X, d = shell_samples(body, max(r[-1] * 1e-2, 1e-6), support_radius + 1.0, 3000, rng,
                         support_center, support_radius)
    lam = min_eigenvalue(f_cut.hessian(X)) if len(X) else np.zeros(0)
    D = np.maximum(-lam, 0.0) / d ** (m - 2)
    need = 1.0
    r1, r2 = r[0], (r[1] if len(r) > 1 else 0.0)
    far = d >= r1
    if far.any():
        need = max(need, float(D[far].max()))
    mid = (d >= r2) & (d < r1) & (D > 1.0)
    if mid.any() and len(r) > 1:
        need = max(need, float(np.max(1.0 + (D[mid] - 1.0) * (r1 - r2) / (d[mid] - r2))))
    M = max(1.0 + 1e-3, 1.05 * need)
    om = build_omega(r, M)
    under = int(np.sum(D > om(d) + 1e-12))
    if under:
        flags.append(f"omega-undercut:{under}")
    return om, {"omega": om.to_json(), "deficit_samples": int(len(X)),
                "max_normalized_deficit": float(D.max()) if len(D) else 0.0}


# ---------------------------------------------------------------------------
# build


def build_extension(problem: Problem, verify: bool = True) -> ExtensionResult:
    body, n, m, pipe = problem.body, problem.n, problem.order, problem.pipeline
    rng = np.random.default_rng(problem.seed)
    flags = []
    if problem.field is not None:
        f = problem.field
        pts = base_points(body, rng, problem.boundary_points, problem.interior_points,
                          problem.boundary_only)
        fam_source = lambda order: JetFamily.from_field(f, pts, order)
    else:
        f = BlendedJetField(problem.jets)
        flags.append("jet-only")
        fam_source = lambda order: problem.jets
    center = body_center(body)
    R0 = circumradius(body, center)
    support_radius = R0 + 2.0
    f_cut = ProductField(cutoff_field(center, R0), f, name="f_cut")
    diam = diameter(body)
    box = problem.box or default_box(body)
    cw = []
    machinery = {}
    focus = body.normals if isinstance(body, Polytope) and body.full_dimensional else None
    quad = None if pipe == "fio" else build_quadrature(n, problem.quad_res, problem.seed, focus)
    f_samples = body.sample(200, rng) if not (isinstance(body, Polytope)
                                              and not body.full_dimensional) else body.sample(8, rng)

    if pipe == "smooth":
        P = max(10, m + n + 2)
        fam = fam_source(P + 2)
        if fam.order < P + 2:
            raise InvalidArgument(f"smooth pipeline needs jets of order >= {P + 2}")
        for k in range(2, m + 1):
            rep = check_cw(fam, k, with_r=False)
            cw.append(rep)
            if not rep.passed:
                _fail(rep, "convexity-compatibility condition")
        r, rflags = r_sequence(fam, range(3, P + 3))
        flags += rflags
        missing = [k for k, v in r.items() if v is None]
        if missing:
            raise CwFailure(f"no radius r_m found for orders {missing} at the sampled resolution")
        corner = np.max(np.linalg.norm(np.array(np.meshgrid(*zip(*box))).reshape(n, -1).T
                                       - center, axis=1))
        coverage = 1.05 * max(diam + 4.0, support_radius + 1.0, corner + 1.0)
        profile = EpsilonMachinery.build(r, n, P, coverage=coverage)
        phi = IntegralConvexifier(body, profile, quad)
        constants = compute_constants(n, diam, m, "smooth")
        unit = 2.0 / constants["C"]
        r_conv = float(profile.delta[4])
        machinery["epsilon"] = profile.to_json()
        guaranteed = m
    elif pipe == "finite":
        fam = fam_source(m)
        rep = check_cw(fam, m, with_r=False)
        cw.append(rep)
        if not rep.passed:
            _fail(rep, "convexity-compatibility condition")
        om, info = _omega(fam, f_cut, body, m, rng, center, support_radius, flags)
        machinery.update(info)
        profile = g_finite(om, m - n - 1, 2.0 ** (m - n - 2))
        phi = IntegralConvexifier(body, profile, quad)
        constants = compute_constants(n, diam, m, "finite")
        unit = 2.0 / constants["k"]
        r_conv = 1.0
        machinery["profile"] = profile.to_json()
        guaranteed = m - n - 1
    elif pipe == "fio":
        fam = fam_source(m)
        rep = check_cw(fam, m, with_r=False)
        cw.append(rep)
        if not rep.passed:
            _fail(rep, "convexity-compatibility condition")
        om, info = _omega(fam, f_cut, body, m, rng, center, support_radius, flags)
        machinery.update(info)
        Mpsi = min(o.M for o in body.parts)
        _, _, L = gauge_constants(body, center)
        beta = body.boundary_gradient_floor()
        g = g_finite(om, m - 1, 2.0 ** (m - 2))
        profile = h_scaled(g, L / beta)
        phi = FioConvexifier([o.psi for o in body.parts], profile)
        constants = compute_constants(n, diam, m, "fio", L=L, beta=beta, M=Mpsi)
        unit = 2.0 / constants["k"]
        r_conv = None
        machinery["profile"] = profile.to_json()
        machinery["omega_object"] = om
        guaranteed = m - 1
    else:  # strict
        fam = fam_source(m)
        found = None
        for k in range(2, m + 1):
            res = check_cw_strict(fam, k)
            if res is not None:
                found = (k, *res)
                break
        if found is None:
            rep = check_cw(fam, m, with_r=False)
            cw.append(rep)
            raise CwFailure("strict condition fails at every order <= m", rep.witness, rep)
        k, eta, t0 = found
        r_conv = _strict_radius(f, body, k, eta, t0, rng)
        profile = PowerProfile(m + 1)
        phi = IntegralConvexifier(body, profile, quad)
        constants = compute_constants(n, diam, m, "strict")
        constants.update(k_strict=k, eta=eta, t0=t0, t0_prime=r_conv)
        unit = 1.0
        machinery["profile"] = profile.to_json()
        guaranteed = m

    if pipe == "fio":
        a = unit
        scale = {"a": a, "rule": "2/k"}
    else:
        scale = choose_scale(f_cut, phi, body, r_conv, unit, f_samples, rng=rng,
                             support_center=center, support_radius=support_radius,
                             outer=support_radius + 1.0)
        a = scale["a"]
    om = machinery.pop("omega_object", None)
    F = SumField([(1.0, f_cut), (a, phi)], name="F")
    result = ExtensionResult(F, f, f_cut, phi, float(a), float(unit), pipe, m, guaranteed,
                             center, float(R0), constants, scale, machinery, cw, flags, profile)
    result.omega = om
    if verify:
        result.report = verify_extension(result, problem, box, problem.step)
    return result


def _strict_radius(f, body, k, eta, t0, rng, count=1500):
    """Largest grid ``t <= t0`` with ``D^2 f >= (eta/2) d^(k-2)`` on sampled ``d <= t``."""
    X, d = shell_samples(body, 1e-6, t0, count, rng)
    if len(X) == 0:
        return float(t0)
    ok = min_eigenvalue(f.hessian(X)) - 0.5 * eta * d ** (k - 2) >= 0
    for t in DEFAULT_T_GRID[DEFAULT_T_GRID <= t0][::-1]:
        if np.all(ok[d <= t]):
            return float(t)
    raise ConstructionFailure("strict neighbourhood bound fails at every sampled radius")


# ---------------------------------------------------------------------------
# verification


def fd_hessian(F: Field, X, h=FD_HESSIAN_STEP) -> np.ndarray:
    """Central finite-difference Hessians at the rows of ``X``."""
    X = np.atleast_2d(X)
    N, n = X.shape
    E = np.eye(n) * h
    offsets = [np.zeros(n)]
    for i in range(n):
        offsets += [E[i], -E[i]]
    for i, j in combinations(range(n), 2):
        offsets += [E[i] + E[j], E[i] - E[j], -E[i] + E[j], -E[i] - E[j]]
    pts = (X[:, None, :] + np.array(offsets)[None]).reshape(-1, n)
    V = F.value(pts).reshape(N, len(offsets))
    H = np.empty((N, n, n))
    f0 = V[:, 0]
    for i in range(n):
        H[:, i, i] = (V[:, 1 + 2 * i] - 2.0 * f0 + V[:, 2 + 2 * i]) / h ** 2
    col = 1 + 2 * n
    for i, j in combinations(range(n), 2):
        H[:, i, j] = H[:, j, i] = (V[:, col] - V[:, col + 1] - V[:, col + 2]
                                   + V[:, col + 3]) / (4 * h * h)
        col += 4
    return H


def fd_hessian_resolved(F: Field, X, h=FD_HESSIAN_STEP, h_min=1e-7, rtol=0.05, atol=1e-7):
    """FD Hessians with step halving where ``h`` does not resolve the curvature.

    A point counts as resolved at step ``h`` when the smallest eigenvalues of
    the estimates at ``h`` and ``h/2`` agree to ``rtol`` (relative) plus
    ``atol``.  Returns the raw fixed-step Hessians, the resolved ones and the
    step used per point (``nan`` if no step down to ``h_min`` resolved it).
    """
    X = np.atleast_2d(X)
    raw = fd_hessian(F, X, h)
    out = raw.copy()
    steps = np.full(len(X), h)
    todo = np.arange(len(X))
    coarse = raw
    while len(todo):
        fine = fd_hessian(F, X[todo], h / 2)
        lc, lf = min_eigenvalue(coarse), min_eigenvalue(fine)
        ok = np.abs(lc - lf) <= rtol * np.abs(lf) + atol
        out[todo[ok]] = coarse[ok]
        steps[todo[ok]] = h
        todo, coarse = todo[~ok], fine[~ok]
        h /= 2
        if h < h_min and len(todo):
            out[todo] = coarse
            steps[todo] = np.nan
            break
    return raw, out, steps


def grid_points(box, step) -> tuple[np.ndarray, list]:
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    axes = [np.linspace(l, u, int(round((u - l) / step)) + 1) for l, u in zip(lo, hi)]
    G = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lo))
    return G, [len(a) for a in axes]


def verify_field(F: Field, box, step, reference=None, points=None, order=0, rng=None,
                 triples=2000, keep_grid=True) -> VerificationReport:
    """Jet errors against ``reference`` at ``points``, FD-Hessian sweep and midpoint test.

    ``reference`` is a field or a :class:`JetFamily` (compared at its own points).
    """
    rng = np.random.default_rng(0) if rng is None else rng
    n = F.n
    flags = []
    jet_error, value_err = {}, 0.0
    if reference is not None:
        if isinstance(reference, JetFamily):
            Y = reference.points
            ref = reference.coeffs
            order = min(order, reference.order)
            ref_basis = reference.basis
        else:
            Y = points
            ref_j = reference.jet(Y, order)
            ref, ref_basis = ref_j.c, ref_j.basis
        got = F.jet(Y, order)
        mb = tl.basis(n, order)
        probes = tensor_norm_probes(n)
        for j in range(order + 1):
            sl = mb.degree_slice(j)
            rsl = ref_basis.degree_slice(j)
            diff = got.c[:, sl] - ref[:, rsl]
            if j == 0:
                err = np.abs(diff[:, 0])
            elif j == 1:
                err = np.linalg.norm(diff, axis=1)
            else:
                err = homogeneous_norm(diff, mb, j, probes)
            jet_error[j] = float(np.max(err))
        value_err = jet_error[0]
    G, shape = grid_points(box, step)
    H_raw, H, steps = fd_hessian_resolved(F, G)
    raw_min = float(np.min(min_eigenvalue(H_raw)))
    refined = int(np.sum(steps < FD_HESSIAN_STEP))
    unresolved = int(np.sum(np.isnan(steps)))
    if refined:
        flags.append(f"fd-refined:{refined}")
    if unresolved:
        flags.append(f"fd-unresolved:{unresolved}")
    eigs = np.linalg.eigvalsh(H) if n > 2 else None
    lam_min = min_eigenvalue(H) if eigs is None else eigs[:, 0]
    if eigs is None:
        tr = np.trace(H, axis1=1, axis2=2)
        lam_max = tr - lam_min
    else:
        lam_max = eigs[:, -1]
    big = np.maximum(np.abs(lam_min), np.abs(lam_max))
    finite = np.isfinite(big)
    if not finite.all():
        flags.append("non-finite-hessian")
    median = float(np.median(big[finite])) if finite.any() else 0.0
    spike_idx = np.flatnonzero(~finite | (big > 1e3 * max(median, 1.0)))
    spikes = [G[i].tolist() for i in spike_idx[:20]]
    if len(spike_idx):
        flags.append(f"fd-spikes:{len(spike_idx)}")
    try:
        oracle = min_eigenvalue(F.hessian(G))
        if np.all(np.isfinite(oracle)):
            oracle_min = float(np.min(oracle))
            oracle_at = G[int(np.argmin(oracle))].tolist()
        else:
            oracle_min, oracle_at = None, None
            flags.append("oracle-nonfinite")
    except (NotImplementedError, ArithmeticError, ValueError):
        oracle_min, oracle_at = None, None
    safe = np.where(np.isfinite(lam_min), lam_min, np.inf)
    i_min = int(np.argmin(safe))
    min_eig = float(safe[i_min]) if np.isfinite(safe[i_min]) else None
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    X1 = rng.uniform(lo, hi, (triples, n))
    X2 = rng.uniform(lo, hi, (triples, n))
    lam = rng.uniform(0.0, 1.0, (triples, 1))
    F1, F2 = F.value(X1), F.value(X2)
    Fm = F.value(lam * X1 + (1 - lam) * X2)
    rhs = lam[:, 0] * F1 + (1 - lam[:, 0]) * F2
    tol = 1e-10 * (1.0 + np.abs(F1) + np.abs(F2))
    violations = int(np.sum(Fm > rhs + tol))
    Fg = F.value(G) if keep_grid else None
    return VerificationReport(
        jet_error, value_err, min_eig, G[i_min].tolist(),
        {"lo": lo.tolist(), "hi": hi.tolist(), "step": float(step), "shape": shape,
         "points": int(len(G)), "fd_step": FD_HESSIAN_STEP,
         "fixed_step_min_eig": raw_min, "refined_points": refined,
         "unresolved_points": unresolved, "oracle_min_eig": oracle_min,
         "oracle_argmin": oracle_at},
        spikes, violations, triples, flags,
        G if keep_grid else None, Fg, lam_min if keep_grid else None)


def verify_extension(result, problem: Problem, box=None, step=None, samples=500):
    """Report for a built extension (or any field, used as a control)."""
    rng = np.random.default_rng(problem.seed + 1)
    body = problem.body
    box = box if box is not None else (problem.box or default_box(body))
    if step is None:
        diam = diameter(body)
        step = 0.05 * diam if diam > 0 else 0.05
    if isinstance(result, ExtensionResult):
        F, order = result.F, result.guaranteed_order
    else:
        F, order = result, 0
    if problem.field is not None:
        ref = problem.field
        pts = body.sample(samples, rng)
    else:
        ref, pts = problem.jets, None
    try:
        return verify_field(F, box, step, ref, pts, order, rng)
    except RangeError as exc:
        raise RangeError(f"verification box exceeds profile coverage: {exc}") from None
