"""Regenerate tests/data/oracles.json from independent reference computations.

Every value here is computed without the package's own algorithms, except
where a package evaluator supplies an integrand (smooth profile), in which
case the integration itself is independent.  Run from the repository root:

    python3 tools/freeze_oracles.py

Needs mpmath, sympy and cvxpy in addition to the package dependencies.
"""
from __future__ import annotations

import json
from pathlib import Path

import cvxpy as cp
import mpmath as mp
import numpy as np
import sympy as sp
from scipy.integrate import quad

OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "oracles.json"
mp.mp.dps = 40


# ---------------------------------------------------------------------------
# iterated primitives of a piecewise-affine modulus


def omega_mp(r, M):
    """Piecewise-affine omega: 0 at 0, 1/(p-1) at r_p (p >= 2), M at r_1, flat after."""
    P = len(r)
    nodes = [mp.mpf(0)] + [mp.mpf(x) for x in reversed(r)]
    vals = [mp.mpf(0)] + [mp.mpf(1) / (p - 1) for p in range(P, 1, -1)] + [mp.mpf(M)]

    def om(s):
        if s <= 0:
            return mp.mpf(0)
        if s >= nodes[-1]:
            return vals[-1]
        for a, b, fa, fb in zip(nodes[:-1], nodes[1:], vals[:-1], vals[1:]):
            if a <= s <= b:
                return fa + (fb - fa) * (s - a) / (b - a)
        raise AssertionError
    return om, nodes


def iterated_primitive(r, M, depth, scale, t, derivative=0):
    """``d/dt^derivative`` of the depth-fold primitive of ``omega(scale s)`` at ``t``.

    Cauchy's formula turns the nested integral into one weighted integral,
    split at the breakpoints of the integrand.
    """
    om, nodes = omega_mp(r, M)
    k = depth - derivative
    t = mp.mpf(t)
    if k == 0:
        return om(scale * t)
    brk = sorted({mp.mpf(0), t, *[x / scale for x in nodes if 0 < x / scale < t]})
    f = lambda s: (t - s) ** (k - 1) / mp.factorial(k - 1) * om(scale * s)
    return mp.quad(f, brk)


def g_finite_cases():
    r = [0.5, 0.2, 0.1, 0.05]
    M = 3.0
    cases = []
    for name, depth, scale in (("d2_s1", 2, 1.0), ("d4_s4", 4, 4.0),
                               ("fio_m3", 2, 2.0), ("d5_s8", 5, 8.0)):
        ts = np.geomspace(1e-3, 2.0, 25)
        cases.append({
            "name": name, "r": r, "M": M, "depth": depth, "scale": scale,
            "t": ts.tolist(),
            "g": [float(iterated_primitive(r, M, depth, scale, t)) for t in ts],
            "g1": [float(iterated_primitive(r, M, depth, scale, t, 1)) for t in ts],
        })
    return cases


# ---------------------------------------------------------------------------
# smooth profile: g and g' by adaptive quadrature of eps_tilde


def g_smooth_case():
    from cvxext.whitney1d import EpsilonMachinery

    r = {m: 1.0 for m in range(3, 13)}
    em = EpsilonMachinery.build(r, 2, 10, coverage=8.0)
    et = lambda s: float(em.epsilon_tilde(np.array([s]))[0])
    brk = sorted({c * 2.0 ** k for k in range(-40, 12) for c in (0.75, 1.0, 1.5, 2.25)}
                 | set(em.delta[1:].tolist()))

    def prim(t, weight):
        pts = [0.0] + [b for b in brk if 1e-9 < b < t] + [t]
        f = (lambda s: (t - s) * et(s)) if weight else et
        return sum(quad(f, a, b, epsabs=0.0, epsrel=1e-13, limit=200)[0]
                   for a, b in zip(pts[:-1], pts[1:]))

    ts = np.geomspace(1e-3, 6.0, 20)
    return {"r": "ones", "n": 2, "P": 10, "coverage": 8.0, "t": ts.tolist(),
            "g": [prim(t, True) for t in ts], "g1": [prim(t, False) for t in ts]}


# ---------------------------------------------------------------------------
# flat strip quotient, symbolically


def flat_strip_q():
    x, y, s, u = sp.symbols("x y s u", real=True)
    m = 4
    h = (1 - sp.cos(2 * sp.pi * y)) / (2 * sp.pi) * x ** m
    rows = []
    for y0 in (sp.Rational(1, 2), sp.Rational(1, 4), sp.Rational(1, 8)):
        # Taylor polynomial of order m+1 at (0, y0) in the displacement (s, u)
        P = 0
        for a in range(m + 2):
            for b in range(m + 2 - a):
                c = sp.diff(h, x, a, y, b).subs({x: 0, y: y0}) / (sp.factorial(a) * sp.factorial(b))
                P += c * s ** a * u ** b
        Hs = sp.hessian(P, (s, u))
        for (th_w, th_v, t) in ((0.3, 1.1, 1e-3), (0.0, 0.0, 1e-2), (2.0, -0.7, 0.2)):
            w = (sp.cos(th_w), sp.sin(th_w))
            v = (sp.cos(th_v), sp.sin(th_v))
            tt = sp.Float(t, 30)
            Hn = Hs.subs({s: tt * w[0], u: tt * w[1]})
            q = (sp.Matrix([v]) * Hn * sp.Matrix(v))[0] / tt ** (m - 1)
            rows.append({"y": [0.0, float(y0)], "w": [float(w[0]), float(w[1])],
                         "v": [float(v[0]), float(v[1])], "t": t, "m": m + 1,
                         "Q": float(sp.N(q, 30))})
    return rows


# ---------------------------------------------------------------------------
# projections


def _segment_projection(x, a, b):
    d = b - a
    s = np.clip((x - a) @ d / (d @ d), 0.0, 1.0)
    return a + s * d


def polygon_projections(seed=11):
    rng = np.random.default_rng(seed)
    ang = np.sort(rng.uniform(0, 2 * np.pi, 9))
    rad = rng.uniform(0.8, 1.6, 9)
    V = np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=1)
    from scipy.spatial import ConvexHull
    hull = ConvexHull(V)
    V = V[hull.vertices]  # counterclockwise
    X = rng.uniform(-3, 3, (40, 2))
    out = []
    for x in X:
        if np.all(hull.equations[:, :2] @ x + hull.equations[:, 2] <= 0):
            out.append({"x": x.tolist(), "point": x.tolist(), "distance": 0.0})
            continue
        cands = [_segment_projection(x, V[i], V[(i + 1) % len(V)]) for i in range(len(V))]
        best = min(cands, key=lambda p: np.linalg.norm(x - p))
        out.append({"x": x.tolist(), "point": best.tolist(),
                    "distance": float(np.linalg.norm(x - best))})
    return {"vertices": V.tolist(), "cases": out}


def polytope3_projections(seed=12):
    rng = np.random.default_rng(seed)
    V = rng.normal(size=(14, 3))
    X = rng.uniform(-3, 3, (15, 3))
    out = []
    for x in X:
        lam = cp.Variable(len(V), nonneg=True)
        prob = cp.Problem(cp.Minimize(cp.sum_squares(V.T @ lam - x)), [cp.sum(lam) == 1])
        prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-14, tol_gap_rel=1e-14, tol_feas=1e-14)
        p = V.T @ lam.value
        out.append({"x": x.tolist(), "point": p.tolist(),
                    "distance": float(np.linalg.norm(x - p))})
    return {"vertices": V.tolist(), "cases": out}


# ---------------------------------------------------------------------------
# gauges of an intersection of ellipses, in closed form


def ellipse_gauge(x, c, a):
    """Gauge about the origin of {sum ((z - c)/a)^2 <= 1}: solve for s = 1/mu."""
    x, c, a = (np.asarray(v, dtype=float) for v in (x, c, a))
    A = np.sum((x / a) ** 2)
    B = -2 * np.sum(x * c / a ** 2)
    C = np.sum((c / a) ** 2) - 1.0
    s = (-B + np.sqrt(B * B - 4 * A * C)) / (2 * A)
    return 1.0 / s


def ellipse_pair_gauges(seed=13):
    rng = np.random.default_rng(seed)
    parts = [((-0.25, 0.0), (1.0, 0.8)), ((0.25, 0.0), (1.0, 0.8))]
    X = rng.normal(size=(60, 2)) * 1.5
    rows = []
    for x in X:
        mus = [ellipse_gauge(x, c, a) for c, a in parts]
        rows.append({"x": x.tolist(), "parts": mus, "mu": max(mus)})
    return {"parts": [{"center": list(c), "axes": list(a)} for c, a in parts], "cases": rows}


def lens_radii(count=400_000):
    """Two unit disks centred at (+-1/2, 0): ray lengths from 0, in closed form per ray."""
    a = np.linspace(0, 2 * np.pi, count, endpoint=False)
    U = np.stack([np.cos(a), np.sin(a)], axis=1)
    rho = np.full(count, np.inf)
    for cx in (-0.5, 0.5):
        b = -U[:, 0] * cx
        rho = np.minimum(rho, -b + np.sqrt(b * b - (cx * cx - 1.0)))
    return {"r": float(rho.min()), "R": float(rho.max()),
            "r_exact": 0.5, "R_exact": float(np.sqrt(3.0) / 2.0)}


def main():
    data = {
        "g_finite": g_finite_cases(),
        "g_smooth": g_smooth_case(),
        "flat_strip_q": flat_strip_q(),
        "polygon_projection": polygon_projections(),
        "polytope3_projection": polytope3_projections(),
        "ellipse_pair_gauge": ellipse_pair_gauges(),
        "lens_radii": lens_radii(),
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
