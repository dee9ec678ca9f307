"""The ten acceptance criteria, one test each, at their stated tolerances.

Each test prints a single ``criterion N: PASS|FAIL`` line (visible with
``-v``) and fails if the check fails or exceeds its time budget.
"""
import time

import numpy as np
import pytest

from cvxext.convexifier import shell_samples
from cvxext.corpus import flat_strip_t_eps, hyperbola_minimal_value, hyperbola_support_value
from cvxext.corpus import ovaloid_pair
from cvxext.extension import Problem, build_extension
from cvxext.fields import cubic_1d, ellipse, flat_strip, quadratic
from cvxext.geometry import (Ball, Intersection, Ovaloid, Polytope, alpha_angle, angle_between,
                             cap_volume_bound, diameter, exact_cap_measure,
                             gauge_constants, minkowski_functional, sample_cap, select_cap)
from cvxext.jets import JetFamily, check_cw, minimal_convex_extension
from cvxext.whitney1d import (DyadicCover, EpsilonMachinery, band_index, build_omega, g_finite,
                              partition_member, phi_sum)

ONES = {m: 1.0 for m in range(3, 13)}


@pytest.fixture
def verdict(capsys):
    """Run a criterion, print its verdict line and enforce the time budget."""

    def run(number, title, budget, check):
        start = time.perf_counter()
        error = None
        try:
            detail = check()
        except AssertionError as exc:
            error, detail = exc, str(exc).splitlines()[0] if str(exc) else "assertion failed"
        elapsed = time.perf_counter() - start
        slow = elapsed >= budget
        ok = error is None and not slow
        note = f"{detail}; " if detail else ""
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {title}  "
                  f"({note}{elapsed:.1f}s of {budget:g}s)")
        if error is not None:
            raise error
        assert not slow, f"criterion {number} took {elapsed:.1f}s (budget {budget}s)"

    return run


def random_polygon(rng):
    ang = np.sort(rng.uniform(0, 2 * np.pi, 9))
    rad = rng.uniform(0.6, 1.6, 9)
    return Polytope(np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=1))


def random_polytope3(rng):
    return Polytope(rng.normal(size=(16, 3)))


def bodies(rng):
    return [Ball([0.0, 0.0], 1.0), Polytope([[-1, -1], [1, -1], [1, 1], [-1, 1]]),
            random_polygon(rng), random_polytope3(rng)]


def outside_point(body, rng):
    while True:
        x = rng.normal(size=body.n) * 2.5
        p = body.project(x)
        if p.distance > 1e-3:
            return x, p


def unit_orthogonal(u, rng):
    e = rng.normal(size=u.size)
    e -= (e @ u) * u
    return e / np.linalg.norm(e)


# 1

def test_partition_of_unity(verdict):
    def check():
        t = np.geomspace(2.0 ** -20, 2.0 ** 10, 10_000)
        cover = DyadicCover()
        total = sum(partition_member(k, t, cover) for k in range(-23, 12))
        Phi = phi_sum(t, cover)
        err = float(np.max(np.abs(total - 1.0)))
        assert err <= 1e-12, f"max |sum - 1| = {err:.2e}"
        assert np.all((Phi >= 1.0) & (Phi <= 2.0)), "Phi outside [1, 2]"
        return f"max |sum - 1| = {err:.1e}, Phi in [{Phi.min():.3f}, {Phi.max():.3f}]"

    verdict(1, "partition of unity", 5, check)


# 2

def test_epsilon_inequality(verdict):
    def check():
        rng = np.random.default_rng(2)
        em = EpsilonMachinery.build(ONES, 2, 10)
        delta = em.delta
        count = 0
        for q in range(4, 9):
            for t in rng.uniform(delta[q + 1], delta[q], 50):
                s = rng.uniform(t / 2, t, 10)
                bad = em.epsilon(2 * s) < t ** (q + 2)
                assert not bad.any(), f"q={q} t={t:.3e} fails"
                count += len(s)
        return f"{count} pairs (t, s)"

    verdict(2, "epsilon(2s) >= t^(q+2) on bands 4..8", 5, check)


# 3

def test_slab_inequality(verdict):
    def check():
        rng = np.random.default_rng(3)
        worst = np.inf
        for i in range(200):
            body = bodies(rng)[i % 4]
            x, p = outside_point(body, rng)
            t, u = p.distance, p.direction
            alpha = alpha_angle(t, diameter(body))
            a = rng.uniform(alpha / 3, alpha / 2)
            w = np.cos(a) * u + np.sin(a) * unit_orthogonal(u, rng)
            slack = x @ w - body.support(w[None])[0]
            assert t / 2 - 1e-9 <= slack <= t + 1e-9, f"slack {slack} for t={t}"
            worst = min(worst, slack / t)
        return f"min slack/t = {worst:.3f}"

    verdict(3, "slab inequality", 10, check)


# 4

def test_cap_selection(verdict):
    def check():
        rng = np.random.default_rng(4)
        samples = 0
        for i in range(200):
            body = bodies(rng)[i % 4]
            x, p = outside_point(body, rng)
            v = rng.normal(size=body.n)
            v /= np.linalg.norm(v)
            cap = select_cap(x, v, body)
            alpha = alpha_angle(p.distance, diameter(body))
            if p.direction @ v < 0:
                v = -v
            W = sample_cap(cap, 50, rng)
            ang = angle_between(np.broadcast_to(p.direction, W.shape), W)
            assert np.all(ang >= alpha / 3 - 1e-12) and np.all(ang <= alpha / 2 + 1e-12), \
                "cap leaves the angular band"
            assert np.all(W @ v >= np.sin(alpha / 3) - 1e-12), "<w, v> below sin(alpha/3)"
            measure = exact_cap_measure(body.n, cap.half_angle)
            assert measure >= cap_volume_bound(body.n, alpha), "cap measure below the bound"
            samples += len(W)
        return f"{samples} cap samples"

    verdict(4, "cap selection", 10, check)


# 5

def test_cw_fixtures(verdict):
    def check():
        cubic = JetFamily.from_field(cubic_1d(), [[0.0], [1 / 6], [1 / 3]], 3)
        rep = check_cw(cubic, 3)
        assert not rep.passed and abs(rep.witness["Q"] + 6.0) <= 1e-9, "cubic witness"
        assert rep.witness["y"] == [1 / 3], "cubic witness location"
        disk = Ball([0.0, 0.0], 1.0)
        pts = np.vstack([disk.boundary_sample(64, np.random.default_rng(5)), [[0.0, 0.0]]])
        fam = JetFamily.from_field(quadratic(), pts, 6)
        assert all(check_cw(fam, m).passed for m in range(2, 7)), "disk fails an order"
        t_eps = flat_strip_t_eps(4, 0.1)
        assert t_eps == pytest.approx(0.1 / (4 * np.pi * 11 * 5 * 4 * 3))
        Y = np.stack([np.zeros(201), np.linspace(0, 1, 201)], axis=1)
        strip = JetFamily.from_field(flat_strip(4), Y, 5)
        rep5 = check_cw(strip, 5, t_grid=np.geomspace(t_eps * 1e-4, t_eps, 30), eps_test=0.1)
        worst = min(q for _, q in rep5.q_profile)
        assert rep5.passed and worst >= -0.1, f"flat strip min Q {worst}"
        return f"cubic Q = {rep.witness['Q']:.12g}, strip min Q = {worst:.3g}"

    verdict(5, "CW fixtures", 60, check)


# 6

def test_minimal_extension(verdict):
    def check():
        for t in (0.1, 1.0, 10.0):
            val = hyperbola_support_value(t)[0]
            assert abs(val - (2 + t + 1 / t)) <= 1e-9, f"support value at t={t}: {val}"
        m = hyperbola_minimal_value(np.geomspace(0.01, 100.0, 4001))
        assert m > 100.0, f"m(f)(-1,-1) = {m}"
        ang = np.linspace(0, 2 * np.pi, 8192, endpoint=False)
        Y = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        f = quadratic()
        Q = 2.0 * np.stack([np.cos(ang[::512]), np.sin(ang[::512])], axis=1)
        vals = minimal_convex_extension(Y, f.value(Y), f.gradient(Y), Q)
        err = float(np.max(np.abs(vals - 3.0)))
        assert err <= 1e-6, f"ball m(f) error {err}"
        return f"m(f)(-1,-1) >= {m:.2f}, ball error {err:.1e}"

    verdict(6, "minimal convex extension", 10, check)


# 7

def test_smooth_pipeline_disk(verdict):
    def check():
        disk = Ball([0.0, 0.0], 1.0)
        prob = Problem(disk, quadratic(), pipeline="smooth", box=([-3, -3], [3, 3]), step=0.05)
        res = build_extension(prob)
        rep = res.report
        assert rep.jet_error[0] <= 1e-8, f"|F - f| = {rep.jet_error[0]}"
        assert rep.jet_error[1] <= 1e-6, f"|grad F - grad f| = {rep.jet_error[1]}"
        assert rep.grid["points"] == 121 ** 2
        assert rep.min_hessian_eig >= -1e-6, f"FD min eig {rep.min_hessian_eig}"
        rng = np.random.default_rng(7)
        delta = res.profile.delta
        X, d = shell_samples(disk, 1e-6, delta[4], 700, rng)
        X, d = X[:500], d[:500]
        assert len(X) == 500
        q = band_index(d, delta)
        V = rng.normal(size=X.shape)
        V /= np.linalg.norm(V, axis=1, keepdims=True)
        H = res.H().hessian(X)
        quad = np.einsum("ni,nij,nj->n", V, H, V)
        gap = float(np.min(quad - d ** q))
        assert gap >= -1e-6, f"shell inequality gap {gap}"
        return (f"jet errors {rep.jet_error[0]:.1e}/{rep.jet_error[1]:.1e}, "
                f"FD min eig {rep.min_hessian_eig:.3f}, shell gap {gap:.3f}")

    verdict(7, "smooth pipeline on the disk", 120, check)


# 8

def test_fio_pipeline_ovaloid_pair(verdict):
    def check():
        body = ovaloid_pair()
        prob = Problem(body, quadratic(), order=3, pipeline="fio", step=0.05)
        res = build_extension(prob)
        rng = np.random.default_rng(8)
        Y = np.vstack([body.sample(250, rng), body.boundary_sample(250, rng)])
        assert np.all(res.phi.value(Y) == 0.0), "phi nonzero on C"
        X, d = shell_samples(body, 1e-6, 1.0, 800, rng)
        X, d = X[:500], d[:500]
        assert len(X) == 500
        V = rng.normal(size=X.shape)
        V /= np.linalg.norm(V, axis=1, keepdims=True)
        quad = np.einsum("ni,nij,nj->n", V, res.phi.hessian(X), V)
        k = res.constants["k"]
        gap = float(np.min(quad - k * d ** (prob.order - 2) * res.omega(d)))
        assert gap >= -1e-6, f"D^2 phi bound gap {gap}"
        rep = res.report
        assert rep.min_hessian_eig >= -1e-6, f"FD min eig {rep.min_hessian_eig}"
        return f"k = {k:.3g}, bound gap {gap:.2e}, FD min eig {rep.min_hessian_eig:.3f}"

    verdict(8, "fio pipeline on the ovaloid pair", 120, check)


# 9

def test_profiles_against_quadrature(verdict, oracles):
    def check():
        worst = 0.0
        count = 0
        for case in oracles["g_finite"]:
            g = g_finite(build_omega(case["r"], case["M"]), case["depth"], case["scale"])
            ref = np.array(case["g"])
            rel = np.abs(g(np.array(case["t"])) - ref) / np.abs(ref)
            worst = max(worst, float(rel.max()))
            count += len(ref)
        assert count == 100
        assert worst <= 1e-8, f"relative error {worst:.2e}"
        em = EpsilonMachinery.build(ONES, 2, 10)
        t = np.geomspace(1e-6, 7.0, 2000)
        assert np.array_equal(em.g_derivative(2, t), em.epsilon_tilde(t)), "g'' != eps_tilde"
        return f"max relative error {worst:.1e} over {count} points"

    verdict(9, "profiles against nested quadrature", 30, check)


# 10

def test_gauge_properties(verdict):
    def check():
        rng = np.random.default_rng(10)
        worst = 0.0
        for i in range(1000):
            body = bodies(rng)[i % 3] if i % 4 else ovaloid_pair()
            c = body.interior_point()
            x, y = rng.normal(size=(2, body.n)) * 2
            lam = rng.uniform(0.01, 10.0)
            mu = lambda z: minkowski_functional(body, c + z, c)
            hom = abs(mu(lam * x) - lam * mu(x))
            sub = mu(x + y) - mu(x) - mu(y)
            assert hom <= 1e-9 * max(1.0, lam * mu(x)), f"homogeneity defect {hom}"
            assert sub <= 1e-9, f"subadditivity defect {sub}"
            worst = max(worst, hom, sub)
        for _ in range(10):
            parts = [Ovaloid(ellipse(rng.uniform(-0.3, 0.3, 2), rng.uniform(0.7, 1.3, 2)), 0.5)
                     for _ in range(3)]
            body = Intersection(parts)
            r, R, _ = gauge_constants(body, body.center)
            for x in rng.normal(size=(20, 2)) * 2:
                d = body.project(x).distance
                dk = max(o.project(x).distance for o in parts)
                assert dk <= d + 1e-8 and d <= R / r * dk + 1e-8, "sandwich inequality"
        return f"worst defect {worst:.1e}"

    verdict(10, "gauge properties", 30, check)
