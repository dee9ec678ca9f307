from math import gamma, pi

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cvxext._linalg import min_eigenvalue
from cvxext.convexifier import (FioConvexifier, IntegralConvexifier, build_quadrature,
                                choose_scale, compute_constants, shell_samples)
from cvxext.errors import ConstructionFailure, InvalidArgument, RangeError
from cvxext.extension import Problem, build_extension
from cvxext.fields import ellipse, quadratic, zero
from cvxext.geometry import Ball, Polytope
from cvxext.whitney1d import EpsilonMachinery, PowerProfile

DISK = Ball([0.0, 0.0], 1.0)
SQUARE = Polytope([[-1, -1], [1, -1], [1, 1], [-1, 1]])


# quadrature

def test_quadrature_examples():
    q = build_quadrature(2, 360)
    assert q.nodes.shape == (360, 2) and np.allclose(q.weights, 2 * pi / 360)
    q = build_quadrature(1)
    assert q.nodes.tolist() == [[1.0], [-1.0]] and q.weights.tolist() == [1.0, 1.0]
    q = build_quadrature(3)
    assert q.integrate(q.nodes[:, 0] ** 2) == pytest.approx(4 * pi / 3, abs=1e-6)
    with pytest.raises(InvalidArgument):
        build_quadrature(0)


@pytest.mark.parametrize("n,res,focus", [(2, None, None), (2, 360, SQUARE.normals),
                                         (3, None, None), (3, 40, None), (4, 20000, None)])
def test_quadrature_moments(n, res, focus):
    q = build_quadrature(n, res, focus=focus)
    vol = q.weights.sum()
    exact = 2 * pi ** (n / 2) / gamma(n / 2)
    assert np.all(q.weights >= 0)
    assert np.allclose(np.linalg.norm(q.nodes, axis=1), 1.0)
    tol = 1e-8 if n <= 3 else 1e-8 * exact
    assert vol == pytest.approx(exact, abs=tol)
    v = np.ones(n) / np.sqrt(n)
    moment_tol = 1e-6 if n <= 3 else 2e-2 * exact / n
    assert q.integrate((q.nodes @ v) ** 2) == pytest.approx(exact / n, abs=moment_tol)


def test_graded_quadrature_resolves_face_normals():
    q = build_quadrature(2, 720, focus=SQUARE.normals)
    ang = np.arctan2(q.nodes[:, 1], q.nodes[:, 0])
    # nodes accumulate geometrically at each normal
    for u in SQUARE.normals:
        gap = np.abs(np.angle(np.exp(1j * (ang - np.arctan2(u[1], u[0])))))
        assert np.sum(gap < 1e-4) >= 10


# phi evaluation

def test_phi_vanishes_on_body(rng):
    phi = IntegralConvexifier(DISK, PowerProfile(5), build_quadrature(2))
    Y = np.vstack([DISK.sample(200, rng), DISK.boundary_sample(50, rng)])
    J = phi.jet(Y, 3)
    assert np.all(J.c == 0.0)
    assert np.all(phi.value(Y) == 0.0)


def test_phi_one_dimensional_two_node_formula():
    g = PowerProfile(4)
    phi = IntegralConvexifier(Polytope([[-1.0], [1.0]]), g, build_quadrature(1))
    x = np.linspace(-4, 4, 81)
    assert np.allclose(phi.value(x[:, None]), g(x - 1) + g(-x - 1), rtol=1e-14, atol=0)
    H = phi.hessian(x[:, None])[:, 0, 0]
    assert np.allclose(H, g.g_derivative(2, x - 1) + g.g_derivative(2, -x - 1), rtol=1e-13)


def test_phi_hessian_is_quadrature_of_second_derivative(rng):
    # D^2 phi(x)(v^2) = int g''(<x,w> - h(w)) <w,v>^2 dw
    g = PowerProfile(4)
    q = build_quadrature(2)
    phi = IntegralConvexifier(SQUARE, g, q)
    h = SQUARE.support(q.nodes)
    for x in rng.uniform(-3, 3, (10, 2)):
        v = rng.normal(size=2)
        direct = q.integrate(g.g_derivative(2, q.nodes @ x - h) * (q.nodes @ v) ** 2)
        assert v @ phi.hessian(x[None])[0] @ v == pytest.approx(direct, rel=1e-12, abs=1e-14)


def test_fio_single_ovaloid_boundary_and_outside():
    phi = FioConvexifier([ellipse((0.0, 0.0), (1.0, 1.0))], PowerProfile(4))
    assert phi.value(np.array([[0.6, 0.8]]))[0] == 0.0
    assert phi.value(np.array([[0.61, 0.81]]))[0] > 0.0
    assert phi.value(np.array([[0.1, -0.2]]))[0] == 0.0


def test_integral_and_fio_agree_in_sign_and_are_convex():
    g = PowerProfile(4)
    integral = IntegralConvexifier(DISK, g, build_quadrature(2))
    fio = FioConvexifier([ellipse((0.0, 0.0), (1.0, 1.0))], g)
    ax = np.linspace(-2.5, 2.5, 41)
    G = np.stack(np.meshgrid(ax, ax), -1).reshape(-1, 2)
    d = np.abs(np.linalg.norm(G, axis=1) - 1.0)
    G = G[d > 0.02]
    assert np.array_equal(integral.value(G) > 0, fio.value(G) > 0)
    for phi in (integral, fio):
        assert np.min(min_eigenvalue(phi.hessian(G))) >= -1e-8


def test_phi_outside_profile_range_raises():
    em = EpsilonMachinery.build({m: 1.0 for m in range(3, 13)}, 2, 10, coverage=3.0)
    phi = IntegralConvexifier(DISK, em, build_quadrature(2, 90))
    phi.value(np.array([[2.5, 0.0]]))
    with pytest.raises(RangeError):
        phi.value(np.array([[10.0, 0.0]]))


def test_quadrature_dimension_mismatch():
    with pytest.raises(InvalidArgument):
        IntegralConvexifier(DISK, PowerProfile(3), build_quadrature(3, 8))


# constants

def test_compute_constants_examples():
    assert compute_constants(2, 2.0, 6, "smooth")["C"] == pytest.approx(1 / 11664, rel=1e-15)
    rec = compute_constants(2, 2.0, 5, "finite")
    assert rec["k"] == pytest.approx(rec["V"] / (36 * 27), rel=1e-15)
    assert compute_constants(2, 2.0, 3, "fio", L=1, beta=1, M=1)["k"] == 0.5
    # each extra order halves the fio constant by 2^(m-2)
    assert compute_constants(2, 2.0, 5, "fio", L=1, beta=1, M=1)["k"] == 1 / 64
    assert compute_constants(2, 2.0, 7, "finite")["k"] == pytest.approx(
        rec["k"] / 2 ** (2 + 3), rel=1e-15)


def test_compute_constants_rejects_bad_input():
    with pytest.raises(InvalidArgument):
        compute_constants(2, 2.0, 4, "finite")
    with pytest.raises(InvalidArgument):
        compute_constants(2, 2.0, 3, "fio")
    with pytest.raises(InvalidArgument):
        compute_constants(2, 2.0, 2, "fio", L=1, beta=1, M=1)
    with pytest.raises(InvalidArgument):
        compute_constants(2, 2.0, 3, "cubic")


@given(st.floats(0.0, 10.0), st.floats(0.0, 10.0))
def test_smooth_constant_decreases_with_diameter(d1, d2):
    c1, c2 = (compute_constants(2, d, 6, "smooth")["C"] for d in (d1, d2))
    assert (c1 - c2) * (d1 - d2) <= 0


# scale

def _power_phi(body=DISK):
    return IntegralConvexifier(body, PowerProfile(4), build_quadrature(2))


def test_choose_scale_zero_field_gives_floor():
    sc = choose_scale(zero(2), _power_phi(), DISK, 0.5, 1e6,
                      DISK.sample(50, np.random.default_rng(0)), shell_count=300)
    assert sc["M"] == 1.0 and sc["A"] == 2.0 and sc["a"] == 2e6


def test_choose_scale_quadratic_sees_hessian():
    sc = choose_scale(quadratic(), _power_phi(), DISK, 0.5, 1e6,
                      DISK.sample(50, np.random.default_rng(0)), shell_count=300)
    assert sc["sup_hessian_f"] == pytest.approx(2.0) and sc["M"] >= 2.0
    assert sc["A"] == 2 * sc["M"] ** 2


def test_choose_scale_fails_when_phi_flat_on_shell():
    flat = IntegralConvexifier(DISK, PowerProfile(4), build_quadrature(2, 4))
    with pytest.raises(ConstructionFailure):
        choose_scale(quadratic(), flat, DISK, 1e-4, 1.0,
                     DISK.sample(10, np.random.default_rng(0)), shell_count=400)


def test_shell_samples_respect_distance_band(rng):
    X, d = shell_samples(SQUARE, 0.01, 2.0, 400, rng)
    assert len(X) > 300
    assert np.all((d >= 0.01) & (d <= 2.0))
    assert np.allclose(SQUARE.project_many(X)[1], d)


@pytest.mark.slow
def test_scale_stable_under_doubled_resolution():
    a = [build_extension(Problem(DISK, quadratic(), quad_res=r), verify=False).a
         for r in (720, 1440)]
    assert abs(a[1] - a[0]) < 0.1 * a[0]
