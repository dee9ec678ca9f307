import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cvxext._linalg import min_eigenvalue
from cvxext.convexifier import shell_samples
from cvxext.corpus import ovaloid_pair
from cvxext.errors import CwFailure, InvalidArgument
from cvxext.extension import (BlendedJetField, Problem, build_extension, cutoff, fd_hessian,
                              verify_extension)
from cvxext.fields import (SumField, abs_field, cubic_1d, quadratic, quartic_control,
                           singleton_cubic)
from cvxext.geometry import Ball, Polytope
from cvxext.jets import JetFamily

DISK = Ball([0.0, 0.0], 1.0)
INTERVAL = Polytope([[-1.0], [1.0]])


@pytest.fixture(scope="module")
def disk_result():
    prob = Problem(DISK, quadratic(), pipeline="smooth", step=0.1)
    return prob, build_extension(prob)


@pytest.fixture(scope="module")
def strict_result():
    prob = Problem(ovaloid_pair(), quadratic(), order=3, pipeline="strict", step=0.1)
    return prob, build_extension(prob)


# end to end

def test_disk_smooth_extension_is_clean(disk_result):
    _, res = disk_result
    rep = res.report
    assert rep.value_error_on_C <= 1e-10
    assert all(e <= 1e-6 for e in rep.jet_error.values())
    assert rep.min_hessian_eig >= -1e-6 and rep.grid["oracle_min_eig"] >= -1e-6
    assert rep.midpoint_violations == 0
    assert res.guaranteed_order == 6 and set(rep.jet_error) == set(range(7))


def test_extension_agrees_with_f_on_body(disk_result, rng):
    _, res = disk_result
    Y = np.vstack([DISK.sample(300, rng), DISK.boundary_sample(200, rng)])
    assert np.max(np.abs(res.F.value(Y) - quadratic().value(Y))) <= 1e-10


def test_doubling_scale_never_lowers_min_eigenvalue(disk_result):
    _, res = disk_result
    ax = np.linspace(-3, 3, 31)
    G = np.stack(np.meshgrid(ax, ax), -1).reshape(-1, 2)
    lam = [float(np.min(min_eigenvalue(
        SumField([(1.0, res.f_cut), (c * res.a, res.phi)]).hessian(G)))) for c in (1, 2)]
    assert lam[1] >= lam[0] - 1e-9


def test_cubic_fails_with_witness_in_every_pipeline():
    for pipe, order in (("smooth", 3), ("strict", 3)):
        with pytest.raises(CwFailure) as exc:
            build_extension(Problem(Polytope([[0.0], [1 / 3]]), cubic_1d(), order=order,
                                    pipeline=pipe))
        assert exc.value.witness["y"] == pytest.approx([1 / 3])
        assert exc.value.witness["Q"] == pytest.approx(-6.0, abs=1e-9)


def test_strict_pipeline_on_ovaloid_pair(strict_result):
    _, res = strict_result
    rep = res.report
    assert res.constants["k_strict"] == 2 and res.constants["eta"] == pytest.approx(2.0)
    assert res.a > 0 and rep.value_error_on_C <= 1e-10
    assert rep.min_hessian_eig >= -1e-6 and rep.midpoint_violations == 0


def test_strict_neighbourhood_bound(strict_result, rng):
    prob, res = strict_result
    k, eta, t0 = (res.constants[key] for key in ("k_strict", "eta", "t0_prime"))
    X, d = shell_samples(prob.body, 1e-6, t0, 800, rng)
    lam = min_eigenvalue(prob.field.hessian(X))
    assert np.all(lam >= 0.5 * eta * d ** (k - 2) - 1e-6)


def test_finite_pipeline_one_and_two_dimensions():
    res = build_extension(Problem(INTERVAL, quadratic(n=1), order=4, pipeline="finite",
                                  step=0.05))
    assert res.guaranteed_order == 2 and res.report.grid["oracle_min_eig"] >= 2.0 - 1e-9
    res = build_extension(Problem(DISK, quadratic(), order=5, pipeline="finite", step=0.1))
    rep = res.report
    assert max(rep.jet_error.values()) <= 1e-8 and rep.min_hessian_eig >= -1e-6


def test_jet_only_singleton_is_flagged():
    fam = JetFamily.from_field(singleton_cubic(2), [[0.0, 0.0]], 12)
    fam.field = None
    res = build_extension(Problem(Polytope([[0.0, 0.0]]), jets=fam, step=0.1))
    assert "jet-only" in res.flags
    assert res.report.value_error_on_C <= 1e-10
    assert res.report.grid["oracle_min_eig"] >= -1e-6


def test_blended_jets_reproduce_each_polynomial():
    pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
    fam = JetFamily.from_field(singleton_cubic(2), pts, 4)
    fam.field = None
    F = BlendedJetField(fam)
    Y = np.array(pts) + 0.05
    for i, y in enumerate(Y):
        assert F.value(y[None])[0] == pytest.approx(fam.polynomial(i).value(y[None])[0])


# cutoff

def test_cutoff_plateau_and_support():
    c, R0 = np.zeros(2), 1.5
    assert np.all(cutoff([[0, 0], [2.5, 0], [0, -2.49]], c, R0) == 1.0)
    assert np.all(cutoff([[3.5, 0], [0, 9.0], [-3, -3]], c, R0) == 0.0)


@given(st.floats(0, 6), st.floats(0, 6), st.floats(0, 2 * np.pi))
def test_cutoff_radially_nonincreasing(r1, r2, a):
    u = np.array([np.cos(a), np.sin(a)])
    lo, hi = sorted((r1, r2))
    v = cutoff([lo * u, hi * u], [0.0, 0.0], 1.0)
    assert 0.0 <= v[1] <= v[0] <= 1.0


# verification controls

def test_verify_flags_kink_of_abs():
    prob = Problem(DISK, abs_field(2))
    rep = verify_extension(abs_field(2), prob, ([-1, -1], [1, 1]), 0.1)
    assert rep.midpoint_violations == 0
    assert [0.0, 0.0] in rep.spikes
    assert any(f.startswith("fd-spikes") for f in rep.flags)


def test_verify_reports_nonconvex_control():
    prob = Problem(INTERVAL, quartic_control())
    rep = verify_extension(quartic_control(), prob, ([-2], [2]), 0.05)
    assert rep.min_hessian_eig == pytest.approx(2 - 12 * 4, abs=1e-4)
    assert rep.midpoint_violations > 0


def test_fd_hessian_of_quadratic_is_exact():
    X = np.random.default_rng(0).normal(size=(20, 3))
    H = fd_hessian(quadratic(n=3), X)
    assert np.allclose(H, 2 * np.eye(3), atol=1e-6)


# problem validation

@pytest.mark.parametrize("kwargs", [
    {"pipeline": "cubic"},
    {"pipeline": "finite", "order": 4},
    {"pipeline": "fio", "order": 2},
    {"order": 1},
    {"box": ([0, 0], [0, 1])},
    {"step": 0.0},
    {"field": None},
    {"field": quadratic(n=3)},
])
def test_problem_rejects_bad_input(kwargs):
    args = {"body": DISK, "field": quadratic()}
    args.update(kwargs)
    with pytest.raises(InvalidArgument):
        Problem(**args)


def test_fio_needs_ovaloids():
    with pytest.raises(InvalidArgument):
        Problem(Polytope([[-1, -1], [1, -1], [1, 1]]), quadratic(), order=3, pipeline="fio")
    assert Problem(DISK, quadratic(), order=3, pipeline="fio").body.parts
