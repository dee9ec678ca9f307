"""Canonical examples and counterexamples with their expected outcomes."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from math import factorial, pi
from typing import Callable

import numpy as np

from .errors import CwFailure, InvalidArgument
from .extension import Problem, build_extension
from .fields import (cubic_1d, cubic_nd, ellipse, flat_strip, hyperbola, hyperbola_gradient,
                     quadratic, singleton_cubic)
from .geometry import Ball, Intersection, Ovaloid, Polytope
from .jets import JetFamily, check_1d_endpoint, check_cw, minimal_convex_extension

HYPERBOLA_POINT = np.array([-1.0, -1.0])


@dataclass
class Expectation:
    label: str
    expected: object
    tol: float | None = None
    note: str = ""

    def matches(self, computed) -> bool:
        if computed is None:
            return False
        if isinstance(self.expected, bool):
            return bool(computed) is self.expected
        if self.tol is None:
            return computed == self.expected
        return abs(float(computed) - float(self.expected)) <= self.tol


@dataclass
class CorpusEntry:
    name: str
    description: str
    expectations: list
    runner: Callable[[], dict]
    body: object = None
    field: object = None
    extra: dict = dc_field(default_factory=dict)

    def run(self):
        computed = self.runner()
        rows = []
        for e in self.expectations:
            got = computed.get(e.label)
            rows.append({"entry": self.name, "check": e.label, "expected": e.expected,
                         "computed": got, "tol": e.tol, "ok": e.matches(got), "note": e.note})
        return rows


# ---------------------------------------------------------------------------
# unbounded body: no convex extension


def hyperbola_curve(t):
    t = np.asarray(t, dtype=float)
    return np.stack([t, 1.0 / t], axis=-1)


def hyperbola_support_value(t, x=HYPERBOLA_POINT) -> np.ndarray:
    """Tangent plane of ``f`` at ``gamma(t) = (t, 1/t)`` evaluated at ``x``."""
    Y = hyperbola_curve(np.atleast_1d(t))
    f = hyperbola().value(Y)
    G = hyperbola_gradient(Y[:, 0], Y[:, 1])
    return f + np.sum(G * (np.asarray(x, dtype=float) - Y), axis=1)


def hyperbola_minimal_value(ts, x=HYPERBOLA_POINT) -> float:
    Y = hyperbola_curve(ts)
    f = hyperbola().value(Y)
    G = hyperbola_gradient(Y[:, 0], Y[:, 1])
    return float(minimal_convex_extension(Y, f, G, np.atleast_2d(x))[0])


def hyperbola_example() -> CorpusEntry:
    def run():
        out = {f"support value t={t:g}": float(hyperbola_support_value(t)[0])
               for t in (0.1, 1.0, 10.0, 100.0)}
        out["sampled m(f)(-1,-1) over t in [0.01,100] exceeds 100"] = \
            hyperbola_minimal_value(np.geomspace(0.01, 100.0, 2001)) > 100.0
        return out

    ex = [Expectation(f"support value t={t:g}", 2.0 + t + 1.0 / t, 1e-9, "closed form 2 + t + 1/t")
          for t in (0.1, 1.0, 10.0, 100.0)]
    ex.append(Expectation("sampled m(f)(-1,-1) over t in [0.01,100] exceeds 100", True,
                          note="supporting values diverge along the curve"))
    return CorpusEntry("hyperbola", "-2 sqrt(xy) + 1/(x+1) + 1/(y+1) on {x>0, xy>=1}", ex, run,
                       field=hyperbola())


# ---------------------------------------------------------------------------
# flat strip: jets vanish on the segment, no convex extension


def flat_strip_t_eps(m: int, eps: float) -> float:
    return min(1.0, eps / (4 * pi * (2 * m + 3) * (m + 1) * m * (m - 1)))


def flat_strip_example(m: int = 4, points: int = 201, eps: float = 0.1) -> CorpusEntry:
    if m < 2 or m % 2:
        raise InvalidArgument("flat strip needs an even m >= 2")
    h = flat_strip(m)
    body = Polytope([[0.0, 0.0], [0.0, 1.0]])

    def run():
        from . import taylor as tl
        mb = tl.basis(2, m)
        top = h.jet(np.array([[0.0, 0.5]]), m).c[0]
        out = {"D^m h(0,1/2) on e1": factorial(m) * top[mb.index[(m, 0)]]}
        Y = np.stack([np.zeros(101), np.linspace(0, 1, 101)], axis=1)
        low = h.jet(Y, m - 1).c
        out["max |D^k h| on C, k < m"] = float(np.max(np.abs(low)))
        x0 = 0.5
        mid = h.value(np.array([[x0, 0.5]]))[0]
        ends = h.value(np.array([[x0, 0.0], [x0, 1.0]]))
        out["midpoint inequality violated at x0=1/2"] = bool(mid > 0.5 * ends.sum())
        Yc = np.stack([np.zeros(points), np.linspace(0, 1, points)], axis=1)
        fam = JetFamily.from_field(h, Yc, m + 1)
        t_eps = flat_strip_t_eps(m, eps)
        rep = check_cw(fam, m + 1, t_grid=np.geomspace(t_eps * 1e-4, t_eps, 25), eps_test=eps,
                       with_r=False)
        out[f"CW^{m + 1} at eps={eps:g} for t <= t_eps"] = bool(
            rep.passed and min(q for _, q in rep.q_profile) >= -eps)
        return out

    ex = [Expectation("D^m h(0,1/2) on e1", factorial(m) / pi, 1e-9, "m!/pi"),
          Expectation("max |D^k h| on C, k < m", 0.0, 1e-12, "jets vanish below order m"),
          Expectation("midpoint inequality violated at x0=1/2", True,
                      note="theta(1/2) = 1/pi > 0 while theta vanishes at the ends"),
          Expectation(f"CW^{m + 1} at eps={eps:g} for t <= t_eps", True,
                      note="t_eps = eps / (4 pi (2m+3)(m+1) m (m-1))")]
    return CorpusEntry(f"flat_strip_m{m}", f"theta(y) x^{m} on {{0}} x [0,1]", ex, run,
                       body=body, field=h, extra={"m": m})


# ---------------------------------------------------------------------------
# cubic: convex Hessian on C yet no convex extension


def cubic_1d_example() -> CorpusEntry:
    f = cubic_1d()
    body = Polytope([[0.0], [1.0 / 3.0]])

    def run():
        b = np.array([[1.0 / 3.0]])
        J = f.jet(b, 3).c[0]
        ders = [2 * J[2], 6 * J[3]]
        out = {"1D endpoint criterion at b=1/3": check_1d_endpoint(ders, "right")}
        fam = JetFamily.from_field(f, np.array([[0.0], [1.0 / 6.0], [1.0 / 3.0]]), 3)
        rep3 = check_cw(fam, 3, with_r=False)
        out["CW^3 passes"] = rep3.passed
        out["CW^3 witness Q"] = rep3.witness["Q"]
        out["CW^3 witness y"] = rep3.witness["y"][0]
        out["CW^2 passes"] = check_cw(fam, 2, with_r=False).passed
        ball = Ball(np.zeros(2), 1.0 / 3.0)
        axis = np.vstack([np.eye(2), -np.eye(2)]) / 3.0
        pts = np.vstack([axis, ball.boundary_sample(64, np.random.default_rng(0)),
                         np.zeros((1, 2))])
        famn = JetFamily.from_field(cubic_nd(2), pts, 3)
        out["n-dim CW^3 passes"] = check_cw(famn, 3, with_r=False).passed
        out["n-dim CW^2 passes"] = check_cw(famn, 2, with_r=False).passed
        return out

    ex = [Expectation("1D endpoint criterion at b=1/3", False, note="(f'', f''') = (0, -6)"),
          Expectation("CW^3 passes", False),
          Expectation("CW^3 witness Q", -6.0, 1e-9, "Q_3 = f'' / t + f''' = -6 at b"),
          Expectation("CW^3 witness y", 1.0 / 3.0, 1e-12),
          Expectation("CW^2 passes", True, note="f'' = 2 - 6x >= 0 on [0, 1/3]"),
          Expectation("n-dim CW^3 passes", False, note="|x|^2 - x_1^3 on B(0, 1/3)"),
          Expectation("n-dim CW^2 passes", True, note="Hessian diag(2 - 6x_1, 2) >= 0")]
    return CorpusEntry("cubic_1d", "x^2 - x^3 on [0, 1/3]", ex, run, body=body, field=f)


# ---------------------------------------------------------------------------
# successes


def ovaloid_pair() -> Intersection:
    parts = []
    for cx in (-0.25, 0.25):
        psi = ellipse((cx, 0.0), (1.0, 0.8))
        parts.append(Ovaloid(psi, psi.strong_convexity, center=(cx, 0.0),
                             spec={"type": "ovaloid", "psi": "ellipse",
                                   "params": {"center": [cx, 0.0], "axes": [1.0, 0.8]}}))
    return Intersection(parts)


def _clean_extension(problem: Problem, step: float) -> dict:
    problem.step = step
    try:
        res = build_extension(problem)
    except CwFailure:
        return {"build succeeds": False}
    rep = res.report
    out = {"build succeeds": True,
           "F = f on C": rep.value_error_on_C <= 1e-10,
           "convex on the box (exact Hessian sweep)": rep.grid["oracle_min_eig"] is not None
           and rep.grid["oracle_min_eig"] >= -1e-6,
           "midpoint violations": rep.midpoint_violations}
    if not rep.grid["unresolved_points"]:
        out["convex on the box (FD sweep)"] = rep.min_hessian_eig >= -1e-6
    return out


def _success_expectations(fd=True):
    ex = [Expectation("build succeeds", True), Expectation("F = f on C", True),
          Expectation("convex on the box (exact Hessian sweep)", True),
          Expectation("midpoint violations", 0)]
    if fd:
        ex.append(Expectation("convex on the box (FD sweep)", True))
    return ex


def disk_quadratic_entry(step=0.1) -> CorpusEntry:
    body, f = Ball([0.0, 0.0], 1.0), quadratic()
    return CorpusEntry("disk_quadratic", "x^2 + y^2 on the unit disk, smooth pipeline",
                       _success_expectations(),
                       lambda: _clean_extension(Problem(body, f, pipeline="smooth"), step),
                       body=body, field=f)


def ovaloid_pair_fio_entry(step=0.1) -> CorpusEntry:
    body, f = ovaloid_pair(), quadratic()
    return CorpusEntry("ovaloid_pair_fio", "x^2 + y^2 on two ellipses, fio pipeline, m = 3",
                       _success_expectations(),
                       lambda: _clean_extension(Problem(body, f, order=3, pipeline="fio"), step),
                       body=body, field=f)


def ovaloid_pair_strict_entry(step=0.1) -> CorpusEntry:
    body, f = ovaloid_pair(), quadratic()
    return CorpusEntry("ovaloid_pair_strict", "x^2 + y^2 (Hessian 2I) on two ellipses, strict",
                       _success_expectations(),
                       lambda: _clean_extension(Problem(body, f, order=3, pipeline="strict"),
                                                step),
                       body=body, field=f)


def singleton_jets_entry(step=0.1) -> CorpusEntry:
    body = Polytope([[0.0, 0.0]])
    fam = JetFamily.from_field(singleton_cubic(2), [[0.0, 0.0]], 12)
    fam.field = None

    def run():
        out = _clean_extension(Problem(body, jets=fam, pipeline="smooth"), step)
        out.pop("convex on the box (FD sweep)", None)
        return out

    return CorpusEntry("singleton_jets", "jets of |x|^2 + x_1^3 at C = {0}, smooth pipeline",
                       _success_expectations(fd=False), run, body=body)


def ball_quadratic_minimal_entry() -> CorpusEntry:
    def run():
        ang = np.linspace(0, 2 * pi, 4096, endpoint=False)
        Y = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        f = quadratic()
        val = minimal_convex_extension(Y, f.value(Y), f.gradient(Y), np.array([[2.0, 0.0]]))[0]
        return {"m(f) at |x| = 2": float(val)}

    return CorpusEntry("ball_quadratic_minimal", "minimal convex extension of |x|^2 off B(0,1)",
                       [Expectation("m(f) at |x| = 2", 3.0, 1e-6, "max_s 2 s |x| - s^2 = 3")],
                       run, body=Ball([0.0, 0.0], 1.0), field=quadratic())


def standard_successes() -> list:
    return [singleton_jets_entry(), disk_quadratic_entry(), ovaloid_pair_fio_entry(),
            ovaloid_pair_strict_entry(), ball_quadratic_minimal_entry()]


def all_entries() -> list:
    return [hyperbola_example(), flat_strip_example(4), cubic_1d_example(), *standard_successes()]


def entry_names() -> list:
    return ["hyperbola", "flat_strip_m4", "cubic_1d", "singleton_jets", "disk_quadratic",
            "ovaloid_pair_fio", "ovaloid_pair_strict", "ball_quadratic_minimal"]


def get_entry(name: str) -> CorpusEntry:
    for e in all_entries():
        if e.name == name:
            return e
    raise InvalidArgument(f"unknown corpus entry {name!r}; known: {entry_names()}")
