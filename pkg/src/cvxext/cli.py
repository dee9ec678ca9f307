"""Command-line front end.

Exit codes: 0 success, 2 condition fails (a witness is written), 1 error.
"""
from __future__ import annotations

import argparse
import sys
from math import factorial
from pathlib import Path

import numpy as np

from . import io
from .errors import CvxExtError, CwFailure
from .extension import base_points, build_extension
from .geometry import Polytope
from .jets import (JetFamily, check_1d_endpoint, check_cw, minimal_convex_extension,
                   whitney_defect)

GRID_CSV_HELP = """\
CSV outputs:
  grid.csv     x_1..x_n, F, min_eig   (F and the resolved FD-Hessian minimum
                                       eigenvalue at each verification grid point)
  q_profile.csv  order, t, min_Q      (sampled minimum of Q_m per t, from `check`)
  minimal.csv  x_1..x_n, m_f           (minimal convex extension at query points)
  corpus.csv   entry, check, expected, computed, ok
"""


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cvxext", description="Convex extensions from compact "
                                "convex bodies: checks, constructions and reports.",
                                epilog=GRID_CSV_HELP,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, problem_required=True):
        sp.add_argument("--problem", required=problem_required,
                        help="problem or jet file (JSON)")
        sp.add_argument("--out", default="cvxext-out", help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="random seed (default: file or 0)")

    c = sub.add_parser("check", help="sampled convexity-compatibility checks")
    common(c)
    c.add_argument("--order", type=int, action="append",
                   help="condition order (repeatable; default 2..order of the file)")
    c.add_argument("--eps", type=float, default=1e-3, help="tolerance for min Q (default 1e-3)")
    c.add_argument("--delta", type=float, default=0.1, help="radius for the Whitney defect")

    e = sub.add_parser("extend", help="build and verify a convex extension",
                       epilog=GRID_CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    common(e)
    e.add_argument("--pipeline", choices=["smooth", "finite", "fio", "strict"], default=None)
    e.add_argument("--order", type=int, default=None)
    e.add_argument("--grid-step", type=float, default=None)
    e.add_argument("--quad-res", type=int, default=None)

    k = sub.add_parser("corpus", help="run the example corpus")
    k.add_argument("--name", action="append", help="only these entries (repeatable)")
    k.add_argument("--out", default=None, help="optional directory for corpus.json/csv")

    m = sub.add_parser("minimal", help="minimal convex extension at query points")
    common(m)
    m.add_argument("--samples", type=int, default=2048, help="sampled points of C")
    return p


def _family_from(data, order=None, seed=0):
    if io.is_jet_file(data):
        fam = JetFamily.from_json(data)
        return fam, None, None
    prob = io.problem_from_json(data, seed=seed)
    if prob.field is None:
        return prob.jets, prob.body, None
    order = order or prob.order
    pts = base_points(prob.body, np.random.default_rng(prob.seed))
    return JetFamily.from_field(prob.field, pts, order), prob.body, prob.field


def cmd_check(args) -> int:
    data = io.load_json(args.problem)
    seed = args.seed if args.seed is not None else int(data.get("seed", 0))
    top = max(args.order) if args.order else None
    fam, body, f = _family_from(data, top, seed)
    orders = args.order or list(range(2, fam.order + 1))
    reports = [check_cw(fam, m, eps_test=args.eps) for m in orders]
    out = {"orders": orders, "reports": [r.to_json() for r in reports],
           "whitney_defect": {"m": max(orders), "delta": args.delta,
                              "value": whitney_defect(fam, max(orders), args.delta)}}
    if fam.n == 1 and body is not None and f is not None:
        lo, hi = float(body.vertices.min()), float(body.vertices.max())
        mo = max(orders)
        ends = {}
        for side, b in (("left", lo), ("right", hi)):
            J = f.jet(np.array([[b]]), mo).c[0]
            ders = [factorial(j) * J[j] for j in range(2, mo + 1)]
            ends[side] = {"point": b, "derivatives": ders,
                          "pass": check_1d_endpoint(ders, side)}
        out["endpoint"] = ends
    passed = all(r.passed for r in reports)
    outdir = Path(args.out)
    io.write_json(outdir / "check.json", out)
    rows = [(r.order, t, q) for r in reports for t, q in r.q_profile]
    io.write_csv(outdir / "q_profile.csv", ["order", "t", "min_Q"], rows)
    for r in reports:
        status = "pass" if r.passed else "FAIL"
        print(f"CW^{r.order}: {status}  t_eps={r.t_eps}  worst Q={r.witness['Q']:.6g}")
    if not passed:
        bad = next(r for r in reports if not r.passed)
        io.write_json(outdir / "witness.json", {"order": bad.order, "witness": bad.witness})
        print(f"witness: {bad.witness}")
        return 2
    return 0


def cmd_extend(args) -> int:
    data = io.load_json(args.problem)
    prob = io.problem_from_json(data, pipeline=args.pipeline, order=args.order,
                                step=args.grid_step, quad_res=args.quad_res, seed=args.seed)
    outdir = Path(args.out)
    try:
        res = build_extension(prob)
    except CwFailure as exc:
        io.write_json(outdir / "witness.json", {"error": str(exc), "witness": exc.witness,
                                                "report": None if exc.report is None
                                                else exc.report.to_json()})
        print(f"cw-failure: {exc}")
        print(f"witness: {exc.witness}")
        return 2
    io.write_json(outdir / "result.json", res.to_json())
    n = prob.n
    io.write_csv(outdir / "grid.csv", [f"x{i + 1}" for i in range(n)] + ["F", "min_eig"],
                 res.report.csv_rows())
    rep = res.report
    print(f"pipeline={res.pipeline} a={res.a:.6g} min_eig={rep.min_hessian_eig} "
          f"oracle_min_eig={rep.grid['oracle_min_eig']} violations={rep.midpoint_violations}")
    print("jet errors: " + ", ".join(f"{k}:{v:.3g}" for k, v in rep.jet_error.items()))
    return 0


def cmd_corpus(args) -> int:
    from . import corpus

    names = args.name or corpus.entry_names()
    entries = [corpus.get_entry(nm) for nm in names]
    rows = []
    for e in entries:
        rows += e.run()
    width = max(len(f"{r['entry']}: {r['check']}") for r in rows)
    print(f"{'entry: check'.ljust(width)}  {'expected':>14}  {'computed':>22}  ok")
    for r in rows:
        label = f"{r['entry']}: {r['check']}".ljust(width)
        print(f"{label}  {_fmt(r['expected']):>14}  {_fmt(r['computed']):>22}  "
              f"{'yes' if r['ok'] else 'NO'}")
    if args.out:
        io.write_json(Path(args.out) / "corpus.json", rows)
        io.write_csv(Path(args.out) / "corpus.csv",
                     ["entry", "check", "expected", "computed", "ok"],
                     [(r["entry"], r["check"], r["expected"], r["computed"], r["ok"])
                      for r in rows])
    return 0 if all(r["ok"] for r in rows) else 2


def _fmt(v):
    if isinstance(v, bool) or v is None:
        return str(v)
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    return str(v)


def cmd_minimal(args) -> int:
    data = io.load_json(args.problem)
    seed = args.seed if args.seed is not None else int(data.get("seed", 0))
    if io.is_jet_file(data):
        fam = JetFamily.from_json(data)
        Y, vals, grads = fam.points, fam.values(), fam.gradients()
    else:
        prob = io.problem_from_json(data, seed=seed)
        rng = np.random.default_rng(prob.seed)
        if prob.field is not None:
            body = prob.body
            if isinstance(body, Polytope) and not body.full_dimensional:
                Y = body.sample(args.samples, rng)
            else:
                Y = np.vstack([body.boundary_sample(args.samples, rng),
                               body.sample(max(args.samples // 4, 1), rng)])
            vals, grads = prob.field.value(Y), prob.field.gradient(Y)
        else:
            Y, vals, grads = prob.jets.points, prob.jets.values(), prob.jets.gradients()
    query = data.get("query")
    if query is None:
        raise CvxExtError("problem file needs a 'query' list of points for `minimal`")
    Q = np.atleast_2d(np.asarray(query, dtype=float))
    mf = minimal_convex_extension(Y, vals, grads, Q)
    outdir = Path(args.out)
    io.write_json(outdir / "minimal.json", {"query": Q, "m_f": mf, "samples": int(len(Y))})
    io.write_csv(outdir / "minimal.csv", [f"x{i + 1}" for i in range(Q.shape[1])] + ["m_f"],
                 [(*q, v) for q, v in zip(Q, mf)])
    for q, v in zip(Q, mf):
        print(f"m(f)({', '.join(f'{c:g}' for c in q)}) = {v:.12g}")
    return 0


COMMANDS = {"check": cmd_check, "extend": cmd_extend, "corpus": cmd_corpus,
            "minimal": cmd_minimal}


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return COMMANDS[args.command](args)
    except CvxExtError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
