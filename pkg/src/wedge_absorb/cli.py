"""Command-line interface: ``wedge-absorb <command> --model FILE``.

Exit codes: 0 ok, 1 usage, 2 regime violation, 3 regime without a closed
form, 4 verification failure, 5 Monte Carlo disagreement.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace

import numpy as np

from .absorption import (
    ExponentialSum,
    absorption_function,
    residual_suite,
)
from .config import DEFAULT
from .errors import (
    DoubleRootNotImplemented,
    NotSumOfExponentials,
    RegimeViolation,
    TooManyCensoredError,
    WedgeAbsorbError,
)
from .kernel import special_points
from .laplace import LaplaceSolution
from .mcoracle import SimConfig, estimate
from .model import classify, model_from_dict, model_to_dict

EXIT_OK, EXIT_USAGE, EXIT_REGIME, EXIT_NOT_IMPLEMENTED, EXIT_VERIFY, EXIT_ORACLE = range(6)

RESIDUAL_LIMIT = 1e-8
BVP_LIMIT = 1e-7
BVP_POINTS = (0.5, 1.0, 2.0)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _pair(text):
    try:
        a, b = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return a, b


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, help="model JSON file, or - for stdin")
    common.add_argument("--json", action="store_true", help="emit JSON instead of text/CSV")
    common.add_argument("--tol", type=float, default=DEFAULT.integer, help="integrality tolerance")
    common.add_argument("--at", type=_pair, action="append", help="evaluation point u,v (repeatable)")
    common.add_argument("--grid", type=int, default=11)
    common.add_argument("--bounds", type=_pair, default=(0.0, 1.0))
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--dt", type=float, default=1e-4)
    common.add_argument("--n", type=int, default=20000, help="Monte Carlo paths")
    common.add_argument("--check", choices=["mc"], help="append Monte Carlo comparisons at --at points")

    p = _Parser(prog="wedge-absorb", description="Absorption probabilities of reflected Brownian motion in a wedge.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in [
        ("classify", "alpha, (d, r) and transform class"),
        ("solve", "closed-form absorption probability with residual checks"),
        ("eval", "evaluate the absorption probability at --at points"),
        ("laplace", "Laplace transforms at --at points x,y"),
        ("mc", "Monte Carlo estimate at --at points"),
        ("sweep", "grid of absorption probabilities as CSV"),
        ("kernel-report", "branch points and special points of the kernel"),
    ]:
        sub.add_parser(name, parents=[common], help=help_)
    return p


# output helpers -------------------------------------------------------------


def _num(x):
    """JSON-safe float with its hex twin for bit-exact reproduction."""
    x = float(x)
    return {"value": x, "hex": x.hex()}


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False)


def _load_model(path):
    try:
        text = sys.stdin.read() if path == "-" else open(path).read()
        return model_from_dict(json.loads(text))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as err:
        raise UsageError(f"cannot read model: {err}")


def _config(args) -> dict:
    tol = replace(DEFAULT, integer=args.tol)
    return {"tolerances": tol.as_dict(), "seed": args.seed, "dt": args.dt, "n": args.n}


def _header(m, args) -> dict:
    w = m.wedge(replace(DEFAULT, integer=args.tol))
    cls = classify(w, args.tol)
    return {
        "model": {
            "quadrant": model_to_dict(m),
            "wedge": {"beta": w.beta, "theta": w.theta, "delta": w.delta, "epsilon": w.epsilon},
        },
        "alpha": _num(w.alpha),
        "class": cls.kind,
        "d": cls.d,
        "r": cls.r,
        "config": _config(args),
    }


def _points(args, default=None):
    pts = args.at or default
    if not pts:
        raise UsageError("--at is required")
    return pts


# commands -------------------------------------------------------------------


def cmd_classify(m, args, out):
    rep = _header(m, args)
    if args.json:
        out.write(_dump(rep) + "\n")
    else:
        a = rep["alpha"]["value"]
        alpha = str(round(a)) if abs(a - round(a)) < args.tol else repr(a)
        parts = [f"alpha={alpha}", f"class={rep['class']}"]
        if rep["d"] is not None:
            parts += [f"d={rep['d']}", f"r={rep['r']}"]
        out.write(", ".join(parts) + "\n")
    return EXIT_OK


def _solution_table(f):
    if isinstance(f, ExponentialSum):
        return "exponential-sum", [{"a": _num(a), "b": _num(b), "c": _num(c)} for a, b, c in f.terms]
    return "affine-exponential", [
        {"p": _num(p), "qu": _num(qu), "qv": _num(qv), "a": _num(a), "b": _num(b)} for p, qu, qv, a, b in f.terms
    ]


def _residual_check(f, m):
    pde, n1, n2 = residual_suite(f, m, np.linspace(0.0, 5.0, 11))
    if isinstance(f, ExponentialSum):
        scale = max(abs(c) * max(1.0, abs(a), abs(b)) ** 2 for a, b, c in f.terms)
    else:
        scale = max((abs(p) + abs(qu) + abs(qv)) * max(1.0, abs(a), abs(b)) ** 2 for p, qu, qv, a, b in f.terms)
    res = {"pde": _num(pde), "neumann1": _num(n1), "neumann2": _num(n2)}
    return res, max(pde, n1, n2) <= RESIDUAL_LIMIT * scale


def _mc_compare(m, f, points, args):
    rows, ok = [], True
    for u, v in points:
        cfg = SimConfig.for_model(m, (u, v), dt=args.dt, n_paths=args.n, seed=args.seed)
        est = estimate(m, (u, v), cfg)
        exact = float(f(u, v))
        agree = abs(est.p_hat - exact) <= 3 * est.std_err + 0.01
        ok &= agree
        rows.append({"at": [u, v], "closed_form": _num(exact), "mc": est.as_dict(), "agree": agree})
    return rows, ok


def _laplace_report(m, args):
    tol = replace(DEFAULT, integer=args.tol)
    sol = LaplaceSolution(m, tol=tol)
    res = float(np.max(sol.bvp_residual(np.array(BVP_POINTS))))
    rep = {
        "kind": "laplace",
        "decoupling": sol.pair.as_dict(),
        "S": {"mode": sol.S.mode, "degree": sol.S.degree, "points": list(sol.S.points), "orbit": list(sol.S.ks)},
        "gluing": {"yplus": sol.gluing.yplus, "yminus": sol.gluing.yminus, "pi_over_beta": sol.gluing.pi_over_beta},
        "residuals": {"bvp": _num(res)},
    }
    return rep, res <= BVP_LIMIT


def cmd_solve(m, args, out):
    rep = _header(m, args)
    code = EXIT_OK
    try:
        f = absorption_function(m, replace(DEFAULT, integer=args.tol))
    except NotSumOfExponentials:
        if rep["d"] is None:
            rep["status"] = "no closed form: alpha is not in Z + (pi/beta) Z"
            out.write(_dump(rep) + "\n")
            return EXIT_NOT_IMPLEMENTED
        lap, ok = _laplace_report(m, args)
        rep.update(lap)
        out.write(_dump(rep) + "\n")
        return EXIT_OK if ok else EXIT_VERIFY
    except DoubleRootNotImplemented as err:
        rep["status"] = "not-implemented"
        rep["violating_j"] = err.j
        out.write(_dump(rep) + "\n")
        return EXIT_NOT_IMPLEMENTED
    kind, table = _solution_table(f)
    rep["kind"] = kind
    rep["terms"] = table
    rep["residuals"], ok = _residual_check(f, m)
    if isinstance(f, ExponentialSum):
        L = LaplaceSolution(m, tol=replace(DEFAULT, integer=args.tol)).L
        rep["L"] = {"coeffs": L.coeffs.tolist(), "residual": _num(L.residual)}
        ok &= L.residual <= RESIDUAL_LIMIT
    if not ok:
        code = EXIT_VERIFY
    if args.check == "mc":
        rep["mc"], agree = _mc_compare(m, f, _points(args), args)
        if not agree and code == EXIT_OK:
            code = EXIT_ORACLE
    if args.json:
        out.write(_dump(rep) + "\n")
    else:
        w = csv.writer(out, lineterminator="\n")
        if kind == "exponential-sum":
            w.writerow(["k", "a", "b", "c"])
            for k, (a, b, c) in enumerate(f.terms, 1):
                w.writerow([k, repr(a), repr(b), repr(c)])
        else:
            w.writerow(["k", "p", "qu", "qv", "a", "b"])
            for k, t in enumerate(f.terms, 1):
                w.writerow([k] + [repr(x) for x in t])
        for row in rep.get("mc", []):
            est = row["mc"]
            out.write(
                f"# mc at {row['at']}: closed={row['closed_form']['value']!r} "
                f"p_hat={est['p_hat']!r} se={est['std_err']!r} agree={row['agree']}\n"
            )
    return code


def _closed_form(m, args):
    try:
        return absorption_function(m, replace(DEFAULT, integer=args.tol))
    except NotSumOfExponentials as err:
        raise NotImplementedError(f"{err}; use the laplace command") from err


def cmd_eval(m, args, out):
    f = _closed_form(m, args)
    rows = []
    for u, v in _points(args):
        if u < 0 or v < 0:
            raise UsageError("evaluation points must lie in the closed quadrant")
        rows.append({"at": [u, v], "f": _num(f(u, v))})
    if args.json:
        out.write(_dump({**_header(m, args), "values": rows}) + "\n")
    else:
        for row in rows:
            out.write(f"{row['at'][0]!r},{row['at'][1]!r},{row['f']['value']!r}\n")
    return EXIT_OK


def cmd_laplace(m, args, out):
    """Without --at: ``y, phi1(y)`` over a log grid spanning --bounds (default 1e-2..1e2)."""
    sol = LaplaceSolution(m, tol=replace(DEFAULT, integer=args.tol))
    if not args.at:
        lo, hi = args.bounds if args.bounds != (0.0, 1.0) else (1e-2, 1e2)
        if not 0 < lo <= hi or args.grid < 1:
            raise UsageError("log grid needs 0 < a <= b and --grid >= 1")
        ys = np.geomspace(lo, hi, args.grid)
        vals = [complex(v).real for v in sol.phi1(ys)]
        if args.json:
            rows = [{"y": float(y), "phi1": _num(v)} for y, v in zip(ys, vals)]
            out.write(_dump({**_header(m, args), "values": rows}) + "\n")
        else:
            out.write("y,phi1\n")
            for y, v in zip(ys, vals):
                out.write(f"{float(y)!r},{v!r}\n")
        return EXIT_OK
    rows = []
    for x, y in args.at:
        if x <= 0 or y <= 0:
            raise UsageError("Laplace variables must be positive")
        vals = {"phi1": sol.phi1(y), "phi2": sol.phi2(x), "phi": sol.phi(x, y)}
        rows.append({"at": [x, y], **{k: _num(complex(v).real) for k, v in vals.items()}})
    if args.json:
        out.write(_dump({**_header(m, args), "values": rows}) + "\n")
    else:
        out.write("x,y,phi1,phi2,phi\n")
        for row in rows:
            out.write(",".join(repr(v) for v in row["at"] + [row[k]["value"] for k in ("phi1", "phi2", "phi")]) + "\n")
    return EXIT_OK


def cmd_mc(m, args, out):
    rows = []
    for u, v in _points(args):
        cfg = SimConfig.for_model(m, (u, v), dt=args.dt, n_paths=args.n, seed=args.seed)
        rows.append({"at": [u, v], "config": dict(cfg.__dict__), **estimate(m, (u, v), cfg).as_dict()})
    if args.json:
        out.write(_dump({**_header(m, args), "estimates": rows}) + "\n")
    else:
        for row in rows:
            out.write(f"{row['at'][0]!r},{row['at'][1]!r},{row['p_hat']!r},{row['std_err']!r}\n")
    return EXIT_OK


def cmd_sweep(m, args, out):
    n = args.grid
    if n < 1:
        raise UsageError("--grid must be positive")
    lo, hi = args.bounds
    if not 0 <= lo <= hi:
        raise UsageError("--bounds must satisfy 0 <= a <= b")
    f = _closed_form(m, args)
    g = np.linspace(lo, hi, n)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["u", "v", "f"])
    clamped = 0
    for u in g:
        for v in g:
            val = float(f(u, v))
            c = min(1.0, max(0.0, val))
            clamped += c != val
            w.writerow([repr(float(u)), repr(float(v)), repr(c)])
    print(f"clamped={clamped}", file=sys.stderr)
    return EXIT_OK


def cmd_kernel_report(m, args, out):
    geom = special_points(m, replace(DEFAULT, integer=args.tol))
    rep = {**_header(m, args), "geometry": geom.as_dict()}
    if rep["d"] is not None:
        try:
            rep["decoupling"] = LaplaceSolution(m, tol=replace(DEFAULT, integer=args.tol)).pair.as_dict()
        except WedgeAbsorbError as err:
            rep["decoupling"] = {"error": str(err)}
    out.write(_dump(rep) + "\n")
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "solve": cmd_solve,
    "eval": cmd_eval,
    "laplace": cmd_laplace,
    "mc": cmd_mc,
    "sweep": cmd_sweep,
    "kernel-report": cmd_kernel_report,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        m = _load_model(args.model)
        return COMMANDS[args.command](m, args, out)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except RegimeViolation as err:
        print(f"regime violation: {err}", file=sys.stderr)
        return EXIT_REGIME
    except (DoubleRootNotImplemented, NotImplementedError) as err:
        print(f"not implemented: {err}", file=sys.stderr)
        return EXIT_NOT_IMPLEMENTED
    except TooManyCensoredError as err:
        print(f"monte carlo failed: {err}", file=sys.stderr)
        return EXIT_VERIFY
    except ValueError as err:
        print(f"invalid input: {err}", file=sys.stderr)
        return EXIT_USAGE
    except WedgeAbsorbError as err:
        print(f"verification failure: {err}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
