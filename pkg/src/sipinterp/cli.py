"""Command-line interface: ``sipinterp <command> [options]``.

Complex numbers are accepted as ``a+bi`` (or ``a+bj``) on the command line
and in CSV files, and as ``[re, im]`` pairs in JSON.  Output is JSON unless
``--format csv`` is given (``sweep-p`` defaults to CSV).

Exit status: 0 success, 1 input error, 2 solver non-convergence or oracle
gap above tolerance, 3 certificate failure.  The log level is read from
``SIP_INTERP_LOG`` (error, warn, info, debug).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import hardy, kernels, lift, lpspace, tde
from . import io as sio
from ._numerics import ConvergenceError
from .sip import IllConditionedError

logger = logging.getLogger("sipinterp")

EXIT_OK, EXIT_INPUT, EXIT_CONVERGENCE, EXIT_CERTIFICATE = 0, 1, 2, 3

LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}

# relative oracle tolerances used when --oracle-tol is not given
DEFAULT_ORACLE_TOL = {
    "interp-single": 1e-6,
    "interp-hardy": 1e-3,
    "lp-min": 1e-6,
    "even-p": 1e-6,
    "tde": 1e-6,
    "sweep-p": 1e-6,
}

COMPLEX_HELP = "complex values are written a+bi on the command line and in CSV, [re, im] in JSON"


class InputError(ValueError):
    pass


class OracleGapError(RuntimeError):
    pass


# --------------------------------------------------------------- parsing

def _complex_list(text: str) -> np.ndarray:
    return np.array([sio.parse_complex(t) for t in text.split(",") if t.strip()], dtype=complex)


def _points(text: str, n: int) -> np.ndarray:
    """``n = 1``: comma-separated nodes.  ``n > 1``: points separated by ``;``,
    coordinates by ``,``."""
    if n == 1:
        return _complex_list(text).reshape(-1, 1)
    pts = [_complex_list(chunk) for chunk in text.split(";") if chunk.strip()]
    if not pts or any(p.size != n for p in pts):
        raise InputError(f"each point needs {n} comma-separated coordinates")
    return np.array(pts)


def _space(args) -> kernels.SpaceDescriptor:
    return kernels.SpaceDescriptor(args.space, args.n, args.p, args.alpha)


def _p_grid(pmin: float, pmax: float, points: int, spacing: str) -> np.ndarray:
    if points < 1 or pmin <= 1 or pmax < pmin:
        raise InputError("need 1 < pmin <= pmax and points >= 1")
    if points == 1:
        return np.array([pmin])
    if spacing == "log":
        return np.geomspace(pmin, pmax, points)
    return np.linspace(pmin, pmax, points)


def _relative_gap(a: float, b: float, floor: float = 1e-300) -> float:
    return abs(a - b) / max(abs(b), floor)


def _check_gap(gap: float, args, what: str):
    tol = args.oracle_tol if args.oracle_tol is not None else DEFAULT_ORACLE_TOL[args.command]
    if not gap <= tol:
        raise OracleGapError(f"{what} oracle gap {gap:.3e} exceeds tolerance {tol:.1e}")


# -------------------------------------------------------------- commands

def cmd_interp_single(args) -> dict:
    space = _space(args)
    node = _points(args.node, space.n)
    if node.shape[0] != 1:
        raise InputError("interp-single takes exactly one node")
    w0 = sio.parse_complex(args.value)
    z0 = node[0] if space.n > 1 else node[0, 0]
    f = kernels.single_point_interpolant(space, z0, w0)
    out = {
        "space": space.family.value,
        "n": space.n,
        "p": space.p.p,
        "node": z0,
        "value": w0,
        "norm": f.norm,
        "exponent_of_kernel_ratio": f.exponent_of_kernel_ratio,
    }
    if args.oracle:
        qnorm = kernels.quadrature_norm(f, seed=args.seed)
        out["oracle_norm"] = qnorm
        out["oracle_gap"] = _relative_gap(f.norm, qnorm)
    return out


def _hardy_problem(args) -> hardy.HardyProblem:
    if args.problem:
        with open(args.problem) as fh:
            data = json.load(fh)
        nodes, values = sio.complex_vector(data["nodes"]), sio.complex_vector(data["values"])
        p = args.p if args.p is not None else data.get("p", 2.0)
    else:
        if args.nodes is None or args.values is None:
            raise InputError("give --problem or both --nodes and --values")
        nodes, values, p = _complex_list(args.nodes), _complex_list(args.values), args.p
    return hardy.HardyProblem(nodes, values, 2.0 if p is None else p)


def _hardy_dict(rep: hardy.SolverReport) -> dict:
    rp = rep.solution
    return {
        "p": rep.p,
        "norm": rep.norm,
        "d": rp.d,
        "blaschke_zeros": rp.blaschke_zeros,
        "branch": rp.branch,
        "residuals": rep.residuals,
        "certificate": rep.certificate,
        "boundary_modulus_deviation": rep.boundary_modulus,
        "iterations": rep.iterations,
        "warnings": rep.warnings,
    }


def cmd_interp_hardy(args) -> dict:
    prob = _hardy_problem(args)
    rep = hardy.solve(prob, tol=args.tol, grid=args.grid)
    out = {"nodes": prob.nodes, "values": prob.values, **_hardy_dict(rep)}
    if args.oracle:
        onorm, _ = hardy.truncated_oracle(prob)
        out["oracle_norm"] = onorm
        out["oracle_gap"] = _relative_gap(rep.norm, onorm)
    return out


def _lp_problem(args) -> lpspace.LpSProblem:
    if args.problem:
        return sio.load_lp_problem(args.problem, args.p)
    if args.S is None or args.J is None or args.s is None:
        raise InputError("give --problem or all of --S, --J and --s")
    S = sio.read_matrix_csv(args.S)
    J = np.array([int(t) for t in args.J.split(",") if t.strip()]) - 1
    s = _complex_list(args.s)
    if not np.any(s.imag):
        s = s.real
    return lpspace.LpSProblem(S, J, s, 2.0 if args.p is None else args.p)


def _lp_dict(rep: lpspace.LpSReport) -> dict:
    return {
        "p": rep.p,
        "norm": rep.norm,
        "x_min": rep.x_min,
        "c": rep.c,
        "residuals": rep.residuals,
        "certificate": rep.certificate,
        "iterations": rep.iterations,
        "method": rep.method,
        "warnings": rep.warnings,
    }


def cmd_lp_min(args) -> dict:
    prob = _lp_problem(args)
    rep = lpspace.solve(prob, tol=args.tol, oracle=args.oracle)
    out = _lp_dict(rep)
    if args.oracle:
        out["oracle_gap"] = rep.oracle_gap / max(rep.norm, 1e-300)
    if rep.certificate > args.certificate_tol:
        raise hardy.CertificationError(
            f"orthogonality residual {rep.certificate:.3e} exceeds {args.certificate_tol:.0e}", out
        )
    return out


def cmd_even_p(args) -> dict:
    space = _space(args).with_p(2.0)
    nodes = _points(args.nodes, space.n)
    values = _complex_list(args.values)
    f, cert, g = lift.lift_problem(space, nodes, values, args.p, sheet=args.sheet)
    out = {
        "space": space.family.value,
        "p": args.p,
        "g_coefficients": g.coefficients,
        "g_norm": g.norm,
        "gram_residual": g.residual,
        "zero_free": cert.zero_free,
        "branch_consistent": cert.branch_consistent,
        "certificate_method": cert.method,
        "min_modulus_bound": cert.min_modulus_bound,
        "node_error": cert.node_error,
        "sheet": args.sheet,
    }
    if cert.bound is not None:
        out["dominant_term"] = {"index": cert.bound.index, "lhs": cert.bound.lhs, "rhs": cert.bound.rhs}
    if cert.zeros is not None:
        out["g_zeros"] = cert.zeros
    if not cert.ok:
        raise lift.LiftCertificateError("even-p lift not certified", out)
    if args.oracle:
        if space.family is not kernels.Family.HARDY_DISK:
            raise InputError("--oracle for even-p compares with the general solver, hardy-disk only")
        chk = lift.cross_check_hardy(hardy.HardyProblem(nodes[:, 0], values, args.p), sheet=args.sheet)
        out["solver_norm"] = chk.solver_norm
        out["lift_norm"] = chk.lift_norm
        out["max_deviation"] = chk.max_deviation
        out["oracle_gap"] = chk.max_deviation
    return out


def _tde_problem(args) -> tde.TdeProblem:
    if args.synthetic:
        x1, x2 = tde.synthetic_signals(args.N, args.D, args.beta, args.noise, args.seed)
    else:
        if args.x1 is None or args.x2 is None:
            raise InputError("give --synthetic or both --x1 and --x2 signal files")
        x1, x2 = sio.read_vector_csv(args.x1), sio.read_vector_csv(args.x2)
    return tde.TdeProblem(x1, x2, args.M, args.beta, args.p)


def cmd_tde(args) -> dict:
    prob = _tde_problem(args)
    res = tde.estimate(prob)
    out = {
        "D_opt": res.D_opt,
        "h_opt": res.h_opt,
        "objective": res.objective,
        "rank": res.rank,
        "argmax_index": int(np.argmax(np.abs(res.h_opt))) - prob.M,
        "factor_residual": res.factor_residual,
    }
    if res.lp_report is not None:
        out["certificate"] = res.lp_report.certificate
    if args.oracle:
        _, direct = tde.direct_objective_minimum(prob)
        out["oracle_objective"] = direct
        # exact fits have objective ~0, so measure against the data scale too
        floor = 1e-12 * float(np.sum(np.abs(prob.x2) ** prob.p.p))
        out["oracle_gap"] = _relative_gap(res.objective, direct, floor)
    return out


def cmd_sweep_p(args):
    ps = _p_grid(args.pmin, args.pmax, args.points, args.spacing)
    is_hardy = False
    if args.problem not in sio.BUILTIN_PROBLEMS:
        with open(args.problem) as fh:
            is_hardy = "nodes" in json.load(fh)
    if is_hardy:
        args.p = None
        prob = _hardy_problem(args)
        reports = hardy.p_sweep(prob.nodes, prob.values, ps, tol=args.tol)
        header = ["p", "norm", "certificate"]
        if not args.no_solution:
            header += [f"d_{j + 1}" for j in range(prob.nodes.size)]
        rows = []
        for rep in reports:
            row = [rep.p, rep.norm, rep.certificate]
            if not args.no_solution:
                row += list(rep.solution.d)
            if args.oracle:
                onorm, _ = hardy.truncated_oracle(hardy.HardyProblem(prob.nodes, prob.values, rep.p))
                row.append(_relative_gap(rep.norm, onorm))
            rows.append(row)
        if args.oracle:
            header.append("oracle_gap")
        table = {"header": header, "rows": rows, "warnings": [w for r in reports for w in r.warnings]}
        gaps = [r[-1] for r in rows] if args.oracle else []
    else:
        prob = sio.load_lp_problem(args.problem)
        srows, warns = lpspace.p_sweep(prob, ps, jobs=args.jobs, tol=args.tol, oracle=args.oracle)
        for r in srows:
            if r.oracle_gap is not None:
                r.oracle_gap = r.oracle_gap / max(r.norm, 1e-300)
        table = {"sweep": srows, "warnings": warns}
        gaps = [r.oracle_gap for r in srows] if args.oracle else []
    return table, gaps


# ---------------------------------------------------------------- output

def _flatten(out: dict) -> List[list]:
    rows = []
    for k, v in out.items():
        if isinstance(v, dict):
            rows += [[f"{k}.{a}", b] for a, b in v.items()]
        elif isinstance(v, (list, tuple, np.ndarray)):
            arr = list(np.ravel(np.asarray(v, dtype=object)))
            rows += [[f"{k}_{i + 1}", b] for i, b in enumerate(arr)]
        else:
            rows.append([k, v])
    return rows


def _render(args, result) -> str:
    fmt = args.format or ("csv" if args.command == "sweep-p" else "json")
    if args.command == "sweep-p":
        if "sweep" in result:
            if fmt == "csv":
                return sio.sweep_csv(result["sweep"], solution=not args.no_solution, oracle=args.oracle)
            rows = result["sweep"]
            return sio.dumps({
                "p": [r.p for r in rows],
                "norm": [r.norm for r in rows],
                **({} if args.no_solution else {"x_min": [r.x_min for r in rows]}),
                "certificate": [r.certificate for r in rows],
                **({"oracle_gap": [r.oracle_gap for r in rows]} if args.oracle else {}),
                "warnings": result["warnings"],
            }) + "\n"
        if fmt == "csv":
            return sio.table_csv(result["header"], result["rows"])
        return sio.dumps({h: [r[i] for r in result["rows"]] for i, h in enumerate(result["header"])}) + "\n"
    if fmt == "csv":
        return sio.table_csv(["field", "value"], _flatten(result))
    return sio.dumps(result) + "\n"


def _emit(args, text: str):
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sipinterp",
        description="Minimal-norm interpolation in L^p-type spaces.",
        epilog=COMPLEX_HELP + ". Exit status: 0 ok, 1 input error, 2 non-convergence, 3 certificate failure.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write the result here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), help="output format")
    common.add_argument("--oracle", action="store_true", help="cross-check against an independent oracle")
    common.add_argument("--oracle-tol", type=float, help="relative oracle gap that fails the run (exit 2)")
    common.add_argument("--seed", type=int, default=0, help="seed for synthetic data and QMC (default 0)")
    common.add_argument("--tol", type=float, default=1e-10, help="solver residual tolerance")
    sub = parser.add_subparsers(dest="command", required=True)

    def space_opts(sp):
        sp.add_argument("--space", required=True, choices=[f.value for f in kernels.Family])
        sp.add_argument("--n", type=int, default=1, help="number of complex variables")
        sp.add_argument("--alpha", type=float, help="weight exponent for weighted families")

    sp = sub.add_parser("interp-single", parents=[common], help="closed-form single-point interpolant",
                        epilog=COMPLEX_HELP)
    space_opts(sp)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--node", required=True, help="node; for n > 1 comma-separated coordinates")
    sp.add_argument("--value", required=True)
    sp.set_defaults(handler=cmd_interp_single)

    sp = sub.add_parser("interp-hardy", parents=[common], help="multi-point interpolation in H^p of the disk",
                        epilog=COMPLEX_HELP)
    sp.add_argument("--problem", help='JSON file {"nodes": [...], "values": [...], "p": ...}')
    sp.add_argument("--nodes", help="comma-separated nodes")
    sp.add_argument("--values", help="comma-separated target values")
    sp.add_argument("--p", type=float)
    sp.add_argument("--grid", type=int, default=4096, help="boundary quadrature points")
    sp.set_defaults(handler=cmd_interp_hardy)

    sp = sub.add_parser("lp-min", parents=[common], help="minimal-norm interpolation in l^p_S",
                        epilog=COMPLEX_HELP + ". Built-in problems: " + ", ".join(sio.BUILTIN_PROBLEMS))
    sp.add_argument("--problem", help='JSON file {"S": [[...]], "J": [1, 2], "s": [...], "p": ...} or a built-in name')
    sp.add_argument("--S", help="CSV matrix (row-major)")
    sp.add_argument("--J", help="comma-separated one-based constrained indices")
    sp.add_argument("--s", help="comma-separated target values")
    sp.add_argument("--p", type=float)
    sp.add_argument("--certificate-tol", type=float, default=1e-6)
    sp.set_defaults(handler=cmd_lp_min)

    sp = sub.add_parser("even-p", parents=[common], help="even-exponent lift of the p = 2 interpolant",
                        epilog=COMPLEX_HELP + ". For n > 1 separate points with ';'.")
    space_opts(sp)
    sp.add_argument("--p", type=int, required=True, help="even integer exponent")
    sp.add_argument("--nodes", required=True)
    sp.add_argument("--values", required=True)
    sp.add_argument("--sheet", type=int, default=0, help="branch override for log g")
    sp.set_defaults(handler=cmd_even_p)

    sp = sub.add_parser("tde", parents=[common], help="time-delay estimation")
    sp.add_argument("--synthetic", action="store_true", help="generate signals from --seed, --N, --D, --noise")
    sp.add_argument("--x1", help="CSV of reference samples, one per line")
    sp.add_argument("--x2", help="CSV of delayed samples, one per line")
    sp.add_argument("--N", type=int, default=2001)
    sp.add_argument("--D", type=int, default=5)
    sp.add_argument("--M", type=int, default=10)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--noise", type=float, default=0.0, help="impulsive noise amplitude")
    sp.add_argument("--p", type=float, default=2.0)
    sp.set_defaults(handler=cmd_tde)

    sp = sub.add_parser("sweep-p", parents=[common], help="norm of the minimal interpolant across p",
                        epilog="Problems: an l^p_S JSON file, a built-in name ("
                        + ", ".join(sio.BUILTIN_PROBLEMS) + ") or a Hardy JSON file with 'nodes'.")
    sp.add_argument("--problem", required=True)
    sp.add_argument("--pmin", type=float, required=True)
    sp.add_argument("--pmax", type=float, required=True)
    sp.add_argument("--points", type=int, default=60)
    sp.add_argument("--spacing", choices=("log", "linear"), default="log")
    sp.add_argument("--jobs", type=int, default=1, help="worker threads (l^p_S sweeps)")
    sp.add_argument("--no-solution", action="store_true", help="omit the per-p solution columns")
    sp.set_defaults(handler=cmd_sweep_p)
    return parser


def _configure_logging():
    raw = os.environ.get("SIP_INTERP_LOG", "warn").strip().lower()
    level = LOG_LEVELS.get(raw)
    logging.basicConfig(level=level or logging.WARNING, format="sipinterp: %(levelname)s: %(message)s")
    if level is None:
        logger.warning("unknown SIP_INTERP_LOG value %r, using warn", raw)


def main(argv: Optional[List[str]] = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    status = EXIT_OK
    try:
        if args.command == "sweep-p":
            result, gaps = args.handler(args)
            _emit(args, _render(args, result))
            for g in gaps:
                _check_gap(g, args, "sweep")
            return EXIT_OK
        try:
            result = args.handler(args)
        except (hardy.CertificationError, lift.LiftCertificateError) as exc:
            payload = getattr(exc, "report", None) or getattr(exc, "certificate", None)
            if isinstance(payload, dict):
                _emit(args, _render(args, payload))
            elif isinstance(payload, hardy.SolverReport):
                _emit(args, _render(args, _hardy_dict(payload)))
            print(f"sipinterp: certificate failure: {exc}", file=sys.stderr)
            return EXIT_CERTIFICATE
        _emit(args, _render(args, result))
        if args.oracle and "oracle_gap" in result:
            _check_gap(result["oracle_gap"], args, args.command)
    except OracleGapError as exc:
        print(f"sipinterp: {exc}", file=sys.stderr)
        status = EXIT_CONVERGENCE
    except (ConvergenceError, hardy.BranchTrackingError) as exc:
        print(f"sipinterp: solver did not converge: {exc}", file=sys.stderr)
        status = EXIT_CONVERGENCE
    except (hardy.CertificationError, lift.LiftCertificateError) as exc:
        print(f"sipinterp: certificate failure: {exc}", file=sys.stderr)
        status = EXIT_CERTIFICATE
    except (InputError, ValueError, KeyError, OSError, IllConditionedError, lift.GramError) as exc:
        msg = f"missing key {exc}" if isinstance(exc, KeyError) else str(exc)
        print(f"sipinterp: input error: {msg}", file=sys.stderr)
        status = EXIT_INPUT
    return status


if __name__ == "__main__":
    sys.exit(main())
