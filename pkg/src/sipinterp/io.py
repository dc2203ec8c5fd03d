"""Serialisation helpers shared by the command line.

Complex numbers are written as ``"a+bi"`` strings in CSV and as
``[re, im]`` pairs in JSON.  Floats are written with ``repr`` so that a
fixed configuration produces bit-identical files.  Indices in JSON problem
files are one-based.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
import re
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .lpspace import LpSProblem, SweepRow, hadamard_problem, tridiagonal_inverse_problem

__all__ = [
    "parse_complex",
    "format_complex",
    "to_jsonable",
    "dumps",
    "complex_scalar",
    "complex_vector",
    "complex_matrix",
    "read_matrix_csv",
    "read_vector_csv",
    "load_lp_problem",
    "lp_problem_to_json",
    "sweep_csv",
    "table_csv",
    "BUILTIN_PROBLEMS",
]

BUILTIN_PROBLEMS = {
    "hadamard-4x4": hadamard_problem,
    "tridiagonal-16": tridiagonal_inverse_problem,
}

_IMAG_UNIT = re.compile(r"[ij]$")


def parse_complex(text: str) -> complex:
    """Parse ``"a+bi"``, ``"a+bj"``, ``"bi"`` or a plain real number."""
    t = str(text).strip().replace(" ", "")
    if not t:
        raise ValueError("empty complex literal")
    if _IMAG_UNIT.search(t):
        t = t[:-1] + "j"
    try:
        return complex(t)
    except ValueError:
        raise ValueError(f"cannot parse {text!r} as a complex number") from None


def format_complex(z: complex) -> str:
    z = complex(z)
    im = z.imag
    sign = "-" if math.copysign(1.0, im) < 0 else "+"
    return f"{z.real!r}{sign}{abs(im)!r}i"


def to_jsonable(obj):
    """Recursively convert numpy values and complex numbers for ``json``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, allow_nan=True)


def complex_scalar(v) -> complex:
    """A JSON scalar: number, ``[re, im]`` pair or ``"a+bi"`` string."""
    if isinstance(v, str):
        return parse_complex(v)
    if isinstance(v, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(u, (int, float)) for u in v):
        return complex(v[0], v[1])
    raise ValueError(f"expected a number, [re, im] pair or 'a+bi' string, got {v!r}")


def _real_if_possible(A: np.ndarray) -> np.ndarray:
    return A.real.copy() if not np.any(A.imag) else A


def complex_vector(data) -> np.ndarray:
    if not isinstance(data, list):
        data = [data]
    return _real_if_possible(np.array([complex_scalar(v) for v in data], dtype=complex))


def complex_matrix(data) -> np.ndarray:
    if not isinstance(data, list) or not all(isinstance(r, list) for r in data):
        raise ValueError("a matrix must be a list of rows")
    return _real_if_possible(np.array([[complex_scalar(v) for v in r] for r in data], dtype=complex))


def read_matrix_csv(path) -> np.ndarray:
    """Row-major matrix, entries real or ``"a+bi"``."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            cells = [c for c in row if c.strip()]
            if cells:
                rows.append([parse_complex(c) for c in cells])
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise ValueError(f"{path}: expected a rectangular, non-empty matrix")
    return _real_if_possible(np.array(rows, dtype=complex))


def read_vector_csv(path) -> np.ndarray:
    """One real sample per line (the first column is used)."""
    vals = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if row and row[0].strip():
                vals.append(float(row[0]))
    if not vals:
        raise ValueError(f"{path}: no samples")
    return np.array(vals)


def load_lp_problem(source, p=None) -> LpSProblem:
    """Load ``{"S": ..., "J": [...], "s": [...], "p": ...}`` or a built-in name.

    ``"S"`` may be an inline matrix or the path of a CSV file (relative
    paths resolve against the JSON file).  ``J`` is one-based.
    """
    if isinstance(source, str) and source in BUILTIN_PROBLEMS:
        prob = BUILTIN_PROBLEMS[source]()
        return prob if p is None else prob.with_p(p)
    path = Path(source)
    with open(path) as fh:
        data = json.load(fh)
    missing = {"S", "J", "s"} - set(data)
    if missing:
        raise ValueError(f"{path}: missing keys {sorted(missing)}")
    S = data["S"]
    if isinstance(S, str):
        S = read_matrix_csv(path.parent / S)
    else:
        S = complex_matrix(S)
    J = np.asarray(data["J"], dtype=int)
    if J.ndim != 1 or np.any(J < 1):
        raise ValueError(f"{path}: J must be a list of one-based indices")
    s = complex_vector(data["s"])
    if p is None:
        p = data.get("p", 2.0)
    return LpSProblem(S, J - 1, s, p)


def lp_problem_to_json(problem: LpSProblem) -> dict:
    S = problem.S
    enc = (lambda v: [float(v.real), float(v.imag)]) if np.iscomplexobj(S) else float
    return {
        "S": [[enc(v) for v in row] for row in S],
        "J": (problem.indices + 1).tolist(),
        "s": to_jsonable(problem.values),
        "p": problem.p.p,
    }


def _cell(v) -> str:
    if isinstance(v, (complex, np.complexfloating)):
        return format_complex(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def sweep_csv(rows: Sequence[SweepRow], *, solution: bool = True, oracle: bool = False) -> str:
    """CSV with columns ``p, norm``, then optionally ``x_1 .. x_n`` and ``oracle_gap``."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n = rows[0].x_min.size if rows else 0
    header = ["p", "norm"]
    if solution:
        header += [f"x_{i + 1}" for i in range(n)]
    if oracle:
        header.append("oracle_gap")
    w.writerow(header)
    for r in rows:
        line = [_cell(float(r.p)), _cell(float(r.norm))]
        if solution:
            x = np.asarray(r.x_min)
            line += [_cell(complex(v)) if np.iscomplexobj(x) else _cell(float(v)) for v in x]
        if oracle:
            line.append("" if r.oracle_gap is None else _cell(float(r.oracle_gap)))
        w.writerow(line)
    return buf.getvalue()


def table_csv(header: Iterable[str], rows: Iterable[Sequence]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()
