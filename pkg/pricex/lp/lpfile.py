"""
Plain-text dump of a LinearProgram in a CPLEX-LP-style grammar, for
cross-checking against external solvers.

    \\ comment lines start with a backslash
    Minimize
     obj: 50 x0 + 3000 x1
    Subject To
     e0: x0 + x1 = 60
     u0: x0 <= 100
    Bounds
     -inf <= x2 <= +inf
    End

Variables are written as x<k> and rows as e<k> (equalities) and u<k>
(inequalities); the original labels follow in comment lines so that the
file stays parseable by engines with restricted name syntax. Bounds are
listed only when they differ from the default [0, +inf).
"""

from pathlib import Path

import numpy as np

from pricex.lp.program import LinearProgram


def _fmt(value: float) -> str:
    if np.isposinf(value):
        return "+inf"
    if np.isneginf(value):
        return "-inf"
    return f"{value:.12g}"


def _linear(coefs, cols) -> str:
    terms = []
    for k, (col, coef) in enumerate(zip(cols, coefs)):
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = f"x{col}" if mag == 1 else f"{_fmt(mag)} x{col}"
        if k == 0:
            terms.append(f"-{body}" if sign == "-" else body)
        else:
            terms.append(f"{sign} {body}")
    return " ".join(terms) if terms else "0 x0"


def _rows(A, b, prefix, sense, labels):
    lines = []
    for i in range(A.shape[0]):
        start, stop = A.indptr[i], A.indptr[i + 1]
        lines.append(f"\\ {prefix}{i} = {labels[i]!r}")
        lines.append(
            f" {prefix}{i}: {_linear(A.data[start:stop], A.indices[start:stop])} "
            f"{sense} {_fmt(b[i])}"
        )
    return lines


def format_lp(lp: LinearProgram) -> str:
    nz = np.flatnonzero(lp.c)
    lines = [f"\\ {lp.n_vars} variables, {lp.n_eq} equalities, {lp.n_ub} inequalities"]
    for k, label in enumerate(lp.var_labels):
        lines.append(f"\\ x{k} = {label!r}")
    lines.append("Minimize")
    lines.append(f" obj: {_linear(lp.c[nz], nz)}")
    lines.append("Subject To")
    lines += _rows(lp.A_eq, lp.b_eq, "e", "=", lp.eq_labels)
    lines += _rows(lp.A_ub, lp.b_ub, "u", "<=", lp.ub_labels)
    lines.append("Bounds")
    for k in range(lp.n_vars):
        lo, hi = lp.lower[k], lp.upper[k]
        if lo == 0 and np.isposinf(hi):
            continue
        if lo == hi:
            lines.append(f" x{k} = {_fmt(lo)}")
        else:
            lines.append(f" {_fmt(lo)} <= x{k} <= {_fmt(hi)}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def write_lp(lp: LinearProgram, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_lp(lp))
    return path
