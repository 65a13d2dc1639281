"""
Sparse linear programs in the form

    min c'x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  lower <= x <= upper

with an opaque, hashable label per row and per variable so that duals can be
looked up by name after the solve.
"""

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np
import scipy.sparse as sp

from pricex.errors import ModelError


@dataclass(frozen=True, eq=False)
class LinearProgram:
    c: np.ndarray
    A_eq: sp.csr_matrix
    b_eq: np.ndarray
    A_ub: sp.csr_matrix
    b_ub: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    eq_labels: tuple
    ub_labels: tuple
    var_labels: tuple

    def __post_init__(self):
        n = len(self.c)
        for name, A, b, labels in [
            ("equality", self.A_eq, self.b_eq, self.eq_labels),
            ("inequality", self.A_ub, self.b_ub, self.ub_labels),
        ]:
            if A.shape != (len(b), n):
                raise ModelError(
                    f"{name} matrix has shape {A.shape}, expected {(len(b), n)}"
                )
            if len(labels) != len(b):
                raise ModelError(f"{len(labels)} {name} labels for {len(b)} rows")
        if len(self.lower) != n or len(self.upper) != n or len(self.var_labels) != n:
            raise ModelError("bounds and variable labels must have one entry per variable")
        if np.any(self.lower > self.upper):
            bad = int(np.argmax(self.lower > self.upper))
            raise ModelError(
                f"variable {self.var_labels[bad]!r} has lower bound "
                f"{self.lower[bad]} above upper bound {self.upper[bad]}"
            )
        if len(set(self.eq_labels)) != len(self.eq_labels) or len(set(self.ub_labels)) != len(
            self.ub_labels
        ):
            raise ModelError("row labels must be unique")

    @property
    def n_vars(self) -> int:
        return len(self.c)

    @property
    def n_eq(self) -> int:
        return len(self.b_eq)

    @property
    def n_ub(self) -> int:
        return len(self.b_ub)

    @classmethod
    def from_dense(
        cls,
        c: Sequence[float],
        A_eq=None,
        b_eq=None,
        A_ub=None,
        b_ub=None,
        bounds=None,
        eq_labels=None,
        ub_labels=None,
        var_labels=None,
    ) -> "LinearProgram":
        """Build from dense arrays; bounds default to [0, inf) for every variable."""
        c = np.asarray(c, dtype=float)
        n = len(c)

        def _rows(A, b):
            if A is None:
                return sp.csr_matrix((0, n)), np.zeros(0)
            return sp.csr_matrix(np.atleast_2d(np.asarray(A, dtype=float))), np.atleast_1d(
                np.asarray(b, dtype=float)
            )

        A_eq, b_eq = _rows(A_eq, b_eq)
        A_ub, b_ub = _rows(A_ub, b_ub)
        if bounds is None:
            bounds = [(0.0, None)] * n
        lower = np.array([-np.inf if lo is None else lo for lo, _ in bounds], dtype=float)
        upper = np.array([np.inf if hi is None else hi for _, hi in bounds], dtype=float)
        return cls(
            c=c,
            A_eq=A_eq,
            b_eq=b_eq,
            A_ub=A_ub,
            b_ub=b_ub,
            lower=lower,
            upper=upper,
            eq_labels=tuple(eq_labels) if eq_labels is not None else tuple(
                ("eq", i) for i in range(len(b_eq))
            ),
            ub_labels=tuple(ub_labels) if ub_labels is not None else tuple(
                ("ub", i) for i in range(len(b_ub))
            ),
            var_labels=tuple(var_labels) if var_labels is not None else tuple(range(n)),
        )


class LPBuilder:
    """Incremental construction of a LinearProgram from labelled pieces.

    Examples
    --------
    >>> b = LPBuilder()
    >>> g = b.add_variable("g", cost=50, upper=100)
    >>> s = b.add_variable("s", cost=3000)
    >>> b.add_eq("balance", {g: 1, s: 1}, 60)
    >>> lp = b.build()
    """

    def __init__(self):
        self._cost = []
        self._lower = []
        self._upper = []
        self._var_labels = []
        self._var_index = {}
        self._rows = {"eq": ([], [], [], [], []), "ub": ([], [], [], [], [])}

    @property
    def n_vars(self) -> int:
        return len(self._cost)

    def add_variable(
        self, label: Hashable, cost: float = 0.0, lower: float = 0.0, upper: float = np.inf
    ) -> int:
        if label in self._var_index:
            raise ModelError(f"duplicate variable label {label!r}")
        if lower > upper:
            raise ModelError(f"variable {label!r} has lower bound {lower} above {upper}")
        self._var_index[label] = len(self._cost)
        self._cost.append(float(cost))
        self._lower.append(float(lower))
        self._upper.append(float(upper))
        self._var_labels.append(label)
        return self._var_index[label]

    def index(self, label: Hashable) -> int:
        return self._var_index[label]

    def add_cost(self, var: int, cost: float):
        self._cost[var] += float(cost)

    def _add_row(self, kind, label, coefs, rhs):
        rows, cols, vals, rhs_list, labels = self._rows[kind]
        row = len(rhs_list)
        for var, coef in coefs.items():
            if not 0 <= var < self.n_vars:
                raise ModelError(f"row {label!r} references unknown variable index {var}")
            if coef != 0:
                rows.append(row)
                cols.append(var)
                vals.append(float(coef))
        rhs_list.append(float(rhs))
        labels.append(label)

    def add_eq(self, label: Hashable, coefs: dict, rhs: float):
        """Add the row sum(coef * x[var]) == rhs."""
        self._add_row("eq", label, coefs, rhs)

    def add_ub(self, label: Hashable, coefs: dict, rhs: float):
        """Add the row sum(coef * x[var]) <= rhs."""
        self._add_row("ub", label, coefs, rhs)

    def add_lb(self, label: Hashable, coefs: dict, rhs: float):
        """Add sum(coef * x[var]) >= rhs, stored as a negated <= row."""
        self._add_row("ub", label, {k: -v for k, v in coefs.items()}, -rhs)

    def _matrix(self, kind):
        rows, cols, vals, rhs, labels = self._rows[kind]
        # duplicate (row, col) entries are summed by the coo conversion
        A = sp.coo_matrix((vals, (rows, cols)), shape=(len(rhs), self.n_vars)).tocsr()
        return A, np.array(rhs, dtype=float), tuple(labels)

    def build(self) -> LinearProgram:
        A_eq, b_eq, eq_labels = self._matrix("eq")
        A_ub, b_ub, ub_labels = self._matrix("ub")
        return LinearProgram(
            c=np.array(self._cost, dtype=float),
            A_eq=A_eq,
            b_eq=b_eq,
            A_ub=A_ub,
            b_ub=b_ub,
            lower=np.array(self._lower, dtype=float),
            upper=np.array(self._upper, dtype=float),
            eq_labels=eq_labels,
            ub_labels=ub_labels,
            var_labels=tuple(self._var_labels),
        )
