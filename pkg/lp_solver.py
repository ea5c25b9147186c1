#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
线性规划求解器

LinearProgram: min c·x  s.t.  A_ub x <= b_ub, A_eq x = b_eq, 0 <= x <= upper.

Two backends share the LPSolver interface: an embedded dense revised simplex
(two phases, Dantzig pricing with a Bland fallback on degenerate stalls) and
HiGHS through SciPy.
"""

import re
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from codesign_utils import ConfigurationError

logger = logging.getLogger("lp_solver")

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL_FAILURE = "numerical_failure"
ITERATION_LIMIT = "iteration_limit"


def _as_csr(matrix, n: int) -> sp.csr_matrix:
    if matrix is None:
        return sp.csr_matrix((0, n))
    return sp.csr_matrix(matrix, dtype=float)


@dataclass
class LinearProgram:
    c: np.ndarray
    A_ub: Optional[sp.spmatrix] = None
    b_ub: Optional[np.ndarray] = None
    A_eq: Optional[sp.spmatrix] = None
    b_eq: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    col_names: Optional[List[str]] = None
    ub_names: Optional[List[str]] = None
    eq_names: Optional[List[str]] = None
    name: str = "lp"

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        n = self.c.shape[0]
        self.A_ub = _as_csr(self.A_ub, n)
        self.A_eq = _as_csr(self.A_eq, n)
        self.b_ub = np.asarray(self.b_ub if self.b_ub is not None else [], dtype=float)
        self.b_eq = np.asarray(self.b_eq if self.b_eq is not None else [], dtype=float)
        self.upper = (np.full(n, np.inf) if self.upper is None
                      else np.asarray(self.upper, dtype=float))

        if self.A_ub.shape != (self.b_ub.shape[0], n) or self.A_eq.shape != (self.b_eq.shape[0], n):
            raise ConfigurationError(f"{self.name}: constraint dimensions do not match {n} columns")
        if self.upper.shape != (n,) or np.any(self.upper < 0) or np.any(np.isnan(self.upper)):
            raise ConfigurationError(f"{self.name}: bad upper bounds")
        for label, arr in (("c", self.c), ("b_ub", self.b_ub), ("b_eq", self.b_eq),
                           ("A_ub", self.A_ub.data), ("A_eq", self.A_eq.data)):
            if not np.all(np.isfinite(arr)):
                raise ConfigurationError(f"{self.name}: non-finite coefficients in {label}")

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]

    @property
    def n_rows(self) -> int:
        return self.A_ub.shape[0] + self.A_eq.shape[0]

    def with_ub_row(self, coeffs: np.ndarray, rhs: float, name: str = "extra") -> "LinearProgram":
        """Copy with one more ``<=`` row."""
        row = sp.csr_matrix(np.asarray(coeffs, dtype=float).reshape(1, -1))
        return LinearProgram(self.c, sp.vstack([self.A_ub, row], format="csr"),
                             np.append(self.b_ub, rhs), self.A_eq, self.b_eq, self.upper,
                             self.col_names, (self.ub_names or [f"ub{i}" for i in range(len(self.b_ub))]) + [name],
                             self.eq_names, self.name)

    def with_objective(self, c: np.ndarray) -> "LinearProgram":
        return LinearProgram(c, self.A_ub, self.b_ub, self.A_eq, self.b_eq, self.upper,
                             self.col_names, self.ub_names, self.eq_names, self.name)

    def max_violation(self, x: np.ndarray) -> float:
        """Largest absolute violation of any row or bound at ``x``."""
        worst = 0.0
        if self.b_ub.size:
            worst = max(worst, float(np.max(self.A_ub @ x - self.b_ub, initial=0.0)))
        if self.b_eq.size:
            worst = max(worst, float(np.max(np.abs(self.A_eq @ x - self.b_eq))))
        worst = max(worst, float(np.max(-x, initial=0.0)))
        finite = np.isfinite(self.upper)
        if finite.any():
            worst = max(worst, float(np.max(x[finite] - self.upper[finite], initial=0.0)))
        return worst


@dataclass
class LPResult:
    status: str
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    iterations: int = 0
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


class LPSolver(ABC):
    name = "abstract"

    @abstractmethod
    def solve(self, lp: LinearProgram) -> LPResult:
        ...


@dataclass
class _StandardForm:
    A: np.ndarray           # m x N, rows with nonnegative rhs
    b: np.ndarray
    n: int                  # original columns
    basis: np.ndarray       # starting basis, artificial columns >= N
    n_artificial: int
    artificial_rows: np.ndarray


class DenseRevisedSimplex(LPSolver):
    """
    稠密修正单纯形法

    Explicit basis inverse with rank-one updates and periodic
    refactorization. Pricing is Dantzig's rule; after ``bland_after``
    consecutive degenerate pivots it switches to Bland's rule until a pivot
    makes progress. Leaving-row ties go to the smallest basic index, so the
    pivot sequence is deterministic.
    """

    name = "simplex"

    def __init__(self, tol: float = 1e-9, max_iter: Optional[int] = None,
                 refactor_every: int = 50, bland_after: int = 50, feasibility_tol: float = 1e-9):
        self.tol = tol
        self.max_iter = max_iter
        self.refactor_every = refactor_every
        self.bland_after = bland_after
        self.feasibility_tol = feasibility_tol

    def _standard_form(self, lp: LinearProgram) -> _StandardForm:
        n = lp.n_vars
        bounded = np.flatnonzero(np.isfinite(lp.upper))
        m_ub, m_bd, m_eq = lp.A_ub.shape[0], bounded.size, lp.A_eq.shape[0]
        m = m_ub + m_bd + m_eq
        n_slack = m_ub + m_bd
        N = n + n_slack

        A = np.zeros((m, N))
        b = np.zeros(m)
        A[:m_ub, :n] = lp.A_ub.toarray()
        b[:m_ub] = lp.b_ub
        A[m_ub:m_ub + m_bd, bounded] = np.eye(m_bd)
        b[m_ub:m_ub + m_bd] = lp.upper[bounded]
        A[m_ub + m_bd:, :n] = lp.A_eq.toarray()
        b[m_ub + m_bd:] = lp.b_eq
        A[:n_slack, n:] = np.eye(n_slack)

        negative = b < 0
        A[negative] *= -1
        b[negative] *= -1

        basis = np.empty(m, dtype=int)
        artificial_rows = []
        for i in range(m):
            if i < n_slack and not negative[i]:
                basis[i] = n + i
            else:
                basis[i] = N + len(artificial_rows)
                artificial_rows.append(i)
        return _StandardForm(A, b, n, basis, len(artificial_rows), np.array(artificial_rows, dtype=int))

    def _iterate(self, A: np.ndarray, b: np.ndarray, c: np.ndarray, basis: np.ndarray,
                 allowed: np.ndarray, budget: int):
        """Simplex iterations from a feasible basis. Returns (status, basis, x_B, iterations)."""
        m = A.shape[0]
        try:
            B_inv = np.linalg.inv(A[:, basis])
        except np.linalg.LinAlgError:
            return NUMERICAL_FAILURE, basis, None, 0
        x_B = B_inv @ b
        degenerate_run = 0
        use_bland = False

        for it in range(budget):
            if it and it % self.refactor_every == 0:
                try:
                    B_inv = np.linalg.inv(A[:, basis])
                except np.linalg.LinAlgError:
                    return NUMERICAL_FAILURE, basis, None, it
                x_B = B_inv @ b

            y = c[basis] @ B_inv
            d = c - y @ A
            candidates = allowed.copy()
            candidates[basis] = False
            improving = np.flatnonzero(candidates & (d < -self.tol))
            if improving.size == 0:
                return OPTIMAL, basis, x_B, it

            if use_bland:
                j = improving[0]
            else:
                j = improving[np.argmin(d[improving])]

            u = B_inv @ A[:, j]
            rows = np.flatnonzero(u > self.tol)
            if rows.size == 0:
                return UNBOUNDED, basis, x_B, it
            ratios = np.maximum(x_B[rows], 0.0) / u[rows]
            theta = ratios.min()
            ties = rows[ratios <= theta + 1e-12 * max(1.0, theta)]
            r = ties[np.argmin(basis[ties])]

            if theta <= self.tol:
                degenerate_run += 1
                if not use_bland and degenerate_run >= self.bland_after:
                    logger.debug(f"{degenerate_run} degenerate pivots, switching to Bland's rule")
                    use_bland = True
            else:
                degenerate_run = 0
                use_bland = False

            pivot = u[r]
            x_B = x_B - theta * u
            x_B[r] = theta
            row_r = B_inv[r] / pivot
            B_inv -= np.outer(u, row_r)
            B_inv[r] = row_r
            basis = basis.copy()
            basis[r] = j
            if m and abs(pivot) < 1e-11:
                try:
                    B_inv = np.linalg.inv(A[:, basis])
                except np.linalg.LinAlgError:
                    return NUMERICAL_FAILURE, basis, None, it + 1
                x_B = B_inv @ b
        return ITERATION_LIMIT, basis, x_B, budget

    def _drive_out_artificials(self, A: np.ndarray, b: np.ndarray, basis: np.ndarray, N: int):
        """Pivot zero-level artificials out of the basis; drop rows that are redundant."""
        keep_rows = np.ones(A.shape[0], dtype=bool)
        B_inv = np.linalg.inv(A[:, basis])
        for r in range(A.shape[0]):
            if basis[r] < N:
                continue
            row = B_inv[r] @ A[:, :N]
            row[basis[basis < N]] = 0.0
            cols = np.flatnonzero(np.abs(row) > 1e-7)
            if cols.size:
                j = cols[0]
                u = B_inv @ A[:, j]
                row_r = B_inv[r] / u[r]
                B_inv -= np.outer(u, row_r)
                B_inv[r] = row_r
                basis[r] = j
            else:
                keep_rows[r] = False
        if not keep_rows.all():
            logger.debug(f"dropping {int((~keep_rows).sum())} redundant rows")
        return A[keep_rows][:, :N], b[keep_rows], basis[keep_rows]

    def _solve_once(self, lp: LinearProgram) -> LPResult:
        form = self._standard_form(lp)
        m, N = form.A.shape
        budget = self.max_iter or 50 * (m + N + 10)
        iterations = 0
        basis = form.basis.copy()
        A, b = form.A, form.b

        if form.n_artificial:
            A1 = np.hstack([A, np.zeros((m, form.n_artificial))])
            A1[form.artificial_rows, N + np.arange(form.n_artificial)] = 1.0
            c1 = np.zeros(N + form.n_artificial)
            c1[N:] = 1.0
            status, basis, x_B, its = self._iterate(A1, b, c1, basis, np.ones(A1.shape[1], dtype=bool), budget)
            iterations += its
            if status != OPTIMAL:
                if status == UNBOUNDED:
                    status = NUMERICAL_FAILURE
                return LPResult(status, iterations=iterations, message="phase 1 did not finish")
            infeasibility = float(c1[basis] @ x_B)
            if infeasibility > self.feasibility_tol * max(1.0, float(np.max(b, initial=0.0))):
                return LPResult(INFEASIBLE, iterations=iterations,
                                message=f"phase 1 optimum {infeasibility:.3g} > 0")
            A, b, basis = self._drive_out_artificials(A1, b, basis, N)
            if np.any(basis >= N):
                return LPResult(NUMERICAL_FAILURE, iterations=iterations, message="artificial left in basis")

        c = np.zeros(N)
        c[:form.n] = lp.c
        status, basis, x_B, its = self._iterate(A, b, c, basis, np.ones(N, dtype=bool), budget - iterations)
        iterations += its
        if status != OPTIMAL:
            return LPResult(status, iterations=iterations)

        x_full = np.zeros(N)
        x_full[basis] = x_B
        x = x_full[:form.n]
        scale = max(1.0, float(np.max(np.abs(b), initial=0.0)))
        if lp.max_violation(x) > self.feasibility_tol * scale:
            # one refactorization retry
            x_full = np.zeros(N)
            x_full[basis] = np.linalg.solve(A[:, basis], b)
            x = x_full[:form.n]
            violation = lp.max_violation(x)
            if violation > self.feasibility_tol * scale:
                logger.warning(f"{lp.name}: residual {violation:.3g} after refactorization")
                return LPResult(NUMERICAL_FAILURE, iterations=iterations,
                                message=f"primal residual {violation:.3g}")
        x = np.maximum(x, 0.0)
        return LPResult(OPTIMAL, x, float(lp.c @ x), iterations)

    def solve(self, lp: LinearProgram) -> LPResult:
        try:
            result = self._solve_once(lp)
        except np.linalg.LinAlgError as e:
            result = LPResult(NUMERICAL_FAILURE, message=f"singular basis: {e}")
        logger.debug(f"{lp.name}: {result.status} after {result.iterations} iterations")
        return result


class ScipyHighsSolver(LPSolver):
    """HiGHS through scipy.optimize.linprog."""

    name = "highs"

    _STATUS = {0: OPTIMAL, 1: ITERATION_LIMIT, 2: INFEASIBLE, 3: UNBOUNDED, 4: NUMERICAL_FAILURE}

    def solve(self, lp: LinearProgram) -> LPResult:
        bounds = [(0, None if np.isinf(u) else u) for u in lp.upper]
        res = linprog(lp.c,
                      A_ub=lp.A_ub if lp.A_ub.shape[0] else None, b_ub=lp.b_ub if lp.b_ub.size else None,
                      A_eq=lp.A_eq if lp.A_eq.shape[0] else None, b_eq=lp.b_eq if lp.b_eq.size else None,
                      bounds=bounds, method="highs")
        status = self._STATUS.get(res.status, NUMERICAL_FAILURE)
        if status != OPTIMAL:
            return LPResult(status, iterations=int(getattr(res, "nit", 0)), message=res.message)
        x = np.maximum(np.asarray(res.x, dtype=float), 0.0)
        return LPResult(OPTIMAL, x, float(lp.c @ x), int(res.nit), res.message)


SOLVERS = {
    DenseRevisedSimplex.name: DenseRevisedSimplex,
    ScipyHighsSolver.name: ScipyHighsSolver,
}


def get_solver(backend: str = "simplex", **options) -> LPSolver:
    try:
        cls = SOLVERS[backend]
    except KeyError:
        raise ConfigurationError(f"unknown LP backend {backend!r}, choose from {sorted(SOLVERS)}") from None
    return cls(**options)


def solve_lp(lp: LinearProgram, backend: str = "simplex", **options) -> LPResult:
    return get_solver(backend, **options).solve(lp)


_NAME_RE = re.compile(r"[^A-Za-z0-9_.\[\]]")


def _lp_name(name: str) -> str:
    cleaned = _NAME_RE.sub("_", name)
    return cleaned if cleaned and not cleaned[0].isdigit() and cleaned[0] != "." else f"_{cleaned}"


def _terms(coeffs: Dict[int, float], names: Sequence[str]) -> str:
    if not coeffs:
        return "0 " + names[0] if names else "0"
    parts = []
    for j in sorted(coeffs):
        v = coeffs[j]
        sign = "-" if v < 0 else "+"
        parts.append(f"{sign} {abs(v):.17g} {names[j]}")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def write_lp_file(lp: LinearProgram, path: str) -> None:
    """
    导出CPLEX LP格式文件

    Args:
        lp: the program
        path: output file
    """
    names = [_lp_name(n) for n in (lp.col_names or [f"x{j}" for j in range(lp.n_vars)])]
    ub_names = [_lp_name(n) for n in (lp.ub_names or [f"ub{i}" for i in range(lp.A_ub.shape[0])])]
    eq_names = [_lp_name(n) for n in (lp.eq_names or [f"eq{i}" for i in range(lp.A_eq.shape[0])])]

    lines = [f"\\ {lp.name}", "Minimize",
             " obj: " + _terms({j: v for j, v in enumerate(lp.c) if v != 0}, names),
             "Subject To"]
    for label, A, b, sense, row_names in (("ub", lp.A_ub, lp.b_ub, "<=", ub_names),
                                          ("eq", lp.A_eq, lp.b_eq, "=", eq_names)):
        for i in range(A.shape[0]):
            start, end = A.indptr[i], A.indptr[i + 1]
            coeffs = {int(j): float(v) for j, v in zip(A.indices[start:end], A.data[start:end]) if v != 0}
            lines.append(f" {row_names[i]}: {_terms(coeffs, names)} {sense} {b[i]:.17g}")
    lines.append("Bounds")
    for j, u in enumerate(lp.upper):
        lines.append(f" 0 <= {names[j]} <= {u:.17g}" if np.isfinite(u) else f" {names[j]} >= 0")
    lines.append("End")

    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    logger.info(f"LP已导出: {path}")
