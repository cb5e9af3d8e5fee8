"""Dense linear programming: a self-contained two-phase simplex solver.

The reference solver maximizes over constraints of mixed sense with general
variable bounds (free variables allowed). Pricing is fast Dantzig selection,
falling back to Bland's rule after a run of degenerate pivots so termination
is guaranteed. Intended for desk-scale problems (a few thousand rows); an
adapter to scipy's HiGHS solver is provided for anything larger and for
cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg.blas import dger

LE, EQ, GE = "<=", "=", ">="

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_PIVOT_TOL = 1e-10
_DEGENERATE_PATIENCE = 100


class LpError(RuntimeError):
    """Numerical breakdown or iteration exhaustion; never a silent wrong answer."""


def _apply_pivot(T: np.ndarray, basis: list[int], row: int, col: int) -> None:
    pivot = T[row, col]
    T[row] /= pivot
    factors = T[:, col].copy()
    factors[row] = 0.0
    # in-place rank-1 update via BLAS: T -= outer(factors, T[row]) without
    # materializing the outer product (T.T is a Fortran view of T)
    dger(-1.0, T[row].copy(), factors, a=T.T, overwrite_a=1)
    T[:, col] = 0.0
    T[row, col] = 1.0
    basis[row] = col


@dataclass(frozen=True)
class LpProblem:
    """maximize objective @ x subject to row constraints and variable bounds."""

    objective: np.ndarray
    constraints: tuple[tuple[np.ndarray, str, float], ...]
    lower: np.ndarray  # default 0; -inf marks a free-below variable
    upper: np.ndarray  # default +inf

    @classmethod
    def build(
        cls,
        objective: Sequence[float],
        constraints: Sequence[tuple[Sequence[float], str, float]],
        lower: Sequence[float] | None = None,
        upper: Sequence[float] | None = None,
    ) -> "LpProblem":
        c = np.asarray(objective, dtype=float)
        n = c.shape[0]
        rows = []
        for coeffs, rel, rhs in constraints:
            a = np.asarray(coeffs, dtype=float)
            if a.shape != (n,):
                raise ValueError(f"constraint has {a.shape[0]} coefficients, expected {n}")
            if rel not in (LE, EQ, GE):
                raise ValueError(f"unknown relation {rel!r}")
            rows.append((a, rel, float(rhs)))
        lo = np.zeros(n) if lower is None else np.asarray(lower, dtype=float)
        up = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
        if lo.shape != (n,) or up.shape != (n,):
            raise ValueError("bound vectors must match the variable count")
        if np.any(lo > up):
            raise ValueError("lower bound exceeds upper bound")
        if not np.all(np.isfinite(c)):
            raise ValueError("objective coefficients must be finite")
        return cls(objective=c, constraints=tuple(rows), lower=lo, upper=up)

    @property
    def n_variables(self) -> int:
        return self.objective.shape[0]


@dataclass(frozen=True)
class LpSolution:
    status: str
    values: np.ndarray | None
    objective_value: float


def _simplex(T: np.ndarray, basis: list[int], allowed: np.ndarray, tol: float, max_iterations: int) -> str:
    """Run primal simplex on a tableau in place; returns 'optimal' or 'unbounded'."""
    m = T.shape[0] - 1
    bland = False
    stall = 0
    for _ in range(max_iterations):
        z = T[-1, :-1]
        if bland:
            candidates = np.nonzero((z < -tol) & allowed)[0]
            if candidates.size == 0:
                return OPTIMAL
            col = int(candidates[0])
        else:
            masked = np.where(allowed, z, np.inf)
            col = int(np.argmin(masked))
            if masked[col] >= -tol:
                return OPTIMAL
        column = T[:m, col]
        positive = column > _PIVOT_TOL
        if not np.any(positive):
            return UNBOUNDED
        ratios = np.full(m, np.inf)
        rhs = np.maximum(T[:m, -1], 0.0)
        ratios[positive] = rhs[positive] / column[positive]
        best = ratios.min()
        tied = np.nonzero(ratios <= best + _PIVOT_TOL * (1.0 + abs(best)))[0]
        row = int(min(tied, key=lambda i: basis[i]))  # Bland-compatible tie break
        if best <= _PIVOT_TOL:
            stall += 1
            if stall > _DEGENERATE_PATIENCE:
                bland = True
        else:
            stall = 0
        _apply_pivot(T, basis, row, col)
    raise LpError(f"simplex iteration limit ({max_iterations}) exceeded")


def _dual_simplex(T: np.ndarray, basis: list[int], allowed: np.ndarray, tol: float, max_iterations: int) -> None:
    """Reoptimize a dual-feasible tableau with negative right-hand sides."""
    m = T.shape[0] - 1
    bland = False
    stall = 0
    for _ in range(max_iterations):
        rhs = T[:m, -1]
        if bland:
            negatives = np.nonzero(rhs < -tol)[0]
            if negatives.size == 0:
                return
            row = int(min(negatives, key=lambda i: basis[i]))
        else:
            row = int(np.argmin(rhs))
            if rhs[row] >= -tol:
                return
        line = T[row, :-1]
        eligible = (line < -_PIVOT_TOL) & allowed
        if not np.any(eligible):
            raise LpError("dual simplex found an unsatisfiable row; master should be feasible")
        z = T[-1, :-1]
        ratios = np.full(line.shape, -np.inf)
        idx = np.nonzero(eligible)[0]
        ratios[idx] = z[idx] / line[idx]
        best = ratios.max()
        tied = np.nonzero(ratios >= best - _PIVOT_TOL * (1.0 + abs(best)))[0]
        col = int(tied[0])
        if abs(z[col]) <= _PIVOT_TOL:
            stall += 1
            if stall > _DEGENERATE_PATIENCE:
                bland = True
        else:
            stall = 0
        _apply_pivot(T, basis, row, col)
    raise LpError(f"dual simplex iteration limit ({max_iterations}) exceeded")


def _reprice(T: np.ndarray, basis: list[int], cost: np.ndarray) -> None:
    m = T.shape[0] - 1
    c_b = cost[basis]
    T[-1, :-1] = c_b @ T[:m, :-1] - cost
    T[-1, -1] = c_b @ T[:m, -1]


class _Transform:
    """Variable substitution making every working variable nonnegative."""

    def __init__(self, lower: np.ndarray, upper: np.ndarray):
        n = lower.shape[0]
        self.n = n
        self.col_of: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        self.offset = np.zeros(n)
        cols = 0
        for j in range(n):
            if math.isfinite(lower[j]):
                self.offset[j] = lower[j]
                self.col_of[j] = [(cols, 1.0)]
                cols += 1
            elif math.isfinite(upper[j]):
                self.offset[j] = upper[j]
                self.col_of[j] = [(cols, -1.0)]
                cols += 1
            else:
                self.col_of[j] = [(cols, 1.0), (cols + 1, -1.0)]
                cols += 2
        self.cols = cols

    def expand(self, vec: np.ndarray) -> np.ndarray:
        out = np.zeros(self.cols)
        for j in range(self.n):
            for col, sign in self.col_of[j]:
                out[col] = sign * vec[j]
        return out

    def recover(self, y: np.ndarray) -> np.ndarray:
        x = self.offset.copy()
        for j in range(self.n):
            for col, sign in self.col_of[j]:
                x[j] += sign * y[col]
        return x


class IncrementalLp:
    """Two-phase simplex that supports appending <= rows afterwards.

    Appended rows are priced into the optimal basis and the tableau is
    reoptimized with the dual simplex, so a cutting-plane loop pays for the
    new cuts instead of re-solving each master from scratch.
    """

    def __init__(self, problem: LpProblem, tol: float = 1e-8, max_iterations: int | None = None):
        self.problem = problem
        self.tol = tol
        self.transform = _Transform(problem.lower, problem.upper)
        tr = self.transform
        cols = tr.cols

        rows_a: list[np.ndarray] = []
        rows_rel: list[str] = []
        rows_b: list[float] = []
        for coeffs, rel, rhs in problem.constraints:
            rows_a.append(tr.expand(coeffs))
            rows_rel.append(rel)
            rows_b.append(rhs - float(coeffs @ tr.offset))
        lo, up = problem.lower, problem.upper
        for j in range(tr.n):  # residual range constraints after shifting
            if math.isfinite(lo[j]) and math.isfinite(up[j]):
                row = np.zeros(cols)
                row[tr.col_of[j][0][0]] = 1.0
                rows_a.append(row)
                rows_rel.append(LE if up[j] > lo[j] else EQ)
                rows_b.append(up[j] - lo[j])

        m = len(rows_a)
        A = np.array(rows_a) if m else np.zeros((0, cols))
        b = np.array(rows_b)
        rel = list(rows_rel)
        for i in range(m):
            if b[i] < 0:
                A[i] = -A[i]
                b[i] = -b[i]
                rel[i] = {LE: GE, GE: LE, EQ: EQ}[rel[i]]

        n_slack = sum(1 for r in rel if r == LE)
        n_surplus = sum(1 for r in rel if r == GE)
        n_art = sum(1 for r in rel if r in (GE, EQ))
        total = cols + n_slack + n_surplus + n_art
        T = np.zeros((m + 1, total + 1))
        T[:m, :cols] = A
        T[:m, -1] = b
        basis: list[int] = []
        s_at, t_at, a_at = cols, cols + n_slack, cols + n_slack + n_surplus
        art_cols: list[int] = []
        for i in range(m):
            if rel[i] == LE:
                T[i, s_at] = 1.0
                basis.append(s_at)
                s_at += 1
            elif rel[i] == GE:
                T[i, t_at] = -1.0
                t_at += 1
                T[i, a_at] = 1.0
                basis.append(a_at)
                art_cols.append(a_at)
                a_at += 1
            else:
                T[i, a_at] = 1.0
                basis.append(a_at)
                art_cols.append(a_at)
                a_at += 1
        # pristine standard-form rows, kept for basis refinement
        self._raw_rows: list[np.ndarray] = [T[i, :total].copy() for i in range(m)]
        self._raw_rhs: list[float] = [float(v) for v in b]

        if max_iterations is None:
            max_iterations = max(20000, 200 * (m + total))
        self.max_iterations = max_iterations
        allowed = np.ones(total, dtype=bool)
        self.status = OPTIMAL

        if art_cols:
            cost1 = np.zeros(total)
            cost1[art_cols] = -1.0
            _reprice(T, basis, cost1)
            status = _simplex(T, basis, allowed, tol, max_iterations)
            if status != OPTIMAL:
                raise LpError("phase 1 reported unbounded; artificial objective is bounded")
            if T[-1, -1] < -tol:
                self.status = INFEASIBLE
            art_set = set(art_cols)
            for i in range(m):  # pivot surviving artificials out of the basis
                if basis[i] in art_set:
                    row = T[i, :total]
                    pivot_candidates = np.nonzero((np.abs(row) > 1e-9) & allowed)[0]
                    pivot_candidates = [c for c in pivot_candidates if c not in art_set]
                    if pivot_candidates:
                        _apply_pivot(T, basis, i, int(pivot_candidates[0]))
                    # else: redundant row, artificial stays basic at level zero
            allowed[art_cols] = False

        self.cost = np.zeros(total)
        self.cost[:cols] = tr.expand(problem.objective)
        self.T = T
        self.basis = basis
        self.allowed = allowed
        if self.status == OPTIMAL:
            _reprice(self.T, self.basis, self.cost)
            status = _simplex(self.T, self.basis, self.allowed, tol, max_iterations)
            if status == UNBOUNDED:
                self.status = UNBOUNDED

    def solution(self) -> LpSolution:
        if self.status != OPTIMAL:
            return LpSolution(status=self.status, values=None, objective_value=math.nan)
        total = self.T.shape[1] - 1
        y = np.zeros(total)
        for i, col in enumerate(self.basis):
            y[col] = self.T[i, -1]
        x = self.transform.recover(y)
        x = np.clip(x, self.problem.lower, self.problem.upper)
        return LpSolution(status=OPTIMAL, values=x, objective_value=float(self.problem.objective @ x))

    def add_le_constraints(self, constraints) -> LpSolution:
        """Append (coeffs, rhs) rows meaning coeffs @ x <= rhs, then reoptimize."""
        if self.status != OPTIMAL:
            raise LpError(f"cannot add rows to a tableau in state {self.status}")
        tr = self.transform
        k = len(constraints)
        if k == 0:
            return self.solution()
        m_old = self.T.shape[0] - 1
        total_old = self.T.shape[1] - 1
        grown = np.zeros((m_old + k + 1, total_old + k + 1))
        grown[:m_old, :total_old] = self.T[:m_old, :total_old]
        grown[:m_old, -1] = self.T[:m_old, -1]
        grown[-1, :total_old] = self.T[-1, :total_old]
        grown[-1, -1] = self.T[-1, -1]
        basis_cols = np.array(self.basis)
        for idx, (coeffs, rhs) in enumerate(constraints):
            coeffs = np.asarray(coeffs, dtype=float)
            row = np.zeros(total_old + k + 1)
            row[: tr.cols] = tr.expand(coeffs)
            row[total_old + idx] = 1.0  # fresh slack
            row[-1] = float(rhs) - float(coeffs @ tr.offset)
            self._raw_rows.append(row[:-1].copy())
            self._raw_rhs.append(float(row[-1]))
            multipliers = row[basis_cols]
            if np.any(multipliers != 0.0):
                row[: total_old] -= multipliers @ grown[:m_old, :total_old]
                row[-1] -= float(multipliers @ grown[:m_old, -1])
                row[basis_cols] = 0.0
            grown[m_old + idx] = row
            self.basis.append(total_old + idx)
        self.T = grown
        self.allowed = np.concatenate([self.allowed, np.ones(k, dtype=bool)])
        self.cost = np.concatenate([self.cost, np.zeros(k)])
        _dual_simplex(self.T, self.basis, self.allowed, self.tol, self.max_iterations)
        return self.solution()

    def _exact_basic_values(self) -> np.ndarray:
        m = self.T.shape[0] - 1
        total = self.T.shape[1] - 1
        matrix = np.zeros((m, total))
        for i, row in enumerate(self._raw_rows):
            matrix[i, : row.shape[0]] = row
        try:
            return np.linalg.solve(matrix[:, self.basis], np.array(self._raw_rhs))
        except np.linalg.LinAlgError as err:
            raise LpError(f"basis refinement failed: {err}") from None

    def refine(self) -> LpSolution:
        """Re-solve the current basis against the pristine row data.

        Long pivot sequences accumulate floating-point drift in the tableau.
        A direct linear solve of the basis matrix restores the basic values
        to machine precision; if the exact values expose infeasibility the
        drifted tableau had hidden, the dual simplex resumes from the
        refreshed right-hand sides until the basis is genuinely feasible.
        """
        if self.status != OPTIMAL:
            return self.solution()
        m = self.T.shape[0] - 1
        total = self.T.shape[1] - 1
        for _ in range(20):
            basic_values = self._exact_basic_values()
            self.T[:m, -1] = basic_values
            y = np.zeros(total)
            y[self.basis] = basic_values
            self.T[-1, -1] = float(self.cost @ y)
            if float(basic_values.min(initial=0.0)) >= -self.tol:
                break
            _dual_simplex(self.T, self.basis, self.allowed, self.tol, self.max_iterations)
        else:
            raise LpError("basis refinement did not reach a feasible basis")
        x = self.transform.recover(y)
        x = np.clip(x, self.problem.lower, self.problem.upper)
        return LpSolution(status=OPTIMAL, values=x, objective_value=float(self.problem.objective @ x))


def solve(problem: LpProblem, tol: float = 1e-8, max_iterations: int | None = None) -> LpSolution:
    """Two-phase simplex. Raises LpError on numerical breakdown."""
    state = IncrementalLp(problem, tol=tol, max_iterations=max_iterations)
    result = state.solution()
    if result.status == OPTIMAL:
        _check_feasible(problem, result.values, tol)
    return result


def _check_feasible(problem: LpProblem, x: np.ndarray, tol: float) -> None:
    slack_tol = max(tol, 1e-8)
    for k, (coeffs, rel, rhs) in enumerate(problem.constraints):
        lhs = float(coeffs @ x)
        scale = slack_tol * (1.0 + abs(rhs))
        ok = (
            (rel == LE and lhs <= rhs + scale)
            or (rel == GE and lhs >= rhs - scale)
            or (rel == EQ and abs(lhs - rhs) <= scale)
        )
        if not ok:
            raise LpError(f"solution violates constraint {k}: {lhs} {rel} {rhs}")
    if np.any(x < problem.lower - slack_tol) or np.any(x > problem.upper + slack_tol):
        raise LpError("solution violates variable bounds")


def solve_with_scipy(problem: LpProblem, tol: float = 1e-8) -> LpSolution:
    """Adapter to scipy's HiGHS backend behind the same problem interface."""
    from scipy.optimize import linprog

    n = problem.n_variables
    a_ub: list[np.ndarray] = []
    b_ub: list[float] = []
    a_eq: list[np.ndarray] = []
    b_eq: list[float] = []
    for coeffs, rel, rhs in problem.constraints:
        if rel == LE:
            a_ub.append(coeffs)
            b_ub.append(rhs)
        elif rel == GE:
            a_ub.append(-coeffs)
            b_ub.append(-rhs)
        else:
            a_eq.append(coeffs)
            b_eq.append(rhs)
    bounds = [
        (None if math.isinf(problem.lower[j]) else problem.lower[j], None if math.isinf(problem.upper[j]) else problem.upper[j])
        for j in range(n)
    ]
    res = linprog(
        c=-problem.objective,
        A_ub=np.array(a_ub) if a_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(a_eq) if a_eq else None,
        b_eq=np.array(b_eq) if b_eq else None,
        bounds=bounds,
        method="highs",
    )
    if res.status == 2:
        return LpSolution(status=INFEASIBLE, values=None, objective_value=math.nan)
    if res.status == 3:
        return LpSolution(status=UNBOUNDED, values=None, objective_value=math.nan)
    if res.status != 0:
        raise LpError(f"scipy linprog failed: {res.message}")
    x = np.asarray(res.x, dtype=float)
    _check_feasible(problem, x, max(tol, 1e-7))
    return LpSolution(status=OPTIMAL, values=x, objective_value=float(problem.objective @ x))


SOLVERS = {"reference": solve, "scipy": solve_with_scipy}


def to_lp_text(problem: LpProblem, var_names: Sequence[str] | None = None, name: str = "problem") -> str:
    """Render in the standard CPLEX-style LP text format for external solvers."""
    n = problem.n_variables
    names = list(var_names) if var_names is not None else [f"x{j}" for j in range(n)]
    if len(names) != n:
        raise ValueError("need one name per variable")

    def terms(coeffs: np.ndarray) -> str:
        parts = []
        for j, v in enumerate(coeffs):
            if v == 0:
                continue
            sign = "-" if v < 0 else "+"
            parts.append(f"{sign} {abs(v):.12g} {names[j]}")
        if not parts:
            return f"0 {names[0]}"
        joined = " ".join(parts)
        return joined[2:] if joined.startswith("+ ") else joined

    lines = [f"\\ {name}", "Maximize", f" obj: {terms(problem.objective)}", "Subject To"]
    for k, (coeffs, rel, rhs) in enumerate(problem.constraints):
        op = {LE: "<=", GE: ">=", EQ: "="}[rel]
        lines.append(f" c{k}: {terms(coeffs)} {op} {rhs:.12g}")
    bound_lines = []
    for j in range(n):
        lo, up = problem.lower[j], problem.upper[j]
        if lo == 0 and math.isinf(up):
            continue
        if math.isinf(lo) and math.isinf(up):
            bound_lines.append(f" {names[j]} free")
        elif math.isinf(lo):
            bound_lines.append(f" -infinity <= {names[j]} <= {up:.12g}")
        elif math.isinf(up):
            bound_lines.append(f" {names[j]} >= {lo:.12g}")
        else:
            bound_lines.append(f" {lo:.12g} <= {names[j]} <= {up:.12g}")
    if bound_lines:
        lines.append("Bounds")
        lines.extend(bound_lines)
    lines.append("End")
    return "\n".join(lines) + "\n"
