"""Portfolio selection by scaled second-order stochastic dominance.

Chooses long-only weights maximizing the worst (scaled) tail difference
between portfolio and benchmark returns: for every tail size s, the sum of
the s smallest portfolio returns is compared against the sum of the s
smallest benchmark returns, irrespective of when those returns occurred. A
nonnegative optimum certifies the portfolio second-order stochastically
dominates the benchmark.

The full program has one constraint per subset of time periods, so it is
solved by cutting planes: start from the chronological-prefix subsets, solve
the relaxed master, locate for each tail size the subset of periods actually
realizing the portfolio tail, add the violated ones, repeat until clean.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lp import SOLVERS, IncrementalLp, LpError, LpProblem, _check_feasible

GROUP_EQUITIES = "equities"
GROUP_RISK_FREE = "risk_free"
GROUP_STRATEGIES = "strategies"
GROUP_CALLS = "calls"
GROUP_PUTS = "puts"
GROUP_MIXED = "mixed"

_VIOLATION_TOL = 1e-9


@dataclass(frozen=True)
class ScenarioMatrix:
    """Per-asset, per-period returns plus the asset-class partition."""

    assets: tuple[str, ...]
    returns: np.ndarray  # shape (T, n_assets)
    index_returns: np.ndarray  # shape (T,)
    equities: frozenset[str] = frozenset()
    risk_free: str | None = None
    calls: frozenset[str] = frozenset()
    puts: frozenset[str] = frozenset()
    mixed: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        t, n = self.returns.shape
        if n != len(self.assets):
            raise ValueError("returns matrix width must match asset count")
        if self.index_returns.shape != (t,):
            raise ValueError("index returns length must match period count")
        if t < 1:
            raise ValueError("need at least one period")
        if np.any(np.isnan(self.returns)) or np.any(np.isnan(self.index_returns)):
            raise ValueError("scenario returns must be complete (no NaN)")
        groups = [self.equities, {self.risk_free} if self.risk_free else set(), self.calls, self.puts, self.mixed]
        combined: set[str] = set()
        for g in groups:
            if combined & set(g):
                raise ValueError("asset classes must be disjoint")
            combined |= set(g)
        if combined != set(self.assets):
            raise ValueError("asset classes must exactly cover the assets")

    @property
    def n_periods(self) -> int:
        return self.returns.shape[0]

    @property
    def strategies(self) -> frozenset[str]:
        return self.calls | self.puts | self.mixed

    def group_members(self, group) -> tuple[str, ...]:
        if isinstance(group, str):
            named = {
                GROUP_EQUITIES: self.equities,
                GROUP_RISK_FREE: {self.risk_free} if self.risk_free else set(),
                GROUP_STRATEGIES: self.strategies,
                GROUP_CALLS: self.calls,
                GROUP_PUTS: self.puts,
                GROUP_MIXED: self.mixed,
            }
            if group not in named:
                raise ValueError(f"unknown asset group {group!r}")
            members = named[group]
        else:
            members = set(group)
            unknown = members - set(self.assets)
            if unknown:
                raise ValueError(f"group references unknown assets: {sorted(unknown)}")
        return tuple(a for a in self.assets if a in members)


@dataclass(frozen=True)
class TailTargets:
    """tau_s = (sum of the s smallest benchmark returns) / T, s = 1..T."""

    tau: np.ndarray

    def __post_init__(self) -> None:
        if len(self.tau) < 1:
            raise ValueError("empty tail targets")
        if np.any(np.diff(self.tau, 2) < -1e-12):
            raise ValueError("tail target increments must be nondecreasing")


@dataclass(frozen=True)
class GroupBound:
    """Lower/upper share of wealth allowed in an asset group."""

    group: object  # named group string or explicit asset collection
    lower: float = 0.0
    upper: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.lower <= self.upper <= 1.0):
            raise ValueError("need 0 <= lower <= upper <= 1")


@dataclass(frozen=True)
class SsdSolution:
    weights: np.ndarray
    objective: float
    tails: np.ndarray  # optimal tail-difference variables, s = 1..T
    cut_set: tuple[frozenset[int], ...]
    iterations: int
    scaled: bool


def compute_tau(index_returns: Sequence[float]) -> TailTargets:
    """Benchmark tail targets from one ascending sort."""
    values = np.sort(np.asarray(index_returns, dtype=float))
    if values.size < 1:
        raise ValueError("need at least one benchmark return")
    return TailTargets(tau=np.cumsum(values) / values.size)


def _scaling(t: int, scaled: bool) -> np.ndarray:
    return np.arange(1, t + 1) / t if scaled else np.ones(t)


def _cut_constraint(scenarios: ScenarioMatrix, tau: TailTargets, subset) -> tuple[np.ndarray, str, float]:
    """One tail row: the size-|J| tail variable is bounded by the average
    portfolio return over J minus the benchmark target."""
    t, n = scenarios.returns.shape
    s = len(subset)
    row = np.zeros(n + 1 + t)
    row[:n] = -scenarios.returns[sorted(subset)].sum(axis=0) / t
    row[n + 1 + s - 1] = 1.0
    return (row, "<=", -float(tau.tau[s - 1]))


def build_master(
    scenarios: ScenarioMatrix,
    cut_set: Sequence[frozenset[int]],
    tau: TailTargets,
    scaled: bool = True,
    bounds: Sequence[GroupBound] = (),
) -> LpProblem:
    """Relaxed tail program restricted to the given period subsets.

    Variables are the weights followed by the overall objective variable and
    the per-tail-size difference variables (both free). Every cut subset J
    bounds the tail variable of size |J| by the average portfolio return
    over J minus the benchmark target.
    """
    t, n = scenarios.returns.shape
    covered = {len(j) for j in cut_set}
    missing = set(range(1, t + 1)) - covered
    if missing:
        raise ValueError(f"cut set lacks subsets of cardinality {sorted(missing)}")
    n_vars = n + 1 + t  # w, overall, per-size tails
    v_at = n
    tails_at = n + 1
    objective = np.zeros(n_vars)
    objective[v_at] = 1.0

    constraints: list[tuple[np.ndarray, str, float]] = [
        _cut_constraint(scenarios, tau, subset) for subset in cut_set
    ]
    kappa = _scaling(t, scaled)
    for s in range(1, t + 1):
        row = np.zeros(n_vars)
        row[v_at] = kappa[s - 1]
        row[tails_at + s - 1] = -1.0
        constraints.append((row, "<=", 0.0))
    budget = np.zeros(n_vars)
    budget[:n] = 1.0
    constraints.append((budget, "=", 1.0))
    for bound in bounds:
        members = scenarios.group_members(bound.group)
        if not members:
            continue
        row = np.zeros(n_vars)
        for a in members:
            row[scenarios.assets.index(a)] = 1.0
        if bound.upper < 1.0:
            constraints.append((row, "<=", bound.upper))
        if bound.lower > 0.0:
            constraints.append((row, ">=", bound.lower))

    lower = np.zeros(n_vars)
    upper = np.full(n_vars, np.inf)
    upper[:n] = 1.0
    # the objective and tail variables are free; a safe finite floor (any
    # portfolio return is at least the worst single-asset return) lets the
    # solver shift them instead of splitting, which never binds at optimum
    floor = float(scenarios.returns.min())
    tail_floor = np.arange(1, t + 1) * floor / t - tau.tau - 1.0
    lower[tails_at:] = tail_floor
    lower[v_at] = float((tail_floor / kappa).min()) - 1.0
    return LpProblem.build(objective, constraints, lower=lower, upper=upper)


def separate(
    solution_values: np.ndarray,
    scenarios: ScenarioMatrix,
    tau: TailTargets,
    tol: float = _VIOLATION_TOL,
) -> list[frozenset[int]]:
    """Period subsets whose tail constraints the current solution violates.

    For each tail size s the candidate cut is the set of periods carrying
    the s smallest portfolio returns (ties broken by earliest period).
    """
    t, n = scenarios.returns.shape
    weights = solution_values[:n]
    tails = solution_values[n + 1 :]
    portfolio = scenarios.returns @ weights
    order = np.argsort(portfolio, kind="stable")
    sorted_returns = portfolio[order]
    prefix = np.cumsum(sorted_returns)
    cuts = []
    for s in range(1, t + 1):
        bound = prefix[s - 1] / t - tau.tau[s - 1]
        if tails[s - 1] > bound + tol:
            cuts.append(frozenset(int(i) for i in order[:s]))
    return cuts


def initial_cuts(t: int) -> tuple[frozenset[int], ...]:
    """Chronological prefixes {0}, {0,1}, ..., {0..T-1}: one per cardinality."""
    return tuple(frozenset(range(s)) for s in range(1, t + 1))


def optimize(
    scenarios: ScenarioMatrix,
    scaled: bool = True,
    bounds: Sequence[GroupBound] = (),
    solver="reference",
    lp_tol: float = 1e-8,
    max_iterations: int | None = None,
) -> SsdSolution:
    """Cutting-plane loop: solve the master, add violated tails, repeat.

    Terminates when no tail constraint of the full combinatorial family is
    violated, at which point the master optimum solves the full program.
    With the reference solver each round reoptimizes the previous basis via
    the dual simplex instead of solving the grown master from scratch.
    """
    t, n = scenarios.returns.shape
    if max_iterations is None:
        max_iterations = max(20, 10 * t)
    tau = compute_tau(scenarios.index_returns)
    cuts: list[frozenset[int]] = list(initial_cuts(t))
    seen = {frozenset(c) for c in cuts}
    iterations = 1
    incremental = solver == "reference"
    if incremental:
        state = IncrementalLp(build_master(scenarios, cuts, tau, scaled=scaled, bounds=bounds), tol=lp_tol)
        result = state.solution()
    else:
        solve_lp = SOLVERS[solver] if isinstance(solver, str) else solver
        result = solve_lp(build_master(scenarios, cuts, tau, scaled=scaled, bounds=bounds), tol=lp_tol)
    def rebuild():
        return IncrementalLp(build_master(scenarios, cuts, tau, scaled=scaled, bounds=bounds), tol=lp_tol)

    refreshed = False
    while True:
        if result.status != "optimal":
            raise RuntimeError(f"master LP is {result.status}; check group bounds")
        new = [c for c in separate(result.values, scenarios, tau) if c not in seen]
        if not new:
            if incremental and not refreshed:
                # clear tableau drift, then confirm no cut is violated
                try:
                    result = state.refine()
                except LpError:
                    state = rebuild()
                    result = state.solution()
                refreshed = True
                continue
            break
        refreshed = False
        cuts.extend(new)
        seen.update(new)
        iterations += 1
        if iterations > max_iterations:
            raise RuntimeError(f"cutting-plane loop exceeded {max_iterations} iterations")
        if incremental:
            rows = [(row, rhs) for row, _, rhs in (_cut_constraint(scenarios, tau, c) for c in new)]
            try:
                result = state.add_le_constraints(rows)
            except LpError:
                # numerical dead end in the warm tableau; cold-solve the
                # current master from pristine data and continue
                state = rebuild()
                result = state.solution()
        else:
            result = solve_lp(build_master(scenarios, cuts, tau, scaled=scaled, bounds=bounds), tol=lp_tol)
    values = result.values
    # independent guard: the reported point must satisfy the assembled master
    final_master = build_master(scenarios, cuts, tau, scaled=scaled, bounds=bounds)
    _check_feasible(final_master, values, max(lp_tol, 1e-8))
    return SsdSolution(
        weights=values[:n].copy(),
        objective=float(result.objective_value),
        tails=values[n + 1 :].copy(),
        cut_set=tuple(cuts),
        iterations=iterations,
        scaled=scaled,
    )


def full_program(
    scenarios: ScenarioMatrix,
    scaled: bool = True,
    bounds: Sequence[GroupBound] = (),
) -> LpProblem:
    """The fully enumerated program (every nonempty period subset).

    Exponential in T; only sensible for small instances, where it serves as
    a direct check on the cutting-plane route.
    """
    from itertools import combinations

    t = scenarios.n_periods
    tau = compute_tau(scenarios.index_returns)
    all_subsets = [frozenset(c) for s in range(1, t + 1) for c in combinations(range(t), s)]
    return build_master(scenarios, all_subsets, tau, scaled=scaled, bounds=bounds)


def master_variable_names(scenarios: ScenarioMatrix) -> list[str]:
    """Variable names aligned with build_master's column order (for LP dumps)."""
    t = scenarios.n_periods
    names = [f"w_{a}" for a in scenarios.assets]
    names.append("tail_min")
    names.extend(f"tail_{s}" for s in range(1, t + 1))
    return names
