"""Out-of-sample performance statistics for daily value/return series.

All ratios annualize with 252 trading days. Sample (ddof=1) standard
deviations throughout. CVaR and MDD are reported as positive percentages
(higher = worse); the Sortino downside target is the same risk-free rate
used in the numerator.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TRADING_DAYS_PER_YEAR = 252


@dataclass(frozen=True)
class PerfReport:
    """The seven summary statistics for one return series."""

    fv: float
    cagr: float
    sharpe: float | None
    sortino: float | None
    cvar5: float
    vol: float
    mdd: float

    def row(self) -> list[str]:
        def fmt(x: float | None) -> str:
            return "nan" if x is None else f"{x:.10g}"

        return [fmt(self.fv), fmt(self.cagr), fmt(self.sharpe), fmt(self.sortino), fmt(self.cvar5), fmt(self.vol), fmt(self.mdd)]


def _as_values(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("empty value series")
    if np.any(arr <= 0) or np.any(np.isnan(arr)):
        raise ValueError("value series must be positive")
    return arr


def fv(values) -> float:
    """Final value per unit of starting wealth: Q_T / Q_0."""
    arr = _as_values(values)
    return float(arr[-1] / arr[0])


def cagr(values) -> float:
    """Compound annual growth rate in percent, with years = periods / 252."""
    arr = _as_values(values)
    periods = arr.size - 1
    if periods == 0:
        return 0.0
    years = periods / TRADING_DAYS_PER_YEAR
    return 100.0 * (float(arr[-1] / arr[0]) ** (1.0 / years) - 1.0)


def _excess(returns, rf_daily) -> np.ndarray:
    r = np.asarray(returns, dtype=float)
    if r.size < 2:
        raise ValueError("need at least two returns")
    rf = np.asarray(rf_daily, dtype=float)
    if rf.ndim == 0:
        rf = np.full_like(r, float(rf))
    if rf.shape != r.shape:
        raise ValueError("risk-free series must match returns length")
    return r - rf


def sharpe(returns, rf_daily=0.0) -> float | None:
    """Annualized Sharpe ratio of excess returns; None when flat."""
    excess = _excess(returns, rf_daily)
    spread = float(np.std(excess, ddof=1))
    if spread == 0.0:
        return None
    return float(np.mean(excess)) / spread * math.sqrt(TRADING_DAYS_PER_YEAR)


def sortino(returns, rf_daily=0.0) -> float | None:
    """Annualized Sortino ratio; downside deviation is the root-mean-square
    of negative excess returns. None when there is no downside."""
    excess = _excess(returns, rf_daily)
    downside = np.minimum(excess, 0.0)
    dd = math.sqrt(float(np.mean(downside**2)))
    if dd == 0.0:
        return None
    return float(np.mean(excess)) / dd * math.sqrt(TRADING_DAYS_PER_YEAR)


def cvar(returns, level: float = 0.05) -> float:
    """Conditional value-at-risk in percent: mean loss over the worst
    ceil(level * N) daily returns (positive = loss)."""
    r = np.asarray(returns, dtype=float)
    if r.size == 0:
        raise ValueError("empty return series")
    if not 0.0 < level <= 1.0:
        raise ValueError("level must be in (0, 1]")
    k = math.ceil(level * r.size)
    worst = np.sort(r)[:k]
    return -100.0 * float(np.mean(worst))


def vol(returns) -> float:
    """Annualized percent volatility (sample standard deviation)."""
    r = np.asarray(returns, dtype=float)
    if r.size < 2:
        raise ValueError("need at least two returns")
    return 100.0 * float(np.std(r, ddof=1)) * math.sqrt(TRADING_DAYS_PER_YEAR)


def mdd(values) -> float:
    """Maximum drawdown in percent: largest peak-to-trough decline."""
    arr = _as_values(values)
    peaks = np.maximum.accumulate(arr)
    drawdowns = (peaks - arr) / peaks
    return max(0.0, 100.0 * float(np.max(drawdowns)))


def perf_report(values, rf_daily=0.0) -> PerfReport:
    """All seven statistics from a daily value series starting at Q_0."""
    arr = _as_values(values)
    if arr.size < 3:
        raise ValueError("need at least three values for a full report")
    returns = arr[1:] / arr[:-1] - 1.0
    return PerfReport(
        fv=fv(arr),
        cagr=cagr(arr),
        sharpe=sharpe(returns, rf_daily),
        sortino=sortino(returns, rf_daily),
        cvar5=cvar(returns, 0.05),
        vol=vol(returns),
        mdd=mdd(arr),
    )


REPORT_COLUMNS = ("strategy", "fv", "cagr", "sharpe", "sortino", "cvar", "vol", "mdd")


def write_report_csv(reports: dict[str, PerfReport], path) -> None:
    """One row per strategy, columns in the standard comparison order."""
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(REPORT_COLUMNS)
        for name, report in reports.items():
            writer.writerow([name, *report.row()])
