"""Rolling-window backtest: simulate strategies, optimize, hold, repeat.

Option strategies are simulated once over the full history (each is a
single long-lived artificial asset). At every rebalance date the equity
universe is restricted to current index members with complete in-sample
prices, strategies that never traded in-sample are dropped, the scaled-SSD
portfolio is chosen on the trailing return window, and the resulting
weights are held with drifting positions until the next rebalance. The
per-window returns concatenate into one gapless out-of-sample series.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from .market_data import (
    ETF_TICKER,
    INDEX_TICKER,
    MembershipMask,
    PricePanel,
    RateSeries,
    daily_risk_free,
    load_membership,
    load_prices,
    load_rate_series,
    to_returns,
)
from .ssd import GROUP_RISK_FREE, GroupBound, ScenarioMatrix, optimize
from .strategy import MarketHistory, StrategyConfig, ValuationSeries, evaluate, traded_in_window

RISK_FREE_ASSET = "RF"

UNIVERSE_EQUITIES = "equities"
UNIVERSE_SPY_ONLY = "spy_only"


@dataclass(frozen=True)
class MarketData:
    """All loaded inputs for one backtest."""

    panel: PricePanel
    membership: MembershipMask
    vix: RateSeries
    irx: RateSeries
    tnx: RateSeries | None = None

    @classmethod
    def load(cls, directory) -> "MarketData":
        """Load the conventional file set from a data directory.

        Expects prices.csv, membership.csv, vix.csv, irx.csv and optionally
        tnx.csv.
        """
        directory = Path(directory)
        panel = load_prices(directory / "prices.csv")
        membership = load_membership(directory / "membership.csv", tickers=panel.tickers)
        vix = load_rate_series(directory / "vix.csv", "vix")
        irx = load_rate_series(directory / "irx.csv", "irx")
        tnx_path = directory / "tnx.csv"
        tnx = load_rate_series(tnx_path, "tnx") if tnx_path.exists() else None
        return cls(panel=panel, membership=membership, vix=vix, irx=irx, tnx=tnx)

    def history(self) -> MarketHistory:
        return MarketHistory.from_panels(self.panel, self.vix, self.irx)


@dataclass(frozen=True)
class BacktestConfig:
    lookback_prices: int = 201
    rebalance_every: int = 21
    oos_hold: int = 20
    riskfree_cap: float = 0.10
    scaled: bool = True
    universe: str = UNIVERSE_EQUITIES
    include_options: bool = True
    group_bounds: tuple[GroupBound, ...] = ()
    solver: str = "reference"
    lp_tol: float = 1e-8
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.lookback_prices < 2:
            raise ValueError("lookback must cover at least two prices")
        if self.rebalance_every < 1:
            raise ValueError("rebalance spacing must be positive")
        if not 0 < self.oos_hold <= self.rebalance_every:
            raise ValueError("hold horizon must be positive and at most the rebalance spacing")
        if not 0.0 <= self.riskfree_cap <= 1.0:
            raise ValueError("risk-free cap must be a fraction")
        if self.universe not in (UNIVERSE_EQUITIES, UNIVERSE_SPY_ONLY):
            raise ValueError(f"unknown universe {self.universe!r}")
        if self.jobs < 1:
            raise ValueError("jobs must be positive")


@dataclass(frozen=True)
class BacktestResult:
    dates: tuple[date, ...]  # concatenated out-of-sample return dates
    oos_returns: np.ndarray
    oos_values: np.ndarray  # cumulative value after each return, start 1
    index_values: np.ndarray  # benchmark path over the same dates
    rebalance_dates: tuple[date, ...]
    weights_log: tuple[tuple[date, str, float], ...]
    excluded_log: tuple[tuple[date, str], ...]
    strategy_series: dict[str, ValuationSeries] = field(repr=False, default_factory=dict)

    def option_weight_by_rebalance(self, strategy_names) -> list[tuple[date, float]]:
        names = set(strategy_names)
        totals: dict[date, float] = {d: 0.0 for d in self.rebalance_dates}
        for d, asset, weight in self.weights_log:
            if asset in names:
                totals[d] += weight
        return [(d, totals[d]) for d in self.rebalance_dates]


def oos_window_returns(weights, asset_returns) -> np.ndarray:
    """Daily buy-and-hold portfolio returns over one window.

    Positions are bought once and drift with realized returns; no intra-
    window reweighting.
    """
    w = np.asarray(weights, dtype=float)
    rets = np.asarray(asset_returns, dtype=float)
    if rets.ndim != 2 or rets.shape[1] != w.shape[0]:
        raise ValueError("asset return matrix must be days x assets")
    if abs(float(w.sum()) - 1.0) > 1e-8:
        raise ValueError("weights must sum to 1")
    paths = w * np.cumprod(1.0 + rets, axis=0)
    totals = paths.sum(axis=1)
    previous = np.concatenate([[1.0], totals[:-1]])
    return totals / previous - 1.0


def rebalance_indices(n_dates: int, config: BacktestConfig) -> list[int]:
    """Positions of the rebalance dates in the trading calendar."""
    first = config.lookback_prices - 1
    if n_dates < config.lookback_prices + 1:
        raise ValueError("not enough history for a single rebalance")
    return list(range(first, n_dates - 1, config.rebalance_every))


def _simulate_one(args) -> ValuationSeries:
    config, history = args
    return evaluate(config, history)


def _solve_one(args):
    scen, scaled, bounds, solver, lp_tol = args
    return optimize(scen, scaled=scaled, bounds=bounds, solver=solver, lp_tol=lp_tol)


def simulate_strategies(
    strategies, history: MarketHistory, jobs: int = 1
) -> dict[str, ValuationSeries]:
    configs = list(strategies)
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_simulate_one, [(c, history) for c in configs]))
    else:
        results = [evaluate(c, history) for c in configs]
    return {c.name: series for c, series in zip(configs, results)}


def scenario_at(
    data: MarketData,
    strategy_list,
    series: dict[str, ValuationSeries],
    i: int,
    config: BacktestConfig,
    returns_panel=None,
    rf_returns=None,
):
    """Assemble the in-sample scenario for a rebalance at calendar index i.

    Returns (scenarios, assets, excluded_strategy_names).
    """
    panel = data.panel
    dates = panel.dates
    if returns_panel is None:
        returns_panel = to_returns(panel)
    if rf_returns is None:
        rf_returns = np.array([daily_risk_free(float(r)) for r in data.history().rate[1:]])
    lookback_returns = config.lookback_prices - 1
    if i < lookback_returns:
        raise ValueError(f"not enough history before {dates[i]} for a {config.lookback_prices}-price window")
    rebalance_date = dates[i]
    row_hi = i  # return-panel row r corresponds to calendar date r+1
    row_lo = i - lookback_returns

    equities: list[str] = []
    if config.universe == UNIVERSE_EQUITIES:
        for ticker in panel.tickers:
            if ticker in (INDEX_TICKER, ETF_TICKER):
                continue
            if not data.membership.is_member(ticker, rebalance_date):
                continue
            window = panel.prices[row_lo : i + 1, panel.tickers.index(ticker)]
            if np.any(np.isnan(window)):
                continue
            equities.append(ticker)
    else:
        window = panel.column(ETF_TICKER)[row_lo : i + 1]
        if np.any(np.isnan(window)):
            raise ValueError(f"{ETF_TICKER} has gaps in the window ending {rebalance_date}")
        equities.append(ETF_TICKER)
    if not equities:
        raise ValueError(f"empty investable universe at {rebalance_date}")

    included: list[StrategyConfig] = []
    excluded: list[str] = []
    for cfg in strategy_list:
        if traded_in_window(series[cfg.name], dates[row_lo], rebalance_date):
            included.append(cfg)
        else:
            excluded.append(cfg.name)

    assets = [*equities, RISK_FREE_ASSET, *(c.name for c in included)]
    columns = [returns_panel.column(t)[row_lo:row_hi] for t in equities]
    columns.append(rf_returns[row_lo:row_hi])
    columns.extend(series[c.name].returns[row_lo:row_hi] for c in included)
    scen = ScenarioMatrix(
        assets=tuple(assets),
        returns=np.column_stack(columns),
        index_returns=returns_panel.column(INDEX_TICKER)[row_lo:row_hi],
        equities=frozenset(equities),
        risk_free=RISK_FREE_ASSET,
        calls=frozenset(c.name for c in included if c.asset_class == "call"),
        puts=frozenset(c.name for c in included if c.asset_class == "put"),
        mixed=frozenset(c.name for c in included if c.asset_class == "mixed"),
    )
    return scen, assets, excluded


def run(data: MarketData, strategies, config: BacktestConfig) -> BacktestResult:
    """Full rolling-window protocol; deterministic for identical inputs."""
    panel = data.panel
    dates = panel.dates
    n = len(dates)
    indices = rebalance_indices(n, config)
    history = data.history()
    returns_panel = to_returns(panel)
    index_returns = returns_panel.column(INDEX_TICKER)
    rf_returns = np.array([daily_risk_free(float(r)) for r in history.rate[1:]])

    strategy_list = list(strategies) if config.include_options else []
    series = simulate_strategies(strategy_list, history, jobs=config.jobs)

    tasks = []
    side_info = []
    for i in indices:
        scen, assets, excluded = scenario_at(
            data, strategy_list, series, i, config, returns_panel=returns_panel, rf_returns=rf_returns
        )
        bounds = (GroupBound(GROUP_RISK_FREE, 0.0, config.riskfree_cap), *config.group_bounds)
        tasks.append((scen, config.scaled, bounds, config.solver, config.lp_tol))
        side_info.append((i, dates[i], assets, excluded))

    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            solutions = list(pool.map(_solve_one, tasks))
    else:
        solutions = []
        for task, (_, rebalance_date, _, _) in zip(tasks, side_info):
            try:
                solutions.append(_solve_one(task))
            except Exception as err:
                raise RuntimeError(f"optimization failed at rebalance {rebalance_date}: {err}") from err

    oos_dates: list[date] = []
    oos_returns: list[float] = []
    index_path: list[float] = []
    weights_log: list[tuple[date, str, float]] = []
    excluded_log: list[tuple[date, str]] = []
    for (i, rebalance_date, assets, excluded), solution in zip(side_info, solutions):
        for name in excluded:
            excluded_log.append((rebalance_date, name))
        keep = solution.weights > 1e-12
        kept_assets = [a for a, k in zip(assets, keep) if k]
        kept_weights = solution.weights[keep]
        kept_weights = kept_weights / kept_weights.sum()
        for a, w in zip(kept_assets, kept_weights):
            weights_log.append((rebalance_date, a, float(w)))

        j = min(i + config.rebalance_every, n - 1)
        rows = slice(i, j)  # return rows for dates (i, j]
        window_cols = []
        for a in kept_assets:
            if a == RISK_FREE_ASSET:
                window_cols.append(rf_returns[rows])
            elif a in series:
                window_cols.append(series[a].returns[rows])
            else:
                window_cols.append(np.nan_to_num(returns_panel.column(a)[rows], nan=0.0))
        window_returns = oos_window_returns(kept_weights, np.column_stack(window_cols))
        oos_dates.extend(dates[i + 1 : j + 1])
        oos_returns.extend(window_returns)
        index_path.extend(index_returns[rows])

    oos = np.array(oos_returns)
    values = np.cumprod(1.0 + oos)
    index_values = np.cumprod(1.0 + np.array(index_path))
    return BacktestResult(
        dates=tuple(oos_dates),
        oos_returns=oos,
        oos_values=values,
        index_values=index_values,
        rebalance_dates=tuple(d for _, d, _, _ in side_info),
        weights_log=tuple(weights_log),
        excluded_log=tuple(excluded_log),
        strategy_series=series,
    )


def buy_and_hold_values(panel: PricePanel, ticker: str, result_dates) -> np.ndarray:
    """Benchmark path of a single asset over the concatenated window dates."""
    col = panel.column(ticker)
    positions = {d: k for k, d in enumerate(panel.dates)}
    first = positions[result_dates[0]]
    if first == 0:
        raise ValueError("no price before the first out-of-sample date")
    base = col[first - 1]
    values = np.array([col[positions[d]] for d in result_dates])
    if np.any(np.isnan(values)) or np.isnan(base):
        raise ValueError(f"{ticker} has gaps over the out-of-sample span")
    return values / base
