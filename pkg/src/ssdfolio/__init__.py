"""Enhanced indexation with option strategies and stochastic dominance.

Rule-based index-option strategies are simulated into long-lived artificial
assets, combined with equities and a risk-free account, and portfolios are
chosen by scaled second-order stochastic dominance solved with a
cutting-plane linear program. A rolling-window backtester and the usual
performance statistics complete the pipeline.
"""

from .analytics import PerfReport, cagr, cvar, fv, mdd, perf_report, sharpe, sortino, vol
from .backtest import (
    BacktestConfig,
    BacktestResult,
    MarketData,
    buy_and_hold_values,
    oos_window_returns,
    rebalance_indices,
    run,
    scenario_at,
    simulate_strategies,
)
from .lp import LpError, LpProblem, LpSolution, solve, solve_with_scipy, to_lp_text
from .market_data import (
    MembershipMask,
    PricePanel,
    RateSeries,
    ReturnPanel,
    TradingCalendar,
    daily_risk_free,
    last_business_day,
    load_membership,
    load_prices,
    load_rate_series,
    next_expiration,
    third_friday,
    to_returns,
)
from .pricing import (
    MarketSnapshot,
    OptionSpec,
    classify,
    forward_price,
    moneyness_pct,
    norm_cdf,
    price,
    strike_for_target,
)
from .ssd import (
    GroupBound,
    ScenarioMatrix,
    SsdSolution,
    TailTargets,
    build_master,
    compute_tau,
    full_program,
    optimize,
    separate,
)
from .strategy import (
    MarketHistory,
    StrategyConfig,
    ValuationSeries,
    evaluate,
    load_strategy_configs,
    realized_vol,
    standard_strategies,
    traded_in_window,
    trailing_return,
)

__version__ = "0.1.0"
