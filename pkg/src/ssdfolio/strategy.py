"""Option strategy simulation.

A strategy is a rule set deciding, on every trading date, whether to buy
options with all available cash, sell them back to cash, roll them into
fresh contracts, or hold. Simulating the rules over market history yields a
daily valuation path, turning the strategy into an artificial asset with a
return series directly comparable to an equity.

Conventions: trigger lookbacks quoted in days ("past 30 days") are calendar
days mapped to the nearest earlier trading date; realized-volatility
lookbacks are counts of trading-day returns, annualized by sqrt(252). Cash
positions accrue daily at the short-term risk-free rate.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Callable

import numpy as np

from .market_data import (
    TRADING_DAYS_PER_YEAR,
    INDEX_TICKER,
    PricePanel,
    RateSeries,
    TradingCalendar,
    daily_risk_free,
    next_expiration,
)
from .pricing import CALL, PUT, MarketSnapshot, OptionSpec, forward_price, strike_for_target
from .pricing import price as bs_price

PUT_ONLY = "put"
CALL_ONLY = "call"
STRADDLE = "straddle"
STRANGLE = "strangle"

TRAILING_RETURN = "trailing_return"
REALIZED_VOL = "realized_vol"

Pricer = Callable[[OptionSpec, MarketSnapshot], float]


@dataclass(frozen=True)
class StrategyConfig:
    """Parameters defining one option strategy."""

    name: str
    legs: str
    moneyness_target_pct: float
    trigger: str
    trigger_lookback_days: int
    trigger_threshold_pct: float
    rollover_min_days: int = 20
    moneyness_dev_pct: float = 3.0
    trade_cost_per_unit: float = 0.0

    def __post_init__(self) -> None:
        if self.legs not in (PUT_ONLY, CALL_ONLY, STRADDLE, STRANGLE):
            raise ValueError(f"unknown legs {self.legs!r}")
        if self.trigger not in (TRAILING_RETURN, REALIZED_VOL):
            raise ValueError(f"unknown trigger {self.trigger!r}")
        if self.moneyness_target_pct < 0:
            raise ValueError("moneyness target must be nonnegative")
        if self.legs == STRADDLE and self.moneyness_target_pct != 0:
            raise ValueError("a straddle buys at-the-money legs (target 0)")
        if self.legs == STRANGLE and self.moneyness_target_pct <= 0:
            raise ValueError("a strangle needs a positive out-of-the-money target")
        if self.trigger_lookback_days < 1:
            raise ValueError("trigger lookback must be positive")
        if self.rollover_min_days < 1:
            raise ValueError("rollover threshold must be positive")
        if self.moneyness_dev_pct <= 0:
            raise ValueError("moneyness deviation threshold must be positive")
        if self.trade_cost_per_unit < 0:
            raise ValueError("trade cost must be nonnegative")

    @property
    def leg_kinds(self) -> tuple[str, ...]:
        if self.legs == PUT_ONLY:
            return (PUT,)
        if self.legs == CALL_ONLY:
            return (CALL,)
        return (CALL, PUT)

    @property
    def asset_class(self) -> str:
        """Partition label: 'put', 'call' or 'mixed'."""
        if self.legs == PUT_ONLY:
            return "put"
        if self.legs == CALL_ONLY:
            return "call"
        return "mixed"


@dataclass
class StrategyState:
    """Evolving cash/holdings state; all-in when holding options."""

    cash: float
    holdings: list[tuple[OptionSpec, float]] = field(default_factory=list)

    @property
    def in_options(self) -> bool:
        return bool(self.holdings)


@dataclass(frozen=True)
class LegTrade:
    side: str  # 'buy' or 'sell'
    option: OptionSpec
    units: float
    unit_price: float


@dataclass(frozen=True)
class TradeEvent:
    t: date
    action: str  # 'buy', 'sell', 'rollover', 'settle'
    legs: tuple[LegTrade, ...]


@dataclass(frozen=True)
class ValuationSeries:
    """Daily valuations, returns and trade record of one simulated strategy."""

    name: str
    dates: tuple[date, ...]
    valuations: np.ndarray
    returns: np.ndarray  # aligned to dates[1:]
    actions: tuple[str, ...]
    held: tuple[bool, ...]  # post-decision option-holding flag per date
    trade_log: tuple[TradeEvent, ...]

    def held_entering(self, k: int) -> bool:
        return self.held[k - 1] if k > 0 else False


@dataclass(frozen=True)
class MarketHistory:
    """Aligned daily market state: index level, implied vol, risk-free rate."""

    calendar: TradingCalendar
    index: np.ndarray
    vol: np.ndarray
    rate: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.calendar)
        for name in ("index", "vol", "rate"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} series length does not match calendar")
        if np.any(np.isnan(self.index)) or np.any(self.index <= 0):
            raise ValueError("index series must be positive and gapless")

    @classmethod
    def from_panels(cls, panel: PricePanel, vix: RateSeries, irx: RateSeries) -> "MarketHistory":
        calendar = panel.calendar
        return cls(
            calendar=calendar,
            index=panel.column(INDEX_TICKER),
            vol=vix.align(calendar).values,
            rate=irx.align(calendar).values,
        )

    def snapshot(self, k: int) -> MarketSnapshot:
        return MarketSnapshot(
            t=self.calendar.dates[k],
            underlying=float(self.index[k]),
            vol=float(self.vol[k]),
            rate=float(self.rate[k]),
        )


def trailing_return(history: MarketHistory, t: date, lookback_days: int) -> float | None:
    """Index return (percent) over the trailing calendar-day window.

    The reference level is the latest trading date at least ``lookback_days``
    calendar days before ``t``; None when history is too short.
    """
    k = history.calendar.position(t)
    anchor = history.calendar.position_at_or_before(t - timedelta(days=lookback_days))
    if anchor is None:
        return None
    return 100.0 * (float(history.index[k]) / float(history.index[anchor]) - 1.0)


def realized_vol(history: MarketHistory, t: date, lookback_days: int) -> float | None:
    """Annualized percent volatility over the last ``lookback_days`` trading-day returns."""
    k = history.calendar.position(t)
    if lookback_days < 2 or k - lookback_days < 0:
        return None
    window = history.index[k - lookback_days : k + 1]
    rets = window[1:] / window[:-1] - 1.0
    return 100.0 * float(np.std(rets, ddof=1)) * math.sqrt(TRADING_DAYS_PER_YEAR)


def _trigger_satisfied(config: StrategyConfig, history: MarketHistory, t: date) -> bool:
    if config.trigger == TRAILING_RETURN:
        value = trailing_return(history, t, config.trigger_lookback_days)
        return value is not None and value <= config.trigger_threshold_pct
    value = realized_vol(history, t, config.trigger_lookback_days)
    return value is not None and value < config.trigger_threshold_pct


def _needs_rollover(config: StrategyConfig, state: StrategyState, history: MarketHistory, k: int) -> bool:
    t = history.calendar.dates[k]
    expiry = state.holdings[0][0].expiry
    days_left = (expiry - t).days
    if days_left < config.rollover_min_days:
        return True
    if math.isinf(config.moneyness_dev_pct):
        return False
    fwd = forward_price(history.snapshot(k), days_left / 365.0)
    for option, _ in state.holdings:
        shift = config.moneyness_target_pct / 100.0
        kappa = 1.0 - shift if option.kind == PUT else 1.0 + shift
        target_level = kappa * fwd
        if 100.0 * abs(target_level - option.exercise) / target_level >= config.moneyness_dev_pct:
            return True
    return False


def _buy_legs(
    config: StrategyConfig, history: MarketHistory, k: int, cash: float, pricer: Pricer
) -> tuple[list[tuple[OptionSpec, float]], list[LegTrade]]:
    t = history.calendar.dates[k]
    expiry = next_expiration(history.calendar, t, config.rollover_min_days)
    snap = history.snapshot(k)
    fwd = forward_price(snap, (expiry - t).days / 365.0)
    kinds = config.leg_kinds
    budget = cash / len(kinds)  # equal position per leg
    holdings: list[tuple[OptionSpec, float]] = []
    trades: list[LegTrade] = []
    for kind in kinds:
        exercise = strike_for_target(kind, fwd, config.moneyness_target_pct)
        option = OptionSpec(kind=kind, exercise=exercise, expiry=expiry)
        unit_price = pricer(option, snap)
        cost = unit_price + config.trade_cost_per_unit
        if cost <= 0:
            raise RuntimeError(f"non-positive option cost for {config.name} on {t}")
        units = budget / cost
        holdings.append((option, units))
        trades.append(LegTrade(side="buy", option=option, units=units, unit_price=unit_price))
    return holdings, trades


def _sell_all(
    config: StrategyConfig, state: StrategyState, snap: MarketSnapshot, pricer: Pricer
) -> tuple[float, list[LegTrade]]:
    proceeds = 0.0
    trades: list[LegTrade] = []
    for option, units in state.holdings:
        unit_price = pricer(option, snap)
        proceeds += units * max(unit_price - config.trade_cost_per_unit, 0.0)
        trades.append(LegTrade(side="sell", option=option, units=units, unit_price=unit_price))
    return proceeds, trades


def evaluate(
    config: StrategyConfig,
    history: MarketHistory,
    initial_cash: float = 1000.0,
    pricer: Pricer | None = None,
) -> ValuationSeries:
    """Run the strategy rules over every trading date in the history.

    Daily decision order: settle an expired position at intrinsic value
    (unreachable under the usual 20-day rollover rule), otherwise buy when
    flat and the trigger fires, sell when invested and the trigger fails,
    roll when the position is too close to expiry or its moneyness has
    drifted from target, else hold. Valuation is cash when flat and the
    marked value of the held legs when invested.
    """
    if pricer is None:
        pricer = bs_price
    n = len(history.calendar)
    state = StrategyState(cash=float(initial_cash))
    valuations = np.empty(n)
    actions: list[str] = []
    held: list[bool] = []
    log: list[TradeEvent] = []

    for k in range(n):
        t = history.calendar.dates[k]
        if k > 0 and not state.in_options:
            state.cash *= 1.0 + daily_risk_free(float(history.rate[k]))
        snap = history.snapshot(k)
        action = ""

        if state.in_options and (state.holdings[0][0].expiry - t).days <= 0:
            # exercise if profitable: marking at intrinsic value does exactly that
            proceeds, trades = _sell_all(config, state, snap, pricer)
            state.cash, state.holdings = proceeds, []
            action = "settle"
            log.append(TradeEvent(t=t, action=action, legs=tuple(trades)))
        else:
            keep = _trigger_satisfied(config, history, t)
            if not state.in_options:
                if keep:
                    state.holdings, trades = _buy_legs(config, history, k, state.cash, pricer)
                    state.cash = 0.0
                    action = "buy"
                    log.append(TradeEvent(t=t, action=action, legs=tuple(trades)))
            elif not keep:
                proceeds, trades = _sell_all(config, state, snap, pricer)
                state.cash, state.holdings = proceeds, []
                action = "sell"
                log.append(TradeEvent(t=t, action=action, legs=tuple(trades)))
            elif _needs_rollover(config, state, history, k):
                proceeds, sell_trades = _sell_all(config, state, snap, pricer)
                state.holdings, buy_trades = _buy_legs(config, history, k, proceeds, pricer)
                state.cash = 0.0
                action = "rollover"
                log.append(TradeEvent(t=t, action=action, legs=tuple(sell_trades + buy_trades)))
            else:
                action = "hold"

        if state.in_options:
            valuations[k] = sum(units * pricer(option, snap) for option, units in state.holdings)
        else:
            valuations[k] = state.cash
        actions.append(action)
        held.append(state.in_options)

    returns = valuations[1:] / valuations[:-1] - 1.0
    return ValuationSeries(
        name=config.name,
        dates=history.calendar.dates,
        valuations=valuations,
        returns=returns,
        actions=tuple(actions),
        held=tuple(held),
        trade_log=tuple(log),
    )


def traded_in_window(series: ValuationSeries, start: date, end: date) -> bool:
    """Whether the strategy was ever invested during [start, end].

    True when a buy lands inside the window or options were already held
    entering it; a strategy that stays fully in cash contributes nothing
    beyond the risk-free rate and is excluded from portfolio selection.
    """
    for k, d in enumerate(series.dates):
        if d >= start:
            if series.held_entering(k):
                return True
            break
    return any(ev.action in ("buy", "rollover") and start <= ev.t <= end for ev in series.trade_log)


def standard_strategies() -> tuple[StrategyConfig, ...]:
    """The twelve benchmark strategies: four momentum puts, four reversal
    calls, and four calm-market straddles/strangles."""
    configs: list[StrategyConfig] = []
    for target, tag in ((0.0, "atm"), (3.0, "otm3")):
        for threshold in (-5.0, -10.0):
            configs.append(
                StrategyConfig(
                    name=f"put_{tag}_30d{threshold:g}",
                    legs=PUT_ONLY,
                    moneyness_target_pct=target,
                    trigger=TRAILING_RETURN,
                    trigger_lookback_days=30,
                    trigger_threshold_pct=threshold,
                )
            )
    for target, tag in ((0.0, "atm"), (3.0, "otm3")):
        for threshold in (-7.0, -15.0):
            configs.append(
                StrategyConfig(
                    name=f"call_{tag}_45d{threshold:g}",
                    legs=CALL_ONLY,
                    moneyness_target_pct=target,
                    trigger=TRAILING_RETURN,
                    trigger_lookback_days=45,
                    trigger_threshold_pct=threshold,
                )
            )
    for legs, target in ((STRADDLE, 0.0), (STRANGLE, 3.0)):
        for lookback in (20, 30):
            configs.append(
                StrategyConfig(
                    name=f"{legs}_vol{lookback}",
                    legs=legs,
                    moneyness_target_pct=target,
                    trigger=REALIZED_VOL,
                    trigger_lookback_days=lookback,
                    trigger_threshold_pct=8.0,
                )
            )
    return tuple(configs)


_STRATEGY_COLUMNS = (
    "name",
    "legs",
    "moneyness_target_pct",
    "trigger",
    "trigger_lookback_days",
    "trigger_threshold_pct",
    "rollover_min_days",
    "moneyness_dev_pct",
    "trade_cost_per_unit",
)


def load_strategy_configs(path) -> tuple[StrategyConfig, ...]:
    """Read strategy definitions from CSV (one row per strategy)."""
    path = Path(path)
    with path.open(newline="") as handle:
        reader = csv.DictReader(handle)
        if tuple(reader.fieldnames or ()) != _STRATEGY_COLUMNS:
            raise ValueError(f"{path}: expected header {','.join(_STRATEGY_COLUMNS)}")
        configs = []
        for row in reader:
            configs.append(
                StrategyConfig(
                    name=row["name"],
                    legs=row["legs"],
                    moneyness_target_pct=float(row["moneyness_target_pct"]),
                    trigger=row["trigger"],
                    trigger_lookback_days=int(row["trigger_lookback_days"]),
                    trigger_threshold_pct=float(row["trigger_threshold_pct"]),
                    rollover_min_days=int(row["rollover_min_days"]),
                    moneyness_dev_pct=float(row["moneyness_dev_pct"]),
                    trade_cost_per_unit=float(row["trade_cost_per_unit"]),
                )
            )
    if not configs:
        raise ValueError(f"no strategies defined in {path}")
    return tuple(configs)


def write_strategy_configs(configs, path) -> None:
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(_STRATEGY_COLUMNS)
        for c in configs:
            writer.writerow(
                [
                    c.name,
                    c.legs,
                    f"{c.moneyness_target_pct:.10g}",
                    c.trigger,
                    c.trigger_lookback_days,
                    f"{c.trigger_threshold_pct:.10g}",
                    c.rollover_min_days,
                    f"{c.moneyness_dev_pct:.10g}",
                    f"{c.trade_cost_per_unit:.10g}",
                ]
            )


def write_valuation_csv(series: ValuationSeries, path) -> None:
    """Export ``date,valuation,return,action`` (first return is blank)."""
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["date", "valuation", "return", "action"])
        for k, d in enumerate(series.dates):
            ret = "" if k == 0 else f"{series.returns[k - 1]:.10g}"
            writer.writerow([d.isoformat(), f"{series.valuations[k]:.10g}", ret, series.actions[k]])
