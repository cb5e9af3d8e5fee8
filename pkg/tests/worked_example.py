"""Shared fixture: the worked six-period put-strategy example.

Builds a weekday market history in which a 3% OTM put strategy with a
30-day/-5% momentum trigger produces the exact decision sequence
idle, buy, hold, rollover, hold, sell across six consecutive trading
dates, with option prices injected through a table-driven pricer. The
constructed index path pins the trailing 30-day returns at
-4.9, -5.1, -5.2, -5.2, -5.3, -4.8 percent on those dates and the forward
level at 6379 on the rollover date.
"""

import math
from datetime import date, timedelta

import numpy as np

from ssdfolio.market_data import TradingCalendar
from ssdfolio.strategy import MarketHistory, StrategyConfig

EVENT_DATES = (
    date(2018, 2, 6),
    date(2018, 2, 7),
    date(2018, 2, 8),
    date(2018, 2, 9),
    date(2018, 2, 12),
    date(2018, 2, 13),
)
TRAILING_PCTS = (-4.9, -5.1, -5.2, -5.2, -5.3, -4.8)

FIRST_EXPIRY = date(2018, 2, 28)  # end of month, 21 days after the buy
SECOND_EXPIRY = date(2018, 3, 16)  # next monthly expiry, chosen at rollover
ROLLOVER_FORWARD = 6379.0

# injected unit prices: (expiry, pricing date) -> price
PRICE_TABLE = {
    (FIRST_EXPIRY, EVENT_DATES[1]): 90.0,
    (FIRST_EXPIRY, EVENT_DATES[2]): 95.0,
    (FIRST_EXPIRY, EVENT_DATES[3]): 80.0,
    (SECOND_EXPIRY, EVENT_DATES[3]): 75.0,
    (SECOND_EXPIRY, EVENT_DATES[4]): 77.0,
    (SECOND_EXPIRY, EVENT_DATES[5]): 110.0,
}

EXPECTED_VALUATIONS_1DP = (1000.0, 1000.0, 1055.6, 888.9, 912.6, 1303.7)
EXPECTED_RETURN_PCTS_1DP = (0.0, 5.6, -15.8, 2.7, 42.9)
EXPECTED_ACTIONS = ("", "buy", "hold", "rollover", "hold", "sell")
EXPECTED_ROLLOVER_STRIKE = 6190.0


def weekday_calendar(start: date, end: date) -> TradingCalendar:
    days = []
    d = start
    while d <= end:
        if d.weekday() < 5:
            days.append(d)
        d += timedelta(days=1)
    return TradingCalendar(tuple(days))


def table_pricer(option, snapshot):
    return PRICE_TABLE[(option.expiry, snapshot.t)]


def build_history(annual_rate_after_buy: float = 0.0) -> MarketHistory:
    """Weekday history ending at the sixth event date.

    The index is flat at 6000 except where the six trailing returns are
    pinned; cash earns nothing until the buy date, after which the rate is
    ``annual_rate_after_buy`` (so exactly one accrual period precedes the
    buy when it is nonzero).
    """
    calendar = weekday_calendar(date(2017, 12, 18), EVENT_DATES[-1])
    level = {d: 6000.0 for d in calendar.dates}

    anchors = []
    for t in EVENT_DATES:
        k = calendar.position_at_or_before(t - timedelta(days=30))
        anchors.append(calendar.dates[k])
    # the rollover date pins both its own level (the forward, at zero rate)
    # and therefore its trailing anchor
    level[EVENT_DATES[3]] = ROLLOVER_FORWARD
    level[anchors[3]] = ROLLOVER_FORWARD / (1 + TRAILING_PCTS[3] / 100.0)
    for i, t in enumerate(EVENT_DATES):
        if i == 3:
            continue
        level[t] = level[anchors[i]] * (1 + TRAILING_PCTS[i] / 100.0)

    index = np.array([level[d] for d in calendar.dates])
    rate = np.array(
        [annual_rate_after_buy if d >= EVENT_DATES[1] else 0.0 for d in calendar.dates]
    )
    vol = np.full(len(calendar.dates), 0.15)
    return MarketHistory(calendar=calendar, index=index, vol=vol, rate=rate)


def accrual_multiplier(annual_rate: float) -> float:
    return math.pow(1.0 + annual_rate, 1.0 / 252.0)


def put_strategy(trade_cost: float = 0.0) -> StrategyConfig:
    # the moneyness-deviation rollover is disabled here: the worked example
    # exercises only the lifetime rule
    return StrategyConfig(
        name="momentum_put",
        legs="put",
        moneyness_target_pct=3.0,
        trigger="trailing_return",
        trigger_lookback_days=30,
        trigger_threshold_pct=-5.0,
        rollover_min_days=20,
        moneyness_dev_pct=math.inf,
        trade_cost_per_unit=trade_cost,
    )
