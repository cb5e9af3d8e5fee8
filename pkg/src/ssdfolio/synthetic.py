"""Synthetic market data on the real US equity trading calendar.

The paper-style evaluation protocol is pure calendar arithmetic (201-price
lookback, rebalance every 21 trading days), so exercising it faithfully
requires the actual NYSE date grid. This module reconstructs that calendar
from the exchange's holiday rules (including special closures) and generates
a seeded, deterministic market on top of it: an index path with calm and
crisis regimes, equities with betas around the index, a dividend-uplifted
tracking ETF, and short/long rate series. Output files follow the standard
CSV layout consumed by the loaders.
"""

from __future__ import annotations

import csv
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .market_data import ETF_TICKER, INDEX_TICKER, TradingCalendar

# Full-day special closures (days of mourning) within the supported range.
SPECIAL_CLOSURES = frozenset({date(2018, 12, 5), date(2025, 1, 9)})

_JUNETEENTH_FIRST_YEAR = 2022


def _easter(year: int) -> date:
    a = year % 19
    b, c = divmod(year, 100)
    d, e = divmod(b, 4)
    f = (b + 8) // 25
    g = (b - f + 1) // 3
    h = (19 * a + b - d - g + 15) % 30
    i, k = divmod(c, 4)
    l = (32 + 2 * e + 2 * i - h - k) % 7
    m = (a + 11 * h + 22 * l) // 451
    month = (h + l - 7 * m + 114) // 31
    day = (h + l - 7 * m + 114) % 31 + 1
    return date(year, month, day)


def _nth_weekday(year: int, month: int, weekday: int, n: int) -> date:
    d = date(year, month, 1)
    offset = (weekday - d.weekday()) % 7
    return d + timedelta(days=offset + 7 * (n - 1))


def _last_weekday_of(year: int, month: int, weekday: int) -> date:
    d = date(year + 1, 1, 1) - timedelta(days=1) if month == 12 else date(year, month + 1, 1) - timedelta(days=1)
    return d - timedelta(days=(d.weekday() - weekday) % 7)


def _observed(holiday: date) -> date | None:
    # Saturday holidays observed Friday unless that Friday ends the month.
    if holiday.weekday() == 5:
        friday = holiday - timedelta(days=1)
        return None if (friday + timedelta(days=1)).month != friday.month else friday
    if holiday.weekday() == 6:
        return holiday + timedelta(days=1)
    return holiday


def market_holidays(year: int) -> set[date]:
    """NYSE full-closure holidays for one year (rule-based)."""
    days: set[date] = set()
    for fixed in (date(year, 1, 1), date(year, 7, 4), date(year, 12, 25)):
        obs = _observed(fixed)
        if obs is not None:
            days.add(obs)
    if year >= _JUNETEENTH_FIRST_YEAR:
        obs = _observed(date(year, 6, 19))
        if obs is not None:
            days.add(obs)
    days.add(_nth_weekday(year, 1, 0, 3))  # Martin Luther King Jr.
    days.add(_nth_weekday(year, 2, 0, 3))  # Washington's Birthday
    days.add(_easter(year) - timedelta(days=2))  # Good Friday
    days.add(_last_weekday_of(year, 5, 0))  # Memorial Day
    days.add(_nth_weekday(year, 9, 0, 1))  # Labor Day
    days.add(_nth_weekday(year, 11, 3, 4))  # Thanksgiving
    return days


def trading_calendar(start: date, end: date) -> TradingCalendar:
    """All NYSE trading dates in [start, end]."""
    holidays: set[date] = set(SPECIAL_CLOSURES)
    for year in range(start.year, end.year + 1):
        holidays |= market_holidays(year)
    days = []
    d = start
    while d <= end:
        if d.weekday() < 5 and d not in holidays:
            days.append(d)
        d += timedelta(days=1)
    return TradingCalendar(dates=tuple(days))


# (first day, annual drift, annual volatility) regimes, spliced by date;
# 2017 is a quiet year with two distinctly calm stretches
_REGIMES = (
    (date(2016, 1, 1), 0.17, 0.105),
    (date(2017, 4, 17), 0.15, 0.055),
    (date(2017, 5, 22), 0.16, 0.10),
    (date(2017, 9, 18), 0.14, 0.052),
    (date(2017, 11, 6), 0.16, 0.105),
    (date(2018, 1, 1), 0.06, 0.14),
    (date(2018, 10, 1), -0.38, 0.23),
    (date(2019, 1, 1), 0.25, 0.12),
    (date(2020, 2, 20), -3.60, 0.68),
    (date(2020, 3, 24), 0.50, 0.30),
    (date(2021, 1, 1), 0.22, 0.13),
    (date(2022, 1, 1), -0.26, 0.24),
    (date(2023, 1, 1), 0.21, 0.13),
    (date(2024, 1, 1), 0.20, 0.12),
    (date(2025, 1, 1), 0.10, 0.15),
)

# year-end anchors for the short and ten-year rates, linearly interpolated
_SHORT_RATE = ((2016, 0.5), (2017, 1.2), (2018, 2.4), (2019, 1.5), (2020, 0.08), (2021, 0.05), (2022, 4.3), (2023, 5.3), (2024, 4.3), (2025, 4.2), (2026, 4.0))
_TEN_YEAR = ((2016, 2.4), (2017, 2.4), (2018, 2.7), (2019, 1.9), (2020, 0.9), (2021, 1.5), (2022, 3.9), (2023, 3.9), (2024, 4.5), (2025, 4.4), (2026, 4.3))


def _regime_params(d: date) -> tuple[float, float]:
    drift, sigma = _REGIMES[0][1], _REGIMES[0][2]
    for first_day, mu, vol in _REGIMES:
        if d >= first_day:
            drift, sigma = mu, vol
    return drift, sigma


def _rate_curve(anchors, dates) -> np.ndarray:
    xs = np.array([date(y, 12, 31).toordinal() for y, _ in anchors], dtype=float)
    ys = np.array([v for _, v in anchors], dtype=float)
    ts = np.array([d.toordinal() for d in dates], dtype=float)
    return np.interp(ts, xs, ys)


def generate_market(
    start: date = date(2017, 3, 17),
    end: date = date(2025, 8, 1),
    n_equities: int = 10,
    seed: int = 7,
):
    """Deterministic synthetic market on the real trading calendar.

    Returns (calendar, tables) where tables maps file stems to rows ready
    for CSV export.
    """
    if n_equities < 1:
        raise ValueError("need at least one equity")
    calendar = trading_calendar(start, end)
    dates = calendar.dates
    n = len(dates)
    rng = np.random.default_rng(seed)

    mus = np.empty(n)
    sigmas = np.empty(n)
    for k, d in enumerate(dates):
        mus[k], sigmas[k] = _regime_params(d)
    shocks = rng.standard_normal(n)
    log_returns = (mus - 0.5 * sigmas**2) / 252.0 + sigmas / np.sqrt(252.0) * shocks
    log_returns[0] = 0.0
    index = 2378.25 * np.exp(np.cumsum(log_returns))
    index_simple = np.empty(n)
    index_simple[0] = 0.0
    index_simple[1:] = index[1:] / index[:-1] - 1.0

    # implied vol: blend of regime vol and trailing realized vol, floored
    realized = np.full(n, sigmas[0])
    for k in range(1, n):
        lo = max(0, k - 20)
        window = index_simple[lo + 1 : k + 1]
        if window.size >= 5:
            realized[k] = float(np.std(window, ddof=1)) * np.sqrt(252.0)
        else:
            realized[k] = sigmas[k]
    vix = 100.0 * np.clip(0.45 * sigmas + 0.55 * realized, 0.075, None) * (1.0 + 0.05 * rng.standard_normal(n))
    vix = np.clip(vix, 7.5, None)

    irx = np.clip(_rate_curve(_SHORT_RATE, dates) + 0.02 * rng.standard_normal(n), 0.0, None)
    tnx = np.clip(_rate_curve(_TEN_YEAR, dates) + 0.03 * rng.standard_normal(n), 0.0, None)

    # ETF tracks the index with a small dividend uplift and tracking noise
    spy_returns = index_simple + 0.018 / 252.0 + 0.0002 * rng.standard_normal(n)
    spy_returns[0] = 0.0
    spy = 237.0 * np.cumprod(1.0 + spy_returns)

    betas = rng.uniform(0.7, 1.3, size=n_equities)
    alphas = rng.uniform(-0.02, 0.05, size=n_equities)
    idio = rng.uniform(0.15, 0.30, size=n_equities)
    eq_shocks = rng.standard_normal((n, n_equities))
    eq_returns = betas * index_simple[:, None] + alphas / 252.0 + idio / np.sqrt(252.0) * eq_shocks
    eq_returns[0] = 0.0
    eq_prices = rng.uniform(40.0, 250.0, size=n_equities) * np.cumprod(1.0 + eq_returns, axis=0)
    eq_names = [f"EQ{j:03d}" for j in range(n_equities)]

    price_rows = [("date", "ticker", "close")]
    for k, d in enumerate(dates):
        iso = d.isoformat()
        price_rows.append((iso, INDEX_TICKER, f"{index[k]:.4f}"))
        price_rows.append((iso, ETF_TICKER, f"{spy[k]:.4f}"))
        for j, name in enumerate(eq_names):
            price_rows.append((iso, name, f"{eq_prices[k, j]:.4f}"))

    membership_rows = [("ticker", "start_date", "end_date")]
    for j, name in enumerate(eq_names):
        if n_equities > 3 and j == n_equities - 1:
            # one late joiner and one early leaver exercise the mask
            membership_rows.append((name, date(2019, 1, 2).isoformat(), end.isoformat()))
        elif n_equities > 3 and j == n_equities - 2:
            membership_rows.append((name, start.isoformat(), date(2023, 6, 30).isoformat()))
        else:
            membership_rows.append((name, start.isoformat(), end.isoformat()))

    def rate_rows(values: np.ndarray) -> list[tuple[str, str]]:
        rows = [("date", "value")]
        rows.extend((d.isoformat(), f"{v:.4f}") for d, v in zip(dates, values))
        return rows

    tables = {
        "prices": price_rows,
        "membership": membership_rows,
        "vix": rate_rows(vix),
        "irx": rate_rows(irx),
        "tnx": rate_rows(tnx),
    }
    return calendar, tables


def write_dataset(
    directory,
    start: date = date(2017, 3, 17),
    end: date = date(2025, 8, 1),
    n_equities: int = 10,
    seed: int = 7,
) -> dict[str, Path]:
    """Write the synthetic market as the standard CSV file set."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    _, tables = generate_market(start=start, end=end, n_equities=n_equities, seed=seed)
    paths: dict[str, Path] = {}
    for stem, rows in tables.items():
        path = directory / f"{stem}.csv"
        with path.open("w", newline="") as handle:
            csv.writer(handle).writerows(rows)
        paths[stem] = path
    return paths
