"""Market data ingestion: daily prices, index membership, rate series.

Input files are plain CSV. Prices are long format (``date,ticker,close``)
with the reserved tickers ``SP500`` for the index level and ``SPY`` for the
tracking ETF. Rate series (``date,value``) are quoted in percent and stored
as decimal fractions. The trading calendar is whatever set of dates the
price file contains; no exchange-holiday library is consulted, so the
calendar always agrees with the data.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path

import numpy as np
import pandas as pd

INDEX_TICKER = "SP500"
ETF_TICKER = "SPY"

TRADING_DAYS_PER_YEAR = 252


@dataclass(frozen=True)
class TradingCalendar:
    """Ordered trading dates, with fast date -> position lookup."""

    dates: tuple[date, ...]

    def __post_init__(self) -> None:
        if not self.dates:
            raise ValueError("calendar must contain at least one date")
        object.__setattr__(self, "_ordinals", np.array([d.toordinal() for d in self.dates], dtype=np.int64))
        if np.any(np.diff(self._ordinals) <= 0):
            raise ValueError("calendar dates must be strictly increasing")

    def __len__(self) -> int:
        return len(self.dates)

    def __contains__(self, d: date) -> bool:
        i = int(np.searchsorted(self._ordinals, d.toordinal()))
        return i < len(self.dates) and self.dates[i] == d

    def position(self, d: date) -> int:
        """Index of ``d`` in the calendar; raises if not a trading date."""
        i = int(np.searchsorted(self._ordinals, d.toordinal()))
        if i >= len(self.dates) or self.dates[i] != d:
            raise KeyError(f"{d} is not a trading date")
        return i

    def position_at_or_before(self, d: date) -> int | None:
        """Index of the latest trading date <= d, or None if before range."""
        i = int(np.searchsorted(self._ordinals, d.toordinal(), side="right")) - 1
        return i if i >= 0 else None


@dataclass(frozen=True)
class PricePanel:
    """Daily close prices, one column per ticker; NaN where unlisted."""

    dates: tuple[date, ...]
    tickers: tuple[str, ...]
    prices: np.ndarray  # shape (len(dates), len(tickers))

    def __post_init__(self) -> None:
        if len(self.dates) == 0 or len(self.tickers) == 0:
            raise ValueError("empty price panel")
        ords = [d.toordinal() for d in self.dates]
        if any(b <= a for a, b in zip(ords, ords[1:])):
            raise ValueError("panel dates must be strictly increasing")
        if self.prices.shape != (len(self.dates), len(self.tickers)):
            raise ValueError("price matrix shape does not match dates x tickers")
        present = ~np.isnan(self.prices)
        if np.any(self.prices[present] <= 0):
            raise ValueError("prices must be strictly positive")
        if INDEX_TICKER in self.tickers:
            col = self.prices[:, self.tickers.index(INDEX_TICKER)]
            if np.any(np.isnan(col)):
                raise ValueError(f"{INDEX_TICKER} series must have no gaps")

    @property
    def calendar(self) -> TradingCalendar:
        return TradingCalendar(self.dates)

    def column(self, ticker: str) -> np.ndarray:
        return self.prices[:, self.tickers.index(ticker)]

    def has_ticker(self, ticker: str) -> bool:
        return ticker in self.tickers


@dataclass(frozen=True)
class ReturnPanel:
    """Simple returns r_t = P_t / P_{t-1} - 1; dates are the return dates."""

    dates: tuple[date, ...]
    tickers: tuple[str, ...]
    values: np.ndarray  # shape (len(dates), len(tickers))

    def column(self, ticker: str) -> np.ndarray:
        return self.values[:, self.tickers.index(ticker)]


@dataclass(frozen=True)
class MembershipMask:
    """Dated index-membership intervals per ticker (inclusive bounds)."""

    entries: tuple[tuple[str, date, date], ...]
    _by_ticker: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        by_ticker: dict[str, list[tuple[date, date]]] = {}
        for ticker, start, end in self.entries:
            if start > end:
                raise ValueError(f"membership interval for {ticker} has start > end")
            by_ticker.setdefault(ticker, []).append((start, end))
        for ticker, spans in by_ticker.items():
            spans.sort()
            for (_, e1), (s2, _) in zip(spans, spans[1:]):
                if s2 <= e1:
                    raise ValueError(f"overlapping membership intervals for {ticker}")
        object.__setattr__(self, "_by_ticker", by_ticker)

    def is_member(self, ticker: str, d: date) -> bool:
        return any(s <= d <= e for s, e in self._by_ticker.get(ticker, ()))

    def members(self, tickers, d: date) -> list[str]:
        return [t for t in tickers if self.is_member(t, d)]


@dataclass(frozen=True)
class RateSeries:
    """Dated nonnegative decimal rates (annualized fractions)."""

    dates: tuple[date, ...]
    values: np.ndarray
    kind: str = ""

    def __post_init__(self) -> None:
        if len(self.dates) != len(self.values):
            raise ValueError("rate series dates/values length mismatch")
        if len(self.dates) == 0:
            raise ValueError("empty rate series")
        ords = [d.toordinal() for d in self.dates]
        if any(b <= a for a, b in zip(ords, ords[1:])):
            raise ValueError("rate series dates must be strictly increasing")
        if np.any(self.values < 0):
            raise ValueError("rates must be nonnegative")

    def align(self, calendar: TradingCalendar) -> "RateSeries":
        """Project onto a calendar, carrying the last observation forward.

        Calendar dates before the first observation take the first observed
        value (rates are slow-moving; a short leading backfill beats
        dropping trading days).
        """
        obs = np.array([d.toordinal() for d in self.dates], dtype=np.int64)
        idx = np.searchsorted(obs, calendar._ordinals, side="right") - 1
        idx = np.clip(idx, 0, len(self.values) - 1)
        return RateSeries(dates=calendar.dates, values=self.values[idx], kind=self.kind)


def _read_csv(path, expected_columns: tuple[str, ...]) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        raise ValueError(f"empty input file: {path}") from None
    if tuple(frame.columns) != expected_columns:
        raise ValueError(
            f"{path}: expected header {','.join(expected_columns)}, got {','.join(map(str, frame.columns))}"
        )
    if len(frame) == 0:
        raise ValueError(f"no data rows in {path}")
    return frame


def _parse_dates(raw: pd.Series, path) -> pd.Series:
    parsed = pd.to_datetime(raw, format="%Y-%m-%d", errors="coerce")
    if parsed.isna().any():
        bad = raw[parsed.isna()].iloc[0]
        raise ValueError(f"{path}: malformed date {bad!r} (expected ISO-8601)")
    return parsed.dt.date


def load_prices(path) -> PricePanel:
    """Load a long-format ``date,ticker,close`` CSV into a price panel."""
    frame = _read_csv(path, ("date", "ticker", "close"))
    frame = frame.assign(date=_parse_dates(frame["date"], path))
    close = pd.to_numeric(frame["close"], errors="coerce")
    if close.isna().any():
        bad = frame.loc[close.isna()].iloc[0]
        raise ValueError(f"{path}: malformed close {bad['close']!r} for {bad['ticker']} on {bad['date']}")
    if (close <= 0).any():
        bad = frame.loc[close <= 0].iloc[0]
        raise ValueError(f"{path}: non-positive close for {bad['ticker']} on {bad['date']}")
    dup = frame.duplicated(subset=["date", "ticker"])
    if dup.any():
        bad = frame.loc[dup].iloc[0]
        raise ValueError(f"{path}: duplicate date {bad['date']} for ticker {bad['ticker']}")
    wide = frame.assign(close=close).pivot(index="date", columns="ticker", values="close").sort_index()
    dates = tuple(wide.index)
    tickers = tuple(str(t) for t in wide.columns)
    return PricePanel(dates=dates, tickers=tickers, prices=wide.to_numpy(dtype=float))


def load_membership(path, tickers=None) -> MembershipMask:
    """Load ``ticker,start_date,end_date`` membership intervals.

    If ``tickers`` is given, intervals referencing unknown tickers produce a
    warning but are retained.
    """
    frame = _read_csv(path, ("ticker", "start_date", "end_date"))
    starts = _parse_dates(frame["start_date"], path)
    ends = _parse_dates(frame["end_date"], path)
    entries = tuple(zip((str(t) for t in frame["ticker"]), starts, ends))
    if tickers is not None:
        known = set(tickers)
        unknown = sorted({t for t, _, _ in entries if t not in known})
        if unknown:
            warnings.warn(f"membership mask references tickers absent from the price panel: {unknown}")
    return MembershipMask(entries=entries)


def load_rate_series(path, kind: str) -> RateSeries:
    """Load a ``date,value`` CSV of percent quotes into decimal fractions.

    ``kind`` is one of ``vix``, ``irx``, ``tnx``. Tiny negative quotes
    (> -0.5 percentage points, seen around zero-rate regimes) are clamped to
    zero with a warning; larger negatives are rejected.
    """
    if kind not in ("vix", "irx", "tnx"):
        raise ValueError(f"unknown rate series kind: {kind!r}")
    frame = _read_csv(path, ("date", "value"))
    dates = tuple(_parse_dates(frame["date"], path))
    raw = pd.to_numeric(frame["value"], errors="coerce")
    if raw.isna().any():
        bad = frame.loc[raw.isna()].iloc[0]
        raise ValueError(f"{path}: malformed value {bad['value']!r} on {bad['date']}")
    values = raw.to_numpy(dtype=float) / 100.0
    if np.any(values < -0.005):
        raise ValueError(f"{path}: {kind} quote below -0.5% looks corrupt")
    if np.any(values < 0):
        warnings.warn(f"{path}: clamping small negative {kind} quotes to zero")
        values = np.maximum(values, 0.0)
    return RateSeries(dates=dates, values=values, kind=kind)


def to_returns(panel: PricePanel) -> ReturnPanel:
    """Per-asset simple returns; output has one fewer date than the panel."""
    if len(panel.dates) < 2:
        raise ValueError("need at least two dates to compute returns")
    values = panel.prices[1:] / panel.prices[:-1] - 1.0
    return ReturnPanel(dates=panel.dates[1:], tickers=panel.tickers, values=values)


def daily_risk_free(annualized: float) -> float:
    """Daily compounding rate equivalent to an annualized rate.

    (1 + r)^(1/252) - 1, so compounding 252 times recovers 1 + r.
    """
    if annualized < -1.0:
        raise ValueError("annualized rate below -100%")
    return math.pow(1.0 + annualized, 1.0 / TRADING_DAYS_PER_YEAR) - 1.0


def third_friday(year: int, month: int) -> date:
    """Third Friday of the month (monthly option expiration)."""
    d15 = date(year, month, 15)
    return d15 + timedelta(days=(4 - d15.weekday()) % 7)


def _last_weekday(year: int, month: int) -> date:
    if month == 12:
        d = date(year, 12, 31)
    else:
        d = date(year, month + 1, 1) - timedelta(days=1)
    while d.weekday() >= 5:
        d -= timedelta(days=1)
    return d


def last_business_day(calendar: TradingCalendar, year: int, month: int) -> date:
    """Last trading date of the month (end-of-month option expiration).

    Uses the calendar when it fully covers the month; for months at or past
    the calendar's end it falls back to the last weekday.
    """
    month_start = date(year, month, 1)
    next_month = date(year + 1, 1, 1) if month == 12 else date(year, month + 1, 1)
    if calendar.dates[-1] >= next_month and calendar.dates[0] < next_month:
        i = calendar.position_at_or_before(next_month - timedelta(days=1))
        if i is not None and calendar.dates[i] >= month_start:
            return calendar.dates[i]
    return _last_weekday(year, month)


def next_expiration(calendar: TradingCalendar, t: date, min_days: int) -> date:
    """Earliest monthly/EOM expiry at least ``min_days`` calendar days out."""
    if min_days < 0:
        raise ValueError("min_days must be nonnegative")
    year, month = t.year, t.month
    for _ in range(15):
        candidates = [third_friday(year, month), last_business_day(calendar, year, month)]
        eligible = [c for c in candidates if (c - t).days >= min_days]
        if eligible:
            return min(eligible)
        year, month = (year + 1, 1) if month == 12 else (year, month + 1)
    raise RuntimeError(f"no option expiration at least {min_days} days after {t}")
