"""European index option pricing and moneyness utilities.

Prices calls and puts on a non-dividend-paying index with the
Black-Scholes-Merton closed form. Time to expiry is measured in calendar
days / 365 (options keep accruing time over weekends). Degenerate inputs
(zero volatility or zero lifetime) fall back to the no-arbitrage intrinsic
limit instead of producing NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date

DAYS_PER_YEAR = 365.0
STRIKE_GRID = 5.0
ATM_BAND_PCT = 0.1  # |F - E|/F below 0.1% reports ATM; reporting only

CALL = "call"
PUT = "put"


@dataclass(frozen=True)
class OptionSpec:
    """One European index option: kind, exercise price, expiry date."""

    kind: str
    exercise: float
    expiry: date

    def __post_init__(self) -> None:
        if self.kind not in (CALL, PUT):
            raise ValueError(f"option kind must be 'call' or 'put', got {self.kind!r}")
        if self.exercise <= 0:
            raise ValueError("exercise price must be positive")


@dataclass(frozen=True)
class MarketSnapshot:
    """Market state used to price an option on a given date.

    ``vol`` is the annualized implied volatility as a fraction and ``rate``
    the annualized risk-free rate as a fraction.
    """

    t: date
    underlying: float
    vol: float
    rate: float

    def __post_init__(self) -> None:
        if self.underlying <= 0:
            raise ValueError("underlying level must be positive")
        if self.vol < 0:
            raise ValueError("volatility must be nonnegative")

    def years_to(self, expiry: date) -> float:
        return (expiry - self.t).days / DAYS_PER_YEAR


def norm_cdf(x: float) -> float:
    """Standard normal cumulative distribution function."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def price(option: OptionSpec, mkt: MarketSnapshot) -> float:
    """Black-Scholes price of a European call or put.

    At zero lifetime the intrinsic value is returned; at zero volatility the
    discounted-strike intrinsic limit (so put-call parity holds everywhere).
    """
    lifetime = mkt.years_to(option.expiry)
    if lifetime < 0:
        raise ValueError(f"option expired {option.expiry}, priced at {mkt.t}")
    u, e, r, sigma = mkt.underlying, option.exercise, mkt.rate, mkt.vol
    if lifetime == 0.0:
        return max(0.0, u - e) if option.kind == CALL else max(0.0, e - u)
    discounted = e * math.exp(-r * lifetime)
    if sigma == 0.0:
        return max(0.0, u - discounted) if option.kind == CALL else max(0.0, discounted - u)
    sqrt_l = math.sqrt(lifetime)
    d1 = (math.log(u / e) + (r + 0.5 * sigma * sigma) * lifetime) / (sigma * sqrt_l)
    d2 = d1 - sigma * sqrt_l
    if option.kind == CALL:
        return u * norm_cdf(d1) - discounted * norm_cdf(d2)
    return discounted * norm_cdf(-d2) - u * norm_cdf(-d1)


def d1_d2(option: OptionSpec, mkt: MarketSnapshot) -> tuple[float, float]:
    """The two normal quantile arguments of the closed form (diagnostics)."""
    lifetime = mkt.years_to(option.expiry)
    if lifetime <= 0 or mkt.vol <= 0:
        return (math.inf, math.inf) if mkt.underlying >= option.exercise else (-math.inf, -math.inf)
    sqrt_l = math.sqrt(lifetime)
    d1 = (math.log(mkt.underlying / option.exercise) + (mkt.rate + 0.5 * mkt.vol**2) * lifetime) / (mkt.vol * sqrt_l)
    return d1, d1 - mkt.vol * sqrt_l


def forward_price(mkt: MarketSnapshot, lifetime_years: float) -> float:
    """Forward index level U * e^(r L) under no dividends."""
    if lifetime_years < 0:
        raise ValueError("lifetime must be nonnegative")
    return mkt.underlying * math.exp(mkt.rate * lifetime_years)


def moneyness_pct(forward: float, exercise: float) -> float:
    """Moneyness as a percent distance: 100 |F - E| / F."""
    if forward <= 0:
        raise ValueError("forward level must be positive")
    return 100.0 * abs(forward - exercise) / forward


ATM, ITM, OTM = "ATM", "ITM", "OTM"


def classify(kind: str, forward: float, exercise: float) -> str:
    """At/in/out-of-the-money label for reporting.

    Calls are ITM when E < F, puts when E > F; within the practical ATM band
    the label is ATM. Never used by strategy logic, which works with exact
    moneyness targets.
    """
    if forward <= 0 or exercise <= 0:
        raise ValueError("forward and exercise must be positive")
    if moneyness_pct(forward, exercise) < ATM_BAND_PCT:
        return ATM
    if kind == CALL:
        return ITM if exercise < forward else OTM
    if kind == PUT:
        return ITM if exercise > forward else OTM
    raise ValueError(f"unknown option kind {kind!r}")


def _round_to_grid(level: float) -> float:
    # round half away from zero onto the 5-point strike grid
    return math.floor(level / STRIKE_GRID + 0.5) * STRIKE_GRID


def strike_for_target(kind: str, forward: float, target_pct: float) -> float:
    """Exercise price hitting a percent-OTM moneyness target.

    ``target_pct = 0`` selects the ATM strike. OTM targets sit below the
    forward for puts and above it for calls. Index strikes only exist on
    integer multiples of 5, so the raw level is rounded to that grid.
    """
    if forward <= 0:
        raise ValueError("forward level must be positive")
    if target_pct < 0:
        raise ValueError("moneyness target must be nonnegative")
    if kind == PUT:
        raw = forward * (1.0 - target_pct / 100.0)
    elif kind == CALL:
        raw = forward * (1.0 + target_pct / 100.0)
    else:
        raise ValueError(f"unknown option kind {kind!r}")
    return _round_to_grid(raw)
