"""Option pricing tests against numerical-integration oracles."""

import math
from datetime import date, timedelta

import numpy as np
import pytest
from scipy.integrate import quad

from ssdfolio.pricing import (
    ATM,
    ITM,
    OTM,
    MarketSnapshot,
    OptionSpec,
    classify,
    forward_price,
    moneyness_pct,
    norm_cdf,
    price,
    strike_for_target,
)

T0 = date(2020, 6, 1)


def snap(u=100.0, vol=0.2, rate=0.0, t=T0):
    return MarketSnapshot(t=t, underlying=u, vol=vol, rate=rate)


def option(kind, e, days):
    return OptionSpec(kind=kind, exercise=e, expiry=T0 + timedelta(days=days))


def quad_price(kind, u, e, r, sigma, lifetime):
    """Oracle: discounted risk-neutral expectation of the payoff, by
    quadrature over the lognormal terminal distribution."""

    def integrand(z):
        terminal = u * math.exp((r - 0.5 * sigma**2) * lifetime + sigma * math.sqrt(lifetime) * z)
        payoff = max(terminal - e, 0.0) if kind == "call" else max(e - terminal, 0.0)
        return payoff * math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)

    kink = (math.log(e / u) - (r - 0.5 * sigma**2) * lifetime) / (sigma * math.sqrt(lifetime))
    points = [kink] if -12 < kink < 12 else None
    value, _ = quad(integrand, -12, 12, points=points, limit=400, epsabs=1e-12, epsrel=1e-12)
    return math.exp(-r * lifetime) * value


class TestNormCdf:
    def test_symmetry_at_zero(self):
        assert norm_cdf(0.0) == pytest.approx(0.5, abs=1e-15)

    def test_reflection_identity(self):
        for x in np.linspace(-6, 6, 41):
            assert norm_cdf(x) == pytest.approx(1.0 - norm_cdf(-x), abs=1e-14)

    def test_against_density_integration(self):
        def density(z):
            return math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)

        for x in (-2.5, -1.0, 0.3, 1.0, 2.0):
            expected, _ = quad(density, -12, x, epsabs=1e-14, limit=300)
            assert norm_cdf(x) == pytest.approx(expected, abs=1e-12)
        assert norm_cdf(1.0) == pytest.approx(0.8413447461, abs=1e-10)

    def test_monotone_and_bounded(self):
        xs = np.linspace(-9, 9, 200)
        values = [norm_cdf(x) for x in xs]
        assert all(0.0 <= v <= 1.0 for v in values)
        assert all(b >= a for a, b in zip(values, values[1:]))


class TestPrice:
    def test_vanishing_vol_deep_itm_call(self):
        value = price(option("call", 50, 365), snap(u=100, vol=1e-9, rate=0.0))
        assert value == pytest.approx(50.0, abs=1e-6)

    def test_atm_call_matches_quadrature(self):
        value = price(option("call", 100, 365), snap(u=100, vol=0.2, rate=0.05))
        assert value == pytest.approx(quad_price("call", 100, 100, 0.05, 0.2, 365 / 365), abs=1e-9)

    def test_put_matches_quadrature(self):
        value = price(option("put", 95, 180), snap(u=100, vol=0.35, rate=0.02))
        assert value == pytest.approx(quad_price("put", 100, 95, 0.02, 0.35, 180 / 365), abs=1e-9)

    def test_put_call_parity_randomized(self):
        rng = np.random.default_rng(17)
        for _ in range(300):
            u = rng.uniform(50, 5000)
            e = u * rng.uniform(0.5, 1.5)
            r = rng.uniform(0.0, 0.10)
            sigma = rng.uniform(0.01, 1.0)
            days = int(rng.integers(1, 730))
            s = snap(u=u, vol=sigma, rate=r)
            lifetime = days / 365
            call = price(option("call", e, days), s)
            put = price(option("put", e, days), s)
            assert call - put == pytest.approx(u - e * math.exp(-r * lifetime), abs=1e-10 * max(1, u))

    def test_call_decreasing_put_increasing_in_strike(self):
        s = snap(u=100, vol=0.25, rate=0.03)
        strikes = np.linspace(60, 140, 33)
        calls = [price(option("call", e, 365), s) for e in strikes]
        puts = [price(option("put", e, 365), s) for e in strikes]
        assert all(b <= a + 1e-12 for a, b in zip(calls, calls[1:]))
        assert all(b >= a - 1e-12 for a, b in zip(puts, puts[1:]))

    def test_price_bounds(self):
        rng = np.random.default_rng(23)
        for _ in range(200):
            u = rng.uniform(10, 1000)
            e = u * rng.uniform(0.4, 1.8)
            r = rng.uniform(0, 0.08)
            sigma = rng.uniform(0.01, 0.9)
            days = int(rng.integers(1, 1000))
            s = snap(u=u, vol=sigma, rate=r)
            call = price(option("call", e, days), s)
            put = price(option("put", e, days), s)
            assert -1e-12 <= call <= u + 1e-9
            assert -1e-12 <= put <= e * math.exp(-r * days / 365) + 1e-9

    def test_intrinsic_limit_as_lifetime_vanishes(self):
        # a lifetime of 1e-8 years is below one day; use day granularity 0
        s = snap(u=110, vol=0.2, rate=0.05)
        assert price(option("call", 100, 0), s) == pytest.approx(10.0, abs=1e-12)
        assert price(option("put", 100, 0), s) == pytest.approx(0.0, abs=1e-12)
        assert price(option("put", 130, 0), s) == pytest.approx(20.0, abs=1e-12)

    def test_short_dated_prices_near_intrinsic(self):
        s = snap(u=110, vol=0.2, rate=0.0)
        assert price(option("call", 100, 1), s) == pytest.approx(10.0, abs=1e-3)

    def test_zero_vol_keeps_parity(self):
        s = snap(u=100, vol=0.0, rate=0.05)
        call = price(option("call", 90, 365), s)
        put = price(option("put", 90, 365), s)
        assert call - put == pytest.approx(100 - 90 * math.exp(-0.05), abs=1e-12)

    def test_expired_option_rejected(self):
        s = MarketSnapshot(t=T0, underlying=100, vol=0.2, rate=0.0)
        with pytest.raises(ValueError, match="expired"):
            price(OptionSpec(kind="call", exercise=100, expiry=T0 - timedelta(days=1)), s)


class TestForwardAndMoneyness:
    def test_zero_rate_forward_is_spot(self):
        assert forward_price(snap(u=123.4, rate=0.0), 1.0) == pytest.approx(123.4)

    def test_zero_lifetime_forward_is_spot(self):
        assert forward_price(snap(u=123.4, rate=0.08), 0.0) == pytest.approx(123.4)

    def test_forward_level_for_29_day_context(self):
        rate = 0.045
        lifetime = 29 / 365
        u = 6379.0 / math.exp(rate * lifetime)
        assert forward_price(snap(u=u, rate=rate), lifetime) == pytest.approx(6379.0, abs=1e-9)

    def test_put_three_percent_itm(self):
        assert moneyness_pct(100.0, 103.0) == pytest.approx(3.0, abs=1e-12)
        assert classify("put", 100.0, 103.0) == ITM
        assert classify("call", 100.0, 103.0) == OTM

    def test_put_otm_quote(self):
        value = moneyness_pct(103.0, 100.0)
        assert value == pytest.approx(100 * 3 / 103, abs=1e-12)
        assert round(value, 2) == 2.91
        assert classify("put", 103.0, 100.0) == OTM

    def test_atm(self):
        assert moneyness_pct(100.0, 100.0) == 0.0
        assert classify("call", 100.0, 100.0) == ATM
        # practical band: within 0.1% still reports ATM
        assert classify("call", 100.0, 100.05) == ATM
        assert classify("call", 100.0, 100.2) == OTM


class TestStrikeSelection:
    def test_put_otm3_on_6379_forward(self):
        assert strike_for_target("put", 6379.0, 3.0) == 6190.0

    def test_atm_rounding(self):
        assert strike_for_target("put", 6002.4, 0.0) == 6000.0
        assert strike_for_target("call", 6002.4, 0.0) == 6000.0

    def test_call_otm3(self):
        assert strike_for_target("call", 1000.0, 3.0) == 1030.0

    def test_half_rounds_away_from_zero(self):
        assert strike_for_target("call", 6187.5, 0.0) == 6190.0
        assert strike_for_target("call", 12.5, 0.0) == 15.0

    def test_always_multiple_of_five(self):
        rng = np.random.default_rng(29)
        for _ in range(500):
            kind = "put" if rng.random() < 0.5 else "call"
            strike = strike_for_target(kind, rng.uniform(10, 9000), rng.uniform(0, 10))
            assert strike % 5 == 0

    def test_matches_rounding_oracle(self):
        rng = np.random.default_rng(31)
        for _ in range(200):
            fwd = rng.uniform(100, 8000)
            target = rng.uniform(0, 5)
            raw = fwd * (1 - target / 100)
            expected = math.floor(raw / 5 + 0.5) * 5
            assert strike_for_target("put", fwd, target) == expected
