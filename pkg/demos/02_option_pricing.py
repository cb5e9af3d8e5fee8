"""Price index options and pick strikes by moneyness target.

Walks through the pricing layer: closed-form call/put values, put-call
parity, forward levels, the moneyness percentage, and strike selection on
the 5-point grid.
"""

import math
from datetime import date, timedelta

from ssdfolio.pricing import (
    MarketSnapshot,
    OptionSpec,
    classify,
    forward_price,
    moneyness_pct,
    price,
    strike_for_target,
)

today = date(2024, 6, 3)
snap = MarketSnapshot(t=today, underlying=5300.0, vol=0.13, rate=0.052)

# a one-month at-the-money pair
expiry = today + timedelta(days=29)
lifetime = 29 / 365
fwd = forward_price(snap, lifetime)
print(f"underlying {snap.underlying:.1f}, forward over 29 days {fwd:.2f}")

atm = strike_for_target("put", fwd, 0.0)
print(f"at-the-money strike on the 5-point grid: {atm:.0f}")

call = price(OptionSpec("call", atm, expiry), snap)
put = price(OptionSpec("put", atm, expiry), snap)
print(f"call {call:.2f}  put {put:.2f}")
parity_gap = call - put - (snap.underlying - atm * math.exp(-snap.rate * lifetime))
print(f"put-call parity residual: {parity_gap:.2e}")

# a 3% out-of-the-money put, the workhorse of the hedging strategies
otm_strike = strike_for_target("put", fwd, 3.0)
otm_put = price(OptionSpec("put", otm_strike, expiry), snap)
print(f"3% OTM put: strike {otm_strike:.0f}, price {otm_put:.2f}, "
      f"moneyness {moneyness_pct(fwd, otm_strike):.2f}% ({classify('put', fwd, otm_strike)})")
