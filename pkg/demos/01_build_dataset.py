"""Build the demo market dataset.

Writes prices.csv, membership.csv, vix.csv, irx.csv and tnx.csv into
demos/data/. The trading calendar is the real exchange calendar (weekday
grid minus holiday-rule closures, including the special closures in
December 2018 and January 2025); prices are a seeded synthetic market with
calm and crisis regimes, so momentum and volatility triggers all fire
somewhere in the sample.
"""

from datetime import date

from _common import DATA_DIR, ensure_dataset

from ssdfolio.market_data import load_prices

ensure_dataset()
panel = load_prices(DATA_DIR / "prices.csv")

print(f"dataset in {DATA_DIR}")
print(f"trading dates: {len(panel.dates)}  ({panel.dates[0]} .. {panel.dates[-1]})")
print(f"tickers: {', '.join(panel.tickers)}")

# the window of the first 201 prices ends on the first rebalance date
print(f"201st trading date: {panel.dates[200]}")
assert panel.dates[200] == date(2018, 1, 2)
