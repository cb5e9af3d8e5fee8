"""Simulate the twelve standard option strategies into artificial assets.

Each strategy starts with 1000 in cash and trades index options by its
rules over the full history; the daily valuation path is a long-lived
return series usable exactly like an equity. Valuation CSVs are written
next to the dataset.
"""

from _common import DATA_DIR, ensure_dataset

from ssdfolio.backtest import MarketData
from ssdfolio.strategy import evaluate, standard_strategies, write_valuation_csv

ensure_dataset()
data = MarketData.load(DATA_DIR)
history = data.history()

out_dir = DATA_DIR / "strategy_series"
out_dir.mkdir(exist_ok=True)

print(f"{'strategy':<22}{'final value':>12}{'trades':>8}{'days held':>11}")
for config in standard_strategies():
    series = evaluate(config, history)
    held_days = sum(series.held)
    write_valuation_csv(series, out_dir / f"{config.name}.csv")
    print(f"{config.name:<22}{series.valuations[-1]:>12.1f}{len(series.trade_log):>8}{held_days:>11}")

print(f"\nvaluation series written to {out_dir}")
