"""Rolling-window backtest with and without option strategies.

Runs the full protocol twice on the demo dataset (201-price lookback,
rebalance every 21 trading days, at most 10% in cash) and compares the
out-of-sample statistics. Expect a few minutes of solver time for the two
runs; pass a smaller dataset through demos/_common.py to go faster.
"""

import numpy as np

from _common import DATA_DIR, ensure_dataset

from ssdfolio.analytics import REPORT_COLUMNS, perf_report
from ssdfolio.backtest import BacktestConfig, MarketData, buy_and_hold_values, run
from ssdfolio.strategy import standard_strategies

ensure_dataset()
data = MarketData.load(DATA_DIR)
strategies = standard_strategies()

results = {}
for label, include_options in (("equities + options", True), ("equities only", False)):
    config = BacktestConfig(include_options=include_options)
    results[label] = run(data, strategies, config)
    print(f"{label}: {len(results[label].rebalance_dates)} rebalances, "
          f"first {results[label].rebalance_dates[0]}")

reference = results["equities + options"]
paths = {label: np.concatenate([[1.0], r.oos_values]) for label, r in results.items()}
paths["index"] = np.concatenate([[1.0], reference.index_values])
paths["etf"] = np.concatenate([[1.0], buy_and_hold_values(data.panel, "SPY", reference.dates)])

print()
print(f"{'series':<20}" + "".join(f"{c:>10}" for c in REPORT_COLUMNS[1:]))
for label, values in paths.items():
    report = perf_report(values)
    print(f"{label:<20}" + "".join(f"{v:>10}" for v in report.row()))

option_weight = reference.option_weight_by_rebalance([c.name for c in strategies])
heaviest = max(option_weight, key=lambda p: p[1])
print(f"\npeak option-strategy allocation: {heaviest[1]:.1%} on {heaviest[0]}")
