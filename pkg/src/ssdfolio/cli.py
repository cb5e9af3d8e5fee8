"""Command-line front end.

Subcommands: ``price``, ``simulate-strategy``, ``optimize``, ``backtest``,
``stats``. All outputs are deterministic CSV with a header row and floats at
ten significant digits, so repeated runs diff byte-identically. The default
data directory can be set with the ``SSDFOLIO_DATA_DIR`` environment
variable; an optional flat ``key=value`` config file supplies flag defaults
(explicit flags win). Plot rendering is out of scope: the backtest emits
tidy CSVs (cumulative path, option weights) for any plotting tool.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from . import analytics
from .backtest import (
    RISK_FREE_ASSET,
    BacktestConfig,
    MarketData,
    buy_and_hold_values,
    run,
    scenario_at,
    simulate_strategies,
)
from .lp import to_lp_text
from .market_data import ETF_TICKER, daily_risk_free
from .pricing import MarketSnapshot, OptionSpec, d1_d2, price
from .ssd import GROUP_RISK_FREE, GroupBound, build_master, compute_tau, master_variable_names, optimize
from .strategy import load_strategy_configs, standard_strategies, write_valuation_csv

DATA_DIR_ENV = "SSDFOLIO_DATA_DIR"


class _OutputTracker:
    """Remove partial outputs when a command fails midway."""

    def __init__(self) -> None:
        self.paths: list[Path] = []

    def register(self, path) -> Path:
        path = Path(path)
        self.paths.append(path)
        return path

    def cleanup(self) -> None:
        for path in self.paths:
            try:
                path.unlink(missing_ok=True)
            except OSError:
                pass


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _write_csv(tracker: _OutputTracker, path, header, rows) -> None:
    path = tracker.register(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def _load_config_file(path) -> dict[str, str]:
    values: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line without '=': {line!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _fill_defaults(args: argparse.Namespace) -> argparse.Namespace:
    cfg = _load_config_file(args.config) if getattr(args, "config", None) else {}
    for key, value in cfg.items():
        if getattr(args, key, None) is None and hasattr(args, key):
            setattr(args, key, value)
    if getattr(args, "data_dir", None) is None:
        args.data_dir = os.environ.get(DATA_DIR_ENV)
    return args


def _require(value, flag: str):
    if value is None:
        raise SystemExit(f"error: missing required option {flag}")
    return value


def _strategies_from(args):
    if getattr(args, "strategies", None):
        return load_strategy_configs(args.strategies)
    return standard_strategies()


def _backtest_config(args) -> BacktestConfig:
    return BacktestConfig(
        lookback_prices=int(args.lookback if args.lookback is not None else 201),
        rebalance_every=int(args.rebalance_every if args.rebalance_every is not None else 21),
        oos_hold=int(args.oos_hold if args.oos_hold is not None else 20),
        riskfree_cap=float(args.riskfree_cap if args.riskfree_cap is not None else 0.10),
        scaled=not bool(args.unscaled),
        universe=args.universe if args.universe is not None else "equities",
        include_options=not bool(args.no_options),
        solver=args.solver if args.solver is not None else "reference",
        lp_tol=float(args.lp_tol if args.lp_tol is not None else 1e-8),
        jobs=int(args.jobs if args.jobs is not None else 1),
    )


def cmd_price(args, tracker: _OutputTracker) -> int:
    anchor = date(2000, 1, 3)
    option = OptionSpec(kind=args.kind, exercise=float(args.e), expiry=anchor + timedelta(days=int(args.days)))
    snap = MarketSnapshot(t=anchor, underlying=float(args.u), vol=float(args.vol), rate=float(args.r))
    value = price(option, snap)
    d1, d2 = d1_d2(option, snap)
    print(f"price = {_fmt(value)}")
    print(f"d1 = {_fmt(d1)}")
    print(f"d2 = {_fmt(d2)}")
    return 0


def cmd_simulate(args, tracker: _OutputTracker) -> int:
    data = MarketData.load(_require(args.data_dir, "--data-dir"))
    configs = _strategies_from(args)
    out_dir = Path(_require(args.out_dir, "--out-dir"))
    out_dir.mkdir(parents=True, exist_ok=True)
    series = simulate_strategies(configs, data.history(), jobs=int(args.jobs or 1))
    for name, valuation in series.items():
        path = tracker.register(out_dir / f"{name}.csv")
        write_valuation_csv(valuation, path)
        n_trades = sum(1 for ev in valuation.trade_log)
        print(f"{name}: final valuation {_fmt(valuation.valuations[-1])}, {n_trades} trade events")
    return 0


def cmd_optimize(args, tracker: _OutputTracker) -> int:
    data = MarketData.load(_require(args.data_dir, "--data-dir"))
    config = _backtest_config(args)
    strategies = list(_strategies_from(args)) if config.include_options else []
    series = simulate_strategies(strategies, data.history(), jobs=config.jobs)
    dates = data.panel.dates
    if args.asof is not None:
        asof = date.fromisoformat(args.asof)
        i = data.panel.calendar.position(asof)
    else:
        i = len(dates) - 1
    scen, assets, excluded = scenario_at(data, strategies, series, i, config)
    bounds = (GroupBound(GROUP_RISK_FREE, 0.0, config.riskfree_cap),)
    solution = optimize(scen, scaled=config.scaled, bounds=bounds, solver=config.solver, lp_tol=config.lp_tol)

    out_dir = Path(_require(args.out_dir, "--out-dir"))
    rows = [
        (dates[i].isoformat(), asset, _fmt(w))
        for asset, w in zip(assets, solution.weights)
        if w > 1e-12
    ]
    _write_csv(tracker, out_dir / "weights.csv", ("rebalance_date", "asset", "weight"), rows)
    if args.dump_lp:
        tau = compute_tau(scen.index_returns)
        problem = build_master(scen, solution.cut_set, tau, scaled=config.scaled, bounds=bounds)
        path = tracker.register(Path(args.dump_lp))
        path.write_text(to_lp_text(problem, master_variable_names(scen), name="ssd_master"))
    print(f"asof = {dates[i].isoformat()}")
    print(f"objective = {_fmt(solution.objective)}")
    print(f"iterations = {solution.iterations}")
    print(f"cuts = {len(solution.cut_set)}")
    print(f"assets with weight = {len(rows)}")
    if excluded:
        print(f"excluded strategies = {','.join(excluded)}")
    return 0


def cmd_backtest(args, tracker: _OutputTracker) -> int:
    data = MarketData.load(_require(args.data_dir, "--data-dir"))
    config = _backtest_config(args)
    strategies = _strategies_from(args)
    result = run(data, strategies, config)
    out_dir = Path(_require(args.out_dir, "--out-dir"))

    _write_csv(
        tracker,
        out_dir / "oos_returns.csv",
        ("date", "return", "value"),
        (
            (d.isoformat(), _fmt(r), _fmt(v))
            for d, r, v in zip(result.dates, result.oos_returns, result.oos_values)
        ),
    )
    _write_csv(
        tracker,
        out_dir / "weights.csv",
        ("rebalance_date", "asset", "weight"),
        ((d.isoformat(), a, _fmt(w)) for d, a, w in result.weights_log),
    )
    _write_csv(
        tracker,
        out_dir / "exclusions.csv",
        ("rebalance_date", "strategy"),
        ((d.isoformat(), s) for d, s in result.excluded_log),
    )
    names = [c.name for c in strategies]
    _write_csv(
        tracker,
        out_dir / "option_weight.csv",
        ("rebalance_date", "total_option_weight"),
        ((d.isoformat(), _fmt(w)) for d, w in result.option_weight_by_rebalance(names)),
    )

    start_date = data.panel.dates[data.panel.calendar.position(result.dates[0]) - 1]
    cumulative_rows = [(start_date.isoformat(), _fmt(1.0), _fmt(1.0))]
    cumulative_rows += [
        (d.isoformat(), _fmt(v), _fmt(b))
        for d, v, b in zip(result.dates, result.oos_values, result.index_values)
    ]
    _write_csv(tracker, out_dir / "cumulative.csv", ("date", "portfolio", "index"), cumulative_rows)

    rf_daily = _tnx_daily(data, result)
    reports = {"ssd_portfolio": analytics.perf_report(np.concatenate([[1.0], result.oos_values]), rf_daily)}
    reports["SP500"] = analytics.perf_report(np.concatenate([[1.0], result.index_values]), rf_daily)
    if data.panel.has_ticker(ETF_TICKER):
        spy = buy_and_hold_values(data.panel, ETF_TICKER, result.dates)
        reports[ETF_TICKER] = analytics.perf_report(np.concatenate([[1.0], spy]), rf_daily)
    _write_csv(
        tracker,
        out_dir / "report.csv",
        analytics.REPORT_COLUMNS,
        ((name, *report.row()) for name, report in reports.items()),
    )
    print(f"rebalances = {len(result.rebalance_dates)}")
    print(f"first rebalance = {result.rebalance_dates[0].isoformat()}")
    print(f"oos days = {len(result.dates)}")
    for name, report in reports.items():
        print(
            f"{name}: fv={_fmt(report.fv)} cagr={_fmt(report.cagr)} "
            f"sharpe={report.row()[2]} sortino={report.row()[3]} "
            f"cvar={_fmt(report.cvar5)} vol={_fmt(report.vol)} mdd={_fmt(report.mdd)}"
        )
    return 0


def _tnx_daily(data: MarketData, result) -> np.ndarray:
    if data.tnx is None:
        return np.zeros(len(result.dates))
    aligned = data.tnx.align(data.panel.calendar)
    lookup = {d: v for d, v in zip(aligned.dates, aligned.values)}
    return np.array([daily_risk_free(float(lookup[d])) for d in result.dates])


def cmd_stats(args, tracker: _OutputTracker) -> int:
    path = Path(_require(args.returns, "--returns"))
    if not path.exists():
        raise FileNotFoundError(f"returns file not found: {path}")
    returns = []
    with path.open(newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or "return" not in reader.fieldnames:
            raise ValueError(f"{path}: need a 'return' column")
        for row in reader:
            if row["return"] != "":
                returns.append(float(row["return"]))
    if len(returns) < 2:
        raise ValueError("need at least two returns")
    values = np.concatenate([[1.0], np.cumprod(1.0 + np.array(returns))])
    report = analytics.perf_report(values)
    for key, value in zip(analytics.REPORT_COLUMNS[1:], report.row()):
        print(f"{key} = {value}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssdfolio", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_price = sub.add_parser("price", help="price one European index option")
    p_price.add_argument("--kind", required=True, choices=["call", "put"])
    p_price.add_argument("--u", required=True, type=float, help="underlying index level")
    p_price.add_argument("--e", required=True, type=float, help="exercise price")
    p_price.add_argument("--vol", required=True, type=float, help="annualized volatility fraction")
    p_price.add_argument("--r", required=True, type=float, help="annualized risk-free rate fraction")
    p_price.add_argument("--days", required=True, type=int, help="calendar days to expiry")
    p_price.set_defaults(func=cmd_price)

    def common(p, with_out=True):
        p.add_argument("--config", help="flat key=value defaults file (flags win)")
        p.add_argument("--data-dir", dest="data_dir", help=f"data directory (default ${DATA_DIR_ENV})")
        if with_out:
            p.add_argument("--out-dir", dest="out_dir", help="output directory")
        p.add_argument("--strategies", help="strategy definitions CSV (default: the 12 standard strategies)")
        p.add_argument("--jobs", type=int, help="parallel workers (default 1)")

    p_sim = sub.add_parser("simulate-strategy", help="simulate option strategies into valuation CSVs")
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    def opt_flags(p):
        p.add_argument("--universe", choices=["equities", "spy_only"])
        p.add_argument("--no-options", dest="no_options", action="store_true")
        p.add_argument("--unscaled", action="store_true")
        p.add_argument("--lookback", type=int, help="in-sample price count (default 201)")
        p.add_argument("--riskfree-cap", dest="riskfree_cap", type=float, help="max risk-free weight (default 0.10)")
        p.add_argument("--solver", choices=["reference", "scipy"])
        p.add_argument("--lp-tol", dest="lp_tol", type=float, help="LP tolerance (default 1e-8)")

    p_opt = sub.add_parser("optimize", help="choose one portfolio on a trailing window")
    common(p_opt)
    opt_flags(p_opt)
    p_opt.add_argument("--asof", help="rebalance date (default: last date)")
    p_opt.add_argument("--rebalance-every", dest="rebalance_every", type=int, help=argparse.SUPPRESS)
    p_opt.add_argument("--oos-hold", dest="oos_hold", type=int, help=argparse.SUPPRESS)
    p_opt.add_argument("--dump-lp", dest="dump_lp", help="write the final master in LP text format")
    p_opt.set_defaults(func=cmd_optimize)

    p_bt = sub.add_parser("backtest", help="rolling-window backtest with performance report")
    common(p_bt)
    opt_flags(p_bt)
    p_bt.add_argument("--rebalance-every", dest="rebalance_every", type=int, help="trading days between rebalances (default 21)")
    p_bt.add_argument("--oos-hold", dest="oos_hold", type=int, help="nominal hold horizon in trading days (default 20)")
    p_bt.set_defaults(func=cmd_backtest)

    p_stats = sub.add_parser("stats", help="performance report for a daily return CSV")
    p_stats.add_argument("--returns", required=True, help="CSV with a 'return' column")
    p_stats.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args = _fill_defaults(args)
    tracker = _OutputTracker()
    try:
        return args.func(args, tracker)
    except (ValueError, FileNotFoundError, RuntimeError, KeyError) as err:
        tracker.cleanup()
        print(f"error: {err}", file=sys.stderr)
        return 1
    except SystemExit as err:
        tracker.cleanup()
        if isinstance(err.code, str):
            print(err.code, file=sys.stderr)
            return 1
        raise


if __name__ == "__main__":
    raise SystemExit(main())
