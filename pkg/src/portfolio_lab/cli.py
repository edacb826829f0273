"""Command-line front end.

Subcommands: simulate (Monte-Carlo corpus sweep), backtest (price CSV),
dump-graph (NetMod edge/community dumps per window), list-schemes.
Exit codes: 0 ok, 1 validation, 2 usage, 3 runtime.
"""

import argparse
import os
import sys

from .config import load_config
from .data_io import load_prices_csv, prices_to_returns, run_backtest
from .errors import (
    ConfigurationError,
    InsufficientDataError,
    PortfolioLabError,
    PriceTableError,
    UnknownNameError,
)
from .harness import aggregate_runs, generate_trace, run_corpus, run_on_returns, run_seed
from .reports import all_method_ids, method_id, write_all_outputs, write_graph_dumps
from .types import DCCA, DPCCA, PEARSON

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3

_METRIC_FLAG = {"cov": PEARSON, "dcca": DCCA, "dpcca": DPCCA}


def _default_workers():
    env = os.environ.get("PORTFOLIO_LAB_WORKERS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="portfolio-lab",
        description="Monte-Carlo laboratory for portfolio allocation schemes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, prices_required=False, with_workers=False):
        p.add_argument("--config", metavar="PATH", help="scenario config file (INI)")
        p.add_argument("--out", metavar="DIR", required=True, help="output directory")
        p.add_argument("--seed", type=int, metavar="U64", help="override master seed")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="SECTION.KEY=VALUE",
            help="override a config value (repeatable)",
        )
        if with_workers:
            p.add_argument(
                "--workers",
                type=int,
                default=_default_workers(),
                metavar="K",
                help="worker processes (default: $PORTFOLIO_LAB_WORKERS or 1)",
            )
        if prices_required is not None:
            p.add_argument(
                "--prices",
                metavar="PATH",
                required=prices_required,
                help="historical price CSV (Date column + one column per ticker)",
            )

    sim = sub.add_parser("simulate", help="run the Monte-Carlo corpus for each method")
    common(sim, prices_required=None, with_workers=True)

    back = sub.add_parser("backtest", help="run the pipeline over a historical price CSV")
    common(back, prices_required=True)

    dump = sub.add_parser(
        "dump-graph", help="dump NetMod threshold graphs and communities per window"
    )
    common(dump, prices_required=False)
    dump.add_argument(
        "--metric",
        choices=sorted(_METRIC_FLAG),
        default="cov",
        help="correlation metric for the graph (default: cov)",
    )

    sub.add_parser("list-schemes", help="print the ten method identifiers")
    return parser


def _progress(label):
    def report(done, total):
        sys.stderr.write(f"\r{label}: run {done}/{total}")
        sys.stderr.flush()
        if done == total:
            sys.stderr.write("\n")

    return report


def _cmd_simulate(args):
    bundle = load_config(args.config, args.overrides, args.seed)
    os.makedirs(args.out, exist_ok=True)
    reports = []
    for cfg in bundle.scenarios():
        label = method_id(cfg.scheme, cfg.metric)
        reports.append(run_corpus(cfg, workers=args.workers, progress=_progress(label)))
    _write_echo(args.out, bundle)
    write_all_outputs(args.out, reports, config_echo=bundle.resolved_text)
    return EXIT_OK


def _cmd_backtest(args):
    bundle = load_config(args.config, args.overrides, args.seed)
    table = load_prices_csv(args.prices)
    cfg = bundle.for_backtest(len(table.asset_labels), table.num_periods - 1)
    os.makedirs(args.out, exist_ok=True)
    reports = []
    for scheme, metric in bundle.methods:
        method_cfg = cfg.replace(scheme=scheme, metric=metric)
        run = run_backtest(table, method_cfg)
        corpus = aggregate_runs(scheme, metric, 1, cfg.master_seed, [run])
        reports.append(corpus)
        if scheme == "netmod":
            write_graph_dumps(args.out, method_id(scheme, metric), run, table.asset_labels)
    _write_echo(args.out, bundle)
    write_all_outputs(args.out, reports, config_echo=bundle.resolved_text)
    return EXIT_OK


def _cmd_dump_graph(args):
    bundle = load_config(args.config, args.overrides, args.seed)
    metric = _METRIC_FLAG[args.metric]
    if args.prices:
        table = load_prices_csv(args.prices)
        cfg = bundle.for_backtest(len(table.asset_labels), table.num_periods - 1)
        cfg = cfg.replace(scheme="netmod", metric=metric)
        returns = prices_to_returns(table)
        base_seed = cfg.master_seed
    else:
        cfg = bundle.base.replace(scheme="netmod", metric=metric)
        base_seed = run_seed(cfg.master_seed, 0)
        returns = generate_trace(cfg, base_seed)
    run = run_on_returns(returns, cfg, base_seed=base_seed)
    os.makedirs(args.out, exist_ok=True)
    _write_echo(args.out, bundle)
    write_graph_dumps(args.out, method_id("netmod", metric), run, returns.asset_labels)
    return EXIT_OK


def _write_echo(out_dir, bundle):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "config_echo.ini"), "w", encoding="utf-8") as fh:
        fh.write(bundle.resolved_text)


def _cmd_list_schemes(_args):
    for name in all_method_ids():
        print(name)
    return EXIT_OK


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "backtest": _cmd_backtest,
        "dump-graph": _cmd_dump_graph,
        "list-schemes": _cmd_list_schemes,
    }
    try:
        return handlers[args.command](args)
    except UnknownNameError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigurationError, PriceTableError, InsufficientDataError) as exc:
        print(f"error: validation: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (PortfolioLabError, OSError) as exc:
        print(f"error: runtime: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
