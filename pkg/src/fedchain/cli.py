"""Command-line entry points: run a scenario, sweep gas costs, audit a run.

Exit codes: 0 success, 1 runtime failure, 2 configuration error. The
FEDCHAIN_LOG environment variable sets log verbosity (DEBUG/INFO/WARNING).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import scenario
from .errors import ConfigError, SimulationError
from .ledger import gas_csv_text


def _setup_logging() -> None:
    level_name = os.environ.get("FEDCHAIN_LOG", "WARNING").upper()
    level = getattr(logging, level_name, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _cmd_run(args: argparse.Namespace) -> int:
    run_dir = scenario.run(args.config, args.out)
    report = json.loads((run_dir / scenario.REPORT_FILE).read_text())
    summary = report["summary"]
    print(f"run {report['run_id']} complete: {summary['rounds']} rounds, "
          f"{summary['clients']} clients, total payout {summary['total_payout']}")
    print(f"artifacts: {run_dir}")
    return 0


def _cmd_gas_sweep(args: argparse.Namespace) -> int:
    config = scenario.load_config(args.config)
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError as err:
        raise ConfigError(f"bad --sizes list: {err}") from err
    rows = scenario.gas_sweep(config, sizes)
    csv_text = gas_csv_text(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    sys.stdout.write(csv_text)
    return 0


def _cmd_audit(args: argparse.Namespace) -> int:
    verdicts = scenario.audit(args.out)
    all_ok = True
    for verdict in verdicts:
        status = "ok" if verdict["ok"] else "FAILED"
        all_ok = all_ok and verdict["ok"]
        print(f"run {verdict['run_id']}: {status} (chain: {verdict['chain']})")
        for checkpoint in verdict["checkpoints"]:
            print(f"  checkpoint round {checkpoint['round']}: {checkpoint['verdict']}")
        if verdict["report_matches_ledger"] is not None:
            print(f"  report matches ledger: {verdict['report_matches_ledger']}")
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fedchain",
        description="Deterministic simulator of blockchain-coordinated federated learning",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario end to end")
    p_run.add_argument("--config", required=True, help="scenario JSON path")
    p_run.add_argument("--out", required=True, help="output base directory")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("gas-sweep", help="measure per-class gas across model sizes")
    p_sweep.add_argument("--config", required=True, help="scenario JSON path")
    p_sweep.add_argument("--sizes", required=True, help="comma-separated parameter counts")
    p_sweep.add_argument("--out", help="also write the CSV here")
    p_sweep.set_defaults(func=_cmd_gas_sweep)

    p_audit = sub.add_parser("audit", help="re-verify checkpoints and chain of a run")
    p_audit.add_argument("--out", required=True, help="run directory (or base directory of runs)")
    p_audit.set_defaults(func=_cmd_audit)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except SimulationError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # runtime failure contract: exit 1
        logging.getLogger("fedchain").exception("unhandled failure")
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
