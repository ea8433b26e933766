"""Command line entry point: ``run``, ``convergence`` and ``verify``."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .config import parse_config
from .errors import ConfigurationError, DomainError
from .output import run_and_emit
from .scenarios import manufactured_convergence


def _nx_list(text):
    try:
        values = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None
    if len(values) < 2 or any(v < 4 for v in values):
        raise argparse.ArgumentTypeError("need at least two grid sizes, each >= 4")
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="hermite-vp", description="SW Hermite Vlasov-Poisson solver")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a configured scenario and write its outputs")
    p.add_argument("config", type=Path)
    p.add_argument("--out", type=Path, required=True, help="output directory")

    p = sub.add_parser("convergence", help="manufactured-solution spatial convergence study")
    p.add_argument("config", type=Path)
    p.add_argument("--nx", type=_nx_list, default=[50, 100, 200, 400])
    p.add_argument("--out", type=Path, default=None, help="directory for convergence.csv")

    p = sub.add_parser("verify", help="run the fast invariant checks")
    p.add_argument("--quiet", action="store_true")
    return parser


def _cmd_run(args):
    cfg = parse_config(args.config)
    status, meta = run_and_emit(cfg, args.out, config_path=args.config)
    if status:
        print(f"run failed at t={meta.get('final_time')}: {meta.get('error')}", file=sys.stderr)
    else:
        line = f"finished t={meta['final_time']:g} in {meta['wall_time_s']:.1f}s"
        if "rates" in meta:
            r = meta["rates"]
            line += f"; {r['quantity']} {r['fitted']:.6g} (reference {r['reference']:g})"
        if "manufactured_l2_error" in meta:
            line += f"; L2 error {meta['manufactured_l2_error']:.6e}"
        print(line)
    return status


def _cmd_convergence(args):
    cfg = parse_config(args.config)
    print(f"{'nx':>6} {'dx':>12} {'l2_error':>14} {'order':>7}")

    def show(row):
        print(f"{row.nx:6d} {row.dx:12.6e} {row.l2_error:14.6e} {row.order:7.3f}", flush=True)

    rows, slope = manufactured_convergence(cfg, args.nx, on_row=show)
    print(f"log-log slope {slope:.4f}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        with open(args.out / "convergence.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("nx", "dx", "l2_error", "order"))
            for r in rows:
                w.writerow((r.nx, "%.17g" % r.dx, "%.17g" % r.l2_error, "%.17g" % r.order))
            w.writerow(("slope", "", "", "%.17g" % slope))
    return 0


def _cmd_verify(args):
    from .verify import run_checks

    results = run_checks()
    for res in results:
        if not args.quiet or not res.passed:
            print(f"{'PASS' if res.passed else 'FAIL'} {res.name}: {res.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


COMMANDS = {"run": _cmd_run, "convergence": _cmd_convergence, "verify": _cmd_verify}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, DomainError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
