#!/usr/bin/env python3
"""
medtest CLI - Test marginal homogeneity of two samples of sparse curves.
"""

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .bench import display_simulation, simulate_table
from .dataio import load_dataset, observed_time_range, parse_wide_csv, rescale_time
from .errors import EXIT_DATA, EXIT_OK, EXIT_USAGE, MedError
from .models.design import DesignFamily
from .noise import NoiseMode
from .pipeline import MedTestRunner, display_report, export_curves

# --dense given without a value
CONFIGURED_GRID = 0


class UsageParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write_json(payload: dict, target: str):
    text = json.dumps(payload, indent=2, sort_keys=True, default=str)
    if target == "-":
        print(text)
    else:
        Path(target).write_text(text + "\n")
        print(f"Wrote {target}")


def _load(args):
    dataset = load_dataset(args.input, raw_time=bool(args.rescale or args.time_range))
    if args.time_range:
        dataset = rescale_time(dataset, *args.time_range)
    elif args.rescale:
        dataset = rescale_time(dataset, *observed_time_range(dataset))
    return dataset


def _smoother_overrides(args) -> dict:
    return {
        "h_x": getattr(args, "hx", None),
        "h_y": getattr(args, "hy", None),
        "grid_size": getattr(args, "grid", None),
        "kernel": getattr(args, "kernel", None),
    }


def _test_overrides(args) -> dict:
    return {
        "n_permutations": getattr(args, "perms", None),
        "alpha": getattr(args, "alpha", None),
        "seed": getattr(args, "seed", None),
        "n_jobs": getattr(args, "jobs", None),
    }


def cmd_test(runner: MedTestRunner, args) -> int:
    dataset = _load(args)
    config = runner.test_config(runner.smoother_config(**_smoother_overrides(args)), **_test_overrides(args))
    try:
        report = runner.run(dataset, config, args.noise_mode)
    except MedError as e:
        if getattr(e, "report", None) is not None:
            display_report(e.report)
        raise
    display_report(report)

    if args.export_curves:
        for path in export_curves(report, args.export_curves):
            print(f"Wrote {path}")
    if args.dump_permuted:
        with open(args.dump_permuted, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["replicate", "statistic"])
            for index, value in enumerate(report.result.permuted_statistics or []):
                writer.writerow([index, repr(value)])
        print(f"Wrote {args.dump_permuted}")
    if args.json:
        _write_json(report.to_dict(), args.json)
    return EXIT_OK


def cmd_simulate(runner: MedTestRunner, args) -> int:
    dense_grid = runner.dense_grid_default if args.dense == CONFIGURED_GRID else args.dense
    design = runner.design(
        args.design, args.n, args.m,
        sigma1=args.sigma1, sigma2=args.sigma2, dense_grid=dense_grid,
    )
    config = runner.test_config(runner.smoother_config(**_smoother_overrides(args)), **_test_overrides(args))
    result = runner.simulate(design, reps=args.reps, config=config, noise_mode=args.noise_mode)
    display_simulation(result)
    text = simulate_table([result], args.out)
    if args.out:
        print(f"Wrote {args.out}")
    else:
        print("\n" + text, end="")
    return EXIT_OK


def cmd_noise_estimate(runner: MedTestRunner, args) -> int:
    dataset = _load(args)
    estimate = runner.noise(dataset, runner.smoother_config(h_noise=args.h_noise))
    if args.curves:
        out_dir = Path(args.curves)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, curve in estimate.curves().items():
            print(f"Wrote {curve.to_csv(out_dir / f'{name}.csv')}")
    _write_json(estimate.to_dict(), args.json or "-")
    return EXIT_OK


def cmd_dense_ed(runner: MedTestRunner, args) -> int:
    with open(args.input, newline="", encoding="utf-8") as f:
        sample = parse_wide_csv(f)
    result = runner.dense_test(sample, runner.test_config(**_test_overrides(args)))
    print(result.summary())
    if args.json:
        _write_json(result.to_dict(), args.json)
    return EXIT_OK


def _add_input_args(p: argparse.ArgumentParser):
    p.add_argument("--input", "-i", required=True, help="Long-format CSV: subject_id,group,time,value")
    p.add_argument("--rescale", action="store_true",
                   help="Read raw times and map the observed min/max onto [0, 1]")
    p.add_argument("--time-range", type=float, nargs=2, metavar=("LO", "HI"), default=None,
                   help="Read raw times and map [LO, HI] onto [0, 1]")


def _add_smoother_args(p: argparse.ArgumentParser):
    p.add_argument("--hx", type=float, default=None, help="X-group bandwidth (default: from config)")
    p.add_argument("--hy", type=float, default=None, help="Y-group bandwidth (default: from config)")
    p.add_argument("--grid", type=int, default=None, help="Number of grid points on [0, 1]")
    p.add_argument("--kernel", choices=["epanechnikov", "quartic", "triweight"], default=None)


def _add_permutation_args(p: argparse.ArgumentParser):
    p.add_argument("--perms", type=int, default=None, help="Permutation budget S, observed included")
    p.add_argument("--alpha", type=float, default=None, help="Significance level")
    p.add_argument("--seed", type=int, default=None, help="Random seed")
    p.add_argument("--jobs", "-j", type=int, default=None, help="Worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = UsageParser(
        prog="medtest",
        description="Permutation test of marginal homogeneity for sparse functional data",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python -m medtest.main test -i data.csv                       # MED test, equal errors
  python -m medtest.main test -i data.csv --noise-mode augment  # augment the less noisy group
  python -m medtest.main simulate --design example2 --n 150 --m 130 --reps 100
  python -m medtest.main noise-estimate -i data.csv
  python -m medtest.main dense-ed -i curves.csv --perms 500
        """
    )
    parser.add_argument("--config", type=str, default=None, help="Path to a JSON settings file")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=UsageParser)

    p = sub.add_parser("test", help="Run the MED permutation test on a long-format CSV")
    _add_input_args(p)
    _add_smoother_args(p)
    _add_permutation_args(p)
    p.add_argument("--noise-mode", choices=[m.value for m in NoiseMode], default=None,
                   help="Measurement error handling (default: from config)")
    p.add_argument("--export-curves", metavar="DIR", default=None, help="Write g1/g2/g3/integrand CSVs")
    p.add_argument("--json", metavar="OUT", default=None, help="Write the run report as JSON ('-' for stdout)")
    p.add_argument("--dump-permuted", metavar="CSV", default=None, help="Write the permuted statistics")
    p.set_defaults(handler=cmd_test)

    p = sub.add_parser("simulate", help="Monte Carlo rejection rate of a simulation design")
    p.add_argument("--design", choices=[f.value for f in DesignFamily], default="example1")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--m", type=int, default=70)
    p.add_argument("--sigma1", type=float, default=0.0)
    p.add_argument("--sigma2", type=float, default=0.0)
    p.add_argument("--reps", type=int, default=None, help="Replications (default: from config)")
    p.add_argument("--dense", metavar="GRID", type=int, nargs="?", const=CONFIGURED_GRID, default=None,
                   help="Observe every subject on a shared regular grid of GRID points "
                        "(default GRID: simulate.dense_grid from config)")
    p.add_argument("--noise-mode", choices=[m.value for m in NoiseMode], default=None,
                   help="Default: augment when sigma1 != sigma2")
    p.add_argument("--out", metavar="CSV", default=None, help="Write the result table")
    _add_smoother_args(p)
    _add_permutation_args(p)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("noise-estimate", help="Estimate each group's measurement error variance")
    _add_input_args(p)
    p.add_argument("--h-noise", type=float, default=None, help="Bandwidth of the variance smooths")
    p.add_argument("--json", metavar="OUT", default=None, help="Write the estimate (default: stdout)")
    p.add_argument("--curves", metavar="DIR", default=None, help="Write diagnostic curves as CSV")
    p.set_defaults(handler=cmd_noise_estimate)

    p = sub.add_parser("dense-ed", help="Energy distance test for densely observed curves")
    p.add_argument("--input", "-i", required=True, help="Wide CSV: subject_id,group,<t_1>,...,<t_M>")
    _add_permutation_args(p)
    p.add_argument("--json", metavar="OUT", default=None, help="Write the result as JSON ('-' for stdout)")
    p.set_defaults(handler=cmd_dense_ed)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        runner = MedTestRunner(config_path=args.config)
        return args.handler(runner, args)
    except MedError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code
    except UnicodeDecodeError as e:
        print(f"Error: input is not UTF-8 text: {e}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
