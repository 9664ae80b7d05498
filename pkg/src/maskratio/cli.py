"""Command-line entry point.

Exit codes: 0 success, 1 data error, 2 config error, 3 assertion failure.
"""
from __future__ import annotations

import argparse
import os
import sys

from .config import Config, load_config, validate
from .errors import ConfigError, DataError
from .learners import ALGORITHMS

EXIT_OK, EXIT_DATA, EXIT_CONFIG, EXIT_ASSERT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _u64(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _algorithms(text):
    names = tuple(a.strip() for a in text.split(",") if a.strip())
    unknown = [a for a in names if a not in ALGORITHMS]
    if unknown or not names:
        raise argparse.ArgumentTypeError(f"unknown algorithm(s) {unknown}; choose from {','.join(ALGORITHMS)}")
    return names


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--seed", type=_u64, help="override evaluation.seed")
    common.add_argument("--out", help="output directory (default: ./run)")
    common.add_argument("--algorithms", type=_algorithms, help="comma list, e.g. NaiveBayes,DecisionTree")
    common.add_argument("--window-days", type=int, help="override study.window_days")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for per-algorithm work")

    parser = _Parser(prog="maskratio", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("ingest", parents=[common], help="join the four inputs and report missing counties")
    sub.add_parser("build-dataset", parents=[common], help="label counties and write descriptive tables")
    ev = sub.add_parser("evaluate", parents=[common], help="tune and evaluate the classifiers")
    ev.add_argument("--repeats", type=int, default=0, help="also run a sweep over this many consecutive seeds")
    rp = sub.add_parser("report", parents=[common], help="full run: every table plus run_manifest.json")
    rp.add_argument("--repeats", type=int, default=0)
    sc = sub.add_parser("synth-check", parents=[common], help="end-to-end check on synthetic counties")
    sc.add_argument("--n-counties", type=int, default=500)
    sc.add_argument("--class-balance", type=float, default=0.5)
    sc.add_argument("--noise", type=float, default=0.0)
    sc.add_argument("--shuffle-labels", action="store_true", help="expect chance-level accuracy instead")
    return parser


def _config(args):
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = Config()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.algorithms:
        cfg.algorithms = args.algorithms
    if args.window_days is not None:
        cfg.window_days = args.window_days
    validate(cfg)
    return cfg


def _out(args):
    out = args.out or "run"
    os.makedirs(out, exist_ok=True)
    return out


def _cmd_ingest(args):
    from .pipeline import load_dataset, write_ingest_reports

    cfg = _config(args)
    bundle = load_dataset(cfg)
    write_ingest_reports(bundle, _out(args))
    print(f"joined {len(bundle.records)} counties; {len(bundle.missing)} missing from at least one source")
    return EXIT_OK


def _cmd_build(args):
    from .pipeline import load_dataset, write_dataset_reports

    cfg = _config(args)
    bundle = load_dataset(cfg)
    write_dataset_reports(bundle, _out(args))
    counts = ", ".join(f"{k.value} {v}" for k, v in bundle.counts.items())
    print(f"{len(bundle.samples)} labelled counties ({counts})")
    return EXIT_OK


def _cmd_evaluate(args):
    from .pipeline import evaluate_algorithms, load_dataset, seed_sweep, write_eval_reports, write_sweep_reports
    from .reports import accuracy_order

    cfg = _config(args)
    out = _out(args)
    X, _, y = load_dataset(cfg).arrays()
    split, reps = evaluate_algorithms(cfg, X, y, jobs=args.jobs)
    write_eval_reports(split, reps, out)
    for r in accuracy_order(reps):
        print(f"{r.algorithm:<20s} test {r.test_accuracy:.3f}  train {r.train_accuracy:.3f}  +/- {r.ci_half_width:.3f}")
    if args.repeats:
        sweep = seed_sweep(cfg, X, y, range(cfg.seed, cfg.seed + args.repeats), jobs=args.jobs)
        write_sweep_reports(sweep, out)
    return EXIT_OK


def _cmd_report(args):
    from .pipeline import run_pipeline

    cfg = _config(args)
    out = _out(args)
    run_pipeline(cfg, out, repeats=args.repeats, jobs=args.jobs)
    print(f"wrote reports to {out}")
    return EXIT_OK


def _cmd_synth(args):
    from .pipeline import run_synth_check
    from .synth import SynthSpec

    cfg = _config(args)
    spec = SynthSpec(
        n_counties=args.n_counties,
        class_balance=args.class_balance,
        noise_scale=args.noise,
        seed=cfg.seed,
        window_days=cfg.window_days,
    )
    result = run_synth_check(spec, shuffle_labels=args.shuffle_labels, algorithms=cfg.algorithms, workdir=args.out)
    for line in result.lines():
        print(line)
    if not result.passed:
        failed = [o.algorithm for o in result.outcomes if not o.passed]
        print(f"synth-check failed: {', '.join(failed) or 'label round-trip'}", file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


COMMANDS = {
    "ingest": _cmd_ingest,
    "build-dataset": _cmd_build,
    "evaluate": _cmd_evaluate,
    "report": _cmd_report,
    "synth-check": _cmd_synth,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except AssertionError as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return EXIT_ASSERT


if __name__ == "__main__":
    sys.exit(main())
