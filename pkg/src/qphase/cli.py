"""Command-line interface.

``qphase run --config cfg.json`` runs a JSON config; each experiment also has
a shortcut subcommand taking the config keys as flags, e.g.
``qphase qec-steane --sigma 0.05 --trials 1000 --seed 7``. Without ``--out``
the per-trial CSV goes to stdout.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .errors import ConfigError, InvalidArgument, NumericalError
from .experiments import EXPERIMENTS, KEYS, ExperimentConfig, run_experiment

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="directory for trials.csv and summary.json")
    p.add_argument("--dump-final", action="store_true", help="also write the final state as state.dump")
    p.add_argument("--seed", help="64-bit master seed (overrides the config)")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_key_flags(p: argparse.ArgumentParser) -> None:
    for key, (_, help_text) in KEYS.items():
        if key in ("experiment", "seed"):
            continue
        names = [f"--{key}"]
        dashed = f"--{key.replace('_', '-')}"
        if dashed not in names:
            names.append(dashed)
        p.add_argument(*names, dest=key, metavar="VALUE", help=help_text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qphase", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a JSON config")
    run.add_argument("--config", required=True, help="path to the JSON config")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    _add_output_flags(run)

    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="optional JSON config to start from")
        _add_key_flags(p)
        _add_output_flags(p)
    return parser


def _config_from_args(args) -> ExperimentConfig:
    overrides = {}
    if args.command == "run":
        cfg = ExperimentConfig.from_json(args.config)
        for item in args.set:
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigError(item, "--set expects KEY=VALUE")
            overrides[key] = value
    else:
        base = ExperimentConfig.from_json(args.config).params if args.config else {}
        base = dict(base, experiment=args.command)
        for key in KEYS:
            value = getattr(args, key, None)
            if key not in ("experiment", "seed") and value is not None:
                base[key] = value
        cfg = ExperimentConfig.from_mapping(base)
    if args.seed is not None:
        overrides["seed"] = args.seed
    return cfg.with_overrides(overrides) if overrides else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _config_from_args(args)
        summary = run_experiment(cfg, args.out, args.dump_final)
    except (ConfigError, InvalidArgument) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.out is None:
        sys.stdout.write(summary.to_csv())
    else:
        print(f"wrote {args.out}/trials.csv and {args.out}/summary.json ({summary.wall_time:.3f}s)", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
