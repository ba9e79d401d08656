"""Command-line interface: one subcommand per campaign scenario.

    rfda moments --trials 2000 --seed 7 --out results/
    rfda detect-sweep --config sweep.yaml --set array.n_elements=128
    rfda ks --set distribution.m_levels=64 --format json

Configuration files are YAML with sections mirroring the experiment
config (array, distribution, params, ...).  --set applies dotted-path
overrides on top of the file; explicit flags win over both.  On failure
a machine-readable error record is printed to stderr and the exit code
is nonzero.
"""

import argparse
import json
import sys

import yaml

from .experiments import SCENARIOS, ExperimentConfig, emit, run


def _apply_override(tree: dict, dotted: str, raw_value: str):
    keys = dotted.split(".")
    node = tree
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ValueError(f"cannot descend into {dotted!r}: {key!r} is not a section")
    node[keys[-1]] = yaml.safe_load(raw_value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rfda",
                                     description="Random frequency diverse array campaigns")
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in SCENARIOS:
        p = sub.add_parser(name.replace("_", "-"), help=f"run the {name} scenario")
        p.add_argument("--config", help="YAML configuration file")
        p.add_argument("--seed", type=int, help="root random seed")
        p.add_argument("--trials", type=int, help="Monte Carlo trial count")
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int, help="worker threads (0 = auto)")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="table file format")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       dest="overrides", help="dotted-path config override")
    return parser


def config_from_args(args) -> ExperimentConfig:
    tree = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            loaded = yaml.safe_load(fh) or {}
        if not isinstance(loaded, dict):
            raise ValueError(f"config file {args.config} must hold a mapping")
        tree.update(loaded)
    tree["scenario"] = args.scenario.replace("-", "_")
    for item in args.overrides:
        if "=" not in item:
            raise ValueError(f"--set expects KEY=VALUE, got {item!r}")
        dotted, raw = item.split("=", 1)
        _apply_override(tree, dotted, raw)
    if args.seed is not None:
        tree["seed"] = args.seed
    if args.trials is not None:
        tree["trials"] = args.trials
    if args.out is not None:
        tree["output"] = args.out
    if args.threads is not None:
        tree["threads"] = args.threads
    return ExperimentConfig.from_dict(tree)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        result = run(config)
        paths = emit(result, fmt=args.format, out_dir=config.output_path)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        record = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
