"""Command-line entry point: ``stablab <subcommand> [flags]``.

Exit codes: 0 all checks pass, 1 a bound check failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import harness
from .harness import ConfigError, ExperimentConfig

EXIT_OK, EXIT_BOUND, EXIT_CONFIG = 0, 1, 2


def _param(text: str):
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--problem")
    p.add_argument("--learner")
    p.add_argument("--adversary")
    p.add_argument("--rounds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stablab",
                                     description="Stability and regret experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "play one online run and check its regret bound"),
                        ("stability", "uniform-LOO gaps on random datasets"),
                        ("counterexample", "lower-bound scenarios (pennies, tracking, "
                                           "thresholds)"),
                        ("cover", "build and verify an eps-cover"),
                        ("rates", "tabulate a closed-form rate"),
                        ("sweep", "run a grid of configs")):
        p = sub.add_parser(name, help=help_)
        _common(p)
        if name == "stability":
            p.add_argument("--samples", type=int)
        if name == "counterexample":
            p.add_argument("--scenario", choices=harness.SCENARIOS)
        if name == "cover":
            p.add_argument("--eps", type=float)
            p.add_argument("--probes", type=int, dest="n_probes")
        if name == "rates":
            p.add_argument("--bound", choices=harness.BOUND_NAMES)
            p.add_argument("--param", action="append", type=_param, default=[],
                           metavar="KEY=VALUE")
    return parser


def _config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    changes = {k: getattr(args, k, None) for k in
               ("problem", "learner", "adversary", "rounds", "seed", "out", "format",
                "samples", "scenario", "eps", "n_probes", "bound")}
    if getattr(args, "param", None):
        changes["bound_params"] = dict(cfg.bound_params, **dict(args.param))
    return cfg.replace(**changes)


OPS = {
    "run": harness.run,
    "stability": harness.stability,
    "counterexample": harness.counterexample,
    "cover": harness.cover,
    "rates": harness.rates,
    "sweep": harness.sweep,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        artifact = OPS[args.command](cfg)
    except ConfigError as exc:
        print(f"stablab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = artifact.render(cfg.format)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for check in artifact.checks:
        if not check.passed:
            print(f"stablab: check failed: {check.name} (max violation "
                  f"{check.max_violation:.6g} at round {check.worst_round})", file=sys.stderr)
    return EXIT_OK if artifact.passed else EXIT_BOUND


if __name__ == "__main__":
    sys.exit(main())
