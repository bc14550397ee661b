"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .experiments import ConfigError, ExperimentConfig, run_experiment
from .report import emit_report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="localchaos", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--out", dest="output_dir", default=None, help="output directory")
        p.add_argument("--config", default=None, help="JSON file; its keys override flags")
        p.add_argument("--seed", type=_u64, default=None)
        p.add_argument("--step", type=float, default=None)
        p.add_argument("--t-final", dest="t_final", type=float, default=None)
        p.add_argument("--indicator", choices=["gem", "lyapunov"], default=None)

    p = sub.add_parser("toy", help="deviation growth under the toy matrix")
    common(p)
    p.add_argument("--delta-t", dest="delta_t", type=float, default=None)

    p = sub.add_parser("toda-sweep", help="interval product against energy for the Toda potential")
    common(p)
    p.add_argument("--e-min", type=float, default=0.18)
    p.add_argument("--e-max", type=float, default=0.24)
    p.add_argument("--e-steps", type=int, default=7)
    p.add_argument("--ensemble", type=int, default=None)

    p = sub.add_parser("toda-poincare", help="Poincaré section and product at one energy")
    common(p)
    p.add_argument("--energy", type=float, default=None)
    p.add_argument("--ensemble", type=int, default=None)

    p = sub.add_parser("celestial", help="Kepler or restricted three-body orbit from perihelion")
    common(p)
    p.add_argument("--model", choices=["kepler", "threebody"], default=None)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--ecc", type=float, default=None)
    return parser


def config_from_args(args) -> ExperimentConfig:
    data = {"kind": args.command}
    skip = {"command", "config", "e_min", "e_max", "e_steps"}
    for key, value in vars(args).items():
        if key not in skip and value is not None:
            data[key] = value
    if args.command == "toda-sweep":
        if args.e_steps < 1:
            raise ConfigError("--e-steps must be >= 1")
        grid = np.linspace(args.e_min, args.e_max, args.e_steps) if args.e_steps > 1 else [args.e_min]
        data["energies"] = [round(float(e), 12) for e in grid]
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                override = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config {args.config}: {err}") from None
        if not isinstance(override, dict):
            raise ConfigError("config file must hold a JSON object")
        data.update(override)
        data["kind"] = args.command
    return ExperimentConfig.from_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except ConfigError as err:
        print(f"localchaos: config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        record = run_experiment(config)
        files = emit_report(record, config.output_dir or f"out-{config.kind.value}")
    except Exception as err:  # noqa: BLE001
        print(f"localchaos: run failed: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    failed = [r for r in record.runs if not r.ok]
    print(json.dumps({"out": str(files[-1].parent), "runs": len(record.runs), "failed": len(failed),
                      "summary": record.summary}, default=float))
    return EXIT_RUNTIME if failed and len(failed) == len(record.runs) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
