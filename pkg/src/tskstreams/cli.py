"""Command-line entry point ``tsk-streams``.

Exit codes: 0 on success, 2 for bad flags or configuration, 3 for data
errors (unreadable or malformed input).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .induction import ConfigError, ExpansionConfig
from .io import ParseError, open_source, synthetic_source
from .learner import LinearSGDBaseline, MeanBaseline, TSKStreams, evaluate_stream

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3

# flag name -> ExpansionConfig field
_FLAG_FIELDS = {
    "criterion": "criterion",
    "strategy": "strategy",
    "delta": "delta",
    "tau": "tau",
    "eta": "eta",
    "grace": "grace_period",
    "adwin_delta": "adwin_delta",
    "rho_factors": "rho_factors",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _rho_pair(text: str):
    try:
        k1, k2 = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected two comma-separated numbers, e.g. 0.05,0.15") from None
    return (k1, k2)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tsk-streams", description="Prequential evaluation of the TSK rule learner.")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", metavar="PATH", help="ARFF or CSV file")
    src.add_argument("--synthetic", metavar="CFG",
                     help="preset name (2dplanes, fried), JSON text or path to a JSON generator config")
    p.add_argument("--format", choices=("arff", "csv"), help="input format (default: file extension)")
    p.add_argument("--target", help="target column (default: last)")
    p.add_argument("--criterion", choices=("vr", "er"))
    p.add_argument("--strategy", choices=("single", "all"))
    p.add_argument("--delta", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--grace", type=int)
    p.add_argument("--adwin-delta", type=float)
    p.add_argument("--rho-factors", type=_rho_pair, metavar="K1,K2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", metavar="PATH", help="JSON file of learner settings; flags override it")
    p.add_argument("--baseline", choices=("mean", "linear", "none"), default="none")
    p.add_argument("--out-metrics", metavar="PATH")
    p.add_argument("--out-summary", metavar="PATH", help="summary JSON (default: stdout)")
    p.add_argument("--out-model", metavar="PATH")
    p.add_argument("--no-timing", action="store_true", help="write 0 in the micros column")
    return p


def _load_json(text: str):
    if os.path.exists(text):
        with open(text) as fh:
            return json.load(fh)
    return json.loads(text)


def _config(args) -> ExpansionConfig:
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    for flag, name in _FLAG_FIELDS.items():
        value = getattr(args, flag)
        if value is not None:
            data[name] = value
    return ExpansionConfig.from_dict(data)


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    if args.synthetic and (args.format or args.target):
        sys.stderr.write("tsk-streams: --format/--target only apply to --input\n")
        return EXIT_CONFIG
    try:
        cfg = _config(args)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"tsk-streams: config error: {exc}\n")
        return EXIT_CONFIG

    try:
        if args.input:
            source = open_source(args.input, args.format, args.target)
        else:
            try:
                recipe = args.synthetic if args.synthetic in ("2dplanes", "fried") else _load_json(args.synthetic)
                source = synthetic_source(recipe, args.seed)
            except (ValueError, TypeError) as exc:
                sys.stderr.write(f"tsk-streams: config error: {exc}\n")
                return EXIT_CONFIG
        d = source.d
        if args.baseline == "mean":
            learner = MeanBaseline(d)
        elif args.baseline == "linear":
            learner = LinearSGDBaseline(d, cfg.eta)
        else:
            learner = TSKStreams(d, cfg)
        summary = evaluate_stream(learner, source, args.out_metrics, timing=not args.no_timing,
                                  extra_echo={"seed": args.seed, "source": source.origin})
    except (ParseError, OSError, ValueError) as exc:
        sys.stderr.write(f"tsk-streams: data error: {exc}\n")
        return EXIT_DATA

    text = json.dumps(summary, indent=2, sort_keys=True)
    if args.out_summary:
        with open(args.out_summary, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    if args.out_model:
        with open(args.out_model, "w") as fh:
            json.dump(learner.to_dict(), fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
