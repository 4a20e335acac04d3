"""Command-line entry point.

Subcommands: simulate, flag, infer, h1, syncdetect, evaluate, run.  Each
reads --config (a pipeline JSON document), writes artifacts under --out
(default: the config's output_dir), and honors --seed as an override of the
config seed.  Exit codes: 0 success, 2 usage/config error, 3 I/O error.
Set ADTOMO_LOG=debug for verbose logging.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .errors import ConfigError
from .pipeline import (
    load_pipeline_config,
    run_pipeline,
    stage_evaluate,
    stage_flag,
    stage_h1,
    stage_infer,
    stage_simulate,
    stage_syncdetect,
)
from .stattest import StatError
from .syncdetect import MalformedChainError
from .textvec import CorpusMismatchError, OutOfCorpusError
from .tomography import MissingControlError

_INPUT_ERRORS = (ConfigError, StatError, MissingControlError, MalformedChainError,
                 OutOfCorpusError, CorpusMismatchError)

_STAGES = {
    "simulate": stage_simulate,
    "flag": stage_flag,
    "infer": stage_infer,
    "h1": stage_h1,
    "syncdetect": stage_syncdetect,
    "evaluate": stage_evaluate,
    "run": run_pipeline,
}

_DESCRIPTIONS = {
    "simulate": "build the world and emit ad/request/bid logs",
    "flag": "collate vector records and flag changes against the control",
    "infer": "fit per-advertiser models and infer sharing relationships",
    "h1": "similarity matrix of per-(group, run) ad documents",
    "syncdetect": "detect cookie-sync pairs in the request log",
    "evaluate": "score the inference report against the planted graph",
    "run": "full pipeline: simulate, flag, infer, syncdetect, evaluate",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adtomo",
        description="ad-ecosystem simulator and sharing-relationship tomography")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in _DESCRIPTIONS.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="pipeline config JSON")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=getattr(logging, os.environ.get("ADTOMO_LOG", "warning").upper(),
                      logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    import json

    try:
        cfg = load_pipeline_config(args.config)
    except FileNotFoundError:
        print(f"adtomo: config file not found: {args.config}", file=sys.stderr)
        return 2
    except (ConfigError, StatError, json.JSONDecodeError) as exc:
        print(f"adtomo: config error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    out_dir = Path(args.out) if args.out else Path(cfg.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        _STAGES[args.command](cfg, out_dir)
    except _INPUT_ERRORS as exc:
        print(f"adtomo: config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        missing = Path(str(exc.filename)).name if exc.filename else str(exc)
        print(f"adtomo: missing input {missing}: run the producing stage first",
              file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"adtomo: i/o error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
