"""Command-line entry point: ``anxeeg --config pipeline.ini --stage <name>``."""

from __future__ import annotations

import argparse
import sys
import warnings

from anxeeg.config import STAGE_ORDER, PipelineConfig, load_config, parse_seed
from anxeeg.errors import AnxeegError
from anxeeg.pipeline import STAGES


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="anxeeg", description="EEG anxiety-level pipeline")
    p.add_argument("--config", required=True, help="sectioned key-value config file")
    p.add_argument("--stage", required=True, choices=STAGE_ORDER + ("all",),
                   help="stage to run; 'all' runs every stage in order")
    p.add_argument("--seed", help="unsigned 64-bit seed (required for train/evaluate/report)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--duration", type=float, choices=(30.0, 15.0, 5.0, 1.0),
                   help="trial duration in seconds")
    p.add_argument("--features", help="comma-separated families or groups (time, frequency, "
                                      "time_frequency, all)")
    p.add_argument("--levels", type=int, choices=(2, 4), help="number of anxiety classes")
    return p


def configure(args: argparse.Namespace) -> PipelineConfig:
    cfg = load_config(args.config)
    features = None
    if args.features:
        features = tuple(f.strip() for f in args.features.split(",") if f.strip())
    return cfg.with_overrides(
        seed=None if args.seed is None else parse_seed(args.seed),
        out=args.out, duration=args.duration, features=features, levels=args.levels)


def run(stage: str, cfg: PipelineConfig) -> None:
    stages = STAGE_ORDER if stage == "all" else (stage,)
    for s in stages:
        cfg.validate(s)
    for s in stages:
        STAGES[s](cfg)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            run(args.stage, configure(args))
    except AnxeegError as exc:
        msg = " ".join(str(exc).split())
        print(f"error={exc.code} stage={args.stage} message={msg}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
