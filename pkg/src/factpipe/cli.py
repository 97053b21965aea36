"""Command-line front end: one subcommand per stage plus ``pipeline``.

Everything is configured through a flat key=value file and/or repeated
``--set key=value`` overrides; a few common paths get dedicated flags.
Exit codes: 0 success, 1 stage failure (message names the stage),
2 missing input file or bad configuration.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import (ConfigError, PipelineConfig, apply_overrides,
                     load_config, validate)
from .evaluation import format_report
from .pipeline import MissingInputError, PipelineRun, StageError, run_pipeline

_STAGE_COMMANDS = ("ingest", "retrieve", "train-ranker", "select",
                   "train-rte", "classify", "evaluate")

_COMMAND_HELP = {
    "ingest": "build the article store from a line-delimited dump",
    "retrieve": "entity-link each claim to candidate pages",
    "train-ranker": "train the sentence-ranking ensemble",
    "select": "score candidate sentences and keep the top five",
    "train-rte": "train the three-way claim classifier",
    "classify": "predict a label and evidence for each claim",
    "evaluate": "score predictions against gold labels and evidence",
    "pipeline": "run every stage in order, skipping current outputs",
}


def _add_common(parser):
    parser.add_argument("--config", metavar="FILE",
                        help="flat key=value config file")
    parser.add_argument("--set", dest="overrides", action="append",
                        default=[], metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
    parser.add_argument("--wiki", help="article dump path")
    parser.add_argument("--claims", help="claims file path")
    parser.add_argument("--work-dir", help="artifact directory")
    parser.add_argument("--seeds", metavar="N,N,...",
                        help="explicit ensemble seeds")
    parser.add_argument("--jobs", type=int,
                        help="within-stage parallelism bound")
    parser.add_argument("--force", action="store_true",
                        help="rerun even when outputs look current")
    parser.add_argument("--verbose", action="store_true",
                        help="log stage progress to stderr")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="factpipe",
        description="claim verification: retrieve, select, classify, score")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _STAGE_COMMANDS + ("pipeline",):
        _add_common(sub.add_parser(name, help=_COMMAND_HELP[name]))
    return parser


def _build_config(args):
    cfg = load_config(args.config) if args.config else PipelineConfig()
    if args.wiki:
        cfg.wiki = args.wiki
    if args.claims:
        cfg.claims = args.claims
    if args.work_dir:
        cfg.work_dir = args.work_dir
    if args.jobs is not None:
        cfg.jobs = args.jobs
    apply_overrides(cfg, args.overrides)
    if args.seeds:
        try:
            cfg.ensemble_seeds = tuple(int(s) for s in args.seeds.split(","))
        except ValueError:
            raise ConfigError(f"bad --seeds value: {args.seeds!r}") from None
    return validate(cfg)


def _artifact_path(command, run):
    return {
        "ingest": run.art.store_dir,
        "retrieve": run.art.retrieved,
        "train-ranker": run.art.models,
        "select": run.art.selected,
        "train-rte": run.art.rte_model,
        "classify": run.art.predictions,
    }[command]


def _dispatch(args, cfg):
    if args.command == "pipeline":
        report = run_pipeline(cfg, force=args.force)
        print(format_report(report))
        return 0
    run = PipelineRun(cfg, force=args.force)
    result = run.run_stage(args.command)
    if args.command == "evaluate":
        print(format_report(result))
    else:
        print(f"{args.command}: wrote {_artifact_path(args.command, run)}")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _build_config(args)
        return _dispatch(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (MissingInputError, FileNotFoundError) as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
