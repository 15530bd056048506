"""Command line entry point.

Exit codes: 0 success, 1 usage or config error, 2 data error, 3 transport error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from . import fixtures, pipeline
from .errors import (
    ConfigError, CorpusError, CriteriaError, EvaluationError, OntologyError, TransportError,
)
from .pipeline import RunConfig

logger = logging.getLogger("cohort_sieve")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_TRANSPORT = 0, 1, 2, 3


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=default, help="run config JSON")
    p.add_argument("--run-dir", default=default, help="run directory (overrides the config)")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS if suppress else False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cohort-sieve", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="group", required=True)

    onto = sub.add_parser("ontology", help="ontology artifacts")
    onto_sub = onto.add_subparsers(dest="action", required=True)
    build = onto_sub.add_parser("build", help="compile one code list per criterion")
    _global_flags(build, suppress=True)

    cls = sub.add_parser("classify", help="label every (patient, criterion) pair")
    _global_flags(cls, suppress=True)
    cls.add_argument("--scenario", choices=pipeline.SCENARIOS)
    cls.add_argument("--backend", choices=pipeline.BACKENDS)
    cls.add_argument("--mock-script")
    cls.add_argument("--max-words", type=int)
    cls.add_argument("--hard-temporal-filter", action="store_true", default=None)

    ev = sub.add_parser("evaluate", help="score predictions against gold labels")
    _global_flags(ev, suppress=True)

    cmp_ = sub.add_parser("compare", help="overall F deltas between two evaluated runs")
    cmp_.add_argument("run_a")
    cmp_.add_argument("run_b")

    fx = sub.add_parser("fixtures", help="synthetic data")
    fx_sub = fx.add_subparsers(dest="action", required=True)
    gen = fx_sub.add_parser("generate", help="write a synthetic challenge-format corpus")
    gen.add_argument("--out", required=True)
    gen.add_argument("--patients", type=int, default=12)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--split", default="test")
    return parser


def resolve_config(args) -> RunConfig:
    cfg = None
    if args.config:
        cfg = RunConfig.load(args.config)
    elif args.run_dir and (Path(args.run_dir) / "config.json").is_file():
        cfg = RunConfig.load(Path(args.run_dir) / "config.json")
    if cfg is None:
        raise ConfigError("no config: pass --config, or --run-dir pointing at an existing run")
    overrides = {}
    if args.run_dir:
        overrides["run_dir"] = str(Path(args.run_dir).resolve())
    for flag, key in (
        ("scenario", "scenario"), ("backend", "backend"), ("max_words", "max_words"),
        ("hard_temporal_filter", "hard_temporal_filter"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "mock_script", None):
        overrides["mock_script"] = str(Path(args.mock_script).resolve())
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _run(args) -> int:
    if args.group == "fixtures":
        manifest = fixtures.generate(args.out, args.patients, args.seed, args.split)
        print(f"wrote {len(manifest['patients'])} patients to {Path(args.out) / args.split}")
        return EXIT_OK
    if args.group == "compare":
        sys.stdout.write(pipeline.compare_runs(args.run_a, args.run_b))
        return EXIT_OK

    cfg = resolve_config(args)
    if args.group == "ontology":
        lists, warnings = pipeline.build_ontology(cfg)
        for w in warnings:
            print(f"warning: {w}", file=sys.stderr)
        print(f"wrote {len(lists)} code lists to {cfg.run_path / 'code_lists'}")
    elif args.group == "classify":
        answers = pipeline.run_classify(cfg)
        counts = {}
        for a in answers:
            counts[a.source] = counts.get(a.source, 0) + 1
        summary = ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
        print(f"wrote {len(answers)} predictions to {cfg.run_path / 'predictions.csv'} ({summary})")
    elif args.group == "evaluate":
        pipeline.run_evaluate(cfg)
        sys.stdout.write((cfg.run_path / "report.txt").read_text(encoding="utf-8"))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _run(args)
    except (ConfigError, CriteriaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TransportError as exc:
        print(f"transport error: {exc}; completed answers are cached, rerun to resume", file=sys.stderr)
        return EXIT_TRANSPORT
    except (OntologyError, CorpusError, EvaluationError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
