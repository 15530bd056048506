"""Run both scenarios on a synthetic corpus and print the overall-F comparison.

    python3 scripts/scenario_contrast.py --out /tmp/contrast --patients 40 --seed 0
"""

import argparse
import dataclasses
import logging
from pathlib import Path

from cohort_sieve import fixtures, pipeline
from cohort_sieve.pipeline import RunConfig


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", required=True)
    parser.add_argument("--patients", type=int, default=40)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--hard-temporal-filter", action="store_true")
    parser.add_argument("--all-no", action="store_true", help="use the all-'No.' mock instead of keyword rules")
    args = parser.parse_args()
    logging.basicConfig(level=logging.WARNING)

    out = Path(args.out)
    fixtures.generate(out, args.patients, args.seed)
    base = RunConfig.load(out / "config.json")
    if args.all_no:
        base = dataclasses.replace(base, mock_script=str(out / "mock_all_no.json"))
    runs = {}
    for scenario in ("truncate-only", "summarize"):
        cfg = dataclasses.replace(
            base,
            scenario=scenario,
            run_dir=str(out / "runs" / scenario),
            hard_temporal_filter=args.hard_temporal_filter and scenario == "summarize",
        )
        pipeline.run_classify(cfg)
        pipeline.run_evaluate(cfg)
        runs[scenario] = cfg.run_path
    print(pipeline.compare_runs(runs["truncate-only"], runs["summarize"]), end="")


if __name__ == "__main__":
    main()
