"""Drift-estimator Monte Carlo table.

Simulates ``n_replicates`` paths per beta and reports mean, variance and
stddev of the six drift estimates at each horizon.

    python scripts/run_table1.py --config scripts/configs/table1.json --out table1.csv
"""

import argparse
import json
import sys
from dataclasses import replace

from ckls.experiments import McConfig, run_drift_table, write_report


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file of McConfig fields; defaults if omitted")
    parser.add_argument("--out", default="table1.csv")
    parser.add_argument("--format", choices=("csv", "markdown"), default="csv")
    parser.add_argument("--workers", type=int)
    args = parser.parse_args(argv)

    cfg = McConfig.load(args.config) if args.config else McConfig()
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    report = run_drift_table(cfg)
    write_report(report, args.format, args.out)
    print(report_summary(report), file=sys.stderr)


def report_summary(report) -> str:
    meta = {k: v for k, v in report.metadata.items() if k != "config"}
    return json.dumps(meta, indent=2)


if __name__ == "__main__":
    main()
