"""Diffusion-estimator Monte Carlo table.

Each replicate is one fine path on ``[0, 1 + h]``; the probe layout in the
config decides where the realized quadratic variation is sampled.

    python scripts/run_table2.py --config scripts/configs/table2.json --format markdown --out table2.md
"""

import argparse
import sys
from dataclasses import replace

from run_table1 import report_summary

from ckls.experiments import McConfig, run_diffusion_table, write_report


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file of McConfig fields; defaults if omitted")
    parser.add_argument("--out", default="table2.csv")
    parser.add_argument("--format", choices=("csv", "markdown"), default="csv")
    parser.add_argument("--workers", type=int)
    args = parser.parse_args(argv)

    cfg = McConfig.load(args.config) if args.config else McConfig()
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    report = run_diffusion_table(cfg)
    write_report(report, args.format, args.out)
    print(report_summary(report), file=sys.stderr)


if __name__ == "__main__":
    main()
