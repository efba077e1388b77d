"""Command-line interface: ``ckls <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import replace

from . import diffusion, drift, experiments
from .errors import CklsError
from .model import ModelParams, RngConfig, simulate_path, validate_params
from .pathio import read_path_csv, write_path_csv
from .stationary import StationaryModel


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _pairs(text: str) -> list[tuple[float, float]]:
    out = []
    for item in text.split(","):
        s, t = item.split(":")
        out.append((float(s), float(t)))
    return out


def _model_args(p: argparse.ArgumentParser, r0: bool = False):
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    if r0:
        p.add_argument("--r0", type=float, default=1.0)


def _params(args) -> ModelParams:
    return validate_params(
        ModelParams(args.a, args.b, args.sigma, args.beta, getattr(args, "r0", 1.0))
    )


def _emit(obj):
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_simulate(args):
    p = _params(args)
    path = simulate_path(p, args.T, args.steps, RngConfig(args.seed), args.replicate)
    write_path_csv(path, args.out)


def cmd_estimate_drift(args):
    path = read_path_csv(args.input)
    if args.method == "alt":
        if args.sigma is None:
            raise SystemExit("--method alt requires --sigma")
        est = drift.alt_joint(path, args.sigma, args.beta)
    elif args.known_a is not None:
        est = drift.mle_b_given_a(path, args.known_a, args.beta)
    elif args.known_b is not None:
        est = drift.mle_a_given_b(path, args.known_b, args.beta)
    else:
        est = drift.mle_joint(path, args.beta)
    _emit(
        {
            "kind": est.kind.value,
            "a_hat": est.a_hat,
            "b_hat": est.b_hat,
            "denominator": est.denominator,
            "T": est.T,
        }
    )


def cmd_estimate_diffusion(args):
    path = read_path_csv(args.input)
    cfg = diffusion.QvProbeConfig(
        h=args.h,
        points=_floats(args.points) if args.points else (),
        pairs=_pairs(args.pairs) if args.pairs else (),
    )
    out = {}
    if args.sigma is not None and cfg.points:
        out["beta1"] = diffusion.beta_known_sigma(path, args.sigma, cfg).beta_hat
    if cfg.pairs:
        out["beta2"] = diffusion.beta_unknown_sigma(path, cfg).beta_hat
    if args.beta is not None and cfg.points:
        est = diffusion.sigma2_known_beta(path, args.beta, cfg)
        out["sigma2"] = est.sigma2_hat
        out["sigma2_global"] = est.details["global"]
    if not out:
        raise SystemExit("nothing to estimate: give --sigma with --points, --pairs, or --beta with --points")
    _emit(out)


def cmd_moments(args):
    m = StationaryModel(_params(args))
    _emit({"mu": args.mu, "moment": m.moment(args.mu), "G": m.G})


def cmd_asymcov(args):
    cov = StationaryModel(_params(args)).sigma_matrix()
    _emit(
        {
            "sigma_matrix": cov.sigma_matrix.tolist(),
            "covariance": cov.covariance.tolist(),
            "var_a_given_b": cov.var_a_given_b,
            "var_b_given_a": cov.var_b_given_a,
        }
    )


def cmd_mc(args):
    cfg = experiments.McConfig.load(args.config)
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    run = experiments.run_drift_table if args.table == "table1" else experiments.run_diffusion_table
    report = run(cfg)
    out = args.out or cfg.output or f"{args.table}.{'md' if args.format == 'markdown' else 'csv'}"
    experiments.write_report(report, args.format, out)
    meta = {k: v for k, v in report.metadata.items() if k != "config"}
    print(json.dumps({"report": str(out), **meta}), file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ckls", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate one path to a t,r CSV")
    _model_args(p, r0=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replicate", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    est = sub.add_parser("estimate", help="estimate parameters from a path CSV")
    est_sub = est.add_subparsers(dest="target", required=True)

    p = est_sub.add_parser("drift")
    p.add_argument("--input", required=True)
    p.add_argument("--beta", type=float, required=True)
    known = p.add_mutually_exclusive_group()
    known.add_argument("--known-a", type=float)
    known.add_argument("--known-b", type=float)
    p.add_argument("--method", choices=("mle", "alt"), default="mle")
    p.add_argument("--sigma", type=float)
    p.set_defaults(func=cmd_estimate_drift)

    p = est_sub.add_parser("diffusion")
    p.add_argument("--input", required=True)
    p.add_argument("--sigma", type=float)
    p.add_argument("--beta", type=float, help="known beta, enables the sigma^2 estimate")
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--points", help="t1,...,tm")
    p.add_argument("--pairs", help="s1:t1,...,sm:tm")
    p.set_defaults(func=cmd_estimate_diffusion)

    p = sub.add_parser("moments", help="stationary moment E[r^mu]")
    _model_args(p)
    p.add_argument("--mu", type=float, required=True)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("asymcov", help="asymptotic covariances of the drift MLEs")
    _model_args(p)
    p.set_defaults(func=cmd_asymcov)

    p = sub.add_parser("mc", help="Monte Carlo tables")
    p.add_argument("table", choices=("table1", "table2"))
    p.add_argument("--config", required=True, help="JSON file of McConfig fields")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "markdown"), default="csv")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_mc)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            args.func(args)
    except CklsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
