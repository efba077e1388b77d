"""Monte Carlo harness for the drift table and the diffusion table.

Every replicate draws from its own stream, keyed by
``replicate_index(table, beta_idx, attempt, slot)``. Results are gathered in
slot order and reduced with ``math.fsum``, so the report does not depend on
the number of worker threads.

A replicate on which an estimator fails (zero value under a negative power,
degenerate denominator, flat QV window, ...) is rejected for that estimator
and resimulated under the next ``attempt`` index, up to ``retry_budget``
attempts per slot.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np

from . import diffusion, drift
from .errors import REPLICATE_ERRORS, NonFinite
from .model import ModelParams, RngConfig, SamplePath, simulate_path, validate_params
from .path_ops import PathFunctionals

CSV_FIELDS = ("estimator", "beta", "T", "mean", "variance", "stddev", "n_effective", "n_rejected")

# (output name, drift estimator kind, attribute of DriftEstimate)
DRIFT_OUTPUTS = (
    ("mle_joint:a", drift.DriftKind.MLE_JOINT, "a_hat"),
    ("mle_joint:b", drift.DriftKind.MLE_JOINT, "b_hat"),
    ("mle_a_given_b:a", drift.DriftKind.MLE_A_GIVEN_B, "a_hat"),
    ("mle_b_given_a:b", drift.DriftKind.MLE_B_GIVEN_A, "b_hat"),
    ("alt_joint:a", drift.DriftKind.ALT_JOINT, "a_hat"),
    ("alt_joint:b", drift.DriftKind.ALT_JOINT, "b_hat"),
)
DIFFUSION_OUTPUTS = ("beta1", "beta2", "sigma2")
# Larger estimates are rejected: their squared deviations would overflow
# the variance accumulator.
MAX_ABS_ESTIMATE = 1e150

TABLE_DRIFT, TABLE_DIFFUSION = 1, 2


def replicate_index(table: int, beta_idx: int, attempt: int, slot: int) -> int:
    """Pack the replicate coordinates into one 64-bit stream index:
    8 bits table, 8 bits beta row, 16 bits attempt, 32 bits slot."""
    if not (0 <= table < 256 and 0 <= beta_idx < 256 and 0 <= attempt < 1 << 16 and 0 <= slot < 1 << 32):
        raise ValueError("replicate coordinates out of range")
    return (((table << 8 | beta_idx) << 16 | attempt) << 32) | slot


@dataclass(frozen=True)
class McConfig:
    a: float = 3.0
    b: float = 2.0
    sigma: float = 1.0
    r0: float = 0.0
    betas: tuple[float, ...] = (0.5, 0.6, 0.7, 0.8, 0.9)
    horizons: tuple[float, ...] = (50.0, 100.0, 150.0, 200.0)
    n_replicates: int = 100
    steps_per_unit: int = 256
    qv_steps_per_unit: int = 1 << 14
    probe: diffusion.QvProbeConfig = field(default_factory=diffusion.QvProbeConfig.default_layout)
    master_seed: int = 20240101
    retry_budget: int = 5
    workers: int = 1
    output: str | None = None
    zero_noise: bool = False

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(float(x) for x in self.betas))
        object.__setattr__(self, "horizons", tuple(float(x) for x in self.horizons))
        if self.n_replicates < 1:
            raise ValueError("n_replicates must be >= 1")
        if self.steps_per_unit < 2 or self.qv_steps_per_unit < 2:
            raise ValueError("steps per unit time must be >= 2")
        if self.retry_budget < 1:
            raise ValueError("retry_budget must be >= 1")
        if not self.betas or not self.horizons:
            raise ValueError("need at least one beta and one horizon")
        for T in self.horizons:
            if not T > self.probe.horizon:
                raise ValueError(f"horizon {T} does not exceed the probe horizon {self.probe.horizon}")
            if abs(T * self.steps_per_unit - round(T * self.steps_per_unit)) > 1e-9:
                raise ValueError(f"horizon {T} is not a whole number of steps")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for beta in self.betas:
                validate_params(self.params(beta))

    def params(self, beta: float) -> ModelParams:
        return ModelParams(self.a, self.b, self.sigma, beta, self.r0)

    @property
    def rng(self) -> RngConfig:
        return RngConfig(self.master_seed)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["probe"] = {
            "h": self.probe.h,
            "points": list(self.probe.points),
            "pairs": [list(p) for p in self.probe.pairs],
        }
        d["betas"], d["horizons"] = list(self.betas), list(self.horizons)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> McConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if "probe" in d and not isinstance(d["probe"], diffusion.QvProbeConfig):
            p = d["probe"]
            d["probe"] = diffusion.QvProbeConfig(
                h=p["h"], points=p.get("points", ()), pairs=[tuple(x) for x in p.get("pairs", ())]
            )
        return cls(**d)

    @classmethod
    def load(cls, path) -> McConfig:
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class CellRecord:
    estimator: str
    beta: float
    T: float
    mean: float | None
    variance: float | None
    stddev: float | None
    n_effective: int
    n_rejected: int


@dataclass
class McReport:
    records: list[CellRecord] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def cell(self, estimator: str, beta: float, T: float | None = None) -> CellRecord:
        for rec in self.records:
            if rec.estimator == estimator and rec.beta == beta and (T is None or rec.T == T):
                return rec
        raise KeyError((estimator, beta, T))

    def to_csv(self) -> str:
        return format_csv(self.records)


def aggregate(estimator: str, beta: float, T: float, values: list[float], n_rejected: int) -> CellRecord:
    """Mean and sample variance (ddof=1) via exactly rounded sums.

    A cell with a single value reports zero variance; a cell with none
    reports empty statistics.
    """
    n = len(values)
    if n == 0:
        return CellRecord(estimator, beta, T, None, None, None, 0, n_rejected)
    mean = math.fsum(values) / n
    var = math.fsum((x - mean) ** 2 for x in values) / (n - 1) if n > 1 else 0.0
    return CellRecord(estimator, beta, T, mean, var, math.sqrt(var), n, n_rejected)


def _usable(*values: float) -> bool:
    return all(math.isfinite(v) and abs(v) <= MAX_ABS_ESTIMATE for v in values)


PathSource = Callable[..., "SamplePath | tuple[SamplePath, object]"]


def _simulate(source, params, T, n_steps, rng, index, zero_noise):
    if source is not None:
        out = source(params, T, n_steps, rng, index)
        return out if isinstance(out, tuple) else (out, None)
    return simulate_path(params, T, n_steps, rng, index, zero_noise=zero_noise), None


def _drift_slot(cfg: McConfig, beta_idx: int, slot: int, source):
    beta = cfg.betas[beta_idx]
    params = cfg.params(beta)
    t_max = max(cfg.horizons)
    n_max = round(t_max * cfg.steps_per_unit)
    start = 1 if cfg.r0 == 0 else 0
    kinds = {kind for _, kind, _ in DRIFT_OUTPUTS}
    pending = {(kind, T) for kind in kinds for T in cfg.horizons}
    results: dict = {}
    rejected: Counter = Counter()
    for attempt in range(cfg.retry_budget):
        idx = replicate_index(TABLE_DRIFT, beta_idx, attempt, slot)
        try:
            path, _ = _simulate(source, params, t_max, n_max, cfg.rng, idx, cfg.zero_noise)
        except NonFinite:
            rejected.update(pending)
            continue
        for T in cfg.horizons:
            todo = [kind for kind in sorted(kinds) if (kind, T) in pending]
            if not todo:
                continue
            sub = path.head(round(T * cfg.steps_per_unit)).tail(start)
            f = PathFunctionals(sub)
            for kind in todo:
                try:
                    est = drift.estimate(f, kind, beta=beta, sigma=cfg.sigma, a=cfg.a, b=cfg.b)
                    if not _usable(est.a_hat, est.b_hat):
                        raise NonFinite(f"{kind} produced an unusable estimate")
                except REPLICATE_ERRORS:
                    rejected[(kind, T)] += 1
                    continue
                results[(kind, T)] = est
                pending.discard((kind, T))
        if not pending:
            break
    return results, rejected


def _diffusion_slot(cfg: McConfig, beta_idx: int, slot: int, source):
    beta = cfg.betas[beta_idx]
    params = cfg.params(beta)
    horizon = cfg.probe.horizon
    n_steps = round(horizon * cfg.qv_steps_per_unit)
    pending = set(DIFFUSION_OUTPUTS)
    results: dict = {}
    rejected: Counter = Counter()
    for attempt in range(cfg.retry_budget):
        idx = replicate_index(TABLE_DIFFUSION, beta_idx, attempt, slot)
        try:
            path, qv = _simulate(source, params, horizon, n_steps, cfg.rng, idx, cfg.zero_noise)
            if qv is None:
                qv = PathFunctionals(path).qv_series()
        except NonFinite:
            rejected.update(pending)
            continue
        for name in sorted(pending):
            try:
                if name == "beta1":
                    value = diffusion.beta_known_sigma(path, cfg.sigma, cfg.probe, qv).beta_hat
                elif name == "beta2":
                    value = diffusion.beta_unknown_sigma(path, cfg.probe, qv).beta_hat
                else:
                    value = diffusion.sigma2_known_beta(path, beta, cfg.probe, qv).sigma2_hat
                if not _usable(value):
                    raise NonFinite(f"{name} produced {value!r}")
            except REPLICATE_ERRORS:
                rejected[name] += 1
                continue
            results[name] = value
            pending.discard(name)
        if not pending:
            break
    return results, rejected


def _map_slots(cfg: McConfig, fn, beta_idx: int, source):
    def one(slot):
        # non-finite outcomes are rejected explicitly, so the warnings are noise
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return fn(cfg, beta_idx, slot, source)

    slots = range(cfg.n_replicates)
    if cfg.workers <= 1:
        return [one(s) for s in slots]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(one, slots))


def _metadata(cfg: McConfig, table: str, started: float) -> dict:
    return {
        "table": table,
        "config": cfg.to_dict(),
        "master_seed": cfg.master_seed,
        "rng": {"algorithm": cfg.rng.algorithm, "normal_method": cfg.rng.normal_method},
        "wall_time_s": time.perf_counter() - started,
    }


def run_drift_table(cfg: McConfig, *, path_source: PathSource | None = None) -> McReport:
    """Sample means and variances of the six drift estimates per (beta, T).

    One path per replicate is simulated up to the largest horizon and every
    smaller horizon uses its prefix. With ``r0 = 0`` the first observation
    is dropped, so estimation runs on ``[dt, T]``.
    """
    started = time.perf_counter()
    report = McReport()
    exhausted = []
    for bi, beta in enumerate(cfg.betas):
        slots = _map_slots(cfg, _drift_slot, bi, path_source)
        for T in cfg.horizons:
            for name, kind, attr in DRIFT_OUTPUTS:
                values = [getattr(res[(kind, T)], attr) for res, _ in slots if (kind, T) in res]
                n_rej = sum(rej[(kind, T)] for _, rej in slots)
                rec = aggregate(name, beta, T, values, n_rej)
                if rec.n_effective < cfg.n_replicates:
                    exhausted.append([name, beta, T, cfg.n_replicates - rec.n_effective])
                report.records.append(rec)
    report.metadata = _metadata(cfg, "drift", started)
    report.metadata["retry_budget_exhausted"] = exhausted
    return report


def run_diffusion_table(cfg: McConfig, *, path_source: PathSource | None = None) -> McReport:
    """Sample means and variances of beta1, beta2 and sigma2 per beta.

    Paths cover exactly ``[0, max probe time + h]`` at step
    ``1 / qv_steps_per_unit``; the record's ``T`` is that horizon.
    """
    started = time.perf_counter()
    report = McReport()
    exhausted = []
    horizon = cfg.probe.horizon
    for bi, beta in enumerate(cfg.betas):
        slots = _map_slots(cfg, _diffusion_slot, bi, path_source)
        for name in DIFFUSION_OUTPUTS:
            values = [res[name] for res, _ in slots if name in res]
            n_rej = sum(rej[name] for _, rej in slots)
            rec = aggregate(name, beta, horizon, values, n_rej)
            if rec.n_effective < cfg.n_replicates:
                exhausted.append([name, beta, horizon, cfg.n_replicates - rec.n_effective])
            report.records.append(rec)
    report.metadata = _metadata(cfg, "diffusion", started)
    report.metadata["retry_budget_exhausted"] = exhausted
    return report


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def format_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for rec in records:
        w.writerow([rec.estimator] + [_fmt(getattr(rec, k)) for k in CSV_FIELDS[1:]])
    return buf.getvalue()


def parse_csv(text: str) -> list[CellRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_FIELDS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    out = []
    for row in reader:
        opt = lambda k: float(row[k]) if row[k] != "" else None  # noqa: E731
        out.append(
            CellRecord(
                row["estimator"],
                float(row["beta"]),
                float(row["T"]),
                opt("mean"),
                opt("variance"),
                opt("stddev"),
                int(row["n_effective"]),
                int(row["n_rejected"]),
            )
        )
    return out


def format_markdown(report: McReport, digits: int = 4) -> str:
    """One row per (beta, estimator, statistic) and one column per horizon."""
    horizons = sorted({rec.T for rec in report.records})
    by_key = {(rec.beta, rec.estimator, rec.T): rec for rec in report.records}
    rows = []
    seen = []
    for rec in report.records:
        if (rec.beta, rec.estimator) not in seen:
            seen.append((rec.beta, rec.estimator))
    head = "| beta | estimator | stat | " + " | ".join(f"T={T:.12g}" for T in horizons) + " |"
    rows.append(head)
    rows.append("|" + "---|" * (3 + len(horizons)))
    num = lambda x: "" if x is None else f"{x:.{digits}f}"  # noqa: E731
    for beta, name in seen:
        for stat, attr in (("E", "mean"), ("Var", "variance")):
            cells = [num(getattr(by_key[(beta, name, T)], attr)) if (beta, name, T) in by_key else "" for T in horizons]
            rows.append(f"| {beta:g} | {name} | {stat} | " + " | ".join(cells) + " |")
    return "\n".join(rows) + "\n"


def write_report(report: McReport, fmt: str, destination) -> Path:
    """Write ``report`` as ``csv`` or ``markdown``; returns the written path."""
    if fmt == "csv":
        text = format_csv(report.records)
    elif fmt == "markdown":
        text = format_markdown(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    dest = Path(destination)
    dest.write_text(text, encoding="utf-8", newline="")
    return dest
