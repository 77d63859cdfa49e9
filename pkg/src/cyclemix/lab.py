"""Seeded scaling sweeps, trimming, exponent fits and CSV persistence.

Each trial draws one graph and builds every drift variant on that same
graph, so reversible and non-reversible mixing times come in pairs. Trial
seeds are derived from ``(base_seed, n, trial, attempt)``; results do not
depend on how trials are scheduled across worker processes.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .chain import ChainParams, build_homogeneous, is_feasible
from .conductance import (
    CONNECTED_LIMIT,
    EXHAUSTIVE_LIMIT,
    conductance_arc_upper,
    conductance_connected,
    conductance_exact,
)
from .errors import (
    CycleMixError,
    DegeneratePointsError,
    EmptyInputError,
    InvalidParameterError,
    NotConvergedError,
)
from .mixing import DEFAULT_EPSILON, DEFAULT_MAX_STEPS, mixing_time
from .topology import MODELS, derive_seed, generate, max_long_range_degree

__all__ = [
    "SweepConfig",
    "SweepRecord",
    "SummaryRow",
    "Summary",
    "RECORD_FIELDS",
    "run_sweep",
    "run_trial",
    "trim_percentiles",
    "fit_exponent",
    "summarize",
    "format_records",
    "write_records",
    "read_records",
    "format_summary_csv",
    "write_plot_data",
]

log = logging.getLogger(__name__)

RECORD_FIELDS = ("model", "n", "alpha", "r", "seed", "t_mix", "phi_kind",
                 "phi_value", "max_degree", "wall_time_ms")


@dataclass(frozen=True)
class SweepConfig:
    model: str
    alpha: float
    sizes: tuple[int, ...]
    trials_per_size: int
    params: ChainParams
    r_values: tuple[float, ...] = (0.0,)
    epsilon: float = DEFAULT_EPSILON
    base_seed: int = 0
    trim_fraction: float = 0.05
    max_resamples: int = 100
    compute_mixing: bool = True
    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self):
        object.__setattr__(self, "model", str(self.model).upper())
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        object.__setattr__(self, "r_values", tuple(float(r) for r in self.r_values))
        if self.model not in MODELS:
            raise InvalidParameterError(f"unknown model {self.model!r}")
        if not self.sizes or any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise InvalidParameterError(f"sizes must be nonempty and strictly increasing: {self.sizes}")
        if self.trials_per_size < 1:
            raise InvalidParameterError("trials_per_size must be >= 1")
        if not (0 <= self.trim_fraction < 0.5):
            raise InvalidParameterError("trim_fraction must lie in [0, 0.5)")
        if not self.r_values:
            raise InvalidParameterError("need at least one drift value")
        for r in self.r_values:
            self.params.with_r(r)  # validates 0 <= r <= q_c

    def describe(self) -> str:
        """One-line provenance string used as a CSV comment."""
        p = self.params
        return (f"model={self.model} alpha={self.alpha!r} sizes={';'.join(map(str, self.sizes))} "
                f"trials={self.trials_per_size} q_c={p.q_c!r} q_l={p.q_l!r} d={p.d!r} "
                f"r={';'.join(repr(r) for r in self.r_values)} epsilon={self.epsilon!r} "
                f"base_seed={self.base_seed} trim={self.trim_fraction!r}")


@dataclass(frozen=True)
class SweepRecord:
    model: str
    n: int
    alpha: float
    r: float
    seed: int
    t_mix: int | None
    phi_kind: str
    phi_value: float
    max_degree: int
    wall_time: float = field(default=0.0, compare=False)  # milliseconds
    trial: int = 0


def _estimate_phi(P, g):
    n = g.n
    try:
        if n <= EXHAUSTIVE_LIMIT:
            est = conductance_exact(P)
        elif n <= CONNECTED_LIMIT:
            est = conductance_connected(P)
        else:
            est = conductance_arc_upper(P, g)
    except CycleMixError as exc:
        log.info("no conductance estimate for n=%d: %s", n, exc)
        return "none", math.nan
    return est.kind, est.value


def run_trial(config: SweepConfig, n: int, trial: int, observer=None) -> list[SweepRecord]:
    """All drift variants for one (size, trial) cell; resamples infeasible graphs."""
    p = config.params
    for attempt in range(config.max_resamples + 1):
        seed = derive_seed(config.base_seed, n, trial, attempt)
        g = generate(config.model, n, config.alpha, seed)
        deg = max_long_range_degree(g)
        if deg <= p.d and is_feasible(g, p):
            break
        log.info("n=%d trial=%d: resampling (max degree %d > d=%g)", n, trial, deg, p.d)
    else:
        log.warning("n=%d trial=%d skipped after %d resamples", n, trial, config.max_resamples)
        return [SweepRecord(config.model, n, config.alpha, r, seed, None, "skipped", math.nan,
                            deg, 0.0, trial) for r in config.r_values]
    if attempt:
        log.info("n=%d trial=%d: %d resamples", n, trial, attempt)

    t0 = time.perf_counter()
    kind, phi = _estimate_phi(build_homogeneous(g, p.with_r(0.0)), g)
    phi_ms = (time.perf_counter() - t0) * 1e3
    out = []
    for r in config.r_values:
        t0 = time.perf_counter()
        t_mix = None
        if config.compute_mixing:
            P = build_homogeneous(g, p.with_r(r))
            try:
                res = mixing_time(P, config.epsilon, config.max_steps)
                t_mix = res.t_mix
                if observer is not None:
                    observer(n, trial, r, res)
            except NotConvergedError as exc:
                log.warning("n=%d trial=%d r=%g: %s", n, trial, r, exc)
        ms = (time.perf_counter() - t0) * 1e3 + phi_ms
        out.append(SweepRecord(config.model, n, config.alpha, r, seed, t_mix, kind, phi, deg, ms, trial))
    return out


def _job(args):
    return run_trial(*args)


def run_sweep(config: SweepConfig, workers: int = 1, progress=None,
              observer=None) -> list[SweepRecord]:
    """Run every (size, trial) cell; records sorted by (n, trial, r).

    ``observer(n, trial, r, MixingResult)`` sees every mixing run; it is only
    supported with a single worker.
    """
    if observer is not None and workers > 1:
        raise InvalidParameterError("observer requires workers=1")
    jobs = [(config, n, t) for n in config.sizes for t in range(config.trials_per_size)]
    records: list[SweepRecord] = []
    if workers <= 1:
        for job in jobs:
            records.extend(run_trial(*job, observer=observer))
            if progress:
                progress(job[1], job[2])
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for recs in pool.map(_job, jobs):
                records.extend(recs)
                if progress:
                    progress(recs[0].n, recs[0].trial)
    records.sort(key=lambda rec: (rec.n, rec.trial, rec.r))
    return records


# ---------------------------------------------------------------------------
# statistics


def trim_percentiles(samples, trim_fraction: float = 0.05) -> list[float]:
    """Sorted samples with floor(trim * m) values dropped from each tail."""
    vals = sorted(samples)
    if not vals:
        raise EmptyInputError("cannot trim an empty sample")
    if not (0 <= trim_fraction < 0.5):
        raise InvalidParameterError("trim_fraction must lie in [0, 0.5)")
    cut = math.floor(trim_fraction * len(vals) + 1e-9)
    return vals[cut:len(vals) - cut]


def fit_exponent(points) -> tuple[float, float, float]:
    """Least-squares line through (log n, log value).

    Returns ``(slope, intercept, rms_residual)``.
    """
    pts = [(float(n), float(v)) for n, v in points]
    if len({n for n, _ in pts}) < 3:
        raise DegeneratePointsError("need at least three distinct n")
    if any(n <= 0 or v <= 0 for n, v in pts):
        raise DegeneratePointsError("log-log fit needs positive n and values")
    x = np.log([n for n, _ in pts])
    y = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return float(slope), float(intercept), float(np.sqrt(np.mean(resid**2)))


@dataclass(frozen=True)
class SummaryRow:
    n: int
    r: float
    count: int
    t_mix_median: float
    t_mix_mean: float
    phi_median: float
    phi_mean: float


@dataclass
class Summary:
    rows: list[SummaryRow]
    exponents: dict[float, tuple[float, float, float] | None]

    def row(self, n: int, r: float) -> SummaryRow:
        for row in self.rows:
            if row.n == n and row.r == r:
                return row
        raise KeyError((n, r))


def _stats(vals, trim):
    vals = [v for v in vals if v is not None and not math.isnan(v)]
    if not vals:
        return 0, math.nan, math.nan
    kept = trim_percentiles(vals, trim)
    return len(kept), float(np.median(kept)), float(np.mean(kept))


def summarize(records, trim: float = 0.05) -> Summary:
    """Per (n, r) trimmed median/mean of t_mix and phi, plus slopes per r."""
    groups: dict[tuple[int, float], list[SweepRecord]] = {}
    for rec in records:
        groups.setdefault((rec.n, rec.r), []).append(rec)
    rows = []
    for (n, r) in sorted(groups):
        grp = groups[(n, r)]
        cnt, tmed, tmean = _stats([rec.t_mix for rec in grp], trim)
        _, pmed, pmean = _stats([rec.phi_value for rec in grp], trim)
        rows.append(SummaryRow(n, r, cnt, tmed, tmean, pmed, pmean))
    exponents = {}
    for r in sorted({row.r for row in rows}):
        pts = [(row.n, row.t_mix_median) for row in rows if row.r == r and row.count]
        try:
            exponents[r] = fit_exponent(pts)
        except DegeneratePointsError:
            exponents[r] = None
    return Summary(rows, exponents)


# ---------------------------------------------------------------------------
# persistence


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def format_records(records, config: SweepConfig | None = None, timings: bool = False) -> str:
    """Records CSV. Timings are left blank unless asked for, keeping reruns byte-identical."""
    buf = io.StringIO()
    if config is not None:
        buf.write(f"# {config.describe()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    for rec in records:
        w.writerow([rec.model, rec.n, _fmt(rec.alpha), _fmt(rec.r), rec.seed, _fmt(rec.t_mix),
                    rec.phi_kind, _fmt(rec.phi_value), rec.max_degree,
                    f"{rec.wall_time:.3f}" if timings else ""])
    return buf.getvalue()


def write_records(path, records, config: SweepConfig | None = None, timings: bool = False) -> None:
    Path(path).write_text(format_records(records, config, timings))


def read_records(path) -> list[SweepRecord]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    out = []
    last = None
    trial = -1
    for row in csv.DictReader(lines):
        n = int(row["n"])
        r = float(row["r"])
        key = (n, int(row["seed"]))
        if key != last:
            trial = trial + 1 if last is not None and last[0] == n else 0
            last = key
        out.append(SweepRecord(
            row["model"], n, float(row["alpha"]), r, int(row["seed"]),
            int(row["t_mix"]) if row["t_mix"] else None, row["phi_kind"],
            float(row["phi_value"]) if row["phi_value"] else math.nan,
            int(row["max_degree"]),
            float(row["wall_time_ms"]) if row["wall_time_ms"] else 0.0, trial))
    return out


def format_summary_csv(summary: Summary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "r", "count", "t_mix_median", "t_mix_mean", "phi_median", "phi_mean"])
    for row in summary.rows:
        w.writerow([row.n, repr(row.r), row.count, repr(row.t_mix_median), repr(row.t_mix_mean),
                    repr(row.phi_median), repr(row.phi_mean)])
    for r, fit in summary.exponents.items():
        if fit is not None:
            buf.write(f"# slope r={r!r}: {fit[0]!r} intercept={fit[1]!r} rms={fit[2]!r}\n")
    return buf.getvalue()


def write_plot_data(directory, summary: Summary) -> list[Path]:
    """One two-column ``n t_mix_median`` file per drift value, for log-log plotting."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for r in sorted({row.r for row in summary.rows}):
        p = directory / f"tmix_r{r:g}.dat"
        with p.open("w") as fh:
            fh.write(f"# n t_mix_median (r={r!r})\n")
            for row in summary.rows:
                if row.r == r and row.count:
                    fh.write(f"{row.n} {row.t_mix_median!r}\n")
        paths.append(p)
    return paths
