"""Experiment runner: sweeps over methods x n_subs x replications.

Within a replication every method and grid point sees the same generated
problem (paired comparison); data are regenerated per replication.  Each fit
draws its seed from hash(base_seed, method, n_subs, replication), recorded
in the output, so any single row can be reproduced in isolation.
"""

import csv
import datetime
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import estimators
from .datagen import (
    REGIMES,
    gen_corrupted_split,
    gen_regime_split,
    load_airline_csv,
)
from .diagnostics import (
    DEFAULT_HISTOGRAM_BINS,
    compute_diagnostics,
    histogram_l1_distance,
)
from .errors import ConfigError, MissingCorruptedError, MissingTruthError, RblsError
from .estimators import EstimatorConfig, METHOD_CODES, fit
from .seeding import ROLE_DATA, spawn_seed

CORRUPTED = "corrupted"
AIRLINE = "airline"
SCENARIOS = (CORRUPTED,) + REGIMES + (AIRLINE,)

RESULTS_HEADER = "method,n_subs,replication,seed,est_error,rmse,wall_time_ms,error"

# Exact influence costs O(n p^2); refuse configs where that is unreasonable.
IWS_EXACT_BUDGET = 10**9


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep: scenario x methods x n_subs_grid x replications.

    For simulated scenarios ``n``/``p`` size the training problem and
    ``pi``/``sigma_*`` parameterize the corruption; for the airline
    scenario ``n`` is the number of training rows taken from
    ``airline_path`` and the generator fields are ignored.
    """

    scenario: str
    methods: tuple
    n_subs_grid: tuple
    replications: int
    n: int = 20000
    p: int = 50
    n_test: int = 1000
    pi: float = 0.3
    sigma_x: float = 1.0
    sigma_w: float = 0.4
    sigma_eps: float = 0.1
    base_seed: int = 0
    output_dir: str = "."
    airline_path: str | None = None
    corrupt_test: bool = False
    weight_floor_ratio: float = estimators.DEFAULT_WEIGHT_FLOOR_RATIO
    importance_reweight: bool = False

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if not self.methods:
            raise ConfigError("methods list is empty")
        for m in self.methods:
            if m not in METHOD_CODES:
                raise ConfigError(f"unknown method {m!r}")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if self.n_test < 1:
            raise ConfigError("n_test must be >= 1")
        grid = tuple(int(g) for g in self.n_subs_grid)
        if not grid:
            raise ConfigError("n_subs_grid is empty")
        if list(grid) != sorted(grid):
            raise ConfigError("n_subs_grid must be sorted ascending")
        if self.scenario != AIRLINE:
            if self.n <= self.p:
                raise ConfigError(f"need n > p, got n={self.n}, p={self.p}")
            if any(g < self.p for g in grid):
                raise ConfigError(f"every n_subs grid value must be >= p = {self.p}")
            if estimators.IWS_LS in self.methods and self.n * self.p**2 > IWS_EXACT_BUDGET:
                raise ConfigError(
                    f"IWS_LS needs n * p^2 <= {IWS_EXACT_BUDGET:g}; "
                    f"got {self.n * self.p ** 2:g} (use AIWS_LS/ARWS_LS at this scale)"
                )
        if self.scenario == AIRLINE and not self.airline_path:
            raise ConfigError("airline scenario requires airline_path")
        return self


@dataclass(frozen=True)
class ExperimentResult:
    method: str
    n_subs: int
    replication: int
    seed: int
    est_error: float | None
    rmse: float | None
    wall_time_ms: float | None
    error: str = ""


def config_from_dict(raw):
    """Build and validate an ExperimentConfig from a parsed JSON object."""
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "methods" not in raw or "n_subs_grid" not in raw or "scenario" not in raw:
        raise ConfigError("config requires scenario, methods and n_subs_grid")
    try:
        cfg = ExperimentConfig(
            **{
                **raw,
                "methods": tuple(raw["methods"]),
                "n_subs_grid": tuple(int(g) for g in raw["n_subs_grid"]),
            }
        )
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad config value: {err}") from err
    return cfg.validate()


def _generate_split(cfg, replication):
    seed = spawn_seed(cfg.base_seed, ROLE_DATA, replication)
    if cfg.scenario == CORRUPTED:
        return gen_corrupted_split(
            cfg.n,
            cfg.n_test,
            cfg.p,
            cfg.pi,
            cfg.sigma_x,
            cfg.sigma_w,
            cfg.sigma_eps,
            seed,
            corrupt_test=cfg.corrupt_test,
        )
    return gen_regime_split(cfg.n, cfg.n_test, cfg.p, cfg.scenario, seed)


def _run_replication(cfg, replication, split):
    train, test = split.train, split.test
    beta = train.truth.beta if train.truth is not None else None
    out = []
    for method in cfg.methods:
        for n_subs in cfg.n_subs_grid:
            fit_seed = spawn_seed(cfg.base_seed, METHOD_CODES[method], n_subs, replication)
            est_cfg = EstimatorConfig(
                method=method,
                n_subs=int(n_subs),
                seed=fit_seed,
                weight_floor_ratio=cfg.weight_floor_ratio,
                importance_reweight=cfg.importance_reweight,
            )
            try:
                result = fit(train, est_cfg)
            except RblsError as err:
                out.append(
                    ExperimentResult(
                        method, int(n_subs), replication, fit_seed, None, None, None,
                        f"{type(err).__name__}: {err}",
                    )
                )
                continue
            coef = result.coefficients
            est_error = float(np.linalg.norm(coef - beta)) if beta is not None else None
            rmse = float(np.sqrt(np.mean((test.y - test.Z @ coef) ** 2)))
            out.append(
                ExperimentResult(
                    method, int(n_subs), replication, fit_seed,
                    est_error, rmse, result.wall_time_s * 1000.0,
                )
            )
    return out


def run_experiment(cfg, threads=1):
    """Run the full sweep; deterministic result set given cfg.

    Fit failures are recorded in the row's ``error`` field and the run
    continues.  Rows come back sorted by (method, n_subs, replication)
    whatever the execution order, and the derived per-fit seeds are checked
    for collisions.
    """
    cfg.validate()
    if cfg.scenario == AIRLINE:
        split = load_airline_csv(cfg.airline_path, cfg.n, cfg.n_test)
        splits = {rep: split for rep in range(cfg.replications)}
    else:
        splits = {rep: _generate_split(cfg, rep) for rep in range(cfg.replications)}

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(
                pool.map(
                    lambda rep: _run_replication(cfg, rep, splits[rep]),
                    range(cfg.replications),
                )
            )
    else:
        chunks = [_run_replication(cfg, rep, splits[rep]) for rep in range(cfg.replications)]
    results = [row for chunk in chunks for row in chunk]

    seeds = [r.seed for r in results]
    if len(set(seeds)) != len(seeds):
        raise RuntimeError("per-fit seed derivation collided; grid coordinates not unique")

    order = {m: i for i, m in enumerate(cfg.methods)}
    results.sort(key=lambda r: (order[r.method], r.n_subs, r.replication))
    return results


def _fmt(value):
    return "" if value is None else repr(float(value))


def write_results_csv(results, path, deterministic=False):
    """Write result rows; under deterministic mode the timestamp line is
    suppressed and wall times are zeroed so repeated runs are byte-identical."""
    buf = io.StringIO()
    if not deterministic:
        stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
        buf.write(f"# generated {stamp}\n")
    buf.write(RESULTS_HEADER + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    for r in results:
        wall = 0.0 if deterministic else r.wall_time_ms
        if r.error:
            wall = None
        writer.writerow(
            [r.method, r.n_subs, r.replication, r.seed,
             _fmt(r.est_error), _fmt(r.rmse), _fmt(wall), r.error]
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


@dataclass(frozen=True)
class AggregateRow:
    method: str
    n_subs: int
    n_ok: int
    n_failed: int
    est_error_mean: float | None
    est_error_sd: float | None
    rmse_mean: float | None
    rmse_sd: float | None
    wall_time_ms_mean: float | None
    wall_time_ms_sd: float | None


def _mean_sd(values):
    vals = [v for v in values if v is not None]
    if not vals:
        return None, None
    arr = np.asarray(vals, dtype=np.float64)
    sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), sd


def aggregate(results):
    """Group results by (method, n_subs) and report mean/sd per metric.

    Errored rows are excluded from the statistics and counted in n_failed.
    """
    if not results:
        raise ConfigError("no results to aggregate")
    groups = {}
    for r in results:
        groups.setdefault((r.method, r.n_subs), []).append(r)
    rows = []
    for (method, n_subs), rs in groups.items():
        ok = [r for r in rs if not r.error]
        est_mean, est_sd = _mean_sd([r.est_error for r in ok])
        rmse_mean, rmse_sd = _mean_sd([r.rmse for r in ok])
        wall_mean, wall_sd = _mean_sd([r.wall_time_ms for r in ok])
        rows.append(
            AggregateRow(
                method, n_subs, len(ok), len(rs) - len(ok),
                est_mean, est_sd, rmse_mean, rmse_sd, wall_mean, wall_sd,
            )
        )
    return rows


AGGREGATE_HEADER = (
    "method,n_subs,n_ok,n_failed,est_error_mean,est_error_sd,"
    "rmse_mean,rmse_sd,wall_time_ms_mean,wall_time_ms_sd"
)


def write_aggregates_csv(rows, path, deterministic=False):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(AGGREGATE_HEADER + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        for r in rows:
            wall_mean = 0.0 if deterministic and r.wall_time_ms_mean is not None else r.wall_time_ms_mean
            wall_sd = 0.0 if deterministic and r.wall_time_ms_sd is not None else r.wall_time_ms_sd
            writer.writerow(
                [r.method, r.n_subs, r.n_ok, r.n_failed,
                 _fmt(r.est_error_mean), _fmt(r.est_error_sd),
                 _fmt(r.rmse_mean), _fmt(r.rmse_sd), _fmt(wall_mean), _fmt(wall_sd)]
            )


GNUPLOT_SCRIPT = """set datafile separator ','
set datafile missing ''
set key outside
set logscale y
set xlabel 'subsampled rows'
set ylabel 'estimation error (mean)'
plot for [i=1:words(methods)] 'aggregates.csv' \\
    using 2:(strcol(1) eq word(methods, i) ? $5 : NaN) \\
    with linespoints title word(methods, i)
"""


def write_gnuplot_script(methods, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("methods = '" + " ".join(methods) + "'\n")
        fh.write(GNUPLOT_SCRIPT)


def emit_fig1_data(problem, out_dir, bins=DEFAULT_HISTOGRAM_BINS):
    """Histograms of leverage/influence split by corruption status.

    Writes ``fig1_histograms.csv`` (metric, group, bin edges, mass) and
    ``fig1_distances.csv`` (the two pooled-bin L1 distances) under
    ``out_dir`` and returns the distances as a dict.
    """
    if problem.truth is None:
        raise MissingTruthError("fig1 needs a simulated problem with stored truth")
    mask = problem.truth.corruption_mask
    if not mask.any():
        raise MissingCorruptedError("no corrupted rows; distances are undefined")
    if mask.all():
        raise MissingCorruptedError("no clean rows; distances are undefined")
    report = compute_diagnostics(problem.Z, problem.y)
    metrics = {"leverage": report.leverages, "influence": report.influences}
    distances = {}
    os.makedirs(out_dir, exist_ok=True)
    with open(
        os.path.join(out_dir, "fig1_histograms.csv"), "w", encoding="utf-8", newline=""
    ) as fh:
        fh.write("metric,group,bin_left,bin_right,mass\n")
        writer = csv.writer(fh, lineterminator="\n")
        for name, values in metrics.items():
            corrupted = values[mask]
            clean = values[~mask]
            distances[name] = histogram_l1_distance(corrupted, clean, bins)
            lo = float(min(corrupted.min(), clean.min()))
            hi = float(max(corrupted.max(), clean.max()))
            edges = np.linspace(lo, hi, bins + 1)
            for group, sample in (("corrupted", corrupted), ("clean", clean)):
                hist, _ = np.histogram(sample, bins=bins, range=(lo, hi))
                masses = hist / hist.sum()
                for k in range(bins):
                    writer.writerow(
                        [name, group, repr(edges[k]), repr(edges[k + 1]), repr(masses[k])]
                    )
    with open(
        os.path.join(out_dir, "fig1_distances.csv"), "w", encoding="utf-8", newline=""
    ) as fh:
        fh.write("metric,l1_distance\n")
        for name, dist in distances.items():
            fh.write(f"{name},{dist!r}\n")
    return distances
