"""Monte Carlo coverage study for the occupancy-probability intervals.

Replication ``i`` of every cell draws from ``RngStream(master_seed, i)`` and
per-replication results are reduced in index order, so output does not
depend on how many worker processes are used.
"""

from __future__ import annotations

import io
import math
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .distributions import DistributionSpec, RngStream, draw_sample, true_occupancy_probabilities
from .intervals import CIConfig, Method, METHOD_ORDER, build_interval
from .numerics import chi_squared_sf
from .profile import build_profile

CSV_HEADER = (
    "dist",
    "n",
    "r",
    "method",
    "coverage",
    "mean_width",
    "mean_width_unclipped",
    "degenerate_fraction",
    "reps",
    "seed",
)
FORMAT_VERSION = 1
LARGE_N = 10**7
DEFAULT_METHODS = (Method.NORMAL, Method.POISSON, Method.HEURISTIC)


@dataclass(frozen=True)
class ExperimentConfig:
    spec: DistributionSpec
    n_grid: tuple[int, ...]
    r_values: tuple[int, ...] = (0, 1, 2, 3)
    methods: tuple[Method, ...] = DEFAULT_METHODS
    reps: int = 5000
    alpha: float = 0.05
    V: float = 2.0
    master_seed: int = 0
    # replication count used instead of ``reps`` for n >= 10**7
    large_n_reps: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "r_values", tuple(int(r) for r in self.r_values))
        object.__setattr__(self, "methods", tuple(Method.parse(m) for m in self.methods))
        if not self.n_grid or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError("n_grid must be nonempty and strictly increasing")
        if self.n_grid[0] < 1:
            raise ValueError("sample sizes must be >= 1")
        if self.reps < 1 or (self.large_n_reps is not None and self.large_n_reps < 1):
            raise ValueError("replication counts must be >= 1")
        if not self.methods or not self.r_values or min(self.r_values) < 0:
            raise ValueError("need at least one method and nonnegative r values")
        CIConfig(self.alpha, self.V)

    def reps_for(self, n: int) -> int:
        if self.large_n_reps is not None and n >= LARGE_N:
            return self.large_n_reps
        return self.reps

    @property
    def ci_config(self) -> CIConfig:
        return CIConfig(self.alpha, self.V)


@dataclass(frozen=True)
class ExperimentRow:
    dist: str
    n: int
    r: int
    method: Method
    coverage: float
    mean_width: float
    mean_width_unclipped: float
    degenerate_fraction: float
    reps: int
    seed: int

    def csv_fields(self) -> list[str]:
        return [
            self.dist,
            str(self.n),
            str(self.r),
            self.method.value,
            _g(self.coverage),
            _g(self.mean_width),
            _g(self.mean_width_unclipped),
            _g(self.degenerate_fraction),
            str(self.reps),
            str(self.seed),
        ]


@dataclass
class CellResult:
    """Rows for one (spec, n) cell plus the per-replication scalars behind them.

    ``estimates``, ``sd_estimates`` and ``truth`` have shape (reps, len(r_values)).
    """

    rows: list[ExperimentRow]
    r_values: tuple[int, ...]
    estimates: np.ndarray = field(repr=False)
    sd_estimates: np.ndarray = field(repr=False)
    truth: np.ndarray = field(repr=False)
    next_counts: np.ndarray = field(repr=False)


def _g(x: float) -> str:
    return format(float(x), ".9g")


# -- replication -------------------------------------------------------------

# per (r, method): contained, width, unclipped width, degenerate
_N_STATS = 4


def _replicate(spec, n, r_values, methods, config: CIConfig, master_seed, index):
    sample = draw_sample(spec, n, RngStream(master_seed, index))
    profile = build_profile(sample)
    del sample
    truth = true_occupancy_probabilities(spec, n, profile, r_values)
    stats = np.zeros((len(r_values), len(methods), _N_STATS))
    scalars = np.zeros((len(r_values), 3))
    for i, r in enumerate(r_values):
        if r > n - 1:
            stats[i] = math.nan
            scalars[i] = math.nan
            continue
        n_next = profile.occupancy_count(r + 1)
        T = (r + 1) * n_next / n
        s_hat = math.sqrt((r + 1) ** 2 * n_next + (r + 2) * (r + 1) * profile.occupancy_count(r + 2))
        scalars[i] = (T, s_hat, n_next)
        for j, method in enumerate(methods):
            ci = build_interval(method, T, s_hat, n_next, n, r, config)
            stats[i, j] = (ci.contains(truth[i]), ci.width, ci.width_unclipped, ci.degenerate_point)
    return stats, scalars, truth


def _replicate_chunk(args):
    spec, n, r_values, methods, config, master_seed, indices = args
    return [_replicate(spec, n, r_values, methods, config, master_seed, i) for i in indices]


def _chunks(total: int, parts: int) -> list[range]:
    size = max(1, math.ceil(total / parts))
    return [range(lo, min(lo + size, total)) for lo in range(0, total, size)]


def simulate_cell(
    spec: DistributionSpec,
    n: int,
    r_values: Sequence[int],
    methods: Sequence[Method | str],
    reps: int,
    alpha: float = 0.05,
    V: float = 2.0,
    master_seed: int = 0,
    workers: int = 1,
    executor: ProcessPoolExecutor | None = None,
) -> CellResult:
    """Run ``reps`` replications at sample size ``n`` for every r and method."""
    r_values = tuple(int(r) for r in r_values)
    methods = tuple(Method.parse(m) for m in methods)
    config = CIConfig(alpha, V)
    if executor is None and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return simulate_cell(spec, n, r_values, methods, reps, alpha, V, master_seed, workers, pool)

    if executor is None:
        results = [_replicate(spec, n, r_values, methods, config, master_seed, i) for i in range(reps)]
    else:
        jobs = [
            (spec, n, r_values, methods, config, master_seed, chunk)
            for chunk in _chunks(reps, 4 * max(workers, 1))
        ]
        results = [res for part in executor.map(_replicate_chunk, jobs) for res in part]

    stats = np.stack([res[0] for res in results])
    scalars = np.stack([res[1] for res in results])
    truth = np.stack([res[2] for res in results])
    # fixed-order reduction over the replication axis
    means = stats.mean(axis=0)
    rows = []
    for i, r in enumerate(r_values):
        if r > n - 1:
            continue
        for j, method in enumerate(methods):
            cov, width, width_raw, degen = means[i, j]
            rows.append(
                ExperimentRow(
                    spec.text(), n, r, method, float(cov), float(width), float(width_raw), float(degen), reps, master_seed
                )
            )
    return CellResult(
        rows=rows,
        r_values=r_values,
        estimates=scalars[:, :, 0],
        sd_estimates=scalars[:, :, 1],
        truth=truth,
        next_counts=scalars[:, :, 2],
    )


def run_cell(
    spec: DistributionSpec,
    n: int,
    r: int,
    methods: Sequence[Method | str],
    reps: int,
    alpha: float = 0.05,
    V: float = 2.0,
    master_seed: int = 0,
    workers: int = 1,
) -> list[ExperimentRow]:
    """One ExperimentRow per method for a single (n, r) cell."""
    return simulate_cell(spec, n, [r], methods, reps, alpha, V, master_seed, workers).rows


def _sort_key(row: ExperimentRow):
    return (row.n, row.r, METHOD_ORDER.index(row.method))


def experiment_rows(config: ExperimentConfig, workers: int = 1) -> list[ExperimentRow]:
    rows: list[ExperimentRow] = []
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for n in config.n_grid:
            cell = simulate_cell(
                config.spec,
                n,
                config.r_values,
                config.methods,
                config.reps_for(n),
                config.alpha,
                config.V,
                config.master_seed,
                workers,
                pool,
            )
            rows.extend(cell.rows)
    finally:
        if pool is not None:
            pool.shutdown()
    return sorted(rows, key=_sort_key)


def metadata_lines(config: ExperimentConfig) -> list[str]:
    return [
        f"# turing_ci {__version__} format={FORMAT_VERSION}",
        "# dist={} alpha={} V={} reps={} large_n_reps={} seed={} r={} methods={} n={}".format(
            config.spec.text(),
            _g(config.alpha),
            _g(config.V),
            config.reps,
            config.large_n_reps if config.large_n_reps is not None else "none",
            config.master_seed,
            ",".join(map(str, config.r_values)),
            ",".join(m.value for m in config.methods),
            ",".join(map(str, config.n_grid)),
        ),
    ]


def format_csv(config: ExperimentConfig, rows: Iterable[ExperimentRow]) -> str:
    """CSV document: ``#`` metadata lines, the fixed header, then one line per row."""
    buf = io.StringIO()
    for line in metadata_lines(config):
        buf.write(line + "\n")
    buf.write(",".join(CSV_HEADER) + "\n")
    for row in rows:
        buf.write(",".join(row.csv_fields()) + "\n")
    return buf.getvalue()


def run_experiment(config: ExperimentConfig, out_path=None, workers: int = 1) -> str:
    """Run the whole grid; write the CSV to ``out_path`` if given and return it."""
    text = format_csv(config, experiment_rows(config, workers))
    if out_path is not None:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)
    return text


def read_csv_rows(text: str) -> list[dict[str, str]]:
    import csv

    lines = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(lines))


# -- grids and goodness of fit ----------------------------------------------


def log_grid(start: float, stop: float, count: int) -> tuple[int, ...]:
    """``count`` log-spaced integers from ``start`` to ``stop`` (duplicates dropped)."""
    if count == 1:
        return (int(round(start)),)
    raw = np.logspace(math.log10(start), math.log10(stop), count)
    return tuple(sorted({int(round(x)) for x in raw}))


def decade_grid(start: float, stop: float, per_decade: int = 10) -> tuple[int, ...]:
    decades = math.log10(stop) - math.log10(start)
    return log_grid(start, stop, int(round(decades * per_decade)) + 1)


@dataclass(frozen=True)
class GofResult:
    statistic: float
    df: int
    p_value: float
    observed: tuple[int, ...]
    expected: tuple[float, ...]


def poisson_gof(counts: Sequence[int], mean: float, top: int = 2) -> GofResult:
    """Chi-squared goodness of fit of ``counts`` to Poisson(mean) on bins {0}, ..., {top-1}, {>=top}."""
    counts = np.asarray(counts, dtype=np.int64)
    total = counts.size
    observed = [int(np.sum(counts == k)) for k in range(top)] + [int(np.sum(counts >= top))]
    probs = [math.exp(-mean + k * math.log(mean) - math.lgamma(k + 1)) for k in range(top)]
    probs.append(max(0.0, 1.0 - math.fsum(probs)))
    expected = [total * p for p in probs]
    stat = math.fsum((o - e) ** 2 / e for o, e in zip(observed, expected))
    df = len(observed) - 1
    return GofResult(stat, df, chi_squared_sf(stat, df), tuple(observed), tuple(expected))
