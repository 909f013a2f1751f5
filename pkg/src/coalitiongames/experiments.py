"""Random-game campaigns, accuracy benchmarks, and report assembly.

Two experiment harnesses live here. The gap campaign draws seeded random
symmetric games, solves the synchronous and asynchronous coalition
values for each, and aggregates the gap and ratio distributions into
stats, histogram bins, and CSV tables. The value-gap benchmark scores
solver configurations by an internal consistency check: a matrix game
and its negated transpose have values summing to zero, so the deviation
|v(M) + v(-M^T)| measures solver accuracy without knowing either true
value. solve_game bundles the solvers into a single report for one
tensor, which is what the CLI serializes.

Trials are pure functions of (config, trial index): the game is drawn
from master_seed + trial and the solvers are reseeded per trial, so
campaigns are reproducible run-to-run regardless of execution order or
worker count. Workers default to in-process execution; a process pool
only pays off when several cores are available.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .engine import (
    SolverConfig,
    best_pure_pair,
    solve_matrix_game,
    solve_maximin,
    solve_minimax,
)
from .fictitious import sync_fp
from .games import (
    PayoffMatrix2,
    PayoffTensor3,
    ValueReport,
    negative_transpose,
    random_symmetric_tensor,
)
from .smoothing import SmoothingSpec

SYNC_ZERO_TOL = 1e-6  # |v_sync| below this leaves theta undefined
GAP_SLACK = 2e-3  # allowed negative gap from solver tolerance
THETA_SLACK = 1e-2  # allowed excursion of theta outside [0, 1]

SAMPLES_SCHEMA = "gap-campaign-v1"
HISTOGRAM_SCHEMA = "gap-histogram-v1"


@dataclass(frozen=True)
class GapSample:
    """One random game's solved coalition values.

    gap is the asynchronous value's distance above the synchronous one;
    theta locates the asynchronous value between the synchronous value
    and zero, and is None for games whose synchronous value is already
    (numerically) zero, where the ratio carries no information.
    """

    trial: int
    game_seed: int
    v_sync: float
    v_async: float
    gap: float
    theta: float | None

    @classmethod
    def from_values(
        cls, trial: int, game_seed: int, v_sync: float, v_async: float
    ) -> "GapSample":
        theta = v_async / v_sync if abs(v_sync) >= SYNC_ZERO_TOL else None
        return cls(
            trial=trial,
            game_seed=game_seed,
            v_sync=float(v_sync),
            v_async=float(v_async),
            gap=float(v_async - v_sync),
            theta=None if theta is None else float(theta),
        )

    def __post_init__(self):
        if self.gap < -GAP_SLACK:
            raise ValueError(
                f"trial {self.trial}: asynchronous value {self.v_async} fell "
                f"more than {GAP_SLACK} below synchronous {self.v_sync}"
            )
        if self.theta is not None and not (
            -THETA_SLACK <= self.theta <= 1.0 + THETA_SLACK
        ):
            raise ValueError(
                f"trial {self.trial}: ratio {self.theta} outside [0, 1]"
            )


def _default_sync_solver() -> SolverConfig:
    # The coalition best response is concave in x, so a long projected
    # gradient run with mild smoothing tracks the LP optimum to a few 1e-4
    # while quasi-newton line searches tend to stall on simplex faces.
    return SolverConfig(
        method="projected-gradient",
        smoothing=SmoothingSpec.softmax(1e-3),
        restarts=2,
        max_iter=2000,
    )


def _default_async_solver() -> SolverConfig:
    # Nonconvex in (y, z): breadth of restarts beats depth per start. Six
    # random starts on top of the deterministic pure-pair seed keep the
    # mean overshoot near 2e-3 on random games at n = 4 and 6.
    return SolverConfig(
        smoothing=SmoothingSpec.softmax(1e-3),
        restarts=6,
        max_iter=300,
    )


@dataclass(frozen=True)
class CampaignConfig:
    """Everything a gap campaign needs to be reproducible."""

    n: int
    trials: int
    master_seed: int = 0
    sync_solver: SolverConfig = field(default_factory=_default_sync_solver)
    async_solver: SolverConfig = field(default_factory=_default_async_solver)
    gap_bin: float = 0.02
    theta_bin: float = 0.05
    samples_path: Path | str | None = None
    gap_hist_path: Path | str | None = None
    theta_hist_path: Path | str | None = None
    workers: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("game size must be at least 2")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.gap_bin <= 0 or self.theta_bin <= 0:
            raise ValueError("histogram bin widths must be positive")
        if self.workers < 0:
            raise ValueError("workers must be nonnegative")


@dataclass
class GapCampaignResult:
    config: CampaignConfig
    samples: list[GapSample]
    failures: list[dict]
    stats: dict
    gap_hist: list[tuple[float, float, int]]
    theta_hist: list[tuple[float, float, int]]


def _gap_trial(args) -> tuple[int, int, float, float]:
    trial, n, seed, sync_cfg, async_cfg = args
    P = random_symmetric_tensor(n, seed)
    v_sync = solve_maximin(P, replace(sync_cfg, rng_seed=seed)).value
    v_async = solve_minimax(
        P, replace(async_cfg, rng_seed=seed), starts=[best_pure_pair(P)]
    ).value
    return trial, seed, v_sync, v_async


def _bin_counts(
    values: np.ndarray, width: float
) -> list[tuple[float, float, int]]:
    """Histogram rows (bin_lo, bin_hi, count) on a grid aligned to zero."""
    if values.size == 0:
        return []
    lo = math.floor(values.min() / width)
    hi = math.floor(values.max() / width) + 1
    edges = np.arange(lo, hi + 1) * width
    counts, _ = np.histogram(values, bins=edges)
    return [
        (float(edges[i]), float(edges[i + 1]), int(counts[i]))
        for i in range(len(counts))
    ]


def run_gap_campaign(cfg: CampaignConfig) -> GapCampaignResult:
    """Solve both coalition values on cfg.trials random games.

    Trial t plays on random_symmetric_tensor(n, master_seed + t). A trial
    whose solve raises, or whose sample violates the gap/ratio bounds, is
    recorded under failures and excluded from the statistics; everything
    else lands in samples ordered by trial index. Writes the CSV outputs
    whose paths are set on the config.
    """
    jobs = [
        (t, cfg.n, cfg.master_seed + t, cfg.sync_solver, cfg.async_solver)
        for t in range(cfg.trials)
    ]
    if cfg.workers > 0:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            raw = list(pool.map(_gap_trial, jobs, chunksize=4))
    else:
        raw = [_gap_trial(job) for job in jobs]
    raw.sort(key=lambda r: r[0])

    samples: list[GapSample] = []
    failures: list[dict] = []
    for trial, seed, v_sync, v_async in raw:
        try:
            samples.append(GapSample.from_values(trial, seed, v_sync, v_async))
        except ValueError as exc:
            failures.append({"trial": trial, "game_seed": seed, "error": str(exc)})

    gaps = np.array([s.gap for s in samples])
    v_syncs = np.array([s.v_sync for s in samples])
    thetas = np.array([s.theta for s in samples if s.theta is not None])

    corr = 0.0
    if gaps.size > 1 and gaps.std() > 0 and v_syncs.std() > 0:
        corr = float(np.corrcoef(gaps, v_syncs)[0, 1])
    stats = {
        "trials": cfg.trials,
        "failed": len(failures),
        "gap_mean": float(gaps.mean()) if gaps.size else float("nan"),
        "gap_std": float(gaps.std()) if gaps.size else float("nan"),
        "theta_mean": float(thetas.mean()) if thetas.size else float("nan"),
        "theta_std": float(thetas.std()) if thetas.size else float("nan"),
        "theta_defined": int(thetas.size),
        "corr_gap_vsync": corr,
    }
    result = GapCampaignResult(
        config=cfg,
        samples=samples,
        failures=failures,
        stats=stats,
        gap_hist=_bin_counts(gaps, cfg.gap_bin),
        theta_hist=_bin_counts(thetas, cfg.theta_bin),
    )
    if cfg.samples_path is not None:
        write_samples_csv(cfg.samples_path, samples)
    if cfg.gap_hist_path is not None:
        write_histogram_csv(cfg.gap_hist_path, result.gap_hist)
    if cfg.theta_hist_path is not None:
        write_histogram_csv(cfg.theta_hist_path, result.theta_hist)
    return result


def write_samples_csv(path, samples: list[GapSample]) -> None:
    with open(path, "w", newline="") as f:
        f.write(f"# schema={SAMPLES_SCHEMA}\n")
        writer = csv.writer(f)
        writer.writerow(["trial", "seed", "v_sync", "v_async", "gap", "theta"])
        for s in samples:
            writer.writerow(
                [
                    s.trial,
                    s.game_seed,
                    repr(s.v_sync),
                    repr(s.v_async),
                    repr(s.gap),
                    "" if s.theta is None else repr(s.theta),
                ]
            )


def read_samples_csv(path) -> list[GapSample]:
    """Inverse of write_samples_csv; round-trips samples exactly."""
    with open(path, newline="") as f:
        header = f.readline().strip()
        if header != f"# schema={SAMPLES_SCHEMA}":
            raise ValueError(f"unexpected samples schema line {header!r}")
        rows = list(csv.DictReader(f))
    return [
        GapSample(
            trial=int(r["trial"]),
            game_seed=int(r["seed"]),
            v_sync=float(r["v_sync"]),
            v_async=float(r["v_async"]),
            gap=float(r["gap"]),
            theta=float(r["theta"]) if r["theta"] else None,
        )
        for r in rows
    ]


def write_histogram_csv(path, rows: list[tuple[float, float, int]]) -> None:
    with open(path, "w", newline="") as f:
        f.write(f"# schema={HISTOGRAM_SCHEMA}\n")
        writer = csv.writer(f)
        writer.writerow(["bin_lo", "bin_hi", "count"])
        for lo, hi, count in rows:
            writer.writerow([repr(lo), repr(hi), count])


@dataclass(frozen=True)
class ValueGapRow:
    """One solver run on one benchmark matrix pair."""

    method: str
    trial: int
    value: float
    value_gap: float
    wall_time: float


def value_gap_benchmark(
    n: int,
    methods: dict[str, SolverConfig],
    trials: int,
    rng_seed: int = 0,
) -> list[ValueGapRow]:
    """Score each method by |v(M) + v(-M^T)| on random matrix games.

    M is drawn uniformly from [-1, 1] entries, n x n, per trial; an exact
    solver would report values summing to zero on the pair, so the sum's
    magnitude is a pure accuracy measure. Wall time covers both solves.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    rows: list[ValueGapRow] = []
    for trial in range(trials):
        rng = np.random.default_rng(rng_seed + trial)
        m = rng.uniform(-1.0, 1.0, size=(n, n))
        M = PayoffMatrix2.from_array(m)
        Mt = negative_transpose(M)
        for name, cfg in methods.items():
            cfg_t = replace(cfg, rng_seed=rng_seed + trial)
            t0 = time.perf_counter()
            v1 = solve_matrix_game(M, cfg_t).value
            v2 = solve_matrix_game(Mt, cfg_t).value
            wall = time.perf_counter() - t0
            rows.append(
                ValueGapRow(
                    method=name,
                    trial=trial,
                    value=float(v1),
                    value_gap=float(abs(v1 + v2)),
                    wall_time=wall,
                )
            )
    return rows


def summarize_value_gaps(rows: list[ValueGapRow]) -> dict[str, dict]:
    """Per-method mean value gap and wall time."""
    out: dict[str, dict] = {}
    for method in {r.method for r in rows}:
        mine = [r for r in rows if r.method == method]
        out[method] = {
            "trials": len(mine),
            "value_gap_mean": float(np.mean([r.value_gap for r in mine])),
            "value_gap_max": float(np.max([r.value_gap for r in mine])),
            "wall_time_mean": float(np.mean([r.wall_time for r in mine])),
        }
    return out


def solve_game(
    P: PayoffTensor3,
    targets: tuple[str, ...] = ("nash", "sync", "async"),
    sync_solver: SolverConfig | None = None,
    async_solver: SolverConfig | None = None,
    check_fp: bool = False,
    fp_iterations: int = 100_000,
) -> ValueReport:
    """Solve the requested values of one tensor game into a ValueReport.

    The Nash value of a symmetric zero-sum game is zero by symmetry;
    requesting "nash" on a tensor without that certificate is an error
    rather than a silent guess. With check_fp, the synchronous value is
    cross-checked by fictitious play on the joined coalition game and
    the residual lands in diagnostics.
    """
    known = {"nash", "sync", "async"}
    bad = set(targets) - known
    if bad:
        raise ValueError(f"unknown targets {sorted(bad)}; pick from {sorted(known)}")

    v_nash: float | None = None
    if "nash" in targets:
        if not P.symmetric_zero_sum:
            raise ValueError(
                "nash value requested but the tensor has no symmetry certificate"
            )
        v_nash = 0.0

    diagnostics: dict = {}
    v_sync = float("nan")
    x_opt = None
    if "sync" in targets:
        t0 = time.perf_counter()
        sync = solve_maximin(P, sync_solver)
        diagnostics["sync"] = {
            "termination": sync.termination,
            "restarts": sync.restarts_used,
            "wall_time": _sig3(time.perf_counter() - t0),
        }
        v_sync = sync.value
        x_opt = sync.strategies[0]
        if check_fp:
            trace = sync_fp(P, fp_iterations)
            diagnostics["sync"]["fp_estimate"] = trace.value_estimate
            diagnostics["sync"]["fp_residual"] = abs(trace.value_estimate - v_sync)

    v_async = float("nan")
    y_opt = z_opt = None
    if "async" in targets:
        t0 = time.perf_counter()
        asyn = solve_minimax(P, async_solver, starts=[best_pure_pair(P)])
        diagnostics["async"] = {
            "termination": asyn.termination,
            "restarts": asyn.restarts_used,
            "wall_time": _sig3(time.perf_counter() - t0),
        }
        v_async = asyn.value
        y_opt, z_opt = asyn.strategies
    return ValueReport(
        v_nash=v_nash,
        v_sync=v_sync,
        v_async=v_async,
        x_opt=x_opt,
        y_opt=y_opt,
        z_opt=z_opt,
        diagnostics=diagnostics,
    )


def _sig3(x: float) -> float:
    """Round to 3 significant digits for reporting."""
    return float(f"{x:.3g}")


def report_to_json(report: ValueReport) -> str:
    """Serialize a ValueReport for the CLI and report files."""
    payload = {
        "v_nash": report.v_nash,
        "v_sync": _none_if_nan(report.v_sync),
        "v_async": _none_if_nan(report.v_async),
        "strategies": {
            "x": _strategy_list(report.x_opt),
            "y": _strategy_list(report.y_opt),
            "z": _strategy_list(report.z_opt),
        },
        "diagnostics": report.diagnostics,
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def _strategy_list(s) -> list[float] | None:
    if s is None:
        return None
    return [float(v) for v in np.asarray(s, dtype=float)]


def _none_if_nan(x: float) -> float | None:
    return None if isinstance(x, float) and math.isnan(x) else x
