"""Command-line surface: solve games, run benchmarks and campaigns.

Every command prints a short human-readable summary by default and a
machine-readable document with --json. Defaults for any command can be
supplied through a JSON config file (--config) whose top-level keys name
commands and nested keys name options, e.g.
{"campaign": {"gap": {"trials": 300}}}; explicit flags still win.
"""

from __future__ import annotations

import json
import sys
import time
from dataclasses import replace

import click
import numpy as np

from . import benchmarks, experiments, fictitious, guts
from .engine import SolverConfig, solve_maximin, solve_minimax
from .games import PayoffMatrix2, load_tensor, save_tensor
from .smoothing import SmoothingSpec


def _build_solver(
    restarts, max_iter, smoothing, constraints, method, seed, adaptive
) -> SolverConfig:
    return SolverConfig(
        smoothing=SmoothingSpec.parse(smoothing),
        constraint_mode=constraints,
        method=method,
        max_iter=max_iter,
        restarts=restarts,
        rng_seed=seed,
        adaptive_smoothing=adaptive,
    )


def _solver_options(fn):
    opts = [
        click.option("--restarts", default=20, show_default=True, help="Random restarts."),
        click.option("--max-iter", default=500, show_default=True, help="Iterations per restart."),
        click.option(
            "--smoothing",
            default="softmax:1e-4",
            show_default=True,
            help="Surrogate: none, softmax:EPS, or lp:P.",
        ),
        click.option(
            "--constraints",
            type=click.Choice(["hard", "soft"]),
            default="hard",
            show_default=True,
            help="Simplex handling: projection or penalty.",
        ),
        click.option(
            "--method",
            type=click.Choice(["quasi-newton", "projected-gradient"]),
            default="quasi-newton",
            show_default=True,
        ),
        click.option("--seed", default=0, show_default=True, help="Base RNG seed."),
        click.option(
            "--adaptive/--no-adaptive",
            default=False,
            show_default=True,
            help="Escalate smoothing when line searches stall.",
        ),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


@click.group()
@click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="JSON file of per-command option defaults.",
)
@click.pass_context
def main(ctx, config):
    """Coalition-value workbench for symmetric zero-sum games."""
    if config is not None:
        with open(config) as f:
            ctx.default_map = json.load(f)


@main.command()
@click.option("--tensor", "tensor_path", required=True, type=click.Path(exists=True))
@click.option(
    "--targets",
    default="nash,sync,async",
    show_default=True,
    help="Comma-separated subset of nash,sync,async.",
)
@click.option("--check-fp", is_flag=True, help="Cross-check v_sync with fictitious play.")
@click.option("--fp-iters", default=100_000, show_default=True)
@click.option("--out", type=click.Path(writable=True), default=None, help="Write the JSON report here.")
@_solver_options
def solve(tensor_path, targets, check_fp, fp_iters, out, **solver_kw):
    """Solve one tensor game and report its coalition values."""
    P = load_tensor(tensor_path)
    cfg = _build_solver(**_solver_kw_map(solver_kw))
    report = experiments.solve_game(
        P,
        targets=tuple(t.strip() for t in targets.split(",") if t.strip()),
        sync_solver=cfg,
        async_solver=cfg,
        check_fp=check_fp,
        fp_iterations=fp_iters,
    )
    doc = experiments.report_to_json(report)
    if out is not None:
        with open(out, "w") as f:
            f.write(doc + "\n")
        click.echo(f"report written to {out}")
    else:
        click.echo(doc)


def _solver_kw_map(kw) -> dict:
    return {
        "restarts": kw["restarts"],
        "max_iter": kw["max_iter"],
        "smoothing": kw["smoothing"],
        "constraints": kw["constraints"],
        "method": kw["method"],
        "seed": kw["seed"],
        "adaptive": kw["adaptive"],
    }


@main.command()
@click.option("--games", "names", default="", help="Comma-separated benchmark names (default: all).")
@click.option("--tol", default=1e-3, show_default=True, help="Agreement tolerance.")
@click.option("--json", "as_json", is_flag=True)
@_solver_options
def bench(names, tol, as_json, **solver_kw):
    """Solve the analytic benchmark games and compare against oracles."""
    cfg = _build_solver(**_solver_kw_map(solver_kw))
    catalog = benchmarks.all_benchmark_games()
    picked = (
        {k: catalog[k] for k in (n.strip() for n in names.split(",")) if k in catalog}
        if names
        else catalog
    )
    if names and len(picked) < len([n for n in names.split(",") if n.strip()]):
        unknown = [n.strip() for n in names.split(",") if n.strip() and n.strip() not in catalog]
        raise click.ClickException(f"unknown benchmark games {unknown}; see --games")
    rows = []
    failures = 0
    for name, (tensor, sol) in picked.items():
        got_sync = solve_maximin(tensor, cfg).value
        got_async = solve_minimax(tensor, cfg).value
        err_sync = abs(got_sync - sol.v_sync)
        err_async = abs(got_async - sol.v_async)
        ok = err_sync <= tol and err_async <= tol
        failures += not ok
        rows.append(
            {
                "game": name,
                "v_sync": sol.v_sync,
                "v_sync_solved": got_sync,
                "v_async": sol.v_async,
                "v_async_solved": got_async,
                "ok": ok,
            }
        )
    if as_json:
        click.echo(json.dumps(rows, indent=2))
    else:
        for r in rows:
            click.echo(
                "%-22s sync %+.4f (oracle %+.4f)  async %+.4f (oracle %+.4f)  %s"
                % (
                    r["game"],
                    r["v_sync_solved"],
                    r["v_sync"],
                    r["v_async_solved"],
                    r["v_async"],
                    "ok" if r["ok"] else "MISMATCH",
                )
            )
    if failures:
        raise click.ClickException(f"{failures} benchmark game(s) outside tolerance {tol}")


@main.group(name="guts")
def guts_group():
    """Continuous 3-player Guts analytics."""


@guts_group.command("value")
@click.option("--stake", "-V", "stake", default=0.0, show_default=True, help="Continuation stake V.")
@click.option("--scan-points", default=2001, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def guts_value(stake, scan_points, as_json):
    """One-shot synchronous value at continuation stake V."""
    res = guts.sync_value(stake, scan_points=scan_points)
    if as_json:
        click.echo(json.dumps({"value": res.value, "p1_opt": res.p1_opt}))
    else:
        click.echo(f"sync value {res.value:+.6f} at p1* = {res.p1_opt:.6f}")


@guts_group.command("mixture")
@click.option("--json", "as_json", is_flag=True)
def guts_mixture(as_json):
    """Two-atom coalition mixture certifying a negative value."""
    mix = guts.optimal_coalition_mixture()
    doc = {
        "p1_opt": mix.p1_opt,
        "atom_a": mix.atom_a,
        "atom_b": mix.atom_b,
        "weight_a": mix.weight_a,
    }
    if as_json:
        click.echo(json.dumps(doc))
    else:
        click.echo(
            "mixture: %.4f on (p2=p3=%.6f), %.4f on (p2=0, p3=%.6f), around p1*=%.6f"
            % (mix.weight_a, mix.atom_a[0], 1 - mix.weight_a, mix.atom_b[1], mix.p1_opt)
        )


@guts_group.command("recurse")
@click.option("--tol", default=1e-6, show_default=True)
@click.option("--max-rounds", default=60, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def guts_recurse(tol, max_rounds, as_json):
    """Fixed point of the repeated-game value recursion."""
    trace = guts.recursive_fixed_point(max_rounds=max_rounds, tol=tol)
    if as_json:
        click.echo(
            json.dumps(
                {
                    "v_star": trace.v_star,
                    "rounds": len(trace.values),
                    "converged": trace.converged,
                    "values": trace.values,
                }
            )
        )
    else:
        click.echo(
            f"fixed point {trace.v_star:+.6f} after {len(trace.values)} rounds"
            f" (converged={trace.converged})"
        )


@guts_group.command("certify")
@click.option("--grid-n", default=200, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def guts_certify(grid_n, as_json):
    """Grid certificate that the asynchronous value is zero."""
    cert = guts.async_certificate(grid_n)
    if as_json:
        click.echo(
            json.dumps(
                {
                    "min_of_max": cert.min_of_max,
                    "argmin": list(cert.argmin),
                    "grid_n": cert.grid_n,
                }
            )
        )
    else:
        click.echo(
            "min-of-max %.3e at (p2, p3) = (%.5f, %.5f) on a %d^2 grid"
            % (cert.min_of_max, cert.argmin[0], cert.argmin[1], cert.grid_n)
        )


@guts_group.command("discretize")
@click.option("--n", default=50, show_default=True, help="Thresholds per player.")
@click.option("--out", type=click.Path(writable=True), required=True)
def guts_discretize(n, out):
    """Write the discretized threshold game as a tensor file."""
    P = guts.discretize_guts(n)
    save_tensor(P, out)
    bound = guts.gradient_bound()
    click.echo(
        f"wrote {n}x{n}x{n} tensor to {out}; discretization error bound "
        f"{bound / n:.4f} (max gradient {bound:.4f} / {n})"
    )


@main.command()
@click.option("--tensor", "tensor_path", required=True, type=click.Path(exists=True))
@click.option(
    "--mode",
    type=click.Choice(["joint", "sync", "2player"]),
    default="joint",
    show_default=True,
)
@click.option("--iters", default=1000, show_default=True)
@click.option("--theta", "theta_text", default="classical", show_default=True, help="classical or floor:C.")
@click.option("--seed", default=0, show_default=True)
@click.option("--trials", default=1, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def fp(tensor_path, mode, iters, theta_text, seed, trials, as_json):
    """Fictitious play on a tensor game (joint, synchronous, or 2-player).

    2player mode reads the file as a plain matrix {"entries": [[...]]}.
    """
    rule, floor_value = fictitious.parse_theta(theta_text)
    if mode == "2player":
        with open(tensor_path) as f:
            doc = json.load(f)
        if "entries" not in doc:
            raise click.ClickException("matrix file needs an 'entries' field")
        M = PayoffMatrix2.from_array(np.asarray(doc["entries"], dtype=float))
        trace = fictitious.fp_2player(M, iters, rng_seed=seed)
        _echo_trace(trace, as_json)
        return
    P = load_tensor(tensor_path)
    if mode == "sync":
        trace = fictitious.sync_fp(P, iters, rng_seed=seed)
        _echo_trace(trace, as_json)
        return
    if trials == 1:
        trace = fictitious.joint_fp(P, iters, theta_rule=rule, floor_value=floor_value, rng_seed=seed)
        _echo_trace(trace, as_json)
        return
    batch = fictitious.joint_fp_trials(
        P, iters, trials, theta_rule=rule, floor_value=floor_value, rng_seed=seed
    )
    doc = {
        "trials": batch.trials,
        "iterations": batch.iterations,
        "value_mean": float(batch.values.mean()),
        "gap_mean": float(batch.gaps.mean()),
        "rate_at_zero(0.1)": batch.rate_within(0.0, 0.1),
    }
    if as_json:
        click.echo(json.dumps(doc))
    else:
        click.echo(
            "joint FP x%d: value mean %+.4f, gap mean %.2e, share at 0: %.1f%%"
            % (batch.trials, doc["value_mean"], doc["gap_mean"], 100 * doc["rate_at_zero(0.1)"])
        )


def _echo_trace(trace: fictitious.FpTrace, as_json: bool) -> None:
    if as_json:
        click.echo(
            json.dumps(
                {
                    "iterations": trace.iterations,
                    "value_estimate": trace.value_estimate,
                    "converged_gap": trace.converged_gap,
                    "empirical": [s.tolist() for s in trace.empirical],
                }
            )
        )
    else:
        click.echo(
            f"value estimate {trace.value_estimate:+.6f}, "
            f"residual gap {trace.converged_gap:.3e} after {trace.iterations} iterations"
        )


@main.group()
def campaign():
    """Random-game statistics campaigns."""


@campaign.command("gap")
@click.option("--n", default=4, show_default=True, help="Game size.")
@click.option("--trials", default=300, show_default=True)
@click.option("--seed", default=0, show_default=True, help="Master seed.")
@click.option("--sync-restarts", type=int, default=None, help="Override the tuned default.")
@click.option("--async-restarts", type=int, default=None, help="Override the tuned default.")
@click.option("--max-iter", type=int, default=None, help="Override both solvers' iteration caps.")
@click.option("--samples-csv", type=click.Path(writable=True), default=None)
@click.option("--gap-hist-csv", type=click.Path(writable=True), default=None)
@click.option("--theta-hist-csv", type=click.Path(writable=True), default=None)
@click.option("--workers", default=0, show_default=True, help="Process-pool size; 0 = in-process.")
@click.option("--json", "as_json", is_flag=True)
def campaign_gap(
    n,
    trials,
    seed,
    sync_restarts,
    async_restarts,
    max_iter,
    samples_csv,
    gap_hist_csv,
    theta_hist_csv,
    workers,
    as_json,
):
    """Distribution of the async-sync gap over random games."""
    cfg = experiments.CampaignConfig(
        n=n,
        trials=trials,
        master_seed=seed,
        samples_path=samples_csv,
        gap_hist_path=gap_hist_csv,
        theta_hist_path=theta_hist_csv,
        workers=workers,
    )
    sync_over = {k: v for k, v in
                 [("restarts", sync_restarts), ("max_iter", max_iter)] if v is not None}
    async_over = {k: v for k, v in
                  [("restarts", async_restarts), ("max_iter", max_iter)] if v is not None}
    if sync_over:
        cfg = replace(cfg, sync_solver=replace(cfg.sync_solver, **sync_over))
    if async_over:
        cfg = replace(cfg, async_solver=replace(cfg.async_solver, **async_over))
    t0 = time.perf_counter()
    result = experiments.run_gap_campaign(cfg)
    wall = time.perf_counter() - t0
    doc = dict(result.stats, wall_time=float(f"{wall:.3g}"))
    if as_json:
        click.echo(json.dumps(doc, indent=2))
    else:
        click.echo(
            "gap mean %.4f std %.4f | theta mean %.4f std %.4f (%d defined) | "
            "corr(gap, v_sync) %+.3f | %d/%d trials ok | %.3gs"
            % (
                doc["gap_mean"],
                doc["gap_std"],
                doc["theta_mean"],
                doc["theta_std"],
                doc["theta_defined"],
                doc["corr_gap_vsync"],
                doc["trials"] - doc["failed"],
                doc["trials"],
                wall,
            )
        )


@campaign.command("value-gap")
@click.option("--n", default=8, show_default=True, help="Matrix size.")
@click.option("--trials", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option(
    "--methods",
    default="softmax,unsmoothed,lp",
    show_default=True,
    help="Comma-separated subset of softmax, unsmoothed, lp.",
)
@click.option("--restarts", default=5, show_default=True)
@click.option("--max-iter", default=500, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def campaign_value_gap(n, trials, seed, methods, restarts, max_iter, as_json):
    """Accuracy benchmark: |v(M) + v(-M^T)| per solver configuration."""
    known = {
        "softmax": SolverConfig(
            restarts=restarts,
            max_iter=max_iter,
            smoothing=SmoothingSpec.softmax(1e-2),
            polish_epsilon=1e-5,
        ),
        "unsmoothed": SolverConfig(
            restarts=restarts, max_iter=max_iter, smoothing=SmoothingSpec.none()
        ),
        "lp": SolverConfig(
            restarts=restarts,
            max_iter=max_iter,
            smoothing=SmoothingSpec.lp_shift(40.0),
            polish_epsilon=1e-4,
        ),
    }
    picked = {}
    for name in (m.strip() for m in methods.split(",")):
        if not name:
            continue
        if name not in known:
            raise click.ClickException(f"unknown method {name!r}; pick from {sorted(known)}")
        picked[name] = known[name]
    rows = experiments.value_gap_benchmark(n, picked, trials, rng_seed=seed)
    summary = experiments.summarize_value_gaps(rows)
    if as_json:
        click.echo(json.dumps(summary, indent=2))
    else:
        for name in picked:
            s = summary[name]
            click.echo(
                "%-10s value gap mean %.3e max %.3e | %.3gs per pair"
                % (name, s["value_gap_mean"], s["value_gap_max"], s["wall_time_mean"])
            )


if __name__ == "__main__":
    sys.exit(main())
