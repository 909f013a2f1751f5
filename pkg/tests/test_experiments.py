import json
import math

import numpy as np
import pytest

from coalitiongames.benchmarks import rps
from coalitiongames.engine import SolverConfig
from coalitiongames.experiments import (
    CampaignConfig,
    GapSample,
    read_samples_csv,
    report_to_json,
    run_gap_campaign,
    solve_game,
    summarize_value_gaps,
    value_gap_benchmark,
    write_histogram_csv,
    write_samples_csv,
)
from coalitiongames.games import PayoffTensor3, random_symmetric_tensor
from coalitiongames.smoothing import SmoothingSpec

QUICK_SYNC = SolverConfig(
    method="projected-gradient",
    smoothing=SmoothingSpec.softmax(1e-3),
    restarts=1,
    max_iter=800,
)
QUICK_ASYNC = SolverConfig(smoothing=SmoothingSpec.softmax(1e-3), restarts=4, max_iter=200)


def quick_campaign(**overrides) -> CampaignConfig:
    base = dict(
        n=3,
        trials=6,
        master_seed=0,
        sync_solver=QUICK_SYNC,
        async_solver=QUICK_ASYNC,
    )
    base.update(overrides)
    return CampaignConfig(**base)


# --- samples -------------------------------------------------------------------


def test_sample_gap_and_theta_derive_from_values():
    s = GapSample.from_values(trial=3, game_seed=17, v_sync=-0.4, v_async=-0.1)
    assert s.gap == pytest.approx(0.3)
    assert s.theta == pytest.approx(0.25)


def test_sample_theta_is_undefined_at_zero_sync():
    s = GapSample.from_values(trial=0, game_seed=0, v_sync=1e-9, v_async=0.0)
    assert s.theta is None


def test_sample_rejects_inverted_values():
    with pytest.raises(ValueError, match="below"):
        GapSample.from_values(trial=0, game_seed=0, v_sync=-0.1, v_async=-0.2)


def test_sample_rejects_wild_ratios():
    with pytest.raises(ValueError, match="ratio"):
        GapSample(trial=0, game_seed=0, v_sync=-0.5, v_async=-0.8, gap=0.3, theta=1.6)


def test_sample_tolerates_solver_noise():
    s = GapSample.from_values(trial=0, game_seed=0, v_sync=-0.3, v_async=-0.3005)
    assert s.gap == pytest.approx(-5e-4)


# --- CSV round trips --------------------------------------------------------------


def test_samples_csv_round_trips_exactly(tmp_path):
    samples = [
        GapSample.from_values(0, 100, -1.0 / 3.0, -0.1),
        GapSample.from_values(1, 101, -0.7, -0.123456789012345),
        GapSample.from_values(2, 102, 0.0, 0.0),
    ]
    path = tmp_path / "samples.csv"
    write_samples_csv(path, samples)
    back = read_samples_csv(path)
    assert back == samples


def test_samples_csv_refuses_alien_schema(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("# schema=not-this\ntrial,seed\n")
    with pytest.raises(ValueError, match="schema"):
        read_samples_csv(path)


def test_histogram_csv_layout(tmp_path):
    path = tmp_path / "hist.csv"
    write_histogram_csv(path, [(0.0, 0.02, 3), (0.02, 0.04, 1)])
    lines = path.read_text().splitlines()
    assert lines[0] == "# schema=gap-histogram-v1"
    assert lines[1] == "bin_lo,bin_hi,count"
    assert lines[2] == "0.0,0.02,3"


# --- gap campaign -------------------------------------------------------------------


def test_campaign_is_reproducible():
    a = run_gap_campaign(quick_campaign())
    b = run_gap_campaign(quick_campaign())
    assert [s.gap for s in a.samples] == [s.gap for s in b.samples]
    assert a.stats == b.stats


def test_campaign_stats_summarize_the_samples():
    result = run_gap_campaign(quick_campaign())
    gaps = [s.gap for s in result.samples]
    assert result.stats["gap_mean"] == pytest.approx(np.mean(gaps))
    assert result.stats["gap_std"] == pytest.approx(np.std(gaps))
    assert result.stats["failed"] == len(result.failures) == 0
    assert len(result.samples) == 6
    thetas = [s.theta for s in result.samples if s.theta is not None]
    assert result.stats["theta_defined"] == len(thetas)


def test_campaign_gaps_are_nonnegative_up_to_tolerance():
    result = run_gap_campaign(quick_campaign(trials=10))
    for s in result.samples:
        assert s.gap >= -2e-3
        assert s.v_sync <= 1e-9


def test_campaign_histograms_partition_the_samples():
    result = run_gap_campaign(quick_campaign())
    assert sum(c for _, _, c in result.gap_hist) == len(result.samples)
    for lo, hi, _ in result.gap_hist:
        assert hi == pytest.approx(lo + 0.02)
        # bins sit on a grid anchored at zero
        assert lo / 0.02 == pytest.approx(round(lo / 0.02))


def test_campaign_writes_its_csv_outputs(tmp_path):
    cfg = quick_campaign(
        samples_path=tmp_path / "s.csv",
        gap_hist_path=tmp_path / "g.csv",
        theta_hist_path=tmp_path / "t.csv",
    )
    result = run_gap_campaign(cfg)
    assert read_samples_csv(tmp_path / "s.csv") == result.samples
    assert (tmp_path / "g.csv").read_text().startswith("# schema=gap-histogram-v1")
    assert (tmp_path / "t.csv").read_text().splitlines()[1] == "bin_lo,bin_hi,count"


def test_campaign_validates_its_config():
    with pytest.raises(ValueError):
        quick_campaign(n=1)
    with pytest.raises(ValueError):
        quick_campaign(trials=0)


# --- value-gap benchmark --------------------------------------------------------------


def test_value_gap_rows_cover_every_method_and_trial():
    methods = {
        "smoothed": SolverConfig(
            smoothing=SmoothingSpec.softmax(1e-2), restarts=2, max_iter=200
        ),
        "unsmoothed": SolverConfig(
            smoothing=SmoothingSpec.none(), restarts=2, max_iter=200
        ),
    }
    rows = value_gap_benchmark(4, methods, trials=3)
    assert len(rows) == 6
    assert {(r.method, r.trial) for r in rows} == {
        (m, t) for m in methods for t in range(3)
    }
    for r in rows:
        assert r.value_gap >= 0.0
        assert r.wall_time > 0.0


def test_value_gap_summary_reports_per_method_means():
    methods = {"smoothed": SolverConfig(restarts=1, max_iter=100)}
    rows = value_gap_benchmark(3, methods, trials=4)
    summary = summarize_value_gaps(rows)
    assert summary["smoothed"]["trials"] == 4
    want = np.mean([r.value_gap for r in rows])
    assert summary["smoothed"]["value_gap_mean"] == pytest.approx(want)


def test_value_gap_rejects_empty_runs():
    with pytest.raises(ValueError):
        value_gap_benchmark(3, {}, trials=0)


# --- single-game reports -----------------------------------------------------------------


def test_solve_game_recovers_rps_omi_values():
    P, sol = rps("OMI")
    report = solve_game(
        P,
        sync_solver=SolverConfig(
            method="projected-gradient",
            smoothing=SmoothingSpec.softmax(1e-3),
            restarts=2,
            max_iter=2000,
        ),
        async_solver=SolverConfig(
            smoothing=SmoothingSpec.softmax(1e-3), restarts=10, max_iter=300
        ),
    )
    assert report.v_nash == 0.0
    assert report.v_sync == pytest.approx(sol.v_sync, abs=2e-3)
    assert report.v_async == pytest.approx(sol.v_async, abs=2e-3)
    assert report.ordering_ok(tol=2e-3)
    assert report.diagnostics["sync"]["restarts"] == 2
    assert report.diagnostics["async"]["wall_time"] > 0


def test_solve_game_respects_target_subsets():
    P = random_symmetric_tensor(3, 5)
    report = solve_game(P, targets=("sync",), sync_solver=QUICK_SYNC)
    assert report.v_nash is None
    assert math.isnan(report.v_async)
    assert not math.isnan(report.v_sync)


def test_solve_game_refuses_nash_without_symmetry_certificate():
    P = PayoffTensor3(n=2, entries=np.zeros(8), symmetric_zero_sum=False)
    with pytest.raises(ValueError, match="certificate"):
        solve_game(P, targets=("nash",))


def test_solve_game_rejects_unknown_targets():
    P = random_symmetric_tensor(3, 5)
    with pytest.raises(ValueError, match="unknown targets"):
        solve_game(P, targets=("sync", "correlated"))


def test_solve_game_fp_cross_check_lands_in_diagnostics():
    P, _ = rps("OMI")
    report = solve_game(
        P,
        targets=("sync",),
        sync_solver=QUICK_SYNC,
        check_fp=True,
        fp_iterations=50_000,
    )
    assert report.diagnostics["sync"]["fp_residual"] < 0.01
    assert report.diagnostics["sync"]["fp_estimate"] == pytest.approx(
        -2.0 / 3.0, abs=0.01
    )


def test_report_json_shape_and_nan_handling():
    P = random_symmetric_tensor(3, 5)
    report = solve_game(P, targets=("nash", "sync"), sync_solver=QUICK_SYNC)
    doc = json.loads(report_to_json(report))
    assert set(doc) == {"v_nash", "v_sync", "v_async", "strategies", "diagnostics"}
    assert doc["v_nash"] == 0.0
    assert doc["v_async"] is None
    assert doc["strategies"]["y"] is None
    assert len(doc["strategies"]["x"]) == 3
    assert doc["diagnostics"]["sync"]["termination"]
