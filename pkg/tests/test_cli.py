import json

import numpy as np
import pytest
from click.testing import CliRunner

from coalitiongames.benchmarks import odds_evens, rps
from coalitiongames.cli import main
from coalitiongames.games import load_tensor, save_tensor

FAST = [
    "--restarts", "3",
    "--max-iter", "300",
    "--smoothing", "softmax:1e-3",
]


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def rps_omi_path(tmp_path):
    tensor, _ = rps("OMI")
    path = tmp_path / "rps_omi.json"
    save_tensor(tensor, path)
    return str(path)


@pytest.fixture
def omo_path(tmp_path):
    tensor, _ = odds_evens("OMO")
    path = tmp_path / "omo.json"
    save_tensor(tensor, path)
    return str(path)


def invoke(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


# --- solve -----------------------------------------------------------------------


def test_solve_reports_all_three_values(runner, rps_omi_path):
    result = invoke(
        runner,
        ["solve", "--tensor", rps_omi_path, "--method", "projected-gradient", *FAST],
    )
    doc = json.loads(result.output)
    assert doc["v_nash"] == 0.0
    assert doc["v_sync"] == pytest.approx(-2 / 3, abs=5e-3)
    assert doc["v_async"] == pytest.approx(-0.5, abs=5e-3)
    assert len(doc["strategies"]["x"]) == 3
    assert doc["diagnostics"]["sync"]["restarts"] == 3


def test_solve_target_subset_leaves_other_values_null(runner, rps_omi_path):
    result = invoke(runner, ["solve", "--tensor", rps_omi_path, "--targets", "sync", *FAST])
    doc = json.loads(result.output)
    assert doc["v_nash"] is None
    assert doc["v_async"] is None
    assert doc["strategies"]["y"] is None


def test_solve_writes_report_file(runner, rps_omi_path, tmp_path):
    out = tmp_path / "report.json"
    result = invoke(
        runner,
        ["solve", "--tensor", rps_omi_path, "--targets", "sync", "--out", str(out), *FAST],
    )
    assert str(out) in result.output
    doc = json.loads(out.read_text())
    assert doc["v_sync"] == pytest.approx(-2 / 3, abs=5e-3)


def test_solve_check_fp_adds_residual(runner, omo_path):
    result = invoke(
        runner,
        [
            "solve", "--tensor", omo_path, "--targets", "sync",
            "--check-fp", "--fp-iters", "20000", *FAST,
        ],
    )
    doc = json.loads(result.output)
    assert doc["diagnostics"]["sync"]["fp_residual"] < 0.02


def test_solve_rejects_missing_tensor_file(runner):
    result = runner.invoke(main, ["solve", "--tensor", "/nonexistent.json"])
    assert result.exit_code != 0
    assert "does not exist" in result.output


def test_solve_rejects_unknown_target(runner, rps_omi_path):
    result = runner.invoke(main, ["solve", "--tensor", rps_omi_path, "--targets", "sync,parlay"])
    assert result.exit_code != 0


def test_solve_requires_symmetry_for_nash(runner, tmp_path):
    tensor, _ = rps("OMI")
    doc = tensor.to_dict()
    doc["symmetric_zero_sum"] = False
    path = tmp_path / "plain.json"
    path.write_text(json.dumps(doc))
    result = runner.invoke(main, ["solve", "--tensor", str(path), "--targets", "nash"])
    assert result.exit_code != 0


# --- bench -----------------------------------------------------------------------


def test_bench_single_game_json(runner):
    result = invoke(
        runner,
        ["bench", "--games", "odds-evens-OMO", "--json", "--restarts", "6", "--max-iter", "300"],
    )
    rows = json.loads(result.output)
    assert [r["game"] for r in rows] == ["odds-evens-OMO"]
    assert rows[0]["ok"] is True
    assert rows[0]["v_sync"] == pytest.approx(-1.0)


def test_bench_rejects_unknown_game(runner):
    result = runner.invoke(main, ["bench", "--games", "calvinball"])
    assert result.exit_code != 0
    assert "unknown benchmark games" in result.output


def test_bench_human_output_marks_agreement(runner):
    result = invoke(
        runner,
        ["bench", "--games", "odds-evens-OMI", "--restarts", "6", "--max-iter", "300"],
    )
    assert "odds-evens-OMI" in result.output
    assert "ok" in result.output
    assert "MISMATCH" not in result.output


def test_bench_fails_loudly_at_impossible_tolerance(runner):
    result = runner.invoke(
        main,
        ["bench", "--games", "odds-evens-OMO", "--tol", "1e-12", "--restarts", "2",
         "--max-iter", "50", "--smoothing", "softmax:1e-2"],
    )
    assert result.exit_code != 0
    assert "outside tolerance" in result.output


# --- guts ------------------------------------------------------------------------


def test_guts_value_json(runner):
    result = invoke(runner, ["guts", "value", "--stake", "0", "--json"])
    doc = json.loads(result.output)
    assert -0.0061 <= doc["value"] <= -0.0051
    assert 0.641 <= doc["p1_opt"] <= 0.647


def test_guts_mixture_json(runner):
    result = invoke(runner, ["guts", "mixture", "--json"])
    doc = json.loads(result.output)
    assert 0.0 < doc["weight_a"] < 1.0
    assert doc["atom_a"][0] == pytest.approx(doc["atom_a"][1])


def test_guts_recurse_finds_the_fixed_point(runner):
    result = invoke(runner, ["guts", "recurse", "--json"])
    doc = json.loads(result.output)
    assert doc["converged"] is True
    assert -0.0141 <= doc["v_star"] <= -0.0121
    values = doc["values"]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


def test_guts_certify_small_grid(runner):
    result = invoke(runner, ["guts", "certify", "--grid-n", "120", "--json"])
    doc = json.loads(result.output)
    assert doc["min_of_max"] >= -1e-6
    assert doc["grid_n"] == 120


def test_guts_discretize_round_trips_through_solve(runner, tmp_path):
    out = tmp_path / "guts8.json"
    result = invoke(runner, ["guts", "discretize", "--n", "8", "--out", str(out)])
    assert "8x8x8" in result.output
    P = load_tensor(out)
    assert P.n == 8
    assert P.symmetric_zero_sum


# --- fp --------------------------------------------------------------------------


def test_fp_joint_single_trial(runner, omo_path):
    result = invoke(runner, ["fp", "--tensor", omo_path, "--iters", "500", "--json"])
    doc = json.loads(result.output)
    assert doc["iterations"] == 500
    assert doc["value_estimate"] == pytest.approx(0.0, abs=0.05)
    assert len(doc["empirical"]) == 3


def test_fp_joint_batch_summary(runner, omo_path):
    result = invoke(
        runner,
        ["fp", "--tensor", omo_path, "--iters", "400", "--trials", "8", "--json"],
    )
    doc = json.loads(result.output)
    assert doc["trials"] == 8
    assert doc["rate_at_zero(0.1)"] == pytest.approx(1.0)


def test_fp_sync_mode_tracks_the_coalition_value(runner, rps_omi_path):
    result = invoke(
        runner,
        ["fp", "--tensor", rps_omi_path, "--mode", "sync", "--iters", "30000", "--json"],
    )
    doc = json.loads(result.output)
    assert doc["value_estimate"] == pytest.approx(-2 / 3, abs=0.01)


def test_fp_2player_reads_a_matrix_file(runner, tmp_path):
    path = tmp_path / "pennies.json"
    path.write_text(json.dumps({"entries": [[1, -1], [-1, 1]]}))
    result = invoke(
        runner,
        ["fp", "--tensor", str(path), "--mode", "2player", "--iters", "20000", "--json"],
    )
    doc = json.loads(result.output)
    assert doc["value_estimate"] == pytest.approx(0.0, abs=0.01)


def test_fp_2player_requires_an_entries_field(runner, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"rows": [[0]]}))
    result = runner.invoke(main, ["fp", "--tensor", str(path), "--mode", "2player"])
    assert result.exit_code != 0
    assert "entries" in result.output


def test_fp_theta_floor_accepted(runner, omo_path):
    result = invoke(
        runner,
        ["fp", "--tensor", omo_path, "--iters", "300", "--theta", "floor:0.05", "--json"],
    )
    assert json.loads(result.output)["iterations"] == 300


def test_fp_rejects_malformed_theta(runner, omo_path):
    result = runner.invoke(main, ["fp", "--tensor", omo_path, "--theta", "ceiling:2"])
    assert result.exit_code != 0


# --- campaigns -------------------------------------------------------------------


def test_campaign_gap_small_run_json(runner, tmp_path):
    csv_path = tmp_path / "samples.csv"
    result = invoke(
        runner,
        [
            "campaign", "gap", "--n", "3", "--trials", "4", "--seed", "11",
            "--sync-restarts", "1", "--async-restarts", "2", "--max-iter", "300",
            "--samples-csv", str(csv_path), "--json",
        ],
    )
    doc = json.loads(result.output)
    assert doc["trials"] == 4
    assert doc["failed"] == 0
    assert doc["gap_mean"] >= -1e-9
    assert csv_path.exists()
    assert csv_path.read_text().count("\n") == 6  # schema + header + 4 rows


def test_campaign_gap_human_line(runner):
    result = invoke(
        runner,
        ["campaign", "gap", "--n", "3", "--trials", "2",
         "--sync-restarts", "1", "--async-restarts", "2", "--max-iter", "200"],
    )
    assert "gap mean" in result.output
    assert "2/2 trials ok" in result.output


def test_campaign_value_gap_json(runner):
    result = invoke(
        runner,
        ["campaign", "value-gap", "--n", "4", "--trials", "2",
         "--methods", "unsmoothed", "--restarts", "2", "--max-iter", "200", "--json"],
    )
    doc = json.loads(result.output)
    assert set(doc) == {"unsmoothed"}
    assert doc["unsmoothed"]["trials"] == 2
    assert doc["unsmoothed"]["value_gap_mean"] >= 0.0


def test_campaign_value_gap_rejects_unknown_method(runner):
    result = runner.invoke(main, ["campaign", "value-gap", "--methods", "annealing"])
    assert result.exit_code != 0
    assert "unknown method" in result.output


# --- config file -----------------------------------------------------------------


def test_config_file_supplies_defaults_that_flags_override(runner, omo_path, tmp_path):
    cfg = tmp_path / "defaults.json"
    cfg.write_text(json.dumps({"fp": {"iters": 250}}))
    result = invoke(
        runner, ["--config", str(cfg), "fp", "--tensor", omo_path, "--json"]
    )
    assert json.loads(result.output)["iterations"] == 250
    result = invoke(
        runner,
        ["--config", str(cfg), "fp", "--tensor", omo_path, "--iters", "700", "--json"],
    )
    assert json.loads(result.output)["iterations"] == 700


def test_config_file_reaches_nested_groups(runner, tmp_path):
    cfg = tmp_path / "defaults.json"
    cfg.write_text(json.dumps({"guts": {"certify": {"grid_n": 128}}}))
    result = invoke(runner, ["--config", str(cfg), "guts", "certify", "--json"])
    assert json.loads(result.output)["grid_n"] == 128


def test_help_lists_every_command(runner):
    result = invoke(runner, ["--help"])
    for name in ("solve", "bench", "guts", "fp", "campaign"):
        assert name in result.output
