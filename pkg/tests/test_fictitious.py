import numpy as np
import pytest
from scipy.optimize import linprog

from coalitiongames.benchmarks import odd_man_tensor
from coalitiongames.fictitious import (
    fp_2player,
    joint_fp,
    joint_fp_trials,
    parse_theta,
    sync_fp,
    sync_matrix,
    verify_joint_nash,
)
from coalitiongames.games import PayoffMatrix2, random_symmetric_tensor

PENNIES = PayoffMatrix2.from_array(np.array([[1.0, -1.0], [-1.0, 1.0]]))


def lp_row_value(m: np.ndarray) -> float:
    """Exact max_x min_j (x M)_j by linear programming."""
    rows, cols = m.shape
    A_ub = np.hstack([-m.T, np.ones((cols, 1))])
    A_eq = np.hstack([np.ones((1, rows)), np.zeros((1, 1))])
    c = np.zeros(rows + 1)
    c[-1] = -1.0
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=np.zeros(cols),
        A_eq=A_eq,
        b_eq=[1.0],
        bounds=[(0, None)] * rows + [(None, None)],
    )
    assert res.status == 0, res.message
    return float(-res.fun)


# --- step rule ---------------------------------------------------------------


def test_parse_theta_round_trips():
    assert parse_theta("classical") == ("classical", 0.0)
    assert parse_theta("floor:0.01") == ("floor", 0.01)
    assert parse_theta("floor") == ("floor", 1e-3)
    assert parse_theta(" FLOOR:0.5 ") == ("floor", 0.5)


def test_parse_theta_rejects_garbage():
    with pytest.raises(ValueError):
        parse_theta("anneal:0.1")


# --- 2-player fictitious play ---------------------------------------------------


def test_fp_converges_on_matching_pennies():
    trace = fp_2player(PENNIES, 50_000, rng_seed=0)
    assert trace.value_estimate == pytest.approx(0.0, abs=5e-3)
    assert np.allclose(trace.empirical[0], [0.5, 0.5], atol=0.02)
    assert np.allclose(trace.empirical[1], [0.5, 0.5], atol=0.02)
    assert trace.converged_gap >= 0.0


def test_fp_bracket_contains_the_lp_value():
    # The two empirical strategies certify v_row <= v <= v_col, so the
    # reported midpoint +- half the gap must straddle the exact value.
    rng = np.random.default_rng(3)
    for _ in range(5):
        m = rng.uniform(-1.0, 1.0, size=(4, 6))
        trace = fp_2player(PayoffMatrix2.from_array(m), 20_000, rng_seed=1)
        want = lp_row_value(m)
        half = trace.converged_gap / 2.0
        assert trace.value_estimate - half <= want + 1e-9
        assert want <= trace.value_estimate + half + 1e-9


def test_fp_gap_shrinks_with_iterations():
    short = fp_2player(PENNIES, 200, rng_seed=5)
    long = fp_2player(PENNIES, 50_000, rng_seed=5)
    assert long.converged_gap < short.converged_gap


def test_fp_is_deterministic():
    a = fp_2player(PENNIES, 500, rng_seed=9)
    b = fp_2player(PENNIES, 500, rng_seed=9)
    assert a.value_estimate == b.value_estimate
    assert np.array_equal(a.empirical[0], b.empirical[0])


def test_fp_rejects_empty_runs():
    with pytest.raises(ValueError):
        fp_2player(PENNIES, 0)


# --- joined-coalition play -------------------------------------------------------


def test_sync_matrix_columns_enumerate_pure_pairs():
    P = random_symmetric_tensor(3, 12)
    M = sync_matrix(P)
    m = np.asarray(M.entries)
    assert m.shape == (3, 9)
    for j in range(3):
        for k in range(3):
            assert np.array_equal(m[:, j * 3 + k], P.entries[:, j, k])


def test_sync_fp_brackets_the_lp_sync_value():
    for seed in (0, 1, 2):
        P = random_symmetric_tensor(4, seed)
        trace = sync_fp(P, 20_000, rng_seed=seed)
        want = lp_row_value(np.asarray(P.entries).reshape(4, 16))
        half = trace.converged_gap / 2.0
        assert trace.value_estimate - half <= want + 1e-9
        assert want <= trace.value_estimate + half + 1e-9


def test_sync_fp_approaches_the_rps_sync_value():
    P = odd_man_tensor(3, "OMI")
    trace = sync_fp(P, 100_000, rng_seed=0)
    assert trace.value_estimate == pytest.approx(-2.0 / 3.0, abs=5e-3)


# --- joint fictitious play -------------------------------------------------------


def test_joint_fp_single_run_equals_first_batch_trial():
    P = odd_man_tensor(3, "OMI")
    one = joint_fp(P, 500, rng_seed=4)
    batch = joint_fp_trials(P, 500, trials=6, rng_seed=4)
    assert one.value_estimate == batch.values[0]
    assert one.converged_gap == batch.gaps[0]
    assert np.array_equal(np.asarray(one.empirical[0]), batch.x[0])


def test_joint_fp_batches_share_leading_trials():
    P = odd_man_tensor(3, "OMO")
    small = joint_fp_trials(P, 300, trials=4, rng_seed=11)
    large = joint_fp_trials(P, 300, trials=9, rng_seed=11)
    assert np.array_equal(small.values, large.values[:4])


def test_joint_fp_reported_values_match_final_strategies():
    P = random_symmetric_tensor(4, 3)
    batch = joint_fp_trials(P, 400, trials=8, rng_seed=2)
    a = np.asarray(P.entries)
    want = np.einsum("ijk,si,sj,sk->s", a, batch.x, batch.y, batch.z)
    assert np.allclose(batch.values, want, atol=1e-12)
    assert np.all(batch.gaps >= -1e-12)


def test_joint_fp_settles_odds_evens_omo_at_zero():
    batch = joint_fp_trials(odd_man_tensor(2, "OMO"), 1000, trials=64, rng_seed=0)
    assert batch.rate_within(0.0, 0.1) == 1.0


def test_joint_fp_rate_counts_only_near_hits():
    batch = joint_fp_trials(odd_man_tensor(3, "OMI"), 800, trials=64, rng_seed=1)
    rate_wide = batch.rate_within(-4.0 / 9.0, 0.3)
    rate_tight = batch.rate_within(-4.0 / 9.0, 1e-6)
    assert 0.0 <= rate_tight <= rate_wide <= 1.0


def test_joint_fp_theta_floor_changes_the_dynamics():
    P = odd_man_tensor(3, "OMI")
    classical = joint_fp_trials(P, 600, trials=8, rng_seed=3)
    floored = joint_fp_trials(
        P, 600, trials=8, theta_rule="floor", floor_value=0.05, rng_seed=3
    )
    assert not np.allclose(classical.values, floored.values)


def test_joint_fp_validates_budgets():
    P = odd_man_tensor(2, "OMO")
    with pytest.raises(ValueError):
        joint_fp_trials(P, 0, trials=4)
    with pytest.raises(ValueError):
        joint_fp_trials(P, 10, trials=0)
    with pytest.raises(ValueError):
        joint_fp(P, 10, theta_rule="sqrt")


# --- joint Nash verification ------------------------------------------------------


def test_uniform_triple_is_a_joint_ne_of_odds_evens():
    P = odd_man_tensor(2, "OMO")
    u = np.array([0.5, 0.5])
    report = verify_joint_nash(P, u, u, u)
    assert report["is_joint_ne"]
    assert report["value"] == pytest.approx(0.0, abs=1e-12)
    assert max(report["best_deviations"]) <= 1e-12


def test_lopsided_profile_is_not_a_joint_ne():
    # All three matching under odd-man-in hands a coalition member a free
    # deviation: mismatching makes player 1 a matcher who pays.
    P = odd_man_tensor(2, "OMI")
    x = np.array([1.0, 0.0])
    report = verify_joint_nash(P, x, x, x)
    assert not report["is_joint_ne"]
    assert max(report["best_deviations"]) > 0.5


def test_joint_fp_limit_passes_the_nash_check_when_it_converges():
    P = odd_man_tensor(2, "OMO")
    one = joint_fp(P, 5000, rng_seed=6)
    x, y, z = (np.asarray(s) for s in one.empirical)
    report = verify_joint_nash(P, x, y, z, tol=0.02)
    assert report["is_joint_ne"]
