"""Fictitious play for matrix games and pooled-coalition tensor games.

Three dynamics: classical alternating best-response averaging for
2-player matrices, joint fictitious play on a 3-player tensor where the
two coalition members each best-respond to minimize player 1's payoff
while player 1 maximizes it, and a synchronized variant that joins the
coalition into one player over pure pairs so ordinary 2-player FP
estimates the synchronous value. Joint FP is not guaranteed to converge;
its residual is reported as a gap, never raised.

Joint FP keeps the alternating round structure of the 2-player method:
player 1 folds in its best reply first, then both coalition members
reply to the refreshed average. Starting strategies are independent
uniform draws from the simplex. Both choices are load-bearing for the
convergence statistics: simultaneous updates let paired coalition starts
lock into mirrored trajectories that grind toward coalition optima, and
pure starts sit on basin boundaries where the outcome is decided by
tie-breaking instead of the dynamics.

Joint FP trials are vectorized across seeds: strategies live in (trials,
n) arrays and every seed takes its best-response step in the same numpy
call, which keeps thousand-seed campaigns at interactive speed. A single
run is the trials=1 batch, so it reproduces the first trial of any
larger batch started from the same seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .games import PayoffMatrix2, PayoffTensor3, StrategySimplex


@dataclass
class FpTrace:
    iterations: int
    empirical: list[StrategySimplex]
    value_estimate: float
    converged_gap: float


def _theta(t: int, rule: str, floor_value: float) -> float:
    """Step size at update t (1-based): the running-average rate 1/(t+1),
    optionally floored so late iterations keep adapting."""
    base = 1.0 / (t + 1.0)
    if rule == "classical":
        return base
    if rule == "floor":
        return max(base, floor_value)
    raise ValueError(f"unknown theta rule {rule!r}")


def parse_theta(text: str) -> tuple[str, float]:
    """Parse CLI shorthand: "classical" or "floor:0.001"."""
    text = text.strip().lower()
    if text == "classical":
        return "classical", 0.0
    if text.startswith("floor"):
        _, _, arg = text.partition(":")
        return "floor", float(arg) if arg else 1e-3
    raise ValueError(f"cannot parse theta rule {text!r}")


def fp_2player(M: PayoffMatrix2, iterations: int, rng_seed: int = 0) -> FpTrace:
    """Alternating fictitious play on a matrix game, row maximizing.

    Both players start from a random pure strategy, then the row player
    best-responds to the column player's empirical average and the column
    player to the updated row average, one pure strategy each per round.
    The value estimate is the midpoint of the two players' guaranteed
    values; converged_gap is their difference, which bounds the distance
    to the game value.
    """
    if iterations < 1:
        raise ValueError("need at least one iteration")
    m = np.asarray(M.entries, dtype=float)
    rows, cols = m.shape
    rng = np.random.default_rng(rng_seed)
    i0 = int(rng.integers(rows))
    j0 = int(rng.integers(cols))

    row_counts = np.zeros(rows)
    col_counts = np.zeros(cols)
    row_counts[i0] = 1.0
    col_counts[j0] = 1.0
    # Running sums: u = M @ (col empirical sum), w = (row sum)^T @ M.
    u = m[:, j0].copy()
    w = m[i0, :].copy()

    for _ in range(iterations):
        i = int(np.argmax(u))
        row_counts[i] += 1.0
        w += m[i, :]
        j = int(np.argmin(w))
        col_counts[j] += 1.0
        u += m[:, j]

    x_bar = row_counts / row_counts.sum()
    y_bar = col_counts / col_counts.sum()
    v_row = float(w.min() / row_counts.sum())  # row's guarantee
    v_col = float(u.max() / col_counts.sum())  # col's exposure
    return FpTrace(
        iterations=iterations,
        empirical=[StrategySimplex(x_bar), StrategySimplex(y_bar)],
        value_estimate=0.5 * (v_row + v_col),
        converged_gap=v_col - v_row,
    )


@dataclass
class JointFpBatch:
    """Per-seed outcomes of a vectorized joint FP campaign."""

    iterations: int
    trials: int
    values: np.ndarray  # (trials,) player 1's payoff at the final triple
    gaps: np.ndarray  # (trials,) max best-response improvement
    x: np.ndarray  # (trials, n) final strategies
    y: np.ndarray
    z: np.ndarray

    def rate_within(self, target: float, tol: float) -> float:
        """Fraction of trials whose final value is within tol of target."""
        return float(np.mean(np.abs(self.values - target) <= tol))


def joint_fp_trials(
    P: PayoffTensor3,
    iterations: int,
    trials: int,
    theta_rule: str = "classical",
    floor_value: float = 1e-3,
    rng_seed: int = 0,
) -> JointFpBatch:
    """Run joint FP from `trials` random mixed starts, vectorized.

    Each trial starts all three players at independent uniform draws
    from the strategy simplex, consumed from a single generator seeded
    with rng_seed, so a batch is reproducible and its leading trials
    coincide with those of any longer batch. Rounds alternate: player 1
    averages in its best reply against the coalition's current
    empiricals, then players 2 and 3 each average in the reply that
    minimizes player 1's payoff against the refreshed average.
    """
    if iterations < 1:
        raise ValueError("need at least one iteration")
    if trials < 1:
        raise ValueError("need at least one trial")
    a = np.asarray(P.entries, dtype=float)
    n = P.n
    eye = np.eye(n)

    rng = np.random.default_rng(rng_seed)
    starts = rng.dirichlet(np.ones(n), size=(trials, 3))
    x = starts[:, 0]
    y = starts[:, 1]
    z = starts[:, 2]

    for t in range(1, iterations + 1):
        th = _theta(t, theta_rule, floor_value)
        p1 = np.einsum("ijk,sj,sk->si", a, y, z)
        x = (1.0 - th) * x + th * eye[p1.argmax(axis=1)]
        p2 = np.einsum("ijk,si,sk->sj", a, x, z)
        p3 = np.einsum("ijk,si,sj->sk", a, x, y)
        y = (1.0 - th) * y + th * eye[p2.argmin(axis=1)]
        z = (1.0 - th) * z + th * eye[p3.argmin(axis=1)]

    values = np.einsum("ijk,si,sj,sk->s", a, x, y, z)
    p1 = np.einsum("ijk,sj,sk->si", a, y, z)
    p2 = np.einsum("ijk,si,sk->sj", a, x, z)
    p3 = np.einsum("ijk,si,sj->sk", a, x, y)
    gaps = np.maximum(
        p1.max(axis=1) - values,
        np.maximum(values - p2.min(axis=1), values - p3.min(axis=1)),
    )
    return JointFpBatch(
        iterations=iterations,
        trials=trials,
        values=values,
        gaps=gaps,
        x=x,
        y=y,
        z=z,
    )


def joint_fp(
    P: PayoffTensor3,
    iterations: int,
    theta_rule: str = "classical",
    floor_value: float = 1e-3,
    rng_seed: int = 0,
) -> FpTrace:
    """Joint fictitious play from one random mixed start.

    Players 2 and 3 pool their winnings, so both best-respond against the
    current profile to minimize player 1's payoff while player 1
    maximizes it. Convergence is not guaranteed; the returned gap is the
    largest payoff improvement any single player could still grab.
    """
    batch = joint_fp_trials(
        P,
        iterations,
        trials=1,
        theta_rule=theta_rule,
        floor_value=floor_value,
        rng_seed=rng_seed,
    )
    return FpTrace(
        iterations=iterations,
        empirical=[
            StrategySimplex(batch.x[0]),
            StrategySimplex(batch.y[0]),
            StrategySimplex(batch.z[0]),
        ],
        value_estimate=float(batch.values[0]),
        converged_gap=float(batch.gaps[0]),
    )


def sync_matrix(P: PayoffTensor3) -> PayoffMatrix2:
    """The coalition joined into one player: N rows vs N^2 pure pairs,
    pair (j, k) at column j*N + k."""
    a = np.asarray(P.entries, dtype=float)
    return PayoffMatrix2.from_array(a.reshape(P.n, P.n * P.n))


def sync_fp(P: PayoffTensor3, iterations: int, rng_seed: int = 0) -> FpTrace:
    """2-player FP between player 1 and the joined coalition; the value
    estimate converges to the synchronous coalition value."""
    return fp_2player(sync_matrix(P), iterations, rng_seed=rng_seed)


def verify_joint_nash(
    P: PayoffTensor3, x, y, z, tol: float = 1e-9
) -> dict:
    """Check a profile for joint-Nash stability by pure-deviation scans.

    Player 1 must not gain by deviating, and neither coalition member may
    lower player 1's payoff; multilinearity makes pure deviations
    sufficient. Returns the per-player best improvements along with the
    verdict.
    """
    a = np.asarray(P.entries, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    base = float(np.einsum("ijk,i,j,k->", a, x, y, z))
    gain_1 = float(np.einsum("ijk,j,k->i", a, y, z).max() - base)
    gain_2 = float(base - np.einsum("ijk,i,k->j", a, x, z).min())
    gain_3 = float(base - np.einsum("ijk,i,j->k", a, x, y).min())
    return {
        "is_joint_ne": max(gain_1, gain_2, gain_3) <= tol,
        "best_deviations": [gain_1, gain_2, gain_3],
        "value": base,
    }
