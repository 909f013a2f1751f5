"""Closed-form solutions for the small benchmark games.

Every game here is solved exactly: the odd-man matching games on two
symbols (odds-and-evens) and three symbols (the rock-paper-scissors style
matching game), the one-parameter family of symmetric 2x2x2 games, and a
2x2 recursive toy model. These serve both as user-facing solvers and as
ground truth for the numerical engine.

Conventions: all games are symmetric zero-sum, so the Nash value to player
1 is 0. v_sync is the synchronous-coalition value (coalition correlates on
a joint distribution over pure pairs), v_async the asynchronous value
(coalition members mix independently), and v_sync <= v_async <= 0 always.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .games import PayoffTensor3

ORDER_TOL = 1e-12


@dataclass
class BenchmarkSolution:
    """Exact values plus minimizer catalogs for one benchmark game.

    global_minimizers holds (y, z) coalition strategy pairs attaining
    v_async. local_minimizers holds (y, z, value) triples for strict local
    minimizers of the asynchronous objective that are not global, with
    their objective values, so a numerical run converging to one can be
    told apart from a failed run. notes carries human-readable context
    (reduced games, catalog caveats).
    """

    v_sync: float
    v_async: float
    v_nash: float = 0.0
    global_minimizers: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    local_minimizers: list[tuple[np.ndarray, np.ndarray, float]] = field(
        default_factory=list
    )
    notes: str = ""
    x_opt: np.ndarray | None = None
    tensor: PayoffTensor3 | None = None

    def __post_init__(self):
        if not (
            self.v_sync <= self.v_async + ORDER_TOL
            and self.v_async <= self.v_nash + ORDER_TOL
        ):
            raise ValueError(
                f"value ordering violated: v_sync={self.v_sync}, "
                f"v_async={self.v_async}, v_nash={self.v_nash}"
            )


def _pair(y, z) -> tuple[np.ndarray, np.ndarray]:
    return (np.asarray(y, dtype=float), np.asarray(z, dtype=float))


def odd_man_tensor(n: int, variant: str) -> PayoffTensor3:
    """Payoff tensor of the n-symbol odd-man matching game.

    All three players pick one of n symbols. If exactly two players match,
    the third player is the odd man: under "OMO" (odd man out) the odd man
    pays 1 to each matcher, under "OMI" (odd man in) he collects 1 from
    each. Three-way matches and three-way misses are a wash.
    """
    if variant not in ("OMO", "OMI"):
        raise ValueError(f"variant must be 'OMO' or 'OMI', got {variant!r}")
    odd_return = -2.0 if variant == "OMO" else 2.0
    P = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if i == j == k:
                    continue
                if j == k:  # player 1 is the odd man
                    P[i, j, k] = odd_return
                elif i == j or i == k:  # player 1 matches one opponent
                    P[i, j, k] = -odd_return / 2.0
    return PayoffTensor3(n=n, entries=P, symmetric_zero_sum=True)


def omo_expected_returns(y: float, z: float) -> tuple[float, float]:
    """Expected returns for the two pure choices in odds-and-evens (OMO).

    y and z are the opponents' probabilities of playing "one". Returns
    (r_one, r_two), player 1's expected return for playing "one" and "two".
    """
    if not (0.0 <= y <= 1.0 and 0.0 <= z <= 1.0):
        raise ValueError(f"probabilities must lie in [0,1], got y={y}, z={z}")
    r_one = 3.0 * y + 3.0 * z - 4.0 * y * z - 2.0
    r_two = y + z - 4.0 * y * z
    return r_one, r_two


def odds_evens(variant: str) -> tuple[PayoffTensor3, BenchmarkSolution]:
    """Exact solution of three-player odds-and-evens (2 symbols).

    OMO: v_sync=-1 while independent mixing recovers the Nash value,
    v_async=0. OMI: correlation buys nothing, v_sync=v_async=-1.
    Minimizer pairs are given as simplex vectors (q, 1-q) where q is the
    probability of playing "one".
    """
    P = odd_man_tensor(2, variant)
    if variant == "OMO":
        sol = BenchmarkSolution(
            v_sync=-1.0,
            v_async=0.0,
            global_minimizers=[
                _pair([0.0, 1.0], [0.0, 1.0]),
                _pair([1.0, 0.0], [1.0, 0.0]),
                _pair([0.5, 0.5], [0.5, 0.5]),
            ],
            notes=(
                "odd man pays; coalition matching (either symbol, or a fair "
                "coin both) already holds player 1 to the Nash value 0"
            ),
            x_opt=np.array([0.5, 0.5]),
            tensor=P,
        )
    else:
        sol = BenchmarkSolution(
            v_sync=-1.0,
            v_async=-1.0,
            global_minimizers=[
                _pair([0.0, 1.0], [1.0, 0.0]),
                _pair([1.0, 0.0], [0.0, 1.0]),
            ],
            notes=(
                "odd man collects; deliberately mismatching opponents force "
                "-1 with no correlation needed, so v_sync = v_async"
            ),
            x_opt=np.array([0.5, 0.5]),
            tensor=P,
        )
    return P, sol


def family_222_tensor(alpha: float, family: str) -> PayoffTensor3:
    """The symmetric 2x2x2 game family, one parameter after normalization.

    "OMO-like" weights the odd-man-pays game: the odd man's penalty depends
    on his symbol (entries [0, a, a, -2], [-2a, 1, 1, 0] in row-major
    order). "OMI-like" is the odd-man-collects counterpart with entries
    negated and roles exchanged ([0, -a, -a, 2], [2a, -1, -1, 0]).
    """
    a = float(alpha)
    if family == "OMO-like":
        flat = [0.0, a, a, -2.0, -2.0 * a, 1.0, 1.0, 0.0]
    elif family == "OMI-like":
        flat = [0.0, -a, -a, 2.0, 2.0 * a, -1.0, -1.0, 0.0]
    else:
        raise ValueError(f"family must be 'OMO-like' or 'OMI-like', got {family!r}")
    return PayoffTensor3(n=2, entries=np.array(flat), symmetric_zero_sum=True)


def classify_222(alpha: float, family: str) -> BenchmarkSolution:
    """Exact values for any symmetric 2x2x2 zero-sum game.

    Every such game normalizes to one of the two one-parameter families of
    family_222_tensor. For OMO-like games with alpha >= 0 the coalition's
    mismatched pairs are dominated, leaving a 2x2 game with value
    -2*alpha/(alpha+1), while independent mixing cannot beat the Nash
    value (v_async = 0). For OMI-like games with alpha >= 0 the coalition
    needs no correlation and v_sync = v_async = max(-1, -alpha). For
    alpha <= 0 (either family) player 1 can force 0.
    """
    a = float(alpha)
    P = family_222_tensor(a, family)
    if family == "OMO-like":
        if a >= 0.0:
            v_sync = -2.0 * a / (a + 1.0)
            v_async = 0.0
            x_opt = np.array([a / (a + 1.0), 1.0 / (a + 1.0)])
            globals_ = [_pair([0, 1], [0, 1]), _pair([1, 0], [1, 0])]
            if a == 1.0:
                globals_.append(_pair([0.5, 0.5], [0.5, 0.5]))
            notes = (
                "coalition mismatch columns are dominated; reduced 2x2 game "
                f"rows=player1 [[0, -2], [{-2 * a}, 0]] has value {v_sync}"
            )
        else:
            v_sync = v_async = 0.0
            x_opt = np.array([0.0, 1.0])
            globals_ = [_pair([0, 1], [0, 1])]
            notes = "alpha <= 0: player 1 forces a return of zero"
    else:
        if a >= 0.0:
            v_sync = v_async = max(-1.0, -a)
            x_opt = np.array([1.0, 0.0]) if a <= 1.0 else np.array([0.0, 1.0])
            globals_ = [_pair([0, 1], [1, 0]), _pair([1, 0], [0, 1])]
            notes = (
                "coalition mismatches without correlating; player 1 picks the "
                f"better pure row of [{-a}, -1], value {v_sync}"
            )
        else:
            v_sync = v_async = 0.0
            x_opt = np.array([0.0, 1.0])
            globals_ = [_pair([1, 0], [1, 0])]
            notes = (
                "alpha <= 0: player 1 forces a return of zero; at alpha = 0 "
                "the minimizer set degenerates to a continuum, one "
                "representative listed"
            )
    return BenchmarkSolution(
        v_sync=v_sync,
        v_async=v_async,
        global_minimizers=globals_,
        notes=notes,
        x_opt=x_opt,
        tensor=P,
    )


def rps(variant: str) -> tuple[PayoffTensor3, BenchmarkSolution]:
    """Exact solution of the three-symbol odd-man matching game.

    OMI (odd man collects): v_sync=-2/3 < v_async=-1/2 < 0. The
    asynchronous problem is genuinely nonconvex: besides the three global
    minimizers (one player pure, the other mixing evenly on the remaining
    two symbols) there are strict local minimizers at value -4/9, and the
    uniform Nash pair is a nonsmooth saddle.

    OMO (odd man pays): v_sync=-4/3 while v_async=0, attained at the seven
    listed pairs (uniform pair, three matched pure pairs, three matched
    half-half pairs) with no other local minima.
    """
    P = odd_man_tensor(3, variant)
    third = 1.0 / 3.0
    if variant == "OMI":
        locals_ = [
            (np.array([0.0, third, 2 * third]), np.array([2 * third, third, 0.0])),
            (np.array([2 * third, third, 0.0]), np.array([0.0, third, 2 * third])),
            (np.array([third, 0.0, 2 * third]), np.array([third, 2 * third, 0.0])),
            (np.array([third, 2 * third, 0.0]), np.array([third, 0.0, 2 * third])),
            (np.array([0.0, 2 * third, third]), np.array([2 * third, 0.0, third])),
        ]
        sol = BenchmarkSolution(
            v_sync=-2.0 / 3.0,
            v_async=-0.5,
            global_minimizers=[
                _pair([1, 0, 0], [0, 0.5, 0.5]),
                _pair([0, 1, 0], [0.5, 0, 0.5]),
                _pair([0, 0, 1], [0.5, 0.5, 0]),
            ],
            local_minimizers=[(y, z, -4.0 / 9.0) for (y, z) in locals_],
            notes=(
                "local minimizer catalog deduplicated: the published list "
                "names six (y, z) pairs but its first and last entries "
                "coincide, so five distinct pairs are stored; the objective "
                "is symmetric under exchanging y and z, so each pair's "
                "mirror is a minimizer as well; uniform pair is a nonsmooth "
                "saddle, not a minimizer"
            ),
            x_opt=np.array([third, third, third]),
            tensor=P,
        )
    elif variant == "OMO":
        half_pairs = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]
        sol = BenchmarkSolution(
            v_sync=-4.0 / 3.0,
            v_async=0.0,
            global_minimizers=(
                [_pair([third] * 3, [third] * 3)]
                + [_pair(e, e) for e in np.eye(3)]
                + [_pair(h, h) for h in half_pairs]
            ),
            notes="seven global minimizers, no other local minima",
            x_opt=np.array([third, third, third]),
            tensor=P,
        )
    else:
        raise ValueError(f"variant must be 'OMI' or 'OMO', got {variant!r}")
    return P, sol


@dataclass(frozen=True)
class ToyRecursiveSolution:
    """Limit behavior of the 2x2 recursive toy game."""

    v_oneshot: float
    regime: str  # "oneshot" or "switch"
    v_limit: float  # math.inf when the switch regime diverges


def recursive_toy_2x2(alpha0: float, beta0: float) -> ToyRecursiveSolution:
    """Long-run value of the 2x2 recursive game with base payoff
    [[1,-1],[-1,1]] + alpha0 and uniform stakes factor beta0.

    The one-shot optimum (the fair coin) earns alpha0 per round and carries
    beta0/2 of the stakes forward, for a recursive value of
    alpha0 / (1 - beta0/2). When that value times beta0 stays below 2
    (equivalently alpha0*beta0 + beta0 <= 2) the one-shot strategy remains
    optimal in the limit. Otherwise the optimum switches to the pure play
    maximizing carried stakes, with limit (alpha0-1)/(1-beta0) for
    beta0 < 1, diverging to +inf for beta0 >= 1.
    """
    if not alpha0 > 0.0:
        raise ValueError(f"alpha0 must be positive, got {alpha0}")
    if not 0.0 < beta0 < 2.0:
        raise ValueError(f"beta0 must lie in (0, 2), got {beta0}")
    v_oneshot = alpha0 / (1.0 - beta0 / 2.0)
    if alpha0 * beta0 + beta0 <= 2.0:
        return ToyRecursiveSolution(v_oneshot=v_oneshot, regime="oneshot", v_limit=v_oneshot)
    v_limit = (alpha0 - 1.0) / (1.0 - beta0) if beta0 < 1.0 else math.inf
    return ToyRecursiveSolution(v_oneshot=v_oneshot, regime="switch", v_limit=v_limit)


def all_benchmark_games() -> dict[str, tuple[PayoffTensor3, BenchmarkSolution]]:
    """Every tensor-backed benchmark, keyed by a short name."""
    games: dict[str, tuple[PayoffTensor3, BenchmarkSolution]] = {
        "odds-evens-OMO": odds_evens("OMO"),
        "odds-evens-OMI": odds_evens("OMI"),
        "rps-OMI": rps("OMI"),
        "rps-OMO": rps("OMO"),
    }
    for a in (0.25, 0.5, 1.0, 2.0, 4.0):
        for family in ("OMO-like", "OMI-like"):
            sol = classify_222(a, family)
            games[f"222-{family}-a{a:g}"] = (sol.tensor, sol)
    return games
