"""Numerical solvers for the two coalition values on payoff tensors.

The synchronous value is a concave maximin, max_x min over pure coalition
pairs of the mixed payoff; the asynchronous value is a nonconvex minimax,
min over two independent mixtures of player 1's best reply. Both are
attacked the same way: replace the inner optimum by a differentiable
surrogate, then run a projected descent (plain gradient or quasi-Newton)
over the strategy domain, restarted from random points. Hard constraint
handling projects every iterate exactly onto the simplices; soft handling
works in the reduced box of all but the last coordinate per block, the
leftover probability implied, and penalizes overshoot of the budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np

from .games import (
    PayoffMatrix2,
    PayoffTensor3,
    StrategySimplex,
    _project_simplex_array,
    uniform_simplex_sample,
)
from .smoothing import SmoothingSpec, smooth_max_grad, smooth_min_grad

ARMIJO_C1 = 1e-4
MAX_HALVINGS = 50
CURVATURE_FLOOR = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    smoothing: SmoothingSpec = field(default_factory=lambda: SmoothingSpec.softmax(1e-4))
    constraint_mode: str = "hard"  # "hard" (projection) or "soft" (penalty)
    penalty_K: float = 100.0
    penalty_exponent: float = 2.0
    method: str = "quasi-newton"  # or "projected-gradient"
    max_iter: int = 500
    grad_tol: float = 1e-8
    restarts: int = 20
    rng_seed: int = 0
    adaptive_smoothing: bool = False
    epsilon_max: float = 1e-1
    polish_epsilon: float | None = None  # rerun the champion at this sharper epsilon

    def __post_init__(self):
        if self.constraint_mode not in ("hard", "soft"):
            raise ValueError(f"unknown constraint mode {self.constraint_mode!r}")
        if self.method not in ("quasi-newton", "projected-gradient"):
            raise ValueError(f"unknown method {self.method!r}")
        if not self.penalty_K > 0:
            raise ValueError("penalty_K must be positive")
        if self.restarts < 0:
            raise ValueError("restarts must be nonnegative")
        if self.polish_epsilon is not None:
            if not self.polish_epsilon > 0:
                raise ValueError("polish_epsilon must be positive")
            if self.smoothing.kind == "none":
                raise ValueError("polish_epsilon requires a smoothed objective")


@dataclass
class SolveOutcome:
    """Best-of-restarts result; value is the exact (unsmoothed) objective
    at the projected final strategies."""

    value: float
    strategies: list[StrategySimplex]
    termination: str
    restarts_used: int
    log: list[dict] = field(default_factory=list)


class MinimizeResult(NamedTuple):
    point: np.ndarray
    value: float
    termination: str
    iterations: int


class BlockDomain(NamedTuple):
    """Concatenated per-player blocks, all simplices or all unit boxes."""

    sizes: tuple[int, ...]
    mode: str  # "simplex" or "box"

    def split(self, w: np.ndarray) -> list[np.ndarray]:
        out, at = [], 0
        for s in self.sizes:
            out.append(w[at : at + s])
            at += s
        return out

    def project(self, w: np.ndarray) -> np.ndarray:
        if self.mode == "box":
            return np.clip(w, 0.0, 1.0)
        return np.concatenate([_project_simplex_array(b) for b in self.split(w)])


def _line_search(f, domain, x, fx, g, d):
    """Backtracking Armijo search along the projected step.

    Returns (x_new, f_new) or None after 50 halvings without sufficient
    decrease. The decrease test uses the actually-taken step x_new - x,
    which differs from t*d whenever the projection clips.
    """
    t = 1.0
    for _ in range(MAX_HALVINGS):
        x_new = domain.project(x + t * d)
        s = x_new - x
        gs = float(g @ s)
        if gs < 0.0:
            f_new = f(x_new)
            if f_new <= fx + ARMIJO_C1 * gs:
                return x_new, f_new
        t *= 0.5
    return None


def minimize(
    f: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    domain: BlockDomain,
    config: SolverConfig,
    x0: np.ndarray,
    refresh: Callable[[float], tuple[Callable, Callable]] | None = None,
) -> MinimizeResult:
    """Projected descent over the domain from x0.

    The quasi-newton method maintains a rank-two inverse-curvature
    estimate and falls back to the raw gradient step whenever the
    estimated direction stops being a descent direction (common right
    after projection clips onto a face). Termination: projected-gradient
    norm below grad_tol, the iteration budget, or a failed line search.
    With adaptive smoothing enabled, a failed line search instead bumps
    the softmax epsilon by 10x (up to epsilon_max) via ``refresh`` and
    keeps going; the configured sharpness is restored after the next
    successful step.
    """
    x = domain.project(np.asarray(x0, dtype=float))
    dim = x.size
    H = np.eye(dim)
    fx = f(x)
    g = grad(x)

    eps_base = config.smoothing.epsilon
    eps_cur = eps_base
    can_adapt = (
        refresh is not None
        and config.adaptive_smoothing
        and config.smoothing.kind == "softmax"
    )

    termination = "max_iter"
    it = 0
    while it < config.max_iter:
        it += 1
        if np.linalg.norm(domain.project(x - g) - x) < config.grad_tol:
            termination = "converged"
            break

        if config.method == "quasi-newton":
            d = -H @ g
            dn = float(np.linalg.norm(d))
            # A curvature estimate gone degenerate produces directions too
            # large for the projector's arithmetic; discard it entirely.
            if np.isfinite(dn) and dn < 1e10 and float(g @ d) < 0.0:
                directions = [d, -g]
            else:
                H = np.eye(dim)
                directions = [-g]
        else:
            directions = [-g]

        step = None
        for d in directions:
            step = _line_search(f, domain, x, fx, g, d)
            if step is not None:
                break

        if step is None:
            if can_adapt and eps_cur < config.epsilon_max:
                eps_cur = min(eps_cur * 10.0, config.epsilon_max)
                f, grad = refresh(eps_cur)
                fx, g = f(x), grad(x)
                H = np.eye(dim)
                continue
            termination = "line_search_failure"
            break

        x_new, f_new = step
        g_new = grad(x_new)
        if config.method == "quasi-newton":
            s = x_new - x
            y = g_new - g
            sy = float(s @ y)
            if sy > max(CURVATURE_FLOOR * np.linalg.norm(s) * np.linalg.norm(y), 1e-150):
                rho = 1.0 / sy
                V = np.eye(dim) - rho * np.outer(s, y)
                H = V @ H @ V.T + rho * np.outer(s, s)
                if not np.isfinite(H).all():
                    H = np.eye(dim)
        x, fx, g = x_new, f_new, g_new

        if eps_cur != eps_base:
            eps_cur = eps_base
            f, grad = refresh(eps_cur)
            fx, g = f(x), grad(x)
            H = np.eye(dim)

    return MinimizeResult(point=x, value=fx, termination=termination, iterations=it)


class MaximinObjective:
    """Phi(x): surrogate minimum over the N^2 pure coalition pairs of the
    mixed payoff sum_i x_i P[i,j,k]. One evaluation costs O(N^3)."""

    def __init__(self, P: PayoffTensor3, spec: SmoothingSpec):
        self._a = np.asarray(P.entries, dtype=float)
        self.n = P.n
        self.spec = spec
        self.block_sizes = (P.n,)

    def __call__(self, x) -> float:
        return self.value_and_grad(x)[0]

    def value_and_grad(self, x) -> tuple[float, list[np.ndarray]]:
        x = np.asarray(x, dtype=float)
        pair = np.einsum("ijk,i->jk", self._a, x)
        val, g_pair = smooth_min_grad(pair.ravel(), self.spec)
        gx = np.einsum("ijk,jk->i", self._a, g_pair.reshape(self.n, self.n))
        return val, [gx]


class MinimaxObjective:
    """phi(y, z): surrogate maximum over player 1's pure strategies of
    the reply payoffs sum_jk y_j z_k P[i,j,k]."""

    def __init__(self, P: PayoffTensor3, spec: SmoothingSpec):
        self._a = np.asarray(P.entries, dtype=float)
        self.n = P.n
        self.spec = spec
        self.block_sizes = (P.n, P.n)

    def __call__(self, y, z) -> float:
        return self.value_and_grad(y, z)[0]

    def value_and_grad(self, y, z) -> tuple[float, list[np.ndarray]]:
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        replies = np.einsum("ijk,j,k->i", self._a, y, z)
        val, g_rep = smooth_max_grad(replies, self.spec)
        gy = np.einsum("i,ijk,k->j", g_rep, self._a, z)
        gz = np.einsum("i,ijk,j->k", g_rep, self._a, y)
        return val, [gy, gz]


class MatrixGameObjective:
    """min_y max_i (M y)_i for a 2-player matrix, smoothed inner max."""

    def __init__(self, M: PayoffMatrix2, spec: SmoothingSpec):
        self._m = np.asarray(M.entries, dtype=float)
        self.spec = spec
        self.block_sizes = (M.cols,)

    def __call__(self, y) -> float:
        return self.value_and_grad(y)[0]

    def value_and_grad(self, y) -> tuple[float, list[np.ndarray]]:
        y = np.asarray(y, dtype=float)
        val, g_rows = smooth_max_grad(self._m @ y, self.spec)
        return val, [g_rows @ self._m]


def maximin_objective(P: PayoffTensor3, spec: SmoothingSpec) -> MaximinObjective:
    return MaximinObjective(P, spec)


def minimax_objective(P: PayoffTensor3, spec: SmoothingSpec) -> MinimaxObjective:
    return MinimaxObjective(P, spec)


def _adapt_objective(objective, sign: float, config: SolverConfig):
    """Wrap a block objective as concatenated-vector f and grad over the
    domain implied by the constraint mode.

    sign=+1 minimizes the objective, sign=-1 minimizes its negation. Soft
    mode works on blocks of size n-1 with the last coordinate implied as
    the leftover probability, plus a one-sided penalty K*(sum(u)-1)_+^p
    on each block's budget overshoot, always added to the minimized
    function.
    """
    if config.constraint_mode == "hard":
        domain = BlockDomain(sizes=tuple(objective.block_sizes), mode="simplex")

        def f(w: np.ndarray) -> float:
            val, _ = objective.value_and_grad(*domain.split(w))
            return sign * val

        def grad(w: np.ndarray) -> np.ndarray:
            _, grads = objective.value_and_grad(*domain.split(w))
            return sign * np.concatenate(grads)

        return domain, f, grad

    domain = BlockDomain(sizes=tuple(s - 1 for s in objective.block_sizes), mode="box")
    K = config.penalty_K
    p = config.penalty_exponent

    def extend(reduced):
        return [np.append(u, 1.0 - u.sum()) for u in reduced]

    def f(w: np.ndarray) -> float:
        reduced = domain.split(w)
        val, _ = objective.value_and_grad(*extend(reduced))
        total = sign * val
        for u in reduced:
            total += K * max(float(u.sum()) - 1.0, 0.0) ** p
        return total

    def grad(w: np.ndarray) -> np.ndarray:
        reduced = domain.split(w)
        _, grads = objective.value_and_grad(*extend(reduced))
        parts = []
        for u, g in zip(reduced, grads):
            over = max(float(u.sum()) - 1.0, 0.0)
            parts.append(sign * (g[:-1] - g[-1]) + K * p * over ** (p - 1.0))
        return np.concatenate(parts)

    return domain, f, grad


def _feasible_strategies(w: np.ndarray, domain: BlockDomain) -> list[np.ndarray]:
    """Map a final iterate to per-player points exactly on the simplex."""
    if domain.mode == "simplex":
        return [_project_simplex_array(b) for b in domain.split(w)]
    return [
        _project_simplex_array(np.append(u, 1.0 - u.sum())) for u in domain.split(w)
    ]


def _multistart(objective, sign: float, config: SolverConfig, exact_value, starts=()):
    """Shared restart loop for both solvers.

    Runs the caller-provided starting points first, then config.restarts
    independent descents from uniform-random simplex starts (random
    restart r seeded with rng_seed + r). Each final point is scored by
    the exact unsmoothed objective at its feasible projection and the
    best is kept, ties to the earliest restart. With polish_epsilon set,
    a final warm-started descent sharpens the champion.
    """
    domain, f, grad = _adapt_objective(objective, sign, config)

    fixed: list[list[np.ndarray]] = []
    for st in starts:
        blocks = [np.asarray(b, dtype=float) for b in st]
        if tuple(b.size for b in blocks) != tuple(objective.block_sizes):
            raise ValueError(
                f"start has block sizes {tuple(b.size for b in blocks)}, "
                f"expected {tuple(objective.block_sizes)}"
            )
        fixed.append(blocks)
    if not fixed and config.restarts == 0:
        raise ValueError("no starting points: zero restarts and no explicit starts")

    def refresh(epsilon):
        objective.spec = objective.spec.with_epsilon(epsilon)
        return f, grad

    best = None
    log: list[dict] = []
    for r in range(len(fixed) + config.restarts):
        if r < len(fixed):
            seed = None
            blocks = fixed[r]
        else:
            seed = config.rng_seed + (r - len(fixed))
            rng = np.random.default_rng(seed)
            blocks = [uniform_simplex_sample(rng, s) for s in objective.block_sizes]
        if domain.mode == "box":
            w0 = np.concatenate([b[:-1] for b in blocks])
        else:
            w0 = np.concatenate(blocks)

        objective.spec = objective.spec.with_epsilon(config.smoothing.epsilon)
        result = minimize(f, grad, domain, config, w0, refresh=refresh)
        strategies = _feasible_strategies(result.point, domain)
        value = exact_value(*strategies)
        log.append(
            {
                "restart": r,
                "seed": seed,
                "value": value,
                "smoothed_value": sign * result.value,
                "termination": result.termination,
                "iterations": result.iterations,
            }
        )
        score = sign * value  # lower is better in the minimized scale
        if best is None or score < best[0]:
            best = (score, value, strategies, result.termination)

    if config.polish_epsilon is not None:
        # Coarse-to-fine continuation: the heavily smoothed runs above
        # locate the right region, one sharp warm-started descent then
        # removes most of the smoothing bias.
        blocks = best[2]
        if domain.mode == "box":
            w0 = np.concatenate([b[:-1] for b in blocks])
        else:
            w0 = np.concatenate(blocks)
        objective.spec = objective.spec.with_epsilon(config.polish_epsilon)
        sharp = replace(
            config, adaptive_smoothing=False,
            smoothing=config.smoothing.with_epsilon(config.polish_epsilon),
        )
        result = minimize(f, grad, domain, sharp, w0, refresh=refresh)
        strategies = _feasible_strategies(result.point, domain)
        value = exact_value(*strategies)
        log.append(
            {
                "restart": len(log),
                "seed": None,
                "value": value,
                "smoothed_value": sign * result.value,
                "termination": result.termination,
                "iterations": result.iterations,
            }
        )
        if sign * value < best[0]:
            best = (sign * value, value, strategies, result.termination)

    _, value, strategies, termination = best
    return SolveOutcome(
        value=value,
        strategies=[StrategySimplex(s) for s in strategies],
        termination=termination,
        restarts_used=len(log),
        log=log,
    )


def best_pure_pair(P: PayoffTensor3) -> tuple[np.ndarray, np.ndarray]:
    """The pure coalition pair (y, z) minimizing player 1's best reply.

    An O(n^2) scan that makes a strong deterministic warm start for
    solve_minimax: on many games the asynchronous optimum is a pure pair,
    and random restarts alone can miss its narrow basin entirely.
    """
    a = np.asarray(P.entries, dtype=float)
    replies = a.max(axis=0)
    j, k = np.unravel_index(int(replies.argmin()), replies.shape)
    eye = np.eye(P.n)
    return eye[j], eye[k]


def exact_maximin_value(P: PayoffTensor3, x) -> float:
    pair = np.einsum("ijk,i->jk", np.asarray(P.entries, dtype=float), np.asarray(x))
    return float(pair.min())


def exact_minimax_value(P: PayoffTensor3, y, z) -> float:
    replies = np.einsum(
        "ijk,j,k->i", np.asarray(P.entries, dtype=float), np.asarray(y), np.asarray(z)
    )
    return float(replies.max())


def solve_maximin(
    P: PayoffTensor3, config: SolverConfig | None = None, starts=()
) -> SolveOutcome:
    """Estimate the synchronous coalition value and an optimal x.

    starts: optional explicit starting strategies, each a 1-tuple (x,),
    tried before the random restarts.
    """
    config = config or SolverConfig()
    objective = MaximinObjective(P, config.smoothing)
    return _multistart(
        objective,
        sign=-1.0,
        config=config,
        exact_value=lambda x: exact_maximin_value(P, x),
        starts=starts,
    )


def solve_minimax(
    P: PayoffTensor3, config: SolverConfig | None = None, starts=()
) -> SolveOutcome:
    """Estimate the asynchronous coalition value and an optimal (y, z).

    starts: optional explicit starting pairs (y, z), tried before the
    random restarts; useful for warm-starting from a known good pair.
    """
    config = config or SolverConfig()
    objective = MinimaxObjective(P, config.smoothing)
    return _multistart(
        objective,
        sign=1.0,
        config=config,
        exact_value=lambda y, z: exact_minimax_value(P, y, z),
        starts=starts,
    )


def solve_matrix_game(
    M: PayoffMatrix2, config: SolverConfig | None = None, starts=()
) -> SolveOutcome:
    """Value of a 2-player zero-sum matrix game, min over the column
    player's mixture of the row player's best reply."""
    config = config or SolverConfig()
    objective = MatrixGameObjective(M, config.smoothing)
    m = np.asarray(M.entries, dtype=float)
    return _multistart(
        objective,
        sign=1.0,
        config=config,
        exact_value=lambda y: float((m @ np.asarray(y)).max()),
        starts=starts,
    )
