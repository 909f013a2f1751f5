"""Exact analytics for continuous 3-player Guts poker.

Players ante 1 and receive i.i.d. uniform hands on [0, 1]; each player
holds or folds simultaneously, the best hand among holders takes the pot,
and pure strategies reduce to hold thresholds (p1, p2, p3) in [0,1]^3.
``alpha`` is the one-round expected return to player 1 and ``beta`` the
expected factor multiplying the stakes carried into the next round, so the
round-recursive game has payoff alpha + V*beta for continuation value V.

The module provides player 1's payoff surface and gradient, the
coalition's two-branch best response against a player-1 threshold, the
synchronous value map T(V) and its fixed point, the optimal two-atom
coalition mixture, a grid certificate that the asynchronous value is 0,
and discretization onto a payoff tensor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .games import PayoffTensor3

# The two-branch best-response formulas are certified only for modest
# continuation values; beyond this the branch structure is not validated.
V_SMALL_LIMIT = 0.5

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class GutsPoint:
    """A threshold triple: player i holds above p_i, folds below."""

    p1: float
    p2: float
    p3: float

    def __post_init__(self):
        for name, v in (("p1", self.p1), ("p2", self.p2), ("p3", self.p3)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")

    def __iter__(self):
        return iter((self.p1, self.p2, self.p3))


def _check_unit_range(*arrays) -> None:
    for a in arrays:
        if np.any(a < 0.0) or np.any(a > 1.0):
            raise ValueError("thresholds must lie in [0, 1]")


# Branch polynomials for alpha, written in canonical order lo <= hi for the
# two coalition thresholds. The three cases are player 1's threshold below
# both, between, or above both. Values and first derivatives agree on the
# case boundaries, so tie-breaking between branches is value-irrelevant.


def _alpha_p1_lowest(p1, lo, hi):
    return 2 * p1 - lo - hi + hi**3 + 3 * lo**2 * hi - 4 * p1 * lo * hi


def _alpha_p1_middle(p1, lo, hi):
    return 2 * p1 - lo - hi + hi**3 - 3 * p1**2 * hi + 2 * p1 * lo * hi


def _alpha_p1_highest(p1, lo, hi):
    return 2 * p1 - lo - hi - 2 * p1**3 + 2 * p1 * lo * hi


def _grad_p1_lowest(p1, lo, hi):
    return (
        2 - 4 * lo * hi,
        -1 + 6 * lo * hi - 4 * p1 * hi,
        -1 + 3 * hi**2 + 3 * lo**2 - 4 * p1 * lo,
    )


def _grad_p1_middle(p1, lo, hi):
    return (
        2 - 6 * p1 * hi + 2 * lo * hi,
        -1 + 2 * p1 * hi,
        -1 + 3 * hi**2 - 3 * p1**2 + 2 * p1 * lo,
    )


def _grad_p1_highest(p1, lo, hi):
    return (
        2 - 6 * p1**2 + 2 * lo * hi,
        -1 + 2 * p1 * hi,
        -1 + 2 * p1 * lo,
    )


def alpha(p1, p2, p3):
    """One-round expected return to player 1 at thresholds (p1, p2, p3).

    Piecewise cubic in the threshold ordering, C^1 across the case
    boundaries, symmetric under exchanging p2 and p3. Accepts scalars or
    broadcastable arrays; returns a float for scalar input.
    """
    p1, p2, p3 = np.broadcast_arrays(
        np.asarray(p1, dtype=float),
        np.asarray(p2, dtype=float),
        np.asarray(p3, dtype=float),
    )
    _check_unit_range(p1, p2, p3)
    lo = np.minimum(p2, p3)
    hi = np.maximum(p2, p3)
    out = np.where(
        p1 <= lo,
        _alpha_p1_lowest(p1, lo, hi),
        np.where(
            p1 <= hi,
            _alpha_p1_middle(p1, lo, hi),
            _alpha_p1_highest(p1, lo, hi),
        ),
    )
    return float(out) if out.ndim == 0 else out


def grad_alpha(p1, p2, p3) -> np.ndarray:
    """Gradient of alpha, stacked as shape (3,) + broadcast shape.

    Computed on the canonical lo <= hi ordering, then the p2/p3 components
    are swapped back. On case boundaries the adjacent branches agree, so
    any branch choice yields the same (one-sided) value.
    """
    p1, p2, p3 = np.broadcast_arrays(
        np.asarray(p1, dtype=float),
        np.asarray(p2, dtype=float),
        np.asarray(p3, dtype=float),
    )
    _check_unit_range(p1, p2, p3)
    swap = p2 > p3
    lo = np.where(swap, p3, p2)
    hi = np.where(swap, p2, p3)
    g_low = _grad_p1_lowest(p1, lo, hi)
    g_mid = _grad_p1_middle(p1, lo, hi)
    g_high = _grad_p1_highest(p1, lo, hi)
    sel_low = p1 <= lo
    sel_mid = (~sel_low) & (p1 <= hi)
    comps = [
        np.where(sel_low, g_low[c], np.where(sel_mid, g_mid[c], g_high[c]))
        for c in range(3)
    ]
    d1, d_lo, d_hi = comps
    d2 = np.where(swap, d_hi, d_lo)
    d3 = np.where(swap, d_lo, d_hi)
    return np.stack([d1, d2, d3])


def beta(p1, p2, p3):
    """Expected stakes multiplier carried into the next round."""
    p1, p2, p3 = np.broadcast_arrays(
        np.asarray(p1, dtype=float),
        np.asarray(p2, dtype=float),
        np.asarray(p3, dtype=float),
    )
    _check_unit_range(p1, p2, p3)
    out = 2.0 - p1 - p2 - p3 + 2.0 * p1 * p2 * p3
    return float(out) if out.ndim == 0 else out


def _check_v_small(V: float) -> None:
    if not abs(V) <= V_SMALL_LIMIT:
        raise ValueError(
            f"continuation value V={V} outside the validated range "
            f"[-{V_SMALL_LIMIT}, {V_SMALL_LIMIT}] for the two-branch "
            "best-response formulas"
        )


def _response_values(p1, V: float = 0.0):
    """Coalition best-response data against player-1 threshold(s) p1.

    Returns (value_a, value_b, p3a, p3b): the modified-game values
    alpha + V*beta of the coalition's two candidate replies. Branch a is
    the symmetric reply (q, q) with q the interior critical point above
    p1; branch b pairs an instant caller (threshold 0) with a high
    threshold. The interior critical points

        p3a = ((2-V) p1 + sqrt((2-V)^2 p1^2 + 6 (1+V))) / 6
        p3b = sqrt((3 p1^2 + 1 + V) / 3)

    are valid (inside [p1, 1]) for p1 up to 1/sqrt(2) and p1 up to
    sqrt((2-V)/3) respectively; outside, each branch's convexity in the
    coalition threshold puts the constrained minimum at the clamped point,
    where the value is evaluated directly from alpha and beta.
    """
    _check_v_small(V)
    p1 = np.asarray(p1, dtype=float)
    _check_unit_range(p1)
    c = 2.0 - V
    p3a_raw = (c * p1 + np.sqrt(c * c * p1 * p1 + 6.0 * (1.0 + V))) / 6.0
    p3b_raw = np.sqrt((3.0 * p1 * p1 + 1.0 + V) / 3.0)
    p3a = np.clip(p3a_raw, p1, 1.0)
    p3b = np.clip(p3b_raw, p1, 1.0)

    value_a = (p3a - p1) * (4.0 * p3a**2 - 2.0) + V * (
        2.0 - p1 - 2.0 * p3a + 2.0 * p1 * p3a**2
    )
    value_b = (
        2.0 * p1
        - p3b
        + p3b**3
        - 3.0 * p1**2 * p3b
        + V * (2.0 - p1 - p3b)
    )
    # Where clamping moved a critical point, the closed form no longer
    # applies; fall back to direct evaluation of the modified payoff.
    clamped_a = p3a != p3a_raw
    clamped_b = p3b != p3b_raw
    if np.any(clamped_a):
        direct = alpha(p1, p3a, p3a) + V * beta(p1, p3a, p3a)
        value_a = np.where(clamped_a, direct, value_a)
    if np.any(clamped_b):
        zeros = np.zeros_like(p3b)
        direct = alpha(p1, zeros, p3b) + V * beta(p1, zeros, p3b)
        value_b = np.where(clamped_b, direct, value_b)
    return value_a, value_b, p3a, p3b


class BestResponse(NamedTuple):
    """The coalition's two candidate best replies against p1."""

    p1: float
    value_a: float
    value_b: float
    argmin_a: tuple[float, float]
    argmin_b: tuple[float, float]
    r: float  # the best-response value, min(value_a, value_b)


def best_response(p1: float, V: float = 0.0) -> BestResponse:
    """Coalition best response to player-1 threshold p1 in the modified
    game alpha + V*beta.

    Raises ValueError when V lies outside the validated smallness range.
    """
    value_a, value_b, p3a, p3b = _response_values(float(p1), V)
    va, vb = float(value_a), float(value_b)
    return BestResponse(
        p1=float(p1),
        value_a=va,
        value_b=vb,
        argmin_a=(float(p3a), float(p3a)),
        argmin_b=(0.0, float(p3b)),
        r=min(va, vb),
    )


def response_curve(p1_values, V: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Sampled branch values (value_a, value_b) along an array of p1."""
    value_a, value_b, _, _ = _response_values(np.asarray(p1_values, dtype=float), V)
    return value_a, value_b


def _golden_max(f, a: float, b: float, tol: float = 1e-12) -> tuple[float, float]:
    """Golden-section maximization of a unimodal f on [a, b]."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
        else:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
    x = 0.5 * (a + b)
    return x, f(x)


class SyncValue(NamedTuple):
    value: float
    p1_opt: float


def sync_value(V: float = 0.0, scan_points: int = 2001) -> SyncValue:
    """Synchronous coalition value of the modified game alpha + V*beta.

    Maximizes the best-response value min(value_a, value_b) over player
    1's threshold. The two branches cross once in [0, 1], branch a rising
    and branch b falling, so the maximin sits at the crossing: a coarse
    scan brackets the sign change of (value_a - value_b), bisection pins
    it down, and a golden-section pass over the bracketing cell polishes
    the result. Falls back to a dense grid scan if the coarse scan shows
    no sign change, and raises if the crossing structure is absent.

    Post-validates the branch ordering (value_a >= value_b beyond the
    crossing), which is the operative smallness condition on V.
    """
    grid = np.linspace(0.0, 1.0, scan_points)
    va, vb, _, _ = _response_values(grid, V)
    diff = va - vb
    crossings = np.nonzero(np.diff(np.sign(diff)) > 0)[0]

    def r_of(p1: float) -> float:
        a_val, b_val, _, _ = _response_values(np.float64(p1), V)
        return float(np.minimum(a_val, b_val))

    if len(crossings) == 0:
        if np.all(diff > 0) or np.all(diff < 0):
            raise ValueError(
                f"response branches do not cross in [0, 1] for V={V}; "
                "outside the validated continuation range"
            )
        i = int(np.argmax(np.minimum(va, vb)))
        lo_b = grid[max(i - 1, 0)]
        hi_b = grid[min(i + 1, scan_points - 1)]
        p1_opt, t_val = _golden_max(r_of, lo_b, hi_b)
    else:
        i = int(crossings[0])
        lo_b, hi_b = float(grid[i]), float(grid[i + 1])
        # bisect the sign change of value_a - value_b
        f_lo = diff[i]
        a_, b_ = lo_b, hi_b
        for _ in range(80):
            mid = 0.5 * (a_ + b_)
            va_m, vb_m, _, _ = _response_values(np.float64(mid), V)
            d_m = float(va_m - vb_m)
            if (d_m > 0) == (f_lo > 0):
                a_ = mid
            else:
                b_ = mid
        root = 0.5 * (a_ + b_)
        p1_golden, t_golden = _golden_max(r_of, lo_b, hi_b)
        t_root = r_of(root)
        if t_root >= t_golden:
            p1_opt, t_val = root, t_root
        else:
            p1_opt, t_val = p1_golden, t_golden

    # Smallness post-check: branch a must dominate beyond the crossing.
    tail = np.linspace(p1_opt, 1.0, 200)
    va_t, vb_t, _, _ = _response_values(tail, V)
    if np.any(va_t < vb_t - 1e-9):
        raise ValueError(
            f"branch ordering fails beyond the crossing for V={V}; "
            "outside the validated continuation range"
        )
    return SyncValue(value=float(t_val), p1_opt=float(p1_opt))


@dataclass(frozen=True)
class CoalitionMixture:
    """The coalition's optimal one-shot mixture: two atoms.

    Atom a is the symmetric pair (p3a, p3a), atom b the caller pair
    (0, p3b), mixed with weight weight_a on atom a. diagnostics records
    the branch slopes behind the weight and the synchronous value.
    """

    p1_opt: float
    atom_a: tuple[float, float]
    atom_b: tuple[float, float]
    weight_a: float
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.weight_a <= 1.0:
            raise ValueError(f"weight_a={self.weight_a} outside [0, 1]")

    def payoff_curve(self, p1_values) -> np.ndarray:
        """Player 1's expected return against the fixed mixture."""
        p = np.asarray(p1_values, dtype=float)
        y = self.weight_a
        qa = self.atom_a[0]
        qb = self.atom_b[1]
        return y * alpha(p, qa, qa) + (1.0 - y) * alpha(p, 0.0, qb)


def optimal_coalition_mixture(h: float = 1e-6) -> CoalitionMixture:
    """Optimal coalition mixture for the one-shot game.

    At the maximin threshold the two response branches cross with slopes
    of opposite sign; mixing the branch minimizers with weight
    |slope_b| / (|slope_a| + |slope_b|) on atom a flattens player 1's
    payoff curve there, making the crossing a genuine maximum. Slopes are
    central finite differences with step h.
    """
    t0, p1_opt = sync_value(0.0)
    _, _, p3a, p3b = _response_values(np.float64(p1_opt), 0.0)
    va_plus, vb_plus, _, _ = _response_values(np.float64(p1_opt + h), 0.0)
    va_minus, vb_minus, _, _ = _response_values(np.float64(p1_opt - h), 0.0)
    slope_a = float(va_plus - va_minus) / (2.0 * h)
    slope_b = float(vb_plus - vb_minus) / (2.0 * h)
    if not slope_a * slope_b < 0.0:
        raise ValueError(
            f"branch slopes {slope_a:.4g} and {slope_b:.4g} at the crossing "
            "are not of opposite sign; no flattening mixture exists"
        )
    y = abs(slope_b) / (abs(slope_a) + abs(slope_b))
    return CoalitionMixture(
        p1_opt=p1_opt,
        atom_a=(float(p3a), float(p3a)),
        atom_b=(0.0, float(p3b)),
        weight_a=y,
        diagnostics={
            "slope_a": slope_a,
            "slope_b": slope_b,
            "sync_value": t0,
            "fd_step": h,
        },
    )


@dataclass
class RecursiveTrace:
    """Iterates of the round-recursive value map starting from T(0)."""

    values: list[float]
    p1_path: list[float]
    converged: bool
    v_star: float

    def __post_init__(self):
        v = np.asarray(self.values)
        if len(v) > 1 and np.any(np.diff(v) > 1e-12):
            raise ValueError("recursive value sequence must be nonincreasing")


def recursive_fixed_point(max_rounds: int = 60, tol: float = 1e-6) -> RecursiveTrace:
    """Iterate V <- T(V) from V=0 to the repeated-game value.

    Stops when successive values differ by less than tol or after
    max_rounds. The sequence must be nonincreasing (each extra round can
    only hurt player 1); a violation beyond 1e-12 raises, since it would
    mean the value map itself is broken.
    """
    if max_rounds < 1:
        raise ValueError("need at least one round")
    values: list[float] = []
    p1_path: list[float] = []
    V = 0.0
    converged = False
    for _ in range(max_rounds):
        t_val, p1_opt = sync_value(V)
        if values and t_val > values[-1] + 1e-12:
            raise RuntimeError(
                f"value map increased from {values[-1]} to {t_val}; "
                "monotonicity of the recursion is violated"
            )
        values.append(t_val)
        p1_path.append(p1_opt)
        if abs(t_val - V) < tol:
            converged = True
            break
        V = t_val
    return RecursiveTrace(
        values=values, p1_path=p1_path, converged=converged, v_star=values[-1]
    )


class AsyncCertificate(NamedTuple):
    min_of_max: float
    argmin: tuple[float, float]
    grid_n: int


def async_certificate(grid_n: int = 200) -> AsyncCertificate:
    """Grid certificate that no coalition pair beats the Nash value.

    For every (p2, p3) on a grid_n x grid_n grid over [0,1]^2, player 1's
    best reply max_p1 alpha is computed by golden section (alpha is
    concave in p1); the minimum over the grid certifies that the
    asynchronous coalition cannot push player 1 below 0, with the minimum
    attained at the symmetric point (1/sqrt(2), 1/sqrt(2)).
    """
    if grid_n < 100:
        raise ValueError("grid_n must be at least 100 for a meaningful certificate")
    g = np.linspace(0.0, 1.0, grid_n)
    P2, P3 = np.meshgrid(g, g, indexing="ij")
    p2f = P2.ravel()
    p3f = P3.ravel()

    a = np.zeros_like(p2f)
    b = np.ones_like(p2f)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc = alpha(c, p2f, p3f)
    fd = alpha(d, p2f, p3f)
    for _ in range(70):
        take = fc < fd
        c_old, d_old = c, d
        a = np.where(take, c_old, a)
        b = np.where(take, b, d_old)
        c = np.clip(np.where(take, d_old, b - _INVPHI * (b - a)), 0.0, 1.0)
        d = np.clip(np.where(take, a + _INVPHI * (b - a), c_old), 0.0, 1.0)
        # Only one of c, d moves per element; re-evaluating both keeps the
        # bookkeeping simple at twice the (cheap) evaluation cost.
        fc = alpha(c, p2f, p3f)
        fd = alpha(d, p2f, p3f)
    best = alpha(0.5 * (a + b), p2f, p3f)
    idx = int(np.argmin(best))
    return AsyncCertificate(
        min_of_max=float(best[idx]),
        argmin=(float(p2f[idx]), float(p3f[idx])),
        grid_n=grid_n,
    )


def discretize_guts(n: int) -> PayoffTensor3:
    """Tensor of alpha sampled at thresholds i/n, i = 0..n-1."""
    if n < 2:
        raise ValueError("need at least 2 thresholds")
    g = np.arange(n) / n
    I, J, K = np.meshgrid(g, g, g, indexing="ij")
    entries = alpha(I, J, K)
    return PayoffTensor3(n=n, entries=entries, symmetric_zero_sum=True)


def gradient_bound(resolution: int = 101) -> float:
    """Max Euclidean norm of grad_alpha over a cubic grid.

    Used for the discretization error estimate: restricting thresholds to
    a grid of spacing 1/n moves the synchronous value by at most
    (1/n) times this bound.
    """
    g = np.linspace(0.0, 1.0, resolution)
    P1, P2, P3 = np.meshgrid(g, g, g, indexing="ij")
    grads = grad_alpha(P1.ravel(), P2.ravel(), P3.ravel())
    return float(np.sqrt((grads**2).sum(axis=0)).max())
