"""Payoff tensors, mixed strategies, and simplex geometry.

Shared foundation for all solvers: the dense 3-player payoff tensor (entry
[i][j][k] is the return to player 1 when the players hold pure strategies
i, j, k), 2-player payoff matrices, probability-simplex strategy vectors,
random generation of symmetric zero-sum games, and Euclidean projection
onto the simplex.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# Structural invariants (simplex feasibility, symmetry rules) are enforced
# at this tolerance; solver-facing value comparisons take a caller tolerance.
STRUCTURAL_TOL = 1e-12


def _as_weights(x, n: int | None = None) -> np.ndarray:
    w = np.asarray(x, dtype=float)
    if w.ndim != 1:
        raise ValueError(f"strategy must be a 1-D vector, got shape {w.shape}")
    if n is not None and w.shape[0] != n:
        raise ValueError(f"strategy has length {w.shape[0]}, expected {n}")
    return w


@dataclass(frozen=True)
class StrategySimplex:
    """A mixed strategy: nonnegative weights summing to 1."""

    weights: np.ndarray

    def __post_init__(self):
        w = _as_weights(self.weights)
        object.__setattr__(self, "weights", w)
        if not np.all(np.isfinite(w)):
            raise ValueError("strategy weights must be finite")
        if np.any(w < -STRUCTURAL_TOL):
            raise ValueError(f"negative weight {w.min():.3e} below tolerance")
        s = w.sum()
        if abs(s - 1.0) > max(STRUCTURAL_TOL, 1e-12 * len(w)):
            raise ValueError(f"weights sum to {s!r}, expected 1")

    def __array__(self, dtype=None, copy=None):
        return np.array(self.weights, dtype=dtype)

    def __len__(self) -> int:
        return len(self.weights)

    def tolist(self) -> list[float]:
        return [float(v) for v in self.weights]


@dataclass(frozen=True)
class PayoffTensor3:
    """Dense N x N x N payoff tensor, return to player 1.

    When ``symmetric_zero_sum`` is set, the entries must satisfy the two
    constraint families of a symmetric zero-sum 3-player game,

        P[i,j,k] = P[i,k,j]                (players 2 and 3 exchangeable)
        P[i,j,k] + P[j,i,k] + P[k,i,j] = 0 (returns over the seats sum to 0)

    which is validated on construction.
    """

    n: int
    entries: np.ndarray
    symmetric_zero_sum: bool = False

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.shape != (self.n,) * 3:
            if a.size == self.n**3:
                a = a.reshape((self.n,) * 3)
            else:
                raise ValueError(
                    f"entries of size {a.size} cannot form a {self.n}^3 tensor"
                )
        object.__setattr__(self, "entries", a)
        if not np.all(np.isfinite(a)):
            raise ValueError("tensor entries must be finite")
        if self.symmetric_zero_sum:
            report = validate_symmetry(self)
            if not report.passed:
                raise ValueError(
                    "tensor flagged symmetric_zero_sum violates the symmetry "
                    f"rules by {report.max_violation:.3e}"
                )

    def __array__(self, dtype=None, copy=None):
        return np.array(self.entries, dtype=dtype)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "entries": [float(v) for v in self.entries.ravel()],
            "symmetric_zero_sum": self.symmetric_zero_sum,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PayoffTensor3":
        return cls(
            n=int(d["n"]),
            entries=np.asarray(d["entries"], dtype=float),
            symmetric_zero_sum=bool(d.get("symmetric_zero_sum", False)),
        )


@dataclass(frozen=True)
class PayoffMatrix2:
    """2-player payoff matrix, return to the row player."""

    rows: int
    cols: int
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.shape != (self.rows, self.cols):
            raise ValueError(
                f"entries shape {a.shape} does not match ({self.rows}, {self.cols})"
            )
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        object.__setattr__(self, "entries", a)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.entries, dtype=dtype)

    @classmethod
    def from_array(cls, a) -> "PayoffMatrix2":
        a = np.asarray(a, dtype=float)
        return cls(rows=a.shape[0], cols=a.shape[1], entries=a)


@dataclass
class ValueReport:
    """Solved values and strategies for one game.

    v_nash is 0 for symmetric zero-sum games and None when the input game
    carries no symmetry certificate. sync_coalition is the coalition's joint
    distribution over pure pairs (j, k) backing v_sync, when available.
    """

    v_nash: float | None
    v_sync: float
    v_async: float
    x_opt: StrategySimplex | None = None
    y_opt: StrategySimplex | None = None
    z_opt: StrategySimplex | None = None
    sync_coalition: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    def ordering_ok(self, tol: float = 1e-8) -> bool:
        """Check v_sync <= v_async <= v_nash up to tol (when v_nash known)."""
        upper = self.v_nash if self.v_nash is not None else 0.0
        return self.v_sync <= self.v_async + tol and self.v_async <= upper + tol

    def to_dict(self) -> dict:
        strategies = {}
        for name, s in (("x", self.x_opt), ("y", self.y_opt), ("z", self.z_opt)):
            if s is not None:
                strategies[name] = s.tolist()
        if self.sync_coalition is not None:
            strategies["sync_pairs"] = [
                float(v) for v in np.asarray(self.sync_coalition).ravel()
            ]
        return {
            "v_nash": self.v_nash,
            "v_sync": self.v_sync,
            "v_async": self.v_async,
            "strategies": strategies,
            "diagnostics": self.diagnostics,
        }


@dataclass(frozen=True)
class SymmetryReport:
    passed: bool
    max_violation: float
    tolerance: float


def expected_payoff(P: PayoffTensor3, x, y, z) -> float:
    """Trilinear expected return to player 1: sum_ijk x_i y_j z_k P[i,j,k]."""
    x = _as_weights(x, P.n)
    y = _as_weights(y, P.n)
    z = _as_weights(z, P.n)
    return float(np.einsum("ijk,i,j,k->", P.entries, x, y, z))


def coalition_pair_payoffs(P: PayoffTensor3, x) -> np.ndarray:
    """Matrix of player-1 returns sum_i x_i P[i,j,k] over pure pairs (j,k)."""
    x = _as_weights(x, P.n)
    return np.einsum("ijk,i->jk", P.entries, x)


def player1_pure_payoffs(P: PayoffTensor3, y, z) -> np.ndarray:
    """Vector of player-1 pure returns sum_jk y_j z_k P[i,j,k]."""
    y = _as_weights(y, P.n)
    z = _as_weights(z, P.n)
    return np.einsum("ijk,j,k->i", P.entries, y, z)


def best_pure_response_p1(P: PayoffTensor3, y, z) -> tuple[int, float]:
    """Player 1's best pure reply to coalition mixtures (y, z).

    Returns (argmax index, max value); ties go to the smallest index.
    """
    v = player1_pure_payoffs(P, y, z)
    i = int(np.argmax(v))
    return i, float(v[i])


def worst_pure_pair(P: PayoffTensor3, x) -> tuple[tuple[int, int], float]:
    """The coalition's most damaging pure pair (j, k) against mixture x.

    Returns ((j, k), min value); ties break lexicographically in (j, k).
    """
    m = coalition_pair_payoffs(P, x)
    flat = int(np.argmin(m))
    j, k = divmod(flat, P.n)
    return (j, k), float(m[j, k])


def validate_symmetry(P: PayoffTensor3, tol: float = STRUCTURAL_TOL) -> SymmetryReport:
    """Check both symmetry families, reporting the worst absolute violation."""
    a = P.entries
    pair = np.abs(a - a.transpose(0, 2, 1)).max()
    # cyclic[i,j,k] = P[i,j,k] + P[j,i,k] + P[k,i,j]
    cyclic = np.abs(a + a.transpose(1, 0, 2) + a.transpose(1, 2, 0)).max()
    worst = float(max(pair, cyclic))
    return SymmetryReport(passed=worst <= tol, max_violation=worst, tolerance=tol)


def random_symmetric_tensor(
    n: int, rng_seed: int, low: float = -1.0, high: float = 1.0
) -> PayoffTensor3:
    """Random symmetric zero-sum payoff tensor, deterministic in (n, seed).

    A minimal free-entry set is drawn uniform on [low, high] and the
    remaining entries are filled so both constraint families hold exactly:

      - diagonal P[i,i,i] = 0;
      - per unordered pair i<j, draw P[j,j,i] and P[j,i,i]; then
        P[j,i,j] = P[j,j,i], P[i,j,j] = -2 P[j,j,i],
        P[i,i,j] = P[i,j,i] = -P[j,i,i] / 2;
      - per unordered triple i<j<k, draw P[i,j,k] and P[j,i,k]; then
        P[k,i,j] = -P[i,j,k] - P[j,i,k] and each pair-swapped copy
        P[a,c,b] = P[a,b,c].

    Note the dependent entries can leave [low, high] (for example
    P[i,j,j] = -2 P[j,j,i]); only the free entries are bounded by the
    requested range.
    """
    if n < 2:
        raise ValueError("need at least 2 strategies per player")
    rng = np.random.default_rng(rng_seed)
    P = np.zeros((n, n, n))
    for i in range(n):
        for j in range(i + 1, n):
            a = rng.uniform(low, high)  # P[j,j,i]
            b = rng.uniform(low, high)  # P[j,i,i]
            P[j, j, i] = P[j, i, j] = a
            P[i, j, j] = -2.0 * a
            P[j, i, i] = b
            P[i, i, j] = P[i, j, i] = -0.5 * b
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                c = rng.uniform(low, high)  # P[i,j,k]
                d = rng.uniform(low, high)  # P[j,i,k]
                e = -c - d  # P[k,i,j], forced by the cyclic rule
                P[i, j, k] = P[i, k, j] = c
                P[j, i, k] = P[j, k, i] = d
                P[k, i, j] = P[k, j, i] = e
    return PayoffTensor3(n=n, entries=P, symmetric_zero_sum=True)


def negative_transpose(M: PayoffMatrix2) -> PayoffMatrix2:
    """Return -M^T, the same game seen from the column player's side."""
    return PayoffMatrix2(rows=M.cols, cols=M.rows, entries=-M.entries.T)


def _project_simplex_array(v: np.ndarray) -> np.ndarray:
    """Sort-and-threshold Euclidean projection onto the unit simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(v) + 1)
    cond = u - css / idx > 0
    rho = idx[cond][-1]
    theta = css[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def project_to_simplex(v) -> StrategySimplex:
    """Euclidean-nearest point of the probability simplex to v."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a nonempty 1-D vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("cannot project a non-finite vector")
    return StrategySimplex(_project_simplex_array(v))


def uniform_simplex_sample(rng: np.random.Generator, n: int) -> np.ndarray:
    """One point uniform on the simplex (normalized exponential draws)."""
    e = rng.standard_exponential(n)
    return e / e.sum()


# ---------------------------------------------------------------------------
# File formats


def save_tensor(P: PayoffTensor3, path) -> None:
    with open(path, "w") as f:
        json.dump(P.to_dict(), f)


def load_tensor(path) -> PayoffTensor3:
    with open(path) as f:
        d = json.load(f)
    for key in ("n", "entries"):
        if key not in d:
            raise ValueError(f"tensor file missing required key {key!r}")
    return PayoffTensor3.from_dict(d)


def strategy_to_json(s: StrategySimplex | Sequence[float]) -> str:
    return json.dumps([float(v) for v in np.asarray(s, dtype=float)])
