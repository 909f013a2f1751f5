"""Differentiable surrogates for max and min over a payoff vector.

Two families: a softmax weighted average (never above the exact max, and
tightening as epsilon shrinks) and a shifted l^p mean (never below it for
p > 0). Both come with analytic derivative vectors so objective functions
can chain through them; kind "none" returns the exact optimum with a
one-hot subgradient at the attaining index, smallest index on ties.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_KINDS = ("none", "softmax", "lp_shift")


@dataclass(frozen=True)
class SmoothingSpec:
    """Which surrogate to use and its sharpness parameter.

    By convention configs carry a positive lp exponent; smooth_min applies
    the formula with the exponent negated, so one spec serves the inner
    max of a minimax objective and the inner min of a maximin objective.
    """

    kind: str = "none"
    epsilon: float = 1e-4
    p: float = 100.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown smoothing kind {self.kind!r}")
        if self.kind == "softmax" and not self.epsilon > 0:
            raise ValueError("softmax smoothing needs epsilon > 0")
        if self.kind == "lp_shift" and self.p == 0:
            raise ValueError("lp smoothing needs a nonzero exponent")

    def with_epsilon(self, epsilon: float) -> "SmoothingSpec":
        """Return a copy at a new sharpness; smaller epsilon is sharper.

        The lp family's sharpness knob is its exponent, so epsilon maps
        to p = 1/epsilon there; the softmax family uses epsilon directly.
        """
        if self.kind == "lp_shift":
            return SmoothingSpec(kind=self.kind, epsilon=epsilon, p=1.0 / epsilon)
        return SmoothingSpec(kind=self.kind, epsilon=epsilon, p=self.p)

    @classmethod
    def none(cls) -> "SmoothingSpec":
        return cls(kind="none")

    @classmethod
    def softmax(cls, epsilon: float = 1e-4) -> "SmoothingSpec":
        return cls(kind="softmax", epsilon=epsilon)

    @classmethod
    def lp_shift(cls, p: float = 100.0) -> "SmoothingSpec":
        return cls(kind="lp_shift", p=p)

    @classmethod
    def parse(cls, text: str) -> "SmoothingSpec":
        """Parse CLI shorthand: "none", "softmax:EPS", or "lp:P"."""
        text = text.strip().lower()
        if text == "none":
            return cls.none()
        if ":" in text:
            head, _, arg = text.partition(":")
            if head == "softmax":
                return cls.softmax(float(arg))
            if head in ("lp", "lp_shift"):
                return cls.lp_shift(float(arg))
        raise ValueError(f"cannot parse smoothing spec {text!r}")


def _exact(v: np.ndarray, minimum: bool) -> tuple[float, np.ndarray]:
    idx = int(np.argmin(v) if minimum else np.argmax(v))
    g = np.zeros_like(v)
    g[idx] = 1.0
    return float(v[idx]), g


def _softmax(v: np.ndarray, epsilon: float, minimum: bool) -> tuple[float, np.ndarray]:
    # Max-subtraction before exponentiation; the shift cancels in the
    # normalized weights, so this is exact, not an approximation.
    sign = -1.0 if minimum else 1.0
    t = sign * v / epsilon
    w = np.exp(t - t.max())
    w /= w.sum()
    s = float(v @ w)
    g = w * (1.0 + sign * (v - s) / epsilon)
    return s, g


def _lp_shift(v: np.ndarray, p: float) -> tuple[float, np.ndarray]:
    """Shifted l^p mean of v, max-like for p > 0 and min-like for p < 0.

    The formula wants bases bounded away from zero, so payoffs in [-1, 1]
    are first mapped affinely onto [0, 1]; the result is mapped back, and
    the two affine factors cancel in the derivative.
    """
    if np.any(v < -1.0 - 1e-9):
        raise ValueError(
            "lp smoothing needs payoffs >= -1; rescale the tensor or use softmax"
        )
    b = (v + 1.0) / 2.0 + 1.0  # bases in [1, ...)
    m = float(b.max() if p > 0 else b.min())
    r = b / m
    rp = r**p
    total = float(rp.sum())
    s_u = m * total ** (1.0 / p) - 1.0
    g = total ** ((1.0 - p) / p) * r ** (p - 1.0)
    return 2.0 * s_u - 1.0, g


def smooth_max_grad(values, spec: SmoothingSpec) -> tuple[float, np.ndarray]:
    """Surrogate maximum of a vector and its derivative in the entries."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("empty payoff vector")
    if spec.kind == "none":
        return _exact(v, minimum=False)
    if spec.kind == "softmax":
        return _softmax(v, spec.epsilon, minimum=False)
    return _lp_shift(v, spec.p)


def smooth_min_grad(values, spec: SmoothingSpec) -> tuple[float, np.ndarray]:
    """Surrogate minimum: softmax with negated inputs, lp with exponent -p."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("empty payoff vector")
    if spec.kind == "none":
        return _exact(v, minimum=True)
    if spec.kind == "softmax":
        return _softmax(v, spec.epsilon, minimum=True)
    return _lp_shift(v, -spec.p)


def smooth_max(values, spec: SmoothingSpec) -> float:
    return smooth_max_grad(values, spec)[0]


def smooth_min(values, spec: SmoothingSpec) -> float:
    return smooth_min_grad(values, spec)[0]
