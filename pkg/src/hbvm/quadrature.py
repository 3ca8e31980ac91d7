"""Gauss-Legendre rules on [0, 1]."""

from dataclasses import dataclass
import math

import numpy as np

MAX_NODES = 64
NEWTON_MAXITER = 100


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights of an interpolatory rule on [0, 1].

    Gauss-Legendre rules come from :func:`gauss_rule`; any other rule can be
    injected by constructing this class from node/weight arrays.
    """

    nodes: np.ndarray
    weights: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size == 0:
            raise ValueError("nodes and weights must be nonempty 1-d arrays of equal length")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def k(self):
        return self.nodes.size

    def __repr__(self):
        return f"QuadratureRule(name={self.name!r}, k={self.k})"


def gauss_rule(k):
    """k-point Gauss-Legendre rule on [0, 1], exact through degree 2k - 1.

    Roots of the degree-k Legendre polynomial are found by Newton's method
    started from Chebyshev-type guesses; only the upper half is computed and
    mirrored, so the rule is symmetric to the last bit.
    """
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= MAX_NODES:
        raise ValueError(f"number of nodes must be an integer in [1, {MAX_NODES}], got {k!r}")
    k = int(k)
    half = (k + 1) // 2
    i = np.arange(1, half + 1)
    # Tricomi's approximation to the roots in (-1, 1), largest first
    t = (1.0 - (k - 1) / (8.0 * k**3)) * np.cos(np.pi * (4 * i - 1) / (4 * k + 2))
    for _ in range(NEWTON_MAXITER):
        L, dL = _legendre_and_derivative(t, k)
        dt = L / dL
        t = t - dt
        if np.max(np.abs(dt)) <= 1e-16:
            break
    else:
        raise QuadratureError(f"Newton iteration for k={k} did not converge")
    _, dL = _legendre_and_derivative(t, k)
    w = 1.0 / ((1.0 - t) * (1.0 + t) * dL * dL)  # 2/(...) on [-1, 1], halved for [0, 1]

    upper = 0.5 * (1.0 + t)
    if k % 2:
        # the middle root is exactly the midpoint
        upper[-1] = 0.5
    nodes = np.concatenate([1.0 - upper[: k // 2], upper[::-1]])
    weights = np.concatenate([w[: k // 2], w[::-1]])
    weights /= math.fsum(weights)
    return QuadratureRule(nodes, weights, name="gauss-legendre")


def _legendre_and_derivative(t, k):
    p0 = np.ones_like(t)
    p1 = t.copy()
    if k == 0:
        return p0, np.zeros_like(t)
    for j in range(1, k):
        p0, p1 = p1, ((2 * j + 1) * t * p1 - j * p0) / (j + 1)
    dp = k * (t * p1 - p0) / (t * t - 1.0)
    return p1, dp


def integrate(rule, g):
    """Apply the rule to ``g``: ``sum_i w_i g(c_i)``.

    ``g`` is called once per node; array-valued ``g`` is summed along the
    first axis.
    """
    vals = np.array([g(c) for c in rule.nodes], dtype=float)
    return np.tensordot(rule.weights, vals, axes=1)[()] if vals.ndim > 1 else float(rule.weights @ vals)
