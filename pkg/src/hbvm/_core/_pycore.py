"""Pure-Python/numpy versions of the numerical kernels.

Used when the compiled extension is unavailable, and as the reference
against which the compiled kernels are checked.
"""

import math

import numpy as np

CONVERGED = 0
MAX_ITER = 1
STALLED = 2
DIVERGED = 3

DIVERGENCE_BOUND = 1e300


def legendre_values(x, n):
    """Orthonormal shifted Legendre values P_0..P_n at the points ``x``.

    Returns an array of shape ``(len(x), n + 1)``.
    """
    t = 2.0 * np.asarray(x, dtype=float).ravel() - 1.0
    L = _classical(t, n)
    return L * np.sqrt(2.0 * np.arange(n + 1) + 1.0)


def legendre_primitives(x, n):
    """Primitives int_0^x P_j for j = 0..n, shape ``(len(x), n + 1)``.

    Uses (L_{j+1} - L_{j-1}) / (2 sqrt(2j+1)) on the classical family, which
    vanishes exactly at x = 0 and x = 1.
    """
    x = np.asarray(x, dtype=float).ravel()
    t = 2.0 * x - 1.0
    L = _classical(t, n + 1)
    out = np.empty((x.size, n + 1))
    out[:, 0] = x
    for j in range(1, n + 1):
        out[:, j] = (L[:, j + 1] - L[:, j - 1]) / (2.0 * math.sqrt(2.0 * j + 1.0))
    return out


def _classical(t, n):
    L = np.empty((t.size, n + 1))
    L[:, 0] = 1.0
    if n >= 1:
        L[:, 1] = t
    for j in range(1, n):
        L[:, j + 1] = ((2 * j + 1) * t * L[:, j] - j * L[:, j - 1]) / (j + 1)
    return L


def fixed_point(func, base, M, scale, PW, gamma, tol, max_iter, stall_limit):
    """Fixed-point sweeps on the Legendre coefficients of one step.

    Iterates ``gamma <- PW @ func(base + scale * M @ gamma)`` in place.

    Returns ``(status, iters, residual, F)`` where ``F`` holds ``func`` at the
    stages of the returned ``gamma`` and ``residual`` is the max-norm of
    ``PW @ F - gamma``.  Converged means both the last increment and the
    residual are below ``tol * max(1, |gamma|_max)``.  ``stall_limit <= 0``
    disables stall detection.
    """
    prev_inc = 0.0
    prev_res = math.inf
    stalls = 0
    res = math.inf
    F = None
    for it in range(1, max_iter + 1):
        Y = base + scale * (M @ gamma)
        if not _finite(Y):
            return DIVERGED, it, res, F
        F = np.asarray(func(Y), dtype=float)
        if not _finite(F):
            return DIVERGED, it, res, F
        new = PW @ F
        res = float(np.max(np.abs(new - gamma))) if new.size else 0.0
        thresh = tol * max(1.0, float(np.max(np.abs(new))) if new.size else 0.0)
        if res <= thresh and prev_inc <= thresh:
            return CONVERGED, it, res, F
        if res >= prev_res:
            stalls += 1
            if 0 < stall_limit <= stalls:
                return STALLED, it, res, F
        prev_res = res
        gamma[...] = new
        prev_inc = res
    return MAX_ITER, max_iter, res, F


def _finite(a):
    return bool(np.all(np.isfinite(a))) and not bool(np.any(np.abs(a) > DIVERGENCE_BOUND))
