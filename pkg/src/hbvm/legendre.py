"""Orthonormal shifted Legendre basis on [0, 1] and the spectral matrices.

The basis satisfies ``int_0^1 P_i P_j = delta_ij`` with ``P_j(1) > 0``.  The
primitives ``I_j(c) = int_0^c P_j`` obey the three-term relation

    I_0(c) = c,    I_j(c) = xi_{j+1} P_{j+1}(c) - xi_j P_{j-1}(c),

so that ``I_s(c)^T = P_{s+1}(c)^T X_hat`` with the banded matrices built by
:func:`build_spectral`.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import _core

DEFAULT_MAX_DEGREE = 64


class DegreeOverflowError(ValueError):
    """Requested a basis degree above the basis' ``max_degree``."""


class UnsupportedTruncationError(ValueError):
    """Second-order (Nystrom) coefficients need at least two basis terms."""


def xi(i):
    """Band coefficient ``1 / (2 sqrt(|4 i^2 - 1|))``."""
    if i < 0:
        raise ValueError(f"xi index must be nonnegative, got {i}")
    return 1.0 / (2.0 * math.sqrt(abs(4 * i * i - 1)))


@dataclass(frozen=True)
class LegendreBasis:
    """Evaluator for ``P_j`` and ``int_0^c P_j`` with ``j <= max_degree``."""

    max_degree: int = DEFAULT_MAX_DEGREE

    def __post_init__(self):
        if self.max_degree < 0:
            raise ValueError("max_degree must be nonnegative")

    def _check(self, top):
        if top > self.max_degree:
            raise DegreeOverflowError(
                f"degree {top} exceeds max_degree={self.max_degree}"
            )

    def P(self, j, c):
        self._check(j)
        return float(_core.backend().legendre_values([c], j)[0, j])

    def I(self, j, c):
        self._check(j + 1)
        return float(_core.backend().legendre_primitives([c], j)[0, j])

    def values(self, c, n):
        """Table of ``P_0..P_{n-1}`` at the points ``c``, shape ``(len(c), n)``."""
        if n <= 0:
            return np.zeros((np.size(c), 0))
        self._check(n - 1)
        return _core.backend().legendre_values(np.atleast_1d(c), n - 1)

    def primitives(self, c, n):
        """Table of ``I_0..I_{n-1}`` at the points ``c``, shape ``(len(c), n)``."""
        if n <= 0:
            return np.zeros((np.size(c), 0))
        self._check(n)
        return _core.backend().legendre_primitives(np.atleast_1d(c), n - 1)


_BASIS = LegendreBasis()


def eval_P(j, c, basis=_BASIS):
    return basis.P(j, c)


def eval_I(j, c, basis=_BASIS):
    return basis.I(j, c)


@dataclass(frozen=True, eq=False)
class SpectralMatrices:
    """Banded integration matrices for an ``s``-term truncation.

    ``X`` is ``s x s``, ``X_hat`` stacks ``X`` over ``(0, ..., 0, xi_s)`` and
    ``X_hat_X`` is the product ``X_hat @ X``.
    """

    s: int
    X: np.ndarray
    X_hat: np.ndarray
    X_hat_X: np.ndarray


def build_spectral(s):
    if s < 1:
        raise ValueError(f"s must be positive, got {s}")
    X = np.zeros((s, s))
    X[0, 0] = xi(0)
    for j in range(1, s):
        X[j, j - 1] = xi(j)
        X[j - 1, j] = -xi(j)
    X_hat = np.zeros((s + 1, s))
    X_hat[:s] = X
    X_hat[s, s - 1] = xi(s)
    for a in (X, X_hat):
        a.setflags(write=False)
    X_hat_X = X_hat @ X
    X_hat_X.setflags(write=False)
    return SpectralMatrices(s, X, X_hat, X_hat_X)


def a_s(c, tau, s, basis=_BASIS):
    """Continuous-stage RK coefficient ``sum_{j<s} I_j(c) P_j(tau)``."""
    if s < 1:
        raise ValueError(f"s must be positive, got {s}")
    Ic = basis.primitives([c], s)[0]
    Pt = basis.values([tau], s)[0]
    return float(Ic @ Pt)


def a_s_banded(c, tau, s, basis=_BASIS):
    """Same coefficient written as ``c + sum_{j=1}^{s-1} [xi_{j+1} P_{j+1}(c) - xi_j P_{j-1}(c)] P_j(tau)``."""
    if s < 1:
        raise ValueError(f"s must be positive, got {s}")
    Pc = basis.values([c], s + 1)[0]
    Pt = basis.values([tau], s)[0]
    total = c
    for j in range(1, s):
        total += (xi(j + 1) * Pc[j + 1] - xi(j) * Pc[j - 1]) * Pt[j]
    return total


def _need_two(s):
    if s < 2:
        raise UnsupportedTruncationError(
            f"second-order coefficients require s >= 2 (got s={s}); with a single "
            "basis term the quadrature weight 1 - c degenerates to 1"
        )


def abar_s(c, tau, s, basis=_BASIS):
    """Nystrom coefficient ``I_s(c)^T X_s P_s(tau)``."""
    _need_two(s)
    X = build_spectral(s).X
    return float(basis.primitives([c], s)[0] @ X @ basis.values([tau], s)[0])


def abar_s_hat(c, tau, s, basis=_BASIS):
    """Nystrom coefficient via ``P_{s+1}(c)^T (X_hat X) P_s(tau)``."""
    _need_two(s)
    XX = build_spectral(s).X_hat_X
    return float(basis.values([c], s + 1)[0] @ XX @ basis.values([tau], s)[0])


def abar_s_banded(c, tau, s, basis=_BASIS):
    """Nystrom coefficient expanded along the bands of ``X_hat X``."""
    _need_two(s)
    Pc = basis.values([c], s + 1)[0]
    Pt = basis.values([tau], s)[0]
    x = [xi(i) for i in range(s + 1)]
    total = 1.0 / 6.0 + 0.5 * x[1] * (Pc[1] - Pt[1])
    for j in range(1, s - 1):
        total -= (x[j] ** 2 + x[j + 1] ** 2) * Pc[j] * Pt[j]
        total += x[j] * x[j + 1] * (Pc[j - 1] * Pt[j + 1] + Pt[j - 1] * Pc[j + 1])
    total -= x[s - 1] ** 2 * Pc[s - 1] * Pt[s - 1]
    # last row of X_hat X is (0, ..., 0, xi_{s-1} xi_s, 0)
    total += x[s - 1] * x[s] * Pc[s] * Pt[s - 2]
    return total
