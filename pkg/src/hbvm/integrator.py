"""Implicit HBVM(k, s) time stepping.

One step solves for the ``s`` Legendre coefficients ``gamma_j`` of the step's
polynomial (not for the ``k`` stage values), so extra quadrature nodes only
add function evaluations:

    gamma_j = sum_l b_l P_j(c_l) f(y + h sum_r I_r(c_l) gamma_r),   j < s.

For special second-order problems ``q'' = f(q)`` the stage positions are
``q + c h p + h^2 (I_s X_s gamma)(c)`` and the update uses ``b * (1 - c)``.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import logging

import numpy as np

from . import _core
from .legendre import LegendreBasis, UnsupportedTruncationError, build_spectral
from .quadrature import gauss_rule
from .tableau import check_ks, tableau_matrices

log = logging.getLogger(__name__)

SCHEMES = ("fixed-point", "newton-hybrid")
STALL_SWEEPS = 10

_BASIS = LegendreBasis()


class StepFailure(RuntimeError):
    """Nonlinear iteration did not converge within ``max_iter``."""

    def __init__(self, msg, residual=np.nan, step=None, trajectory=None):
        super().__init__(msg)
        self.residual = residual
        self.step = step
        self.trajectory = trajectory


class DivergenceError(StepFailure):
    """A stage or derivative became non-finite or exceeded 1e300."""


@dataclass(frozen=True)
class FirstOrderIVP:
    """``y' = f(y)``.

    ``f`` maps an ``(m,)`` state to an ``(m,)`` derivative.  With
    ``vectorized=True`` it must also accept a ``(k, m)`` stack of states and
    act row-wise, which avoids a Python loop per stage.  ``jac`` (optional)
    returns the ``m x m`` Jacobian.  ``thread_safe`` declares that ``f`` may
    be called from several trajectories concurrently.
    """

    f: object
    y0: np.ndarray
    vectorized: bool = False
    jac: object = None
    thread_safe: bool = False

    @property
    def m(self):
        return np.size(self.y0)


@dataclass(frozen=True)
class SecondOrderIVP:
    """``q'' = f(q)`` with ``q(0) = q0``, ``q'(0) = p0``."""

    f: object
    q0: np.ndarray
    p0: np.ndarray
    vectorized: bool = False
    jac: object = None
    thread_safe: bool = False

    @property
    def m(self):
        return np.size(self.q0)


@dataclass(frozen=True)
class SolverConfig:
    """Constant step size ``h``; ``tol`` bounds the max-norm increment and
    residual of the Legendre coefficients relative to ``max(1, |gamma|)``."""

    h: float
    n_steps: int = 1
    tol: float = 1e-14
    max_iter: int = 100
    scheme: str = "fixed-point"

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"step size must be positive, got h={self.h}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.n_steps < 0:
            raise ValueError(f"n_steps must be nonnegative, got {self.n_steps}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")


@dataclass(frozen=True, eq=False)
class StagePolynomial:
    """Legendre coefficients of one step, for dense output.

    First order: ``sigma(ch) = y_ref + h sum_j I_j(c) gamma_j``.
    Second order (``p_ref`` set): ``sigma(ch) = y_ref + c h p_ref
    + h^2 sum_j (I_s(c)^T X_s)_j gamma_j``.
    """

    s: int
    gamma: np.ndarray
    y_ref: np.ndarray
    h: float
    p_ref: np.ndarray = None
    iters: int = 0
    residual: float = 0.0

    def __call__(self, c):
        return dense_output(self, c)


def dense_output(poly, c):
    Ic = _BASIS.primitives([c], poly.s)[0]
    if poly.p_ref is None:
        return poly.y_ref + poly.h * (Ic @ poly.gamma)
    X = build_spectral(poly.s).X
    return poly.y_ref + (c * poly.h) * poly.p_ref + poly.h**2 * (Ic @ X @ poly.gamma)


@dataclass(frozen=True, eq=False)
class _StepData:
    k: int
    s: int
    c: np.ndarray
    b: np.ndarray
    b_bar: np.ndarray
    I: np.ndarray       # k x s primitives at the nodes
    IX: np.ndarray      # k x s, I @ X
    PW: np.ndarray      # s x k, P_s^T Omega
    A: np.ndarray       # k x k, RK matrix (stage-value iteration)


@lru_cache(maxsize=None)
def step_data(k, s):
    check_ks(k, s)
    rule = gauss_rule(k)
    tm = tableau_matrices(rule, s)
    X = build_spectral(s).X
    PW = tm.P_s_mat.T * rule.weights
    return _StepData(
        k, s, rule.nodes, rule.weights, rule.weights * (1.0 - rule.nodes),
        tm.I_s_mat, tm.I_s_mat @ X, PW, tm.I_s_mat @ PW,
    )


def _stage_func(f, vectorized):
    if vectorized:
        return f
    return lambda Y: np.array([np.asarray(f(y), dtype=float).ravel() for y in Y])


def _fd_jacobian(f, x):
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(f(x), dtype=float)
    J = np.empty((f0.size, x.size))
    for i in range(x.size):
        d = 1e-7 * max(1.0, abs(x[i]))
        xp = x.copy()
        xp[i] += d
        J[:, i] = (np.asarray(f(xp), dtype=float) - f0) / d
    return J


def _solve(F, base, M, scale, PW, s, m, cfg, jac_at):
    """Solve for gamma; returns ``(gamma, F_at_stages, iters, residual)``."""
    kern = _core.backend()
    gamma = np.zeros((s, m))
    stall = STALL_SWEEPS if cfg.scheme == "newton-hybrid" else 0
    status, iters, res, FY = kern.fixed_point(
        F, base, M, scale, PW, gamma, cfg.tol, cfg.max_iter, stall
    )
    if status == kern.STALLED:
        # the stalled iterate may have grown without bound; restart from sigma = y0
        gamma[...] = 0.0
        gamma, FY, more, res, status = _newton(F, base, M, scale, PW, gamma, cfg, jac_at, kern)
        iters += more
    if status == kern.DIVERGED:
        raise DivergenceError("non-finite or unbounded stage values", residual=res)
    if status != kern.CONVERGED:
        raise StepFailure(f"no convergence in {cfg.max_iter} iterations (residual {res:.3e})", residual=res)
    return gamma, FY, iters, res


def _newton(F, base, M, scale, PW, gamma, cfg, jac_at, kern):
    """Simplified Newton on G(gamma) = gamma - PW F(base + scale M gamma).

    The Jacobian of ``f`` is frozen at the step's initial state.
    """
    s, m = gamma.shape
    J = np.atleast_2d(jac_at())
    G_jac = np.eye(s * m) - scale * np.kron(PW @ M, J)
    G_inv = np.linalg.inv(G_jac)
    res = np.inf
    prev_inc = np.inf
    FY = None
    for it in range(1, cfg.max_iter + 1):
        Y = base + scale * (M @ gamma)
        FY = np.asarray(F(Y), dtype=float)
        if not (np.all(np.isfinite(FY)) and np.all(np.isfinite(Y))):
            return gamma, FY, it, res, kern.DIVERGED
        G = gamma - PW @ FY
        res = float(np.max(np.abs(G)))
        thresh = cfg.tol * max(1.0, float(np.max(np.abs(gamma))))
        if res <= thresh and prev_inc <= thresh:
            return gamma, FY, it, res, kern.CONVERGED
        delta = -(G_inv @ G.ravel()).reshape(s, m)
        gamma = gamma + delta
        prev_inc = float(np.max(np.abs(delta)))
    return gamma, FY, cfg.max_iter, res, kern.MAX_ITER


def hbvm_step(ivp, k, s, y, cfg):
    """One HBVM(k, s) step from ``y``.

    Returns ``(y1, poly, iters)`` with ``y1 = y + h sum_l b_l f(sigma(c_l h))``;
    the final fixed-point residual is kept on ``poly.residual``.
    """
    y = np.asarray(y, dtype=float)
    dy, poly = _hbvm_increment(ivp, k, s, y, cfg)
    return y + dy, poly, poly.iters


def _hbvm_increment(ivp, k, s, y, cfg):
    d = step_data(k, s)
    m = y.size
    F = _stage_func(ivp.f, ivp.vectorized)
    base = np.broadcast_to(y, (d.k, m))
    jac = ivp.jac
    jac_at = (lambda: jac(y)) if jac is not None else (lambda: _fd_jacobian(ivp.f, y))
    gamma, FY, iters, residual = _solve(F, base, d.I, cfg.h, d.PW, s, m, cfg, jac_at)
    poly = StagePolynomial(s, gamma, y.copy(), cfg.h, iters=iters, residual=residual)
    return cfg.h * (d.b @ FY), poly


def hbvm_step_stages(ivp, k, s, y, cfg):
    """Same step iterating on the k stage values ``Y = y + h A f(Y)``.

    Slower when ``k > s``; kept as a cross-check of :func:`hbvm_step`.
    """
    y = np.asarray(y, dtype=float)
    d = step_data(k, s)
    F = _stage_func(ivp.f, ivp.vectorized)
    Y = np.tile(y, (d.k, 1))
    for it in range(1, cfg.max_iter + 1):
        FY = np.asarray(F(Y), dtype=float)
        Ynew = y + cfg.h * (d.A @ FY)
        inc = float(np.max(np.abs(Ynew - Y)))
        Y = Ynew
        if inc <= cfg.tol:
            FY = np.asarray(F(Y), dtype=float)
            return y + cfg.h * (d.b @ FY), it
    raise StepFailure(f"stage iteration did not converge in {cfg.max_iter} iterations")


def rkn_step(ivp2, k, s, q, p, cfg):
    """One Nystrom HBVM(k, s) step.  Returns ``(q1, p1, poly)``."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    dq, dp, poly = _rkn_increment(ivp2, k, s, q, p, cfg)
    return q + dq, p + dp, poly


def _rkn_increment(ivp2, k, s, q, p, cfg):
    if s < 2:
        raise UnsupportedTruncationError(
            f"the Nystrom step requires s >= 2 (got s={s}): with one basis term the "
            "position weights reduce to b instead of b*(1-c)"
        )
    d = step_data(k, s)
    h = cfg.h
    m = q.size
    F = _stage_func(ivp2.f, ivp2.vectorized)
    base = q + h * np.outer(d.c, p)
    jac = ivp2.jac
    jac_at = (lambda: jac(q)) if jac is not None else (lambda: _fd_jacobian(ivp2.f, q))
    gamma, FY, iters, residual = _solve(F, base, d.IX, h * h, d.PW, s, m, cfg, jac_at)
    dq = h * p + h * h * (d.b_bar @ FY)
    dp = h * (d.b @ FY)
    poly = StagePolynomial(s, gamma, q.copy(), h, p_ref=p.copy(), iters=iters, residual=residual)
    return dq, dp, poly


def as_first_order(ivp2):
    """Rewrite ``q'' = f(q)`` as ``(q, p)' = (p, f(q))`` on stacked states."""
    m = ivp2.m
    f = ivp2.f

    def rhs(y):
        y = np.asarray(y, dtype=float)
        q, p = y[..., :m], y[..., m:]
        return np.concatenate([p, np.asarray(f(q), dtype=float)], axis=-1)

    jac = None
    if ivp2.jac is not None:
        def jac(y):
            J = np.zeros((2 * m, 2 * m))
            J[:m, m:] = np.eye(m)
            J[m:, :m] = ivp2.jac(np.asarray(y)[:m])
            return J

    return FirstOrderIVP(
        rhs,
        np.concatenate([np.ravel(ivp2.q0), np.ravel(ivp2.p0)]).astype(float),
        vectorized=ivp2.vectorized,
        jac=jac,
        thread_safe=ivp2.thread_safe,
    )


@dataclass
class Trajectory:
    """States at ``times[i] = i h``.

    Runs of a second-order problem (either family) store ``(q, p)`` stacked
    and set ``m``; ``q`` and ``p`` are then views of the two halves.
    """

    times: np.ndarray
    states: np.ndarray
    iterations: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    m: int = None

    @property
    def q(self):
        return self.states[:, : self.m]

    @property
    def p(self):
        return self.states[:, self.m :]

    def __len__(self):
        return len(self.times)


def integrate(ivp, k, s, cfg, family=None):
    """Take ``cfg.n_steps`` constant steps.

    A :class:`SecondOrderIVP` is stepped with the Nystrom method unless
    ``family="rk"``, in which case it is first rewritten as a first-order
    system.  On failure the raised :class:`StepFailure` carries the step
    index and the partial trajectory.  State updates are accumulated with
    compensated summation.
    """
    second = isinstance(ivp, SecondOrderIVP)
    if family is None:
        family = "rkn" if second else "rk"
    if family not in ("rk", "rkn"):
        raise ValueError(f"unknown family {family!r}")
    if family == "rkn" and not second:
        raise ValueError("the Nystrom family needs a SecondOrderIVP")
    m = ivp.m if second else None
    if second and family == "rk":
        ivp = as_first_order(ivp)
        second = False
    if second and s < 2:
        rkn_step(ivp, k, s, ivp.q0, ivp.p0, cfg)  # raises the s >= 2 error
    check_ks(k, s)

    n = cfg.n_steps
    if second:
        x0 = np.concatenate([np.ravel(ivp.q0), np.ravel(ivp.p0)]).astype(float)
    else:
        x0 = np.ravel(ivp.y0).astype(float)
    states = np.empty((n + 1, x0.size))
    states[0] = x0
    traj = Trajectory(np.arange(n + 1) * cfg.h, states, [], [], m)
    x = x0
    comp = np.zeros_like(x0)
    for i in range(n):
        try:
            if second:
                dq, dp, poly = _rkn_increment(ivp, k, s, x[:m], x[m:], cfg)
                dx = np.concatenate([dq, dp])
            else:
                dx, poly = _hbvm_increment(ivp, k, s, x, cfg)
        except StepFailure as exc:
            exc.step = i
            exc.trajectory = Trajectory(traj.times[: i + 1], states[: i + 1].copy(),
                                        traj.iterations, traj.residuals, m)
            log.debug("step %d failed: %s", i, exc)
            raise
        # compensated summation keeps round-off from the updates at O(eps)
        dx = dx + comp
        new = x + dx
        comp = dx - (new - x)
        x = new
        states[i + 1] = x
        traj.iterations.append(poly.iters)
        traj.residuals.append(poly.residual)
    return traj
