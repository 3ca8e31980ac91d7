"""Built-in separable Hamiltonian test problems, ``H = |p|^2 / 2 + U(q)``.

Forces are written on the last axis so they accept a single position
``(m,)`` or a stack of stage positions ``(k, m)``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .integrator import SecondOrderIVP, as_first_order


@dataclass(frozen=True, eq=False)
class HamiltonianProblem:
    name: str
    m: int
    potential: object
    force: object
    q0: np.ndarray
    p0: np.ndarray
    exact: object = None
    force_jacobian: object = None

    def H(self, q, p):
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        return 0.5 * np.sum(p * p, axis=-1) + self.potential(q)

    @property
    def H0(self):
        return float(self.H(self.q0, self.p0))

    def second_order(self):
        return SecondOrderIVP(
            self.force, self.q0.copy(), self.p0.copy(),
            vectorized=True, jac=self.force_jacobian, thread_safe=True,
        )

    def first_order(self):
        return as_first_order(self.second_order())


def _arr(*v):
    a = np.array(v, dtype=float)
    a.setflags(write=False)
    return a


def make_harmonic():
    def exact(t):
        return np.array([math.cos(t)]), np.array([-math.sin(t)])

    return HamiltonianProblem(
        "harmonic", 1,
        potential=lambda q: 0.5 * np.sum(q * q, axis=-1),
        force=lambda q: -q,
        q0=_arr(1.0), p0=_arr(0.0), exact=exact,
        force_jacobian=lambda q: -np.eye(1),
    )


def make_free():
    """Free particle (zero force); degenerate case for the order study."""
    def exact(t):
        return np.array([1.0 + 0.5 * t]), np.array([0.5])

    return HamiltonianProblem(
        "free", 1,
        potential=lambda q: np.zeros(np.shape(q)[:-1]),
        force=lambda q: np.zeros_like(q),
        q0=_arr(1.0), p0=_arr(0.5), exact=exact,
        force_jacobian=lambda q: np.zeros((1, 1)),
    )


def make_pendulum():
    return HamiltonianProblem(
        "pendulum", 1,
        potential=lambda q: -np.cos(q[..., 0]),
        force=lambda q: -np.sin(q),
        q0=_arr(1.0), p0=_arr(0.0),
        force_jacobian=lambda q: np.array([[-math.cos(q[0])]]),
    )


def make_kepler(e):
    if not 0.0 <= e < 1.0:
        raise ValueError(f"eccentricity must lie in [0, 1), got {e}")

    def potential(q):
        return -1.0 / np.sqrt(np.sum(q * q, axis=-1))

    def force(q):
        r2 = np.sum(q * q, axis=-1, keepdims=True)
        return -q / (r2 * np.sqrt(r2))

    def jac(q):
        r = math.sqrt(float(q @ q))
        return (3.0 * np.outer(q, q) / r**2 - np.eye(2)) / r**3

    return HamiltonianProblem(
        f"kepler:{e:g}", 2, potential, force,
        q0=_arr(1.0 - e, 0.0), p0=_arr(0.0, math.sqrt((1.0 + e) / (1.0 - e))),
        force_jacobian=jac,
    )


def make_poly_oscillator(degree):
    if not isinstance(degree, (int, np.integer)) or degree % 2 or not 2 <= degree <= 10:
        raise ValueError(f"degree must be an even integer in [2, 10], got {degree!r}")
    d = int(degree)
    return HamiltonianProblem(
        f"polyosc:{d}", 1,
        potential=lambda q: np.sum(q**d, axis=-1) / d,
        force=lambda q: -(q ** (d - 1)),
        q0=_arr(1.0), p0=_arr(0.0),
        force_jacobian=lambda q: np.array([[-(d - 1) * q[0] ** (d - 2)]]),
    )


def make_henon_heiles():
    def potential(q):
        x, y = q[..., 0], q[..., 1]
        return 0.5 * (x * x + y * y) + x * x * y - y**3 / 3.0

    def force(q):
        x, y = q[..., 0], q[..., 1]
        return np.stack([-x - 2.0 * x * y, -y - x * x + y * y], axis=-1)

    def jac(q):
        x, y = q
        return np.array([[-1.0 - 2.0 * y, -2.0 * x], [-2.0 * x, -1.0 + 2.0 * y]])

    return HamiltonianProblem(
        "henonheiles", 2, potential, force,
        q0=_arr(0.0, 0.45), p0=_arr(0.42, 0.0), force_jacobian=jac,
    )


def get_problem(spec):
    """Problem from a CLI name: harmonic | pendulum | kepler:e | polyosc:d | henonheiles | free."""
    name, _, arg = spec.partition(":")
    try:
        if name == "harmonic" and not arg:
            return make_harmonic()
        if name == "pendulum" and not arg:
            return make_pendulum()
        if name == "henonheiles" and not arg:
            return make_henon_heiles()
        if name == "free" and not arg:
            return make_free()
        if name == "kepler":
            return make_kepler(float(arg) if arg else 0.0)
        if name == "polyosc":
            return make_poly_oscillator(int(arg) if arg else 4)
    except ValueError as exc:
        raise ValueError(f"bad problem {spec!r}: {exc}") from None
    raise ValueError(
        f"unknown problem {spec!r}; expected harmonic, pendulum, kepler:e, polyosc:d, henonheiles or free"
    )


def energy_series(prob, traj):
    """Rows ``(time, H, H - H0)`` along a trajectory of ``(q, p)`` states."""
    states = np.asarray(traj.states)
    if states.ndim != 2 or states.shape[1] != 2 * prob.m:
        raise ValueError(
            f"trajectory states have shape {states.shape}, expected (n, {2 * prob.m})"
        )
    H = prob.H(states[:, : prob.m], states[:, prob.m :])
    return [(float(t), float(e), float(e - H[0])) for t, e in zip(traj.times, H)]
