"""Discrete HBVM(k, s) tableaux for first-order (RK) and special
second-order (RKN) problems, plus the low-rank symplectic variant.

With ``k`` quadrature nodes ``c`` and weights ``b`` and ``Omega = diag(b)``:

* RK:       ``A     = I_s P_s^T Omega``
* RKN:      ``A_bar = I_s X_s P_s^T Omega`` and ``b_bar = b * (1 - c)``
* low-rank: ``A     = P_s X_s P_s^T Omega``

where ``I_s`` and ``P_s`` are the ``k x s`` tables of primitives and basis
values at the nodes.
"""

from dataclasses import dataclass
import csv
import io
import json

import numpy as np

from .legendre import LegendreBasis, UnsupportedTruncationError, build_spectral
from .quadrature import gauss_rule

FAMILY_RK = "hbvm-rk"
FAMILY_RKN = "hbvm-rkn"
FAMILY_LOWRANK = "lowrank-symplectic"
FAMILY_COLLOCATION = "gauss-collocation"

_BASIS = LegendreBasis()


class TableauError(ValueError):
    """Invalid (k, s) combination or malformed serialized tableau."""


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TableauMatrices:
    """Node tables of one rule: ``Omega``, ``I_s`` (k x s) and ``P_r`` (k x r)."""

    Omega: np.ndarray
    I_s_mat: np.ndarray
    P_r_mat: np.ndarray

    @property
    def P_s_mat(self):
        return self.P_r_mat[:, : self.I_s_mat.shape[1]]


def tableau_matrices(rule, s, r=None, basis=_BASIS):
    r = s if r is None else r
    return TableauMatrices(
        Omega=_frozen(np.diag(rule.weights)),
        I_s_mat=_frozen(basis.primitives(rule.nodes, s)),
        P_r_mat=_frozen(basis.values(rule.nodes, r)),
    )


@dataclass(frozen=True, eq=False)
class ButcherTableauRK:
    family: str
    k: int
    s: int
    c: np.ndarray
    b: np.ndarray
    A: np.ndarray

    def __eq__(self, other):
        return (
            type(other) is type(self)
            and (self.family, self.k, self.s) == (other.family, other.k, other.s)
            and all(np.array_equal(getattr(self, f), getattr(other, f)) for f in ("c", "b", "A"))
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ButcherTableauRKN:
    family: str
    k: int
    s: int
    c: np.ndarray
    b: np.ndarray
    b_bar: np.ndarray
    A_bar: np.ndarray

    def __eq__(self, other):
        return (
            type(other) is type(self)
            and (self.family, self.k, self.s) == (other.family, other.k, other.s)
            and all(
                np.array_equal(getattr(self, f), getattr(other, f))
                for f in ("c", "b", "b_bar", "A_bar")
            )
        )

    __hash__ = None


def check_ks(k, s):
    if s < 1:
        raise TableauError(f"s must be >= 1, got s={s}")
    if k < s:
        raise TableauError(f"k >= s required, got k={k}, s={s}")


def _rule(k, rule):
    if rule is None:
        return gauss_rule(k)
    if rule.k != k:
        raise TableauError(f"rule has {rule.k} nodes but k={k}")
    return rule


def build_rk(k, s, rule=None):
    check_ks(k, s)
    rule = _rule(k, rule)
    tm = tableau_matrices(rule, s)
    A = tm.I_s_mat @ tm.P_s_mat.T @ tm.Omega
    return ButcherTableauRK(FAMILY_RK, k, s, _frozen(rule.nodes), _frozen(rule.weights), _frozen(A))


def build_rkn(k, s, rule=None):
    if s < 2:
        raise UnsupportedTruncationError(
            f"the Nystrom tableau requires s >= 2 (got s={s}): with one basis term "
            "the position weights reduce to b instead of b*(1-c)"
        )
    check_ks(k, s)
    rule = _rule(k, rule)
    tm = tableau_matrices(rule, s)
    X = build_spectral(s).X
    A_bar = tm.I_s_mat @ X @ tm.P_s_mat.T @ tm.Omega
    c, b = rule.nodes, rule.weights
    return ButcherTableauRKN(
        FAMILY_RKN, k, s, _frozen(c), _frozen(b), _frozen(b * (1.0 - c)), _frozen(A_bar)
    )


def build_lowrank_symplectic(k, s, rule=None):
    """Low-rank symplectic variant ``P_s X_s P_s^T Omega``.

    Row sums are not ``c`` for this family; it is meant for export and
    inspection, not as a default integrator.
    """
    check_ks(k, s)
    rule = _rule(k, rule)
    tm = tableau_matrices(rule, s)
    A = tm.P_s_mat @ build_spectral(s).X @ tm.P_s_mat.T @ tm.Omega
    return ButcherTableauRK(
        FAMILY_LOWRANK, k, s, _frozen(rule.nodes), _frozen(rule.weights), _frozen(A)
    )


def gauss_collocation(s):
    """Classical s-stage Gauss collocation tableau from Lagrange cardinals.

    ``A[i, j] = int_0^{c_i} l_j``, ``b[j] = int_0^1 l_j``.  Independent of the
    Legendre factorization used by :func:`build_rk`.
    """
    if not 1 <= s <= 10:
        raise TableauError(f"collocation oracle supports 1 <= s <= 10, got {s}")
    c = gauss_rule(s).nodes
    A = np.empty((s, s))
    b = np.empty(s)
    for j in range(s):
        others = np.delete(c, j)
        lj = np.polynomial.Polynomial.fromroots(others) if s > 1 else np.polynomial.Polynomial([1.0])
        lj = lj / np.prod(c[j] - others)
        Lj = lj.integ()
        A[:, j] = Lj(c) - Lj(0.0)
        b[j] = Lj(1.0) - Lj(0.0)
    return ButcherTableauRK(FAMILY_COLLOCATION, s, s, _frozen(c), _frozen(b), _frozen(A))


# -- serialization -----------------------------------------------------------

def to_dict(t):
    d = {"family": t.family, "k": t.k, "s": t.s, "c": t.c.tolist(), "b": t.b.tolist()}
    if isinstance(t, ButcherTableauRKN):
        d["b_bar"] = t.b_bar.tolist()
        d["A_bar"] = t.A_bar.tolist()
    else:
        d["A"] = t.A.tolist()
    return d


def from_dict(d):
    try:
        family, k, s = d["family"], int(d["k"]), int(d["s"])
        c, b = _frozen(d["c"]), _frozen(d["b"])
        if "A_bar" in d:
            t = ButcherTableauRKN(family, k, s, c, b, _frozen(d["b_bar"]), _frozen(d["A_bar"]))
            mats = (t.A_bar,)
            vecs = (t.c, t.b, t.b_bar)
        else:
            t = ButcherTableauRK(family, k, s, c, b, _frozen(d["A"]))
            mats = (t.A,)
            vecs = (t.c, t.b)
    except (KeyError, TypeError, ValueError) as exc:
        raise TableauError(f"malformed tableau: {exc}") from exc
    if any(v.shape != (k,) for v in vecs) or any(a.shape != (k, k) for a in mats):
        raise TableauError("tableau arrays do not match k")
    return t


def export_tableau(t, fmt="json"):
    """Serialize a tableau.

    ``json`` returns bytes.  ``csv`` returns a ``{filename: bytes}`` mapping:
    one ``i,j,value`` file for the matrix, one ``i,value`` file per vector and
    a ``meta.csv`` with family, k and s.  Floats use the shortest round-trip
    representation, so import is bit exact.
    """
    if fmt == "json":
        return (json.dumps(to_dict(t)) + "\n").encode()
    if fmt == "csv":
        d = to_dict(t)
        files = {}
        files["meta.csv"] = _csv([("key", "value"), ("family", d["family"]), ("k", d["k"]), ("s", d["s"])])
        for name in ("c", "b", "b_bar"):
            if name in d:
                files[f"{name}.csv"] = _csv([("i", "value")] + [(i, repr(v)) for i, v in enumerate(d[name])])
        for name in ("A", "A_bar"):
            if name in d:
                rows = [("i", "j", "value")]
                rows += [(i, j, repr(v)) for i, row in enumerate(d[name]) for j, v in enumerate(row)]
                files[f"{name}.csv"] = _csv(rows)
        return files
    raise TableauError(f"unknown format {fmt!r}; expected 'json' or 'csv'")


def import_tableau(data, fmt="json"):
    if fmt == "json":
        if isinstance(data, (bytes, bytearray)):
            data = data.decode()
        return from_dict(json.loads(data))
    if fmt == "csv":
        try:
            meta = dict(_read(data["meta.csv"])[1:])
            k = int(meta["k"])
            d = {"family": meta["family"], "k": k, "s": int(meta["s"])}
            for name in ("c", "b", "b_bar"):
                if f"{name}.csv" in data:
                    d[name] = [float(v) for _, v in _read(data[f"{name}.csv"])[1:]]
            for name in ("A", "A_bar"):
                if f"{name}.csv" in data:
                    M = [[0.0] * k for _ in range(k)]
                    for i, j, v in _read(data[f"{name}.csv"])[1:]:
                        M[int(i)][int(j)] = float(v)
                    d[name] = M
        except (KeyError, ValueError, IndexError) as exc:
            raise TableauError(f"malformed csv tableau: {exc}") from exc
        return from_dict(d)
    raise TableauError(f"unknown format {fmt!r}; expected 'json' or 'csv'")


def _csv(rows):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue().encode()


def _read(raw):
    if isinstance(raw, (bytes, bytearray)):
        raw = raw.decode()
    return list(csv.reader(io.StringIO(raw)))
