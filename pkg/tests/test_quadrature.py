import math

import numpy as np
import pytest

from hbvm.legendre import eval_P
from hbvm.quadrature import QuadratureRule, gauss_rule, integrate


def test_one_point_rule():
    r = gauss_rule(1)
    np.testing.assert_array_equal(r.nodes, [0.5])
    np.testing.assert_array_equal(r.weights, [1.0])


def test_two_point_rule_roots_of_quadratic():
    # 6x^2 - 6x + 1 = 0
    roots = sorted(((6 - math.sqrt(12)) / 12, (6 + math.sqrt(12)) / 12))
    r = gauss_rule(2)
    np.testing.assert_allclose(r.nodes, roots, atol=1e-16)
    np.testing.assert_allclose(r.nodes, [0.21132486540518713, 0.7886751345948129], atol=1e-16)
    np.testing.assert_array_equal(r.weights, [0.5, 0.5])
    assert integrate(r, lambda x: x**3) == pytest.approx(0.25, abs=1e-15)


@pytest.mark.parametrize("k", range(1, 21))
def test_rule_invariants(k):
    r = gauss_rule(k)
    assert r.k == k
    assert np.all(np.diff(r.nodes) > 0) and 0 < r.nodes[0] and r.nodes[-1] < 1
    assert np.all(r.weights > 0)
    assert abs(r.weights.sum() - 1.0) <= 1e-14
    assert np.max(np.abs(r.nodes + r.nodes[::-1] - 1.0)) <= 1e-14
    assert np.max(np.abs(r.weights - r.weights[::-1])) <= 1e-14
    for d in range(2 * k):
        exact = 1.0 / (d + 1)
        assert abs(r.weights @ r.nodes**d - exact) <= 1e-13 * exact


@pytest.mark.parametrize("k", [3, 10, 25, 40, 64])
def test_nodes_match_numpy_leggauss(k):
    x, _ = np.polynomial.legendre.leggauss(k)
    np.testing.assert_allclose(gauss_rule(k).nodes, (x + 1) / 2, atol=1e-14)


@pytest.mark.parametrize("k", [5, 17, 64])
def test_weights_match_high_precision(k):
    mpmath = pytest.importorskip("mpmath")
    with mpmath.workdps(40):
        ref = []
        for c in gauss_rule(k).nodes:
            t = mpmath.findroot(lambda z: mpmath.legendre(k, z), 2 * mpmath.mpf(c) - 1)
            d = mpmath.diff(lambda z: mpmath.legendre(k, z), t)
            ref.append(float(1 / ((1 - t * t) * d * d)))
    np.testing.assert_allclose(gauss_rule(k).weights, ref, rtol=5e-13)


@pytest.mark.parametrize("k", range(1, 20))
def test_interlacing(k):
    a, b = gauss_rule(k).nodes, gauss_rule(k + 1).nodes
    assert np.all(b[:-1] < a) and np.all(a < b[1:])


@pytest.mark.parametrize("k", [0, 65, -1, 2.5])
def test_out_of_range(k):
    with pytest.raises(ValueError):
        gauss_rule(k)


def test_integrate_examples():
    assert integrate(gauss_rule(1), lambda x: 1.0) == 1.0
    assert integrate(gauss_rule(5), lambda x: eval_P(3, x) ** 2) == pytest.approx(1.0, abs=1e-13)
    assert integrate(gauss_rule(3), lambda x: x**5) == pytest.approx(1 / 6, abs=1e-13)


def test_integrate_vector_valued():
    v = integrate(gauss_rule(3), lambda x: np.array([1.0, x, x * x]))
    np.testing.assert_allclose(v, [1.0, 0.5, 1 / 3], atol=1e-15)


def test_custom_rule():
    trap = QuadratureRule([0.0, 1.0], [0.5, 0.5], name="trapezoid")
    assert trap.k == 2
    assert integrate(trap, lambda x: x) == 0.5
    assert not trap.nodes.flags.writeable
    with pytest.raises(ValueError):
        QuadratureRule([0.0, 1.0], [1.0])
