import numpy as np
import pytest

from hbvm import _core
from hbvm._core import _pycore
from hbvm.integrator import step_data

needs_ext = pytest.mark.skipif("cython" not in _core.BACKENDS, reason="compiled core not built")


@needs_ext
def test_compiled_core_is_default():
    assert _core.backend_name() == "cython"


def test_unknown_backend():
    with pytest.raises(ValueError, match="unknown or unavailable"):
        _core.set_backend("fortran")


@needs_ext
@pytest.mark.parametrize("n", [0, 1, 5, 30, 64])
def test_legendre_tables_agree(n):
    x = np.linspace(0, 1, 37)
    ext = _core.BACKENDS["cython"]
    np.testing.assert_allclose(ext.legendre_values(x, n), _pycore.legendre_values(x, n), rtol=0, atol=1e-13)
    np.testing.assert_allclose(ext.legendre_primitives(x, n), _pycore.legendre_primitives(x, n), rtol=0, atol=1e-13)


@needs_ext
@pytest.mark.parametrize("k,s", [(1, 1), (3, 2), (6, 3)])
def test_fixed_point_agree(k, s):
    d = step_data(k, s)
    y = np.array([0.3, -1.2])

    def F(Y):
        return np.stack([Y[:, 1], -np.sin(Y[:, 0])], axis=1)

    out = {}
    for name, mod in _core.BACKENDS.items():
        g = np.zeros((s, 2))
        status, iters, res, FY = mod.fixed_point(F, np.tile(y, (k, 1)), d.I, 0.1, d.PW, g, 1e-14, 100, 0)
        assert status == mod.CONVERGED
        out[name] = (g, iters, FY)
    np.testing.assert_allclose(out["cython"][0], out["python"][0], atol=1e-15)
    assert out["cython"][1] == out["python"][1]


def test_fixed_point_reports_divergence(backend):
    mod = _core.backend()
    d = step_data(2, 2)
    g = np.zeros((2, 1))
    status, *_ = mod.fixed_point(lambda Y: Y * np.inf, np.ones((2, 1)), d.I, 0.1, d.PW, g, 1e-14, 10, 0)
    assert status == mod.DIVERGED


def test_fixed_point_reports_stall(backend):
    mod = _core.backend()
    d = step_data(1, 1)
    g = np.zeros((1, 1))
    # y' = 30 y with h = 1: contraction factor 15 > 1
    status, iters, *_ = mod.fixed_point(lambda Y: 30.0 * Y, np.ones((1, 1)), d.I, 1.0, d.PW, g, 1e-14, 100, 10)
    assert status == mod.STALLED
    assert iters <= 12


def test_benchmark_script_runs(capsys):
    import runpy
    from pathlib import Path

    path = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    mod = runpy.run_path(str(path))
    mod["main"](["--repeat", "1", "--number", "1"])
    out = capsys.readouterr().out
    assert "pendulum HBVM(6,3)" in out and "disagree" not in out
