"""Compare the compiled and pure-Python kernel backends.

Run ``python benchmarks/bench_kernels.py``.  Each case is timed with
``timeit`` (best of several repeats) under every available backend, and the
results of the two backends are checked to agree before timing.
"""

import argparse
import timeit

import numpy as np

import hbvm
from hbvm import SolverConfig, _core, integrate
from hbvm.problems import get_problem


def _cases():
    x = np.linspace(0.0, 1.0, 2001)

    def legendre():
        return _core.backend().legendre_values(x, 32)

    def primitives():
        return _core.backend().legendre_primitives(x, 32)

    def run(name, k, s, family, h, n):
        prob = get_problem(name)
        cfg = SolverConfig(h=h, n_steps=n)
        return lambda: integrate(prob.second_order(), k, s, cfg, family=family).states[-1]

    return {
        "legendre_values 2001 x 33": legendre,
        "legendre_primitives 2001 x 33": primitives,
        "pendulum HBVM(6,3) rk 200 steps": run("pendulum", 6, 3, "rk", 0.05, 200),
        "kepler:0.6 HBVM(4,2) rkn 200 steps": run("kepler:0.6", 4, 2, "rkn", 0.05, 200),
        "henonheiles HBVM(8,4) rk 100 steps": run("henonheiles", 8, 4, "rk", 0.1, 100),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=3)
    args = ap.parse_args(argv)

    names = sorted(_core.BACKENDS)
    previous = _core.backend_name()
    print(f"backends: {', '.join(names)}")
    print(f"{'case':<38}" + "".join(f"{n + ' [ms]':>14}" for n in names) + f"{'speedup':>10}")
    try:
        for label, fn in _cases().items():
            times, outputs = {}, {}
            for n in names:
                hbvm.set_backend(n)
                outputs[n] = fn()
                best = min(timeit.repeat(fn, repeat=args.repeat, number=args.number))
                times[n] = 1e3 * best / args.number
            if len(names) > 1:
                a, b = (outputs[n] for n in names)
                if not np.allclose(a, b, rtol=0, atol=1e-12):
                    raise SystemExit(f"backends disagree on {label}")
            speed = times["python"] / times["cython"] if "cython" in times else float("nan")
            print(f"{label:<38}" + "".join(f"{times[n]:>14.3f}" for n in names) + f"{speed:>10.2f}")
    finally:
        hbvm.set_backend(previous)


if __name__ == "__main__":
    main()
