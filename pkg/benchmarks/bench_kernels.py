#!/usr/bin/env python3
"""Compare the numba and numpy versions of the hot kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--sizes 1000,10000,100000]

Each kernel is called once untimed (JIT warmup), then timed over ``repeat``
calls; results of the two paths are checked for agreement before timing.
A second section times one IDCA run end to end with each path selected via
DCFAIR_NUMBA in a subprocess.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from dcfair import _kernels as K


def _time(fn, args, repeat):
    fn(*args)  # warmup / JIT
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def _cases(n, rng):
    a = np.sort(rng.standard_normal(n))[::-1].copy()
    b = np.sort(rng.standard_normal(n) + 0.3)[::-1].copy()
    h = rng.standard_normal(n)
    thetas = np.linspace(-1.0, 1.0, 10)
    m = max(2, min(n // 10, 2000))  # pairwise work is quadratic
    hp, hn = rng.standard_normal(m), rng.standard_normal(m)
    sel = np.zeros(m, dtype=np.bool_)
    sel[: m // 4] = True
    return {
        "ks_desc": ((a, b), K.ks_desc_numba, K.ks_desc_numpy),
        "hinge_sums": ((h, thetas), K.hinge_sums_numba, K.hinge_sums_numpy),
        "pairwise": ((hp, hn, K.LOSS_LOGISTIC, sel), K.pairwise_numba, K.pairwise_numpy),
    }


def _agree(x, y):
    xs = x if isinstance(x, tuple) else (x,)
    ys = y if isinstance(y, tuple) else (y,)
    return all(np.allclose(u, v, rtol=1e-10, atol=1e-12) for u, v in zip(xs, ys))


_END_TO_END = """
import time, numpy as np
from dcfair import Dataset, Interval, build_problem, idca, IDCASchedule
rng = np.random.default_rng(0)
n = 5000
g = rng.integers(1, 3, n)
x = rng.standard_normal((n, 4)); x[:, 0] += (g == 2)
y = np.where(x[:, 0] + 0.5 * x[:, 1] > 0.5, 1.0, -1.0)
p = build_problem(Dataset(x, y, g), "pdp", interval=Interval(0.0, 0.6), kappa=0.05)
idca(p, IDCASchedule(K=1, epsilon=1e-3, T=10), report_tol=1e-3)
t0 = time.perf_counter()
idca(p, IDCASchedule(K=20, epsilon=1e-3, T=100), report_tol=1e-3)
print(time.perf_counter() - t0)
"""


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=50)
    ap.add_argument("--sizes", default="1000,10000,100000")
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<12} {'n':>8} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8}")
    for n in (int(s) for s in args.sizes.split(",")):
        for name, (fargs, f_nb, f_np) in _cases(n, rng).items():
            if not _agree(f_nb(*fargs), f_np(*fargs)):
                sys.exit(f"{name}: numba and numpy results differ at n={n}")
            t_nb = _time(f_nb, fargs, args.repeat)
            t_np = _time(f_np, fargs, args.repeat)
            print(f"{name:<12} {n:>8} {t_nb * 1e3:>10.4f} {t_np * 1e3:>10.4f} {t_np / t_nb:>8.2f}")

    print("\nend to end: IDCA K=20, T=100 on 5000 rows, pdp constraints")
    for flag in ("1", "0"):
        env = dict(os.environ, DCFAIR_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", _END_TO_END], env=env, check=True,
                             capture_output=True, text=True).stdout.strip()
        print(f"  DCFAIR_NUMBA={flag}: {float(out):.3f} s")


if __name__ == "__main__":
    main()
