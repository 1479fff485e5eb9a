"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--quick]

Prints one line per (kernel, problem size, backend) with the best wall time
and the speed-up of the compiled backend, and checks the two backends give
bit-identical results on the same inputs.
"""

import argparse
import time

import numpy as np

from restart_grade import _pure
from restart_grade.grade import RestartProblem, _PaddedBox
from restart_grade.kernels import compiled_available, get_backend


def best_time(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def psor_case(d, L, g):
    p = RestartProblem(d, (L // 2,) + (0,) * (d - 1), L=L)
    grid = _PaddedBox(d, L)

    def run(kern):
        v = np.zeros(int(np.prod(grid.shape)))
        v[~grid.in_box] = g
        v[grid.origin] = 0.0
        sweeps, res = kern.restart_psor(v, grid.red, grid.black, grid.offsets, g,
                                        p.relaxation(), p.max_sweeps, p.vi_tol, 10)
        return v, sweeps

    return run


def walk_case(d, r, n):
    B = r + 1
    ax = np.arange(-B, B + 1)
    pts = np.stack(np.meshgrid(*([ax] * d), indexing="ij"), axis=-1).reshape(-1, d)
    mask = (np.sqrt((pts**2).sum(axis=1)) > r).astype(np.uint8)
    x0 = np.array((r,) + (0,) * (d - 1), dtype=np.int64)

    def run(kern):
        return kern.simulate_walks(x0, mask, B, True, 12345, 0, n, 10**8, 1)

    return run


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller problems")
    args = ap.parse_args(argv)
    if not compiled_available():
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")
    comp = get_backend("compiled")

    scale = 0.5 if args.quick else 1.0
    cases = [
        ("psor", f"d=2 L={int(64 * scale)}", psor_case(2, int(64 * scale), 2000.0)),
        ("psor", f"d=3 L={int(20 * scale)}", psor_case(3, int(20 * scale), 6000.0)),
        ("walks", f"d=2 |x0|=6 n={int(2000 * scale)}", walk_case(2, 6, int(2000 * scale))),
        ("walks", f"d=3 |x0|=4 n={int(500 * scale)}", walk_case(3, 4, int(500 * scale))),
    ]
    print(f"{'kernel':<7}{'case':<24}{'python s':>12}{'compiled s':>12}{'speed-up':>10}  identical")
    for name, label, run in cases:
        tp, outp = best_time(lambda: run(_pure), 1)
        tc, outc = best_time(lambda: run(comp), args.repeat)
        same = all(np.array_equal(a, b) for a, b in zip(outp, outc))
        print(f"{name:<7}{label:<24}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.1f}  {same}")


if __name__ == "__main__":
    main()
