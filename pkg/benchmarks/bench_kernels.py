"""Compare the compiled kernels with the pure-Python reference.

Run:  python3 benchmarks/bench_kernels.py
"""

import time

from badlab.exactnum import den, num
from badlab.kernels import _pykernels

try:
    from badlab.kernels import _cykernels
except ImportError:
    _cykernels = None

from badlab.presets import preset_value


def timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def bench_badness():
    g = preset_value("golden")
    nums = [int(num(g))]
    D = int(den(g))
    X = 10**5
    pure, tp = timed(_pykernels.badness_scan, nums, D, X, 1, 1.0, 0.0)
    print(f"badness scan X={X} (denominator 2^200)")
    print(f"  pure      {tp * 1000:8.1f} ms  ({len(pure[0])} candidates)")
    if _cykernels is not None:
        comp, tc = timed(_cykernels.badness_scan_pow2, nums, D, X, 1, 1.0, 0.0)
        assert comp == pure
        print(f"  compiled  {tc * 1000:8.1f} ms  (x{tp / tc:.1f})")


def bench_box():
    bounds = [(-40, 40), (-40, 40), (-12, 12)]
    rows_c = [(3, -2, 7), (-5, 1, 2), (1, 1, 1), (-1, -4, 2)]
    rows_r = [120, 80, 60, 90]
    pure, tp = timed(_pykernels.box_scan, rows_c, rows_r, bounds)
    nodes = 81 * 81 * 25
    print(f"box scan, {nodes} nodes, 4 rows")
    print(f"  pure      {tp * 1000:8.1f} ms  ({len(pure)} points)")
    if _cykernels is not None:
        comp, tc = timed(
            _cykernels.box_scan_i64, list(rows_c), list(rows_r), list(bounds)
        )
        assert comp == pure
        print(f"  compiled  {tc * 1000:8.1f} ms  (x{tp / tc:.1f})")


if __name__ == "__main__":
    if _cykernels is None:
        print("compiled kernels not built; showing pure timings only")
    bench_badness()
    bench_box()
