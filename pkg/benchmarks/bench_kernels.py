"""Compare the compiled typical-sequence kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from densecode import _pykernels
from densecode._backend import COMPILED

CASES = [
    # base, n, letter_of_digit, q, delta
    (2, 16, [0, 1], [0.7, 0.3], 1.0),
    (3, 12, [0, 1, 1], [0.5, 0.5], 1.5),
    (4, 10, [0, 1, 2, 3], [0.4, 0.3, 0.2, 0.1], 2.0),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = {"numpy": _pykernels}
    if COMPILED:
        from densecode import _kernels
        impls["compiled"] = _kernels
    else:
        print("compiled extension not available; timing the fallback only")
    print(f"{'strings':>10} {'impl':>9} {'best ms':>9} {'speedup':>8}")
    for base, n, letters, q, delta in CASES:
        letters, q = np.asarray(letters, dtype=np.int64), np.asarray(q)
        masks, times = {}, {}
        for name, mod in impls.items():
            fn = lambda mod=mod: mod.typical_mask(base, n, letters, q, delta)
            masks[name] = np.asarray(fn(), dtype=bool)
            times[name] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
        if len(masks) > 1 and not np.array_equal(masks["numpy"], masks["compiled"]):
            raise SystemExit(f"mismatch at base={base}, n={n}")
        for name, t in times.items():
            print(f"{base**n:>10} {name:>9} {1e3 * t:>9.2f} {times['numpy'] / t:>7.1f}x")


if __name__ == "__main__":
    main()
