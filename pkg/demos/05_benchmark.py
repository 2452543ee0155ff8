"""Timing the signature kernel as dimensions grow.

The coefficient count explodes geometrically with the truncation level:
a 60-dimensional path at level 4 already has 13,179,660 coefficients.
The kernel computes level blocks in place over one preallocated buffer,
so even that case runs in seconds on one CPU core.  The same harness is
available from the command line as `pathsig bench`.
"""

import time

import numpy as np

from pathsig import path_signature, signature_dimension


def timed(dim, level, points, seed=0):
    rng = np.random.default_rng(seed)
    path = rng.standard_normal((points, dim))
    start = time.perf_counter()
    path_signature(path, level)
    return time.perf_counter() - start


def main():
    print(f"{'dim':>4} {'level':>5} {'points':>6} {'coefficients':>13} {'time':>9}")
    for dim, level, points in [
        (3, 4, 100),
        (10, 4, 100),
        (30, 4, 100),
        (60, 2, 100),
        (60, 3, 100),
        (60, 4, 100),
    ]:
        count = signature_dimension(dim, level)
        elapsed = timed(dim, level, points)
        print(f"{dim:>4} {level:>5} {points:>6} {count:>13,} {elapsed:>8.3f}s")


if __name__ == "__main__":
    main()
