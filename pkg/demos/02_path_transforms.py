"""Path lifts and windowing used by the feature pipeline.

Raw signatures forget some structure: a path that retraces itself looks
like a point, and a scalar series has no area at all.  The fixes are
lifts — adding a time coordinate, or pairing a series with delayed
copies of itself — plus dyadic windowing for multi-scale descriptors.
"""

import numpy as np

from pathsig import (
    add_time,
    chen_concat,
    dyadic_windows,
    fill_missing,
    lead_lag,
    levy_area,
    path_signature,
    uniform_sample,
)


def main():
    # a perfect out-and-back path is invisible to the plain signature
    out_and_back = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 0.0]])
    plain = path_signature(out_and_back, 2)
    lifted = path_signature(add_time(out_and_back), 2)
    print("out-and-back path, max |coefficient|:")
    print("  without time:", float(np.abs(plain.data).max()))
    print("  with time:   ", float(np.abs(lifted.data).max()))

    # lead-lag: a scalar series becomes a 2-D path whose signed area
    # measures sequential dependence
    rng = np.random.default_rng(1)
    trend = np.cumsum(rng.uniform(0.0, 1.0, 30))
    print("\nlead-lag lift of a rising series:")
    print("  first rows:", lead_lag(trend[:4], 2).round(3).tolist())
    print("  Levy area:", round(levy_area(path_signature(lead_lag(trend, 2), 2)), 4))

    # dyadic windows: one global interval, then halves, then quarters,
    # all sharing boundary points so their signatures chain together
    print("\ndyadic windows of 9 points, depth 3:")
    for w in dyadic_windows(9, 3):
        print(f"  depth {w.level}: points {w.start}..{w.end}")
    path = rng.standard_normal((9, 2))
    whole = path_signature(path, 2)
    quarters = [w for w in dyadic_windows(9, 3) if w.level == 2]
    folded = path_signature(path[quarters[0].start: quarters[0].end + 1], 2)
    for w in quarters[1:]:
        folded = chen_concat(folded, path_signature(path[w.start: w.end + 1], 2))
    print("  chen-folded quarters vs whole: max diff =",
          float(np.abs(folded.data - whole.data).max()))

    # frame sampling and gap filling round out the preprocessing
    print("\nuniform_sample(19 frames, take 10):", uniform_sample(19, 10).tolist())
    series = np.array([[0.0], [1.0], [0.0], [3.0], [4.0]])
    valid = np.array([True, True, False, True, True])
    print("gap at index 2 filled by spline:",
          fill_missing(series, valid)[:, 0].round(6).tolist())


if __name__ == "__main__":
    main()
