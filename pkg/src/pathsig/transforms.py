"""Path-to-path preprocessing for the feature stack.

Time augmentation, lead-lag lifting, dyadic index windows, uniform frame
sampling, and gap interpolation.  All functions are pure; none mutates its
arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InputError
from .signature import as_path

__all__ = [
    "IndexWindow",
    "add_time",
    "lead_lag",
    "dyadic_windows",
    "uniform_sample",
    "fill_missing",
]


@dataclass(frozen=True)
class IndexWindow:
    """A closed index range [start, end] at dyadic depth ``level``.

    Adjacent windows at the same depth share exactly their boundary point,
    so signatures over the windows chain back into the whole-interval
    signature.
    """

    start: int
    end: int
    level: int


def _round_half_up(x: float) -> int:
    # round() is banker's rounding; the split rule wants 0.5 to round up
    return int(math.floor(x + 0.5))


def add_time(path) -> np.ndarray:
    """Append a normalized time coordinate as the last column.

    Sample i gets time i/(L-1), spanning [0, 1] (a single point gets 0).
    The augmented path is strictly monotone in its last coordinate for
    L >= 2, so no two distinct augmented paths share a signature.
    """
    pts = as_path(path)
    L = pts.shape[0]
    t = np.linspace(0.0, 1.0, L) if L > 1 else np.zeros(1)
    return np.column_stack([pts, t])


def lead_lag(series, delay_dim: int) -> np.ndarray:
    """Lift a scalar series to ``delay_dim`` delayed copies of itself.

    Output coordinate j at time t is series[t - j] when t >= j, else 0
    (delay by j steps with zero front-padding).  delay_dim=1 returns the
    series as a one-column path.
    """
    arr = np.asarray(series, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise InputError(f"lead_lag expects a scalar series, got shape {arr.shape}")
    if arr.size < 1:
        raise InputError("lead_lag needs at least one sample")
    if not np.all(np.isfinite(arr)):
        raise InputError("series contains non-finite values")
    delay_dim = int(delay_dim)
    if delay_dim < 1:
        raise InputError(f"delay dimension must be >= 1, got {delay_dim}")
    L = arr.size
    out = np.zeros((L, delay_dim))
    for j in range(delay_dim):
        out[j:, j] = arr[: L - j]
    return out


def dyadic_windows(length: int, depth: int) -> list[IndexWindow]:
    """Dyadic partition of point indices 0..length-1 into 2**depth - 1 windows.

    Level j in 0..depth-1 splits the index range at
    s_m = round_half_up(m * (length-1) / 2**j) for m in 0..2**j; window m
    spans s_m..s_{m+1} inclusive.  Every window keeps at least two points
    as long as length-1 >= 2**(depth-1).
    """
    length = int(length)
    depth = int(depth)
    if length < 2:
        raise InputError(f"window partition needs length >= 2, got {length}")
    if depth < 1:
        raise InputError(f"depth must be >= 1, got {depth}")
    if length - 1 < 2 ** (depth - 1):
        raise InputError(
            f"length {length} is too short for depth {depth}: "
            f"a window at the deepest level would degenerate to a point"
        )
    windows = []
    for j in range(depth):
        pieces = 2 ** j
        splits = [_round_half_up(m * (length - 1) / pieces) for m in range(pieces + 1)]
        for m in range(pieces):
            windows.append(IndexWindow(splits[m], splits[m + 1], j))
    return windows


def uniform_sample(frame_count: int, count: int) -> np.ndarray:
    """Indices of ``count`` frames spread uniformly over 0..frame_count-1.

    Index i maps to round_half_up(i * (F-1) / (count-1)); all zeros when
    count == 1 or F == 1.  Repetition occurs when F < count.
    """
    frame_count = int(frame_count)
    count = int(count)
    if frame_count < 1:
        raise InputError(f"frame count must be >= 1, got {frame_count}")
    if count < 1:
        raise InputError(f"sample count must be >= 1, got {count}")
    if count == 1 or frame_count == 1:
        return np.zeros(count, dtype=np.intp)
    return np.array(
        [_round_half_up(i * (frame_count - 1) / (count - 1)) for i in range(count)],
        dtype=np.intp,
    )


def fill_missing(values, valid) -> np.ndarray:
    """Complete a per-frame series given a validity mask.

    Interior gaps are filled per coordinate by a natural cubic spline
    through the valid frames; leading and trailing gaps hold the nearest
    valid value.  A series with a single valid frame is constant; one with
    no valid frame is all zeros.  Idempotent: a fully valid series is
    returned unchanged (as a copy).

    Args:
        values: (F,) or (F, k) array of per-frame values.
        valid: (F,) boolean mask, True where ``values`` is trustworthy.

    Returns:
        float array of the same shape with every frame filled in.
    """
    arr = np.asarray(values, dtype=np.float64)
    mask = np.asarray(valid, dtype=bool)
    if arr.ndim not in (1, 2):
        raise InputError(f"values must be 1-D or 2-D, got shape {arr.shape}")
    if mask.shape != (arr.shape[0],):
        raise InputError(
            f"validity mask shape {mask.shape} does not match {arr.shape[0]} frames"
        )
    out = arr.copy()
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        out[:] = 0.0
        return out
    if idx.size == arr.shape[0]:
        return out
    if idx.size == 1:
        out[:] = arr[idx[0]]
        return out
    positions = np.arange(arr.shape[0])
    spline = CubicSpline(idx, arr[idx], bc_type="natural", axis=0)
    interior = ~mask & (positions > idx[0]) & (positions < idx[-1])
    if np.any(interior):
        out[interior] = spline(positions[interior])
    out[positions < idx[0]] = arr[idx[0]]
    out[positions > idx[-1]] = arr[idx[-1]]
    return out
