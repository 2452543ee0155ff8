"""Truncated signatures of piecewise-linear paths.

A path is an ordered sequence of points in R^d, stored as an (L, d) float
array.  Its signature is the graded collection of iterated integrals

    S(X)^{i_1 .. i_k} = integral over t_1 < .. < t_k of
                        dX^{i_1}(t_1) .. dX^{i_k}(t_k),

one coefficient per word (i_1, .., i_k) over the d coordinate channels.
Truncating at level n keeps the words of length 1..n, which for d >= 2 is
(d^{n+1} - d) / (d - 1) numbers (the constant level-0 term is always 1 and
is not stored).  Within level k the d^k coefficients are ordered
lexicographically by word, most significant letter first, so the level-k
block viewed as a (d, .., d) tensor has word (i_1, .., i_k) at position
[i_1, .., i_k].  Channel indices are 0-based throughout.

Two facts drive the implementation:

* Over a single straight segment with increment D = end - start the
  integrals collapse to S^{i_1 .. i_k} = D^{i_1} .. D^{i_k} / k!, i.e.
  level k is the k-fold tensor power of D divided by k!.

* Chen's identity: the signature of a concatenation is the tensor
  (convolution) product of the signatures,
  c_k = sum_{m=0..k} a_m (x) b_{k-m}, with a_0 = b_0 = 1.

``path_signature`` folds segments into an accumulator with a Horner
rearrangement of Chen's identity.  Appending a segment with increment D
updates level k to

    a_k + (a_{k-1} + (a_{k-2} + .. (a_1 + D/k (x) ..) (x) D/(k-1)) (x) D/1

which touches each level-j block once per appended segment instead of once
per (j, k) pair, and needs no scratch signature.  Levels are updated from
n down to 1 so the lower-level blocks read on the right-hand side are
still the pre-append values.

``signature_bruteforce`` is an intentionally independent check: it refines
the path onto a uniform grid and evaluates the iterated integrals as
nested left-point Riemann sums, sharing no code path with the closed-form
routines.  Its error decays like 1/subdivisions.

All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError

__all__ = [
    "TruncatedSignature",
    "as_path",
    "signature_dimension",
    "segment_signature",
    "chen_concat",
    "path_signature",
    "path_signature_batch",
    "signature_bruteforce",
    "levy_area",
]


def signature_dimension(d: int, n: int, include_zeroth: bool = False) -> int:
    """Number of signature coefficients for a d-dimensional path up to level n.

    Computed with exact integer arithmetic, so it is safe for values far
    beyond what could ever be materialized (d^k overflows no sooner than
    Python ints do, i.e. never).

    Args:
        d: path dimension, >= 1.
        n: truncation level, >= 0.
        include_zeroth: if True, count the constant level-0 coefficient too.

    Returns:
        sum of d**k for k in 1..n, plus 1 if include_zeroth.
    """
    d = _check_dim(d)
    n = int(n)
    if n < 0:
        raise InputError(f"truncation level must be >= 0, got {n}")
    if d == 1:
        total = n
    else:
        total = (d ** (n + 1) - d) // (d - 1)
    return total + 1 if include_zeroth else total


def as_path(points) -> np.ndarray:
    """Validate and convert ``points`` to an (L, d) float64 path array.

    Accepts any array-like; a 1-D sequence is treated as a path in R^1.
    Rejects empty arrays and non-finite entries.
    """
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InputError(f"path must be a 2-D (points, dim) array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InputError(f"path needs at least one point and one dimension, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("path contains non-finite values")
    return arr


class TruncatedSignature:
    """Signature coefficients of one path, truncated at level ``n``.

    Coefficients live in a single flat float64 buffer ``data`` with the
    level-k block at ``data[offset_k : offset_k + d**k]``; ``level(k)``
    returns that block as a writable view.  The implicit level-0
    coefficient is 1 and is not stored.
    """

    __slots__ = ("d", "n", "data", "_offsets")

    def __init__(self, d: int, n: int, data: np.ndarray):
        self.d = _check_dim(d)
        self.n = _check_level(n)
        offsets = [0]
        size = 1
        for _ in range(n):
            size *= d
            offsets.append(offsets[-1] + size)
        self._offsets = offsets
        data = np.ascontiguousarray(data, dtype=np.float64)
        if data.shape != (offsets[-1],):
            raise InputError(
                f"coefficient buffer for d={d}, n={n} must have shape ({offsets[-1]},), "
                f"got {data.shape}"
            )
        self.data = data

    @classmethod
    def zeros(cls, d: int, n: int) -> "TruncatedSignature":
        """The signature of a constant path: every stored coefficient 0."""
        return cls(d, n, np.zeros(signature_dimension(d, n)))

    def level(self, k: int) -> np.ndarray:
        """Writable view of the level-k coefficient block, length d**k."""
        if not 1 <= k <= self.n:
            raise InputError(f"level must be in 1..{self.n}, got {k}")
        return self.data[self._offsets[k - 1]:self._offsets[k]]

    def coefficient(self, word) -> float:
        """Coefficient of one word, given as a tuple of 0-based channel indices."""
        word = tuple(int(i) for i in word)
        k = len(word)
        if not 1 <= k <= self.n:
            raise InputError(f"word length must be in 1..{self.n}, got {k}")
        idx = 0
        for letter in word:
            if not 0 <= letter < self.d:
                raise InputError(f"channel index {letter} out of range for d={self.d}")
            idx = idx * self.d + letter
        return float(self.data[self._offsets[k - 1] + idx])

    def copy(self) -> "TruncatedSignature":
        return TruncatedSignature(self.d, self.n, self.data.copy())

    def __repr__(self) -> str:
        return f"TruncatedSignature(d={self.d}, n={self.n}, {self.data.size} coefficients)"


def segment_signature(start, end, level: int) -> TruncatedSignature:
    """Signature of the straight segment from ``start`` to ``end``.

    Level k is the k-fold tensor power of the increment divided by k!.
    """
    start = np.atleast_1d(np.asarray(start, dtype=np.float64))
    end = np.atleast_1d(np.asarray(end, dtype=np.float64))
    if start.ndim != 1 or start.shape != end.shape:
        raise InputError(
            f"segment endpoints must be 1-D and of equal length, got {start.shape} and {end.shape}"
        )
    if not (np.all(np.isfinite(start)) and np.all(np.isfinite(end))):
        raise InputError("segment endpoints contain non-finite values")
    level = _check_level(level)
    d = start.size
    if d < 1:
        raise InputError("segment endpoints need at least one dimension")
    delta = end - start
    sig = TruncatedSignature.zeros(d, level)
    sig.level(1)[:] = delta
    for k in range(2, level + 1):
        # level k = (level k-1 tensor delta) / k, flattened in C order
        np.multiply(
            sig.level(k - 1)[:, None], delta[None, :] / k, out=sig.level(k).reshape(-1, d)
        )
    return sig


def chen_concat(a: TruncatedSignature, b: TruncatedSignature) -> TruncatedSignature:
    """Signature of the concatenated path, by Chen's identity.

    c_k = a_k + b_k + sum_{m=1..k-1} a_m (x) b_{k-m}.  Requires matching
    dimension and truncation level.  Concatenating a zero-increment
    segment is the identity.
    """
    if a.d != b.d or a.n != b.n:
        raise InputError(
            f"signatures must match in dimension and level: "
            f"(d={a.d}, n={a.n}) vs (d={b.d}, n={b.n})"
        )
    out = TruncatedSignature.zeros(a.d, a.n)
    for k in range(1, a.n + 1):
        blk = out.level(k)
        np.add(a.level(k), b.level(k), out=blk)
        for m in range(1, k):
            blk += np.multiply(a.level(m)[:, None], b.level(k - m)[None, :]).ravel()
    return out


def path_signature(path, level: int) -> TruncatedSignature:
    """Signature of a piecewise-linear path through the given points.

    Folds one segment at a time into the accumulator (see module
    docstring).  A path with fewer than two points, or one whose segments
    all have zero increment, has the zero signature.

    Args:
        path: (L, d) array-like of points (a 1-D sequence is a path in R^1).
        level: truncation level, >= 1.

    Returns:
        TruncatedSignature with d = path dimension and n = level.
    """
    pts = as_path(path)
    level = _check_level(level)
    L, d = pts.shape
    sig = TruncatedSignature.zeros(d, level)
    if L < 2:
        return sig
    # Scratch for the Horner chain: q[j] holds a block of size d**(j+1).
    q = [np.empty(d ** (j + 1)) for j in range(level)]
    increments = np.diff(pts, axis=0)
    for s in range(L - 1):
        delta = increments[s]
        # delta / i for i = 1..level, computed once per segment
        dscaled = [None] + [delta / i for i in range(1, level + 1)]
        for k in range(level, 0, -1):
            q[0][:] = dscaled[k]
            for j in range(1, k):
                np.add(q[j - 1], sig.level(j), out=q[j - 1])
                np.multiply(
                    q[j - 1][:, None], dscaled[k - j][None, :], out=q[j].reshape(-1, d)
                )
            blk = sig.level(k)
            blk += q[k - 1]
    return sig


def path_signature_batch(paths, level: int) -> np.ndarray:
    """Signatures of a batch of equal-length paths.

    Same recurrence as ``path_signature``, vectorized over the batch axis.
    Intended for large batches of short, low-dimensional paths, where the
    per-call overhead of the scalar routine would dominate.

    Args:
        paths: (B, L, d) array of B paths.
        level: truncation level, >= 1.

    Returns:
        (B, m) array, row b holding the flat coefficient buffer of path b
        (same layout as ``TruncatedSignature.data``).
    """
    arr = np.asarray(paths, dtype=np.float64)
    if arr.ndim != 3:
        raise InputError(f"paths must be a 3-D (batch, points, dim) array, got shape {arr.shape}")
    B, L, d = arr.shape
    if B < 1 or L < 1 or d < 1:
        raise InputError(f"paths array has an empty axis: shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("paths contain non-finite values")
    level = _check_level(level)
    levels = [np.zeros((B, d ** k)) for k in range(1, level + 1)]
    if L >= 2:
        increments = np.diff(arr, axis=1)
        for s in range(L - 1):
            delta = increments[:, s, :]
            dscaled = [None] + [delta / i for i in range(1, level + 1)]
            for k in range(level, 0, -1):
                q = dscaled[k]
                for j in range(1, k):
                    q = q + levels[j - 1]
                    q = (q[:, :, None] * dscaled[k - j][:, None, :]).reshape(B, -1)
                levels[k - 1] += q
    return np.concatenate(levels, axis=1)


def signature_bruteforce(path, level: int, subdivisions: int = 10_000) -> TruncatedSignature:
    """Signature by direct Riemann summation on a refined grid.

    The path is linearly interpolated onto ``subdivisions`` equal steps of
    its parameter and each iterated integral is evaluated as a nested
    Riemann sum, weighting every step by the average of the running
    lower-level integral at the step's two endpoints:

        I_k(node j) = sum_{s < j} (I_{k-1}(node s) + I_{k-1}(node s+1)) / 2
                                  * dX(step s),

    with I_0 = 1 everywhere.  Second-order accurate in the step size;
    slow and simple on purpose, as an independent cross-check of the
    closed-form routines.
    """
    pts = as_path(path)
    level = _check_level(level)
    if subdivisions < 1:
        raise InputError(f"subdivisions must be >= 1, got {subdivisions}")
    L, d = pts.shape
    sig = TruncatedSignature.zeros(d, level)
    if L < 2:
        return sig
    t = np.linspace(0.0, L - 1.0, subdivisions + 1)
    base = np.arange(L, dtype=np.float64)
    refined = np.column_stack([np.interp(t, base, pts[:, i]) for i in range(d)])
    inc = np.diff(refined, axis=0)  # (m, d)
    m = inc.shape[0]
    # nodes[j] = value of the level-(k-1) integral at grid node j
    nodes = np.ones((m + 1, 1))
    for k in range(1, level + 1):
        mid = 0.5 * (nodes[:-1] + nodes[1:])
        contrib = (mid[:, :, None] * inc[:, None, :]).reshape(m, -1)
        running = np.cumsum(contrib, axis=0)
        sig.level(k)[:] = running[-1]
        nodes = np.vstack([np.zeros((1, running.shape[1])), running])
    return sig


def levy_area(sig: TruncatedSignature) -> float:
    """Antisymmetric part of level 2 for a planar path: S^(0,1) - S^(1,0).

    Twice the signed area enclosed between the path and the chord joining
    its endpoints.  Requires d == 2 and n >= 2.
    """
    if sig.d != 2:
        raise InputError(f"levy_area needs a 2-dimensional path signature, got d={sig.d}")
    if sig.n < 2:
        raise InputError(f"levy_area needs truncation level >= 2, got n={sig.n}")
    l2 = sig.level(2)
    return float(l2[1] - l2[2])


def _check_dim(d) -> int:
    d = int(d)
    if d < 1:
        raise InputError(f"path dimension must be >= 1, got {d}")
    return d


def _check_level(n) -> int:
    n = int(n)
    if n < 1:
        raise InputError(f"truncation level must be >= 1, got {n}")
    return n
