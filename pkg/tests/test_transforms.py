"""Path lifts and per-frame preprocessing: time, lead-lag, windows, filling."""

import math

import numpy as np
import pytest

from pathsig import (
    InputError,
    add_time,
    chen_concat,
    dyadic_windows,
    fill_missing,
    lead_lag,
    path_signature,
    uniform_sample,
)


# ------------------------------------------------------------------ add_time


def test_add_time_three_points():
    out = add_time([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    assert out.shape == (3, 3)
    assert out[:, 2].tolist() == [0.0, 0.5, 1.0]
    assert out[:, :2].tolist() == [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]


def test_add_time_single_point():
    out = add_time([[7.0]])
    assert out.tolist() == [[7.0, 0.0]]


def test_add_time_five_points():
    out = add_time(np.zeros((5, 2)))
    assert out[:, 2].tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_add_time_strictly_increasing():
    for length in (2, 3, 10, 57):
        t = add_time(np.zeros((length, 1)))[:, 1]
        assert np.all(np.diff(t) > 0)


# ------------------------------------------------------------------ lead_lag


def test_lead_lag_examples():
    assert lead_lag([1.0, 2.0, 3.0], 2).tolist() == [[1, 0], [2, 1], [3, 2]]
    assert lead_lag([1.0, 2.0, 3.0], 1).tolist() == [[1], [2], [3]]
    assert lead_lag([5.0], 3).tolist() == [[5, 0, 0]]


def test_lead_lag_delay_structure():
    series = np.arange(6, dtype=float) + 1
    out = lead_lag(series, 4)
    assert out.shape == (6, 4)
    for j in range(4):
        assert out[j:, j].tolist() == series[: 6 - j].tolist()
        assert not out[:j, j].any()


def test_lead_lag_identity_matches_closed_form():
    # signing the 1-column lift must give Delta^k / k!
    rng = np.random.default_rng(3)
    series = rng.standard_normal(8)
    sig = path_signature(lead_lag(series, 1), 4)
    delta = series[-1] - series[0]
    expect = [delta ** k / math.factorial(k) for k in range(1, 5)]
    assert np.allclose(sig.data, expect, rtol=1e-12, atol=1e-12)


def test_lead_lag_validates():
    with pytest.raises(InputError):
        lead_lag([1.0, 2.0], 0)
    with pytest.raises(InputError):
        lead_lag([[1.0, 2.0], [3.0, 4.0]], 2)


# ------------------------------------------------------------ dyadic windows


def test_dyadic_windows_depth2():
    wins = dyadic_windows(9, 2)
    assert [(w.start, w.end, w.level) for w in wins] == [
        (0, 8, 0), (0, 4, 1), (4, 8, 1)]


def test_dyadic_windows_depth3():
    wins = dyadic_windows(9, 3)
    assert len(wins) == 7
    level2 = [(w.start, w.end) for w in wins if w.level == 2]
    assert level2 == [(0, 2), (2, 4), (4, 6), (6, 8)]


def test_dyadic_windows_round_half_up():
    # split of 5 at depth 1 lands on round(2.5) = 3, not banker's 2
    wins = dyadic_windows(6, 2)
    assert [(w.start, w.end) for w in wins] == [(0, 5), (0, 3), (3, 5)]


def test_dyadic_windows_share_boundaries():
    for length, depth in ((9, 3), (17, 3), (100, 3), (5, 2)):
        wins = dyadic_windows(length, depth)
        for level in range(depth):
            row = [w for w in wins if w.level == level]
            assert row[0].start == 0 and row[-1].end == length - 1
            for left, right in zip(row, row[1:]):
                assert left.end == right.start


def test_dyadic_windows_degenerate_errors():
    with pytest.raises(InputError):
        dyadic_windows(4, 3)  # L-1 = 3 < 2**2
    with pytest.raises(InputError):
        dyadic_windows(1, 1)


def test_dyadic_chen_fold_reproduces_whole():
    rng = np.random.default_rng(5)
    for _ in range(10):
        length = int(rng.integers(9, 30))
        path = rng.standard_normal((length, 3))
        whole = path_signature(path, 3)
        for level in range(3):
            row = [w for w in dyadic_windows(length, 3) if w.level == level]
            folded = path_signature(path[row[0].start: row[0].end + 1], 3)
            for w in row[1:]:
                folded = chen_concat(folded, path_signature(path[w.start: w.end + 1], 3))
            scale = np.maximum(np.abs(whole.data), 1.0)
            assert np.all(np.abs(folded.data - whole.data) <= 1e-10 * scale)


# ------------------------------------------------------------ uniform_sample


def test_uniform_sample_examples():
    assert uniform_sample(19, 10).tolist() == [0, 2, 4, 6, 8, 10, 12, 14, 16, 18]
    assert uniform_sample(10, 10).tolist() == list(range(10))
    assert uniform_sample(5, 10).tolist() == [0, 0, 1, 1, 2, 2, 3, 3, 4, 4]


def test_uniform_sample_degenerate():
    assert uniform_sample(7, 1).tolist() == [0]
    assert uniform_sample(1, 4).tolist() == [0, 0, 0, 0]


def test_uniform_sample_monotone_and_spanning():
    rng = np.random.default_rng(6)
    for _ in range(50):
        frames = int(rng.integers(2, 200))
        count = int(rng.integers(2, 40))
        idx = uniform_sample(frames, count)
        assert idx[0] == 0 and idx[-1] == frames - 1
        assert np.all(np.diff(idx) >= 0)
        assert idx.max() < frames


def test_uniform_sample_validates():
    with pytest.raises(InputError):
        uniform_sample(0, 3)
    with pytest.raises(InputError):
        uniform_sample(3, 0)


# -------------------------------------------------------------- fill_missing


def test_fill_fully_valid_unchanged():
    values = np.arange(12, dtype=float).reshape(6, 2)
    out = fill_missing(values, np.ones(6, dtype=bool))
    assert np.array_equal(out, values)


def test_fill_linear_gap_is_linear():
    # a natural cubic spline through collinear points is that line
    values = np.array([[0.0], [1.0], [0.0], [3.0], [4.0]])
    valid = np.array([True, True, False, True, True])
    out = fill_missing(values, valid)
    assert out[2, 0] == pytest.approx(2.0, abs=1e-10)


def test_fill_all_missing_is_zero():
    out = fill_missing(np.full((4, 3), 9.0), np.zeros(4, dtype=bool))
    assert not out.any()


def test_fill_edges_hold_nearest():
    values = np.array([[9.0], [9.0], [1.0], [2.0], [9.0]])
    valid = np.array([False, False, True, True, False])
    out = fill_missing(values, valid)
    assert out[:, 0].tolist() == [1.0, 1.0, 1.0, 2.0, 2.0]


def test_fill_single_valid_frame_is_constant():
    values = np.array([[0.0, 0.0], [3.0, -1.0], [0.0, 0.0]])
    valid = np.array([False, True, False])
    out = fill_missing(values, valid)
    assert np.array_equal(out, np.tile([3.0, -1.0], (3, 1)))


def test_fill_idempotent():
    rng = np.random.default_rng(8)
    values = rng.standard_normal((20, 3))
    valid = rng.random(20) < 0.6
    valid[[0, -1]] = True
    once = fill_missing(values, valid)
    twice = fill_missing(once, np.ones(20, dtype=bool))
    assert np.array_equal(once, twice)
