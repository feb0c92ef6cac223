"""Slice incidence series into fitting, seeding and evaluation windows."""
import numpy as np
import pandas as pd
from hetr.tools.exceptions import InsufficientDateRangeError
from hetr.tools.shaping import IncidenceSeries


def window_id_maker(
    window_size: int,
    n_windows: int,
    start_index: int = 0,
    stride_size: int = None,
):
    """Create positional indices for consecutive window slices.

    Args:
        window_size (int): length of each window
        n_windows (int): number of windows to create
        start_index (int): position of the first window's first day
        stride_size (int): offset between window starts, defaults to window_size (no overlap)

    Returns:
        np.array of shape (n_windows, window_size)
    """
    if stride_size is None:
        stride_size = window_size
    return (
        start_index
        + np.expand_dims(np.arange(window_size), 0)
        + np.expand_dims(np.arange(n_windows) * stride_size, 0).T
    )


def _start_position(s: IncidenceSeries, start):
    if start is None:
        return 0
    start = pd.Timestamp(start)
    if len(s) == 0 or start < s.start_date:
        raise InsufficientDateRangeError(
            f"series starts {None if len(s) == 0 else s.start_date.date()}, after {start.date()}"
        )
    return int((start - s.start_date).days)


def split_windows(
    s: IncidenceSeries,
    start=None,
    window_len: int = 30,
    n_windows: int = 7,
):
    """Cut n_windows non-overlapping consecutive windows of window_len days.

    Args:
        s (IncidenceSeries): full (smoothed) series
        start (str or date): first day of the first window, defaults to the first day of s
        window_len (int): days per window
        n_windows (int): number of windows

    Returns:
        list of IncidenceSeries, region and population preserved
    """
    if int(window_len) < 1 or int(n_windows) < 1:
        raise ValueError("window_len and n_windows must be >= 1")
    first = _start_position(s, start)
    idx = window_id_maker(int(window_len), int(n_windows), start_index=first)
    if idx.max() >= len(s):
        raise InsufficientDateRangeError(
            f"{n_windows} windows of {window_len} days from position {first} "
            f"need {idx.max() + 1} days, series has {len(s)}"
        )
    return [s.iloc(int(row[0]), int(row[-1]) + 1) for row in idx]


def seed_window(window: IncidenceSeries, n_seed: int = 7):
    """The last n_seed days of a window, used to start a projection."""
    if int(n_seed) < 1:
        raise ValueError("n_seed must be >= 1")
    return window.tail(int(n_seed))


def following_window(s: IncidenceSeries, window: IncidenceSeries, horizon: int = 30):
    """The horizon days of s immediately after window, or None if s ends too soon."""
    offset = int((window.dates[-1] - s.start_date).days) + 1
    if offset < 0 or offset + horizon > len(s):
        return None
    return s.iloc(offset, offset + horizon)
