"""Dynamic time warping and the DTW imitation reward."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from . import kernels
from .demos import DemoSet
from .path import Path, PathLike, as_path, closest_point_index, extract_segment


@dataclass(frozen=True)
class DtwResult:
    """Accumulated matching cost and, optionally, the optimal alignment.

    ``alignment`` is a list of 0-based ``(i, j)`` index pairs running from
    ``(0, 0)`` to ``(P-1, Q-1)``.
    """

    cost: float
    alignment: Optional[List[Tuple[int, int]]] = None


def _backtrace(M: np.ndarray) -> List[Tuple[int, int]]:
    i, j = M.shape[0] - 1, M.shape[1] - 1
    pairs = [(i - 1, j - 1)]
    while (i, j) != (1, 1):
        # diagonal first on ties
        options = ((M[i - 1, j - 1], i - 1, j - 1), (M[i - 1, j], i - 1, j), (M[i, j - 1], i, j - 1))
        _, i, j = min(options, key=lambda o: o[0])
        pairs.append((i - 1, j - 1))
    pairs.reverse()
    return pairs


def dtw_cost(a: PathLike, b: PathLike, with_alignment: bool = False) -> DtwResult:
    """Minimum summed Euclidean matching cost between two paths.

    Without ``with_alignment`` only two DP rows are kept, sized by the shorter
    path; the recurrence is symmetric so swapping the operands is exact.
    """
    a = as_path(a).points
    b = as_path(b).points
    if with_alignment:
        M = kernels.dtw_table(a, b)
        return DtwResult(float(M[-1, -1]), _backtrace(M))
    if b.shape[0] > a.shape[0]:
        a, b = b, a
    return DtwResult(float(kernels.dtw_rolling(a, a.shape[0], b, b.shape[0])))


def dtw_cost_banded(a: PathLike, b: PathLike, band: float, with_alignment: bool = False) -> DtwResult:
    """DTW restricted to cells with ``|i*Q/P - j| <= band`` (1-based indices).

    The band is widened to ``Q/P - 1`` when narrower, otherwise cell (1, 1)
    would fall outside it and no alignment would exist.
    """
    if band < 1:
        raise ValueError("band must be >= 1")
    a = as_path(a).points
    b = as_path(b).points
    P, Q = a.shape[0], b.shape[0]
    band = max(float(band), Q / P - 1.0)
    if with_alignment:
        M = kernels.dtw_banded_table(a, b, band)
        return DtwResult(float(M[-1, -1]), _backtrace(M))
    return DtwResult(float(kernels.dtw_banded_rolling(a, b, band)))


def soft_dtw_cost(a: PathLike, b: PathLike, gamma: float) -> float:
    """DTW with ``min`` replaced by the soft-min ``-gamma * log(sum(exp(-x / gamma)))``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    a = as_path(a).points
    b = as_path(b).points
    return float(kernels.soft_dtw_rolling(a, b, float(gamma)))


def squash(cost: float) -> float:
    """Map a non-negative cost to a reward ``1 - tanh(cost)`` in (0, 1]."""
    return float(kernels.squash(float(cost)))


def match_segment(ee_window: PathLike, demo: PathLike) -> Tuple[int, int]:
    """Demo indices nearest to the window's first and last points, in order."""
    w = as_path(ee_window)
    d = as_path(demo)
    i0 = closest_point_index(d, w.start, 0)
    i1 = closest_point_index(d, w.end, i0)
    return i0, max(i0, i1)


def dtw_imitation_reward(ee_window: PathLike, demo: PathLike) -> float:
    w = as_path(ee_window)
    d = as_path(demo)
    i0, i1 = match_segment(w, d)
    return squash(dtw_cost(w, extract_segment(d, i0, i1)).cost)


def batch_dtw_reward(ee_window: PathLike, demos: DemoSet, parallel: bool = False) -> Tuple[float, int]:
    """Best DTW imitation reward over a demo set and the index of the demo that gives it."""
    rewards = dtw_rewards(ee_window, demos, parallel=parallel)
    best = int(kernels.argmax_first(rewards))
    return float(rewards[best]), best


def dtw_rewards(ee_window: PathLike, demos: DemoSet, parallel: bool = False) -> np.ndarray:
    """Per-demo DTW imitation rewards."""
    if len(demos) == 0:
        raise ValueError("empty demo set")
    win = np.ascontiguousarray(as_path(ee_window).points)
    padded, lengths = demos.padded()
    out = np.empty(len(demos))
    if parallel:
        _dtw_parallel(win, padded, lengths, out)
    else:
        kernels.dtw_rewards_seq(win, padded, lengths, out)
    return out


def _dtw_parallel(win, padded, lengths, out):
    from ._jit import JIT_ENABLED

    if JIT_ENABLED:
        kernels.dtw_rewards_par(win, padded, lengths, out)
        return
    from concurrent.futures import ThreadPoolExecutor

    def one(m):
        out[m] = kernels.dtw_reward_one(win, win.shape[0], padded[m], lengths[m])

    with ThreadPoolExecutor() as pool:
        list(pool.map(one, range(padded.shape[0])))
