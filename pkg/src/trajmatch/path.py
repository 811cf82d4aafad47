"""Path and point-set primitives shared by every matching method."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import kernels


def _as_points(points) -> np.ndarray:
    arr = np.array(points, dtype=np.float64)
    if arr.ndim == 1 and arr.size == 3:
        arr = arr.reshape(1, 3)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"points must have shape (N, 3), got {arr.shape}")
    if arr.shape[0] < 1:
        raise ValueError("a path needs at least one point")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coordinates must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Path:
    """Ordered sequence of 3D points in meters.

    ``timestamps`` are optional provenance only; no matching routine reads
    them.
    """

    points: np.ndarray
    timestamps: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "points", _as_points(self.points))
        if self.timestamps is not None:
            ts = np.array(self.timestamps, dtype=np.float64).reshape(-1)
            if ts.shape[0] != self.points.shape[0]:
                raise ValueError("timestamps and points differ in length")
            if not np.all(np.isfinite(ts)) or np.any(np.diff(ts) <= 0):
                raise ValueError("timestamps must be finite and strictly increasing")
            ts.setflags(write=False)
            object.__setattr__(self, "timestamps", ts)

    def __len__(self) -> int:
        return self.points.shape[0]

    def __getitem__(self, i) -> np.ndarray:
        return self.points[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Path):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    __hash__ = None

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    def translated(self, offset) -> "Path":
        return Path(self.points + np.asarray(offset, dtype=np.float64))


PathLike = Union[Path, np.ndarray, Sequence[Sequence[float]]]


def as_path(p: PathLike) -> Path:
    return p if isinstance(p, Path) else Path(p)


@dataclass(frozen=True, eq=False)
class PointSet:
    """Unordered, non-empty collection of 3D points."""

    points: np.ndarray

    def __post_init__(self):
        try:
            pts = _as_points(self.points)
        except ValueError as exc:
            raise ValueError(f"invalid point set: {exc}") from None
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]


def reverse_path(p: PathLike) -> Path:
    """Reverse the point order. Timestamps are dropped: reversed timing is not physical."""
    p = as_path(p)
    return Path(p.points[::-1].copy())


def window(p: PathLike, t: int, n: int) -> Path:
    """Points ``t-(n-1) .. t`` inclusive, truncated at the start of the path."""
    p = as_path(p)
    if n < 1:
        raise ValueError("window length must be >= 1")
    if not 0 <= t < len(p):
        raise IndexError(f"index {t} out of range for path of length {len(p)}")
    return Path(p.points[max(0, t - n + 1): t + 1].copy())


def closest_point_index(p: PathLike, q, from_index: int = 0) -> int:
    """Index ``i >= from_index`` of the point nearest to ``q`` (smallest index on ties)."""
    p = as_path(p)
    if not 0 <= from_index < len(p):
        raise IndexError(f"from_index {from_index} out of range for path of length {len(p)}")
    q = np.asarray(q, dtype=np.float64).reshape(3)
    return int(kernels.closest_index(p.points, len(p), q, from_index))


def extract_segment(p: PathLike, i: int, j: int) -> Path:
    """Inclusive sub-path ``[p[i], ..., p[j]]``."""
    p = as_path(p)
    if i > j:
        raise ValueError(f"segment start {i} is after end {j}")
    if i < 0 or j >= len(p):
        raise IndexError(f"segment [{i}, {j}] out of range for path of length {len(p)}")
    return Path(p.points[i: j + 1].copy())


def _as_pointset(s) -> PointSet:
    return s if isinstance(s, PointSet) else PointSet(s)


def chamfer_distance(a, b) -> float:
    """Symmetric mean of squared nearest-neighbour distances between two point sets."""
    a = _as_pointset(a).points
    b = _as_pointset(b).points
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=-1)
    return float(d2.min(axis=1).mean() + d2.min(axis=0).mean())
