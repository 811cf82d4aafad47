"""Discrete path signatures and the signature imitation reward.

Level ``m`` holds ``3**m`` terms indexed by ``(i_1, ..., i_m)`` in
lexicographic order. Level 1 is the net displacement; each higher level
accumulates the running level below (evaluated after the step) against the
step increment, e.g. level 2 is ``sum_k (x_i[k+1] - x_i[0]) (x_j[k+1] - x_j[k])``.
Zero-length steps add nothing, so repeated points never change a signature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from . import kernels
from ._jit import JIT_ENABLED
from .demos import DemoSet
from .path import PathLike, as_path, closest_point_index, extract_segment
from .dtw import squash

DEFAULT_LEVEL = 3


def signature_size(level: int) -> int:
    return (3 ** (level + 1) - 1) // 2


@dataclass(frozen=True, eq=False)
class Signature:
    level: int
    terms: np.ndarray

    def __post_init__(self):
        if self.terms.shape != (signature_size(self.level),):
            raise ValueError(f"level {self.level} signature needs {signature_size(self.level)} terms")

    def block(self, m: int) -> np.ndarray:
        """Level-``m`` terms reshaped to an ``(3,) * m`` tensor."""
        lo = (3 ** m - 1) // 2
        return self.terms[lo: lo + 3 ** m].reshape((3,) * m)


def _check_level(level: int):
    if int(level) != level or level < 1:
        raise ValueError(f"signature level must be an integer >= 1, got {level}")


def signature(p: PathLike, level: int = DEFAULT_LEVEL) -> Signature:
    _check_level(level)
    pts = as_path(p).points
    return Signature(level, kernels.signature_of(pts, pts.shape[0], level))


def prefix_signatures(p: PathLike, level: int = DEFAULT_LEVEL) -> np.ndarray:
    """Signatures of every prefix ``p[0..k]``, one row per ``k``.

    Row ``k`` equals ``signature(p[:k+1], level).terms`` exactly; this is the
    incremental form used when a path grows one point at a time.
    """
    _check_level(level)
    pts = as_path(p).points
    return kernels.signature_prefixes(pts, pts.shape[0], level)


def signature_distance(s1: Signature, s2: Signature) -> float:
    if s1.level != s2.level:
        raise ValueError(f"signature levels differ: {s1.level} vs {s2.level}")
    return float(kernels.sig_dist(s1.terms, s2.terms))


def signature_imitation_reward(ee_path: PathLike, demo: PathLike, level: int = DEFAULT_LEVEL) -> float:
    """Reward for the whole episode path against the demo prefix ending nearest its current point."""
    ee = as_path(ee_path)
    d = as_path(demo)
    k = closest_point_index(d, ee.end, 0)
    cost = signature_distance(signature(ee, level), signature(extract_segment(d, 0, k), level))
    return squash(cost)


def signature_rewards(ee_path: PathLike, demos: DemoSet, level: int = DEFAULT_LEVEL, parallel: bool = False) -> np.ndarray:
    if len(demos) == 0:
        raise ValueError("empty demo set")
    ee = as_path(ee_path)
    sig = signature(ee, level).terms
    q = np.ascontiguousarray(ee.end)
    padded, lengths = demos.padded()
    tables = demos.signature_tables(level)
    out = np.empty(len(demos))
    if not parallel:
        kernels.signature_rewards_seq(sig, q, padded, lengths, tables, out)
    elif JIT_ENABLED:
        kernels.signature_rewards_par(sig, q, padded, lengths, tables, out)
    else:
        from concurrent.futures import ThreadPoolExecutor

        def one(m):
            out[m] = kernels.signature_reward_one(sig, q, padded[m], lengths[m], tables[m])

        with ThreadPoolExecutor() as pool:
            list(pool.map(one, range(len(demos))))
    return out


def batch_signature_reward(ee_path: PathLike, demos: DemoSet, level: int = DEFAULT_LEVEL, parallel: bool = False) -> Tuple[float, int]:
    rewards = signature_rewards(ee_path, demos, level, parallel=parallel)
    best = int(kernels.argmax_first(rewards))
    return float(rewards[best]), best
