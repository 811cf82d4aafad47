"""Sampling-based curriculum over the initial plug height.

Each stage raises the lower bound of the uniform height range while the upper
bound stays fixed. Stages advance when the success rate over a full trailing
window exceeds a threshold and never go back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Tuple

import numpy as np


@dataclass(frozen=True)
class CurriculumState:
    stage: int = 1
    num_stages: int = 4
    h_min_initial: float = 0.010
    h_min_final: float = 0.018
    h_max: float = 0.020
    window: int = 100
    threshold: float = 0.8
    trailing_successes: Tuple[bool, ...] = field(default=())

    def __post_init__(self):
        if self.num_stages < 1 or not 1 <= self.stage <= self.num_stages:
            raise ValueError(f"stage {self.stage} outside [1, {self.num_stages}]")
        if not all(map(math.isfinite, (self.h_min_initial, self.h_min_final, self.h_max))):
            raise ValueError("curriculum heights must be finite")
        if self.num_stages > 1 and not self.h_min_final > self.h_min_initial:
            raise ValueError("h_min_final must exceed h_min_initial when there is more than one stage")
        if not max(self.h_min_initial, self.h_min_final) < self.h_max:
            raise ValueError("every lower bound must stay below h_max")
        if self.window < 1 or not 0.0 <= self.threshold <= 1.0:
            raise ValueError("window must be >= 1 and threshold in [0, 1]")
        if len(self.trailing_successes) > self.window:
            raise ValueError("more trailing results than the window holds")

    def lower_bound(self, stage: int = None) -> float:
        k = self.stage if stage is None else stage
        if self.num_stages == 1:
            return self.h_min_initial
        frac = (k - 1) / (self.num_stages - 1)
        return self.h_min_initial + frac * (self.h_min_final - self.h_min_initial)

    @property
    def h_min(self) -> float:
        return self.lower_bound()

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["trailing_successes"] = list(self.trailing_successes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CurriculumState":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise KeyError(f"curriculum.{sorted(unknown)[0]}: unknown key")
        d = dict(d)
        d["trailing_successes"] = tuple(bool(x) for x in d.get("trailing_successes", ()))
        return cls(**d)


def sample_initial_height(state: CurriculumState, rng: np.random.Generator) -> float:
    return float(rng.uniform(state.h_min, state.h_max))


def record_and_maybe_advance(state: CurriculumState, success: bool) -> CurriculumState:
    trail = (state.trailing_successes + (bool(success),))[-state.window:]
    if (
        len(trail) == state.window
        and sum(trail) / state.window > state.threshold
        and state.stage < state.num_stages
    ):
        return replace(state, stage=state.stage + 1, trailing_successes=())
    return replace(state, trailing_successes=trail)


def curriculum_weight(state: CurriculumState) -> float:
    """Return weight proportional to difficulty: ``stage / num_stages``."""
    return state.stage / state.num_stages
