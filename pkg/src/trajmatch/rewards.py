"""Per-step reward composition and the per-horizon return."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import List, Sequence, Tuple

import numpy as np

from . import kernels
from .demos import DemoSet
from .dtw import squash


@dataclass(frozen=True)
class RewardConfig:
    """Weights and thresholds for step rewards and the horizon return.

    ``omega_b``/``omega_i`` weight baseline and imitation terms per step;
    ``omega_sdf``/``omega_i`` are the same roles inside the horizon return.
    ``sapu_weight`` is a constant stand-in for an interpenetration-based
    weight. ``goal_scale`` (1/m) sets how fast the distance-to-goal reward
    decays.
    """

    omega_b: float = 1.0
    omega_i: float = 1.0
    omega_sdf: float = 1.0
    sapu_weight: float = 1.0
    success_bonus: float = 10.0
    success_threshold: float = 0.002
    signature_level: int = 3
    goal_scale: float = 10.0

    def __post_init__(self):
        for name in ("omega_b", "omega_i", "omega_sdf", "success_bonus", "goal_scale"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"reward.{name} must be finite and >= 0, got {v}")
        if not 0.0 <= self.sapu_weight <= 1.0:
            raise ValueError(f"reward.sapu_weight must lie in [0, 1], got {self.sapu_weight}")
        if not (math.isfinite(self.success_threshold) and self.success_threshold > 0):
            raise ValueError(f"reward.success_threshold must be > 0, got {self.success_threshold}")
        if int(self.signature_level) != self.signature_level or self.signature_level < 1:
            raise ValueError(f"reward.signature_level must be an integer >= 1, got {self.signature_level}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RewardConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise KeyError(f"reward.{sorted(unknown)[0]}: unknown key")
        return cls(**d)


@dataclass(frozen=True)
class StepRecord:
    baseline_reward: float
    imitation_reward: float
    plug_goal_distance: float

    def __post_init__(self):
        if not 0.0 <= self.imitation_reward <= 1.0:
            raise ValueError("imitation_reward must lie in [0, 1]")
        if self.plug_goal_distance < 0:
            raise ValueError("plug_goal_distance must be >= 0")


def imitation_reward_max(per_demo: Sequence[float]) -> Tuple[float, int]:
    """Maximum over demos and its index; the first index wins ties."""
    values = np.asarray(per_demo, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise ValueError("no per-demo rewards given")
    best = int(kernels.argmax_first(values))
    return float(values[best]), best


def total_step_reward(baseline: float, imitation: float, cfg: RewardConfig) -> float:
    return cfg.omega_b * baseline + cfg.omega_i * imitation


def distance_to_goal_reward(plug_pos, goal_pos, scale: float = 10.0) -> float:
    d = float(np.linalg.norm(np.asarray(plug_pos, dtype=np.float64) - np.asarray(goal_pos, dtype=np.float64)))
    return squash(scale * d)


def state_based_reward(ee_point, demos: DemoSet) -> float:
    """Squashed distance from a point to the nearest point of any demo."""
    if len(demos) == 0:
        raise ValueError("empty demo set")
    padded, lengths = demos.padded()
    q = np.asarray(ee_point, dtype=np.float64).reshape(3)
    return squash(kernels.nearest_demo_distance(q, padded, lengths))


def success_bonus(step_distances: Sequence[float], cfg: RewardConfig) -> float:
    """Full bonus if the plug got within threshold of its goal at any step."""
    if len(step_distances) == 0:
        raise ValueError("no step distances given")
    return cfg.success_bonus if min(step_distances) < cfg.success_threshold else 0.0


def horizon_return(steps: List[StepRecord], curriculum_weight: float, cfg: RewardConfig) -> float:
    if len(steps) == 0:
        raise ValueError("no steps given")
    shaped = sum(cfg.sapu_weight * (cfg.omega_sdf * s.baseline_reward + cfg.omega_i * s.imitation_reward) for s in steps)
    return curriculum_weight * shaped + success_bonus([s.plug_goal_distance for s in steps], cfg)
