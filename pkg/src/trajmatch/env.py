"""Kinematic narrow-passage insertion world.

Everything is expressed in the configuration space of the plug centre, in
the socket frame (assembled plug position at the origin). The socket is a
square block of half-width ``socket_half_width + plug_radius`` whose top
(the rim) sits at ``z = channel_depth``; a square channel of half-width
``channel_half_width`` runs from the rim down to the origin. Motion is
kinematic: a commanded displacement is split into short sub-steps and each
sub-step is projected out of the solid, so the plug slides along surfaces.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import kernels
from ._jit import njit
from .curriculum import CurriculumState, curriculum_weight, sample_initial_height
from .demos import DemoSet
from .path import Path, reverse_path
from .rewards import RewardConfig, StepRecord, distance_to_goal_reward, horizon_return

SCHEMES = ("none", "state", "dtw", "signature")

AXES = ("x", "y", "z")


def _ranges(**kw) -> Dict[str, Tuple[float, float]]:
    return {k: (float(v[0]), float(v[1])) for k, v in kw.items()}


@dataclass(frozen=True)
class EnvConfig:
    """Geometry, randomisation and noise of the insertion world (meters, degrees).

    ``socket_pose_ranges`` place the socket in the world; ``plug_offset_ranges``
    place the plug relative to the rim centre. ``obs_noise_ranges`` perturb the
    observed socket pose: ``x``/``y``/``z`` shift it, ``roll``/``pitch`` tilt it
    about the rim centre, which moves the observed goal sideways.
    """

    channel_half_width: float = 0.0005
    channel_depth: float = 0.02
    plug_radius: float = 0.004
    socket_half_width: float = 0.011
    socket_pose_ranges: Dict[str, Tuple[float, float]] = field(
        default_factory=lambda: _ranges(x=(0.40, 0.60), y=(-0.10, 0.10), z=(0.16, 0.18))
    )
    plug_offset_ranges: Dict[str, Tuple[float, float]] = field(
        default_factory=lambda: _ranges(x=(-0.010, 0.010), y=(-0.010, 0.010), z=(0.010, 0.020))
    )
    obs_noise_ranges: Dict[str, Tuple[float, float]] = field(
        default_factory=lambda: _ranges(x=(-0.002, 0.002), y=(-0.002, 0.002), z=(-0.002, 0.002), roll=(-5.0, 5.0), pitch=(-5.0, 5.0))
    )
    demo_start_ranges: Dict[str, Tuple[float, float]] = field(
        default_factory=lambda: _ranges(x=(-0.012, 0.012), y=(-0.012, 0.012), z=(0.008, 0.022))
    )
    demo_clear_height: float = 0.002
    demo_speed_range: Tuple[float, float] = (0.5, 1.0)
    max_steps: int = 200
    action_step: float = 0.001
    success_tolerance: float = 0.002
    history_len: int = 10
    jitter: float = 0.1

    def __post_init__(self):
        if not self.channel_half_width > 0:
            raise ValueError("env.channel_half_width must be > 0")
        if not (self.channel_depth > 0 and self.plug_radius > 0 and self.action_step > 0):
            raise ValueError("env.channel_depth, env.plug_radius and env.action_step must be > 0")
        if not self.socket_half_width > self.channel_half_width + self.plug_radius:
            raise ValueError("env.socket_half_width must exceed channel_half_width + plug_radius")
        if self.max_steps < 0 or self.history_len < 1:
            raise ValueError("env.max_steps must be >= 0 and env.history_len >= 1")
        for name in ("socket_pose_ranges", "plug_offset_ranges", "obs_noise_ranges", "demo_start_ranges"):
            for axis, (lo, hi) in getattr(self, name).items():
                if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                    raise ValueError(f"env.{name}.{axis} must be a finite [lo, hi] range")
        lo_z = self.plug_offset_ranges.get("z", (0.0, 0.0))[0]
        if lo_z < 0:
            raise ValueError("env.plug_offset_ranges.z must keep the plug above the rim (infeasible start)")

    @property
    def outer(self) -> float:
        return self.socket_half_width + self.plug_radius

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, dict):
                d[k] = {a: list(r) for a, r in v.items()}
            elif isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EnvConfig":
        known = {f.name: f for f in fields(cls)}
        kw = {}
        for k, v in d.items():
            if k not in known:
                raise KeyError(f"env.{k}: unknown key")
            if isinstance(v, dict):
                kw[k] = {a: (float(r[0]), float(r[1])) for a, r in v.items()}
            elif isinstance(v, list):
                kw[k] = tuple(v)
            else:
                kw[k] = v
        return cls(**kw)


# --------------------------------------------------------------------------
# geometry kernels


@njit
def _is_free(x, y, z, c, depth, outer):
    if z >= depth:
        return True
    ax = abs(x)
    ay = abs(y)
    if ax >= outer or ay >= outer:
        return True
    return ax <= c and ay <= c and z >= 0.0


@njit
def _project(x, y, z, c, depth, outer):
    """Nearest free point to ``(x, y, z)`` (the point itself if already free)."""
    if _is_free(x, y, z, c, depth, outer):
        return x, y, z
    # onto the rim
    bx, by, bz = x, y, depth
    best = depth - z
    # into the channel
    cx = min(max(x, -c), c)
    cy = min(max(y, -c), c)
    cz = max(z, 0.0)
    d = math.sqrt((cx - x) ** 2 + (cy - y) ** 2 + (cz - z) ** 2)
    if d < best:
        best, bx, by, bz = d, cx, cy, cz
    # out through a side wall (only reachable below the rim if outside the block)
    ax = outer - abs(x)
    if ax < best:
        best, bx, by, bz = ax, math.copysign(outer, x), y, z
    ay = outer - abs(y)
    if ay < best:
        best, bx, by, bz = ay, x, math.copysign(outer, y), z
    return bx, by, bz


@njit
def _advance(pos, action, max_step, c, depth, outer, out):
    """Clamp the action to ``max_step``, then move in sub-steps with projection."""
    n = math.sqrt(action[0] ** 2 + action[1] ** 2 + action[2] ** 2)
    scale = 1.0
    if n > max_step:
        scale = max_step / n
    ax, ay, az = action[0] * scale, action[1] * scale, action[2] * scale
    sub = int(math.ceil(n * scale / (0.5 * c)))
    if sub < 1:
        sub = 1
    x, y, z = pos[0], pos[1], pos[2]
    for _ in range(sub):
        x, y, z = _project(x + ax / sub, y + ay / sub, z + az / sub, c, depth, outer)
    out[0] = x
    out[1] = y
    out[2] = z


@njit
def _advance_many(pos, actions, max_step, c, depth, outer, out):
    for k in range(actions.shape[0]):
        _advance(pos, actions[k], max_step, c, depth, outer, out[k])


def _square_gap(x: float, y: float, half: float) -> float:
    """2D distance from (x, y) to the square |x|, |y| <= half (0 inside)."""
    dx = max(abs(x) - half, 0.0)
    dy = max(abs(y) - half, 0.0)
    return math.hypot(dx, dy)


def signed_clearance(cfg: EnvConfig, p_rel) -> float:
    """Distance from a socket-frame point to the solid; negative inside it."""
    x, y, z = (float(v) for v in p_rel)
    c, depth, outer = cfg.channel_half_width, cfg.channel_depth, cfg.outer
    if not _is_free(x, y, z, c, depth, outer):
        q = _project(x, y, z, c, depth, outer)
        return -math.dist(q, (x, y, z))
    in_opening = abs(x) <= c and abs(y) <= c
    if in_opening:
        lateral = min(c - abs(x), c - abs(y))
    else:
        lateral = _square_gap(x, y, outer)
    if z >= depth:
        return math.hypot(lateral, z - depth)
    if in_opening:
        return min(lateral, z)
    return lateral


# --------------------------------------------------------------------------
# state


@dataclass(frozen=True, eq=False)
class EnvState:
    """World state of one episode. Positions are world-frame meters."""

    cfg: EnvConfig
    plug_pos: np.ndarray
    socket_pos: np.ndarray
    observed_goal: np.ndarray
    step_count: int = 0
    trace: Tuple[np.ndarray, ...] = ()
    done: bool = False
    success: bool = False

    @property
    def goal(self) -> np.ndarray:
        return self.socket_pos

    def rel(self, p) -> np.ndarray:
        return np.asarray(p, dtype=np.float64) - self.socket_pos

    def trace_path(self) -> Path:
        return Path(np.array(self.trace))

    def goal_distance(self) -> float:
        return float(np.linalg.norm(self.plug_pos - self.socket_pos))


def _uniform(rng: np.random.Generator, ranges: Dict[str, Tuple[float, float]], keys=AXES) -> np.ndarray:
    return np.array([rng.uniform(*ranges.get(k, (0.0, 0.0))) for k in keys])


def _tilt_offset(depth: float, roll_deg: float, pitch_deg: float) -> np.ndarray:
    r, p = math.radians(roll_deg), math.radians(pitch_deg)
    # goal sits `depth` below the rim centre; tilt the socket about that centre
    v = np.array([-depth * math.sin(p), depth * math.cos(p) * math.sin(r), -depth * math.cos(p) * math.cos(r)])
    return v - np.array([0.0, 0.0, -depth])


def make_env(cfg: EnvConfig, rng: np.random.Generator, plug_height: Optional[float] = None) -> EnvState:
    """Place socket, plug and the noisy goal observation.

    ``plug_height`` overrides the sampled height of the plug above the rim
    (used by the curriculum).
    """
    socket = _uniform(rng, cfg.socket_pose_ranges)
    offset = _uniform(rng, cfg.plug_offset_ranges)
    if plug_height is not None:
        offset[2] = plug_height
    noise = _uniform(rng, cfg.obs_noise_ranges)
    roll = rng.uniform(*cfg.obs_noise_ranges.get("roll", (0.0, 0.0)))
    pitch = rng.uniform(*cfg.obs_noise_ranges.get("pitch", (0.0, 0.0)))
    rel_plug = offset + np.array([0.0, 0.0, cfg.channel_depth])
    observed = socket + noise + _tilt_offset(cfg.channel_depth, roll, pitch)
    return place_env(cfg, socket, rel_plug, observed)


def place_env(cfg: EnvConfig, socket_pos, plug_rel, observed_goal=None) -> EnvState:
    """Episode start with the plug at ``plug_rel`` in the socket frame.

    ``observed_goal`` defaults to the true goal (no observation noise).
    """
    socket = np.asarray(socket_pos, dtype=np.float64).reshape(3).copy()
    rel = np.asarray(plug_rel, dtype=np.float64).reshape(3)
    if signed_clearance(cfg, rel) < 0:
        raise ValueError("infeasible config: plug initialised inside the socket")
    plug = socket + rel
    observed = socket.copy() if observed_goal is None else np.asarray(observed_goal, dtype=np.float64).reshape(3).copy()
    return EnvState(cfg, plug, socket, observed, 0, (plug.copy(),), cfg.max_steps == 0, False)


def next_position(env: EnvState, action) -> np.ndarray:
    """Where the plug would end up after ``action``, without changing ``env``."""
    cfg = env.cfg
    out = np.empty(3)
    _advance(env.rel(env.plug_pos), np.asarray(action, dtype=np.float64), cfg.action_step,
             cfg.channel_half_width, cfg.channel_depth, cfg.outer, out)
    return out + env.socket_pos


def step(env: EnvState, action) -> EnvState:
    if env.done:
        raise RuntimeError("episode already finished")
    pos = next_position(env, action)
    count = env.step_count + 1
    success = float(np.linalg.norm(pos - env.socket_pos)) < env.cfg.success_tolerance
    done = success or count >= env.cfg.max_steps
    return replace(env, plug_pos=pos, step_count=count, trace=env.trace + (pos,), done=done, success=success)


# --------------------------------------------------------------------------
# demonstrations


def _polyline(a: np.ndarray, b: np.ndarray, spacing: float) -> np.ndarray:
    n = max(1, int(math.ceil(np.linalg.norm(b - a) / spacing)))
    t = np.linspace(0.0, 1.0, n + 1)[:, None]
    return a + t * (b - a)


def generate_disassembly_demos(cfg: EnvConfig, count: int, rng: np.random.Generator,
                               assembly_id: str = "00000", seed: int = 0) -> DemoSet:
    """Script disassemblies from the assembled state and keep their reversed paths.

    Each disassembly lifts the plug straight up the channel until it clears
    the rim by ``demo_clear_height``, then moves in a straight line to a pose
    drawn from ``demo_start_ranges`` (heights above the rim). Points are
    spaced at a per-demo fraction of ``action_step``.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    paths = []
    rim = np.array([0.0, 0.0, cfg.channel_depth])
    clear = rim + np.array([0.0, 0.0, cfg.demo_clear_height])
    for _ in range(count):
        spacing = cfg.action_step * rng.uniform(*cfg.demo_speed_range)
        target = _uniform(rng, cfg.demo_start_ranges) + rim
        lift = _polyline(np.zeros(3), clear, spacing)
        move = _polyline(clear, target, spacing)
        forward = np.vstack([lift, move[1:]])
        paths.append(reverse_path(Path(forward)))
    return DemoSet(paths, assembly_id=assembly_id, source="generated", seed=seed)


# --------------------------------------------------------------------------
# controller and episodes

# 3x3x3 grid of unit directions; the centre entry is the zero move
_GRID = np.array([[i, j, k] for i in (-1, 0, 1) for j in (-1, 0, 1) for k in (-1, 0, 1)], dtype=np.float64)
_GRID_DIRS = np.array([g / np.linalg.norm(g) if np.any(g) else g for g in _GRID])


@dataclass
class _Tracker:
    """Per-episode incremental data the controller needs (socket frame)."""

    level: int
    sig: Optional[np.ndarray] = None
    start: Optional[np.ndarray] = None
    last: Optional[np.ndarray] = None

    def reset(self, p_rel: np.ndarray):
        self.start = p_rel.copy()
        self.last = p_rel.copy()
        self.sig = np.zeros(kernels.sig_size(self.level))
        self.sig[0] = 1.0

    def push(self, p_rel: np.ndarray):
        kernels.sig_step(self.sig, self.level, self.start, self.last, p_rel)
        self.last = p_rel.copy()


def candidate_actions(env: EnvState, rng: np.random.Generator) -> np.ndarray:
    """27 grid directions (one of them zero) plus a step toward the observed goal, jittered."""
    cfg = env.cfg
    to_goal = env.observed_goal - env.plug_pos
    dist = float(np.linalg.norm(to_goal))
    ray = to_goal / dist * min(cfg.action_step, dist) if dist > 0 else np.zeros(3)
    acts = np.vstack([_GRID_DIRS * cfg.action_step, ray[None, :]])
    acts += rng.uniform(-cfg.jitter, cfg.jitter, size=acts.shape) * cfg.action_step
    return acts


def imitation_scores(env: EnvState, next_rel: np.ndarray, demos: DemoSet, scheme: str,
                     level: int, tracker: Optional[_Tracker] = None) -> np.ndarray:
    """Imitation reward of each hypothetical next position (socket frame)."""
    out = np.zeros(next_rel.shape[0])
    if scheme == "none":
        return out
    padded, lengths = demos.padded()
    if scheme == "state":
        kernels.candidate_state_rewards(next_rel, padded, lengths, out)
    elif scheme == "dtw":
        hist = np.array(env.trace[-(env.cfg.history_len - 1):]) - env.socket_pos if env.cfg.history_len > 1 else np.empty((0, 3))
        kernels.candidate_dtw_rewards(np.ascontiguousarray(hist), next_rel, padded, lengths, out)
    elif scheme == "signature":
        if tracker is None:
            tracker = _Tracker(level)
            pts = [env.rel(p) for p in env.trace]
            tracker.reset(pts[0])
            for p in pts[1:]:
                tracker.push(p)
        kernels.candidate_signature_rewards(tracker.sig, level, tracker.start, tracker.last, next_rel,
                                            padded, lengths, demos.signature_tables(level), out)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return out


def greedy_controller(env: EnvState, demos: DemoSet, scheme: str, cfg: RewardConfig,
                      rng: np.random.Generator, tracker: Optional[_Tracker] = None) -> np.ndarray:
    """One-step lookahead: the candidate action with the highest next-step reward."""
    if env.done:
        raise RuntimeError("episode already finished")
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    e = env.cfg
    acts = candidate_actions(env, rng)
    nxt = np.empty_like(acts)
    _advance_many(env.rel(env.plug_pos), acts, e.action_step, e.channel_half_width, e.channel_depth, e.outer, nxt)
    goal_rel = env.rel(env.observed_goal)
    dists = np.linalg.norm(nxt - goal_rel, axis=1)
    baseline = np.array([kernels.squash(cfg.goal_scale * d) for d in dists])
    imit = imitation_scores(env, nxt, demos, scheme, cfg.signature_level, tracker)
    total = cfg.omega_b * baseline + cfg.omega_i * imit
    return acts[int(kernels.argmax_first(total))]


@dataclass(frozen=True, eq=False)
class EpisodeResult:
    success: bool
    steps_taken: int
    trace: Path
    return_value: float


def imitation_reward_at(env: EnvState, demos: DemoSet, scheme: str, level: int) -> float:
    """Imitation reward of the current state (socket frame), 0 for ``none``."""
    if scheme == "none":
        return 0.0
    cur = env.rel(env.plug_pos)[None, :]
    if scheme == "dtw":
        # score the current point as if it were the candidate appended to the history before it
        prev = replace(env, trace=env.trace[:-1])
        return float(imitation_scores(prev, cur, demos, scheme, level)[0])
    if scheme == "signature":
        pts = np.array([env.rel(p) for p in env.trace])
        t = _Tracker(level)
        t.reset(pts[0])
        for p in pts[1:-1]:
            t.push(p)
        return float(imitation_scores(replace(env, trace=env.trace[:-1]), cur, demos, scheme, level, t)[0])
    return float(imitation_scores(env, cur, demos, scheme, level)[0])


def run_episode(cfg: EnvConfig, demos: DemoSet, scheme: str, reward_cfg: RewardConfig,
                curriculum_state: CurriculumState, rng: np.random.Generator,
                control_rng: Optional[np.random.Generator] = None) -> EpisodeResult:
    """Roll one episode with the greedy controller and score it with the horizon return."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    height = sample_initial_height(curriculum_state, rng)
    env = make_env(cfg, rng, plug_height=height)
    control_rng = rng if control_rng is None else control_rng
    tracker = _Tracker(reward_cfg.signature_level)
    tracker.reset(env.rel(env.plug_pos))
    records: List[StepRecord] = []
    while not env.done:
        action = greedy_controller(env, demos, scheme, reward_cfg, control_rng, tracker if scheme == "signature" else None)
        env = step(env, action)
        if scheme == "signature":
            # imitation reward of the realised step, from the same incremental signature
            nxt = env.rel(env.plug_pos)[None, :]
            imit = float(imitation_scores(env, nxt, demos, scheme, reward_cfg.signature_level, tracker)[0])
            tracker.push(env.rel(env.plug_pos))
        elif scheme == "none":
            imit = 0.0
        else:
            imit = imitation_reward_at(env, demos, scheme, reward_cfg.signature_level)
        records.append(StepRecord(
            baseline_reward=distance_to_goal_reward(env.plug_pos, env.socket_pos, reward_cfg.goal_scale),
            imitation_reward=imit,
            plug_goal_distance=env.goal_distance(),
        ))
    ret = horizon_return(records, curriculum_weight(curriculum_state), reward_cfg) if records else 0.0
    return EpisodeResult(env.success, env.step_count, env.trace_path(), float(ret))
