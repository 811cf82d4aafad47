"""Four-scheme comparison on the insertion world."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from .curriculum import CurriculumState, record_and_maybe_advance
from .demos import DemoSet
from .env import SCHEMES, EnvConfig, EpisodeResult, generate_disassembly_demos, run_episode
from .rewards import RewardConfig

REPORT_COLUMNS = ("scheme", "episodes", "successes", "success_rate", "mean_steps", "mean_return", "wall_ms")


def episode_rngs(root_seed: int, index: int):
    """Independent (environment, controller) generators for one episode.

    Derived from ``(root_seed, index)`` only, so results do not depend on
    scheduling or on which scheme is running.
    """
    env_ss, ctl_ss = np.random.SeedSequence([root_seed, index]).spawn(2)
    return np.random.default_rng(env_ss), np.random.default_rng(ctl_ss)


@dataclass
class SchemeRow:
    scheme: str
    episodes: int
    successes: int
    success_rate: float
    mean_steps: float
    mean_return: float
    wall_ms: float

    def as_list(self) -> list:
        return [self.scheme, self.episodes, self.successes, self.success_rate, self.mean_steps, self.mean_return, self.wall_ms]


@dataclass
class Report:
    rows: List[SchemeRow]
    curriculum: Dict[str, CurriculumState] = field(default_factory=dict)

    def row(self, scheme: str) -> SchemeRow:
        return next(r for r in self.rows if r.scheme == scheme)

    def success_rate(self, scheme: str) -> float:
        return self.row(scheme).success_rate

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in self.rows:
            w.writerow([r.scheme, r.episodes, r.successes, repr(r.success_rate), repr(r.mean_steps), repr(r.mean_return), f"{r.wall_ms:.1f}"])
        return buf.getvalue()

    def to_table(self) -> str:
        lines = [f"{'scheme':<10} {'episodes':>8} {'success':>8} {'rate':>7} {'steps':>7} {'return':>9} {'wall_ms':>9}"]
        for r in self.rows:
            lines.append(
                f"{r.scheme:<10} {r.episodes:>8d} {r.successes:>8d} {r.success_rate:>7.3f} "
                f"{r.mean_steps:>7.1f} {r.mean_return:>9.3f} {r.wall_ms:>9.1f}"
            )
        return "\n".join(lines)


def run_scheme(cfg: EnvConfig, demos: DemoSet, scheme: str, reward_cfg: RewardConfig,
               curriculum: CurriculumState, episodes: int, root_seed: int,
               advance_curriculum: bool = False, workers: int = 1):
    """Run ``episodes`` episodes of one scheme.

    Without curriculum advancement the episodes are independent and may run on
    ``workers`` threads; seeds depend only on the episode index, so the result
    does not depend on the worker count.
    """
    if not advance_curriculum and workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        def one(i):
            env_rng, ctl_rng = episode_rngs(root_seed, i)
            return run_episode(cfg, demos, scheme, reward_cfg, curriculum, env_rng, ctl_rng)

        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, range(episodes))), curriculum
    results: List[EpisodeResult] = []
    state = curriculum
    for i in range(episodes):
        env_rng, ctl_rng = episode_rngs(root_seed, i)
        res = run_episode(cfg, demos, scheme, reward_cfg, state, env_rng, ctl_rng)
        results.append(res)
        if advance_curriculum:
            state = record_and_maybe_advance(state, res.success)
    return results, state


def compare_schemes(cfg: EnvConfig, episodes_per_scheme: int, seed: int,
                    reward_cfg: Optional[RewardConfig] = None,
                    curriculum: Union[CurriculumState, Mapping[str, CurriculumState], None] = None,
                    demos: Optional[DemoSet] = None, num_demos: int = 100,
                    schemes: Sequence[str] = SCHEMES,
                    advance_curriculum: bool = False, workers: int = 1) -> Report:
    """Run every scheme on the same per-episode seed stream and summarise.

    Demos are generated from ``seed`` when not supplied. With
    ``advance_curriculum`` each scheme drives its own copy of the curriculum
    from its episode outcomes; otherwise all episodes use the given stage.
    ``curriculum`` may also map scheme names to states, e.g. a checkpoint from
    an earlier run; schemes missing from the mapping start fresh.
    """
    if episodes_per_scheme < 1:
        raise ValueError("episodes_per_scheme must be >= 1")
    reward_cfg = reward_cfg or RewardConfig()
    if curriculum is None or isinstance(curriculum, CurriculumState):
        start = {s: curriculum or CurriculumState() for s in schemes}
    else:
        start = {s: curriculum.get(s, CurriculumState()) for s in schemes}
    if demos is None:
        demos = generate_disassembly_demos(cfg, num_demos, np.random.default_rng([seed, 2**31]), seed=seed)
    rows, states = [], {}
    for scheme in schemes:
        t0 = time.perf_counter()
        results, states[scheme] = run_scheme(cfg, demos, scheme, reward_cfg, start[scheme], episodes_per_scheme, seed,
                                                  advance_curriculum, workers)
        wall = (time.perf_counter() - t0) * 1e3
        n_ok = sum(r.success for r in results)
        rows.append(SchemeRow(
            scheme=scheme,
            episodes=len(results),
            successes=n_ok,
            success_rate=n_ok / len(results),
            mean_steps=float(np.mean([r.steps_taken for r in results])),
            mean_return=float(np.mean([r.return_value for r in results])),
            wall_ms=wall,
        ))
    return Report(rows, states)
