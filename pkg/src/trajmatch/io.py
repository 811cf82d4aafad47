"""Demo files, experiment configs and curriculum checkpoints.

Demo sets are JSON lines, one record per demo. Python's float ``repr`` is the
shortest string that reads back to the same double, so a save/load cycle is
exact. Configs are YAML (JSON is accepted too since it is a YAML subset).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, fields
from pathlib import Path as FsPath
from typing import Optional, Tuple, Union

import numpy as np
import yaml

from .curriculum import CurriculumState
from .demos import DemoSet
from .env import SCHEMES, EnvConfig
from .path import Path
from .rewards import RewardConfig

PathArg = Union[str, os.PathLike]


class DataError(ValueError):
    """A demo or config file that cannot be used as given."""


def save_demoset(demos: DemoSet, destination: PathArg) -> None:
    with open(destination, "w", encoding="utf-8") as fh:
        for demo_id, p in zip(demos.demo_ids, demos.paths):
            rec = {
                "demo_id": demo_id,
                "assembly_id": demos.assembly_id,
                "points": p.points.tolist(),
                "source": demos.source,
                "seed": demos.seed,
            }
            fh.write(json.dumps(rec, allow_nan=False) + "\n")


def _record_points(rec: dict, where: str) -> np.ndarray:
    pts = rec.get("points")
    if not isinstance(pts, list) or not pts:
        raise DataError(f"{where}: 'points' must be a non-empty list of [x, y, z]")
    for row in pts:
        if not isinstance(row, list) or len(row) != 3:
            raise DataError(f"{where}: every point needs exactly 3 coordinates")
        for v in row:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise DataError(f"{where}: coordinate {v!r} is not a number")
            if not math.isfinite(v):
                raise DataError(f"{where}: non-finite coordinate {v!r}")
    return np.array(pts, dtype=np.float64)


def load_demoset(source: PathArg) -> DemoSet:
    paths, ids = [], []
    meta: Optional[Tuple[str, str, int]] = None
    with open(source, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{source}:{lineno}"
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{where}: malformed JSON ({exc.msg})") from None
            if not isinstance(rec, dict):
                raise DataError(f"{where}: expected a JSON object")
            missing = {"demo_id", "assembly_id", "points", "source", "seed"} - set(rec)
            if missing:
                raise DataError(f"{where}: missing field {sorted(missing)[0]!r}")
            pts = _record_points(rec, where)
            if rec["source"] not in ("generated", "imported"):
                raise DataError(f"{where}: unknown source {rec['source']!r}")
            if isinstance(rec["seed"], bool) or not isinstance(rec["seed"], int):
                raise DataError(f"{where}: seed must be an integer")
            this = (str(rec["assembly_id"]), rec["source"], rec["seed"])
            if meta is None:
                meta = this
            elif this != meta:
                raise DataError(f"{where}: assembly_id/source/seed differ from the first record")
            paths.append(Path(pts))
            ids.append(str(rec["demo_id"]))
    if meta is None:
        raise DataError(f"{source}: empty dataset (no demo records)")
    return DemoSet(paths, assembly_id=meta[0], demo_ids=ids, source=meta[1], seed=meta[2])


def load_points(source: PathArg) -> Path:
    """A single path from a text file: ``x y z`` or ``x,y,z`` per line, or a JSON list."""
    text = FsPath(source).read_text(encoding="utf-8")
    if text.lstrip().startswith("["):
        try:
            pts = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"{source}: malformed JSON ({exc.msg})") from None
        return Path(_record_points({"points": pts}, str(source)))
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        try:
            row = [float(v) for v in parts]
        except ValueError:
            raise DataError(f"{source}:{lineno}: not a number") from None
        if len(row) != 3 or not all(map(math.isfinite, row)):
            raise DataError(f"{source}:{lineno}: need 3 finite coordinates")
        rows.append(row)
    if not rows:
        raise DataError(f"{source}: no points")
    return Path(np.array(rows))


# --------------------------------------------------------------------------
# experiment config


_CURRICULUM_KEYS = ("stage", "num_stages", "h_min_initial", "h_min_final", "h_max", "window", "threshold")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything an experiment run needs; a snapshot reproduces the run."""

    env: EnvConfig = field(default_factory=EnvConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    curriculum: CurriculumState = field(default_factory=CurriculumState)
    schemes: Tuple[str, ...] = SCHEMES
    episodes_per_scheme: int = 500
    root_seed: int = 0
    num_demos: int = 100
    advance_curriculum: bool = False
    workers: int = 1
    demos_path: Optional[str] = None
    out_dir: str = "runs"

    def __post_init__(self):
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad or not self.schemes:
            raise ValueError(f"schemes: unknown scheme {bad[0]!r}" if bad else "schemes: empty list")
        if self.episodes_per_scheme < 1:
            raise ValueError("episodes_per_scheme must be >= 1")
        if self.num_demos < 1:
            raise ValueError("num_demos must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def to_dict(self) -> dict:
        cur = self.curriculum.to_dict()
        return {
            "env": self.env.to_dict(),
            "reward": self.reward.to_dict(),
            "curriculum": {k: cur[k] for k in _CURRICULUM_KEYS},
            "schemes": list(self.schemes),
            "episodes_per_scheme": self.episodes_per_scheme,
            "root_seed": self.root_seed,
            "num_demos": self.num_demos,
            "advance_curriculum": self.advance_curriculum,
            "workers": self.workers,
            "demos_path": self.demos_path,
            "out_dir": self.out_dir,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise DataError("config must be a mapping")
        known = {f.name for f in fields(cls)}
        for k in d:
            if k not in known:
                raise KeyError(f"{k}: unknown key")
        kw = dict(d)
        for name, sub in (("env", EnvConfig), ("reward", RewardConfig)):
            if name in kw:
                if not isinstance(kw[name], dict):
                    raise DataError(f"{name}: expected a mapping")
                kw[name] = sub.from_dict(kw[name])
        if "curriculum" in kw:
            cur = kw["curriculum"]
            if not isinstance(cur, dict):
                raise DataError("curriculum: expected a mapping")
            for k in cur:
                if k not in _CURRICULUM_KEYS:
                    raise KeyError(f"curriculum.{k}: unknown key")
            kw["curriculum"] = CurriculumState.from_dict(cur)
        if "schemes" in kw:
            kw["schemes"] = tuple(kw["schemes"])
        return cls(**kw)


def render_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise DataError(f"config is not valid YAML/JSON: {exc}") from None
    return ExperimentConfig.from_dict(data or {})


def load_config(source: PathArg) -> ExperimentConfig:
    return parse_config(FsPath(source).read_text(encoding="utf-8"))


def save_config(cfg: ExperimentConfig, destination: PathArg) -> None:
    FsPath(destination).write_text(render_config(cfg), encoding="utf-8")


def save_checkpoint(states: dict, destination: PathArg) -> None:
    """Curriculum state per scheme as JSON."""
    payload = {k: v.to_dict() for k, v in states.items()}
    FsPath(destination).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_checkpoint(source: PathArg) -> dict:
    data = json.loads(FsPath(source).read_text(encoding="utf-8"))
    return {k: CurriculumState.from_dict(v) for k, v in data.items()}
