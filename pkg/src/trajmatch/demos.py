"""Demonstration sets: reversed disassembly paths for one assembly."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .path import Path, PathLike, as_path


@dataclass(eq=False)
class DemoSet:
    """Ordered collection of demo paths plus provenance.

    Paths are stored in the socket frame: the assembled (goal) plug position
    is the origin. ``padded()`` packs them for the batch kernels.
    """

    paths: List[Path]
    assembly_id: str = "00000"
    demo_ids: Optional[List[str]] = None
    source: str = "generated"
    seed: int = 0
    _cache: Dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.paths = [as_path(p) for p in self.paths]
        if self.demo_ids is None:
            self.demo_ids = [f"{self.assembly_id}-{i:04d}" for i in range(len(self.paths))]
        if len(self.demo_ids) != len(self.paths):
            raise ValueError("demo_ids and paths differ in length")
        if self.source not in ("generated", "imported"):
            raise ValueError(f"unknown demo source {self.source!r}")

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self) -> Iterator[Path]:
        return iter(self.paths)

    def __getitem__(self, i) -> Path:
        return self.paths[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, DemoSet):
            return NotImplemented
        return (
            self.assembly_id == other.assembly_id
            and self.demo_ids == other.demo_ids
            and self.source == other.source
            and self.seed == other.seed
            and len(self.paths) == len(other.paths)
            and all(np.array_equal(p.points, q.points) for p, q in zip(self.paths, other.paths))
        )

    def extended(self, paths: Sequence[PathLike]) -> "DemoSet":
        return DemoSet(list(self.paths) + [as_path(p) for p in paths], self.assembly_id, source=self.source, seed=self.seed)

    def padded(self) -> Tuple[np.ndarray, np.ndarray]:
        """``(M, Lmax, 3)`` array (tail rows repeat the last point) and lengths."""
        if "padded" not in self._cache:
            lengths = np.array([len(p) for p in self.paths], dtype=np.int64)
            lmax = int(lengths.max()) if len(lengths) else 1
            arr = np.empty((len(self.paths), lmax, 3))
            for m, p in enumerate(self.paths):
                arr[m, : len(p)] = p.points
                arr[m, len(p):] = p.points[-1]
            self._cache["padded"] = (arr, lengths)
        return self._cache["padded"]

    def signature_tables(self, level: int) -> np.ndarray:
        """``(M, Lmax, D)`` prefix signatures: ``[m, k]`` is the signature of demo m up to point k."""
        key = ("sig", level)
        if key not in self._cache:
            arr, lengths = self.padded()
            tables = np.zeros((len(self.paths), arr.shape[1], int(kernels.sig_size(level))))
            for m in range(len(self.paths)):
                t = kernels.signature_prefixes(arr[m], int(lengths[m]), level)
                tables[m, : lengths[m]] = t
                tables[m, lengths[m]:] = t[-1]
            self._cache[key] = tables
        return self._cache[key]

    def translated(self, offset) -> "DemoSet":
        return DemoSet([p.translated(offset) for p in self.paths], self.assembly_id, list(self.demo_ids), self.source, self.seed)
