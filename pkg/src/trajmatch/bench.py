"""Throughput of the batched reward kernels.

Each run times sequential and parallel evaluation of the DTW and signature
rewards against a demo set and checks that both give identical values.
``compare_backends`` repeats the run in a child process with the numba
kernels switched off, since the switch is read once at import.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time
from typing import Optional

import numpy as np

from ._jit import JIT_ENABLED
from .demos import DemoSet
from .dtw import dtw_rewards
from .signature import DEFAULT_LEVEL, signature_rewards


def _windows(demos: DemoSet, window_len: int, count: int, rng: np.random.Generator) -> list:
    """Demo segments with a little noise, so matches are realistic but not exact."""
    out = []
    for _ in range(count):
        p = demos[int(rng.integers(len(demos)))].points
        n = min(window_len, len(p))
        s = int(rng.integers(len(p) - n + 1))
        out.append(p[s: s + n] + rng.normal(0.0, 2e-4, size=(n, 3)))
    return out


def _time(fn, windows, iters: int):
    fn(windows[0])  # warm-up, includes compilation
    vals = []
    t0 = time.perf_counter()
    for k in range(iters):
        vals.append(fn(windows[k % len(windows)]))
    return time.perf_counter() - t0, vals


def run_bench(demos: DemoSet, window_len: int = 10, iters: int = 50, level: int = DEFAULT_LEVEL,
              seed: int = 0) -> dict:
    """Rewards/sec for each kernel and mode, plus the seq/par equality verdict.

    One "reward evaluation" scores one window against one demo.
    """
    if window_len < 1 or iters < 1:
        raise ValueError("window_len and iters must be >= 1")
    windows = _windows(demos, window_len, min(iters, 32), np.random.default_rng(seed))
    report = {"jit": JIT_ENABLED, "demos": len(demos), "window_len": window_len, "iters": iters, "kernels": {}}
    kernels = {
        "dtw": lambda par: (lambda w: dtw_rewards(w, demos, parallel=par)),
        "signature": lambda par: (lambda w: signature_rewards(w, demos, level, parallel=par)),
    }
    all_equal = True
    for name, make in kernels.items():
        t_seq, v_seq = _time(make(False), windows, iters)
        t_par, v_par = _time(make(True), windows, iters)
        equal = all(np.array_equal(a, b) for a, b in zip(v_seq, v_par))
        all_equal &= equal
        evals = iters * len(demos)
        report["kernels"][name] = {
            "seq_per_s": evals / t_seq,
            "par_per_s": evals / t_par,
            "speedup": t_seq / t_par,
            "identical": equal,
        }
    report["identical"] = all_equal
    return report


def format_report(report: dict) -> str:
    mode = "numba" if report["jit"] else "python"
    lines = [f"backend={mode} demos={report['demos']} window_len={report['window_len']} iters={report['iters']}"]
    for name, r in report["kernels"].items():
        lines.append(
            f"{name:<10} seq {r['seq_per_s']:>12.0f}/s  par {r['par_per_s']:>12.0f}/s  "
            f"speedup {r['speedup']:5.2f}  identical={r['identical']}"
        )
    return "\n".join(lines)


def compare_backends(demos_file: str, window_len: int = 10, iters: int = 50, seed: int = 0,
                     timeout: Optional[float] = None) -> dict:
    """Run the bench with and without numba in child processes; returns both reports."""
    out = {}
    for label, flag in (("numba", "0"), ("python", "1")):
        env = dict(os.environ, TRAJMATCH_NO_JIT=flag)
        cmd = [sys.executable, "-m", "trajmatch.bench", demos_file, "--window-len", str(window_len),
               "--iters", str(iters), "--seed", str(seed), "--json"]
        res = subprocess.run(cmd, env=env, capture_output=True, text=True, timeout=timeout)
        if res.returncode != 0:
            raise RuntimeError(f"bench child ({label}) failed: {res.stderr.strip().splitlines()[-1:]}")
        out[label] = json.loads(res.stdout)
    return out


def main(argv=None) -> int:
    from .io import load_demoset

    ap = argparse.ArgumentParser(prog="python -m trajmatch.bench")
    ap.add_argument("demos")
    ap.add_argument("--window-len", type=int, default=10)
    ap.add_argument("--iters", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)
    rep = run_bench(load_demoset(args.demos), args.window_len, args.iters, seed=args.seed)
    print(json.dumps(rep) if args.json else format_report(rep))
    return 0 if rep["identical"] else 1


if __name__ == "__main__":
    sys.exit(main())
