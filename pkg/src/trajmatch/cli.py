"""Command-line entry point: ``trajmatch <command> ...``.

Every command exits 0 on success; on any error it prints one ``error: ...``
line to stderr and exits 2.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path as FsPath

import numpy as np

from . import io as tio
from . import kernels
from .demos import DemoSet
from .dtw import dtw_cost, dtw_rewards, match_segment
from .env import generate_disassembly_demos
from .experiment import compare_schemes
from .path import extract_segment, window
from .signature import DEFAULT_LEVEL, prefix_signatures


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(f"{self.prog}: {message}")


def _imitation_rows(demos: DemoSet, path, scheme: str, level: int, window_len: int):
    """``(t, reward, best_demo)`` per path point; DTW uses the window ending at ``t``."""
    pts = path.points
    padded, lengths = demos.padded()
    rows = []
    if scheme == "signature":
        sigs = prefix_signatures(path, level)
        tables = demos.signature_tables(level)
    for t in range(len(path)):
        if scheme == "state":
            per = np.empty(len(demos))
            for m in range(len(demos)):
                per[m] = kernels.squash(kernels.nearest_demo_distance(pts[t], padded[m: m + 1], lengths[m: m + 1]))
        elif scheme == "dtw":
            per = dtw_rewards(window(path, t, window_len), demos)
        else:
            per = np.empty(len(demos))
            kernels.signature_rewards_seq(sigs[t], np.ascontiguousarray(pts[t]), padded, lengths, tables, per)
        best = int(kernels.argmax_first(per))
        rows.append((t, float(per[best]), best))
    return rows


def cmd_demos_gen(args) -> int:
    cfg = tio.load_config(args.config) if args.config else tio.ExperimentConfig()
    if args.count < 1:
        raise CliError("--count must be >= 1")
    demos = generate_disassembly_demos(cfg.env, args.count, np.random.default_rng(args.seed),
                                       assembly_id=args.assembly_id, seed=args.seed)
    tio.save_demoset(demos, args.out)
    print(f"wrote {len(demos)} demos to {args.out}")
    return 0


def cmd_reward_eval(args) -> int:
    if args.level is not None and args.scheme != "signature":
        raise CliError(f"--level only applies to the signature scheme, not {args.scheme!r}")
    level = DEFAULT_LEVEL if args.level is None else args.level
    if level < 1:
        raise CliError("--level must be >= 1")
    if args.window_len < 1:
        raise CliError("--window-len must be >= 1")
    demos = tio.load_demoset(args.demos)
    path = tio.load_points(args.path)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["t", "reward", "best_demo"])
    for t, r, b in _imitation_rows(demos, path, args.scheme, level, args.window_len):
        w.writerow([t, repr(r), b])
    return 0


def cmd_match(args) -> int:
    if args.scheme != "dtw":
        raise CliError(f"match supports only the dtw scheme, got {args.scheme!r}")
    demos = tio.load_demoset(args.demos)
    win = tio.load_points(args.window)
    best, best_cost, best_seg, best_align = -1, np.inf, None, None
    for m, d in enumerate(demos):
        i0, i1 = match_segment(win, d)
        res = dtw_cost(win, extract_segment(d, i0, i1), with_alignment=True)
        if res.cost < best_cost:
            best, best_cost, best_seg, best_align = m, res.cost, (i0, i1), res.alignment
    print(f"best_demo {best}")
    print(f"demo_id {demos.demo_ids[best]}")
    print(f"cost {best_cost!r}")
    print(f"segment {best_seg[0]} {best_seg[1]}")
    print("alignment window_index demo_index")
    for i, j in best_align:
        print(f"{i} {best_seg[0] + j}")
    return 0


def _run_dir(base: FsPath) -> FsPath:
    stamp = time.strftime("%Y%m%d-%H%M%S")
    d = base / f"run-{stamp}"
    k = 1
    while d.exists():
        d = base / f"run-{stamp}-{k}"
        k += 1
    d.mkdir(parents=True)
    return d


def cmd_experiment_run(args) -> int:
    cfg = tio.load_config(args.config)
    out = _run_dir(FsPath(args.out if args.out else cfg.out_dir))
    if cfg.demos_path:
        demos = tio.load_demoset(cfg.demos_path)
    else:
        demos = generate_disassembly_demos(cfg.env, cfg.num_demos, np.random.default_rng([cfg.root_seed, 2**31]),
                                           seed=cfg.root_seed)
    tio.save_config(cfg, out / "config.yaml")
    tio.save_demoset(demos, out / "demos.jsonl")
    curriculum = cfg.curriculum
    if args.resume:
        curriculum = tio.load_checkpoint(args.resume)
        tio.save_checkpoint(curriculum, out / "resumed_from.json")
    report = compare_schemes(cfg.env, cfg.episodes_per_scheme, cfg.root_seed, reward_cfg=cfg.reward,
                             curriculum=curriculum, demos=demos, schemes=cfg.schemes,
                             advance_curriculum=cfg.advance_curriculum, workers=cfg.workers)
    (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    (out / "report.txt").write_text(report.to_table() + "\n", encoding="utf-8")
    tio.save_checkpoint(report.curriculum, out / "curriculum.json")
    print(report.to_table())
    print(f"outputs in {out}")
    return 0


def cmd_bench(args) -> int:
    from .bench import compare_backends, format_report, run_bench

    if args.backends:
        reps = compare_backends(args.demos, args.window_len, args.iters, args.seed)
        for rep in reps.values():
            print(format_report(rep))
        ok = all(r["identical"] for r in reps.values())
        nb, py = reps["numba"]["kernels"], reps["python"]["kernels"]
        for name in nb:
            print(f"{name:<10} numba/python sequential speedup {nb[name]['seq_per_s'] / py[name]['seq_per_s']:.1f}x")
    else:
        rep = run_bench(tio.load_demoset(args.demos), args.window_len, args.iters, seed=args.seed)
        print(format_report(rep))
        ok = rep["identical"]
    if not ok:
        raise CliError("parallel and sequential rewards differ")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="trajmatch", description="Trajectory-matching rewards for insertion from reversed disassemblies.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    demos = sub.add_parser("demos", help="demo sets").add_subparsers(dest="action", required=True, parser_class=_Parser)
    g = demos.add_parser("gen", help="generate reversed disassembly demos")
    g.add_argument("--config", help="experiment config; only its env section is used")
    g.add_argument("--count", type=int, default=100)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--assembly-id", default="00000")
    g.add_argument("--out", required=True)
    g.set_defaults(fn=cmd_demos_gen)

    reward = sub.add_parser("reward", help="imitation rewards").add_subparsers(dest="action", required=True, parser_class=_Parser)
    r = reward.add_parser("eval", help="per-timestep imitation reward of a path, as CSV")
    r.add_argument("--demos", required=True)
    r.add_argument("--path", required=True, help="text file with x y z per line")
    r.add_argument("--scheme", required=True, choices=("state", "dtw", "signature"))
    r.add_argument("--level", type=int, help="signature level (signature scheme only)")
    r.add_argument("--window-len", type=int, default=10, help="DTW window length")
    r.set_defaults(fn=cmd_reward_eval)

    m = sub.add_parser("match", help="best-matching demo for a window")
    m.add_argument("--demos", required=True)
    m.add_argument("--window", required=True)
    m.add_argument("--scheme", default="dtw")
    m.set_defaults(fn=cmd_match)

    exp = sub.add_parser("experiment", help="scheme comparison").add_subparsers(dest="action", required=True, parser_class=_Parser)
    e = exp.add_parser("run", help="run compare_schemes from a config")
    e.add_argument("--config", required=True)
    e.add_argument("--out", help="parent directory for the run (default: config out_dir)")
    e.add_argument("--resume", help="curriculum.json from an earlier run; each scheme continues from its stage")
    e.set_defaults(fn=cmd_experiment_run)

    b = sub.add_parser("bench", help="reward kernel throughput")
    b.add_argument("--demos", required=True)
    b.add_argument("--window-len", type=int, default=10)
    b.add_argument("--iters", type=int, default=50)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--backends", action="store_true", help="also time the pure-Python fallback")
    b.set_defaults(fn=cmd_bench)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.fn(args)
    except (CliError, tio.DataError, OSError, ValueError, KeyError, RuntimeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}".splitlines()[0], file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
