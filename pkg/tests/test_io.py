import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from trajmatch.curriculum import CurriculumState
from trajmatch.demos import DemoSet
from trajmatch.env import EnvConfig, generate_disassembly_demos
from trajmatch.io import (
    DataError,
    ExperimentConfig,
    load_checkpoint,
    load_config,
    load_demoset,
    load_points,
    parse_config,
    render_config,
    save_checkpoint,
    save_config,
    save_demoset,
)
from trajmatch.rewards import RewardConfig

any_float = st.floats(allow_nan=False, allow_infinity=False, width=64)
demo_paths = st.integers(1, 12).flatmap(lambda n: arrays(np.float64, (n, 3), elements=any_float))


@given(st.lists(demo_paths, min_size=1, max_size=6), st.text(min_size=1, max_size=8),
       st.sampled_from(["generated", "imported"]), st.integers(-2**40, 2**40))
def test_demoset_round_trip_is_exact(tmp_path_factory, paths, assembly, source, seed):
    demos = DemoSet(paths, assembly_id=assembly, source=source, seed=seed)
    f = tmp_path_factory.mktemp("d") / "demos.jsonl"
    save_demoset(demos, f)
    back = load_demoset(f)
    assert back == demos
    for p, q in zip(demos, back):
        assert p.points.tobytes() == q.points.tobytes()


def test_hundred_demo_round_trip(tmp_path):
    demos = generate_disassembly_demos(EnvConfig(), 100, np.random.default_rng(1))
    f = tmp_path / "d.jsonl"
    save_demoset(demos, f)
    assert load_demoset(f) == demos
    save_demoset(load_demoset(f), tmp_path / "e.jsonl")
    assert f.read_bytes() == (tmp_path / "e.jsonl").read_bytes()


def test_nan_names_the_line(tmp_path):
    f = tmp_path / "bad.jsonl"
    good = {"demo_id": "a", "assembly_id": "00015", "points": [[0, 0, 0]], "source": "generated", "seed": 0}
    f.write_text(json.dumps(good) + "\n" + json.dumps(dict(good, points=[[0, float("nan"), 0]])) + "\n")
    with pytest.raises(DataError, match=r"bad.jsonl:2: non-finite"):
        load_demoset(f)


@pytest.mark.parametrize("body, msg", [
    ("", "empty dataset"),
    ("\n\n", "empty dataset"),
    ("{not json\n", ":1: malformed"),
    ('{"demo_id": "a"}\n', ":1: missing field"),
    ('{"demo_id": "a", "assembly_id": "1", "points": [], "source": "generated", "seed": 0}\n', ":1: 'points'"),
    ('{"demo_id": "a", "assembly_id": "1", "points": [[0, 0]], "source": "generated", "seed": 0}\n', ":1: every point"),
    ('{"demo_id": "a", "assembly_id": "1", "points": [[0, 0, 0]], "source": "scraped", "seed": 0}\n', ":1: unknown source"),
])
def test_load_errors(tmp_path, body, msg):
    f = tmp_path / "x.jsonl"
    f.write_text(body)
    with pytest.raises(DataError, match=msg):
        load_demoset(f)


def test_mixed_metadata_rejected(tmp_path):
    f = tmp_path / "x.jsonl"
    rec = {"demo_id": "a", "assembly_id": "1", "points": [[0, 0, 0]], "source": "generated", "seed": 0}
    f.write_text(json.dumps(rec) + "\n" + json.dumps(dict(rec, seed=1)) + "\n")
    with pytest.raises(DataError, match=":2:"):
        load_demoset(f)


def test_load_points_formats(tmp_path):
    a = tmp_path / "a.txt"
    a.write_text("# x y z\n0 0 0.5\n0.1,0.2,0.3\n")
    assert load_points(a).points.tolist() == [[0, 0, 0.5], [0.1, 0.2, 0.3]]
    b = tmp_path / "b.json"
    b.write_text("[[1, 2, 3]]")
    assert load_points(b).points.tolist() == [[1, 2, 3]]
    c = tmp_path / "c.txt"
    c.write_text("1 2\n")
    with pytest.raises(DataError, match="c.txt:1"):
        load_points(c)


positive = st.floats(1e-6, 10.0)
configs = st.builds(
    ExperimentConfig,
    env=st.builds(EnvConfig, channel_half_width=st.floats(1e-4, 1e-3), jitter=st.floats(0.0, 0.5),
                   max_steps=st.integers(0, 500), demo_clear_height=positive),
    reward=st.builds(RewardConfig, omega_b=positive, omega_i=positive, goal_scale=positive,
                     sapu_weight=st.floats(0.0, 1.0), signature_level=st.integers(1, 4)),
    curriculum=st.builds(CurriculumState, num_stages=st.integers(2, 6), window=st.integers(1, 200),
                         threshold=st.floats(0.0, 1.0)),
    schemes=st.lists(st.sampled_from(["none", "state", "dtw", "signature"]), min_size=1, unique=True).map(tuple),
    episodes_per_scheme=st.integers(1, 10_000),
    root_seed=st.integers(0, 2**63),
    num_demos=st.integers(1, 500),
    advance_curriculum=st.booleans(),
    demos_path=st.one_of(st.none(), st.text(min_size=1, max_size=20)),
)


@given(configs)
def test_config_render_parse_round_trip(cfg):
    assert parse_config(render_config(cfg)) == cfg


def test_config_file_round_trip(tmp_path):
    cfg = ExperimentConfig(reward=RewardConfig(omega_i=1e-5), episodes_per_scheme=7)
    save_config(cfg, tmp_path / "c.yaml")
    assert load_config(tmp_path / "c.yaml") == cfg


def test_config_accepts_json_and_partial_documents():
    cfg = parse_config('{"episodes_per_scheme": 3, "env": {"jitter": 0.2}}')
    assert cfg.episodes_per_scheme == 3 and cfg.env.jitter == 0.2
    assert parse_config("") == ExperimentConfig()


@pytest.mark.parametrize("text, key", [
    ("colour: red", "colour"),
    ("env:\n  widht: 1", "env.widht"),
    ("reward:\n  omega: 1", "reward.omega"),
    ("curriculum:\n  trailing_successes: []", "curriculum.trailing_successes"),
])
def test_unknown_keys_fail_with_path(text, key):
    with pytest.raises(KeyError, match=key):
        parse_config(text)


def test_invalid_values_fail():
    with pytest.raises(ValueError):
        parse_config("schemes: [dtw, magic]")
    with pytest.raises(ValueError):
        parse_config("reward:\n  omega_i: -1")
    with pytest.raises(DataError):
        parse_config("env: [1, 2]")


def test_checkpoint_round_trip(tmp_path):
    states = {"dtw": CurriculumState(stage=2, trailing_successes=(True, False)), "none": CurriculumState()}
    save_checkpoint(states, tmp_path / "c.json")
    assert load_checkpoint(tmp_path / "c.json") == states
