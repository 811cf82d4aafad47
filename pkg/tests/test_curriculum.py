import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from trajmatch.curriculum import (
    CurriculumState,
    curriculum_weight,
    record_and_maybe_advance,
    sample_initial_height,
)


def feed(state, outcomes):
    for ok in outcomes:
        state = record_and_maybe_advance(state, ok)
    return state


def test_default_bounds():
    s = CurriculumState()
    assert (s.h_min, s.h_max) == (0.010, 0.020)
    assert s.lower_bound(4) == pytest.approx(0.018, abs=1e-15)


def test_samples_respect_first_and_last_stage(rng):
    first = CurriculumState()
    last = CurriculumState(stage=4)
    assert all(0.010 <= sample_initial_height(first, rng) <= 0.020 for _ in range(1000))
    assert all(0.018 <= sample_initial_height(last, rng) <= 0.020 for _ in range(1000))


def test_sampling_is_deterministic():
    s = CurriculumState()
    a = [sample_initial_height(s, np.random.default_rng(5)) for _ in range(3)]
    b = [sample_initial_height(s, np.random.default_rng(5)) for _ in range(3)]
    assert a == b


def test_advances_on_a_full_good_window():
    s = feed(CurriculumState(), [True] * 90 + [False] * 10)
    assert s.stage == 2
    assert s.trailing_successes == ()


def test_needs_a_full_window():
    s = feed(CurriculumState(), [True] * 99)
    assert s.stage == 1


def test_threshold_is_strict():
    s = feed(CurriculumState(), [True] * 80 + [False] * 20)
    assert s.stage == 1
    s = feed(CurriculumState(), [True] * 70 + [False] * 30)
    assert s.stage == 1


def test_last_stage_is_terminal():
    s = feed(CurriculumState(stage=4), [True] * 300)
    assert s.stage == 4


def test_weight():
    assert curriculum_weight(CurriculumState()) == 0.25
    assert curriculum_weight(CurriculumState(stage=4)) == 1.0


def test_validation():
    with pytest.raises(ValueError):
        CurriculumState(stage=5)
    with pytest.raises(ValueError):
        CurriculumState(h_min_final=0.021)
    with pytest.raises(ValueError):
        CurriculumState(h_min_final=0.009)
    with pytest.raises(KeyError, match="curriculum.speed"):
        CurriculumState.from_dict({"speed": 1})


def test_round_trip():
    s = feed(CurriculumState(window=10), [True, False, True])
    assert CurriculumState.from_dict(s.to_dict()) == s


@given(st.lists(st.booleans(), max_size=500), st.integers(1, 6), st.integers(1, 50))
def test_stage_monotone_and_bounds_hold(outcomes, stages, window):
    s = CurriculumState(num_stages=stages, window=window, h_min_final=0.018 if stages > 1 else 0.010)
    rng = np.random.default_rng(0)
    prev_stage, prev_lo = s.stage, s.h_min
    for ok in outcomes:
        s = record_and_maybe_advance(s, ok)
        assert s.stage >= prev_stage
        if s.stage > prev_stage:
            assert s.h_min > prev_lo
        assert s.h_max == 0.020
        h = sample_initial_height(s, rng)
        assert s.h_min <= h <= s.h_max
        prev_stage, prev_lo = s.stage, s.h_min


def test_first_stage_spans_the_full_range():
    s = CurriculumState(h_min_initial=0.004)
    assert s.h_min == s.h_min_initial == 0.004


@given(st.lists(st.booleans(), max_size=400))
def test_weight_never_decreases(outcomes):
    s = CurriculumState(window=10)
    w = curriculum_weight(s)
    for ok in outcomes:
        s = record_and_maybe_advance(s, ok)
        assert curriculum_weight(s) >= w
        w = curriculum_weight(s)
