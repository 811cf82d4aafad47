import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from trajmatch import kernels
from trajmatch.demos import DemoSet
from trajmatch.signature import (
    Signature,
    batch_signature_reward,
    prefix_signatures,
    signature,
    signature_distance,
    signature_imitation_reward,
    signature_rewards,
    signature_size,
)

from conftest import paths
from oracles import direct_signature

levels = st.integers(1, 3)

# multiples of 2**-10: every increment, product and partial sum is exact in
# binary64, so translated and untranslated paths give bit-identical terms
dyadic = st.integers(-1024, 1024).map(lambda k: k / 1024.0)


def rel_err(got, ref):
    return float(np.max(np.abs(got - ref)) / max(1.0, float(np.max(np.abs(ref)))))


def test_sizes():
    assert [signature_size(L) for L in (1, 2, 3, 4)] == [4, 13, 40, 121]


def test_single_step_examples():
    p = [[0, 0, 0], [1, 2, 3]]
    assert np.array_equal(signature(p, 1).terms, [1, 1, 2, 3])
    s2 = signature(p, 2)
    assert np.array_equal(s2.block(2), np.outer([1, 2, 3], [1, 2, 3]))


@given(levels)
def test_single_point(level):
    t = signature([[0.3, -1.0, 2.0]], level).terms
    assert t[0] == 1.0 and not np.any(t[1:])


@given(paths(1, 6), levels)
def test_matches_direct_summation(pts, level):
    ref, _ = direct_signature(pts, level)
    assert rel_err(signature(pts, level).terms, ref) <= 1e-12


@given(paths(1, 6), levels)
def test_prefix_rows_equal_signatures(pts, level):
    table = prefix_signatures(pts, level)
    for k in range(len(pts)):
        assert np.array_equal(table[k], signature(pts[: k + 1], level).terms)


@given(st.integers(1, 6).flatmap(lambda n: st.lists(st.tuples(dyadic, dyadic, dyadic), min_size=n, max_size=n)),
       st.tuples(dyadic, dyadic, dyadic), levels)
def test_translation_is_bit_exact_on_dyadic_grid(pts, offset, level):
    pts = np.array(pts)
    moved = pts + 4.0 * np.array(offset)
    assert np.array_equal(signature(pts, level).terms, signature(moved, level).terms)


@given(paths(1, 6), st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5)), levels)
def test_translation_close_for_general_floats(pts, offset, level):
    a = signature(pts, level).terms
    b = signature(pts + np.array(offset), level).terms
    # rounding of the shifted coordinates only; scale by coordinate magnitude
    scale = max(1.0, float(np.max(np.abs(pts + np.array(offset)))))
    assert np.max(np.abs(a - b)) <= 1e-12 * scale ** level * 10


@given(paths(1, 6), st.data(), levels)
def test_duplicated_points_change_nothing(pts, data, level):
    idx = data.draw(st.lists(st.integers(0, len(pts) - 1), min_size=1, max_size=4))
    dup = np.insert(pts, sorted(idx), pts[sorted(idx)], axis=0)
    assert rel_err(signature(dup, level).terms, signature(pts, level).terms) <= 1e-12


def test_distance_examples():
    p = [[0, 0, 0], [1, 2, 3], [0.5, 0.1, 0.0]]
    assert signature_distance(signature(p), signature(p)) == 0.0
    moved = np.array(p) + 5.0
    assert signature_distance(signature(p), signature(moved)) < 1e-12
    d = signature_distance(signature([[0, 0, 0], [1, 0, 0]], 1), signature([[0, 0, 0], [0, 1, 0]], 1))
    assert d == math.sqrt(2.0)
    with pytest.raises(ValueError):
        signature_distance(signature(p, 1), signature(p, 2))


def test_level_and_shape_checks():
    with pytest.raises(ValueError):
        signature([[0, 0, 0]], 0)
    with pytest.raises(ValueError):
        Signature(2, np.zeros(5))


def test_reward_examples():
    demo = np.array([[0, 0, 0.02 - 0.001 * k] for k in range(21)])
    assert signature_imitation_reward(demo, demo) == 1.0
    dup = np.insert(demo, [3, 7, 7], demo[[3, 7, 7]], axis=0)
    assert signature_imitation_reward(dup, demo) == signature_imitation_reward(demo, demo)


def test_batch_tie_break_and_singleton(rng):
    a, b = rng.random((6, 3)), rng.random((8, 3))
    ee = b[:5]
    single = batch_signature_reward(ee, DemoSet([b]))
    assert single == (signature_imitation_reward(ee, b), 0)
    r, i = batch_signature_reward(ee, DemoSet([a, b, b]))
    assert i == 1 and r == single[0]


def test_batch_matches_single_demo_rewards(rng):
    demos = DemoSet([rng.random((int(rng.integers(3, 20)), 3)) for _ in range(20)])
    ee = rng.random((7, 3))
    per = signature_rewards(ee, demos)
    ref = [signature_imitation_reward(ee, d) for d in demos]
    assert np.allclose(per, ref, rtol=1e-12, atol=0)
    assert np.array_equal(per, signature_rewards(ee, demos, parallel=True))


def test_compiled_and_interpreted_kernels_agree(rng):
    p = rng.random((9, 3))
    assert np.array_equal(kernels.signature_of(p, 9, 3), kernels.signature_of.py_func(p, 9, 3))
