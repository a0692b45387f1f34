import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from multcoal import MassVector, Partition
from multcoal.bfw import (build_walk, component_labels, component_masses, cut_free_intervals,
                          cut_walk_components, excursion_lengths, explore, merge_events,
                          partition_at_q)
from conftest import random_instance


def test_figure_components(figure):
    x, clocks = figure
    expl = explore(build_walk(x, clocks, 2.0))
    # hand exploration: {2,4,3,7} on [0.1,2.0], {6} on [2.3,2.6], {5,1} on [2.8,4.3]
    got = [(tuple(i + 1 for i in c.members), c.start, c.end) for c in expl.components]
    want = [((2, 4, 3, 7), 0.1, 2.0), ((6,), 2.3, 2.6), ((5, 1), 2.8, 4.3)]
    for (m1, a1, b1), (m2, a2, b2) in zip(got, want):
        assert m1 == m2
        assert math.isclose(a1, a2, abs_tol=1e-12) and math.isclose(b1, b2, abs_tol=1e-12)
    assert len(got) == 3
    assert expl.partition() == Partition.from_one_based([[2, 3, 4, 7], [1, 5], [6]])
    assert excursion_lengths(expl).allclose([1.9, 1.5, 0.3])
    free = np.array(expl.free_intervals)
    assert np.allclose(free, [[0.0, 0.1], [2.0, 2.3], [2.6, 2.8]])


def test_figure_walk_values(figure):
    x, clocks = figure
    w = build_walk(x, clocks, 2.0)
    assert np.allclose(w.jump_times, [0.1, 0.35, 0.7, 1.7, 2.3, 2.8, 3.0])
    assert math.isclose(float(w.value(0.1)), 0.7)
    assert math.isclose(float(w.left_limit(0.1)), -0.1)
    # back at the pre-component minimum when the first component closes
    assert math.isclose(float(w.value(2.0)), -0.1)


def test_figure_cut_walk(figure):
    x, clocks = figure
    w = build_walk(x, clocks, 2.0)
    expl = explore(w)
    cut = cut_free_intervals(w, expl)
    assert np.allclose(cut.jump_times, [0.25, 0.6, 1.6, 2.4])
    roots = [x.masses[c.root] for c in expl.components]
    iv = cut_walk_components(cut, roots)
    assert np.allclose(iv, [[0.0, 1.9], [1.9, 2.2], [2.2, 3.7]])


def test_q_validation(figure):
    x, clocks = figure
    with pytest.raises(ValueError):
        build_walk(x, clocks, 0.0)
    with pytest.raises(ValueError):
        partition_at_q(x, clocks, -1.0)
    with pytest.raises(ValueError):
        build_walk(x, clocks, 1e-310)
    assert partition_at_q(x, clocks, 0.0) == Partition.trivial(7)


def test_two_blocks_merge_threshold():
    x = MassVector([1.0, 1.0])
    from multcoal import ClockFamily
    clocks = ClockFamily([0.5, 2.0])
    # merged iff xi_(2)/q <= xi_(1)/q + x_(1), i.e. q >= 1.5
    assert len(partition_at_q(x, clocks, 1.49)) == 2
    assert len(partition_at_q(x, clocks, 1.5)) == 1
    ev = merge_events(x, clocks)
    assert len(ev) == 1 and math.isclose(ev[0].time, 1.5)


@given(st.integers(0, 2**32 - 1), st.integers(1, 40), st.floats(0.01, 20.0))
def test_vectorised_labels_match_sweep(seed, n, q):
    x, clocks = random_instance(seed, n)
    w = build_walk(x, clocks, q)
    expl = explore(w)
    lab = component_labels(w.jump_sizes, w.jump_times)
    assert lab.max() + 1 == len(expl.components)
    masses = component_masses(w.jump_sizes, w.jump_times)
    assert np.allclose(masses, [c.length for c in expl.components], rtol=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(1, 40), st.floats(0.01, 20.0))
def test_lengths_are_masses_and_conserve_total(seed, n, q):
    x, clocks = random_instance(seed, n)
    expl = explore(build_walk(x, clocks, q))
    lengths = excursion_lengths(expl)
    assert math.isclose(lengths.total, x.total, rel_tol=1e-9)
    assert lengths.allclose(expl.partition().masses(x), rtol=1e-9)


Q = st.one_of(st.just(0.0), st.floats(1e-6, 10.0))


@given(st.integers(0, 2**32 - 1), st.integers(2, 40), Q, Q)
def test_partitions_nested_in_q(seed, n, a, b):
    x, clocks = random_instance(seed, n)
    q1, q2 = sorted((a, b))
    assert partition_at_q(x, clocks, q1).refines(partition_at_q(x, clocks, q2))


@given(st.integers(0, 2**32 - 1), st.integers(2, 25))
def test_merge_events_replay_the_sweep(seed, n):
    x, clocks = random_instance(seed, n)
    ev = merge_events(x, clocks)
    assert len(ev) == n - 1
    times = [e.time for e in ev]
    assert times == sorted(times)
    # just before and after each threshold the sweep agrees with the replayed events
    label = list(range(n))
    for e in ev:
        before = partition_at_q(x, clocks, e.time * (1 - 1e-9))
        assert before == Partition.from_labels(label)
        keep, drop = label[e.left[0]], label[e.right[0]]
        label = [keep if v == drop else v for v in label]
        after = partition_at_q(x, clocks, e.time * (1 + 1e-9))
        assert Partition.from_labels(label).refines(after)


@given(st.integers(0, 2**32 - 1), st.integers(1, 30), st.floats(0.05, 5.0))
def test_cut_walk_recovers_component_lengths(seed, n, q):
    x, clocks = random_instance(seed, n)
    w = build_walk(x, clocks, q)
    expl = explore(w)
    cut = cut_free_intervals(w, expl)
    iv = np.array(cut_walk_components(cut, [x.masses[c.root] for c in expl.components]))
    assert np.allclose(iv[:, 1] - iv[:, 0], [c.length for c in expl.components], rtol=1e-9, atol=1e-12)


def test_csv_layout(figure):
    x, clocks = figure
    text = explore(build_walk(x, clocks, 2.0)).to_csv().splitlines()
    assert text[0] == "component_index,start,end,length,members"
    assert text[1].split(",")[-1] == "2;4;3;7"
