import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from multcoal import ClockFamily, DegenerateRateError, MassVector, OrderedLengths, Partition
from multcoal.core import clock_matrix, draw_clocks, moments, stream_rng


def test_mass_vector_rejects_bad_input():
    with pytest.raises(DegenerateRateError):
        MassVector([1.0, 0.0])
    with pytest.raises(ValueError):
        MassVector([0.5, 1.0])
    with pytest.raises(ValueError):
        MassVector([1.0, float("nan")])
    with pytest.raises(ValueError):
        MassVector([])


def test_mass_vector_is_read_only_and_round_trips():
    x = MassVector([2.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        x.masses[0] = 5.0
    assert MassVector.from_json(x.to_json()).masses.tolist() == [2.0, 1.0, 1.0]
    assert MassVector.sorted([1, 3, 2]).masses.tolist() == [3.0, 2.0, 1.0]


@given(st.lists(st.floats(0.01, 10.0), min_size=1, max_size=40))
def test_moments_match_direct_sums(vals):
    x = MassVector.sorted(vals)
    m = moments(x)
    assert math.isclose(m.sigma1, sum(vals), rel_tol=1e-12)
    assert math.isclose(m.sigma2, sum(v * v for v in vals), rel_tol=1e-12)
    assert math.isclose(m.sigma3, sum(v ** 3 for v in vals), rel_tol=1e-12)


def test_streams_are_deterministic_and_distinct():
    a = stream_rng(3, "clocks", 0).random(5)
    b = stream_rng(3, "clocks", 0).random(5)
    c = stream_rng(3, "clocks", 1).random(5)
    d = stream_rng(4, "clocks", 0).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_clock_family_order_and_ties():
    c = ClockFamily([3.0, 1.0, 2.0])
    assert c.order.tolist() == [1, 2, 0]
    assert c.sorted_xi.tolist() == [1.0, 2.0, 3.0]
    with pytest.raises(ValueError):
        ClockFamily([1.0, 1.0])
    with pytest.raises(ValueError):
        ClockFamily([1.0, -1.0])


def test_draw_clocks_pure_function_of_seed():
    x = MassVector([1.0, 0.5, 0.25])
    assert np.array_equal(draw_clocks(x, 9).xi, draw_clocks(x, 9).xi)
    assert not np.array_equal(draw_clocks(x, 9).xi, draw_clocks(x, 9, stream=1).xi)


def test_clock_rates_match_masses():
    # Exp(x_i) has mean 1/x_i
    x = MassVector([4.0, 1.0])
    xi = clock_matrix(x, 200_000, stream_rng(0, "t"))
    assert np.allclose(xi.mean(axis=0), [0.25, 1.0], rtol=0.01)


def test_clock_matrix_rejects_zero_rate():
    with pytest.raises(DegenerateRateError):
        clock_matrix([1.0, 0.0], 3, stream_rng(0))


def test_first_clock_is_size_biased():
    x = MassVector([3.0, 1.0])
    xi = clock_matrix(x, 100_000, stream_rng(1, "sb"))
    p = np.mean(np.argmin(xi, axis=1) == 0)
    assert abs(p - 0.75) < 4 * math.sqrt(0.75 * 0.25 / 100_000)


def test_partition_canonical_form_and_refinement():
    p = Partition(((4, 0), (2,), (3, 1)))
    assert p.blocks == ((0, 4), (1, 3), (2,))
    assert str(p) == "{{1,5},{2,4},{3}}"
    assert Partition.from_labels([7, 3, 9, 3, 7]) == p
    assert Partition.from_one_based(p.to_one_based()) == p
    assert json.loads(p.to_json()) == [[1, 5], [2, 4], [3]]
    assert Partition.trivial(5).refines(p)
    assert p.refines(Partition(((0, 1, 2, 3, 4),)))
    assert not p.refines(Partition.trivial(5))
    with pytest.raises(ValueError):
        Partition(((0, 1), (1, 2)))


def test_partition_masses():
    x = MassVector([1.1, 0.8, 0.5, 0.4, 0.4, 0.3, 0.2])
    p = Partition.from_one_based([[2, 3, 4, 7], [1, 5], [6]])
    assert p.masses(x).allclose([1.9, 1.5, 0.3])


def test_ordered_lengths():
    v = OrderedLengths.from_values([0.3, 0.0, 1.5, 1.9])
    assert v.lengths.tolist() == [1.9, 1.5, 0.3]
    assert v.largest == 1.9 and math.isclose(v.total, 3.7)
    with pytest.raises(ValueError):
        OrderedLengths([0.1, 0.2])
    assert OrderedLengths.from_values([]).largest == 0.0
