import math

import numpy as np
import pytest
from scipy import stats

from multcoal import MassVector, Partition
from multcoal.core import stream_rng
from multcoal.direct_mc import PartitionTrajectory, partition_at, simulate_direct


def test_deterministic_given_seed():
    x = MassVector([1.0, 0.7, 0.5, 0.2])
    a = simulate_direct(x, 10.0, seed=4)
    b = simulate_direct(x, 10.0, seed=4)
    assert a == b


def test_events_sorted_and_complete():
    x = MassVector([1.0, 0.7, 0.5, 0.2, 0.1])
    traj = simulate_direct(x, math.inf, seed=2)
    times = [e.time for e in traj.events]
    assert times == sorted(times) and len(times) == 4
    assert partition_at(traj, math.inf) == Partition((tuple(range(5)),))
    assert partition_at(traj, 0.0) == Partition.trivial(5)


def test_horizon_truncates():
    x = MassVector([1.0, 1.0, 1.0])
    traj = simulate_direct(x, 0.0, seed=1)
    assert traj.events == ()
    with pytest.raises(ValueError):
        simulate_direct(x, -1.0)


def test_json_round_trip():
    x = MassVector([1.0, 0.5, 0.5])
    traj = simulate_direct(x, math.inf, seed=3)
    again = PartitionTrajectory.from_json(traj.to_json())
    assert again == traj
    assert '"schema_version": 1' in traj.to_json()


def test_partition_nesting_along_trajectory():
    x = MassVector([1.0, 0.9, 0.4, 0.4, 0.3, 0.1])
    traj = simulate_direct(x, math.inf, seed=5)
    qs = [0.0] + [e.time for e in traj.events]
    for a, b in zip(qs, qs[1:]):
        assert partition_at(traj, a).refines(partition_at(traj, b))


def _merge_times(x, samples, seed):
    rng = stream_rng(seed, "test-direct")
    return np.array([simulate_direct(x, math.inf, rng=rng).events[0].time for _ in range(samples)])


def test_two_blocks_merge_at_rate_product():
    s = _merge_times(MassVector([2.0, 0.5]), 20_000, 1)
    assert stats.kstest(s, "expon", args=(0, 1.0)).pvalue > 0.001


def test_three_unit_blocks_absorption_law():
    # rates 3 then 2: P(T <= s) = 1 - 3 e^{-2s} + 2 e^{-3s}
    x = MassVector([1.0, 1.0, 1.0])
    rng = stream_rng(7, "test-direct-3")
    t = np.array([simulate_direct(x, math.inf, rng=rng).events[-1].time for _ in range(20_000)])
    cdf = lambda s: 1 - 3 * np.exp(-2 * s) + 2 * np.exp(-3 * s)
    assert stats.kstest(t, cdf).pvalue > 0.001


def test_pair_choice_proportional_to_product():
    # first merge of (1, 1, 2): pairs {0,1}, {0,2}, {1,2} with weights 1, 2, 2
    x = MassVector([2.0, 1.0, 1.0])
    rng = stream_rng(11, "test-pairs")
    counts = {}
    for _ in range(20_000):
        e = simulate_direct(x, math.inf, rng=rng).events[0]
        key = e.left + e.right
        counts[key] = counts.get(key, 0) + 1
    obs = [counts.get((0, 1), 0), counts.get((0, 2), 0), counts.get((1, 2), 0)]
    assert stats.chisquare(obs, np.array([2, 2, 1]) / 5 * sum(obs)).pvalue > 0.001
