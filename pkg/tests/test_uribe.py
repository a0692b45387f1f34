import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from multcoal import ClockFamily, MassVector, Partition
from multcoal.bfw import merge_events, partition_at_q
from multcoal.core import stream_rng
from multcoal.uribe import (TieError, _dynamic_events, build_diagram, check_S_pi_independence,
                            mass_process, pair_rate, run_coalescent, sample_coalescent,
                            size_biased_law)
from conftest import FIG_X, FIG_XI, random_instance


def brute_stop_times(x, clocks):
    """O(n^2) minimum over all lower lines of the meeting time."""
    order = clocks.order
    t = clocks.xi[order]
    s = np.concatenate([[0.0], np.cumsum(x.masses[order])[:-1]])
    out = [math.inf]
    tg = [-1]
    for k in range(1, len(t)):
        cand = [(t[k] - t[j]) / (s[k] - s[j]) for j in range(k)]
        out.append(min(cand))
        tg.append(int(np.argmin(cand)))
    return np.array(out), np.array(tg)


def test_figure_stop_times_exact():
    # exact rational arithmetic on the worked example
    x = [Fraction(str(v)) for v in FIG_X]
    xi = [Fraction(str(v)) for v in FIG_XI]
    order = sorted(range(7), key=lambda i: xi[i])
    t = [xi[i] for i in order]
    s = [sum((x[i] for i in order[:k]), Fraction(0)) for k in range(7)]
    exact = [min((t[k] - t[j]) / (s[k] - s[j]) for j in range(k)) for k in range(1, 7)]
    assert exact == [Fraction(5, 8), Fraction(1), Fraction(32, 17), Fraction(44, 19),
                     Fraction(27, 11), Fraction(1)]
    d = build_diagram(MassVector(FIG_X), ClockFamily(FIG_XI))
    assert np.allclose(d.stop_times[1:], [float(v) for v in exact], rtol=1e-12)
    assert (d.targets[1:] + 1).tolist() == [1, 1, 1, 1, 1, 6]
    assert (d.order + 1).tolist() == [2, 4, 3, 7, 6, 5, 1]


def test_figure_coalescent(figure):
    x, clocks = figure
    uc = run_coalescent(build_diagram(x, clocks))
    assert uc.partition_at(2.0) == Partition.from_one_based([[2, 3, 4, 7], [1, 5], [6]])
    assert mass_process(uc, 2.0).allclose([1.9, 1.5, 0.3])
    assert uc.partition_at(0.0) == Partition.trivial(7)
    assert math.isclose(uc.connectivity_time, 27 / 11)


def test_golden_tie_only_matters_for_strict_mode():
    # the two stop times equal to 1 are exact ties in rational arithmetic
    d = build_diagram(MassVector(FIG_X), ClockFamily(FIG_XI))
    if d.has_ties:
        with pytest.raises(TieError):
            build_diagram(MassVector(FIG_X), ClockFamily(FIG_XI), strict=True)
    x = MassVector([1.0, 1.0, 1.0])
    with pytest.raises(TieError):
        build_diagram(x, ClockFamily([1.0, 2.0, 3.0]), strict=True)


@given(st.integers(0, 2**32 - 1), st.integers(2, 40))
def test_hull_matches_brute_force(seed, n):
    x, clocks = random_instance(seed, n)
    d = build_diagram(x, clocks)
    s, tg = brute_stop_times(x, clocks)
    assert np.allclose(d.stop_times[1:], s[1:], rtol=1e-12)
    # the minimiser may be non-unique only on exact ties
    for k in range(1, n):
        if d.targets[k] != tg[k]:
            j = d.targets[k]
            o = clocks.order
            t = clocks.xi[o]
            ss = np.concatenate([[0.0], np.cumsum(x.masses[o])[:-1]])
            assert math.isclose((t[k] - t[j]) / (ss[k] - ss[j]), s[k], rel_tol=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(2, 40))
def test_static_events_equal_adjacent_line_rule(seed, n):
    x, clocks = random_instance(seed, n)
    d = build_diagram(x, clocks)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        uc = run_coalescent(d)
    dyn = _dynamic_events(d)
    assert [(j, k) for _, j, k in sorted(dyn, key=lambda e: (e[0], e[2]))] == \
           [(j, k) for _, j, k in uc.events]
    assert np.allclose([e[0] for e in sorted(dyn)], [e[0] for e in uc.events], rtol=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(1, 40))
def test_exact_coupling_with_walk_merges(seed, n):
    x, clocks = random_instance(seed, n)
    uc = run_coalescent(build_diagram(x, clocks))
    ev = merge_events(x, clocks)
    assert [(e.left, e.right) for e in uc.merges] == [(e.left, e.right) for e in ev]
    assert np.allclose([e.time for e in uc.merges], [e.time for e in ev], rtol=1e-9)


@given(st.integers(0, 2**32 - 1), st.integers(2, 30), st.one_of(st.just(0.0), st.floats(1e-6, 20.0)))
def test_partition_agrees_with_walk(seed, n, q):
    x, clocks = random_instance(seed, n)
    uc = run_coalescent(build_diagram(x, clocks))
    assert uc.partition_at(q) == partition_at_q(x, clocks, q)
    assert math.isclose(mass_process(uc, q).total, x.total, rel_tol=1e-9)


@given(st.integers(0, 2**32 - 1), st.integers(2, 40))
def test_connectivity_time_formula(seed, n):
    x, clocks = random_instance(seed, n)
    uc = run_coalescent(build_diagram(x, clocks))
    o = clocks.order
    t = clocks.xi[o]
    s = np.cumsum(x.masses[o])
    want = max((t[l] - t[0]) / s[l - 1] for l in range(1, n))
    assert math.isclose(uc.connectivity_time, want, rel_tol=1e-12)


def test_mass_process_validation(figure):
    x, clocks = figure
    uc = run_coalescent(build_diagram(x, clocks))
    with pytest.raises(ValueError):
        mass_process(uc, -1.0)


def test_size_biased_law_sums_to_one():
    law = size_biased_law(MassVector([2.0, 1.0, 1.0]))
    assert math.isclose(sum(law.values()), 1.0)
    assert math.isclose(law[(0, 1, 2)], 0.5 * 0.5)


def test_pair_rate():
    assert math.isclose(pair_rate(MassVector([2.0, 1.0, 1.0])), 5.0)


def test_S_pi_checks_small():
    reps = check_S_pi_independence(MassVector([2.0, 1.0, 1.0]), 5000, seed=3)
    assert all(r.passed for r in reps.values())


def test_sampling_redraws_ties():
    rng = stream_rng(0, "tie-test")
    x = MassVector([1.0, 1.0, 1.0, 1.0])
    for _ in range(200):
        clocks, uc = sample_coalescent(x, rng)
        assert not build_diagram(x, clocks).has_ties


def test_diagram_csv(figure):
    x, clocks = figure
    rows = build_diagram(x, clocks).to_csv().splitlines()
    assert rows[0] == "line_id,intercept,slope,stop_time,target"
    assert rows[-1].split(",")[0] == "7" and rows[-1].split(",")[-1] == "6"
    assert len(rows) == 8
