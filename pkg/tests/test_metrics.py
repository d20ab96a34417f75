import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jrcsim.channel import LinkBudget, ScenarioConfig, build_scenario
from jrcsim.metrics import (CapacityMode, LinkEvaluator, comm_capacity, comm_rate,
                            comm_segment_interference, radar_mutual_information,
                            radar_segment_interference, totals, totals_by_segments)
from jrcsim.model import DomainError, SystemParams, make_profile, order_allocation

from oracles import interval_oracle


class _FixedBudget:
    """Scenario stand-in with a hand-written link budget."""

    def __init__(self, lb, params=None):
        self.link_budget = lb
        self.params = params or SystemParams(bandwidth=1.0, frame_duration=1.0)
        self.num_vehicles = len(lb.radar_signal)


def _unit_budget(n, partner, signal=1.0, noise=1.0):
    ones = np.ones((n, n)) - np.eye(n)
    mask = ones.copy()
    for i, j in enumerate(partner):
        mask[i, j] = 0.0
    # distinct weights so every term is identifiable in a sum
    w = np.arange(1, n * n + 1, dtype=float).reshape(n, n)
    return LinkBudget(
        radar_signal=np.full(n, signal), radar_from_radar=ones * w,
        radar_from_comm=ones * w * 100, comm_signal=np.full(n, signal),
        comm_from_comm=mask * w * 10_000, comm_from_radar=mask * w * 1e6, noise=noise)


def test_radar_interference_matches_hand_enumeration():
    sc = _FixedBudget(_unit_budget(3, (1, 0, 0)))
    ordered = order_allocation(make_profile([3, 1, 2], 10))  # ranks 3, 1, 2
    lb = sc.link_budget
    # vehicle 0 (rank 3), segment 3: ranks 1, 2 (vehicles 1, 2) communicate
    comm, rad = radar_segment_interference(sc, ordered, 0, 3)
    assert comm == lb.radar_from_comm[0, 1] + lb.radar_from_comm[0, 2]
    assert rad == 0.0
    # segment 2: only vehicle 1 has finished
    comm, rad = radar_segment_interference(sc, ordered, 0, 2)
    assert comm == lb.radar_from_comm[0, 1]
    assert rad == lb.radar_from_radar[0, 2]
    # segment 1: nobody has finished
    comm, rad = radar_segment_interference(sc, ordered, 2, 1)
    assert comm == 0.0
    assert rad == lb.radar_from_radar[2, 0] + lb.radar_from_radar[2, 1]
    with pytest.raises(DomainError):
        radar_segment_interference(sc, ordered, 1, 2)


def test_comm_interference_matches_hand_enumeration():
    sc = _FixedBudget(_unit_budget(4, (1, 0, 0, 0)))
    ordered = order_allocation(make_profile([4, 1, 2, 3], 10))  # ranks 4, 1, 2, 3
    lb = sc.link_budget
    # vehicle 2 (rank 2, partner 0) in comm segment 2: rank <= 2 talks (1, 2), rank > 2 senses (3, 0)
    comm, rad = comm_segment_interference(sc, ordered, 2, 2)
    assert comm == lb.comm_from_comm[2, 1]
    assert rad == lb.comm_from_radar[2, 3]
    # last segment: nobody senses
    comm, rad = comm_segment_interference(sc, ordered, 2, 4)
    assert rad == 0.0
    assert comm == lb.comm_from_comm[2, 1] + lb.comm_from_comm[2, 3]
    with pytest.raises(DomainError):
        comm_segment_interference(sc, ordered, 0, 3)


def test_two_vehicle_partner_exclusion():
    sc = build_scenario(ScenarioConfig(num_vehicles=2), seed=0)
    ordered = order_allocation(make_profile([3, 6], 10))
    for i in range(2):
        for n in range(ordered.index[i], 3):
            assert comm_segment_interference(sc, ordered, i, n) == (0.0, 0.0)


def test_single_vehicle_sums_are_zero():
    sc = build_scenario(ScenarioConfig(num_vehicles=1), seed=0)
    ordered = order_allocation(make_profile([4], 10))
    assert radar_segment_interference(sc, ordered, 0, 1) == (0.0, 0.0)
    assert comm_segment_interference(sc, ordered, 0, 1) == (0.0, 0.0)
    tot = totals(sc, make_profile([4], 10))
    assert tot.radar_mi == tot.per_vehicle[0].radar_mi


def _isolated(n, sinr):
    # no interference at all: every SINR equals signal / noise
    z = np.zeros((n, n))
    lb = LinkBudget(np.full(n, sinr), z, z, np.full(n, sinr), z, z, 1.0)
    return _FixedBudget(lb)


@pytest.mark.parametrize("k", [1, 4, 9])
def test_constant_sinr_telescopes(k):
    sc = _isolated(3, 3.0)
    ordered = order_allocation(make_profile([k, 5, 2], 10))
    a = k / 10
    assert radar_mutual_information(sc, ordered, 0) == pytest.approx(a * 2.0, rel=1e-12)
    assert comm_rate(sc, ordered, 0) == pytest.approx((1 - a) * 2.0, rel=1e-12)
    assert comm_capacity(sc, ordered, 0, CapacityMode.LITERAL) == pytest.approx((1 - a) ** 2 * 2.0, rel=1e-12)
    assert comm_capacity(sc, ordered, 0, CapacityMode.CONSISTENT) == pytest.approx((1 - a) * 2.0, rel=1e-12)


def test_unit_sinr_gives_ratio():
    sc = _isolated(1, 1.0)
    ordered = order_allocation(make_profile([1], 10))
    assert radar_mutual_information(sc, ordered, 0) == pytest.approx(0.1, rel=1e-12)
    ordered = order_allocation(make_profile([9], 10))
    assert comm_rate(_isolated(1, 3.0), ordered, 0) == pytest.approx(0.2, rel=1e-12)


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("mode", list(CapacityMode))
def test_vectorised_matches_per_segment(seed, mode):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    sc = build_scenario(ScenarioConfig(num_vehicles=n), seed=seed)
    prof = make_profile(rng.integers(1, 10, size=n), 10)
    fast, slow = totals(sc, prof, mode), totals_by_segments(sc, prof, mode)
    for a, b in zip(fast.per_vehicle, slow.per_vehicle):
        assert a.radar_mi == pytest.approx(b.radar_mi, rel=1e-12)
        assert a.comm_rate == pytest.approx(b.comm_rate, rel=1e-12)
        assert a.comm_capacity == pytest.approx(b.comm_capacity, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 4), st.data())
def test_matches_interval_oracle(seed, n, data):
    sc = build_scenario(ScenarioConfig(num_vehicles=n, alignment=data.draw(st.sampled_from([None, 1.0]))),
                        seed=seed)
    ks = data.draw(st.lists(st.integers(1, 9), min_size=n, max_size=n))
    radar, rate, cap = LinkEvaluator(sc, CapacityMode.LITERAL).per_vehicle(ks, 10)
    o_radar, o_rate, o_cap = interval_oracle(sc, ks, 10, literal=True)
    np.testing.assert_allclose(radar, o_radar, rtol=1e-12)
    np.testing.assert_allclose(rate, o_rate, rtol=1e-12)
    np.testing.assert_allclose(cap, o_cap, rtol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 5), st.data())
def test_capacity_modes_and_bounds(seed, n, data):
    sc = build_scenario(ScenarioConfig(num_vehicles=n), seed=seed)
    ks = data.draw(st.lists(st.integers(1, 9), min_size=n, max_size=n))
    lit = LinkEvaluator(sc, "literal").per_vehicle(ks, 10)
    con = LinkEvaluator(sc, "consistent").per_vehicle(ks, 10)
    np.testing.assert_allclose(lit[2], con[2] * (1 - np.asarray(ks) / 10), rtol=1e-14)
    assert np.all(lit[0] >= 0) and np.all(lit[1] >= 0)
    # radar MI never exceeds the interference-free bound
    snr = sc.link_budget.radar_signal / sc.link_budget.noise
    bound = sc.params.frame_duration * sc.params.bandwidth * np.asarray(ks) / 10 * np.log2(1 + snr)
    assert np.all(lit[0] <= bound * (1 + 1e-12))


def test_isolated_vehicle_capacity_scale():
    # an interference-free 200 m link carries more than 3.5 Gbit/s
    sc = build_scenario(ScenarioConfig(num_vehicles=1), seed=0)
    tot = totals(sc, make_profile([1], 10), CapacityMode.CONSISTENT)
    assert tot.per_vehicle[0].comm_rate > 3.5e9
    assert math.isfinite(tot.radar_mi)
