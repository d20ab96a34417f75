from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from jrcsim.model import (AllocationProfile, DomainError, FrameLayout, SystemParams,
                          layout_from_ratio, make_profile, order_allocation,
                          profile_from_ratios, ratio_grid, slot_ratio)


def test_default_params():
    p = SystemParams()
    assert p.carrier_frequency == 28e9
    assert p.bandwidth == 800e6
    assert p.wavelength == pytest.approx(0.010707, abs=1e-6)
    assert p.tx_gain == pytest.approx(63.0957, rel=1e-5)
    assert p.noise_power == pytest.approx(10 ** (-17.4 - 3) * 800e6, rel=1e-12)


@pytest.mark.parametrize("field", ["bandwidth", "carrier_frequency", "frame_duration", "noise_psd"])
def test_params_reject_nonpositive(field):
    with pytest.raises(DomainError, match=field):
        SystemParams(**{field: -1.0})


def test_ratio_grid():
    assert ratio_grid(4) == (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))


def test_make_profile():
    prof = make_profile([1, 4, 9], 10)
    assert prof.as_floats() == [0.1, 0.4, 0.9]


def test_make_profile_out_of_range_names_vehicle():
    with pytest.raises(DomainError, match="vehicle 0"):
        make_profile([0], 10)
    with pytest.raises(DomainError, match="vehicle 2"):
        make_profile([1, 2, 10], 10)


def test_reference_allocation_vector():
    ks = [9, 1, 1, 4, 6, 8, 3, 6, 3, 9]
    assert make_profile(ks, 10).as_floats() == [0.9, 0.1, 0.1, 0.4, 0.6, 0.8, 0.3, 0.6, 0.3, 0.9]


def test_profile_from_ratios_rejects_off_grid():
    assert profile_from_ratios([0.3, 0.7], 10).ks == (3, 7)
    with pytest.raises(DomainError):
        profile_from_ratios([0.35], 10)


@pytest.mark.parametrize("ks, bounds, index", [
    ((3, 1, 2), (0, 1, 2, 3, 10), (3, 1, 2)),
    ((2, 2), (0, 2, 2, 10), (1, 2)),
    ((5,), (0, 5, 10), (1,)),
])
def test_order_allocation(ks, bounds, index):
    ordered = order_allocation(make_profile(ks, 10))
    assert ordered.bounds_k == bounds
    assert ordered.index == index


@given(st.integers(2, 12).flatmap(
    lambda ns: st.tuples(st.just(ns), st.lists(st.integers(1, ns - 1), min_size=1, max_size=8))))
def test_ordering_properties(case):
    ns, ks = case
    prof = make_profile(ks, ns)
    ordered = order_allocation(prof)
    assert sorted(ordered.index) == list(range(1, len(ks) + 1))
    assert list(ordered.bounds_k) == sorted(ordered.bounds_k)
    assert sum(ordered.segment_widths()) == 1
    for i, k in enumerate(ks):
        assert ordered.radar_span(i) == Fraction(k, ns)
        assert ordered.radar_span(i) + ordered.comm_span(i) == 1


def test_with_ratio_is_functional():
    prof = make_profile([1, 2], 10)
    assert prof.with_ratio(1, 5).ks == (1, 5)
    assert prof.ks == (1, 2)


def test_layout_from_ratio():
    lay = layout_from_ratio(Fraction(1, 10), 10, 14)
    assert (lay.sensing_subframes, lay.communication_subframes) == (1, 9)
    assert lay.slot_ratio == Fraction(1, 10)
    assert layout_from_ratio(0.3, 10).sensing_subframes == 3
    with pytest.raises(DomainError):
        layout_from_ratio(0.35, 10)


def test_slot_ratio():
    assert slot_ratio(1, 600) == Fraction(1, 601)
    assert slot_ratio(0, 600) == 0
    assert slot_ratio(0, 0) == 0
    with pytest.raises(DomainError):
        FrameLayout(-1, 1, 0, 0)


def test_profile_requires_vehicle():
    with pytest.raises(DomainError):
        AllocationProfile((), 10)
