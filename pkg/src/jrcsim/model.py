"""Core value types: system parameters, allocation profiles and frame layouts.

Radar-duration ratios live on the grid ``{1/Ns, ..., (Ns-1)/Ns}`` and are
stored as integer numerators ``k`` so that ordering and segment widths are
exact.  Vehicles are indexed from 0; ranks (``index``) are 1-based because
rank ``r`` addresses ``sorted_bounds[r]`` where ``sorted_bounds[0] == 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

SPEED_OF_LIGHT = 299_792_458.0


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class SystemParams:
    """Radio and frame parameters shared by every link in a scenario.

    Defaults follow the 28 GHz / 800 MHz mmWave setup: -174 dBm/Hz noise,
    18 dB antenna gains, a 10 ms frame split into 10 subframes.
    """

    carrier_frequency: float = 28e9
    bandwidth: float = 800e6
    noise_psd: float = dbm_to_watts(-174.0)
    tx_gain: float = db_to_linear(18.0)
    rx_gain: float = db_to_linear(18.0)
    main_lobe_width: float = math.pi / 6
    frame_duration: float = 10e-3
    num_subframes: int = 10

    def __post_init__(self):
        checks = {
            "carrier_frequency": self.carrier_frequency > 0,
            "bandwidth": self.bandwidth > 0,
            "noise_psd": self.noise_psd > 0,
            "tx_gain": self.tx_gain > 0,
            "rx_gain": self.rx_gain > 0,
            "main_lobe_width": 0 < self.main_lobe_width < 2 * math.pi,
            "frame_duration": self.frame_duration > 0,
            "num_subframes": int(self.num_subframes) == self.num_subframes and self.num_subframes >= 2,
        }
        for name, ok in checks.items():
            if not ok:
                raise DomainError(f"invalid {name}: {getattr(self, name)!r}")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def noise_power(self) -> float:
        """Thermal noise over the full band, N0 * B (watts)."""
        return self.noise_psd * self.bandwidth

    @property
    def ratio_grid(self) -> tuple[Fraction, ...]:
        return ratio_grid(self.num_subframes)


def ratio_grid(ns: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(k, ns) for k in range(1, ns))


@dataclass(frozen=True)
class AllocationProfile:
    """Per-vehicle radar-duration ratios ``k / ns``."""

    ks: tuple[int, ...]
    ns: int

    def __post_init__(self):
        if self.ns < 2:
            raise DomainError(f"ns must be >= 2, got {self.ns}")
        if len(self.ks) < 1:
            raise DomainError("profile needs at least one vehicle")
        for vehicle, k in enumerate(self.ks):
            if not 1 <= k <= self.ns - 1:
                raise DomainError(
                    f"vehicle {vehicle}: ratio index {k} outside [1, {self.ns - 1}]"
                )

    def __len__(self):
        return len(self.ks)

    @property
    def num_vehicles(self) -> int:
        return len(self.ks)

    @property
    def ratios(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(k, self.ns) for k in self.ks)

    def as_floats(self) -> list[float]:
        return [k / self.ns for k in self.ks]

    def with_ratio(self, vehicle: int, k: int) -> "AllocationProfile":
        ks = list(self.ks)
        ks[vehicle] = k
        return AllocationProfile(tuple(ks), self.ns)


def make_profile(ratio_indices: Sequence[int], ns: int) -> AllocationProfile:
    return AllocationProfile(tuple(int(k) for k in ratio_indices), int(ns))


def profile_from_ratios(ratios: Sequence[float], ns: int) -> AllocationProfile:
    """Snap float ratios onto the grid; anything off-grid is rejected."""
    ks = []
    for vehicle, a in enumerate(ratios):
        k = round(a * ns)
        if not math.isclose(k / ns, a, abs_tol=1e-9):
            raise DomainError(f"vehicle {vehicle}: ratio {a} is not a multiple of 1/{ns}")
        ks.append(k)
    return make_profile(ks, ns)


@dataclass(frozen=True)
class OrderedAllocation:
    """Ascending ratio bounds with sentinels and each vehicle's rank.

    ``bounds_k`` holds numerators over ``ns``: ``[0, k_(1), ..., k_(N), ns]``.
    ``index[i]`` is the 1-based rank of vehicle ``i``.
    """

    bounds_k: tuple[int, ...]
    index: tuple[int, ...]
    ns: int

    @property
    def num_vehicles(self) -> int:
        return len(self.index)

    @property
    def sorted_bounds(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(b, self.ns) for b in self.bounds_k)

    def radar_span(self, vehicle: int) -> Fraction:
        return Fraction(self.bounds_k[self.index[vehicle]], self.ns)

    def comm_span(self, vehicle: int) -> Fraction:
        return 1 - self.radar_span(vehicle)

    def segment_widths(self) -> tuple[Fraction, ...]:
        """Widths of segments 1..N+1, i.e. ``bound[n] - bound[n-1]``."""
        b = self.bounds_k
        return tuple(Fraction(b[n] - b[n - 1], self.ns) for n in range(1, len(b)))


def order_allocation(profile: AllocationProfile) -> OrderedAllocation:
    """Sort ratios ascending; equal ratios keep ascending vehicle order."""
    order = sorted(range(len(profile.ks)), key=lambda v: (profile.ks[v], v))
    index = [0] * len(order)
    for rank, vehicle in enumerate(order, start=1):
        index[vehicle] = rank
    bounds = (0, *(profile.ks[v] for v in order), profile.ns)
    return OrderedAllocation(bounds_k=bounds, index=tuple(index), ns=profile.ns)


@dataclass(frozen=True)
class FrameLayout:
    """P sensing subframes followed by Q communication subframes."""

    sensing_subframes: int
    communication_subframes: int
    radar_symbols: int
    pdsch_symbols: int
    # descriptor only; emergency traffic is not scheduled
    mini_slot_symbols: tuple[int, ...] = field(default=())

    def __post_init__(self):
        counts = (self.sensing_subframes, self.communication_subframes,
                  self.radar_symbols, self.pdsch_symbols, *self.mini_slot_symbols)
        if any(c < 0 for c in counts):
            raise DomainError(f"frame layout counts must be >= 0: {counts}")

    @property
    def num_subframes(self) -> int:
        return self.sensing_subframes + self.communication_subframes

    @property
    def slot_ratio(self) -> Fraction:
        return slot_ratio(self.radar_symbols, self.pdsch_symbols)


def slot_ratio(radar_symbols: int, pdsch_symbols: int) -> Fraction:
    """R = K_R / (K_R + K_C); zero when no symbols at all."""
    if radar_symbols < 0 or pdsch_symbols < 0:
        raise DomainError("symbol counts must be >= 0")
    total = radar_symbols + pdsch_symbols
    return Fraction(radar_symbols, total) if total else Fraction(0)


def layout_from_ratio(a, ns: int, symbols_per_subframe: int = 14) -> FrameLayout:
    """Map a grid ratio to a P/Q subframe split with all symbols of a subframe
    given to its function."""
    frac = Fraction(a).limit_denominator(10 * ns) if isinstance(a, float) else Fraction(a)
    p = frac * ns
    if p.denominator != 1 or not 1 <= p <= ns - 1:
        raise DomainError(f"ratio {a} is not on the 1/{ns} grid")
    p = int(p)
    q = ns - p
    return FrameLayout(
        sensing_subframes=p,
        communication_subframes=q,
        radar_symbols=p * symbols_per_subframe,
        pdsch_symbols=q * symbols_per_subframe,
    )
