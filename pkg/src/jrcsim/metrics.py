"""Per-segment interference, SINR, radar mutual information and capacity.

A frame is cut at the sorted ratios into segments 1..N+1.  Radar segment
``n`` of a vehicle is ``(a_(n-1), a_(n)]`` for ``n <= rank``; comm segment
``n`` is ``(a_(n), a_(n+1)]`` for ``n >= rank``.  During radar segment ``n``
vehicles ranked below ``n`` are already communicating, the rest (rank ``n``
included) are still sensing.  During comm segment ``n`` vehicles ranked at
or below ``n`` communicate.

All information quantities are bits per frame (``T * B * sum(width *
log2(1 + sinr))``); ``comm_rate`` is bits per second.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .channel import Scenario
from .model import AllocationProfile, DomainError, OrderedAllocation, order_allocation


class CapacityMode(str, enum.Enum):
    # as printed: extra (1 - a) factor on top of the comm-span widths
    LITERAL = "literal"
    CONSISTENT = "consistent"


class Phase(str, enum.Enum):
    RADAR = "radar"
    COMM = "comm"


@dataclass(frozen=True)
class SegmentSINR:
    vehicle: int
    segment: int
    phase: Phase
    interference_comm: float
    interference_radar: float
    noise: float
    signal: float

    @property
    def sinr(self) -> float:
        return self.signal / (self.interference_comm + self.interference_radar + self.noise)


@dataclass(frozen=True)
class VehicleMetrics:
    radar_mi: float
    comm_rate: float
    comm_capacity: float

    @property
    def c2_satisfied(self) -> bool:
        return self.radar_mi <= self.comm_capacity


@dataclass(frozen=True)
class Totals:
    radar_mi: float
    comm_capacity: float
    per_vehicle: tuple[VehicleMetrics, ...]


def radar_segment_interference(scenario: Scenario, ordered: OrderedAllocation,
                               i: int, n: int) -> tuple[float, float]:
    """(communication, radar) interference power at radar ``i`` in segment ``n``."""
    rank = ordered.index
    if not 1 <= n <= rank[i]:
        raise DomainError(f"segment {n} is outside vehicle {i}'s radar span 1..{rank[i]}")
    lb = scenario.link_budget
    comm = sum(lb.radar_from_comm[i, j] for j in range(len(rank)) if rank[j] < n)
    radar = sum(lb.radar_from_radar[i, j] for j in range(len(rank)) if j != i and rank[j] >= n)
    return float(comm), float(radar)


def comm_segment_interference(scenario: Scenario, ordered: OrderedAllocation,
                              i: int, n: int) -> tuple[float, float]:
    """(communication, radar) interference power at receiver ``i`` in comm segment ``n``."""
    rank = ordered.index
    num = len(rank)
    if not rank[i] <= n <= num:
        raise DomainError(f"segment {n} is outside vehicle {i}'s comm span {rank[i]}..{num}")
    lb = scenario.link_budget
    # the budget matrices already zero out k == i and k == partner(i)
    comm = sum(lb.comm_from_comm[i, k] for k in range(num) if rank[k] <= n)
    radar = sum(lb.comm_from_radar[i, k] for k in range(num) if rank[k] > n)
    return float(comm), float(radar)


def radar_segment_sinr(scenario: Scenario, ordered: OrderedAllocation, i: int, n: int) -> SegmentSINR:
    comm, radar = radar_segment_interference(scenario, ordered, i, n)
    lb = scenario.link_budget
    return SegmentSINR(i, n, Phase.RADAR, comm, radar, lb.noise, float(lb.radar_signal[i]))


def comm_segment_sinr(scenario: Scenario, ordered: OrderedAllocation, i: int, n: int) -> SegmentSINR:
    comm, radar = comm_segment_interference(scenario, ordered, i, n)
    lb = scenario.link_budget
    return SegmentSINR(i, n, Phase.COMM, comm, radar, lb.noise, float(lb.comm_signal[i]))


def _widths(ordered: OrderedAllocation) -> np.ndarray:
    b = np.asarray(ordered.bounds_k, dtype=float) / ordered.ns
    return np.diff(b)


def radar_mutual_information(scenario: Scenario, ordered: OrderedAllocation, i: int) -> float:
    p = scenario.params
    w = _widths(ordered)
    total = 0.0
    for n in range(1, ordered.index[i] + 1):
        total += w[n - 1] * np.log2(1.0 + radar_segment_sinr(scenario, ordered, i, n).sinr)
    return float(p.frame_duration * p.bandwidth * total)


def comm_rate(scenario: Scenario, ordered: OrderedAllocation, i: int) -> float:
    p = scenario.params
    w = _widths(ordered)
    total = 0.0
    for n in range(ordered.index[i], ordered.num_vehicles + 1):
        total += w[n] * np.log2(1.0 + comm_segment_sinr(scenario, ordered, i, n).sinr)
    return float(p.bandwidth * total)


def comm_capacity(scenario: Scenario, ordered: OrderedAllocation, i: int,
                  mode: CapacityMode | str = CapacityMode.LITERAL) -> float:
    cap = scenario.params.frame_duration * comm_rate(scenario, ordered, i)
    if CapacityMode(mode) is CapacityMode.LITERAL:
        cap *= 1.0 - float(ordered.radar_span(i))
    return cap


class LinkEvaluator:
    """Vectorised metric evaluation for one scenario.

    Builds, for every segment, the 0/1 "is communicating" matrix and gets all
    interference sums from two matrix products per phase.
    """

    def __init__(self, scenario: Scenario, mode: CapacityMode | str = CapacityMode.LITERAL):
        self.scenario = scenario
        self.mode = CapacityMode(mode)
        lb = scenario.link_budget
        self._lb = lb
        self._tb = scenario.params.frame_duration * scenario.params.bandwidth
        n = scenario.num_vehicles
        self._seg = np.arange(1, n + 1)[:, None]

    def per_vehicle(self, ks, ns: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (radar_mi, comm_rate, comm_capacity) arrays for ratio numerators ``ks``."""
        ks = np.asarray(ks)
        n = len(ks)
        order = np.lexsort((np.arange(n), ks))
        rank = np.empty(n, dtype=int)
        rank[order] = np.arange(1, n + 1)
        bounds = np.concatenate(([0], ks[order], [ns])) / ns
        width = np.diff(bounds)
        lb = self._lb
        seg = self._seg

        # radar segment n (rows): vehicle j communicates iff rank_j < n
        talking = (rank[None, :] < seg).astype(float)
        interf = talking @ lb.radar_from_comm.T + (1.0 - talking) @ lb.radar_from_radar.T
        sinr = lb.radar_signal[None, :] / (interf + lb.noise)
        active = seg <= rank[None, :]
        radar_mi = self._tb * np.sum(np.where(active, width[:n, None] * np.log2(1.0 + sinr), 0.0), axis=0)

        # comm segment n (rows): vehicle k communicates iff rank_k <= n
        talking = (rank[None, :] <= seg).astype(float)
        interf = talking @ lb.comm_from_comm.T + (1.0 - talking) @ lb.comm_from_radar.T
        sinr = lb.comm_signal[None, :] / (interf + lb.noise)
        active = seg >= rank[None, :]
        rate = self.scenario.params.bandwidth * np.sum(
            np.where(active, width[1:, None] * np.log2(1.0 + sinr), 0.0), axis=0)
        cap = self.scenario.params.frame_duration * rate
        if self.mode is CapacityMode.LITERAL:
            cap = cap * (1.0 - ks / ns)
        return radar_mi, rate, cap


def totals(scenario: Scenario, profile: AllocationProfile,
           mode: CapacityMode | str = CapacityMode.LITERAL) -> Totals:
    radar_mi, rate, cap = LinkEvaluator(scenario, mode).per_vehicle(profile.ks, profile.ns)
    per_vehicle = tuple(VehicleMetrics(float(r), float(c), float(k))
                        for r, c, k in zip(radar_mi, rate, cap))
    return Totals(float(radar_mi.sum()), float(cap.sum()), per_vehicle)


def totals_by_segments(scenario: Scenario, profile: AllocationProfile,
                       mode: CapacityMode | str = CapacityMode.LITERAL) -> Totals:
    """Same as :func:`totals` but via the per-segment functions (slow, readable)."""
    ordered = order_allocation(profile)
    per_vehicle = []
    for i in range(profile.num_vehicles):
        per_vehicle.append(VehicleMetrics(
            radar_mutual_information(scenario, ordered, i),
            comm_rate(scenario, ordered, i),
            comm_capacity(scenario, ordered, i, mode),
        ))
    return Totals(sum(v.radar_mi for v in per_vehicle),
                  sum(v.comm_capacity for v in per_vehicle), tuple(per_vehicle))
