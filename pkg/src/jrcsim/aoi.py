"""Age of information for a lossy FCFS M/M/1 status-update link.

Closed forms, a thinning-based discrete-event simulator used as an oracle,
and the scan that turns an AoI ceiling into a set of admissible ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .model import DomainError


class UnstableQueueError(ValueError):
    """Effective load is not in (0, 1)."""


@dataclass(frozen=True)
class AoiParams:
    arrival_rate: float = 0.5
    service_rate: float = 1.0
    sinr_threshold: float = 5.0
    density: float = 1e-4
    link_distance: float = 200.0
    path_loss_exponent: float = 2.0
    main_lobe_width: float = math.pi / 6
    aoi_max: float = 4.0

    def __post_init__(self):
        checks = {
            "arrival_rate": self.arrival_rate > 0,
            "service_rate": self.service_rate > 0,
            "sinr_threshold": self.sinr_threshold > 0,
            "density": self.density >= 0,
            "link_distance": self.link_distance > 0,
            "path_loss_exponent": self.path_loss_exponent >= 2,
            "main_lobe_width": 0 < self.main_lobe_width < 2 * math.pi,
            "aoi_max": self.aoi_max > 0,
        }
        for name, ok in checks.items():
            if not ok:
                raise DomainError(f"invalid {name}: {getattr(self, name)!r}")

    @property
    def load(self) -> float:
        return self.arrival_rate / self.service_rate


def loss_exponent(params: AoiParams, a: float) -> float:
    """``-ln p``: mean number of aligned interferers close enough to break the link.

    Loss ``1 - p`` rounds to 1.0 once this exceeds ~37; the exponent keeps
    its ordering there.
    """
    if not 0 < a < 1:
        raise DomainError(f"allocation ratio must be in (0, 1), got {a}")
    alpha = params.path_loss_exponent
    reach = (params.sinr_threshold / params.link_distance ** -alpha) ** (2.0 / alpha)
    return (params.main_lobe_width / (2 * math.pi)) ** 2 * a * params.density * math.pi * reach


def success_probability(params: AoiParams, a: float) -> float:
    """Probability that the link SINR stays above threshold at ratio ``a``."""
    return math.exp(-loss_exponent(params, a))


def packet_loss(params: AoiParams, a: float) -> float:
    return -math.expm1(-loss_exponent(params, a))


def average_aoi_mm1(rho: float, mu: float = 1.0) -> float:
    if not 0 < rho < 1:
        raise UnstableQueueError(f"load must be in (0, 1), got {rho}")
    if mu <= 0:
        raise DomainError(f"service rate must be > 0, got {mu}")
    return (1.0 + 1.0 / rho + rho ** 2 / (1.0 - rho)) / mu


def effective_load(params: AoiParams, a: float) -> float:
    return success_probability(params, a) * params.load


def average_aoi_with_loss(params: AoiParams, a: float) -> float:
    return average_aoi_mm1(effective_load(params, a), params.service_rate)


def aoi_minimizer(mu: float = 1.0, xatol: float = 1e-9) -> tuple[float, float]:
    """(rho*, AoI(rho*)) minimising the M/M/1 FCFS average age."""
    if mu <= 0:
        raise DomainError(f"service rate must be > 0, got {mu}")
    res = minimize_scalar(lambda r: average_aoi_mm1(r, 1.0), bounds=(1e-6, 1 - 1e-6),
                          method="bounded", options={"xatol": xatol})
    return float(res.x), float(res.fun) / mu


def simulate_fcfs_queue(arrival_rate: float, service_rate: float, p_loss: float,
                        horizon: float, seed: int = 0) -> float:
    """Time-average age of a lossy FCFS M/M/1 link, by event simulation.

    Each generated update is dropped independently with ``p_loss`` before
    entering the queue.  The receiver is assumed to hold a fresh update at
    t = 0.  Returns ``inf`` when nothing can ever be delivered.
    """
    if not 0 <= p_loss <= 1:
        raise DomainError(f"loss probability must be in [0, 1], got {p_loss}")
    if arrival_rate <= 0 or service_rate <= 0 or horizon <= 0:
        raise DomainError("rates and horizon must be > 0")
    load = (1 - p_loss) * arrival_rate / service_rate
    if load >= 1:
        raise UnstableQueueError(f"effective load {load:.4g} >= 1")
    if p_loss == 1:
        return math.inf

    rng = np.random.default_rng(seed)
    chunk = int(arrival_rate * horizon * 1.05) + 64
    parts, t = [], 0.0
    while t <= horizon:
        part = t + np.cumsum(rng.exponential(1.0 / arrival_rate, size=chunk))
        parts.append(part)
        t = part[-1]
    arrivals = np.concatenate(parts)
    arrivals = arrivals[arrivals <= horizon]
    arrivals = arrivals[rng.random(arrivals.size) >= p_loss]
    if arrivals.size == 0:
        return horizon / 2.0
    service = rng.exponential(1.0 / service_rate, size=arrivals.size)

    # FCFS: D_k = C_k + max_{j<=k}(A_j - C_{j-1}) with C the service-time prefix sum
    c = np.cumsum(service)
    c_prev = np.concatenate(([0.0], c[:-1]))
    departures = c + np.maximum.accumulate(arrivals - c_prev)

    keep = departures <= horizon
    d = np.concatenate(([0.0], departures[keep], [horizon]))
    stamp = np.concatenate(([0.0], arrivals[keep]))
    # age on [d_k, d_{k+1}) is t - stamp_k: trapezoid of width w, mid-age (d_k + d_{k+1})/2 - stamp_k
    w = np.diff(d)
    area = np.sum(w * (0.5 * (d[:-1] + d[1:]) - stamp))
    return float(area / horizon)


def feasible_ratio_set(params: AoiParams, grid: Iterable) -> tuple:
    """Grid points whose lossy-link average age is stable and within the ceiling."""
    out = []
    for a in grid:
        try:
            age = average_aoi_with_loss(params, float(a))
        except UnstableQueueError:
            continue
        if age <= params.aoi_max:
            out.append(a)
    return tuple(out)


def feasible_ratio_indices(params: AoiParams, ns: int) -> tuple[int, ...]:
    grid = [Fraction(k, ns) for k in range(1, ns)]
    return tuple(int(a * ns) for a in feasible_ratio_set(params, grid))


def calibrate_operating_point(params: AoiParams, target: Sequence, grid: Sequence,
                              arrival_rates: Iterable[float],
                              densities: Iterable[float]) -> AoiParams | None:
    """First (arrival rate, density) pair whose feasible set equals ``target``."""
    target = tuple(target)
    densities = list(densities)
    for lam in arrival_rates:
        for dens in densities:
            trial = replace(params, arrival_rate=lam, density=dens)
            if feasible_ratio_set(trial, grid) == target:
                return trial
    return None
