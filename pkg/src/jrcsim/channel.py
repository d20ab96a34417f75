"""Scenario geometry and propagation gains.

Radar paths use the two-way radar equation (self echo and the echo of
another radar via the shared target); communication links use Friis
free-space loss with per-link log-normal shadowing.  Only main-lobe
gains are modelled.

Random draws come from ``numpy.random.Generator`` (PCG64) seeded through a
``SeedSequence`` spawned into independent streams for geometry, shadowing
and RCS, so changing the RCS case never moves the vehicles.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .model import DomainError, SystemParams


class ConfigError(ValueError):
    """A scenario or experiment configuration violates a constraint."""


FOUR_PI = 4.0 * math.pi


def radar_self_gain(params: SystemParams, sigma_ii: float, r_i: float) -> float:
    if r_i <= 0:
        raise DomainError(f"target distance must be > 0, got {r_i}")
    return (params.tx_gain * params.rx_gain * sigma_ii * params.wavelength ** 2
            / (FOUR_PI ** 3 * r_i ** 4))


def radar_cross_gain(params: SystemParams, sigma_ij: float, r_i: float, r_j: float) -> float:
    """Gain of radar j's signal reaching radar i through the target."""
    if r_i <= 0 or r_j <= 0:
        raise DomainError(f"target distances must be > 0, got {r_i}, {r_j}")
    return (params.tx_gain * params.rx_gain * sigma_ij * params.wavelength ** 2
            / (FOUR_PI ** 3 * r_i ** 2 * r_j ** 2))


def comm_link_gain(params: SystemParams, d: float, shadow_db: float = 0.0) -> float:
    """Free-space path gain with shadowing, antenna gains excluded."""
    if d <= 0:
        raise DomainError(f"link distance must be > 0, got {d}")
    return (params.wavelength / (FOUR_PI * d)) ** 2 * 10.0 ** (shadow_db / 10.0)


def radar_to_comm_gain(params: SystemParams, d_ik: float) -> float:
    """One-way main-lobe gain of a radar burst into a communication receiver."""
    if d_ik <= 0:
        raise DomainError(f"link distance must be > 0, got {d_ik}")
    return params.tx_gain * params.rx_gain * (params.wavelength / (FOUR_PI * d_ik)) ** 2


class RcsCase(str, enum.Enum):
    ALL_ONE = "all-one"
    CROSS_HALF = "cross-half"
    CROSS_TWO = "cross-two"
    CROSS_RANDOM = "cross-random"


def rcs_matrix(case: RcsCase, n: int, rng: np.random.Generator, self_rcs: float = 1.0) -> np.ndarray:
    case = RcsCase(case)
    if case is RcsCase.ALL_ONE:
        sigma = np.ones((n, n))
    elif case is RcsCase.CROSS_HALF:
        sigma = np.full((n, n), 0.5)
    elif case is RcsCase.CROSS_TWO:
        sigma = np.full((n, n), 2.0)
    else:
        sigma = rng.uniform(0.5, 2.0, size=(n, n))
    np.fill_diagonal(sigma, self_rcs)
    return sigma


@dataclass(frozen=True)
class ScenarioConfig:
    """Inputs for :func:`build_scenario`.

    With ``positions`` unset, vehicles are dropped uniformly on a
    ``road_length`` stretch of ``num_lanes`` lanes ``lane_spacing`` apart,
    and the shared target sits ``target_ahead`` metres ahead of the convoy
    centroid, midway across the lanes.  ``partners`` defaults to a star
    toward vehicle 0 (vehicle 0 talks to vehicle 1).  A single vehicle talks
    to a virtual receiver ``lone_link_distance`` away (no shadowing).

    ``alignment`` scales every one-way vehicle-to-vehicle interference term
    (comm->radar, comm->comm, radar->comm); radar-to-radar echoes through the
    shared target are always beam-aligned and unscaled.  ``None`` means the
    main-lobe alignment probability ``(phi / 2 pi)^2``; 1.0 counts every
    interferer at full main-lobe gain.
    """

    num_vehicles: int = 10
    tx_power: float | tuple[float, ...] = 10.0
    road_length: float = 196.0
    num_lanes: int = 2
    lane_spacing: float = 4.0
    target_ahead: float = 50.0
    min_separation: float = 5.0
    max_distance: float = 200.0
    shadow_std_db: float = 8.0
    self_rcs: float = 1.0
    positions: Optional[tuple[tuple[float, float], ...]] = None
    target: Optional[tuple[float, float]] = None
    partners: Optional[tuple[int, ...]] = None
    lone_link_distance: float = 200.0
    alignment: Optional[float] = None
    max_placement_attempts: int = 10_000

    def validate(self):
        n = self.num_vehicles
        if n < 1:
            raise ConfigError(f"num_vehicles must be >= 1, got {n}")
        powers = self.powers()
        if len(powers) != n or any(p <= 0 for p in powers):
            raise ConfigError(f"tx_power must be positive, one per vehicle: {self.tx_power!r}")
        for name in ("road_length", "lane_spacing", "max_distance", "min_separation"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.num_lanes < 1:
            raise ConfigError("num_lanes must be >= 1")
        if self.shadow_std_db < 0:
            raise ConfigError("shadow_std_db must be >= 0")
        if self.alignment is not None and not 0 <= self.alignment <= 1:
            raise ConfigError(f"alignment must be in [0, 1], got {self.alignment}")
        if self.positions is not None and len(self.positions) != n:
            raise ConfigError(f"positions: expected {n} entries, got {len(self.positions)}")
        if self.partners is not None:
            if len(self.partners) != n:
                raise ConfigError(f"partners: expected {n} entries, got {len(self.partners)}")
            for i, j in enumerate(self.partners):
                if not 0 <= j < n or j == i:
                    raise ConfigError(f"partners[{i}] = {j} is not another vehicle")

    def powers(self) -> tuple[float, ...]:
        if isinstance(self.tx_power, (int, float)):
            return (float(self.tx_power),) * self.num_vehicles
        return tuple(float(p) for p in self.tx_power)

    def alignment_factor(self, params: SystemParams) -> float:
        if self.alignment is not None:
            return float(self.alignment)
        return (params.main_lobe_width / (2 * math.pi)) ** 2

    def default_partners(self) -> tuple[int, ...]:
        if self.num_vehicles == 1:
            return (-1,)
        return (1,) + (0,) * (self.num_vehicles - 1)


@dataclass(frozen=True, eq=False)
class LinkBudget:
    """Received powers (watts) precomputed for fast metric evaluation.

    ``radar_signal[i]``      P_i h_ii
    ``radar_from_radar[i,j]`` P_j h_ij (zero diagonal)
    ``radar_from_comm[i,j]``  P_j G_t g^{ch-r}_ij G_r (zero diagonal)
    ``comm_signal[i]``       P_i G_t g_i,partner G_r
    ``comm_from_comm[i,k]``   P_k G_t g_ik G_r, zero for k in {i, partner(i)}
    ``comm_from_radar[i,k]``  P_k G_t G_r lambda^2 / (4 pi d_ik)^2, same mask

    The three vehicle-to-vehicle terms (``radar_from_comm``, ``comm_from_comm``,
    ``comm_from_radar``) also carry the scenario's alignment factor kappa.
    """

    radar_signal: np.ndarray
    radar_from_radar: np.ndarray
    radar_from_comm: np.ndarray
    comm_signal: np.ndarray
    comm_from_comm: np.ndarray
    comm_from_radar: np.ndarray
    noise: float


@dataclass(frozen=True, eq=False)
class Scenario:
    params: SystemParams
    positions: np.ndarray
    target: np.ndarray
    tx_power: np.ndarray
    target_distance: np.ndarray
    rcs: np.ndarray
    comm_gain: np.ndarray
    partner: np.ndarray
    rng_seed: int
    rcs_case: RcsCase = RcsCase.ALL_ONE
    shadow_db: np.ndarray = field(default=None, repr=False)
    lone_link_distance: float = 200.0
    alignment: float = 1.0

    @property
    def num_vehicles(self) -> int:
        return len(self.tx_power)

    @cached_property
    def distances(self) -> np.ndarray:
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])

    @cached_property
    def link_budget(self) -> LinkBudget:
        p = self.params
        n = self.num_vehicles
        gg = p.tx_gain * p.rx_gain
        power = self.tx_power
        r = self.target_distance
        off = ~np.eye(n, dtype=bool)

        radar_signal = power * gg * np.diag(self.rcs) * p.wavelength ** 2 / (FOUR_PI ** 3 * r ** 4)
        cross = gg * self.rcs * p.wavelength ** 2 / (FOUR_PI ** 3 * np.outer(r ** 2, r ** 2))
        radar_from_radar = np.where(off, cross * power[None, :], 0.0)
        kappa = self.alignment
        radar_from_comm = np.where(off, kappa * gg * self.comm_gain * power[None, :], 0.0)

        mask = off.copy()
        for i, j in enumerate(self.partner):
            if j >= 0:
                mask[i, j] = False
        comm_from_comm = np.where(mask, kappa * gg * self.comm_gain * power[None, :], 0.0)
        with np.errstate(divide="ignore"):
            free = gg * (p.wavelength / (FOUR_PI * self.distances)) ** 2
        comm_from_radar = np.where(mask, kappa * free * power[None, :], 0.0)
        lone = (p.wavelength / (FOUR_PI * self.lone_link_distance)) ** 2
        comm_signal = np.array([
            power[i] * gg * (self.comm_gain[i, j] if j >= 0 else lone)
            for i, j in enumerate(self.partner)
        ])
        arrays = (radar_signal, radar_from_radar, radar_from_comm,
                  comm_signal, comm_from_comm, comm_from_radar)
        for a in arrays:
            a.setflags(write=False)
        return LinkBudget(*arrays, noise=p.noise_power)


def _place_vehicles(cfg: ScenarioConfig, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    n = cfg.num_vehicles
    lane_offset = (cfg.num_lanes - 1) * cfg.lane_spacing / 2.0
    for _ in range(cfg.max_placement_attempts):
        x = rng.uniform(0.0, cfg.road_length, size=n)
        lane = rng.integers(0, cfg.num_lanes, size=n)
        pos = np.column_stack([x, lane * cfg.lane_spacing])
        target = np.array([x.mean() + cfg.target_ahead, lane_offset])
        if _geometry_ok(pos, target, cfg):
            return pos, target
    raise ConfigError(
        f"could not place {n} vehicles {cfg.min_separation} m apart within "
        f"{cfg.max_distance} m after {cfg.max_placement_attempts} attempts"
    )


def _geometry_ok(pos: np.ndarray, target: np.ndarray, cfg: ScenarioConfig) -> bool:
    r = np.hypot(*(pos - target).T)
    if np.any(r < max(cfg.min_separation, 1e-9)) or np.any(r > cfg.max_distance):
        return False
    if len(pos) > 1:
        diff = pos[:, None, :] - pos[None, :, :]
        d = np.hypot(diff[..., 0], diff[..., 1])[~np.eye(len(pos), dtype=bool)]
        if np.any(d < max(cfg.min_separation, 1e-9)) or np.any(d > cfg.max_distance):
            return False
    return True


def build_scenario(
    cfg: ScenarioConfig,
    params: SystemParams | None = None,
    rcs_case: RcsCase | str = RcsCase.ALL_ONE,
    seed: int = 0,
) -> Scenario:
    """Materialise a scenario; identical (cfg, params, case, seed) give identical arrays."""
    params = params or SystemParams()
    cfg.validate()
    n = cfg.num_vehicles
    geo_ss, shadow_ss, rcs_ss = np.random.SeedSequence(seed).spawn(3)

    if cfg.positions is not None:
        pos = np.asarray(cfg.positions, dtype=float)
        centroid = pos.mean(axis=0)
        target = (np.asarray(cfg.target, dtype=float) if cfg.target is not None
                  else np.array([centroid[0] + cfg.target_ahead, centroid[1]]))
        if not _geometry_ok(pos, target, cfg):
            raise ConfigError("explicit positions/target violate separation or max_distance")
    else:
        pos, target = _place_vehicles(cfg, np.random.default_rng(geo_ss))
        if cfg.target is not None:
            target = np.asarray(cfg.target, dtype=float)
            if not _geometry_ok(pos, target, cfg):
                raise ConfigError("explicit target violates separation or max_distance")

    shadow = np.random.default_rng(shadow_ss).normal(0.0, cfg.shadow_std_db, size=(n, n))
    np.fill_diagonal(shadow, 0.0)
    diff = pos[:, None, :] - pos[None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(d, 1.0)
    gain = (params.wavelength / (FOUR_PI * d)) ** 2 * 10.0 ** (shadow / 10.0)
    np.fill_diagonal(gain, 1.0)  # self link is never used
    if np.any(gain > 1.0):
        raise ConfigError("a link gain exceeds 1; vehicles are too close")

    partners = cfg.partners if cfg.partners is not None else cfg.default_partners()
    arrays = dict(
        positions=pos,
        target=target,
        tx_power=np.array(cfg.powers()),
        target_distance=np.hypot(*(pos - target).T),
        rcs=rcs_matrix(rcs_case, n, np.random.default_rng(rcs_ss), cfg.self_rcs),
        comm_gain=gain,
        partner=np.array(partners, dtype=int),
        shadow_db=shadow,
    )
    for a in arrays.values():
        a.setflags(write=False)
    return Scenario(params=params, rng_seed=seed, rcs_case=RcsCase(rcs_case),
                    lone_link_distance=cfg.lone_link_distance,
                    alignment=cfg.alignment_factor(params), **arrays)
