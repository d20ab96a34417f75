"""JSON run configuration.

One file, five sections (``system``, ``scenario``, ``aoi``, ``game``,
``experiment``).  Every key is optional; missing keys take the defaults in
``DEFAULTS``, unknown keys are rejected.  Values are kept in the units the
file uses (dB, dBm/Hz) so that dumping the effective configuration and
loading it again is an exact fixpoint.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from ..aoi import AoiParams
from ..channel import ConfigError, RcsCase, ScenarioConfig
from ..game import AnnealingSchedule
from ..metrics import CapacityMode
from ..model import DomainError, SystemParams, db_to_linear, dbm_to_watts

EXPERIMENTS = (
    "packet-loss-sweep", "aoi-sweep", "ctra-convergence", "capacity-report",
    "algorithm-comparison", "subframe-sweep", "rcs-cases", "strategy-trace", "custom",
)

DEFAULTS: dict[str, dict[str, Any]] = {
    "system": {
        "carrier_frequency_hz": 28e9,
        "bandwidth_hz": 800e6,
        "noise_psd_dbm_per_hz": -174.0,
        "tx_antenna_gain_db": 18.0,
        "rx_antenna_gain_db": 18.0,
        "main_lobe_width_rad": math.pi / 6,
        "frame_duration_s": 0.01,
        "num_subframes": 10,
    },
    "scenario": {
        "num_vehicles": 10,
        "tx_power_w": 10.0,
        "road_length_m": 196.0,
        "num_lanes": 2,
        "lane_spacing_m": 4.0,
        "target_ahead_m": 50.0,
        "min_separation_m": 5.0,
        "max_distance_m": 200.0,
        "shadow_std_db": 8.0,
        "self_rcs_m2": 1.0,
        "rcs_case": "all-one",
        "alignment": None,
        "positions": None,
        "target": None,
        "partners": None,
    },
    "aoi": {
        "arrival_rate": 0.5,
        "service_rate": 1.0,
        "sinr_threshold": 5.0,
        "density_per_m2": 1e-4,
        "link_distance_m": 200.0,
        "path_loss_exponent": 2.0,
        "aoi_max": 4.0,
    },
    "game": {
        "penalty_rate_bps": 10e9,
        "capacity_mode": "literal",
        "apply_c3_filter": False,
        "max_iterations": 1000,
        "enumeration_budget": 1_000_000,
        "random_samples": 100,
        "annealing_initial": 0.1,
        "annealing_cooling": 0.95,
        "annealing_proposals_per_level": 100,
        "annealing_floor": 1e-6,
    },
    "experiment": {
        "id": "custom",
        "seeds": [0],
        "output": "results",
        "format": "csv",
        "params": {},
    },
}


@dataclass(frozen=True)
class RunConfig:
    sections: dict

    def __getitem__(self, section: str) -> dict:
        return self.sections[section]

    # -- domain objects -------------------------------------------------
    def system_params(self) -> SystemParams:
        s = self["system"]
        return SystemParams(
            carrier_frequency=s["carrier_frequency_hz"],
            bandwidth=s["bandwidth_hz"],
            noise_psd=dbm_to_watts(s["noise_psd_dbm_per_hz"]),
            tx_gain=db_to_linear(s["tx_antenna_gain_db"]),
            rx_gain=db_to_linear(s["rx_antenna_gain_db"]),
            main_lobe_width=s["main_lobe_width_rad"],
            frame_duration=s["frame_duration_s"],
            num_subframes=s["num_subframes"],
        )

    def scenario_config(self, **overrides) -> ScenarioConfig:
        s = self["scenario"]
        power = s["tx_power_w"]
        kw = dict(
            num_vehicles=s["num_vehicles"],
            tx_power=tuple(power) if isinstance(power, list) else power,
            road_length=s["road_length_m"],
            num_lanes=s["num_lanes"],
            lane_spacing=s["lane_spacing_m"],
            target_ahead=s["target_ahead_m"],
            min_separation=s["min_separation_m"],
            max_distance=s["max_distance_m"],
            shadow_std_db=s["shadow_std_db"],
            self_rcs=s["self_rcs_m2"],
            alignment=s["alignment"],
            positions=None if s["positions"] is None else tuple(tuple(p) for p in s["positions"]),
            target=None if s["target"] is None else tuple(s["target"]),
            partners=None if s["partners"] is None else tuple(s["partners"]),
        )
        kw.update(overrides)
        return ScenarioConfig(**kw)

    @property
    def rcs_case(self) -> RcsCase:
        return RcsCase(self["scenario"]["rcs_case"])

    def aoi_params(self) -> AoiParams:
        a = self["aoi"]
        return AoiParams(
            arrival_rate=a["arrival_rate"],
            service_rate=a["service_rate"],
            sinr_threshold=a["sinr_threshold"],
            density=a["density_per_m2"],
            link_distance=a["link_distance_m"],
            path_loss_exponent=a["path_loss_exponent"],
            main_lobe_width=self["system"]["main_lobe_width_rad"],
            aoi_max=a["aoi_max"],
        )

    @property
    def capacity_mode(self) -> CapacityMode:
        return CapacityMode(self["game"]["capacity_mode"])

    def annealing_schedule(self) -> AnnealingSchedule:
        g = self["game"]
        return AnnealingSchedule(
            initial=g["annealing_initial"],
            cooling=g["annealing_cooling"],
            proposals_per_level=g["annealing_proposals_per_level"],
            floor=g["annealing_floor"],
        )

    @property
    def experiment_id(self) -> str:
        return self["experiment"]["id"]

    @property
    def seeds(self) -> list[int]:
        return list(self["experiment"]["seeds"])

    # -- serialisation --------------------------------------------------
    def dumps(self) -> str:
        return json.dumps(self.sections, indent=2, sort_keys=True) + "\n"

    def digest(self) -> str:
        canon = json.dumps(self.sections, sort_keys=True, separators=(",", ":"))
        # git-style short hash of the canonical form
        return hashlib.sha1(canon.encode()).hexdigest()[:12]

    def with_overrides(self, **sections) -> "RunConfig":
        """``with_overrides(game={"capacity_mode": "consistent"})``."""
        raw = copy.deepcopy(self.sections)
        for section, values in sections.items():
            raw.setdefault(section, {}).update(values)
        return from_dict(raw)


def _check_value(section: str, key: str, value, default):
    where = f"{section}.{key}"
    if default is None or isinstance(default, (dict, list)):
        return value
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
    elif isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
    elif isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        value = float(value)
    elif isinstance(default, str) and not isinstance(value, str):
        raise ConfigError(f"{where}: expected a string, got {value!r}")
    return value


def from_dict(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = set(raw) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    sections = {}
    for name, defaults in DEFAULTS.items():
        given = raw.get(name, {}) or {}
        if not isinstance(given, dict):
            raise ConfigError(f"{name}: expected an object")
        extra = set(given) - set(defaults)
        if extra:
            raise ConfigError(f"{name}: unknown key(s): {', '.join(sorted(extra))}")
        merged = copy.deepcopy(defaults)
        for key, value in given.items():
            merged[key] = _check_value(name, key, value, defaults[key])
        sections[name] = merged
    cfg = RunConfig(sections)
    validate(cfg)
    return cfg


_POSITIVE = {
    "system": ("carrier_frequency_hz", "bandwidth_hz", "main_lobe_width_rad", "frame_duration_s"),
    "scenario": ("num_vehicles", "max_distance_m"),
    "aoi": ("arrival_rate", "service_rate", "sinr_threshold", "link_distance_m", "aoi_max"),
    "game": ("penalty_rate_bps", "max_iterations", "enumeration_budget", "random_samples",
             "annealing_cooling", "annealing_proposals_per_level", "annealing_floor"),
}


def validate(cfg: RunConfig):
    for section, keys in _POSITIVE.items():
        for key in keys:
            if not cfg[section][key] > 0:
                raise ConfigError(f"{section}.{key}: must be > 0, got {cfg[section][key]!r}")
    exp = cfg["experiment"]
    if exp["id"] not in EXPERIMENTS:
        raise ConfigError(f"experiment.id: unknown experiment {exp['id']!r}; "
                          f"choose from {', '.join(EXPERIMENTS)}")
    if not exp["seeds"] or not all(isinstance(s, int) and not isinstance(s, bool) for s in exp["seeds"]):
        raise ConfigError("experiment.seeds: need a non-empty list of integers")
    if exp["format"] not in ("csv", "jsonl"):
        raise ConfigError(f"experiment.format: expected csv or jsonl, got {exp['format']!r}")
    if not isinstance(exp["params"], dict):
        raise ConfigError("experiment.params: expected an object")
    try:
        RcsCase(cfg["scenario"]["rcs_case"])
    except ValueError:
        raise ConfigError(f"scenario.rcs_case: unknown case {cfg['scenario']['rcs_case']!r}") from None
    try:
        CapacityMode(cfg["game"]["capacity_mode"])
    except ValueError:
        raise ConfigError(f"game.capacity_mode: expected literal or consistent") from None
    # construct the domain objects so their own checks run, naming the section
    for section, build in (("system", cfg.system_params), ("scenario", lambda: cfg.scenario_config().validate()),
                           ("aoi", cfg.aoi_params), ("game", cfg.annealing_schedule)):
        try:
            build()
        except (DomainError, ConfigError, ValueError, TypeError) as exc:
            raise ConfigError(f"{section}: {exc}") from None


def loads(text: str, source: str = "<string>") -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return from_dict(raw)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return loads(text, str(path))


def default_config() -> RunConfig:
    return from_dict({})
