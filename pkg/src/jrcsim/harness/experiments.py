"""Named experiment presets.

Each preset takes a :class:`RunConfig` and returns one or more
:class:`ResultTable`.  Every random draw derives from the configured seeds,
so (config, seeds) fixes every output byte.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable

from .. import aoi
from ..channel import ConfigError, RcsCase, build_scenario
from ..game import (ConvergenceError, GameRun, baseline_annealing, baseline_random,
                    baseline_uniform, ctra_solve, default_game_config, restrict_strategies)
from ..metrics import totals
from .config import EXPERIMENTS, RunConfig
from .tables import Column, ResultTable


class ExperimentError(RuntimeError):
    """A module error raised while running a preset, with the preset and seed attached."""


@dataclass(frozen=True)
class ExperimentSpec:
    experiment_id: str
    config: RunConfig
    seeds: tuple[int, ...]
    output: str = "results"

    def __post_init__(self):
        if self.experiment_id not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment_id!r}")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")

    @classmethod
    def from_config(cls, cfg: RunConfig) -> "ExperimentSpec":
        exp = cfg["experiment"]
        return cls(exp["id"], cfg, tuple(exp["seeds"]), exp["output"])


@dataclass
class ExperimentResult:
    tables: list[ResultTable]
    infeasible_runs: int = 0
    runtime_s: float = 0.0


# -- helpers -------------------------------------------------------------------

def _params(spec: ExperimentSpec, allowed: dict) -> dict:
    given = spec.config["experiment"]["params"]
    extra = set(given) - set(allowed)
    if extra:
        raise ConfigError(f"experiment.params: unknown key(s) for {spec.experiment_id}: "
                          f"{', '.join(sorted(extra))}")
    return {**allowed, **given}


def _metadata(spec: ExperimentSpec, **extra) -> dict:
    cfg = spec.config
    return {"experiment": spec.experiment_id, "config_hash": cfg.digest(),
            "seeds": list(spec.seeds), "capacity_mode": cfg["game"]["capacity_mode"],
            "c3_filter": cfg["game"]["apply_c3_filter"], **extra}


def _game(cfg: RunConfig, scenario):
    g = cfg["game"]
    game = default_game_config(scenario, cfg.capacity_mode, g["penalty_rate_bps"],
                               max_iterations=g["max_iterations"])
    if g["apply_c3_filter"]:
        allowed = aoi.feasible_ratio_indices(cfg.aoi_params(), game.ns)
        if not allowed:
            raise ConfigError("aoi: no ratio on the grid meets aoi_max; C3 filter leaves no strategy")
        game = restrict_strategies(game, allowed)
    return game


def _scenario(cfg: RunConfig, seed: int, num_vehicles=None, num_subframes=None, rcs_case=None):
    params = cfg.system_params()
    if num_subframes is not None:
        params = replace(params, num_subframes=num_subframes)
    overrides = {} if num_vehicles is None else {"num_vehicles": num_vehicles}
    scen_cfg = cfg.scenario_config(**overrides)
    if num_vehicles is not None and scen_cfg.partners is not None and len(scen_cfg.partners) != num_vehicles:
        scen_cfg = replace(scen_cfg, partners=None)
    return build_scenario(scen_cfg, params, rcs_case or cfg.rcs_case, seed)


def _ctra(cfg: RunConfig, scenario) -> tuple[GameRun, object]:
    game = _game(cfg, scenario)
    return ctra_solve(scenario, game), game


def _radar_total(scenario, run: GameRun, cfg: RunConfig) -> float:
    return totals(scenario, run.final_profile, cfg.capacity_mode).radar_mi


# -- presets -------------------------------------------------------------------

def packet_loss_sweep(spec: ExperimentSpec) -> ExperimentResult:
    opts = _params(spec, {"densities": [1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1]})
    base = spec.config.aoi_params()
    ns = spec.config["system"]["num_subframes"]
    table = ResultTable("packet_loss", (
        Column("a", "float", "-"), Column("density", "float", "1/m^2"),
        Column("success_probability", "float", "-"), Column("packet_loss", "float", "-"),
        Column("loss_exponent", "float", "-")),
        metadata=_metadata(spec))
    for k in range(1, ns):
        for dens in opts["densities"]:
            params = replace(base, density=float(dens))
            x = aoi.loss_exponent(params, k / ns)
            table.add(k / ns, dens, math.exp(-x), -math.expm1(-x), x)
    return ExperimentResult([table])


def aoi_sweep(spec: ExperimentSpec) -> ExperimentResult:
    params = spec.config.aoi_params()
    ns = spec.config["system"]["num_subframes"]
    table = ResultTable("aoi", (
        Column("a", "float", "-"), Column("success_probability", "float", "-"),
        Column("effective_load", "float", "-"), Column("average_aoi", "float", "s"),
        Column("c3_feasible", "bool", "-")),
        metadata=_metadata(spec, aoi_max=params.aoi_max))
    for k in range(1, ns):
        a = k / ns
        rho = aoi.effective_load(params, a)
        age = aoi.average_aoi_mm1(rho, params.service_rate)
        table.add(a, aoi.success_probability(params, a), rho, age, age <= params.aoi_max)
    return ExperimentResult([table])


def ctra_convergence(spec: ExperimentSpec) -> ExperimentResult:
    opts = _params(spec, {"vehicle_counts": [5, 10]})
    cfg = spec.config
    table = ResultTable("ctra_convergence", (
        Column("N", "int"), Column("seed", "int"), Column("step", "int"),
        Column("sweep", "int"), Column("vehicle", "int"), Column("utility", "float", "bit")),
        metadata=_metadata(spec))
    infeasible = 0
    for n in opts["vehicle_counts"]:
        for seed in spec.seeds:
            run, _ = _ctra(cfg, _scenario(cfg, seed, num_vehicles=n))
            infeasible += not run.feasible
            for s in run.trajectory:
                table.add(n, seed, s.step, s.sweep, s.vehicle, s.utility)
    return ExperimentResult([table], infeasible)


def capacity_report(spec: ExperimentSpec) -> ExperimentResult:
    cfg = spec.config
    table = ResultTable("capacity_report", (
        Column("seed", "int"), Column("vehicle", "int"), Column("ratio", "float", "-"),
        Column("radar_mi", "float", "bit"), Column("comm_capacity", "float", "bit"),
        Column("comm_rate", "float", "bit/s"), Column("c2_satisfied", "bool")),
        metadata=_metadata(spec))
    infeasible = 0
    for seed in spec.seeds:
        scenario = _scenario(cfg, seed)
        run, _ = _ctra(cfg, scenario)
        infeasible += not run.feasible
        tot = totals(scenario, run.final_profile, cfg.capacity_mode)
        for i, (a, v) in enumerate(zip(run.final_profile.as_floats(), tot.per_vehicle)):
            table.add(seed, i, a, v.radar_mi, v.comm_capacity, v.comm_rate, v.c2_satisfied)
    return ExperimentResult([table], infeasible)


def _compare(cfg: RunConfig, scenario, seed: int, algorithm: str):
    """(total radar MI, utility, iterations, feasible) for one algorithm."""
    game = _game(cfg, scenario)
    if algorithm == "ctra":
        run = ctra_solve(scenario, game)
        return _radar_total(scenario, run, cfg), run.final_utility, run.iterations, run.feasible
    if algorithm == "absa":
        res = baseline_annealing(scenario, game, cfg.annealing_schedule(), seed=seed)
    elif algorithm == "uniform":
        res = baseline_uniform(scenario, game)
    elif algorithm == "random":
        res = baseline_random(scenario, game, cfg["game"]["random_samples"], seed=seed)
    else:
        raise ConfigError(f"experiment.params.algorithms: unknown algorithm {algorithm!r}")
    return res.radar_mi, res.utility, res.evaluations, res.feasible


def algorithm_comparison(spec: ExperimentSpec) -> ExperimentResult:
    opts = _params(spec, {"vehicle_counts": [5, 10, 15],
                          "algorithms": ["ctra", "absa", "uniform", "random"]})
    cfg = spec.config
    table = ResultTable("algorithm_comparison", (
        Column("N", "int"), Column("algorithm", "str"), Column("seed", "int"),
        Column("total_radar_mi", "float", "bit"), Column("utility", "float", "bit"),
        Column("iterations", "int"), Column("feasible", "bool")),
        metadata=_metadata(spec, iterations="sweeps for ctra; utility evaluations otherwise"))
    infeasible = 0
    for n in opts["vehicle_counts"]:
        for seed in spec.seeds:
            scenario = _scenario(cfg, seed, num_vehicles=n)
            for alg in opts["algorithms"]:
                mi, u, it, ok = _compare(cfg, scenario, seed, alg)
                if alg == "ctra":
                    infeasible += not ok
                table.add(n, alg, seed, mi, u, it, ok)
    return ExperimentResult([table], infeasible)


def subframe_sweep(spec: ExperimentSpec) -> ExperimentResult:
    opts = _params(spec, {"subframe_counts": [5, 10]})
    cfg = spec.config
    table = ResultTable("subframe_sweep", (
        Column("Ns", "int"), Column("seed", "int"), Column("total_radar_mi", "float", "bit"),
        Column("utility", "float", "bit"), Column("iterations", "int"), Column("feasible", "bool")),
        metadata=_metadata(spec))
    infeasible = 0
    for ns in opts["subframe_counts"]:
        for seed in spec.seeds:
            scenario = _scenario(cfg, seed, num_subframes=int(ns))
            run, _ = _ctra(cfg, scenario)
            infeasible += not run.feasible
            table.add(ns, seed, _radar_total(scenario, run, cfg), run.final_utility,
                      run.iterations, run.feasible)
    return ExperimentResult([table], infeasible)


def rcs_cases(spec: ExperimentSpec) -> ExperimentResult:
    opts = _params(spec, {"cases": [c.value for c in RcsCase]})
    cfg = spec.config
    table = ResultTable("rcs_cases", (
        Column("rcs_case", "str"), Column("seed", "int"), Column("total_radar_mi", "float", "bit"),
        Column("utility", "float", "bit"), Column("iterations", "int"), Column("feasible", "bool")),
        metadata=_metadata(spec))
    infeasible = 0
    for case in opts["cases"]:
        try:
            case = RcsCase(case)
        except ValueError:
            raise ConfigError(f"experiment.params.cases: unknown case {case!r}") from None
        for seed in spec.seeds:
            scenario = _scenario(cfg, seed, rcs_case=case)
            run, _ = _ctra(cfg, scenario)
            infeasible += not run.feasible
            table.add(case.value, seed, _radar_total(scenario, run, cfg), run.final_utility,
                      run.iterations, run.feasible)
    return ExperimentResult([table], infeasible)


def strategy_trace(spec: ExperimentSpec) -> ExperimentResult:
    cfg = spec.config
    table = ResultTable("strategy_trace", (
        Column("seed", "int"), Column("step", "int"), Column("vehicle", "int"),
        Column("ratio", "float", "-")),
        metadata=_metadata(spec))
    infeasible = 0
    for seed in spec.seeds:
        run, game = _ctra(cfg, _scenario(cfg, seed))
        infeasible += not run.feasible
        for s in run.trajectory:
            for i, k in enumerate(s.ks):
                table.add(seed, s.step, i, Fraction(k, game.ns))
    return ExperimentResult([table], infeasible)


def custom(spec: ExperimentSpec) -> ExperimentResult:
    """CTRA on the configured scenario, one summary row per seed."""
    cfg = spec.config
    table = ResultTable("custom", (
        Column("seed", "int"), Column("N", "int"), Column("profile", "str"),
        Column("total_radar_mi", "float", "bit"), Column("total_comm_capacity", "float", "bit"),
        Column("utility", "float", "bit"), Column("iterations", "int"), Column("feasible", "bool")),
        metadata=_metadata(spec))
    infeasible = 0
    for seed in spec.seeds:
        scenario = _scenario(cfg, seed)
        run, game = _ctra(cfg, scenario)
        infeasible += not run.feasible
        tot = totals(scenario, run.final_profile, cfg.capacity_mode)
        profile = " ".join(f"{k}/{game.ns}" for k in run.final_profile.ks)
        table.add(seed, scenario.num_vehicles, profile, tot.radar_mi, tot.comm_capacity,
                  run.final_utility, run.iterations, run.feasible)
    return ExperimentResult([table], infeasible)


PRESETS: dict[str, Callable[[ExperimentSpec], ExperimentResult]] = {
    "packet-loss-sweep": packet_loss_sweep,
    "aoi-sweep": aoi_sweep,
    "ctra-convergence": ctra_convergence,
    "capacity-report": capacity_report,
    "algorithm-comparison": algorithm_comparison,
    "subframe-sweep": subframe_sweep,
    "rcs-cases": rcs_cases,
    "strategy-trace": strategy_trace,
    "custom": custom,
}


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    start = time.perf_counter()
    try:
        result = PRESETS[spec.experiment_id](spec)
    except ConfigError:
        raise
    except (ValueError, RuntimeError, ConvergenceError, FloatingPointError) as exc:
        raise ExperimentError(f"{spec.experiment_id}: {type(exc).__name__}: {exc}") from exc
    result.runtime_s = time.perf_counter() - start
    for table in result.tables:
        table.metadata["runtime_s"] = result.runtime_s
        table.metadata["infeasible_ctra_runs"] = result.infeasible_runs
    return result
