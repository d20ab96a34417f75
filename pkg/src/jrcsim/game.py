"""Time-allocation game: utility, best-response solver, NE checks, baselines.

Every player shares the same utility

    U = total radar MI - penalty * (number of vehicles whose radar MI
        exceeds their comm capacity)

so the game is an exact potential game with potential ``U``.  Strategies are
ratio numerators ``k`` (ratio ``k / ns``).
"""

from __future__ import annotations

import itertools
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .channel import Scenario
from .metrics import CapacityMode, LinkEvaluator
from .model import AllocationProfile, make_profile

log = logging.getLogger(__name__)

#: penalty rate in bit/s; multiplied by the frame duration to get bits per frame
DEFAULT_PENALTY_RATE = 10e9


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, trajectory):
        super().__init__(message)
        self.trajectory = trajectory


class EnumerationBudgetError(ValueError):
    pass


@dataclass(frozen=True)
class GameConfig:
    penalty: float
    strategy_sets: tuple[tuple[int, ...], ...]
    ns: int
    capacity_mode: CapacityMode = CapacityMode.LITERAL
    apply_c3_filter: bool = False
    max_iterations: int = 1000

    def __post_init__(self):
        if not self.strategy_sets:
            raise ValueError("need at least one player")
        for m, s in enumerate(self.strategy_sets):
            if not s:
                raise ValueError(f"vehicle {m}: empty strategy set")
            if any(not 1 <= k <= self.ns - 1 for k in s):
                raise ValueError(f"vehicle {m}: strategy outside 1..{self.ns - 1}: {s}")
            if tuple(sorted(set(s))) != tuple(s):
                raise ValueError(f"vehicle {m}: strategy set must be sorted and unique: {s}")

    @property
    def num_vehicles(self) -> int:
        return len(self.strategy_sets)


def default_game_config(scenario: Scenario, capacity_mode=CapacityMode.LITERAL,
                        penalty_rate: float = DEFAULT_PENALTY_RATE,
                        strategy_sets: Optional[Sequence[Sequence[int]]] = None,
                        max_iterations: int = 1000) -> GameConfig:
    p = scenario.params
    ns = p.num_subframes
    if strategy_sets is None:
        strategy_sets = [tuple(range(1, ns))] * scenario.num_vehicles
    return GameConfig(
        penalty=penalty_rate * p.frame_duration,
        strategy_sets=tuple(tuple(s) for s in strategy_sets),
        ns=ns,
        capacity_mode=CapacityMode(capacity_mode),
        max_iterations=max_iterations,
    )


def restrict_strategies(cfg: GameConfig, allowed: Sequence[int]) -> GameConfig:
    """Intersect each vehicle's set with ``allowed`` (e.g. AoI-feasible ratios)."""
    allowed = set(allowed)
    sets = tuple(tuple(k for k in s if k in allowed) for s in cfg.strategy_sets)
    return replace(cfg, strategy_sets=sets, apply_c3_filter=True)


def radar_mi_upper_bound(scenario: Scenario, cfg: GameConfig) -> float:
    """Interference-free radar MI with every vehicle at its largest ratio."""
    p = scenario.params
    lb = scenario.link_budget
    top = np.array([max(s) for s in cfg.strategy_sets]) / cfg.ns
    snr = lb.radar_signal / lb.noise
    return float(p.frame_duration * p.bandwidth * np.sum(top * np.log2(1.0 + snr)))


class Utility:
    """Cached potential-function evaluator for one (scenario, config) pair."""

    def __init__(self, scenario: Scenario, cfg: GameConfig):
        if scenario.num_vehicles != cfg.num_vehicles:
            raise ValueError(f"scenario has {scenario.num_vehicles} vehicles, "
                             f"config has {cfg.num_vehicles} strategy sets")
        self.scenario = scenario
        self.cfg = cfg
        self._eval = LinkEvaluator(scenario, cfg.capacity_mode)
        self._cache: dict[tuple[int, ...], float] = {}
        self.evaluations = 0

    def metrics(self, ks):
        return self._eval.per_vehicle(ks, self.cfg.ns)

    def __call__(self, ks) -> float:
        key = tuple(int(k) for k in ks)
        u = self._cache.get(key)
        if u is None:
            self.evaluations += 1
            radar, _, cap = self._eval.per_vehicle(key, self.cfg.ns)
            violations = int(np.count_nonzero(cap < radar))
            u = float(radar.sum()) - self.cfg.penalty * violations
            self._cache[key] = u
        return u

    def feasible(self, ks) -> bool:
        radar, _, cap = self.metrics(ks)
        return bool(np.all(radar <= cap))


def utility(scenario: Scenario, cfg: GameConfig, profile: AllocationProfile) -> float:
    return Utility(scenario, cfg)(profile.ks)


@dataclass(frozen=True)
class Step:
    step: int          # vehicle visits so far (sweep * N + position)
    sweep: int
    vehicle: int       # -1 for the initial profile
    ks: tuple[int, ...]
    utility: float


@dataclass(frozen=True)
class GameRun:
    trajectory: tuple[Step, ...]
    final_profile: AllocationProfile
    final_utility: float
    iterations: int
    converged: bool
    ne_certificate: tuple[bool, ...]
    feasible: bool
    evaluations: int = 0

    @property
    def utilities(self) -> list[float]:
        return [s.utility for s in self.trajectory]


def ctra_solve(scenario: Scenario, cfg: GameConfig, initial: Optional[Sequence[int]] = None) -> GameRun:
    """Round-robin best response from the minimum-ratio profile.

    A vehicle moves only to a strictly better strategy (ties keep the
    incumbent); a sweep with no move ends the run.
    """
    u = Utility(scenario, cfg)
    ks = list(initial) if initial is not None else [s[0] for s in cfg.strategy_sets]
    best = u(ks)
    trajectory = [Step(0, 0, -1, tuple(ks), best)]
    n = cfg.num_vehicles
    for sweep in range(1, cfg.max_iterations + 1):
        moved = False
        for m in range(n):
            incumbent = ks[m]
            choice = incumbent
            for k in cfg.strategy_sets[m]:
                if k == incumbent:
                    continue
                ks[m] = k
                value = u(ks)
                if value > best:
                    best, choice = value, k
            ks[m] = choice
            if choice != incumbent:
                moved = True
                trajectory.append(Step((sweep - 1) * n + m + 1, sweep, m, tuple(ks), best))
        if not moved:
            profile = make_profile(ks, cfg.ns)
            return GameRun(
                trajectory=tuple(trajectory),
                final_profile=profile,
                final_utility=best,
                iterations=sweep,
                converged=True,
                ne_certificate=tuple(_ne_flags(u, cfg, ks)),
                feasible=u.feasible(ks),
                evaluations=u.evaluations,
            )
    raise ConvergenceError(f"no convergence within {cfg.max_iterations} sweeps", tuple(trajectory))


def _ne_flags(u: Utility, cfg: GameConfig, ks: Sequence[int]) -> list[bool]:
    ks = list(ks)
    here = u(ks)
    flags = []
    for m, strategies in enumerate(cfg.strategy_sets):
        own = ks[m]
        ok = True
        for k in strategies:
            ks[m] = k
            if u(ks) > here:
                ok = False
                break
        ks[m] = own
        flags.append(ok)
    return flags


def verify_ne(scenario: Scenario, cfg: GameConfig, profile: AllocationProfile) -> tuple[bool, ...]:
    """Per vehicle: True when no unilateral switch strictly raises the utility."""
    return tuple(_ne_flags(Utility(scenario, cfg), cfg, profile.ks))


@dataclass(frozen=True)
class OracleResult:
    best_profile: AllocationProfile
    best_utility: float
    ne_profiles: tuple[AllocationProfile, ...]
    ne_utilities: tuple[float, ...]
    table: np.ndarray = field(repr=False)


def exhaustive_oracle(scenario: Scenario, cfg: GameConfig, budget: int = 1_000_000) -> OracleResult:
    """Enumerate every profile; return the global maximum and all pure NE."""
    sizes = [len(s) for s in cfg.strategy_sets]
    total = math.prod(sizes)
    if total > budget:
        raise EnumerationBudgetError(f"{total} profiles exceed the enumeration budget of {budget}")
    u = Utility(scenario, cfg)
    table = np.empty(sizes)
    for idx in itertools.product(*(range(s) for s in sizes)):
        table[idx] = u([cfg.strategy_sets[m][i] for m, i in enumerate(idx)])

    is_ne = np.ones(sizes, dtype=bool)
    for axis in range(len(sizes)):
        is_ne &= table >= table.max(axis=axis, keepdims=True)

    def to_profile(idx):
        return make_profile([cfg.strategy_sets[m][i] for m, i in enumerate(idx)], cfg.ns)

    best_idx = np.unravel_index(int(np.argmax(table)), sizes)
    ne_idx = [tuple(int(v) for v in row) for row in np.argwhere(is_ne)]
    return OracleResult(
        best_profile=to_profile(best_idx),
        best_utility=float(table[best_idx]),
        ne_profiles=tuple(to_profile(i) for i in ne_idx),
        ne_utilities=tuple(float(table[i]) for i in ne_idx),
        table=table,
    )


@dataclass(frozen=True)
class BaselineResult:
    profile: AllocationProfile
    utility: float
    radar_mi: float
    feasible: bool
    positive: bool
    evaluations: int


def _result(u: Utility, ks) -> BaselineResult:
    radar, _, cap = u.metrics(ks)
    value = u(ks)
    return BaselineResult(make_profile(ks, u.cfg.ns), value, float(radar.sum()),
                          bool(np.all(radar <= cap)), value > 0, u.evaluations)


def baseline_uniform(scenario: Scenario, cfg: GameConfig) -> BaselineResult:
    """Best common ratio; ``positive`` is False when no common ratio gives U > 0."""
    common = set(cfg.strategy_sets[0]).intersection(*cfg.strategy_sets[1:])
    if not common:
        raise ValueError("strategy sets share no common ratio")
    u = Utility(scenario, cfg)
    n = cfg.num_vehicles
    best = max(sorted(common), key=lambda k: (u([k] * n), -k))
    return _result(u, [best] * n)


def baseline_random(scenario: Scenario, cfg: GameConfig, samples: int = 100, seed: int = 0) -> BaselineResult:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    u = Utility(scenario, cfg)
    best_ks, best_u = None, -math.inf
    for _ in range(samples):
        ks = [s[rng.integers(len(s))] for s in cfg.strategy_sets]
        value = u(ks)
        if value > best_u:
            best_ks, best_u = ks, value
    return _result(u, best_ks)


@dataclass(frozen=True)
class AnnealingSchedule:
    """Geometric cooling; temperatures are fractions of the penalty."""

    initial: float = 0.1
    cooling: float = 0.95
    proposals_per_level: int = 100
    floor: float = 1e-6

    def __post_init__(self):
        if self.initial < 0 or self.floor <= 0 or not 0 < self.cooling < 1:
            raise ValueError(f"invalid annealing schedule: {self}")
        if self.proposals_per_level < 1:
            raise ValueError("proposals_per_level must be >= 1")

    def temperatures(self, scale: float):
        t = self.initial
        if t < self.floor:
            # frozen chain: one level of pure hill climbing
            yield 0.0
            return
        while t >= self.floor:
            yield t * scale
            t *= self.cooling


def baseline_annealing(scenario: Scenario, cfg: GameConfig,
                       schedule: AnnealingSchedule = AnnealingSchedule(),
                       seed: int = 0, initial: Optional[Sequence[int]] = None) -> BaselineResult:
    """Single-chain annealing; a move shifts one vehicle one grid step."""
    rng = np.random.default_rng(seed)
    u = Utility(scenario, cfg)
    sets = cfg.strategy_sets
    pos = ([0] * len(sets) if initial is None
           else [sets[m].index(k) for m, k in enumerate(initial)])
    ks = [sets[m][i] for m, i in enumerate(pos)]
    current = u(ks)
    best_ks, best_u = list(ks), current
    movable = [m for m, s in enumerate(sets) if len(s) > 1]
    if not movable:
        return _result(u, best_ks)
    for temp in schedule.temperatures(cfg.penalty):
        for _ in range(schedule.proposals_per_level):
            m = movable[rng.integers(len(movable))]
            step = 1 if rng.random() < 0.5 else -1
            i = pos[m] + step
            if not 0 <= i < len(sets[m]):
                i = pos[m] - step
            old = ks[m]
            ks[m] = sets[m][i]
            value = u(ks)
            delta = value - current
            if delta >= 0 or (temp > 0 and rng.random() < math.exp(delta / temp)):
                pos[m], current = i, value
                if value > best_u:
                    best_ks, best_u = list(ks), value
            else:
                ks[m] = old
    return _result(u, best_ks)


def check_penalty(scenario: Scenario, cfg: GameConfig) -> bool:
    """Warn when the penalty may not dominate every achievable radar MI."""
    bound = radar_mi_upper_bound(scenario, cfg)
    if bound > cfg.penalty:
        warnings.warn(
            f"penalty {cfg.penalty:.4g} bits is below the radar MI upper bound "
            f"{bound:.4g} bits; infeasible profiles may outscore feasible ones",
            RuntimeWarning, stacklevel=2,
        )
        return False
    return True
