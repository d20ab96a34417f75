"""Joint radar/communication time-allocation simulator."""

from .aoi import (AoiParams, UnstableQueueError, aoi_minimizer, average_aoi_mm1,
                  average_aoi_with_loss, feasible_ratio_indices, feasible_ratio_set, loss_exponent,
                  packet_loss, simulate_fcfs_queue, success_probability)
from .channel import ConfigError, RcsCase, Scenario, ScenarioConfig, build_scenario
from .game import (AnnealingSchedule, ConvergenceError, EnumerationBudgetError, GameConfig,
                   baseline_annealing, baseline_random, baseline_uniform, ctra_solve,
                   default_game_config, exhaustive_oracle, restrict_strategies, verify_ne)
from .metrics import CapacityMode, LinkEvaluator, totals, totals_by_segments
from .model import (AllocationProfile, DomainError, SystemParams, make_profile,
                    order_allocation, ratio_grid)

__version__ = "0.1.0"
