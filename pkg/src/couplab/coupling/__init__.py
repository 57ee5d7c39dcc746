"""Coupled pair processes: block constructions, l0 bookkeeping, episodes."""

from .engine import (COUPLED, IDENTICAL, INF, UNCOUPLED, BlockData, ConsistencyError, L0State,
                     SchedulerConfig, SchedulerConfigError, l0_update, run_block_coupled,
                     run_block_identical, run_block_uncoupled)
from .episodes import (EpisodeResult, block_probabilities, estimate_block_probabilities, run_episodes,
                       shifted_coupling_block_torus, simulate_pair)
