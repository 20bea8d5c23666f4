"""Multi-armed bandit experimentation: policies, non-stationary simulation,
replay evaluation, batched delayed-feedback updates, and regret metrics."""

from .batch import BatchConfig, ConstantDelay, GeometricDelay, NoDelay, batch_sweep, run_batched, run_sequential
from .errors import ConfigError, DataError, LogFormatError, StateCorruptionError
from .metrics import (
    RegretReport,
    cumulative_reward,
    empirical_regret,
    theoretical_regret,
    traffic_allocation,
)
from .policies import (
    ArmStats,
    BetaPosterior,
    DecisionRecord,
    PolicySpec,
    empirical_winner,
    select,
    select_epsilon_greedy,
    select_thompson,
    select_ucb1,
    ucb1_index,
    update,
)
from .replay import ReplayResult, replay_evaluate, replay_many
from .simulation import (
    Environment,
    EventLog,
    LoggedEvent,
    ScheduleSegment,
    generate_uniform_log,
    make_crossing_scenario,
    prob_at,
    sample_reward,
    stationary,
)

__version__ = "0.1.0"
