"""Arm selection and state updates for binary-reward bandit policies.

Three learning policies are provided (epsilon-greedy, Thompson sampling with a
Beta-Bernoulli posterior, UCB1) plus two non-learning baselines used by the
evaluators: uniform random selection (the A/B-test allocation) and a fixed arm.

States are plain mutable dataclasses. Selection functions take the random
stream explicitly (a ``numpy.random.Generator``); no policy owns an RNG.
Every argmax breaks ties toward the smallest arm index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, StateCorruptionError

ALGORITHMS = ("epsilon_greedy", "thompson", "ucb1", "uniform_ab", "fixed")


@dataclass(slots=True)
class ArmStats:
    pulls: int = 0
    reward_sum: int = 0

    @property
    def mean(self) -> float:
        return self.reward_sum / self.pulls if self.pulls else 0.0


@dataclass(slots=True)
class BetaPosterior:
    alpha: float = 1.0
    beta: float = 1.0

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)


@dataclass(slots=True, frozen=True)
class DecisionRecord:
    """One decision: the visit's step, the arm shown, and the observed reward."""

    step: int
    arm: int
    reward: int


@dataclass(kw_only=True)
class PolicyState:
    """Common base: ``step`` counts the updates applied so far."""

    step: int = 0

    @property
    def n_arms(self) -> int:
        raise NotImplementedError

    def copy(self) -> PolicyState:
        raise NotImplementedError


@dataclass(kw_only=True)
class _CountingState(PolicyState):
    stats: list[ArmStats] = field(default_factory=list)

    @property
    def n_arms(self) -> int:
        return len(self.stats)

    def _copy_stats(self) -> list[ArmStats]:
        return [ArmStats(s.pulls, s.reward_sum) for s in self.stats]


@dataclass(kw_only=True)
class EpsilonGreedyState(_CountingState):
    epsilon: float = 0.2

    def copy(self) -> EpsilonGreedyState:
        return EpsilonGreedyState(step=self.step, stats=self._copy_stats(), epsilon=self.epsilon)


@dataclass(kw_only=True)
class Ucb1State(_CountingState):
    def copy(self) -> Ucb1State:
        return Ucb1State(step=self.step, stats=self._copy_stats())


@dataclass(kw_only=True)
class UniformState(_CountingState):
    """A/B-test allocation: uniform random choice, counts kept for reporting only."""

    def copy(self) -> UniformState:
        return UniformState(step=self.step, stats=self._copy_stats())


@dataclass(kw_only=True)
class FixedArmState(_CountingState):
    arm: int = 0

    def copy(self) -> FixedArmState:
        return FixedArmState(step=self.step, stats=self._copy_stats(), arm=self.arm)


@dataclass(kw_only=True)
class ThompsonState(PolicyState):
    posteriors: list[BetaPosterior] = field(default_factory=list)

    @property
    def n_arms(self) -> int:
        return len(self.posteriors)

    def copy(self) -> ThompsonState:
        return ThompsonState(
            step=self.step,
            posteriors=[BetaPosterior(p.alpha, p.beta) for p in self.posteriors],
        )


def _check_arms(n_arms: int) -> None:
    if n_arms < 1:
        raise ConfigError(f"need at least one arm, got {n_arms}")


def epsilon_greedy(n_arms: int, epsilon: float = 0.2) -> EpsilonGreedyState:
    _check_arms(n_arms)
    if not 0.0 <= epsilon <= 1.0:
        raise ConfigError(f"epsilon must lie in [0, 1], got {epsilon}")
    return EpsilonGreedyState(stats=[ArmStats() for _ in range(n_arms)], epsilon=float(epsilon))


def thompson(
    n_arms: int,
    alpha: float | Sequence[float] = 1.0,
    beta: float | Sequence[float] = 1.0,
) -> ThompsonState:
    """Thompson sampling state; priors are scalars or one value per arm."""
    _check_arms(n_arms)
    alphas = [float(alpha)] * n_arms if np.isscalar(alpha) else [float(a) for a in alpha]
    betas = [float(beta)] * n_arms if np.isscalar(beta) else [float(b) for b in beta]
    if len(alphas) != n_arms or len(betas) != n_arms:
        raise ConfigError("per-arm prior lists must have one entry per arm")
    for a, b in zip(alphas, betas):
        if not (math.isfinite(a) and math.isfinite(b) and a > 0 and b > 0):
            raise ConfigError(f"Beta prior parameters must be positive and finite, got ({a}, {b})")
    return ThompsonState(posteriors=[BetaPosterior(a, b) for a, b in zip(alphas, betas)])


def ucb1(n_arms: int) -> Ucb1State:
    _check_arms(n_arms)
    return Ucb1State(stats=[ArmStats() for _ in range(n_arms)])


def uniform(n_arms: int) -> UniformState:
    _check_arms(n_arms)
    return UniformState(stats=[ArmStats() for _ in range(n_arms)])


def fixed_arm(n_arms: int, arm: int = 0) -> FixedArmState:
    _check_arms(n_arms)
    if not 0 <= arm < n_arms:
        raise ConfigError(f"fixed arm {arm} outside [0, {n_arms})")
    return FixedArmState(stats=[ArmStats() for _ in range(n_arms)], arm=arm)


@dataclass(frozen=True)
class PolicySpec:
    """Algorithm name plus parameters; ``build`` yields a fresh state."""

    algorithm: str
    epsilon: float = 0.2
    prior_alpha: float = 1.0
    prior_beta: float = 1.0
    arm: int = 0

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if not (self.prior_alpha > 0 and self.prior_beta > 0):
            raise ConfigError("Beta prior parameters must be positive")

    def build(self, n_arms: int) -> PolicyState:
        if self.algorithm == "epsilon_greedy":
            return epsilon_greedy(n_arms, self.epsilon)
        if self.algorithm == "thompson":
            return thompson(n_arms, self.prior_alpha, self.prior_beta)
        if self.algorithm == "ucb1":
            return ucb1(n_arms)
        if self.algorithm == "uniform_ab":
            return uniform(n_arms)
        return fixed_arm(n_arms, self.arm)


# --- selection -------------------------------------------------------------


def empirical_winner(state: PolicyState) -> int:
    """Arm with the highest empirical mean (posterior mean for Thompson)."""
    if isinstance(state, ThompsonState):
        means = [p.alpha / (p.alpha + p.beta) for p in state.posteriors]
    else:
        means = [s.reward_sum / s.pulls if s.pulls else 0.0 for s in state.stats]
    best, best_mean = 0, means[0]
    for arm in range(1, len(means)):
        if means[arm] > best_mean:
            best, best_mean = arm, means[arm]
    return best


def select_epsilon_greedy(state: EpsilonGreedyState, rng: np.random.Generator) -> int:
    """Explore uniformly over all arms with probability epsilon, else exploit.

    The exploration draw includes the current winner, so the winner is shown
    with probability ``1 - epsilon + epsilon / K``.
    """
    k = len(state.stats)
    if k == 0:
        raise ConfigError("epsilon-greedy state has no arms")
    if rng.random() < state.epsilon:
        return int(rng.random() * k)
    return empirical_winner(state)


def select_thompson(state: ThompsonState, rng: np.random.Generator) -> int:
    if not state.posteriors:
        raise ConfigError("Thompson state has no arms")
    best, best_draw = 0, -1.0
    for arm, post in enumerate(state.posteriors):
        a, b = post.alpha, post.beta
        if not (a > 0 and b > 0 and a < math.inf and b < math.inf):
            raise StateCorruptionError(f"arm {arm} has invalid posterior Beta({a}, {b})")
        draw = rng.beta(a, b)
        if draw > best_draw:
            best, best_draw = arm, draw
    return best


def ucb1_index(stats: ArmStats, t: int) -> float:
    """Empirical mean plus the bonus ``sqrt(2 ln t / (pulls + 1))``.

    The ``+ 1`` keeps the bonus finite for unplayed arms, so no initial
    round-robin over the arms is needed.
    """
    if t < 1:
        raise ValueError(f"UCB1 decision time must be >= 1, got {t}")
    return stats.mean + math.sqrt(2.0 * math.log(t) / (stats.pulls + 1))


def select_ucb1(state: Ucb1State, rng: np.random.Generator | None = None) -> int:
    """Deterministic; ``rng`` is accepted only for a uniform call signature."""
    stats = state.stats
    if not stats:
        raise ConfigError("UCB1 state has no arms")
    two_log_t = 2.0 * math.log(state.step + 1)
    best, best_index = 0, -math.inf
    for arm, s in enumerate(stats):
        n = s.pulls
        index = (s.reward_sum / n if n else 0.0) + math.sqrt(two_log_t / (n + 1))
        if index > best_index:
            best, best_index = arm, index
    return best


def select_uniform(state: UniformState, rng: np.random.Generator) -> int:
    return int(rng.random() * len(state.stats))


def select_fixed(state: FixedArmState, rng: np.random.Generator | None = None) -> int:
    return state.arm


_SELECTORS: dict[type, Callable[[PolicyState, np.random.Generator], int]] = {
    EpsilonGreedyState: select_epsilon_greedy,
    ThompsonState: select_thompson,
    Ucb1State: select_ucb1,
    UniformState: select_uniform,
    FixedArmState: select_fixed,
}

#: Policies whose choice depends on the state alone, never on the random stream.
DETERMINISTIC = (Ucb1State, FixedArmState)


def selector_for(state: PolicyState) -> Callable[[PolicyState, np.random.Generator], int]:
    """The selection function for this state's policy type."""
    try:
        return _SELECTORS[type(state)]
    except KeyError:
        raise TypeError(f"no selection rule for {type(state).__name__}") from None


def select(state: PolicyState, rng: np.random.Generator) -> int:
    return selector_for(state)(state, rng)


def update(state: PolicyState, arm: int, reward: int) -> PolicyState:
    """Apply one (arm, reward) observation in place and return the state.

    Thompson: ``(alpha, beta) <- (alpha + r, beta - r + 1)`` on the shown arm.
    Counting policies: one more pull, ``r`` more successes.
    """
    if reward != 0 and reward != 1:
        raise ValueError(f"rewards must be binary (0 or 1), got {reward!r}")
    if not 0 <= arm < state.n_arms:
        raise ValueError(f"arm {arm} outside [0, {state.n_arms})")
    reward = int(reward)
    if isinstance(state, ThompsonState):
        post = state.posteriors[arm]
        post.alpha += reward
        post.beta += 1 - reward
    else:
        s = state.stats[arm]
        s.pulls += 1
        s.reward_sum += reward
    state.step += 1
    return state
