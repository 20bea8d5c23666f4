"""Replay (rejection-sampling) offline evaluation over uniformly logged events.

For each logged event the policy picks an arm. If the pick matches the logged
arm, the logged reward is credited and the policy learns from it; otherwise
the event is discarded and the policy is untouched. With a uniform logging
policy the matched events form an unbiased sample of the policy's online
interaction. The policy's step counter advances only on matches.

Logs from non-uniform logging policies are not supported; that property is the
caller's responsibility and is not checked.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import LogFormatError
from .policies import (
    DETERMINISTIC,
    DecisionRecord,
    PolicySpec,
    PolicyState,
    selector_for,
    update,
)
from .simulation import EventLog, LoggedEvent


@dataclass
class ReplayResult:
    decisions: list[DecisionRecord]
    n_arms: int

    @property
    def matched_events(self) -> int:
        return len(self.decisions)

    @property
    def total_reward(self) -> int:
        return sum(d.reward for d in self.decisions)

    @property
    def mean_reward(self) -> float:
        return self.total_reward / self.matched_events if self.decisions else 0.0

    def cumulative_rewards(self) -> np.ndarray:
        return np.cumsum([d.reward for d in self.decisions], dtype=np.int64)

    def allocation_shares(self) -> np.ndarray:
        """Running share of each arm after every matched decision, ``(n, K)``."""
        if not self.decisions:
            return np.zeros((0, self.n_arms))
        arms = np.array([d.arm for d in self.decisions])
        onehot = arms[:, None] == np.arange(self.n_arms)[None, :]
        counts = np.cumsum(onehot, axis=0)
        return counts / np.arange(1, len(arms) + 1)[:, None]

    def summary(self) -> dict:
        return {
            "matched": self.matched_events,
            "total_reward": self.total_reward,
            "mean_reward": self.mean_reward,
        }

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        buf.write("step,arm,reward,cum_reward\n")
        cum = 0
        for d in self.decisions:
            cum += d.reward
            buf.write(f"{d.step},{d.arm},{d.reward},{cum}\n")
        return buf.getvalue()


def as_event_log(log: EventLog | Iterable[LoggedEvent], n_arms: int) -> EventLog:
    """Coerce to an EventLog and validate every event against ``n_arms``."""
    if not isinstance(log, EventLog):
        log = EventLog.from_events(log, n_arms)
    arms, rewards = log.arms, log.rewards
    bad = np.flatnonzero((arms < 0) | (arms >= n_arms) | ((rewards != 0) & (rewards != 1)))
    if len(bad):
        i = int(bad[0])
        raise LogFormatError(
            f"event {i} (arm={int(arms[i])}, reward={int(rewards[i])}) invalid for {n_arms} arms",
            line=i + 2,
        )
    return log


def replay_evaluate(
    state: PolicyState,
    log: EventLog | Iterable[LoggedEvent],
    rng: np.random.Generator,
) -> ReplayResult:
    """Replay ``log`` through ``state`` (mutated in place)."""
    log = as_event_log(log, state.n_arms)
    choose = selector_for(state)
    deterministic = isinstance(state, DETERMINISTIC)
    decisions: list[DecisionRecord] = []
    cached = -1
    for step, arm, reward in zip(log.steps.tolist(), log.arms.tolist(), log.rewards.tolist()):
        if deterministic:
            # pure function of the state, which only changes on a match
            if cached < 0:
                cached = choose(state, rng)
            choice = cached
        else:
            choice = choose(state, rng)
        if choice != arm:
            continue
        decisions.append(DecisionRecord(step, arm, reward))
        update(state, arm, reward)
        cached = -1
    return ReplayResult(decisions, state.n_arms)


@dataclass
class ReplayAggregate:
    seeds: list[int]
    totals: list[int]
    matched: list[int] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.totals))

    @property
    def std(self) -> float:
        return float(np.std(self.totals, ddof=1)) if len(self.totals) > 1 else 0.0

    @property
    def per_trial(self) -> np.ndarray:
        """Per-run reward per matched event."""
        return np.asarray(self.totals) / np.maximum(np.asarray(self.matched), 1)


def replay_many(
    spec: PolicySpec,
    log: EventLog | Iterable[LoggedEvent],
    n_runs: int,
    base_seed: int,
    n_arms: int | None = None,
) -> ReplayAggregate:
    """Replay a fresh policy ``n_runs`` times, run i seeded with ``base_seed + i``."""
    if n_runs < 1:
        raise ValueError(f"n_runs must be >= 1, got {n_runs}")
    if not isinstance(log, EventLog):
        log = EventLog.from_events(log, n_arms)
    k = n_arms if n_arms is not None else log.n_arms
    log = as_event_log(log, k)
    seeds = [base_seed + i for i in range(n_runs)]
    totals, matched = [], []
    for seed in seeds:
        result = replay_evaluate(spec.build(k), log, np.random.default_rng(seed))
        totals.append(result.total_reward)
        matched.append(result.matched_events)
    return ReplayAggregate(seeds, totals, matched)
