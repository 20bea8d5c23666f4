"""Batch-update bandit engine with delayed rewards.

Decisions inside a batch are served from a frozen snapshot of the policy.
Rewards (and their pulls) queue up until they become observable; at each
batch boundary every observable reward is applied to the live state and the
snapshot is refreshed from it. Time is measured in events, not wall-clock.

A reward decided at step ``t`` with delay ``d`` becomes observable at step
``t + 1 + d``; with no delay it can influence the very next decision, so a
batch size of 1 reproduces the fully sequential policy.
"""
from __future__ import annotations

import heapq
import io
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import ConfigError
from .policies import (
    DETERMINISTIC,
    DecisionRecord,
    PolicySpec,
    PolicyState,
    selector_for,
    update,
)
from .replay import ReplayResult, as_event_log
from .simulation import Environment, EventLog, sample_reward


@dataclass(frozen=True)
class NoDelay:
    pass


@dataclass(frozen=True)
class ConstantDelay:
    d: int

    def __post_init__(self) -> None:
        if self.d < 0:
            raise ConfigError(f"delay must be >= 0, got {self.d}")


@dataclass(frozen=True)
class GeometricDelay:
    """Delay in events, geometric on {0, 1, 2, ...} with the given mean."""

    mean: float

    def __post_init__(self) -> None:
        if not self.mean >= 0:
            raise ConfigError(f"mean delay must be >= 0, got {self.mean}")


DelayModel = Union[NoDelay, ConstantDelay, GeometricDelay]


def draw_delay(model: DelayModel, rng: np.random.Generator) -> int:
    if isinstance(model, NoDelay):
        return 0
    if isinstance(model, ConstantDelay):
        return model.d
    return int(rng.geometric(1.0 / (model.mean + 1.0))) - 1


@dataclass(frozen=True)
class BatchConfig:
    batch_size: int = 1
    delay: DelayModel = NoDelay()

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")


class PendingReward(NamedTuple):
    """Heap entry; tuple order sorts by availability, then decision time."""

    available_at: int
    decision_step: int
    arm: int
    reward: int


class BatchEngine:
    """Live state, frozen snapshot, and the queue of not-yet-applied rewards."""

    def __init__(self, state: PolicyState, cfg: BatchConfig):
        self.cfg = cfg
        self.live = state
        self.frozen = state.copy()
        self.pending: list[PendingReward] = []
        self.generated_rewards = 0
        self.generated_pulls = 0
        self.applied_rewards = 0
        self.applied_pulls = 0
        self._choose = selector_for(state)
        self._deterministic = isinstance(state, DETERMINISTIC)
        self._cached = -1

    def select(self, rng: np.random.Generator) -> int:
        if self._deterministic:
            if self._cached < 0:
                self._cached = self._choose(self.frozen, rng)
            return self._cached
        return self._choose(self.frozen, rng)

    def enqueue(self, step: int, arm: int, reward: int, rng: np.random.Generator) -> None:
        available_at = step + 1 + draw_delay(self.cfg.delay, rng)
        heapq.heappush(self.pending, PendingReward(available_at, step, arm, reward))
        self.generated_pulls += 1
        self.generated_rewards += reward

    def _apply(self, items: list[PendingReward]) -> None:
        items.sort(key=lambda p: p.decision_step)
        live = self.live
        for p in items:
            update(live, p.arm, p.reward)
        self.applied_pulls += len(items)
        self.applied_rewards += sum(p.reward for p in items)
        self.frozen = self.live.copy()
        self._cached = -1

    def boundary(self, at: int) -> None:
        """Apply every reward observable by step ``at`` and refresh the snapshot."""
        ready = []
        while self.pending and self.pending[0].available_at <= at:
            ready.append(heapq.heappop(self.pending))
        self._apply(ready)

    def flush(self) -> None:
        """End of horizon: apply everything still pending."""
        ready, self.pending = self.pending, []
        self._apply(ready)

    def step(self, t: int, env: Environment, rng: np.random.Generator) -> DecisionRecord:
        if t and t % self.cfg.batch_size == 0:
            self.boundary(t)
        arm = self.select(rng)
        reward = sample_reward(env, arm, t, rng)
        self.enqueue(t, arm, reward, rng)
        return DecisionRecord(t, arm, reward)


@dataclass
class BatchRun:
    records: list[DecisionRecord]
    state: PolicyState
    engine: BatchEngine

    @property
    def total_reward(self) -> int:
        return sum(r.reward for r in self.records)


def run_sequential(state: PolicyState, env: Environment, rng: np.random.Generator) -> list[DecisionRecord]:
    """Online run with immediate feedback: select, observe, update, every step."""
    choose = selector_for(state)
    records = []
    for t in range(env.horizon):
        arm = choose(state, rng)
        reward = sample_reward(env, arm, t, rng)
        update(state, arm, reward)
        records.append(DecisionRecord(t, arm, reward))
    return records


def run_batched(
    state: PolicyState, env: Environment, cfg: BatchConfig, rng: np.random.Generator
) -> BatchRun:
    engine = BatchEngine(state, cfg)
    records = [engine.step(t, env, rng) for t in range(env.horizon)]
    engine.flush()
    return BatchRun(records, engine.live, engine)


def replay_batched(
    state: PolicyState, log: EventLog, cfg: BatchConfig, rng: np.random.Generator
) -> ReplayResult:
    """Replay evaluation with batched updates; batches span log steps."""
    log = as_event_log(log, state.n_arms)
    engine = BatchEngine(state, cfg)
    bs = cfg.batch_size
    last_boundary = 0
    decisions = []
    for step, arm, reward in zip(log.steps.tolist(), log.arms.tolist(), log.rewards.tolist()):
        b = step // bs * bs
        if b > last_boundary:
            engine.boundary(b)
            last_boundary = b
        if engine.select(rng) != arm:
            continue
        engine.enqueue(step, arm, reward, rng)
        decisions.append(DecisionRecord(step, arm, reward))
    engine.flush()
    return ReplayResult(decisions, state.n_arms)


@dataclass
class SweepResult:
    """Per-(size, seed) totals from a batch-size sweep."""

    sizes: list[int]
    seeds: list[int]
    totals: dict[int, list[int]]

    def summary(self) -> list[tuple[int, float, float]]:
        rows = []
        for size in self.sizes:
            vals = np.asarray(self.totals[size], dtype=float)
            std = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
            rows.append((size, float(vals.mean()), std))
        return rows

    def runs_csv_text(self) -> str:
        buf = io.StringIO()
        buf.write("batch_size,run_seed,total_reward\n")
        for size in self.sizes:
            for seed, total in zip(self.seeds, self.totals[size]):
                buf.write(f"{size},{seed},{total}\n")
        return buf.getvalue()

    def summary_csv_text(self) -> str:
        buf = io.StringIO()
        buf.write("batch_size,mean_reward,std_reward\n")
        for size, mean, std in self.summary():
            buf.write(f"{size},{mean!r},{std!r}\n")
        return buf.getvalue()


def batch_sweep(
    spec: PolicySpec,
    source: Environment | EventLog,
    sizes: Sequence[int],
    n_runs: int,
    base_seed: int,
    delay: DelayModel = NoDelay(),
) -> SweepResult:
    """Total reward per batch size; every size sees the same seeds."""
    if not sizes:
        raise ConfigError("batch sweep needs at least one batch size")
    if n_runs < 1:
        raise ConfigError(f"n_runs must be >= 1, got {n_runs}")
    if len(set(sizes)) != len(sizes):
        raise ConfigError(f"duplicate batch sizes in {list(sizes)}")
    configs = [BatchConfig(int(s), delay) for s in sizes]
    seeds = [base_seed + i for i in range(n_runs)]
    totals: dict[int, list[int]] = {}
    for cfg in configs:
        runs = []
        for seed in seeds:
            rng = np.random.default_rng(seed)
            state = spec.build(source.n_arms)
            if isinstance(source, Environment):
                runs.append(run_batched(state, source, cfg, rng).total_reward)
            else:
                runs.append(replay_batched(state, source, cfg, rng).total_reward)
        totals[cfg.batch_size] = runs
    return SweepResult([c.batch_size for c in configs], seeds, totals)
