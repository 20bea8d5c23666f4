"""Non-stationary Bernoulli environments and uniformly logged event streams.

Each arm's success probability is a piecewise-constant schedule over the
step axis ``[0, horizon)``. Logs are produced by a uniform random logging
policy, which is what makes them usable for replay evaluation.

Log CSV format: header ``step,arm,reward`` then one row per event, arm as an
integer index, reward as 0/1, LF line endings.
"""
from __future__ import annotations

import bisect
import csv
import io
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ConfigError, DataError, LogFormatError

LOG_HEADER = ("step", "arm", "reward")


@dataclass(frozen=True)
class ScheduleSegment:
    start_step: int
    end_step: int
    prob: float

    def __post_init__(self) -> None:
        if not self.start_step < self.end_step:
            raise ConfigError(f"empty segment [{self.start_step}, {self.end_step})")
        if not 0.0 <= self.prob <= 1.0:
            raise ConfigError(f"segment probability {self.prob} outside [0, 1]")


@dataclass(frozen=True)
class Environment:
    """Per-arm schedules that must each tile ``[0, horizon)`` exactly."""

    arms: tuple[tuple[ScheduleSegment, ...], ...]
    horizon: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "arms", tuple(tuple(segs) for segs in self.arms))
        if self.horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon}")
        if not self.arms:
            raise ConfigError("environment needs at least one arm")
        for i, segs in enumerate(self.arms):
            cursor = 0
            for seg in segs:
                if seg.start_step != cursor:
                    raise ConfigError(f"arm {i}: gap or overlap at step {cursor}")
                cursor = seg.end_step
            if cursor != self.horizon:
                raise ConfigError(f"arm {i}: schedule ends at {cursor}, horizon is {self.horizon}")

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    @cached_property
    def _starts(self) -> tuple[list[int], ...]:
        return tuple([seg.start_step for seg in segs] for segs in self.arms)

    def prob_table(self) -> np.ndarray:
        """Dense ``(n_arms, horizon)`` array of success probabilities."""
        table = np.empty((self.n_arms, self.horizon))
        for i, segs in enumerate(self.arms):
            for seg in segs:
                table[i, seg.start_step:seg.end_step] = seg.prob
        return table

    def overall_rates(self) -> np.ndarray:
        """Time-averaged success probability of each arm over the horizon."""
        return np.array([
            sum(seg.prob * (seg.end_step - seg.start_step) for seg in segs) / self.horizon
            for segs in self.arms
        ])


def stationary(probs: Sequence[float], horizon: int) -> Environment:
    return Environment(tuple((ScheduleSegment(0, horizon, float(p)),) for p in probs), horizon)


def from_schedules(schedules: Sequence[Sequence[Sequence[float]]], horizon: int) -> Environment:
    """Build from nested ``[[start, end, prob], ...]`` lists, one list per arm."""
    arms = []
    for segs in schedules:
        arms.append(tuple(ScheduleSegment(int(s), int(e), float(p)) for s, e, p in segs))
    return Environment(tuple(arms), horizon)


def make_crossing_scenario(horizon: int, p_low: float, p_high: float, cross_step: int) -> Environment:
    """Two arms whose overall rates match while their local rates cross.

    Arm 0 (v1) is constant. Arm 1 (v2) runs at ``p_high`` before
    ``cross_step`` and ``p_low`` after it. The constant rate of v1 is the
    time-weighted mean of v2's schedule, so both arms end with the same
    expected overall conversion rate.
    """
    if not 0 < cross_step < horizon:
        raise ConfigError(f"cross_step must lie in (0, {horizon}), got {cross_step}")
    if not 0.0 <= p_low < p_high <= 1.0:
        raise ConfigError(f"need 0 <= p_low < p_high <= 1, got p_low={p_low}, p_high={p_high}")
    p_v1 = (p_high * cross_step + p_low * (horizon - cross_step)) / horizon
    v1 = (ScheduleSegment(0, horizon, p_v1),)
    v2 = (ScheduleSegment(0, cross_step, p_high), ScheduleSegment(cross_step, horizon, p_low))
    return Environment((v1, v2), horizon)


def prob_at(env: Environment, arm: int, t: int) -> float:
    if not 0 <= t < env.horizon:
        raise IndexError(f"step {t} outside [0, {env.horizon})")
    segs = env.arms[arm]
    return segs[bisect.bisect_right(env._starts[arm], t) - 1].prob


def sample_reward(env: Environment, arm: int, t: int, rng: np.random.Generator) -> int:
    return int(rng.random() < prob_at(env, arm, t))


# --- logged events ---------------------------------------------------------


@dataclass(slots=True, frozen=True)
class LoggedEvent:
    step: int
    arm: int
    reward: int


class EventLog:
    """A uniformly logged event stream held as parallel integer arrays."""

    def __init__(self, steps, arms, rewards, n_arms: int | None = None):
        self.steps = np.asarray(steps, dtype=np.int64)
        self.arms = np.asarray(arms, dtype=np.int64)
        self.rewards = np.asarray(rewards, dtype=np.int64)
        if not len(self.steps) == len(self.arms) == len(self.rewards):
            raise DataError("steps, arms and rewards must have equal length")
        if n_arms is None:
            n_arms = int(self.arms.max()) + 1 if len(self.arms) else 0
        self.n_arms = n_arms

    @classmethod
    def from_events(cls, events: Iterable[LoggedEvent], n_arms: int | None = None) -> EventLog:
        events = list(events)
        return cls(
            [e.step for e in events], [e.arm for e in events], [e.reward for e in events], n_arms
        )

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self) -> Iterator[LoggedEvent]:
        for s, a, r in zip(self.steps.tolist(), self.arms.tolist(), self.rewards.tolist()):
            yield LoggedEvent(s, a, r)

    def __getitem__(self, i: int) -> LoggedEvent:
        return LoggedEvent(int(self.steps[i]), int(self.arms[i]), int(self.rewards[i]))

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(LOG_HEADER) + "\n")
        for s, a, r in zip(self.steps.tolist(), self.arms.tolist(), self.rewards.tolist()):
            buf.write(f"{s},{a},{r}\n")
        return buf.getvalue()

    def write_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv_text())

    @classmethod
    def read_csv(cls, path: str | os.PathLike, n_arms: int | None = None) -> EventLog:
        with open(path, encoding="utf-8", newline="") as fh:
            return cls.parse_csv(fh, n_arms)

    @classmethod
    def parse_csv(cls, lines: Iterable[str], n_arms: int | None = None) -> EventLog:
        reader = csv.reader(lines)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != LOG_HEADER:
            raise LogFormatError(f"expected header {','.join(LOG_HEADER)!r}, got {header!r}", line=1)
        steps, arms, rewards = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise LogFormatError(f"expected 3 fields, got {len(row)}", line=lineno)
            try:
                s, a, r = int(row[0]), int(row[1]), int(row[2])
            except ValueError:
                raise LogFormatError(f"non-integer field in {row!r}", line=lineno) from None
            if a < 0 or (n_arms is not None and a >= n_arms):
                raise LogFormatError(f"arm {a} out of range", line=lineno)
            if r not in (0, 1):
                raise LogFormatError(f"reward {r} is not 0 or 1", line=lineno)
            steps.append(s)
            arms.append(a)
            rewards.append(r)
        return cls(steps, arms, rewards, n_arms)


def generate_uniform_log(env: Environment, rng: np.random.Generator) -> EventLog:
    """One event per step: a uniformly random arm and its Bernoulli reward."""
    t = np.arange(env.horizon)
    arms = rng.integers(0, env.n_arms, size=env.horizon)
    u = rng.random(env.horizon)
    rewards = (u < env.prob_table()[arms, t]).astype(np.int64)
    return EventLog(t, arms, rewards, env.n_arms)
