"""Seeded multi-policy replay experiments.

Each replication draws one uniform log from the environment and replays every
policy over that same log, so policies are compared on paired data. Seeds are
split with ``numpy.random.SeedSequence``: one child stream for the log and one
per policy.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError
from .policies import PolicySpec
from .replay import replay_evaluate
from .simulation import Environment, generate_uniform_log, stationary

BASELINE = "uniform_ab"
MAB_ALGORITHMS = ("epsilon_greedy", "thompson", "ucb1")


def default_specs(epsilon: float = 0.2, prior_alpha: float = 1.0, prior_beta: float = 1.0) -> dict[str, PolicySpec]:
    return {
        "epsilon_greedy": PolicySpec("epsilon_greedy", epsilon=epsilon),
        "thompson": PolicySpec("thompson", prior_alpha=prior_alpha, prior_beta=prior_beta),
        "ucb1": PolicySpec("ucb1"),
        BASELINE: PolicySpec(BASELINE),
    }


def compare_on_env(
    env: Environment,
    specs: Mapping[str, PolicySpec],
    n_runs: int,
    base_seed: int,
) -> dict[str, np.ndarray]:
    """Total replay reward per policy per replication, shape ``(n_runs,)`` each."""
    if n_runs < 1:
        raise ConfigError(f"n_runs must be >= 1, got {n_runs}")
    names = list(specs)
    totals = {name: np.zeros(n_runs, dtype=np.int64) for name in names}
    for i in range(n_runs):
        log_ss, *policy_ss = np.random.SeedSequence(base_seed + i).spawn(1 + len(names))
        log = generate_uniform_log(env, np.random.default_rng(log_ss))
        for name, ss in zip(names, policy_ss):
            result = replay_evaluate(specs[name].build(env.n_arms), log, np.random.default_rng(ss))
            totals[name][i] = result.total_reward
    return totals


def normalized(totals: np.ndarray, baseline: np.ndarray) -> tuple[float, float]:
    """Ratio of mean totals to the baseline's, with a paired delta-method SE."""
    base = baseline.mean()
    if base == 0:
        return math.nan, math.nan
    ratio = totals.mean() / base
    n = len(totals)
    if n < 2:
        return float(ratio), 0.0
    resid = totals - ratio * baseline
    return float(ratio), float(resid.std(ddof=1) / math.sqrt(n) / base)


@dataclass
class GapRow:
    gap: float
    algorithm: str
    mean_reward: float
    std_reward: float
    normalized_reward: float
    normalized_se: float


@dataclass
class GapSweepResult:
    rows: list[GapRow]
    totals: dict[float, dict[str, np.ndarray]]

    def lift(self, gap: float, algorithm: str) -> GapRow:
        for row in self.rows:
            if row.gap == gap and row.algorithm == algorithm:
                return row
        raise KeyError((gap, algorithm))

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        buf.write("gap,algorithm,mean_reward,std_reward,normalized_reward,normalized_se\n")
        for r in self.rows:
            buf.write(
                f"{r.gap!r},{r.algorithm},{r.mean_reward!r},{r.std_reward!r},"
                f"{r.normalized_reward!r},{r.normalized_se!r}\n"
            )
        return buf.getvalue()


def gap_sweep(
    gaps: Sequence[float],
    baseline_rate: float,
    horizon: int,
    n_runs: int,
    base_seed: int,
    specs: Mapping[str, PolicySpec] | None = None,
) -> GapSweepResult:
    """Two-arm stationary logs with rates ``(p, p + gap)``; rewards relative to uniform A/B.

    The same seeds are reused for every gap, so the logs share their arm and
    uniform draws across gaps (common random numbers).
    """
    if not gaps:
        raise ConfigError("gap sweep needs at least one gap")
    for g in gaps:
        if g < 0 or not 0.0 <= baseline_rate + g <= 1.0:
            raise ConfigError(f"gap {g} invalid for baseline rate {baseline_rate}")
    specs = dict(specs) if specs is not None else default_specs()
    if BASELINE not in specs:
        specs[BASELINE] = PolicySpec(BASELINE)
    rows, all_totals = [], {}
    for g in gaps:
        env = stationary([baseline_rate, baseline_rate + g], horizon)
        totals = compare_on_env(env, specs, n_runs, base_seed)
        all_totals[g] = totals
        for name, vals in totals.items():
            ratio, se = normalized(vals, totals[BASELINE])
            std = float(vals.std(ddof=1)) if n_runs > 1 else 0.0
            rows.append(GapRow(float(g), name, float(vals.mean()), std, ratio, se))
    return GapSweepResult(rows, all_totals)
