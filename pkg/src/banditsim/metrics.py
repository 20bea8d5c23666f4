"""Reward, regret, and traffic-allocation summaries of decision records."""
from __future__ import annotations

import io
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DataError
from .policies import DecisionRecord


@dataclass
class RegretReport:
    """Regret per trial and in total.

    ``g_hat_*`` measure the shortfall against the best empirical arm rate;
    ``g_per_trial`` measures it against the true best rate ``mu_star`` and is
    only filled when that rate is known.
    """

    horizon: int
    total_reward: int
    mu_hat_star: float
    g_hat_per_trial: float
    g_hat_total: float
    mu_star: float | None = None
    g_per_trial: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def arm_counts(records: Sequence[DecisionRecord], n_arms: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Per-arm (pulls, successes)."""
    arms = np.fromiter((r.arm for r in records), dtype=np.int64, count=len(records))
    rewards = np.fromiter((r.reward for r in records), dtype=np.int64, count=len(records))
    k = n_arms if n_arms is not None else (int(arms.max()) + 1 if len(arms) else 0)
    return np.bincount(arms, minlength=k), np.bincount(arms, weights=rewards, minlength=k).astype(np.int64)


def records_from_counts(pulls: Sequence[int], wins: Sequence[int]) -> list[DecisionRecord]:
    """Synthetic records reproducing given per-arm counts (arm-major order)."""
    records = []
    for arm, (n, w) in enumerate(zip(pulls, wins)):
        if not 0 <= w <= n:
            raise DataError(f"arm {arm}: wins {w} must lie in [0, {n}]")
        records.extend(DecisionRecord(len(records) + i, arm, int(i < w)) for i in range(n))
    return records


def empirical_regret(records: Sequence[DecisionRecord]) -> RegretReport:
    if not records:
        raise DataError("regret is undefined for an empty record sequence")
    pulls, wins = arm_counts(records)
    # exact rationals: keeps the total non-negative and Table-1-style totals integral
    best = max(Fraction(int(w), int(n)) for n, w in zip(pulls, wins) if n)
    horizon = len(records)
    total = int(wins.sum())
    g_hat_total = horizon * best - total
    return RegretReport(
        horizon=horizon,
        total_reward=total,
        mu_hat_star=float(best),
        g_hat_per_trial=float(g_hat_total / horizon),
        g_hat_total=float(g_hat_total),
    )


def theoretical_regret(records: Sequence[DecisionRecord], mu_star: float) -> RegretReport:
    report = empirical_regret(records)
    report.mu_star = float(mu_star)
    report.g_per_trial = (report.horizon * mu_star - report.total_reward) / report.horizon
    return report


def regret_report(records: Sequence[DecisionRecord], mu_star: float | None = None) -> RegretReport:
    if mu_star is None:
        return empirical_regret(records)
    return theoretical_regret(records, mu_star)


@dataclass
class AllocationSeries:
    window: int
    bucket_starts: np.ndarray
    shares: np.ndarray  # (n_buckets, n_arms)

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        buf.write("bucket_start,arm,share\n")
        for start, row in zip(self.bucket_starts.tolist(), self.shares.tolist()):
            for arm, share in enumerate(row):
                buf.write(f"{start},{arm},{share!r}\n")
        return buf.getvalue()


def traffic_allocation(
    records: Sequence[DecisionRecord], window: int = 1000, n_arms: int | None = None
) -> AllocationSeries:
    """Fraction of decisions per arm in consecutive windows of ``window`` decisions.

    Buckets are over decision order, and the final partial bucket is kept.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    arms = np.fromiter((r.arm for r in records), dtype=np.int64, count=len(records))
    k = n_arms if n_arms is not None else (int(arms.max()) + 1 if len(arms) else 0)
    starts = np.arange(0, len(arms), window)
    shares = np.zeros((len(starts), k))
    for b, start in enumerate(starts):
        chunk = arms[start:start + window]
        shares[b] = np.bincount(chunk, minlength=k) / len(chunk)
    return AllocationSeries(window, starts, shares)


def cumulative_reward(records: Sequence[DecisionRecord]) -> np.ndarray:
    return np.cumsum(np.fromiter((r.reward for r in records), dtype=np.int64, count=len(records)))


def reward_csv_text(records: Sequence[DecisionRecord]) -> str:
    buf = io.StringIO()
    buf.write("step,cum_reward\n")
    for r, cum in zip(records, cumulative_reward(records).tolist()):
        buf.write(f"{r.step},{cum}\n")
    return buf.getvalue()
