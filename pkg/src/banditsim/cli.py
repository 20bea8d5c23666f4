"""Command-line experiment runner.

    banditsim simulate    --config cfg.json --seed 7 --out runs/sim
    banditsim replay      --config cfg.json --out runs/replay
    banditsim batch-sweep --config cfg.json
    banditsim gap-sweep   --config cfg.json

The config is one JSON object; ``--seed`` and ``--out`` override its
``base_seed`` and ``output_dir``. Exit codes: 0 success, 2 config error,
3 data error. Every command validates its inputs before writing anything.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from . import metrics
from .batch import ConstantDelay, DelayModel, GeometricDelay, NoDelay, batch_sweep
from .errors import ConfigError, DataError
from .experiments import default_specs, gap_sweep
from .policies import ALGORITHMS, DecisionRecord, PolicySpec
from .replay import replay_evaluate, replay_many
from .simulation import (
    Environment,
    EventLog,
    from_schedules,
    generate_uniform_log,
    make_crossing_scenario,
    stationary,
)

log = logging.getLogger("banditsim")

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3


@dataclass
class ExperimentConfig:
    algorithm: str = "thompson"
    epsilon: float = 0.2
    prior_alpha: float = 1.0
    prior_beta: float = 1.0
    arm: int = 0
    environment: dict | None = None
    log_path: str | None = None
    records_path: str | None = None
    horizon: int | None = None
    n_arms: int | None = None
    batch: dict = field(default_factory=lambda: {"sizes": [1]})
    n_runs: int = 1
    base_seed: int = 0
    output_dir: str = "out"
    window: int = 1000
    gaps: list = field(default_factory=lambda: [0.0, 0.002, 0.02])
    baseline_rate: float = 0.01

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> ExperimentConfig:
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**raw)
        try:
            cfg.validate()
        except TypeError as exc:
            raise ConfigError(f"bad value type in config: {exc}") from None
        return cfg

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        sources = [s for s in (self.environment, self.log_path, self.records_path) if s is not None]
        if len(sources) > 1:
            raise ConfigError("give exactly one of environment, log_path, records_path")
        if self.horizon is not None and (not isinstance(self.horizon, int) or self.horizon < 1):
            raise ConfigError(f"horizon must be a positive integer, got {self.horizon!r}")
        if not isinstance(self.n_runs, int) or self.n_runs < 1:
            raise ConfigError(f"n_runs must be a positive integer, got {self.n_runs!r}")
        if not isinstance(self.window, int) or self.window < 1:
            raise ConfigError(f"window must be a positive integer, got {self.window!r}")
        if not isinstance(self.base_seed, int) or self.base_seed < 0:
            raise ConfigError(f"base_seed must be a non-negative integer, got {self.base_seed!r}")
        if not isinstance(self.batch, dict):
            raise ConfigError("'batch' must be an object")
        self.policy_spec()

    def policy_spec(self) -> PolicySpec:
        return PolicySpec(self.algorithm, self.epsilon, self.prior_alpha, self.prior_beta, self.arm)

    def build_environment(self) -> Environment:
        if self.environment is None:
            raise ConfigError("this command needs an 'environment' section")
        if self.horizon is None:
            raise ConfigError("an environment needs a top-level 'horizon'")
        env = dict(self.environment)
        kind = env.pop("type", None)
        try:
            if kind == "crossing":
                return make_crossing_scenario(
                    self.horizon, float(env["p_low"]), float(env["p_high"]), int(env["cross_step"])
                )
            if kind == "stationary":
                return stationary(env["probs"], self.horizon)
            if kind == "schedule":
                return from_schedules(env["arms"], self.horizon)
        except KeyError as exc:
            raise ConfigError(f"environment of type {kind!r} is missing {exc}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad environment parameters: {exc}") from None
        raise ConfigError(f"unknown environment type {kind!r}; use crossing, stationary or schedule")

    def batch_sizes(self) -> list[int]:
        sizes = self.batch.get("sizes", [1])
        if not sizes or not all(isinstance(s, int) and s >= 1 for s in sizes):
            raise ConfigError(f"batch sizes must be positive integers, got {sizes!r}")
        return list(sizes)

    def delay_model(self) -> DelayModel:
        spec = self.batch.get("delay")
        if spec is None or spec.get("type", "none") == "none":
            return NoDelay()
        try:
            if spec["type"] == "constant":
                return ConstantDelay(int(spec["d"]))
            if spec["type"] == "geometric":
                return GeometricDelay(float(spec["mean"]))
        except KeyError as exc:
            raise ConfigError(f"delay of type {spec['type']!r} is missing {exc}") from None
        raise ConfigError(f"unknown delay type {spec['type']!r}")


def log_rng(seed: int) -> np.random.Generator:
    """Stream for log generation, kept apart from the policy streams ``default_rng(seed + i)``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))


def _load_log(cfg: ExperimentConfig) -> EventLog:
    try:
        return EventLog.read_csv(cfg.log_path, cfg.n_arms)
    except FileNotFoundError:
        raise DataError(f"log file not found: {cfg.log_path}") from None


def _load_records(path: str) -> list[DecisionRecord]:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except FileNotFoundError:
        raise DataError(f"records file not found: {path}") from None
    if not lines or lines[0].split(",")[:3] != ["step", "arm", "reward"]:
        raise DataError(f"{path}: expected a header starting with step,arm,reward")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        try:
            step, arm, reward = int(parts[0]), int(parts[1]), int(parts[2])
        except (ValueError, IndexError):
            raise DataError(f"{path}: line {lineno}: malformed row {line!r}") from None
        if reward not in (0, 1) or arm < 0:
            raise DataError(f"{path}: line {lineno}: invalid arm/reward in {line!r}")
        records.append(DecisionRecord(step, arm, reward))
    return records


def _write(outputs: dict[str, str], out_dir: str) -> None:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    for name, text in outputs.items():
        with open(path / name, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        log.info("wrote %s", path / name)


def _json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _metric_outputs(records: list[DecisionRecord], n_arms: int, window: int, mu_star: float | None) -> dict[str, str]:
    out = {
        "alloc.csv": metrics.traffic_allocation(records, window, n_arms).to_csv_text(),
        "reward.csv": metrics.reward_csv_text(records),
    }
    if records:
        out["regret.json"] = _json(metrics.regret_report(records, mu_star).to_dict())
    return out


# --- commands --------------------------------------------------------------


def cmd_simulate(cfg: ExperimentConfig) -> dict[str, str]:
    env = cfg.build_environment()
    return {"log.csv": generate_uniform_log(env, log_rng(cfg.base_seed)).to_csv_text()}


def cmd_replay(cfg: ExperimentConfig) -> dict[str, str]:
    if cfg.records_path is not None:
        records = _load_records(cfg.records_path)
        n_arms = cfg.n_arms or (max(r.arm for r in records) + 1 if records else 1)
        return _metric_outputs(records, n_arms, cfg.window, None)

    mu_star = None
    if cfg.log_path is not None:
        event_log = _load_log(cfg)
    elif cfg.environment is not None:
        env = cfg.build_environment()
        event_log = generate_uniform_log(env, log_rng(cfg.base_seed))
        mu_star = float(env.overall_rates().max())
    else:
        raise ConfigError("replay needs one of environment, log_path, records_path")
    n_arms = cfg.n_arms or event_log.n_arms
    if n_arms < 1:
        raise DataError("log contains no events and n_arms is not set")
    spec = cfg.policy_spec()

    result = replay_evaluate(spec.build(n_arms), event_log, np.random.default_rng(cfg.base_seed))
    agg = replay_many(spec, event_log, cfg.n_runs, cfg.base_seed, n_arms)
    summary = result.summary()
    summary["runs"] = {
        "seeds": agg.seeds,
        "total_rewards": agg.totals,
        "matched": agg.matched,
        "mean_total_reward": agg.mean,
        "std_total_reward": agg.std,
    }
    if cfg.algorithm != "uniform_ab":
        base = replay_many(PolicySpec("uniform_ab"), event_log, cfg.n_runs, cfg.base_seed, n_arms)
        summary["runs"]["normalized_to_uniform"] = agg.mean / base.mean if base.mean else None

    out = {"decisions.csv": result.to_csv_text(), "summary.json": _json(summary)}
    out.update(_metric_outputs(result.decisions, n_arms, cfg.window, mu_star))
    return out


def cmd_batch_sweep(cfg: ExperimentConfig) -> dict[str, str]:
    sizes = cfg.batch_sizes()
    delay = cfg.delay_model()
    if cfg.log_path is not None:
        source: Environment | EventLog = _load_log(cfg)
    else:
        source = cfg.build_environment()
    sweep = batch_sweep(cfg.policy_spec(), source, sizes, cfg.n_runs, cfg.base_seed, delay)
    return {"sweep_runs.csv": sweep.runs_csv_text(), "sweep_summary.csv": sweep.summary_csv_text()}


def cmd_gap_sweep(cfg: ExperimentConfig) -> dict[str, str]:
    if cfg.horizon is None:
        raise ConfigError("gap-sweep needs a top-level 'horizon'")
    gaps = [float(g) for g in cfg.gaps]
    result = gap_sweep(
        gaps, cfg.baseline_rate, cfg.horizon, cfg.n_runs, cfg.base_seed,
        default_specs(cfg.epsilon, cfg.prior_alpha, cfg.prior_beta),
    )
    return {"gap_sweep.csv": result.to_csv_text()}


COMMANDS = {
    "simulate": cmd_simulate,
    "replay": cmd_replay,
    "batch-sweep": cmd_batch_sweep,
    "gap-sweep": cmd_gap_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="banditsim", description="Seeded multi-armed bandit experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="overrides base_seed")
        p.add_argument("--out", help="overrides output_dir")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    raw: dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if args.seed is not None:
        raw["base_seed"] = args.seed
    if args.out is not None:
        raw["output_dir"] = args.out
    return ExperimentConfig.from_dict(raw)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args)
        outputs = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    _write(outputs, cfg.output_dir)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
