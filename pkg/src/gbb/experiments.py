"""Experiment configuration and sweep runners.

Per-run seeds come from ``run_seed(master, kind, x, rep)``: the four integers
(master seed, kind code, m or d, repetition) feed a numpy SeedSequence and the
first 32-bit word of its state is the run seed. Kind codes follow ``KIND_CODES``.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import learner
from .arms import NodeArmSet, random_unit_arms, soare_arm_set
from .design import DEFAULT_TOL, frank_wolfe_design
from .environment import BilinearParameter, soare_parameter
from .graphs import KINDS, graph_with_edges, make_graph
from .variance import scaling_slope, variance_norm

EXPERIMENTS = ("design", "learn", "allocate", "variance", "sweep-edges", "sweep-dim", "sweep-variance")
KIND_CODES = {"star": 0, "complete": 1, "circle": 2, "matching": 3, "custom": 4}
ARM_SETS = ("soare", "basis", "random")

SWEEP_FIELDS = ("kind", "m", "d", "omega", "rep", "rounds", "correct", "stopped", "seed")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str = "learn"
    graph: str = "circle"
    kinds: list = field(default_factory=lambda: list(KINDS))
    n_nodes: Optional[int] = None
    m: Optional[int] = None
    m_values: list = field(default_factory=lambda: [12, 30, 56, 90, 132, 156])
    d: int = 5
    d_values: list = field(default_factory=lambda: [2, 3, 4, 5])
    arm_set: str = "soare"
    omega: Optional[float] = None
    omegas: list = field(default_factory=lambda: [0.1, math.pi / 2])
    K: int = 100
    sigma: float = 1.0
    delta: float = 0.1
    seed: int = 0
    repetitions: int = 100
    max_rounds: int = 1_000_000
    check_every: int = 10
    workers: int = 1
    tol: float = DEFAULT_TOL
    n_samples: int = 100
    log_pi_power: int = 2
    arms: Optional[str] = None
    m_matrix: Optional[str] = None
    beta: Optional[str] = None
    graph_file: Optional[str] = None
    out: Optional[str] = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError("delta must lie in (0, 1)")
        if self.sigma < 0:
            raise ConfigError("sigma must be >= 0")
        if self.max_rounds < 1 or self.check_every < 1:
            raise ConfigError("max_rounds and check_every must be >= 1")
        if self.arm_set not in ARM_SETS:
            raise ConfigError(f"arm_set must be one of {ARM_SETS}")
        if self.graph not in KINDS + ("file",):
            raise ConfigError(f"unknown graph {self.graph!r}")
        for k in self.kinds:
            if k not in KINDS:
                raise ConfigError(f"unknown graph kind {k!r}")
        if self.log_pi_power not in (1, 2):
            raise ConfigError("log_pi_power must be 1 or 2")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path: str | Path, **overrides) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def run_seed(master: int, kind: str, x: int, rep: int) -> int:
    ss = np.random.SeedSequence([int(master), KIND_CODES[kind], int(x), int(rep)])
    return int(ss.generate_state(1)[0])


def build_arms(cfg: ExperimentConfig, d: Optional[int] = None, omega: Optional[float] = None) -> NodeArmSet:
    d = cfg.d if d is None else d
    if cfg.arms:
        return NodeArmSet.from_csv(cfg.arms)
    if cfg.arm_set == "basis":
        return NodeArmSet(np.eye(d))
    if cfg.arm_set == "random":
        return random_unit_arms(cfg.K, d, cfg.seed)
    omega = cfg.omega if omega is None else omega
    if omega is None:
        omega = cfg.omegas[0]
    return soare_arm_set(d, omega)


def build_param(cfg: ExperimentConfig, d: int) -> BilinearParameter:
    if cfg.m_matrix:
        return BilinearParameter.from_csv(cfg.m_matrix)
    return soare_parameter(d)


def _one_run(args):
    kind, m, d, omega, rep, seed, X, mu, param, cfg = args
    g = graph_with_edges(kind, m)
    state = learner.init(g, X, param, cfg.sigma, cfg.delta, seed, mu=mu, log_pi_power=cfg.log_pi_power)
    res = learner.run(state, cfg.max_rounds, cfg.check_every)
    gaps = learner.reward_gaps(state.arms, param)
    correct = bool(gaps[res.candidate] <= 1e-12)
    return (kind, m, d, omega, rep, res.rounds, int(correct), int(res.stopped), seed)


def _map(fn, jobs, workers: int):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def _omega_label(cfg: ExperimentConfig, omega):
    return float("nan") if cfg.arm_set != "soare" or cfg.arms else float(omega)


def run_sweep_edges(cfg: ExperimentConfig) -> list[tuple]:
    """Rounds-to-stop for every (kind, m, omega, rep) at fixed dimension."""
    for kind in cfg.kinds:
        for m in cfg.m_values:
            graph_with_edges(kind, m)
    omegas = cfg.omegas if cfg.arm_set == "soare" and not cfg.arms else [None]
    jobs = []
    for omega in omegas:
        X = build_arms(cfg, cfg.d, omega)
        param = build_param(cfg, X.dim)
        mu = frank_wolfe_design(X, tol=cfg.tol).distribution
        for kind in cfg.kinds:
            for m in cfg.m_values:
                for rep in range(cfg.repetitions):
                    jobs.append((kind, m, X.dim, _omega_label(cfg, omega), rep,
                                 run_seed(cfg.seed, kind, m, rep), X, mu, param, cfg))
    return _map(_one_run, jobs, cfg.workers)


def run_sweep_dimension(cfg: ExperimentConfig) -> list[tuple]:
    """Rounds-to-stop for every (kind, d, omega, rep) at a fixed edge count."""
    m = cfg.m if cfg.m is not None else 156
    for kind in cfg.kinds:
        graph_with_edges(kind, m)
    omegas = cfg.omegas if cfg.arm_set == "soare" and not cfg.arms else [None]
    jobs = []
    for omega in omegas:
        for d in cfg.d_values:
            X = build_arms(cfg, d, omega)
            param = build_param(cfg, d)
            mu = frank_wolfe_design(X, tol=cfg.tol).distribution
            for kind in cfg.kinds:
                for rep in range(cfg.repetitions):
                    jobs.append((kind, m, d, _omega_label(cfg, omega), rep,
                                 run_seed(cfg.seed, kind, d, rep), X, mu, param, cfg))
    return _map(_one_run, jobs, cfg.workers)


def run_variance_experiment(cfg: ExperimentConfig):
    """||Var(A_1)|| per (kind, m) on K random unit arms; returns (estimates, slopes)."""
    X = random_unit_arms(cfg.K, cfg.d, cfg.seed) if not cfg.arms else NodeArmSet.from_csv(cfg.arms)
    mu = frank_wolfe_design(X, tol=cfg.tol).distribution
    rows, slopes = [], {}
    for kind in cfg.kinds:
        ms = [m for m in cfg.m_values]
        for m in ms:
            graph_with_edges(kind, m)
        ests = [variance_norm(graph_with_edges(kind, m), X, mu, cfg.n_samples,
                              seed=run_seed(cfg.seed, kind, m, 0)) for m in ms]
        rows.extend(ests)
        if len(set(ms)) >= 2:
            slopes[kind] = float(np.polyfit(np.log(ms), np.log([e.spectral_norm for e in ests]), 1)[0])
    return rows, slopes


def summarize_sweep(rows, key_index: int = 1) -> dict:
    """Mean rounds and accuracy per (kind, key, omega)."""
    groups: dict = {}
    for r in rows:
        omega = None if isinstance(r[3], float) and math.isnan(r[3]) else r[3]
        groups.setdefault((r[0], r[key_index], omega), []).append(r)
    out = {}
    for key, rs in groups.items():
        rounds = np.array([r[5] for r in rs], dtype=float)
        out[key] = {
            "mean_rounds": float(rounds.mean()),
            "std_rounds": float(rounds.std(ddof=1)) if len(rs) > 1 else 0.0,
            "accuracy": float(np.mean([r[6] for r in rs])),
            "exhausted": int(sum(1 - r[7] for r in rs)),
            "n": len(rs),
        }
    return out


def write_sweep(rows, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_FIELDS)
        for r in rows:
            omega = "" if isinstance(r[3], float) and math.isnan(r[3]) else f"{r[3]:.10g}"
            w.writerow((r[0], r[1], r[2], omega, r[4], r[5], r[6], r[7], r[8]))
