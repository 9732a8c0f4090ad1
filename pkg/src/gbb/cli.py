"""Command-line entry point: ``gbb <subcommand> [options]``.

Exit codes: 0 success, 1 unknown subcommand, 2 configuration error,
3 design solver convergence failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import subprocess
import sys
import time
from pathlib import Path

from . import kernels, learner
from .allocation import InstanceTooLarge, bipartite_allocation, brute_force_extremes, differential_ratio
from .arms import ArmSetError, NodeArmSet
from .design import DesignConvergenceError, frank_wolfe_design
from .environment import BilinearParameter, DimensionError, augment, augment_arms, global_reward, load_beta
from .experiments import (EXPERIMENTS, ConfigError, ExperimentConfig, build_arms, build_param,
                          run_seed, run_sweep_dimension, run_sweep_edges, run_variance_experiment,
                          summarize_sweep, write_sweep)
from .graphs import GraphError, load_edge_list, make_graph, nodes_for_edges
from .variance import variance_norm, write_estimates

log = logging.getLogger("gbb")

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 1, 2, 3

# CLI flag -> config field
_FLAG_FIELDS = {
    "seed": "seed", "reps": "repetitions", "out": "out", "graph": "graph", "m": "m", "d": "d",
    "omega": "omega", "sigma": "sigma", "delta": "delta", "max_rounds": "max_rounds",
    "check_every": "check_every", "workers": "workers", "tol": "tol", "arms": "arms",
    "m_matrix": "m_matrix", "beta": "beta", "n_nodes": "n_nodes", "arm_set": "arm_set",
    "n_samples": "n_samples", "K": "K",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _parser(experiment: str) -> argparse.ArgumentParser:
    p = _Parser(prog=f"gbb {experiment}")
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--out", help="output path (CSV, or JSON for design)")
    p.add_argument("--graph", help="star|complete|circle|matching|file, or a path to an edge-list file")
    p.add_argument("--m", type=int, help="number of directed edges")
    p.add_argument("--n-nodes", dest="n_nodes", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--omega", type=float)
    p.add_argument("--arm-set", dest="arm_set", choices=("soare", "basis", "random"))
    p.add_argument("--K", type=int, help="number of random unit arms")
    p.add_argument("--sigma", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--max-rounds", dest="max_rounds", type=int)
    p.add_argument("--check-every", dest="check_every", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--arms", help="CSV of node-arms, one row per arm")
    p.add_argument("--m-matrix", dest="m_matrix", help="CSV of the d x d parameter matrix")
    p.add_argument("--beta", help="one-row CSV of a linear term (requires --m-matrix)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _config(experiment: str, ns: argparse.Namespace) -> ExperimentConfig:
    overrides = {field: getattr(ns, flag) for flag, field in _FLAG_FIELDS.items()}
    graph_file = None
    if overrides["graph"] is not None and overrides["graph"] not in ("star", "complete", "circle",
                                                                     "matching", "file"):
        graph_file = overrides["graph"]
        overrides["graph"] = "file"
    overrides["experiment"] = experiment
    if graph_file:
        overrides["graph_file"] = graph_file
    if ns.config:
        return ExperimentConfig.from_json(ns.config, **overrides)
    return ExperimentConfig.from_dict({k: v for k, v in overrides.items() if v is not None})


def _git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True,
                             text=True, timeout=5, cwd=Path(__file__).parent)
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def _write_manifest(cfg: ExperimentConfig, out: Path, wall: float, extra: dict | None = None):
    manifest = {
        "config": cfg.to_dict(),
        "git_describe": _git_describe(),
        "backend": kernels.backend(),
        "wall_time_s": wall,
        "started": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    if extra:
        manifest.update(extra)
    path = out.with_name(out.name + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, default=str) + "\n")
    return path


def _out_path(cfg: ExperimentConfig, default: str) -> Path:
    return Path(cfg.out or default)


def _graph(cfg: ExperimentConfig):
    if cfg.graph == "file":
        if not cfg.graph_file:
            raise ConfigError("--graph file needs a path")
        return load_edge_list(cfg.graph_file)
    if cfg.n_nodes is not None:
        return make_graph(cfg.graph, cfg.n_nodes)
    if cfg.m is None:
        raise ConfigError("give --m or --n-nodes for generated graphs")
    return make_graph(cfg.graph, nodes_for_edges(cfg.graph, cfg.m))


def _arms_and_param(cfg: ExperimentConfig):
    X = build_arms(cfg)
    param = build_param(cfg, X.dim)
    if cfg.beta:
        if not cfg.m_matrix:
            raise ConfigError("--beta needs --m-matrix")
        param = augment(param.matrix, load_beta(cfg.beta))
        X = NodeArmSet(augment_arms(X.arms))
    return X, param


def cmd_design(cfg: ExperimentConfig) -> dict:
    X = build_arms(cfg)
    report = frank_wolfe_design(X, tol=cfg.tol)
    out = _out_path(cfg, "design.json")
    report.to_json(out)
    print(report.to_json())
    return {"outputs": [str(out)]}


def cmd_learn(cfg: ExperimentConfig) -> dict:
    g = _graph(cfg)
    X, param = _arms_and_param(cfg)
    mu = frank_wolfe_design(X, tol=cfg.tol).distribution
    gaps = learner.reward_gaps(X.edge_arms, param)
    out = _out_path(cfg, "learn.csv")
    rows = []
    for rep in range(cfg.repetitions):
        seed = run_seed(cfg.seed, g.kind, g.n_edges, rep)
        state = learner.init(g, X, param, cfg.sigma, cfg.delta, seed, mu=mu, log_pi_power=cfg.log_pi_power)
        res = learner.run(state, cfg.max_rounds, cfg.check_every, track_alpha=True)
        if rep == 0:
            learner.write_history(res, out.with_name(out.stem + ".history.csv"))
        rows.append((rep, seed, res.rounds, res.candidate, *X.edge_arms.pair(res.candidate),
                     int(gaps[res.candidate] <= 1e-12), int(res.stopped)))
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("rep", "seed", "rounds", "candidate", "left_arm", "right_arm", "correct", "stopped"))
        w.writerows(rows)
    print(f"{len(rows)} runs, mean rounds {sum(r[2] for r in rows) / len(rows):.1f}, "
          f"correct {sum(r[6] for r in rows)}/{len(rows)}")
    return {"outputs": [str(out)]}


def cmd_allocate(cfg: ExperimentConfig) -> dict:
    g = _graph(cfg)
    X, param = _arms_and_param(cfg)
    alloc = bipartite_allocation(g, X, param)
    out = _out_path(cfg, "allocation.csv")
    alloc.to_csv(out)
    summary = {"reward": global_reward(alloc.assignment, g, param, X.arms),
               "star_pair": list(alloc.star_pair)}
    try:
        _, best, _, worst = brute_force_extremes(g, X, param)
        summary.update(best=best, worst=worst,
                       differential_ratio=differential_ratio(summary["reward"], best, worst))
    except InstanceTooLarge:
        summary["note"] = "instance too large for brute-force extremes"
    print(json.dumps(summary))
    return {"outputs": [str(out)], "summary": summary}


def cmd_variance(cfg: ExperimentConfig) -> dict:
    g = _graph(cfg)
    X = build_arms(cfg) if (cfg.arms or cfg.arm_set != "random") else None
    if X is None:
        from .arms import random_unit_arms
        X = random_unit_arms(cfg.K, cfg.d, cfg.seed)
    mu = frank_wolfe_design(X, tol=cfg.tol).distribution
    est = variance_norm(g, X, mu, cfg.n_samples, seed=run_seed(cfg.seed, g.kind, g.n_edges, 0))
    out = _out_path(cfg, "variance.csv")
    write_estimates([est], out)
    print(f"{est.kind} m={est.m}: ||Var(A1)|| = {est.spectral_norm:.6g} +/- {est.std_error:.3g}")
    return {"outputs": [str(out)]}


def _sweep_summary(rows, key_index):
    return [{"kind": k[0], "x": k[1], "omega": k[2], **v}
            for k, v in sorted(summarize_sweep(rows, key_index).items(), key=lambda kv: str(kv[0]))]


def cmd_sweep_edges(cfg: ExperimentConfig) -> dict:
    rows = run_sweep_edges(cfg)
    out = _out_path(cfg, "sweep_edges.csv")
    write_sweep(rows, out)
    return {"outputs": [str(out)], "summary": _sweep_summary(rows, 1)}


def cmd_sweep_dim(cfg: ExperimentConfig) -> dict:
    rows = run_sweep_dimension(cfg)
    out = _out_path(cfg, "sweep_dim.csv")
    write_sweep(rows, out)
    return {"outputs": [str(out)], "summary": _sweep_summary(rows, 2)}


def cmd_sweep_variance(cfg: ExperimentConfig) -> dict:
    rows, slopes = run_variance_experiment(cfg)
    out = _out_path(cfg, "sweep_variance.csv")
    write_estimates(rows, out)
    for k, s in slopes.items():
        print(f"{k}: log-log slope {s:.3f}")
    return {"outputs": [str(out)], "slopes": slopes}


COMMANDS = {
    "design": cmd_design,
    "learn": cmd_learn,
    "allocate": cmd_allocate,
    "variance": cmd_variance,
    "sweep-edges": cmd_sweep_edges,
    "sweep-dim": cmd_sweep_dim,
    "sweep-variance": cmd_sweep_variance,
}

USAGE = "usage: gbb {" + ",".join(EXPERIMENTS) + "} [options]\n       gbb <subcommand> --help"


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in COMMANDS:
        print(USAGE, file=sys.stderr)
        return EXIT_USAGE
    experiment, rest = argv[0], argv[1:]
    if "-h" in rest or "--help" in rest:
        argparse.ArgumentParser.print_help(_parser(experiment))
        return EXIT_OK
    try:
        ns = _parser(experiment).parse_args(rest)
        logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING)
        cfg = _config(experiment, ns)
        t0 = time.perf_counter()
        extra = COMMANDS[experiment](cfg)
        wall = time.perf_counter() - t0
        out = Path(extra["outputs"][0])
        _write_manifest(cfg, out, wall, extra)
    except DesignConvergenceError as exc:
        print(f"gbb: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ConfigError, GraphError, ArmSetError, DimensionError, InstanceTooLarge, ValueError,
            OSError) as exc:
        print(f"gbb: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
