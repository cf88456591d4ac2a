"""Command-line entry points.

Every subcommand reads files and flags, calls the corresponding module, and
writes CSV/JSON deterministically: the same command with the same seed
produces byte-identical output. Validation failures exit nonzero with a
diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, io
from .adversary import deanon_probability
from .anonymize import RecordSet, StrategySpec, apply_strategy
from .bandit import bayes_regret, make_hard_reward_model, uniform_belief
from .harness import (ExperimentConfig, build_weights, config_from_preset,
                      load_config, run_ads_sweep, run_tradeoff, write_sweep)
from .ingest import build_raw_matrix, finalize_matrix, synth_cohort
from .metrics import entropy_weights
from .profiles import (kmeans, profile_activity_features, profile_adjacency,
                       profile_hourly_intensity, stack_profiles)
from .rng import substream


def _cohort_manifest(command: str, config: dict) -> dict:
    return {"command": command, "config": config, "version": __version__}


def _weights_from_flag(flag: str, matrices) -> np.ndarray:
    d2 = matrices[0].size
    if flag == "unit":
        return np.ones(d2)
    if flag == "entropy":
        return entropy_weights(matrices)
    if flag.startswith("constant:"):
        return np.full(d2, float(flag.split(":", 1)[1]))
    raise ValueError(f"unknown weights spec {flag!r} (unit | entropy | constant:<value>)")


def cmd_synth(args) -> int:
    matrices, labels = synth_cohort(
        args.users, args.states, args.concentration, args.seed,
        n_clusters=args.clusters, template_sharpness=args.sharpness)
    manifest = _cohort_manifest("synth", {
        "users": args.users, "states": args.states, "clusters": args.clusters,
        "concentration": args.concentration, "sharpness": args.sharpness,
        "seed": args.seed})
    manifest["labels"] = [int(c) for c in labels]
    io.write_cohort_dir(args.out, matrices, manifest)
    print(f"wrote {len(matrices)} matrices to {args.out}")
    return 0


def cmd_ingest(args) -> int:
    log = io.read_event_log_csv(args.log)
    matrices = [finalize_matrix(build_raw_matrix(log, user, args.states))
                for user in log.users]
    manifest = _cohort_manifest("ingest", {"log": str(args.log), "states": args.states})
    manifest["users"] = [str(u) for u in log.users]
    io.write_cohort_dir(args.out, matrices, manifest)
    print(f"wrote {len(matrices)} matrices to {args.out}")
    return 0


def cmd_profiles(args) -> int:
    log = io.read_event_log_csv(args.log)
    builders = {
        "hourly": lambda u: profile_hourly_intensity(log, u),
        "activity": lambda u: profile_activity_features(log, u, args.states),
        "adjacency": lambda u: profile_adjacency(log, u, args.states),
    }
    if args.kind != "hourly" and args.states is None:
        raise ValueError(f"--states is required for kind {args.kind!r}")
    users = log.users
    vectors = stack_profiles([builders[args.kind](u) for u in users])
    io.write_profiles_csv(args.out, [str(u) for u in users], vectors)
    print(f"wrote {len(users)} profiles to {args.out}")
    return 0


def cmd_cluster(args) -> int:
    users, vectors = io.read_profiles_csv(args.profiles)
    assignment = kmeans(vectors, args.k, args.seed)
    payload = {
        "k": assignment.k,
        "labels": {user: int(c) for user, c in zip(users, assignment.labels)},
        "centroids": [[float(v) for v in row] for row in assignment.centroids],
        "seed": args.seed,
        "version": __version__,
    }
    Path(args.out).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                              encoding="utf-8")
    print(f"wrote {assignment.k}-cluster assignment to {args.out}")
    return 0


def _strategy_from_args(args) -> StrategySpec:
    return StrategySpec(kind=args.strategy, epsilon=args.epsilon, rank=args.rank,
                        multiplier=args.multiplier, post_noise=args.post_noise)


def cmd_anonymize(args) -> int:
    matrices, _ = io.read_cohort_dir(args.matrices)
    spec = _strategy_from_args(args)
    weights = _weights_from_flag(args.weights, matrices)
    profiles = [m.ravel() for m in matrices]
    if args.profiles:
        _, vectors = io.read_profiles_csv(args.profiles)
        profiles = list(vectors)
    served = apply_strategy(RecordSet(matrices=matrices), spec, weights,
                            substream(args.seed, "noise"), profiles=profiles,
                            base_clusters=args.base_clusters,
                            cluster_seed=args.seed)
    manifest = _cohort_manifest("anonymize", {
        "strategy": args.strategy, "epsilon": args.epsilon, "rank": args.rank,
        "multiplier": args.multiplier, "post_noise": args.post_noise,
        "weights": args.weights, "seed": args.seed,
        "base_clusters": args.base_clusters})
    manifest["cluster_of"] = [int(c) for c in served.cluster_of]
    manifest["cluster_sizes"] = [int(s) for s in served.cluster_sizes]
    io.write_cohort_dir(args.out, served.served, manifest)
    print(f"wrote {len(matrices)} served matrices to {args.out}")
    return 0


def cmd_attack(args) -> int:
    matrices, _ = io.read_cohort_dir(args.matrices)
    if args.served:
        served, manifest = io.read_cohort_dir(args.served)
        cluster_of = manifest.get("cluster_of")
        cluster_sizes = manifest.get("cluster_sizes")
        cohort = RecordSet(matrices=matrices, served=served,
                           cluster_of=cluster_of, cluster_sizes=cluster_sizes)
    else:
        cohort = apply_strategy(RecordSet(matrices=matrices),
                                StrategySpec(kind="none"),
                                np.ones(matrices[0].size), substream(args.seed, "noise"))
    estimate = deanon_probability(cohort, args.cells, args.alpha, args.trials,
                                  substream(args.seed, "attack"))
    payload = {"deanon_prob": estimate.probability, "deanon_chance": estimate.chance,
               "trials": estimate.trials, "cells": args.cells, "alpha": args.alpha,
               "seed": args.seed, "version": __version__}
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_simulate(args) -> int:
    matrices, _ = io.read_cohort_dir(args.matrices)
    if not 0 <= args.user < len(matrices):
        raise ValueError(f"user index {args.user} out of range")
    env = matrices[args.user]
    agent = env
    if args.agent_matrices:
        served, _ = io.read_cohort_dir(args.agent_matrices)
        agent = served[args.user]
    d = env.shape[0]
    summary = bayes_regret(env, agent, make_hard_reward_model(d), uniform_belief(d),
                           args.horizon, args.runs, args.seed)
    meta = {"config": {"user": args.user, "horizon": args.horizon, "runs": args.runs,
                       "seed": args.seed, "matrices": str(args.matrices),
                       "agent_matrices": str(args.agent_matrices or "")},
            "version": __version__}
    io.write_curve_csv(args.out, summary.mean, summary.stderr, meta)
    print(f"wrote regret curve ({args.horizon} steps, {args.runs} runs) to {args.out}")
    return 0


def _sweep_config(args) -> ExperimentConfig:
    if args.config:
        return load_config(args.config)
    if args.preset:
        return config_from_preset(args.preset)
    raise ValueError("provide --config FILE or --preset NAME")


def cmd_sweep_tradeoff(args) -> int:
    config = _sweep_config(args)
    rows = run_tradeoff(config)
    write_sweep(args.out, rows, config, curves_dir=args.curves)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_sweep_ads(args) -> int:
    config = _sweep_config(args)
    rows = run_ads_sweep(config)
    write_sweep(args.out, rows, config)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="privbandit",
        description="Privacy-vs-performance benchmarking of transition-matrix anonymization.")
    parser.add_argument("--version", action="version", version=f"privbandit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic cohort of transition matrices")
    p.add_argument("--users", type=int, required=True)
    p.add_argument("--states", type=int, required=True)
    p.add_argument("--clusters", type=int, default=None)
    p.add_argument("--concentration", type=float, default=1000.0)
    p.add_argument("--sharpness", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="build per-user transition matrices from an event log")
    p.add_argument("--log", required=True)
    p.add_argument("--states", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("profiles", help="compute user profiles from an event log")
    p.add_argument("--log", required=True)
    p.add_argument("--kind", choices=("hourly", "activity", "adjacency"), required=True)
    p.add_argument("--states", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_profiles)

    p = sub.add_parser("cluster", help="k-means cluster a profiles CSV")
    p.add_argument("--profiles", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("anonymize", help="apply one anonymization strategy to a cohort")
    p.add_argument("--matrices", required=True)
    p.add_argument("--strategy", required=True)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--multiplier", type=int, default=1)
    p.add_argument("--post-noise", type=float, default=None, dest="post_noise")
    p.add_argument("--weights", default="unit",
                   help="unit | entropy | constant:<value>")
    p.add_argument("--profiles", default=None)
    p.add_argument("--base-clusters", type=int, default=None, dest="base_clusters")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_anonymize)

    p = sub.add_parser("attack", help="estimate the de-anonymization probability")
    p.add_argument("--matrices", required=True)
    p.add_argument("--served", default=None)
    p.add_argument("--cells", type=int, required=True)
    p.add_argument("--alpha", type=float, default=1e-3)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("simulate", help="Bayes-regret curve for one user's served matrix")
    p.add_argument("--matrices", required=True)
    p.add_argument("--agent-matrices", default=None, dest="agent_matrices")
    p.add_argument("--user", type=int, default=0)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    for name, func in (("sweep-tradeoff", cmd_sweep_tradeoff), ("sweep-ads", cmd_sweep_ads)):
        p = sub.add_parser(name, help=f"run the {name.split('-', 1)[1]} sweep")
        p.add_argument("--config", default=None)
        p.add_argument("--preset", default=None)
        p.add_argument("--out", required=True)
        if name == "sweep-tradeoff":
            p.add_argument("--curves", default=None,
                           help="directory for per-row regret-curve companions")
        p.set_defaults(func=func)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
