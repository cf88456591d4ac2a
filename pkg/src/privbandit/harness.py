"""Deterministic experiment orchestration: trade-off and identifiability sweeps.

A sweep expands an experiment configuration into independent grid-point
jobs. Every job derives its own named random substreams from the root seed,
so results are bit-identical regardless of worker count or completion order;
rows are always emitted in grid order. The ``PRIVBANDIT_THREADS`` environment
variable bounds the worker pool (default: serial).
"""

from __future__ import annotations

import dataclasses
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .adversary import deanon_probability
from .anonymize import RecordSet, StrategySpec, apply_strategy
from .bandit import make_hard_reward_model, run_episode, uniform_belief
from .ingest import synth_cohort
from .io import read_cohort_dir, write_curve_csv, write_results_csv
from .metrics import ads_identifiability, entropy_weights
from .presets import get_preset
from .profiles import UserProfile
from .rng import derive_seed, substream

THREADS_ENV = "PRIVBANDIT_THREADS"

DEFAULT_STRATEGIES = (
    StrategySpec(kind="none"),
    StrategySpec(kind="laplace", epsilon=0.0),
    StrategySpec(kind="tsvd", rank=1),
    StrategySpec(kind="nn"),
    StrategySpec(kind="second-nn"),
    StrategySpec(kind="cluster-average"),
    StrategySpec(kind="global-average"),
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved parameters of one sweep.

    Strategy specs act as templates: the sweep substitutes each grid value
    into ``epsilon`` (laplace), ``rank`` (tsvd) or ``post_noise``
    (aggregation strategies); the ``none`` strategy has the single grid
    point epsilon=0.
    """

    preset: str | None = None
    matrices_dir: str | None = None
    n_users: int = 30
    d: int = 41
    synth_clusters: int = 5
    concentration: float = 1000.0
    template_sharpness: float = 1.0
    strategies: tuple[StrategySpec, ...] = DEFAULT_STRATEGIES
    noise_lo: float = 0.0
    noise_hi: float = 3.0
    noise_points: int = 50
    ranks: tuple[int, ...] = ()
    aux_cells: int = 91
    aux_grid: tuple[int, ...] = ()
    horizon: int = 1000
    runs: int = 200
    trials: int = 100
    alpha: float = 1e-3
    base_seed: int = 0
    base_clusters: int = 7
    weight_kind: str = "constant"
    weight_value: float = 1.0
    weight_bins: int = 20
    weight_floor: float = 1e-3

    def __post_init__(self):
        if self.noise_points < 1:
            raise ValueError("noise grid needs at least one point")
        if not self.noise_lo <= self.noise_hi:
            raise ValueError("noise grid bounds are inverted")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.runs < 1 or self.trials < 1:
            raise ValueError("runs and trials must be >= 1")
        if self.weight_kind not in ("constant", "entropy"):
            raise ValueError(f"unknown weight kind {self.weight_kind!r}")
        if self.base_seed < 0:
            raise ValueError("base_seed must be >= 0")
        object.__setattr__(self, "strategies", tuple(self.strategies))
        object.__setattr__(self, "ranks", tuple(int(r) for r in self.ranks))
        object.__setattr__(self, "aux_grid", tuple(int(c) for c in self.aux_grid))

    def noise_grid(self) -> np.ndarray:
        """Evenly spaced noise variances on [lo, hi); hi itself is excluded."""
        return np.linspace(self.noise_lo, self.noise_hi, self.noise_points,
                           endpoint=False)

    def rank_grid(self) -> tuple[int, ...]:
        return self.ranks if self.ranks else tuple(range(self.d, 0, -1))

    def cells_grid(self) -> tuple[int, ...]:
        return self.aux_grid if self.aux_grid else (self.aux_cells,)

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["strategies"] = [dataclasses.asdict(s) for s in self.strategies]
        return out


@dataclass(frozen=True)
class ResultRow:
    """One line of the sweep output table."""

    strategy: str
    param: str = ""
    epsilon: float | None = None
    rank: int | None = None
    n_cells: int | None = None
    deanon_prob: float | None = None
    deanon_chance: float | None = None
    ads: float | None = None
    regret_mean: float | None = None
    regret_stderr: float | None = None
    runs: int | None = None
    seed: int | None = None
    curve_mean: np.ndarray | None = field(default=None, compare=False, repr=False)
    curve_stderr: np.ndarray | None = field(default=None, compare=False, repr=False)

    def as_tuple(self) -> tuple:
        return (self.strategy, self.param, self.epsilon, self.rank, self.n_cells,
                self.deanon_prob, self.deanon_chance, self.ads,
                self.regret_mean, self.regret_stderr, self.runs, self.seed)


def config_from_preset(name: str, **overrides) -> ExperimentConfig:
    p = get_preset(name)
    base = dict(
        preset=p.name, n_users=p.n_users, d=p.d, synth_clusters=p.synth_clusters,
        concentration=p.concentration, template_sharpness=p.template_sharpness,
        noise_lo=p.noise_lo, noise_hi=p.noise_hi, noise_points=p.noise_points,
        ranks=p.ranks, aux_cells=p.aux_cells, aux_grid=p.aux_grid,
        horizon=p.horizon, runs=p.runs, trials=p.trials, alpha=p.alpha,
        base_clusters=p.base_clusters, weight_kind=p.weight_kind,
        weight_value=p.weight_value, weight_bins=p.weight_bins,
        weight_floor=p.weight_floor,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def _parse_strategies(raw) -> tuple[StrategySpec, ...]:
    specs = []
    for item in raw:
        if isinstance(item, str):
            item = {"kind": item}
        specs.append(StrategySpec(**item))
    return tuple(specs)


def load_config(path) -> ExperimentConfig:
    """Load an experiment configuration from a TOML or JSON file.

    The parameters live under an ``[experiment]`` table (or top-level object
    key), with strategies as an array of tables. A ``preset`` key seeds the
    defaults; every other key overrides the preset.
    """
    path = Path(path)
    text = path.read_bytes()
    if path.suffix.lower() == ".json":
        payload = json.loads(text.decode("utf-8"))
    else:
        if sys.version_info >= (3, 11):
            import tomllib
        else:
            import tomli as tomllib
        payload = tomllib.loads(text.decode("utf-8"))
    table = payload.get("experiment", payload)
    if not isinstance(table, dict):
        raise ValueError("config must contain an [experiment] table")
    table = dict(table)
    if "strategies" in table:
        table["strategies"] = _parse_strategies(table["strategies"])
    preset = table.pop("preset", None)
    if preset is not None:
        return config_from_preset(preset, **table)
    return ExperimentConfig(**table)


def build_cohort(config: ExperimentConfig) -> tuple[RecordSet, list[UserProfile], np.ndarray]:
    """Materialize the cohort: matrices, profiles, and generator labels.

    File-backed cohorts use the flattened matrices as stand-in profiles,
    like synthetic cohorts do; real metadata profiles can be fed through the
    profile CLI instead.
    """
    if config.matrices_dir:
        matrices, manifest = read_cohort_dir(config.matrices_dir)
        labels = np.asarray(manifest.get("labels", range(len(matrices))), dtype=int)
    else:
        matrices, labels = synth_cohort(
            config.n_users, config.d, config.concentration,
            substream(config.base_seed, "cohort"),
            n_clusters=config.synth_clusters,
            template_sharpness=config.template_sharpness,
        )
    profiles = [UserProfile(m.ravel(), kind="synthetic") for m in matrices]
    return RecordSet(matrices=matrices), profiles, labels


def build_weights(config: ExperimentConfig, cohort: RecordSet) -> np.ndarray:
    if config.weight_kind == "entropy":
        return entropy_weights(cohort.matrices, bins=config.weight_bins,
                               floor=config.weight_floor)
    return np.full(cohort.d * cohort.d, float(config.weight_value))


def _grid_for(spec: StrategySpec, config: ExperimentConfig) -> list[tuple]:
    """(epsilon, rank) grid points for one strategy template."""
    if spec.kind == "none":
        return [(0.0, None)]
    if spec.kind == "laplace":
        return [(float(e), None) for e in config.noise_grid()]
    if spec.kind == "tsvd":
        return [(None, int(r)) for r in config.rank_grid()]
    return [(float(e), None) for e in config.noise_grid()]


def _bind(spec: StrategySpec, epsilon, rank) -> StrategySpec:
    if spec.kind == "laplace":
        return dataclasses.replace(spec, epsilon=epsilon)
    if spec.kind == "tsvd":
        return dataclasses.replace(spec, rank=rank)
    if spec.kind == "none":
        return spec
    return dataclasses.replace(spec, post_noise=epsilon)


def _param_label(spec: StrategySpec) -> str:
    if spec.kind == "cluster-average":
        return f"{spec.multiplier}x"
    if spec.kind == "nn":
        return "rank1"
    if spec.kind == "second-nn":
        return "rank2"
    return ""


def _worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _run_jobs(jobs, evaluate):
    workers = _worker_count()
    if workers == 1:
        return [evaluate(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(evaluate, jobs))


def _served_for(cohort, spec, weights, config, si, gi, profiles):
    return apply_strategy(
        cohort, spec, weights, substream(config.base_seed, "noise", si, gi),
        profiles=profiles, base_clusters=config.base_clusters,
        cluster_seed=derive_seed(config.base_seed, "clustering", si, gi),
    )


def _pooled_regret(cohort, served, config, si, gi):
    """Bayes regret of the served matrices against the true ones, pooled over users.

    The episode budget is split evenly across users (fixed user/served
    pairing; only trajectories are redrawn). Returns the pooled mean curve,
    its stderr, the final-step mean/stderr, and the episode count.
    """
    n = cohort.n_users
    model = make_hard_reward_model(cohort.d)
    prior = uniform_belief(cohort.d)
    per_user = [config.runs // n + (1 if u < config.runs % n else 0) for u in range(n)]
    total = sum(per_user)
    curve_sum = np.zeros(config.horizon)
    curve_sumsq = np.zeros(config.horizon)
    for user, m_user in enumerate(per_user):
        for run in range(m_user):
            rng = substream(config.base_seed, "regret", si, gi, user, run)
            trace = run_episode(cohort.matrices[user], served.served[user],
                                model, prior, config.horizon, rng)
            curve_sum += trace.cumulative
            curve_sumsq += trace.cumulative ** 2
    mean = curve_sum / total
    if total > 1:
        var = np.maximum(curve_sumsq - total * mean**2, 0.0) / (total - 1)
        stderr = np.sqrt(var / total)
    else:
        stderr = np.zeros(config.horizon)
    return mean, stderr, total


def run_tradeoff(config: ExperimentConfig) -> list[ResultRow]:
    """Privacy-vs-regret table: one row per strategy and grid point.

    Each row reports the de-anonymization probability at the configured
    auxiliary-cell budget, the identifiability metric, and the Bayes regret
    of the served matrices at the final horizon step (full curves ride along
    on the row for the optional companion file).
    """
    cohort, profiles, _ = build_cohort(config)
    weights = build_weights(config, cohort)
    jobs = []
    for si, template in enumerate(config.strategies):
        for gi, (eps, rank) in enumerate(_grid_for(template, config)):
            jobs.append((si, gi, _bind(template, eps, rank), eps, rank))

    def evaluate(job):
        si, gi, spec, eps, rank = job
        served = _served_for(cohort, spec, weights, config, si, gi, profiles)
        attack = deanon_probability(served, config.aux_cells, config.alpha,
                                    config.trials,
                                    substream(config.base_seed, "attack", si, gi))
        ads = ads_identifiability(cohort.matrices, served.served, weights)
        mean, stderr, episodes = _pooled_regret(cohort, served, config, si, gi)
        return ResultRow(
            strategy=spec.label(), param=_param_label(spec), epsilon=eps, rank=rank,
            n_cells=config.aux_cells, deanon_prob=attack.probability,
            deanon_chance=attack.chance, ads=ads,
            regret_mean=float(mean[-1]), regret_stderr=float(stderr[-1]),
            runs=episodes, seed=config.base_seed,
            curve_mean=mean, curve_stderr=stderr,
        )

    return _run_jobs(jobs, evaluate)


def run_ads_sweep(config: ExperimentConfig) -> list[ResultRow]:
    """De-anonymization and identifiability against noise, per aux-cell budget.

    One row per (strategy, noise level, auxiliary-cell count); the
    identifiability column does not depend on the cell count and repeats
    across that axis. No bandit simulation runs here.
    """
    cohort, profiles, _ = build_cohort(config)
    weights = build_weights(config, cohort)
    jobs = []
    for si, template in enumerate(config.strategies):
        for gi, (eps, rank) in enumerate(_grid_for(template, config)):
            jobs.append((si, gi, _bind(template, eps, rank), eps, rank))

    def evaluate(job):
        si, gi, spec, eps, rank = job
        served = _served_for(cohort, spec, weights, config, si, gi, profiles)
        ads = ads_identifiability(cohort.matrices, served.served, weights)
        rows = []
        for ci, n_cells in enumerate(config.cells_grid()):
            attack = deanon_probability(served, n_cells, config.alpha, config.trials,
                                        substream(config.base_seed, "attack", si, gi, ci))
            rows.append(ResultRow(
                strategy=spec.label(), param=_param_label(spec), epsilon=eps,
                rank=rank, n_cells=n_cells, deanon_prob=attack.probability,
                deanon_chance=attack.chance, ads=ads, seed=config.base_seed,
            ))
        return rows

    nested = _run_jobs(jobs, evaluate)
    return [row for rows in nested for row in rows]


def write_sweep(path, rows: list[ResultRow], config: ExperimentConfig,
                curves_dir=None) -> None:
    """Write the result table (and optional per-row curve companions)."""
    meta = {"config": config.as_dict(), "version": __version__}
    write_results_csv(path, rows, meta)
    if curves_dir is not None:
        curves_dir = Path(curves_dir)
        curves_dir.mkdir(parents=True, exist_ok=True)
        for i, row in enumerate(rows):
            if row.curve_mean is None:
                continue
            name = f"row_{i:04d}_{row.strategy}.csv"
            write_curve_csv(curves_dir / name, row.curve_mean, row.curve_stderr,
                            {"row": i, "strategy": row.strategy})
