"""Acceptance suite: one test per release criterion, each printing a verdict line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines. Statistical criteria use pinned seeds; runtime bounds are asserted
where the criterion states one.
"""

import time
from contextlib import contextmanager

import numpy as np
import pytest
from scipy import stats

from privbandit.adversary import deanon_probability
from privbandit.anonymize import (
    RecordSet,
    StrategySpec,
    aggregate_clusters,
    aggregate_global,
    apply_strategy,
    laplace_perturb,
    normalize_pipeline,
    tsvd_truncate,
)
from privbandit.bandit import (
    RewardModel,
    bayes_regret,
    make_hard_reward_model,
    mts_update_belief,
    uniform_belief,
)
from privbandit.cli import main
from privbandit.harness import config_from_preset, run_ads_sweep
from privbandit.ingest import synth_cohort
from privbandit.rng import substream
from privbandit.stochastic import is_row_stochastic, normalize_rows


@contextmanager
def criterion(name):
    started = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] {name}: FAIL ({time.perf_counter() - started:.1f}s)")
        raise
    print(f"[ACCEPTANCE] {name}: PASS ({time.perf_counter() - started:.1f}s)")


# 1 ---------------------------------------------------------------------------

def test_stochasticity_suite():
    with criterion("stochasticity: 1000 randomized strategy applications"):
        started = time.perf_counter()
        r = np.random.default_rng(202)
        mats, _ = synth_cohort(6, 6, 30.0, 17, n_clusters=2)
        cohort = RecordSet(matrices=mats)
        profiles = [m.ravel() for m in mats]
        weights = np.ones(36)
        kinds = ("none", "laplace", "tsvd", "global-average", "cluster-average",
                 "nn", "second-nn")
        for i in range(1000):
            kind = kinds[int(r.integers(len(kinds)))]
            if kind == "laplace":
                spec = StrategySpec(kind=kind, epsilon=float(r.uniform(0.0, 3.0)))
            elif kind == "tsvd":
                spec = StrategySpec(kind=kind, rank=int(r.integers(1, 7)))
            elif kind in ("global-average", "cluster-average", "nn", "second-nn"):
                post = float(r.uniform(0.0, 2.0)) if r.random() < 0.5 else None
                mult = int(r.integers(1, 4)) if kind == "cluster-average" else 1
                spec = StrategySpec(kind=kind, post_noise=post, multiplier=mult)
            else:
                spec = StrategySpec(kind=kind)
            out = apply_strategy(cohort, spec, weights, np.random.default_rng(i),
                                 profiles=profiles, base_clusters=2, cluster_seed=i)
            for served in out.served:
                assert is_row_stochastic(served, tol=1e-9)
                assert served.min() >= 0.0 and served.max() <= 1.0
        assert time.perf_counter() - started < 10.0


# 2 ---------------------------------------------------------------------------

def test_mts_correctness():
    with criterion("mTS: belief normalization and dense-recomputation agreement"):
        r = np.random.default_rng(303)
        for _ in range(10_000):
            d = int(r.integers(2, 6))
            model = RewardModel(means=r.normal(size=(d, d)), sigma=float(r.uniform(0.5, 3.0)))
            belief = r.dirichlet(np.ones(d))
            matrix = normalize_rows(r.random((d, d)) + 1e-6)
            posterior = mts_update_belief(belief, matrix, model,
                                          int(r.integers(d)), float(r.normal()))
            assert abs(posterior.sum() - 1.0) < 1e-9

        for _ in range(100):
            belief = r.dirichlet(np.ones(3))
            matrix = normalize_rows(r.random((3, 3)) + 1e-6)
            means = r.normal(size=(3, 3))
            sigma = float(r.uniform(0.5, 3.0))
            arm = int(r.integers(3))
            reward = float(r.normal())
            model = RewardModel(means=means, sigma=sigma)
            got = mts_update_belief(belief, matrix, model, arm, reward)

            dense = np.zeros(3)
            for nxt in range(3):
                for cur in range(3):
                    lik = np.exp(-0.5 * ((reward - means[arm, cur]) / sigma) ** 2) / (
                        sigma * np.sqrt(2.0 * np.pi))
                    dense[nxt] += belief[cur] * matrix[cur, nxt] * lik
            dense /= dense.sum()
            assert np.allclose(got, dense, atol=1e-12)


# 3 ---------------------------------------------------------------------------

def test_tsvd_optimality():
    with criterion("tSVD: truncation error equals the tail singular values"):
        r = np.random.default_rng(404)
        for d in (4, 39, 41):
            for _ in range(50):
                record = r.random((d, d))
                k = int(r.integers(1, d + 1))
                s = np.linalg.svd(record, compute_uv=False)
                err = np.linalg.norm(record - tsvd_truncate(record, k))
                assert abs(err - np.sqrt((s[k:] ** 2).sum())) < 1e-9


# 4 ---------------------------------------------------------------------------

def test_attack_oracle():
    with criterion("attack oracle: certain match without anonymization, 1/20 for global"):
        started = time.perf_counter()
        mats, _ = synth_cohort(20, 8, 40.0, substream(5, "cohort"), n_clusters=4)
        cohort = RecordSet(matrices=mats)
        weights = np.ones(64)
        plain = apply_strategy(cohort, StrategySpec(kind="none"), weights,
                               substream(5, "noise"))
        est = deanon_probability(plain, 50, 1e-3, trials=100, rng=substream(5, "attack"))
        assert est.probability == 1.0

        averaged = apply_strategy(cohort, StrategySpec(kind="global-average"), weights,
                                  substream(5, "noise"))
        est_avg = deanon_probability(averaged, 50, 1e-3, trials=100,
                                     rng=substream(5, "attack"))
        assert est_avg.probability == 1.0 / 20
        assert time.perf_counter() - started < 5.0


# 5 ---------------------------------------------------------------------------

def test_chance_baselines():
    with criterion("chance baselines: 3.3% / 2.0% / 3.0% for N = 30 / 50 / 33"):
        for n, d, want_pct in ((30, 41, 3.3), (50, 39, 2.0), (33, 4, 3.0)):
            mats, _ = synth_cohort(n, d, 50.0, substream(1, "cohort", n))
            cohort = RecordSet(matrices=mats)
            served = apply_strategy(cohort, StrategySpec(kind="none"), np.ones(d * d),
                                    substream(1, "noise", n))
            est = deanon_probability(served, min(10, d * d), 1e-3, trials=1,
                                     rng=substream(1, "attack", n))
            assert abs(100.0 * est.chance - want_pct) < 0.05


# 6 and 7 ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def fig7_sweep():
    """Laplace sweep on the desk-casas cohort: 30 users, d=41, 91 aux cells,
    50 noise levels on [0, 3)."""
    config = config_from_preset(
        "desk-casas", base_seed=11, aux_grid=(91,),
        strategies=(StrategySpec(kind="laplace", epsilon=0.0),))
    started = time.perf_counter()
    rows = run_ads_sweep(config)
    elapsed = time.perf_counter() - started
    assert len(rows) == 50
    return rows, elapsed


def test_monotone_privacy_trends(fig7_sweep):
    with criterion("monotone trends: de-anonymization falls with noise, "
                   "identifiability sweeps 1 to 0"):
        rows, elapsed = fig7_sweep
        eps = np.array([row.epsilon for row in rows])
        deanon = np.array([row.deanon_prob for row in rows])
        ads = np.array([row.ads for row in rows])
        rho = stats.spearmanr(eps, deanon).statistic
        assert rho <= -0.8
        decile = len(rows) // 10
        assert ads[:decile].min() >= 0.9
        assert ads[-decile:].max() <= 0.1
        assert elapsed < 120.0


def test_ads_deanon_mismatch(fig7_sweep):
    with criterion("metric mismatch: identifiability diverges from attack success"):
        rows, _ = fig7_sweep
        gap = max(abs(row.ads - row.deanon_prob) for row in rows)
        assert gap > 0.3


# 8 ---------------------------------------------------------------------------

def test_regret_ordering():
    with criterion("regret ordering: true < cluster average < global average"):
        started = time.perf_counter()
        d, horizon, runs = 10, 1000, 200
        mats, labels = synth_cohort(9, d, 15.0, 3, n_clusters=3, template_sharpness=6.0)
        cluster_means, _ = aggregate_clusters(mats, labels)
        agents = {
            "true": normalize_pipeline(mats[0]),
            "cluster": normalize_pipeline(cluster_means[labels[0]]),
            "global": normalize_pipeline(aggregate_global(mats)),
        }
        model = make_hard_reward_model(d)
        prior = uniform_belief(d)
        summaries = {name: bayes_regret(mats[0], agent, model, prior, horizon,
                                        runs, 42)
                     for name, agent in agents.items()}
        t = summaries["true"]
        c = summaries["cluster"]
        g = summaries["global"]
        gap_tc = c.final_mean - t.final_mean
        gap_cg = g.final_mean - c.final_mean
        assert gap_tc > 2.0 * np.hypot(t.final_stderr, c.final_stderr)
        assert gap_cg > 2.0 * np.hypot(c.final_stderr, g.final_stderr)
        assert time.perf_counter() - started < 300.0


# 9 ---------------------------------------------------------------------------

def test_laplace_calibration():
    with criterion("Laplace calibration: unit variance at epsilon = 1"):
        zero = np.zeros((1000, 1000))
        noise = laplace_perturb(zero, np.ones(zero.size), 1.0,
                                np.random.default_rng(909))
        assert abs(noise.var() - 1.0) < 0.05


# 10 --------------------------------------------------------------------------

def test_cli_determinism(tmp_path):
    with criterion("CLI determinism: identical config and seed, identical bytes"):
        cohort_args = ["synth", "--users", "8", "--states", "5", "--seed", "6",
                       "--concentration", "50"]
        for name in ("c1", "c2"):
            assert main(cohort_args + ["--out", str(tmp_path / name)]) == 0
        for f in sorted((tmp_path / "c1").iterdir()):
            assert f.read_bytes() == (tmp_path / "c2" / f.name).read_bytes()

        for name in ("s1", "s2"):
            assert main(["anonymize", "--matrices", str(tmp_path / "c1"),
                         "--strategy", "laplace", "--epsilon", "0.4", "--seed", "3",
                         "--out", str(tmp_path / name)]) == 0
        for f in sorted((tmp_path / "s1").iterdir()):
            assert f.read_bytes() == (tmp_path / "s2" / f.name).read_bytes()

        for name in ("a1.json", "a2.json"):
            assert main(["attack", "--matrices", str(tmp_path / "c1"),
                         "--served", str(tmp_path / "s1"), "--cells", "12",
                         "--trials", "40", "--seed", "2",
                         "--out", str(tmp_path / name)]) == 0
        assert (tmp_path / "a1.json").read_bytes() == (tmp_path / "a2.json").read_bytes()

        for name in ("r1.csv", "r2.csv"):
            assert main(["simulate", "--matrices", str(tmp_path / "c1"),
                         "--user", "1", "--horizon", "30", "--runs", "3",
                         "--seed", "8", "--out", str(tmp_path / name)]) == 0
        assert (tmp_path / "r1.csv").read_bytes() == (tmp_path / "r2.csv").read_bytes()

        cfg = tmp_path / "exp.toml"
        cfg.write_text(
            "[experiment]\nn_users = 6\nd = 4\nconcentration = 40.0\n"
            "synth_clusters = 2\nnoise_points = 2\nnoise_hi = 0.4\naux_cells = 6\n"
            "horizon = 12\nruns = 2\ntrials = 6\nbase_seed = 4\nbase_clusters = 2\n"
            "strategies = [{kind = \"laplace\", epsilon = 0.0}]\n",
            encoding="utf-8")
        for name in ("t1.csv", "t2.csv"):
            assert main(["sweep-tradeoff", "--config", str(cfg),
                         "--out", str(tmp_path / name)]) == 0
        assert (tmp_path / "t1.csv").read_bytes() == (tmp_path / "t2.csv").read_bytes()
