"""Latent-bandit environment, the posterior-sampling agent, and regret accounting.

The environment is a hidden Markov chain: the state evolves via a
row-stochastic transition matrix and the agent only observes the Gaussian
reward of its chosen arm. The agent keeps a belief state (a probability
vector over latent states), samples a state from it, plays the arm that is
best for the sampled state, and then folds the observed reward and the
transition model into the next belief.

Belief states are plain length-d probability vectors. All randomness flows
through explicit numpy generators, so every operation is pure given its
stream.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .rng import substream

logger = logging.getLogger(__name__)

BELIEF_TOL = 1e-6
ROW_TOL = 1e-6

# The "hard" reward preset: one optimal arm per state, all other arms
# indistinguishable from one another, and a noise scale large enough that
# rewards alone identify the state only slowly.
HARD_OPTIMAL_MEAN = 2.0
HARD_SUBOPTIMAL_MEAN = 1.05
HARD_SIGMA = 2.0

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class StateSpace:
    """Latent states identified as 0..count-1."""

    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"state count must be >= 1, got {self.count}")


@dataclass(frozen=True)
class RewardModel:
    """Gaussian reward table: means[arm, state], shared scale sigma."""

    means: np.ndarray
    sigma: float

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        if means.ndim != 2 or means.size == 0:
            raise ValueError("means must be a nonempty 2-D (arms x states) array")
        if not np.all(np.isfinite(means)):
            raise ValueError("means must be finite")
        if not (self.sigma >= 0.0 and np.isfinite(self.sigma)):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def n_arms(self) -> int:
        return self.means.shape[0]

    @property
    def n_states(self) -> int:
        return self.means.shape[1]


@dataclass(frozen=True)
class RegretTrace:
    """Per-step instantaneous pseudo-regret and its running sum."""

    per_step: np.ndarray
    cumulative: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        steps = np.asarray(self.per_step, dtype=float)
        object.__setattr__(self, "per_step", steps)
        if self.cumulative is None:
            object.__setattr__(self, "cumulative", np.cumsum(steps))
        else:
            object.__setattr__(self, "cumulative", np.asarray(self.cumulative, dtype=float))

    @property
    def horizon(self) -> int:
        return self.per_step.shape[0]

    @property
    def total(self) -> float:
        return float(self.cumulative[-1]) if self.horizon else 0.0


@dataclass(frozen=True)
class RegretSummary:
    """Mean cumulative-regret curve over independent runs, with stderr."""

    mean: np.ndarray
    stderr: np.ndarray
    runs: int

    @property
    def final_mean(self) -> float:
        return float(self.mean[-1]) if self.mean.size else 0.0

    @property
    def final_stderr(self) -> float:
        return float(self.stderr[-1]) if self.stderr.size else 0.0


def make_hard_reward_model(d: int, n_arms: int | None = None, optimal_map=None) -> RewardModel:
    """Build the hard reward table: mean 2 on each state's optimal arm, 1.05 elsewhere.

    ``optimal_map`` maps each state to its optimal arm and must be injective;
    it defaults to the identity (arm s is optimal in state s), in which case
    ``n_arms`` defaults to ``d``.
    """
    if d < 1:
        raise ValueError(f"state count must be >= 1, got {d}")
    if n_arms is None:
        n_arms = d
    if n_arms < d:
        raise ValueError(f"need at least as many arms as states: K={n_arms} < d={d}")
    if optimal_map is None:
        optimal_map = {s: s for s in range(d)}
    arms = [int(optimal_map[s]) for s in range(d)]
    if len(set(arms)) != d:
        raise ValueError("optimal_map must be injective (one dedicated arm per state)")
    if min(arms) < 0 or max(arms) >= n_arms:
        raise ValueError("optimal_map assigns an out-of-range arm")
    means = np.full((n_arms, d), HARD_SUBOPTIMAL_MEAN)
    means[arms, np.arange(d)] = HARD_OPTIMAL_MEAN
    return RewardModel(means=means, sigma=HARD_SIGMA)


def uniform_belief(d: int) -> np.ndarray:
    if d < 1:
        raise ValueError(f"state count must be >= 1, got {d}")
    return np.full(d, 1.0 / d)


def require_belief(belief, tol: float = BELIEF_TOL) -> np.ndarray:
    b = np.asarray(belief, dtype=float)
    if b.ndim != 1 or b.size == 0:
        raise ValueError("belief must be a nonempty 1-D vector")
    if np.any(b < -tol) or abs(b.sum() - 1.0) > tol:
        raise ValueError(f"belief is not a probability vector within {tol}")
    return b


def _draw_categorical(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw consuming exactly one uniform."""
    cdf = np.cumsum(probs)
    u = rng.random()
    return int(min(np.searchsorted(cdf, u, side="right"), probs.shape[0] - 1))


def env_step(state: int, matrix, rng: np.random.Generator) -> int:
    """Advance the hidden chain one step from ``state``.

    Consumes exactly one uniform draw and inverts the CDF of the state's row.
    """
    m = np.asarray(matrix, dtype=float)
    if not 0 <= state < m.shape[0]:
        raise IndexError(f"state {state} out of range for d={m.shape[0]}")
    row = m[state]
    if np.any(row < 0.0) or abs(row.sum() - 1.0) > ROW_TOL:
        raise ValueError(f"transition row for state {state} does not sum to 1 within {ROW_TOL}")
    return _draw_categorical(row, rng)


def sample_reward(model: RewardModel, arm: int, state: int, rng: np.random.Generator) -> float:
    """Draw one Gaussian reward for (arm, state)."""
    if not 0 <= arm < model.n_arms:
        raise IndexError(f"arm {arm} out of range for K={model.n_arms}")
    if not 0 <= state < model.n_states:
        raise IndexError(f"state {state} out of range for d={model.n_states}")
    return float(model.means[arm, state] + model.sigma * rng.standard_normal())


def optimal_arm(model: RewardModel, state: int) -> int:
    """Arm with the highest mean in ``state``; ties go to the lowest arm id."""
    if not 0 <= state < model.n_states:
        raise IndexError(f"state {state} out of range for d={model.n_states}")
    return int(np.argmax(model.means[:, state]))


def mts_select_arm(belief, model: RewardModel, rng: np.random.Generator) -> tuple[int, int]:
    """Sample a state from the belief and play the arm optimal for it.

    Returns ``(arm, sampled_state)``. Consumes exactly one uniform draw.
    """
    b = require_belief(belief)
    if b.shape[0] != model.n_states:
        raise ValueError("belief length does not match the reward model")
    sampled = _draw_categorical(b, rng)
    return optimal_arm(model, sampled), sampled


def mts_update_belief(belief, matrix, model: RewardModel, arm: int, reward: float) -> np.ndarray:
    """Bayes update of the belief after observing ``reward`` for ``arm``.

    The next belief is proportional to

        sum_s belief[s] * matrix[s, s'] * N(reward; means[arm, s], sigma^2)

    evaluated in log space and renormalized. If every term underflows to
    zero the belief is reset to uniform (logged as an event) so long
    horizons stay numerically alive.
    """
    b = require_belief(belief)
    m = np.asarray(matrix, dtype=float)
    if m.shape != (b.shape[0], b.shape[0]):
        raise ValueError("transition matrix shape does not match the belief")
    if model.n_states != b.shape[0]:
        raise ValueError("reward model state count does not match the belief")
    if not np.isfinite(reward):
        raise ValueError(f"reward must be finite, got {reward}")
    if model.sigma <= 0.0:
        raise ValueError("belief updates need sigma > 0 for a proper likelihood")

    with np.errstate(divide="ignore", over="ignore"):
        z = (reward - model.means[arm, :]) / model.sigma
        log_lik = -0.5 * z * z - np.log(model.sigma) - 0.5 * _LOG_2PI
        log_weight = np.log(b) + log_lik
    shift = np.max(log_weight)
    if not np.isfinite(shift):
        logger.debug("belief underflow: all posterior mass vanished; resetting to uniform")
        return uniform_belief(b.shape[0])
    weight = np.exp(log_weight - shift)
    posterior = weight @ m
    total = posterior.sum()
    if not np.isfinite(total) or total <= 0.0:
        logger.debug("belief underflow after transition mixing; resetting to uniform")
        return uniform_belief(b.shape[0])
    return posterior / total


def run_episode(env_matrix, agent_matrix, model: RewardModel, prior, horizon: int,
                rng: np.random.Generator) -> RegretTrace:
    """Simulate one episode of the agent against the hidden chain.

    ``env_matrix`` drives the true state dynamics; ``agent_matrix`` is the
    (possibly anonymized) kernel the agent folds into its belief updates.
    The initial state is drawn from ``prior``, which also initializes the
    belief. Per-step regret uses the true means.
    """
    env = np.asarray(env_matrix, dtype=float)
    agent = np.asarray(agent_matrix, dtype=float)
    p0 = require_belief(prior)
    d = p0.shape[0]
    if env.shape != (d, d) or agent.shape != (d, d):
        raise ValueError("environment/agent matrices must be d x d matching the prior")
    if model.n_states != d:
        raise ValueError("reward model state count does not match the matrices")
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")

    best = model.means.max(axis=0)
    per_step = np.empty(horizon)
    state = _draw_categorical(p0, rng)
    belief = p0.copy()
    for t in range(horizon):
        arm, _ = mts_select_arm(belief, model, rng)
        reward = sample_reward(model, arm, state, rng)
        per_step[t] = best[state] - model.means[arm, state]
        belief = mts_update_belief(belief, agent, model, arm, reward)
        state = env_step(state, env, rng)
    return RegretTrace(per_step=per_step)


def bayes_regret(env_matrix, agent_matrix, model: RewardModel, prior, horizon: int,
                 runs: int, base_seed: int) -> RegretSummary:
    """Average the cumulative regret curve over independent episodes.

    Run ``i`` draws from the substream ``(base_seed, "run", i)``, and runs are
    aggregated in ascending index order, so results are bit-reproducible and
    independent of any parallel scheduling.
    """
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    curves = np.empty((runs, horizon))
    for i in range(runs):
        trace = run_episode(env_matrix, agent_matrix, model, prior, horizon,
                            substream(base_seed, "run", i))
        curves[i] = trace.cumulative
    mean = curves.mean(axis=0)
    if runs > 1:
        stderr = curves.std(axis=0, ddof=1) / np.sqrt(runs)
    else:
        stderr = np.zeros(horizon)
    return RegretSummary(mean=mean, stderr=stderr, runs=runs)
