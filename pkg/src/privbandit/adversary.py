"""The linkage attack: auxiliary cells, scoreboard matching, and its success rate.

The adversary holds the values of a few cells of a victim's true matrix and
matches them against the served (anonymized) records. A candidate's score is
the fraction of auxiliary cells it reproduces within a tolerance alpha; the
attack picks uniformly among the top scorers. A correct match is credited in
full for per-user records and diluted by cluster size when only cluster
aggregates were served.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .anonymize import RecordSet


@dataclass(frozen=True)
class AuxiliaryInfo:
    """Adversary-known cells of one true record: flat indices and their values."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int)
        vals = np.asarray(self.values, dtype=float)
        if idx.ndim != 1 or idx.shape != vals.shape:
            raise ValueError("indices and values must be 1-D and aligned")
        if idx.size == 0:
            raise ValueError("auxiliary information cannot be empty")
        if np.unique(idx).size != idx.size:
            raise ValueError("auxiliary cell indices must be distinct")
        if idx.min() < 0:
            raise ValueError("auxiliary cell indices must be nonnegative")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)

    @property
    def support_size(self) -> int:
        return self.indices.shape[0]


@dataclass(frozen=True)
class MatchOutcome:
    """Result of one scoreboard run against the served records."""

    matched: int
    set_size: int
    success: bool = False
    credited: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.credited <= 1.0:
            raise ValueError("credited probability mass must lie in [0, 1]")


@dataclass(frozen=True)
class DeanonEstimate:
    """Monte-Carlo de-anonymization probability with its analytic chance level."""

    probability: float
    chance: float
    trials: int


def sample_aux(record, n_cells: int, rng: np.random.Generator) -> AuxiliaryInfo:
    """Reveal ``n_cells`` distinct cells of the true record, chosen uniformly."""
    flat = np.asarray(record, dtype=float).ravel()
    if not 1 <= n_cells <= flat.size:
        raise ValueError(f"n_cells must be in [1, {flat.size}], got {n_cells}")
    indices = rng.choice(flat.size, size=n_cells, replace=False)
    return AuxiliaryInfo(indices=indices, values=flat[indices])


def sim(aux_value: float, candidate_value: float, alpha: float) -> int:
    """1 when the candidate reproduces the cell within alpha (strictly), else 0."""
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return int(abs(aux_value - candidate_value) < alpha)


def _match_counts(aux: AuxiliaryInfo, stacked: np.ndarray, alpha: float) -> np.ndarray:
    """Per-candidate count of auxiliary cells matched within alpha."""
    cells = stacked[:, aux.indices]
    return (np.abs(cells - aux.values) < alpha).sum(axis=1)


def score(aux: AuxiliaryInfo, candidate, alpha: float) -> float:
    """Mean cell similarity of a candidate over the auxiliary support."""
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    flat = np.asarray(candidate, dtype=float).reshape(1, -1)
    if aux.indices.max() >= flat.shape[1]:
        raise ValueError("auxiliary index outside the candidate record")
    return float(_match_counts(aux, flat, alpha)[0]) / aux.support_size


def scoreboard_match(aux: AuxiliaryInfo, released, alpha: float,
                     rng: np.random.Generator) -> MatchOutcome:
    """Score every released record and pick uniformly among the top scorers.

    Scores are compared as integer match counts, so the arg-max set is exact.
    """
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    stacked = released if isinstance(released, np.ndarray) else np.stack(
        [np.asarray(r, dtype=float).ravel() for r in released])
    if stacked.ndim != 2 or stacked.shape[0] == 0:
        raise ValueError("released set must be nonempty")
    counts = _match_counts(aux, stacked, alpha)
    pool = np.flatnonzero(counts == counts.max())
    pick = int(pool[rng.integers(pool.size)])
    return MatchOutcome(matched=pick, set_size=int(pool.size))


def deanon_probability(cohort: RecordSet, n_cells: int, alpha: float,
                       trials: int = 100, rng: np.random.Generator | None = None) -> DeanonEstimate:
    """Monte-Carlo estimate of the linkage attack's success probability.

    Each trial picks a victim uniformly (with replacement), samples fresh
    auxiliary cells from the victim's true matrix, and runs the scoreboard
    against the served records deduplicated to one representative per
    cluster. A trial credits 1/|victim's cluster| when the matched
    representative is the victim's own cluster (so exactly 1 for per-user
    records), else 0.

    The analytic chance level reported alongside is 1/N for per-user serving
    and sum_i (1/N)(1/|c_i|) when cluster aggregates are served (the credit
    earned by an always-correct cluster matcher).
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if rng is None:
        raise ValueError("an explicit random generator is required")
    reps, owners = cohort.match_records()
    stacked = np.stack([np.asarray(r, dtype=float).ravel() for r in reps])
    n = cohort.n_users

    credit = Fraction(0)  # exact accumulation keeps e.g. the 1/N global-average case exact
    for _ in range(trials):
        victim = int(rng.integers(n))
        aux = sample_aux(cohort.matrices[victim], n_cells, rng)
        outcome = scoreboard_match(aux, stacked, alpha, rng)
        if owners[outcome.matched] == cohort.cluster_of[victim]:
            credit += Fraction(1, int(cohort.cluster_sizes[cohort.cluster_of[victim]]))
    probability = float(credit / trials)

    if np.all(cohort.cluster_sizes[cohort.cluster_of] == 1):
        chance = 1.0 / n
    else:
        chance = float(np.mean(1.0 / cohort.cluster_sizes[cohort.cluster_of]))
    return DeanonEstimate(probability=probability, chance=chance, trials=trials)
