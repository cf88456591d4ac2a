"""Record transformations served in place of users' true transition matrices.

A strategy either perturbs each user's own matrix (additive noise, low-rank
truncation) or replaces it with an aggregate chosen via user profiles
(nearest neighbor, cluster average, global average), optionally followed by
per-user noise. Every served matrix then goes through one shared
normalization pipeline so all strategies are compared on equal footing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .profiles import embed_2d, kmeans, stack_profiles
from .stochastic import normalize_rows

STRATEGY_KINDS = (
    "none",
    "laplace",
    "tsvd",
    "global-average",
    "cluster-average",
    "nn",
    "second-nn",
)
AGGREGATION_KINDS = ("global-average", "cluster-average", "nn", "second-nn")
CLUSTER_MULTIPLIERS = (1, 2, 3)


@dataclass(frozen=True)
class StrategySpec:
    """One anonymization strategy with exactly the parameters its kind needs.

    ``epsilon`` is the Laplace noise variance for the plain noise strategy;
    ``post_noise`` is the variance of optional per-user noise added after an
    aggregation strategy; ``rank`` is the truncation rank; ``multiplier``
    scales the base cluster count (1x/2x/3x).
    """

    kind: str
    epsilon: float | None = None
    rank: int | None = None
    multiplier: int = 1
    post_noise: float | None = None

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if (self.kind == "laplace") != (self.epsilon is not None):
            raise ValueError("epsilon is required by 'laplace' and only by it")
        if self.epsilon is not None and self.epsilon < 0.0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if (self.kind == "tsvd") != (self.rank is not None):
            raise ValueError("rank is required by 'tsvd' and only by it")
        if self.multiplier != 1 and self.kind != "cluster-average":
            raise ValueError("multiplier applies to 'cluster-average' only")
        if self.multiplier not in CLUSTER_MULTIPLIERS:
            raise ValueError(f"multiplier must be one of {CLUSTER_MULTIPLIERS}")
        if self.post_noise is not None:
            if self.kind not in AGGREGATION_KINDS:
                raise ValueError("post_noise applies to aggregation strategies only")
            if self.post_noise < 0.0:
                raise ValueError(f"post_noise must be >= 0, got {self.post_noise}")

    def label(self) -> str:
        if self.kind == "cluster-average" and self.multiplier != 1:
            return f"{self.multiplier}x-cluster-average"
        return self.kind


@dataclass
class RecordSet:
    """A cohort's true matrices, the served (anonymized) set, and cluster bookkeeping.

    ``cluster_of`` maps each user to the cluster whose aggregate they were
    served (each user its own singleton cluster for non-aggregating
    strategies), and ``cluster_sizes`` is indexed by cluster id.
    """

    matrices: list
    served: list | None = None
    cluster_of: np.ndarray = field(default=None)  # type: ignore[assignment]
    cluster_sizes: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.matrices = [np.asarray(m, dtype=float) for m in self.matrices]
        if not self.matrices:
            raise ValueError("a record set needs at least one matrix")
        shape = self.matrices[0].shape
        for m in self.matrices:
            if m.shape != shape:
                raise ValueError("all matrices must share one shape")
        if self.served is not None:
            self.served = [np.asarray(m, dtype=float) for m in self.served]
            if len(self.served) != len(self.matrices):
                raise ValueError("served set must align with the cohort, one per user")
        n = len(self.matrices)
        if self.cluster_of is None:
            self.cluster_of = np.arange(n)
        else:
            self.cluster_of = np.asarray(self.cluster_of, dtype=int)
        if self.cluster_sizes is None:
            self.cluster_sizes = np.bincount(self.cluster_of)
        else:
            self.cluster_sizes = np.asarray(self.cluster_sizes, dtype=int)
        if np.any(self.cluster_sizes[self.cluster_of] < 1):
            raise ValueError("every referenced cluster must be non-empty")

    @property
    def n_users(self) -> int:
        return len(self.matrices)

    @property
    def d(self) -> int:
        return self.matrices[0].shape[0]

    def match_records(self) -> tuple[list, np.ndarray]:
        """Served records deduplicated to one representative per cluster.

        Returns (records, owner_cluster): the representative of each cluster
        is the served matrix of its lowest-indexed member, which is the
        cluster aggregate itself when no per-user noise was added.
        """
        if self.served is None:
            raise ValueError("no served records; apply a strategy first")
        reps: list = []
        owners: list[int] = []
        for cluster in sorted(set(self.cluster_of.tolist())):
            first = int(np.flatnonzero(self.cluster_of == cluster)[0])
            reps.append(self.served[first])
            owners.append(cluster)
        return reps, np.asarray(owners)


def laplace_perturb(record, weights, epsilon: float, rng: np.random.Generator) -> np.ndarray:
    """Add cell-weighted Laplace noise with variance ``epsilon`` to a record.

    Each cell gets ``w_i * z_i`` with z drawn from Laplace(0, sqrt(epsilon/2)),
    so the unweighted noise variance is exactly epsilon. Zero variance
    returns the record unchanged.
    """
    r = np.asarray(record, dtype=float)
    if epsilon < 0.0:
        raise ValueError(f"noise variance must be >= 0, got {epsilon}")
    w = np.asarray(weights, dtype=float).reshape(r.shape)
    if epsilon == 0.0:
        return r.copy()
    scale = float(np.sqrt(epsilon / 2.0))
    return r + w * rng.laplace(0.0, scale, size=r.shape)


def tsvd_truncate(record, k: int) -> np.ndarray:
    """Best rank-k approximation of a record by singular value truncation."""
    r = np.asarray(record, dtype=float)
    max_rank = min(r.shape)
    if not 1 <= k <= max_rank:
        raise ValueError(f"rank must be in [1, {max_rank}], got {k}")
    u, s, vt = np.linalg.svd(r, full_matrices=False)
    return (u[:, :k] * s[:k]) @ vt[:k]


def normalize_pipeline(record) -> np.ndarray:
    """Shared post-transformation pipeline producing a transition matrix.

    In order: scale the whole matrix by its Frobenius norm (skipped when
    zero), clip negatives to zero, row-normalize, and impute all-zero rows
    with the uniform row.
    """
    r = np.asarray(record, dtype=float)
    if not np.all(np.isfinite(r)):
        raise ValueError("record must be finite")
    norm = float(np.linalg.norm(r))
    if norm > 0.0:
        r = r / norm
    r = np.maximum(r, 0.0)
    return normalize_rows(r)


def aggregate_global(records) -> np.ndarray:
    """Elementwise mean of all records, in fixed user-index order."""
    mats = [np.asarray(r, dtype=float) for r in records]
    if not mats:
        raise ValueError("cannot average an empty record list")
    shape = mats[0].shape
    for m in mats:
        if m.shape != shape:
            raise ValueError("records must share one shape")
    return np.stack(mats).mean(axis=0)


def aggregate_clusters(records, assignment, n_clusters: int | None = None):
    """Elementwise mean per cluster; returns (means by cluster id, sizes).

    Singleton clusters pass their record through unchanged (the mean of one
    record). Raises if a cluster id in 0..n_clusters-1 has no members.
    """
    mats = [np.asarray(r, dtype=float) for r in records]
    labels = np.asarray(assignment, dtype=int)
    if labels.shape[0] != len(mats):
        raise ValueError("assignment must label every record")
    if n_clusters is None:
        n_clusters = int(labels.max()) + 1 if labels.size else 0
    means = []
    sizes = np.zeros(n_clusters, dtype=int)
    for cluster in range(n_clusters):
        members = np.flatnonzero(labels == cluster)
        if members.size == 0:
            raise ValueError(f"cluster {cluster} has no members")
        sizes[cluster] = members.size
        means.append(np.stack([mats[i] for i in members]).mean(axis=0))
    return means, sizes


def _neighbor_index(profile_matrix: np.ndarray, query: np.ndarray, rank: int,
                    exclude: int | None) -> int:
    if exclude is not None:
        mask = np.ones(profile_matrix.shape[0], dtype=bool)
        mask[exclude] = False
    else:
        mask = ~np.all(profile_matrix == query, axis=1)
    candidates = np.flatnonzero(mask)
    if candidates.size < rank:
        raise ValueError(f"need at least {rank} candidates, have {candidates.size}")
    dists = np.sqrt(((profile_matrix[candidates] - query) ** 2).sum(axis=1))
    order = np.argsort(dists, kind="stable")
    return int(candidates[order[rank - 1]])


def nn_record(profiles, query, records, rank: int = 1, exclude: int | None = None) -> np.ndarray:
    """Record of the rank-th nearest profile to ``query`` (Euclidean distance).

    Ties break toward the lowest user index. Candidates whose profile equals
    the query exactly are treated as the query itself and skipped, unless an
    explicit ``exclude`` index says which candidate is the query.
    """
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    matrix = stack_profiles(profiles)
    q = query.vector if hasattr(query, "vector") else np.asarray(query, dtype=float)
    if len(records) != matrix.shape[0]:
        raise ValueError("profiles and records must align, one per user")
    idx = _neighbor_index(matrix, q, rank, exclude)
    return np.asarray(records[idx], dtype=float).copy()


def apply_strategy(cohort: RecordSet, spec: StrategySpec, weights,
                   rng: np.random.Generator, *, profiles=None,
                   base_clusters: int | None = None, cluster_seed=0) -> RecordSet:
    """Produce the served record set for a cohort under one strategy.

    Neighbor and cluster strategies match on noise-free ``profiles`` (the
    cluster count is ``base_clusters`` times the spec's multiplier, fitted on
    the 2-D embedding); any ``post_noise`` is then drawn independently per
    user; and every served matrix passes through the normalization pipeline.
    Cluster bookkeeping in the result drives the de-anonymization weighting:
    singleton clusters for per-user strategies, one cohort-wide cluster for
    the global average.
    """
    d = cohort.d
    n = cohort.n_users
    labels = np.arange(n)
    sizes = None

    if spec.kind == "none":
        raw = [m.copy() for m in cohort.matrices]
    elif spec.kind == "laplace":
        raw = [laplace_perturb(m, weights, spec.epsilon, rng) for m in cohort.matrices]
    elif spec.kind == "tsvd":
        raw = [tsvd_truncate(m, spec.rank) for m in cohort.matrices]
    elif spec.kind == "global-average":
        mean = aggregate_global(cohort.matrices)
        raw = [mean.copy() for _ in range(n)]
        labels = np.zeros(n, dtype=int)
        sizes = np.array([n])
    elif spec.kind == "cluster-average":
        if profiles is None or base_clusters is None:
            raise ValueError("cluster-average needs profiles and a base cluster count")
        k = base_clusters * spec.multiplier
        assignment = kmeans(embed_2d(profiles), k, cluster_seed)
        means, sizes = aggregate_clusters(cohort.matrices, assignment.labels, assignment.k)
        labels = assignment.labels.copy()
        raw = [means[labels[u]].copy() for u in range(n)]
    elif spec.kind in ("nn", "second-nn"):
        if profiles is None:
            raise ValueError(f"{spec.kind} needs profiles")
        matrix = stack_profiles(profiles)
        neighbor_rank = 1 if spec.kind == "nn" else 2
        raw = []
        for u in range(n):
            idx = _neighbor_index(matrix, matrix[u], neighbor_rank, exclude=u)
            raw.append(cohort.matrices[idx].copy())
    else:  # pragma: no cover - guarded by StrategySpec validation
        raise ValueError(f"unknown strategy kind {spec.kind!r}")

    if spec.kind in AGGREGATION_KINDS and spec.post_noise:
        raw = [laplace_perturb(m, weights, spec.post_noise, rng) for m in raw]

    served = [normalize_pipeline(m) for m in raw]
    if sizes is None:
        sizes = np.bincount(labels)
    return RecordSet(matrices=cohort.matrices, served=served,
                     cluster_of=labels, cluster_sizes=sizes)
