"""User metadata profiles, their 2-D embedding, and k-means clustering.

Profiles stand in for the per-user metadata a matching server would hold:
hourly intensity averages, activity summary features, or a flattened sensor
adjacency graph. They feed the neighbor and cluster aggregation strategies,
never the transition-matrix cells themselves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ingest import EventLog
from .rng import as_generator

PROFILE_KINDS = ("fitbit-style", "endomondo-style", "adjacency-style", "synthetic")


@dataclass(frozen=True)
class UserProfile:
    """Fixed-length feature vector for one user, tagged with its provenance."""

    vector: np.ndarray
    kind: str = "synthetic"
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=float)
        if vec.ndim != 1:
            raise ValueError("profile vector must be 1-D")
        if not np.all(np.isfinite(vec)):
            raise ValueError("profile vector must be finite")
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        object.__setattr__(self, "vector", vec)


@dataclass(frozen=True)
class ClusterAssignment:
    """k-means result: per-point labels and the fitted centroids."""

    labels: np.ndarray
    centroids: np.ndarray
    k: int
    inertia_history: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=int)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "centroids", np.asarray(self.centroids, dtype=float))
        if labels.size and (labels.min() < 0 or labels.max() >= self.k):
            raise ValueError("labels reference clusters outside 0..k-1")

    def size_of(self, cluster: int) -> int:
        return int(np.sum(self.labels == cluster))


def stack_profiles(profiles) -> np.ndarray:
    """Stack profile vectors (or raw vectors) into an (n_users, n_features) array."""
    rows = [p.vector if isinstance(p, UserProfile) else np.asarray(p, dtype=float)
            for p in profiles]
    if not rows:
        raise ValueError("need at least one profile")
    length = rows[0].shape[0]
    for r in rows:
        if r.shape != (length,):
            raise ValueError("all profiles must share one vector length")
    return np.stack(rows)


def profile_hourly_intensity(log: EventLog, user) -> UserProfile:
    """24-vector of mean state intensity per hour of day, pooled over all days.

    The state id doubles as the intensity level (the four-level activity
    scheme). Hours with no events stay zero; a user with no events at all
    yields the zero vector flagged ``empty-log``.
    """
    events = log.events(user)
    if not events:
        return UserProfile(np.zeros(24), kind="fitbit-style", flags=("empty-log",))
    sums = np.zeros(24)
    counts = np.zeros(24)
    for t, state in events:
        hour = int(t // 3600) % 24
        sums[hour] += state
        counts[hour] += 1
    vector = np.divide(sums, counts, out=np.zeros(24), where=counts > 0)
    return UserProfile(vector, kind="fitbit-style")


def profile_activity_features(log: EventLog, user, d: int,
                              extra_scalars=(0.0, 0.0, 0.0)) -> UserProfile:
    """Summary scalars plus per-state visit frequencies.

    The vector is [mean dwell per visit, *extra_scalars, visit count per
    state], so its length is d plus the number of scalars. ``extra_scalars``
    holds dataset-specific aggregates (e.g. average heart rate or distance)
    injected by the caller when the source data carries them; the defaults
    are zero placeholders, giving the 43-dimensional layout at d=39.
    A visit is a maximal run of consecutive events in one state; the final
    event terminates the last visit without starting one.
    """
    events = log.events(user)
    scalars = [float(x) for x in extra_scalars]
    freq = np.zeros(d)
    total_dwell = 0.0
    n_visits = 0
    prev_state = None
    for i in range(len(events) - 1):
        t0, s0 = events[i]
        t1, _ = events[i + 1]
        if not 0 <= s0 < d:
            raise ValueError(f"state {s0} out of range for d={d}")
        total_dwell += t1 - t0
        if s0 != prev_state:
            freq[s0] += 1
            n_visits += 1
        prev_state = s0
    mean_dwell = total_dwell / n_visits if n_visits else 0.0
    vector = np.concatenate([[mean_dwell], scalars, freq])
    flags = ("empty-log",) if not events else ()
    return UserProfile(vector, kind="endomondo-style", flags=flags)


def profile_adjacency(log: EventLog, user, m: int) -> UserProfile:
    """Flattened m x m binary adjacency of consecutive sensor activations.

    Cell (a, b) is 1 when activation b ever directly followed activation a.
    Self-loops are excluded: repeated firings of one sensor carry dwell, not
    layout, information. This is the deterministic stand-in for a learned
    graph embedding.
    """
    events = log.events(user)
    adj = np.zeros((m, m))
    for (_, a), (_, b) in zip(events, events[1:]):
        if not (0 <= a < m and 0 <= b < m):
            raise ValueError(f"sensor id out of range for m={m}")
        if a != b:
            adj[a, b] = 1.0
    flags = ("empty-log",) if not events else ()
    return UserProfile(adj.ravel(), kind="adjacency-style", flags=flags)


def embed_2d(profiles) -> np.ndarray:
    """Project profiles onto their top-2 principal components.

    Deterministic: components are centered-data singular vectors with the
    sign fixed so each component's largest-magnitude coordinate is positive.
    Constant input maps to all-zero coordinates; inputs of intrinsic
    dimension <= 2 keep their pairwise distances.
    """
    x = stack_profiles(profiles) if not isinstance(profiles, np.ndarray) else np.asarray(profiles, dtype=float)
    if x.ndim != 2:
        raise ValueError("expected an (n_users, n_features) array")
    n = x.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 users to embed, got {n}")
    centered = x - x.mean(axis=0)
    if not centered.any():
        return np.zeros((n, 2))
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    out = np.zeros((n, 2))
    for comp in range(min(2, s.shape[0])):
        v = vt[comp]
        pivot = int(np.argmax(np.abs(v)))
        sign = 1.0 if v[pivot] >= 0.0 else -1.0
        out[:, comp] = sign * u[:, comp] * s[comp]
    return out


def kmeans(points, k: int, seed, max_iter: int = 300) -> ClusterAssignment:
    """Seeded k-means++ initialization followed by Lloyd iterations.

    Converges when assignments stop changing (or at ``max_iter``). Empty
    clusters are repaired by stealing the point farthest from its current
    centroid, which keeps the inertia sequence non-increasing. Requires at
    most as many clusters as distinct points. Deterministic under ``seed``.
    """
    x = stack_profiles(points) if not isinstance(points, np.ndarray) else np.asarray(points, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("expected a nonempty (n_points, n_features) array")
    n = x.shape[0]
    distinct = np.unique(x, axis=0).shape[0]
    if not 1 <= k <= distinct:
        raise ValueError(f"k must be in [1, {distinct}] (distinct points), got {k}")
    rng = as_generator(seed)

    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    closest = ((x - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        probs = closest / closest.sum()
        centers[j] = x[rng.choice(n, p=probs)]
        closest = np.minimum(closest, ((x - centers[j]) ** 2).sum(axis=1))

    labels = np.full(n, -1)
    history: list[float] = []
    for _ in range(max_iter):
        dist2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)
        new_labels = dist2.argmin(axis=1)
        for cluster in range(k):
            if not np.any(new_labels == cluster):
                own = dist2[np.arange(n), new_labels]
                counts = np.bincount(new_labels, minlength=k)
                own = np.where(counts[new_labels] > 1, own, -np.inf)
                thief = int(np.argmax(own))
                new_labels[thief] = cluster
                centers[cluster] = x[thief]
                dist2[:, cluster] = ((x - centers[cluster]) ** 2).sum(axis=1)
        converged = bool(np.array_equal(new_labels, labels))
        labels = new_labels
        for cluster in range(k):
            centers[cluster] = x[labels == cluster].mean(axis=0)
        inertia = float(((x - centers[labels]) ** 2).sum())
        history.append(inertia)
        if converged:
            break
    return ClusterAssignment(labels=labels, centroids=centers, k=k,
                             inertia_history=tuple(history))
