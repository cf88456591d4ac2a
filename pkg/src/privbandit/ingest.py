"""Build per-user transition matrices from event logs, or synthesize cohorts.

An event log is an ordered stream of (user, timestamp, state) rows. For each
user, the seconds between consecutive events accrue as dwell time on the
diagonal of a raw count matrix, observed state changes increment off-diagonal
counts, and the final event only terminates the session (its own state
carries no dwell and no transition). Row normalization then turns raw counts
into a transition matrix, imputing never-visited states with uniform rows.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np

from .rng import as_generator
from .stochastic import normalize_rows


class EventLog:
    """Per-user, time-ordered activity events.

    ``entries`` are (user, timestamp_s, state) triples; they may arrive
    interleaved across users and are grouped and time-sorted per user on
    construction. Timestamps must be strictly increasing within a user.
    ``users`` may declare additional users that have no events.
    """

    def __init__(self, entries: Iterable[tuple], users: Iterable = ()):
        by_user: dict = {}
        for user in users:
            by_user.setdefault(user, [])
        for user, timestamp, state in entries:
            by_user.setdefault(user, []).append((float(timestamp), int(state)))
        for user, events in by_user.items():
            events.sort(key=lambda e: e[0])
            for (t0, _), (t1, _) in zip(events, events[1:]):
                if t1 <= t0:
                    raise ValueError(f"timestamps for user {user!r} are not strictly increasing")
        self._by_user = by_user

    @property
    def users(self) -> tuple:
        return tuple(sorted(self._by_user, key=str))

    def __contains__(self, user) -> bool:
        return user in self._by_user

    def events(self, user) -> list[tuple[float, int]]:
        """Time-sorted (timestamp, state) pairs for ``user``."""
        if user not in self._by_user:
            raise KeyError(f"unknown user {user!r}")
        return list(self._by_user[user])


def build_raw_matrix(log: EventLog, user, d: int) -> np.ndarray:
    """Raw count matrix: dwell seconds on the diagonal, transition counts off it.

    The user's last event is a session terminator: it ends the previous
    state's dwell at its timestamp but contributes neither dwell nor a
    transition itself. Self-transitions in the log contribute dwell only.
    """
    events = log.events(user)
    if d < 1:
        raise ValueError(f"state count must be >= 1, got {d}")
    for _, state in events:
        if not 0 <= state < d:
            raise ValueError(f"state {state} out of range for d={d}")
    raw = np.zeros((d, d))
    last = len(events) - 1
    for i in range(last):
        t0, s0 = events[i]
        t1, s1 = events[i + 1]
        raw[s0, s0] += t1 - t0
        if i + 1 < last and s1 != s0:
            raw[s0, s1] += 1.0
    return raw


def finalize_matrix(raw) -> np.ndarray:
    """Row-normalize a raw count matrix into a transition matrix.

    Rows with positive mass are divided by their sum; all-zero rows (missing
    states) become uniform. Idempotent on already-stochastic input.
    """
    m = np.asarray(raw, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("raw count matrix must be square")
    if np.any(m < 0.0):
        raise ValueError("raw count matrix must be nonnegative")
    return normalize_rows(m)


def synth_cohort(n_users: int, d: int, concentration: float, seed, *,
                 n_clusters: int | None = None,
                 template_sharpness: float = 1.0) -> tuple[list[np.ndarray], np.ndarray]:
    """Generate a clustered cohort of row-stochastic matrices.

    Each cluster gets a template whose rows are normalized exponential draws
    raised to ``template_sharpness`` (larger values give peakier transition
    structure). Each user's matrix is a Dirichlet draw around their cluster
    template with the given ``concentration``, so within-cluster noise
    vanishes as ``concentration`` grows. Returns the matrices and the
    ground-truth cluster labels. Deterministic under ``seed``.
    """
    if n_users < 2:
        raise ValueError(f"need at least 2 users, got {n_users}")
    if d < 2:
        raise ValueError(f"need at least 2 states, got {d}")
    if not concentration > 0.0:
        raise ValueError(f"concentration must be positive, got {concentration}")
    if n_clusters is None:
        n_clusters = max(1, round(np.sqrt(n_users)))
    if not 1 <= n_clusters <= n_users:
        raise ValueError(f"cluster count must be in [1, {n_users}], got {n_clusters}")
    rng = as_generator(seed)

    templates = []
    for _ in range(n_clusters):
        base = rng.exponential(1.0, size=(d, d)) ** template_sharpness
        templates.append(normalize_rows(base))

    labels = np.arange(n_users) % n_clusters
    matrices = []
    for user in range(n_users):
        alpha = concentration * templates[labels[user]]
        raw = rng.gamma(shape=alpha)
        matrices.append(normalize_rows(raw))
    return matrices, labels
