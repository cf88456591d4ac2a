import numpy as np
import pytest

from privbandit.ingest import EventLog
from privbandit.profiles import (
    ClusterAssignment,
    UserProfile,
    embed_2d,
    kmeans,
    profile_activity_features,
    profile_adjacency,
    profile_hourly_intensity,
    stack_profiles,
)
from privbandit.presets import get_preset

from conftest import rng

HOUR = 3600.0


# ------------------------------------------------------------- hourly profile

def test_hourly_constant_state_all_day():
    entries = [("u", h * HOUR + 10, 2) for h in range(24)]
    prof = profile_hourly_intensity(EventLog(entries), "u")
    assert np.array_equal(prof.vector, np.full(24, 2.0))
    assert prof.kind == "fitbit-style"


def test_hourly_activity_only_in_hour_zero():
    entries = [("u", 60.0, 3), ("u", 120.0, 3)]
    prof = profile_hourly_intensity(EventLog(entries), "u")
    assert prof.vector[0] == 3.0
    assert np.array_equal(prof.vector[1:], np.zeros(23))


def test_hourly_two_days_average():
    entries = [("u", 5 * HOUR + 1, 1), ("u", 24 * HOUR + 5 * HOUR + 1, 3)]
    prof = profile_hourly_intensity(EventLog(entries), "u")
    assert prof.vector[5] == 2.0


def test_hourly_empty_log_is_flagged():
    prof = profile_hourly_intensity(EventLog([], users=["u"]), "u")
    assert np.array_equal(prof.vector, np.zeros(24))
    assert "empty-log" in prof.flags


# ----------------------------------------------------------- activity profile

def test_activity_single_visit():
    log = EventLog([("u", 0.0, 0), ("u", 10.0, 0)])
    prof = profile_activity_features(log, "u", 2)
    assert prof.vector[0] == 10.0          # mean dwell per visit
    assert np.array_equal(prof.vector[-2:], [1.0, 0.0])


def test_activity_empty_log_zero_vector():
    prof = profile_activity_features(EventLog([], users=["u"]), "u", 3)
    assert np.array_equal(prof.vector, np.zeros(3 + 4))
    assert "empty-log" in prof.flags


def test_activity_endomondo_dimension():
    log = EventLog([("u", 0.0, 0), ("u", 4.0, 1), ("u", 6.0, 1)])
    prof = profile_activity_features(log, "u", 39)
    assert prof.vector.shape == (43,)
    assert prof.kind == "endomondo-style"


def test_activity_counts_visits_not_events():
    # two visits to state 0 separated by one visit to state 1
    log = EventLog([("u", 0.0, 0), ("u", 2.0, 0), ("u", 5.0, 1), ("u", 6.0, 0), ("u", 9.0, 0)])
    prof = profile_activity_features(log, "u", 2)
    assert np.array_equal(prof.vector[-2:], [2.0, 1.0])
    assert prof.vector[0] == pytest.approx(9.0 / 3.0)


# ---------------------------------------------------------- adjacency profile

def test_adjacency_records_both_directions():
    log = EventLog([("u", 0.0, 0), ("u", 1.0, 1), ("u", 2.0, 0)])
    prof = profile_adjacency(log, "u", 3)
    adj = prof.vector.reshape(3, 3)
    assert adj[0, 1] == 1.0 and adj[1, 0] == 1.0
    assert adj.sum() == 2.0


def test_adjacency_single_activation_is_empty():
    log = EventLog([("u", 0.0, 2)])
    assert profile_adjacency(log, "u", 4).vector.sum() == 0.0


def test_adjacency_excludes_self_loops():
    log = EventLog([("u", 0.0, 1), ("u", 1.0, 1), ("u", 2.0, 1)])
    assert profile_adjacency(log, "u", 3).vector.sum() == 0.0


# -------------------------------------------------------------------- embed_2d

def test_embed_2d_preserves_distances_of_2d_input():
    x = rng(0).normal(size=(10, 2))
    emb = embed_2d(x)
    orig = np.linalg.norm(x[:, None] - x[None, :], axis=-1)
    new = np.linalg.norm(emb[:, None] - emb[None, :], axis=-1)
    assert np.allclose(orig, new, atol=1e-9)


def test_embed_2d_collinear_second_component_zero():
    direction = np.array([1.0, 2.0, -1.0])
    x = np.outer(np.arange(6, dtype=float), direction)
    emb = embed_2d(x)
    assert np.allclose(emb[:, 1], 0.0, atol=1e-9)


def test_embed_2d_constant_profiles_are_zero():
    x = np.full((4, 5), 3.3)
    assert np.array_equal(embed_2d(x), np.zeros((4, 2)))


def test_embed_2d_matches_eigendecomposition_oracle():
    x = rng(3).normal(size=(10, 24))
    emb = embed_2d(x)
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered
    eigvals, eigvecs = np.linalg.eigh(cov)
    # top-2 eigenvectors of the covariance span the same plane
    for comp in range(2):
        v = eigvecs[:, -1 - comp]
        proj = centered @ v
        assert np.allclose(np.abs(proj), np.abs(emb[:, comp]), atol=1e-8)


def test_embed_2d_sign_convention_is_deterministic():
    x = rng(4).normal(size=(8, 6))
    assert np.array_equal(embed_2d(x), embed_2d(x.copy()))


def test_embed_2d_needs_two_users():
    with pytest.raises(ValueError, match="at least 2"):
        embed_2d(np.ones((1, 4)))


# --------------------------------------------------------------------- kmeans

def test_kmeans_k_equals_n_zero_inertia():
    x = rng(5).normal(size=(6, 3))
    got = kmeans(x, 6, seed=1)
    assert sorted(got.labels.tolist()) == list(range(6))
    assert got.inertia_history[-1] == pytest.approx(0.0, abs=1e-18)


def test_kmeans_separated_blobs_recovered():
    r = rng(6)
    blob_a = r.normal(0.0, 0.05, size=(12, 2))
    blob_b = r.normal(5.0, 0.05, size=(12, 2)) + np.array([0.0, 7.0])
    x = np.vstack([blob_a, blob_b])
    got = kmeans(x, 2, seed=2)
    a_labels = set(got.labels[:12].tolist())
    b_labels = set(got.labels[12:].tolist())
    assert len(a_labels) == 1 and len(b_labels) == 1 and a_labels != b_labels


def test_kmeans_inertia_non_increasing():
    x = rng(7).normal(size=(40, 4))
    got = kmeans(x, 5, seed=3)
    hist = np.array(got.inertia_history)
    assert np.all(np.diff(hist) <= 1e-9)


def test_kmeans_deterministic_under_seed():
    x = rng(8).normal(size=(20, 3))
    a = kmeans(x, 4, seed=9)
    b = kmeans(x, 4, seed=9)
    assert np.array_equal(a.labels, b.labels)
    assert np.array_equal(a.centroids, b.centroids)


def test_kmeans_rejects_more_clusters_than_distinct_points():
    x = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]])
    with pytest.raises(ValueError, match="distinct"):
        kmeans(x, 3, seed=0)


def test_kmeans_every_cluster_nonempty():
    x = rng(10).normal(size=(30, 2))
    got = kmeans(x, 7, seed=4)
    assert np.array_equal(np.unique(got.labels), np.arange(7))


def test_preset_base_cluster_counts():
    assert get_preset("casas").base_clusters == 7
    assert get_preset("endomondo").base_clusters == 8
    assert get_preset("fitbit").base_clusters == 8


# ---------------------------------------------------------------------- types

def test_profiles_deterministic_functions_of_log():
    entries = [("u", float(i * 100), int(i % 3)) for i in range(20)]
    a = profile_activity_features(EventLog(entries), "u", 3)
    b = profile_activity_features(EventLog(entries), "u", 3)
    assert np.array_equal(a.vector, b.vector)


def test_stack_profiles_rejects_mixed_lengths():
    with pytest.raises(ValueError, match="length"):
        stack_profiles([UserProfile(np.zeros(3)), UserProfile(np.zeros(4))])


def test_cluster_assignment_validates_labels():
    with pytest.raises(ValueError, match="outside"):
        ClusterAssignment(labels=[0, 3], centroids=np.zeros((2, 2)), k=2)
