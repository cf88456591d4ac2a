import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from privbandit.ingest import EventLog, build_raw_matrix, finalize_matrix, synth_cohort
from privbandit.stochastic import is_row_stochastic

from conftest import rng


A, B = 0, 1


def test_event_log_sorts_and_groups():
    log = EventLog([("u", 10.0, B), ("u", 0.0, A), ("v", 5.0, A)])
    assert log.users == ("u", "v")
    assert log.events("u") == [(0.0, A), (10.0, B)]


def test_event_log_rejects_equal_timestamps():
    with pytest.raises(ValueError, match="strictly increasing"):
        EventLog([("u", 1.0, A), ("u", 1.0, B)])


def test_event_log_unknown_user():
    log = EventLog([("u", 0.0, A)])
    with pytest.raises(KeyError, match="unknown"):
        log.events("nobody")


def test_event_log_declared_user_without_events():
    log = EventLog([("u", 0.0, A)], users=["ghost"])
    assert log.events("ghost") == []


# ------------------------------------------------------------ raw matrices

def test_raw_matrix_hand_trace():
    # dwell A = 10 + 5, dwell B = 5; transitions A->B and B->A once each;
    # the final event only terminates the last dwell
    log = EventLog([("u", 0.0, A), ("u", 10.0, B), ("u", 15.0, A), ("u", 20.0, A)])
    raw = build_raw_matrix(log, "u", 2)
    assert np.array_equal(raw, [[15.0, 1.0], [1.0, 5.0]])


def test_raw_matrix_single_dwell():
    log = EventLog([("u", 0.0, A), ("u", 7.0, A)])
    assert np.array_equal(build_raw_matrix(log, "u", 2), [[7.0, 0.0], [0.0, 0.0]])


def test_raw_matrix_empty_user():
    log = EventLog([], users=["u"])
    assert np.array_equal(build_raw_matrix(log, "u", 3), np.zeros((3, 3)))


def test_raw_matrix_self_transitions_contribute_dwell_only():
    log = EventLog([("u", 0.0, A), ("u", 5.0, A), ("u", 9.0, B), ("u", 12.0, B)])
    raw = build_raw_matrix(log, "u", 2)
    assert np.array_equal(raw, [[9.0, 1.0], [0.0, 3.0]])


def test_raw_matrix_rejects_out_of_range_state():
    log = EventLog([("u", 0.0, 5)])
    with pytest.raises(ValueError, match="out of range"):
        build_raw_matrix(log, "u", 2)


def test_raw_matrix_conserves_time():
    r = rng(0)
    times = np.cumsum(r.uniform(0.5, 20.0, size=40))
    states = r.integers(0, 4, size=40)
    log = EventLog([("u", float(t), int(s)) for t, s in zip(times, states)])
    raw = build_raw_matrix(log, "u", 4)
    assert np.isclose(np.trace(raw), times[-1] - times[0])


# --------------------------------------------------------------- finalize

def test_finalize_hand_normalization():
    got = finalize_matrix([[15.0, 1.0], [1.0, 5.0]])
    assert np.allclose(got, [[15 / 16, 1 / 16], [1 / 6, 5 / 6]], atol=1e-12)


def test_finalize_imputes_all_zero_matrix():
    got = finalize_matrix(np.zeros((3, 3)))
    assert np.allclose(got, np.full((3, 3), 1 / 3), atol=1e-15)


def test_finalize_idempotent_on_stochastic_input():
    m = finalize_matrix(rng(1).random((4, 4)))
    again = finalize_matrix(m)
    assert np.allclose(again, m, atol=1e-12)


def test_finalize_rejects_negative_counts():
    with pytest.raises(ValueError, match="nonnegative"):
        finalize_matrix([[1.0, -0.1], [0.0, 1.0]])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_finalize_output_always_row_stochastic(seed):
    raw = np.random.default_rng(seed).exponential(1.0, size=(5, 5))
    raw[np.random.default_rng(seed).random((5, 5)) < 0.3] = 0.0
    assert is_row_stochastic(finalize_matrix(raw))


# ------------------------------------------------------------ synth cohorts

def test_synth_cohort_casas_shape():
    mats, labels = synth_cohort(30, 41, 50.0, 7)
    assert len(mats) == 30
    assert labels.shape == (30,)
    assert all(m.shape == (41, 41) for m in mats)
    assert all(is_row_stochastic(m) for m in mats)


def test_synth_cohort_vanishing_noise_collapses_users_onto_templates():
    # at extreme concentration every user coincides with their cluster
    # template, so cluster members agree while clusters stay apart
    mats, labels = synth_cohort(4, 5, 1e14, 11, n_clusters=2)
    for c in (0, 1):
        members = [m for m, lab in zip(mats, labels) if lab == c]
        assert np.allclose(members[0], members[1], atol=1e-6)
    assert not np.allclose(mats[0], mats[1], atol=1e-3)


def test_synth_cohort_deterministic_under_seed():
    a, la = synth_cohort(8, 7, 25.0, 123, n_clusters=3)
    b, lb = synth_cohort(8, 7, 25.0, 123, n_clusters=3)
    assert np.array_equal(la, lb)
    for m, n in zip(a, b):
        assert np.array_equal(m, n)


def test_synth_cohort_distinct_matrices():
    mats, _ = synth_cohort(10, 6, 30.0, 2)
    flat = np.stack([m.ravel() for m in mats])
    assert np.unique(flat, axis=0).shape[0] == 10


@pytest.mark.parametrize("bad", [dict(n_users=1), dict(d=1), dict(concentration=0.0)])
def test_synth_cohort_validation(bad):
    kwargs = dict(n_users=4, d=4, concentration=1.0, seed=0)
    kwargs.update(bad)
    with pytest.raises(ValueError):
        synth_cohort(**kwargs)
