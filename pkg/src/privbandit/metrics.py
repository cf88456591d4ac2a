"""Per-cell entropy weights and the nearest-record identifiability metric.

The weight vector scales both the additive noise and the identifiability
distances: each cell's weight is the reciprocal of the empirical Shannon
entropy of that cell's value distribution across the cohort, floored so
degenerate (constant) cells stay finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ENTROPY_BINS = 20
ENTROPY_FLOOR = 1e-3


@dataclass(frozen=True)
class CellEntropyTable:
    """Per-cell Shannon entropy (nats) across a cohort, with the bin count used."""

    entropy: np.ndarray
    bins: int


def _stack_flat(records) -> np.ndarray:
    mats = [np.asarray(r, dtype=float) for r in records]
    if not mats:
        raise ValueError("need at least one record")
    shape = mats[0].shape
    for m in mats:
        if m.shape != shape:
            raise ValueError("records must share one shape")
    return np.stack([m.ravel() for m in mats])


def cell_entropy(records, bins: int = ENTROPY_BINS) -> CellEntropyTable:
    """Empirical entropy of each cell's value distribution over the cohort.

    Values are histogrammed into ``bins`` equal-width bins on [0, 1] (cell
    values of row-stochastic matrices live there; anything outside is clipped
    into the edge bins). Entropy is in nats.
    """
    if bins < 2:
        raise ValueError(f"bin count must be >= 2, got {bins}")
    flat = _stack_flat(records)
    n, n_cells = flat.shape
    idx = np.clip((flat * bins).astype(int), 0, bins - 1)
    counts = np.zeros((bins, n_cells))
    cols = np.broadcast_to(np.arange(n_cells), idx.shape)
    np.add.at(counts, (idx.ravel(), cols.ravel()), 1.0)
    p = counts / n
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, p * np.log(p), 0.0)
    return CellEntropyTable(entropy=-terms.sum(axis=0), bins=bins)


def entropy_weights(records, bins: int = ENTROPY_BINS, floor: float = ENTROPY_FLOOR) -> np.ndarray:
    """Per-cell weights 1/H, with H floored at ``floor``.

    Constant cells have zero entropy and therefore get the maximal weight
    1/floor.
    """
    if not floor > 0.0:
        raise ValueError(f"entropy floor must be positive, got {floor}")
    table = cell_entropy(records, bins=bins)
    return 1.0 / np.maximum(table.entropy, floor)


def ads_identifiability(records, released, weights) -> float:
    """Fraction of real records whose nearest released record is closer than
    their nearest other real record (strict), under weighted Euclidean
    distance on flattened matrices.

    Near 1 means released records sit on top of the originals; near 0 means
    every original is better explained by another original. Invariant under
    any common positive rescaling of ``weights``.
    """
    real = _stack_flat(records)
    fake = _stack_flat(released)
    n = real.shape[0]
    if n < 2:
        raise ValueError("need at least 2 real records (nearest-other is undefined)")
    if fake.shape[1] != real.shape[1]:
        raise ValueError("released records must match the real records' shape")
    w = np.asarray(weights, dtype=float).ravel()
    if w.shape[0] != real.shape[1]:
        raise ValueError(f"weights must have length {real.shape[1]}, got {w.shape[0]}")
    if np.any(w < 0.0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and nonnegative")

    wr = real * w
    wf = fake * w
    real_diff = wr[:, None, :] - wr[None, :, :]
    real_dist = np.sqrt((real_diff * real_diff).sum(axis=-1))
    np.fill_diagonal(real_dist, np.inf)
    k_real = real_dist.min(axis=1)

    fake_diff = wr[:, None, :] - wf[None, :, :]
    k_fake = np.sqrt((fake_diff * fake_diff).sum(axis=-1)).min(axis=1)
    return float(np.mean(k_fake < k_real))
