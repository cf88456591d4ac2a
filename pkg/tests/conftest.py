import numpy as np
import hypothesis.strategies as st
from hypothesis.extra.numpy import arrays

from privbandit.stochastic import normalize_rows


def rng(seed: int = 0) -> np.random.Generator:
    return np.random.default_rng(seed)


def stochastic_matrices(min_d: int = 2, max_d: int = 6):
    """Hypothesis strategy: random row-stochastic square matrices."""
    return st.integers(min_d, max_d).flatmap(
        lambda d: arrays(np.float64, (d, d), elements=st.floats(1e-3, 1.0)).map(normalize_rows)
    )


def beliefs(d: int):
    """Hypothesis strategy: length-d probability vectors."""
    return arrays(np.float64, d, elements=st.floats(1e-3, 1.0)).map(
        lambda v: v / v.sum()
    )
