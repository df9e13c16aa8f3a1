"""Hypothesis strategies shared by the property tests.

Values are zero or of magnitude in [1e-100, 1e100]: squares of anything
smaller underflow, and the kernels deliberately do no rescaling.
"""

import numpy as np
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays


def moderate(bound=1e6):
    return st.floats(-bound, bound, allow_nan=False).map(lambda x: 0.0 if abs(x) < 1e-100 else x)


def vectors(min_size=2, max_size=9, bound=100.0):
    return arrays(np.float64, st.integers(min_size, max_size), elements=moderate(bound))
