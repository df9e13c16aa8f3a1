"""Classical Givens rotation QR, the baseline for the operation counts."""

import math
import time
from dataclasses import dataclass

import numpy as np

from .counting import OpCounter, Q_PATH
from .errors import UnsupportedShapeError
from .matcore import FactorizationResult, as_fortran, sign_normalize


@dataclass(frozen=True)
class GivensCoeff:
    c: float
    s: float
    t: float

    @property
    def is_identity(self):
        return self.c == 1.0 and self.s == 0.0


IDENTITY = GivensCoeff(1.0, 0.0, 0.0)


def givens_coeffs(a, b, counter=None):
    """Rotation ``[[c, s], [-s, c]]`` taking ``(a, b)`` to ``(t, 0)``.

    ``t`` uses ``math.hypot`` so the squares never overflow; it is tallied
    as two multiplies, an add and a square root. ``(0, 0)`` yields the
    identity rotation.
    """
    t = math.hypot(a, b)
    if counter is not None:
        counter.tally(mul=2, add=1, sqrt=1)
    if t == 0.0:
        return IDENTITY
    if counter is not None:
        counter.tally(div=2)
    return GivensCoeff(a / t, b / t, t)


def apply_givens_rows(a, upper, lower, g, from_col=0, counter=None):
    """Rotate rows ``upper < lower`` of ``a`` in place, columns ``>= from_col``."""
    if not (0 <= upper < lower < a.shape[0]):
        raise IndexError(f"rows ({upper}, {lower}) invalid for {a.shape[0]} rows")
    if g.is_identity:
        return
    u = a[upper, from_col:].copy()
    w = a[lower, from_col:]
    a[upper, from_col:] = g.c * u + g.s * w
    a[lower, from_col:] = g.c * w - g.s * u
    if counter is not None:
        width = u.size
        counter.tally(mul=4 * width, add=2 * width)


def gr_factorize(a, accumulate_q=True, counter=None):
    """QR by one Givens rotation per subdiagonal entry.

    Columns left to right; within a column the pairs ``(m-2, m-1)``, ...,
    ``(j, j+1)`` are rotated bottom-up. Rotations whose target is already
    zero are skipped.
    """
    start = time.perf_counter()
    r = as_fortran(a)
    m, n = r.shape
    if m < n:
        raise UnsupportedShapeError(f"gr_factorize needs rows >= cols, got {m}x{n}")
    qt = np.eye(m, order="F") if accumulate_q else None
    q_counter = OpCounter(channel=Q_PATH) if accumulate_q else None

    for j in range(min(m - 1, n)):
        for i in range(m - 1, j, -1):
            b = r[i, j]
            if b == 0.0:
                continue
            g = givens_coeffs(r[i - 1, j], b, counter)
            r[i - 1, j] = g.t
            r[i, j] = 0.0
            apply_givens_rows(r, i - 1, i, g, j + 1, counter)
            if qt is not None:
                apply_givens_rows(qt, i - 1, i, g, 0, q_counter)

    q = np.asfortranarray(qt.T) if qt is not None else None
    sign_normalize(r, q)
    return FactorizationResult(
        r=r, q=q, counts=counter, q_counts=q_counter,
        elapsed=time.perf_counter() - start,
    )
