"""Column-wise (CGR) and generalized (GGR) Givens QR.

One pivot column is annihilated in a single step. With ``v`` the active
part of the pivot column (length ``L``) and ``a`` the active part of a
trailing column, the step needs

* tail norms ``q[t] = ||v[t:]||``,
* ``k[t] = v[t] / (q[t] q[t+1])`` and ``l[t] = q[t+1] / q[t]``,
* the last-row pair ``c = v[L-2] / q[L-2]``, ``s = v[L-1] / q[L-2]``,
* partial inner sums ``S[t] = sum(v[u] a[u] for u > t)``,

after which the new trailing column is::

    row 0:           (v[0] a[0] + S[0]) / q[0]
    rows 1..L-2:     k[t-1] S[t-1] - l[t-1] a[t-1]
    row L-1:         c a[L-1] - s a[L-2]

Every row reads only old values, so row 0 and the remaining rows are
independent once ``(q, k, l, S)`` are known. CGR walks trailing columns one
at a time; GGR updates all trailing columns at once in two phases.
"""

import time
from dataclasses import dataclass

import numpy as np

from .counting import OpCounter, Q_PATH
from .errors import ContractError, UnsupportedShapeError
from .matcore import FactorizationResult, as_fortran, matmul, sign_normalize

# below this a tail norm counts as already annihilated
TAU0 = 1e-300

SIGN_MODES = ("positive", "copysign")


@dataclass(frozen=True)
class ColumnTransform:
    v: np.ndarray
    q: np.ndarray
    k: np.ndarray
    l: np.ndarray
    c_last: float
    s_last: float
    # rows 1..L-2 whose sub-tail vanished are scaled by this factor instead
    # of going through k/l; zero marks a regular row
    passthrough: np.ndarray
    sign: float = 1.0

    @property
    def L(self):
        return self.v.size

    @property
    def degenerate(self):
        return self.passthrough != 0.0

    @property
    def diag(self):
        return self.sign * self.q[0]

    @property
    def is_trivial(self):
        return self.L < 2


def _reverse_cumsum(x):
    return np.cumsum(x[::-1], axis=0)[::-1]


def tail_sumsq(v, counter=None):
    """``sum(v[u]**2 for u >= t)`` for every ``t``, accumulated bottom-up."""
    v = np.asarray(v, dtype=np.float64)
    if counter is not None:
        counter.tally(mul=v.size, add=max(v.size - 1, 0))
    return _reverse_cumsum(v * v)


def tail_norms(v, counter=None):
    ss = tail_sumsq(v, counter)
    if counter is not None:
        counter.tally(sqrt=ss.size)
    return np.sqrt(ss)


def kl_vectors(v, q, counter=None, sign_mode="positive"):
    """Coefficients of the column transform from ``v`` and its tail norms."""
    if sign_mode not in SIGN_MODES:
        raise ValueError(f"sign_mode must be one of {SIGN_MODES}")
    v = np.array(v, dtype=np.float64)
    q = np.array(q, dtype=np.float64)
    L = v.size
    if L < 2:
        raise ContractError(f"kl_vectors needs at least 2 entries, got {L}")
    qa, qb = q[: L - 2], q[1 : L - 1]
    regular = qb >= TAU0
    k = np.zeros(L - 2)
    l = np.zeros(L - 2)
    passthrough = np.zeros(L - 2)
    nreg = int(regular.sum())
    if nreg == L - 2:
        k = v[: L - 2] / (qa * qb)
        l = qb / qa
    elif nreg:
        k[regular] = v[: L - 2][regular] / (qa[regular] * qb[regular])
        l[regular] = qb[regular] / qa[regular]
    ndiv = 2 * nreg
    if nreg < L - 2:
        deg = ~regular
        live = deg & (qa >= TAU0)
        passthrough[deg] = 1.0
        passthrough[live] = v[: L - 2][live] / qa[live]
        ndiv += int(live.sum())
    if q[L - 2] >= TAU0:
        c_last, s_last = v[L - 2] / q[L - 2], v[L - 1] / q[L - 2]
        ndiv += 2
    else:
        c_last, s_last = 1.0, 0.0
    sign = 1.0
    if sign_mode == "copysign" and q[0] >= TAU0:
        sign = -float(np.copysign(1.0, v[0]))
    if counter is not None:
        counter.tally(mul=nreg, div=ndiv)
    for arr in (v, q, k, l, passthrough):
        arr.flags.writeable = False
    return ColumnTransform(v, q, k, l, float(c_last), float(s_last), passthrough, sign)


def column_transform(v, counter=None, sign_mode="positive"):
    return kl_vectors(v, tail_norms(v, counter), counter, sign_mode)


def partial_inner_sums(v, w, counter=None):
    """``S[t] = sum(v[u] * w[u] for u > t)``, ``t = 0..L-2``.

    One reverse cumulative pass; ``w`` may be a vector or an ``L x T``
    block, in which case every column is treated independently.
    """
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if w.shape[0] != v.size:
        raise ContractError(f"partial_inner_sums length mismatch: {v.size} vs {w.shape[0]}")
    if v.size < 2:
        return np.zeros((0,) + w.shape[1:])
    vv = v[1:] if w.ndim == 1 else v[1:, None]
    if counter is not None:
        width = 1 if w.ndim == 1 else w.shape[1]
        counter.tally(mul=(v.size - 1) * width, add=(v.size - 2) * width)
    return _reverse_cumsum(vv * w[1:])


def row1_kernel(tr, a0, s0, counter=None):
    """New pivot row from its old values ``a0`` and the sums ``S[0]``."""
    if tr.q[0] < TAU0:
        return np.array(a0, dtype=np.float64, copy=True)
    out = (tr.v[0] * a0 + s0) / tr.q[0]
    if counter is not None:
        counter.tally(mul=out.size, add=out.size, div=out.size)
    if tr.sign < 0:
        np.negative(out, out=out)
    return out


def rows_kernel(tr, above, here, s_here, first, counter=None):
    """New values for active rows ``first, first+1, ...`` (``first >= 1``).

    ``here`` holds the old rows, ``above`` the old rows one position higher
    and ``s_here`` the matching ``S[u - 1]``. Shapes are ``(nrows, T)``.
    """
    nrows = here.shape[0]
    L = tr.L
    if first < 1 or first + nrows > L:
        raise ContractError(f"rows {first}..{first + nrows - 1} outside 1..{L - 1}")
    out = np.empty(here.shape)
    width = here.shape[1] if here.ndim == 2 else 1
    mid_end = min(first + nrows, L - 1)
    nmid = max(mid_end - first, 0)
    if nmid:
        idx = slice(first - 1, mid_end - 1)
        k, l = tr.k[idx], tr.l[idx]
        out[:nmid] = k[:, None] * s_here[:nmid] - l[:, None] * above[:nmid]
        deg = tr.degenerate[idx]
        ndeg = int(deg.sum())
        if ndeg:
            d = tr.passthrough[idx][deg]
            out[:nmid][deg] = d[:, None] * here[:nmid][deg]
        if counter is not None:
            counter.tally(mul=(2 * (nmid - ndeg) + ndeg) * width, add=(nmid - ndeg) * width)
    if first + nrows == L:
        out[-1] = tr.c_last * here[-1] - tr.s_last * above[-1]
        if counter is not None:
            counter.tally(mul=2 * width, add=width)
    if tr.sign < 0 and first == 1:
        np.negative(out[0], out=out[0])
    return out


def update_row1(tr, w, s, counter=None):
    """Phase one: the new pivot row for every column of ``w``."""
    return row1_kernel(tr, w[0], s[0], counter)


def update_rows(tr, w, s, counter=None):
    """Phase two: new rows ``1..L-1`` for every column of ``w``."""
    return rows_kernel(tr, w[:-1], w[1:], s, 1, counter)


def apply_transform(tr, w, counter=None):
    """Apply ``tr`` to the ``L x T`` block ``w`` in place."""
    if tr.is_trivial or w.shape[1] == 0:
        return
    s = partial_inner_sums(tr.v, w, counter)
    row1 = update_row1(tr, w, s, counter)
    rest = update_rows(tr, w, s, counter)
    w[0] = row1
    w[1:] = rest


def _trivial_transform(v):
    v = np.array(v, dtype=np.float64)
    q = np.abs(v)
    empty = np.zeros(0)
    return ColumnTransform(v, q, empty, empty, 1.0, 0.0, empty)


def _set_pivot_column(a, pivot_row, pivot_col, tr):
    a[pivot_row, pivot_col] = tr.diag
    a[pivot_row + 1 :, pivot_col] = 0.0


def cgr_column_step(a, pivot_row, pivot_col, counter=None, sign_mode="positive"):
    """Annihilate ``a[pivot_row+1:, pivot_col]`` in place, one trailing column
    at a time, and return the transform used (0-based indices)."""
    v = a[pivot_row:, pivot_col]
    if v.size < 2:
        return _trivial_transform(v)
    tr = column_transform(v, counter, sign_mode)
    for j in range(pivot_col + 1, a.shape[1]):
        apply_transform(tr, a[pivot_row:, j : j + 1], counter)
    _set_pivot_column(a, pivot_row, pivot_col, tr)
    return tr


def ggr_column_step(a, pivot_row, pivot_col, counter=None, sign_mode="positive"):
    """Same transform as :func:`cgr_column_step`, with every trailing column
    updated in one sweep: S for the whole block, then the two phases."""
    v = a[pivot_row:, pivot_col]
    if v.size < 2:
        return _trivial_transform(v)
    tr = column_transform(v, counter, sign_mode)
    apply_transform(tr, a[pivot_row:, pivot_col + 1 :], counter)
    _set_pivot_column(a, pivot_row, pivot_col, tr)
    return tr


def _factorize(a, step, accumulate_q, counter, sign_mode):
    start = time.perf_counter()
    r = as_fortran(a)
    m, n = r.shape
    if m < n:
        raise UnsupportedShapeError(f"QR needs rows >= cols, got {m}x{n}")
    qt = np.eye(m, order="F") if accumulate_q else None
    q_counter = OpCounter(channel=Q_PATH) if accumulate_q else None
    for j in range(min(m - 1, n)):
        tr = step(r, j, j, counter, sign_mode)
        if qt is not None and not tr.is_trivial:
            apply_transform(tr, qt[j:, :], q_counter)
    q = np.asfortranarray(qt.T) if qt is not None else None
    if sign_mode == "positive":
        sign_normalize(r, q)
    return FactorizationResult(
        r=r, q=q, counts=counter, q_counts=q_counter,
        elapsed=time.perf_counter() - start,
    )


def cgr_factorize(a, accumulate_q=True, counter=None, sign_mode="positive"):
    return _factorize(a, cgr_column_step, accumulate_q, counter, sign_mode)


def ggr_factorize(a, accumulate_q=True, counter=None, sign_mode="positive"):
    return _factorize(a, ggr_column_step, accumulate_q, counter, sign_mode)


def ggr_blocked_factorize(a, panel_width, counter=None, accumulate_q=True):
    """Blocked GGR: factor an ``m_active x b`` panel, form its orthogonal
    factor explicitly and push it through the trailing matrix with GEMM."""
    start = time.perf_counter()
    r = as_fortran(a)
    m, n = r.shape
    if m < n:
        raise UnsupportedShapeError(f"QR needs rows >= cols, got {m}x{n}")
    if not 1 <= panel_width <= n:
        raise ContractError(f"panel width {panel_width} outside 1..{n}")
    q = np.eye(m, order="F") if accumulate_q else None
    q_counter = OpCounter(channel=Q_PATH) if accumulate_q else None
    for j0 in range(0, n, panel_width):
        j1 = min(j0 + panel_width, n)
        if j0 >= m - 1:
            break
        panel = ggr_factorize(r[j0:, j0:j1], accumulate_q=True, counter=counter)
        if counter is not None:
            # forming the panel factor is part of producing R here
            pc = panel.q_counts
            counter.tally(mul=pc.mul, add=pc.add, div=pc.div, sqrt=pc.sqrt)
        r[j0:, j0:j1] = panel.r
        if j1 < n:
            r[j0:, j1:] = matmul(panel.q.T, r[j0:, j1:], counter)
        if q is not None:
            q[:, j0:] = matmul(q[:, j0:], panel.q, q_counter)
    sign_normalize(r, q)
    return FactorizationResult(
        r=r, q=q, counts=counter, q_counts=q_counter,
        elapsed=time.perf_counter() - start,
    )
