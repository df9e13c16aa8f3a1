"""Householder baselines: unblocked (GEMV update), blocked (GEMM update with
a compact T factor) and the fused modified-Householder update."""

import math
import time
from dataclasses import dataclass

import numpy as np

from .counting import OpCounter, Q_PATH
from .errors import ContractError, UnsupportedShapeError
from .matcore import (
    FactorizationResult, as_fortran, matmul, matvec, ordered_dot, sign_normalize,
)


@dataclass(frozen=True)
class Reflector:
    """``P = I - tau v v^T`` with ``v[0] == 1``; ``beta`` is the image of
    the generating column's first entry."""

    v: np.ndarray
    tau: float
    beta: float
    pivot: int = 0

    def apply(self, x):
        x = np.asarray(x, dtype=np.float64)
        return x - self.tau * np.multiply.outer(self.v, self.v @ x)


def householder_vector(col, pivot=0, counter=None):
    """Reflector sending ``col`` to ``(beta, 0, ..., 0)``.

    ``beta = -sign(col[0]) ||col||`` so no cancellation happens in
    ``col[0] - beta``. A zero column gives the identity (``tau = 0``).
    """
    col = np.asarray(col, dtype=np.float64)
    L = col.size
    norm = math.sqrt(ordered_dot(col, col, counter))
    if counter is not None:
        counter.tally(sqrt=1)
    v = np.zeros(L)
    v[0] = 1.0
    if norm == 0.0:
        return Reflector(v, 0.0, 0.0, pivot)
    alpha = col[0]
    beta = -math.copysign(norm, alpha)
    denom = alpha - beta
    v[1:] = col[1:] / denom
    tau = (beta - alpha) / beta
    if counter is not None:
        counter.tally(add=2, div=L)
    return Reflector(v, tau, beta, pivot)


def _check_shape(a):
    m, n = a.shape
    if m < n:
        raise UnsupportedShapeError(f"QR needs rows >= cols, got {m}x{n}")


def _gemv_update(r, j, h, counter):
    """``A -= tau v (A^T v)^T`` on the trailing block right of column j."""
    trail = r[j:, j + 1 :]
    if trail.shape[1] == 0 or h.tau == 0.0:
        return
    w = matvec(trail.T, h.v, counter)
    tw = h.tau * w
    trail -= np.multiply.outer(h.v, tw)
    if counter is not None:
        counter.tally(mul=tw.size + trail.size, add=trail.size)


def _fused_update(r, j, h, counter):
    """Per trailing column: ``d = v . a`` then immediately ``a -= tau d v``."""
    if h.tau == 0.0:
        return
    v = h.v
    for c in range(j + 1, r.shape[1]):
        a = r[j:, c]
        td = h.tau * ordered_dot(v, a, counter)
        a -= v * td
        if counter is not None:
            counter.tally(mul=1 + v.size, add=v.size)


def _reflect_panel(r, j0, j1, update, counter):
    """Reflect columns ``j0..j1-1`` of ``r`` in place, trailing update limited
    to those columns. Returns the reflectors."""
    m = r.shape[0]
    out = []
    for j in range(j0, min(j1, m)):
        h = householder_vector(r[j:, j], j, counter)
        sub = r[:, : j1]
        update(sub, j, h, counter)
        if h.tau != 0.0:
            r[j, j] = h.beta
            r[j + 1 :, j] = 0.0
        out.append(h)
    return out


def _accumulate_q(m, reflectors, counter):
    """``Q = H_0 H_1 ... H_{p-1}`` applied backwards to the identity."""
    q = np.eye(m, order="F")
    for h in reversed(reflectors):
        if h.tau == 0.0:
            continue
        j = h.pivot
        block = q[j:, j:]
        w = matvec(block.T, h.v, counter)
        tw = h.tau * w
        block -= np.multiply.outer(h.v, tw)
        if counter is not None:
            counter.tally(mul=tw.size + block.size, add=block.size)
    return q


def _unblocked(a, accumulate_q, counter, update):
    start = time.perf_counter()
    r = as_fortran(a)
    _check_shape(r)
    m, n = r.shape
    refl = _reflect_panel(r, 0, n, update, counter)
    q_counter = OpCounter(channel=Q_PATH) if accumulate_q else None
    q = _accumulate_q(m, refl, q_counter) if accumulate_q else None
    sign_normalize(r, q)
    return FactorizationResult(
        r=r, q=q, counts=counter, q_counts=q_counter,
        elapsed=time.perf_counter() - start,
    )


def hqr2_factorize(a, accumulate_q=True, counter=None):
    """Householder QR, one reflector per column, GEMV-shaped trailing update."""
    return _unblocked(a, accumulate_q, counter, _gemv_update)


def mht_factorize(a, accumulate_q=True, counter=None):
    """Householder QR with the trailing update fused column by column."""
    return _unblocked(a, accumulate_q, counter, _fused_update)


def t_factor(vmat, taus, counter=None):
    """Upper-triangular ``T`` with ``H_0 ... H_{b-1} = I - V T V^T``."""
    b = len(taus)
    t = np.zeros((b, b), order="F")
    for i in range(b):
        t[i, i] = taus[i]
        if i and taus[i] != 0.0:
            z = matvec(vmat[:, :i].T, vmat[:, i], counter)
            z = -taus[i] * z
            t[:i, i] = matvec(t[:i, :i], z, counter)
            if counter is not None:
                counter.tally(mul=i)
    return t


def _blocked(a, panel_width, counter, accumulate_q, update):
    start = time.perf_counter()
    r = as_fortran(a)
    _check_shape(r)
    m, n = r.shape
    if not 1 <= panel_width <= n:
        raise ContractError(f"panel width {panel_width} outside 1..{n}")
    refl = []
    q_counter = OpCounter(channel=Q_PATH) if accumulate_q else None
    for j0 in range(0, n, panel_width):
        j1 = min(j0 + panel_width, n)
        panel = _reflect_panel(r, j0, j1, update, counter)
        refl.extend(panel)
        if j1 >= n or not panel:
            continue
        vmat = np.zeros((m - j0, len(panel)), order="F")
        for i, h in enumerate(panel):
            vmat[h.pivot - j0 :, i] = h.v
        t = t_factor(vmat, [h.tau for h in panel], counter)
        trail = r[j0:, j1:]
        # Q_p^T A = (I - V T^T V^T) A
        w = matmul(vmat.T, trail, counter)
        w = matmul(t.T, w, counter)
        trail -= matmul(vmat, w, counter)
        if counter is not None:
            counter.tally(add=trail.size)
    q = _accumulate_q(m, refl, q_counter) if accumulate_q else None
    sign_normalize(r, q)
    return FactorizationResult(
        r=r, q=q, counts=counter, q_counts=q_counter,
        elapsed=time.perf_counter() - start,
    )


def hqrf_blocked_factorize(a, panel_width, counter=None, accumulate_q=True):
    """Blocked Householder QR: panel by the GEMV kernel, trailing matrix by
    three GEMMs through the compact WY factor."""
    return _blocked(a, panel_width, counter, accumulate_q, _gemv_update)


def mht_blocked_factorize(a, panel_width, counter=None, accumulate_q=True):
    """Blocked variant whose panel uses the fused modified-Householder kernel."""
    return _blocked(a, panel_width, counter, accumulate_q, _fused_update)
