"""Dense column-major matrices, BLAS-like kernels and factorization metrics.

Kernels take Fortran-ordered float64 arrays (or anything ``np.asarray``
accepts, including :class:`DenseMatrix`). Every kernel accepts an optional
:class:`~ggrqr.counting.OpCounter`; with ``counter=None`` nothing is
tallied. Reductions are evaluated strictly left to right so results do not
depend on the BLAS build or thread count.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractError

EPS = 2.0**-52
GEMM_BLOCK = 64


class DenseMatrix:
    """Real ``rows x cols`` matrix stored column-major in a flat buffer.

    Element ``(i, j)`` in 1-based math notation lives at
    ``data[(j - 1) * rows + (i - 1)]``.
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows, cols, data):
        data = np.ascontiguousarray(data, dtype=np.float64).reshape(-1)
        if rows < 1 or cols < 1:
            raise ContractError(f"dimensions must be positive, got {rows}x{cols}")
        if data.size != rows * cols:
            raise ContractError(
                f"data length {data.size} does not match {rows}x{cols}"
            )
        self.rows = int(rows)
        self.cols = int(cols)
        self.data = data

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2:
            raise ContractError(f"expected a 2-D array, got shape {a.shape}")
        return cls(a.shape[0], a.shape[1], a.ravel(order="F"))

    @classmethod
    def identity(cls, n):
        return cls.from_array(np.eye(n))

    def at(self, i, j):
        """1-based element access."""
        if not (1 <= i <= self.rows and 1 <= j <= self.cols):
            raise IndexError(f"({i}, {j}) outside {self.rows}x{self.cols}")
        return float(self.data[(j - 1) * self.rows + (i - 1)])

    def to_array(self):
        # a view: shares the buffer
        return self.data.reshape((self.rows, self.cols), order="F")

    def __array__(self, dtype=None, copy=None):
        a = self.to_array()
        return a if dtype is None else a.astype(dtype)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __eq__(self, other):
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.data, other.data)

    def __repr__(self):
        return f"DenseMatrix({self.rows}x{self.cols})"


def as_fortran(a):
    """Fortran-ordered float64 copy of ``a``."""
    return np.array(a, dtype=np.float64, order="F", copy=True)


def random_matrix(n, seed=42, cols=None):
    """Seeded matrix with i.i.d. uniform entries in [-1, 1] (PCG64)."""
    rng = np.random.default_rng(seed)
    return np.asfortranarray(rng.uniform(-1.0, 1.0, size=(n, cols or n)))


def matmul(a, b, counter=None, block=GEMM_BLOCK):
    """``C = A B`` by a blocked triple loop.

    Each ``C(i, j)`` is accumulated over ``t = 0, 1, ...`` in order, exactly
    as the scalar loop would; the tiling only changes memory traffic.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ContractError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    m, kdim = a.shape
    n = b.shape[1]
    c = np.zeros((m, n), order="F")
    if kdim == 0:
        return c
    for i0 in range(0, m, block):
        i1 = min(i0 + block, m)
        for j0 in range(0, n, block):
            j1 = min(j0 + block, n)
            ctile = np.multiply.outer(a[i0:i1, 0], b[0, j0:j1])
            for t in range(1, kdim):
                ctile += np.multiply.outer(a[i0:i1, t], b[t, j0:j1])
            c[i0:i1, j0:j1] = ctile
    if counter is not None:
        counter.tally(mul=m * n * kdim, add=m * n * (kdim - 1))
    return c


def matvec(a, x, counter=None):
    """``y = A x`` with each ``y(i)`` summed left to right."""
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if a.ndim != 2 or x.ndim != 1 or a.shape[1] != x.shape[0]:
        raise ContractError(f"matvec shape mismatch: {a.shape} x {x.shape}")
    m, n = a.shape
    if n == 0:
        return np.zeros(m)
    if counter is not None:
        counter.tally(mul=m * n, add=m * (n - 1))
    return np.cumsum(a * x, axis=1)[:, -1].copy()


def ordered_dot(x, y, counter=None):
    """Left-to-right inner product; matches one entry of :func:`matvec`."""
    if counter is not None:
        counter.tally(mul=x.size, add=max(x.size - 1, 0))
    if x.size == 0:
        return 0.0
    return float(np.cumsum(x * y)[-1])


def column_norm2(a, col, from_row=0, counter=None):
    """2-norm of ``A[from_row:, col]`` (0-based indices)."""
    a = np.asarray(a)
    if not (0 <= col < a.shape[1] and 0 <= from_row < a.shape[0]):
        raise IndexError(f"column {col} / row {from_row} outside {a.shape}")
    v = a[from_row:, col]
    ss = ordered_dot(v, v, counter)
    if counter is not None:
        counter.tally(sqrt=1)
    return float(np.sqrt(ss))


@dataclass
class Metrics:
    reconstruction_residual: float
    orthogonality_defect: float
    max_lower_triangle: float

    def line(self):
        return (
            f"residual={self.reconstruction_residual:.6e} "
            f"orthogonality={self.orthogonality_defect:.6e} "
            f"lower_max={self.max_lower_triangle:.6e}"
        )


def max_lower_triangle(r):
    r = np.asarray(r)
    low = np.tril(r, -1)
    return float(np.abs(low).max()) if low.size else 0.0


def metrics(a, q, r):
    a, q, r = (np.asarray(x, dtype=np.float64) for x in (a, q, r))
    m, n = a.shape
    if q.shape != (m, m) or r.shape != (m, n):
        raise ContractError(
            f"metrics shape mismatch: A {a.shape}, Q {q.shape}, R {r.shape}"
        )
    norm_a = np.linalg.norm(a)
    resid = np.linalg.norm(a - q @ r)
    if norm_a > 0:
        resid /= norm_a
    ortho = np.linalg.norm(q.T @ q - np.eye(m))
    return Metrics(float(resid), float(ortho), max_lower_triangle(r))


def sign_normalize(r, q=None):
    """Flip rows of ``r`` (and columns of ``q``) so diag(r) is nonnegative.

    Works in place; negation is exact, so nothing is counted.
    """
    k = min(r.shape)
    for i in np.flatnonzero(np.diag(r)[:k] < 0):
        r[i, :] = -r[i, :]
        if q is not None:
            q[:, i] = -q[:, i]
    return r, q


@dataclass
class FactorizationResult:
    r: np.ndarray
    q: np.ndarray = None
    counts: object = None
    q_counts: object = None
    elapsed: float = 0.0

    def metrics(self, a):
        if self.q is None:
            raise ValueError("Q was not accumulated")
        return metrics(a, self.q, self.r)
