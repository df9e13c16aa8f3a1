"""QR factorization by Givens rotations, their fused column variants, and Householder baselines."""

from .algorithms import ALGORITHMS, factorize
from .counting import OpCounter, audit, cgr_count_formula, gr_count_formula
from .errors import (
    ContractError, GridConfigError, MatrixParseError, UnsupportedShapeError, WorkerError,
)
from .ggr import cgr_factorize, ggr_blocked_factorize, ggr_factorize
from .householder import (
    hqr2_factorize, hqrf_blocked_factorize, mht_blocked_factorize, mht_factorize,
)
from .matcore import DenseMatrix, FactorizationResult, Metrics, matmul, metrics, random_matrix
from .rotations import gr_factorize
from .tilepar import cost_model_run, parallel_ggr, partition

__all__ = [
    "ALGORITHMS", "factorize", "OpCounter", "audit", "cgr_count_formula", "gr_count_formula",
    "ContractError", "GridConfigError", "MatrixParseError", "UnsupportedShapeError",
    "WorkerError", "cgr_factorize", "ggr_blocked_factorize", "ggr_factorize",
    "hqr2_factorize", "hqrf_blocked_factorize", "mht_blocked_factorize", "mht_factorize",
    "DenseMatrix", "FactorizationResult", "Metrics", "matmul", "metrics", "random_matrix",
    "gr_factorize", "cost_model_run", "parallel_ggr", "partition",
]
