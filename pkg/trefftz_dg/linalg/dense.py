"""
Dense element-level linear algebra: SVD, QR, LU, numerical kernels and pseudoinverses.

Matrices are plain numpy arrays (real or complex). Numerical rank decisions use a
truncation parameter eps; with `scaled=True` singular values are compared against
eps * max(1, sigma_max), i.e. after scaling the matrix so that sigma_max <= 1.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from ..utils.errors import DecompositionError
from ..utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_EPS = 1e-7
KERNEL_METHODS = ("svd", "qr")


@dataclass(frozen=True, eq=False)
class KernelResult:
    kernel_basis: np.ndarray           # (N, M) with orthonormal columns
    singular_values: np.ndarray        # descending, in the units compared against eps
    dimension: int                     # M_K
    max_zero_sv: Optional[float]
    min_nonzero_sv: Optional[float]
    method: str = "svd"
    scale: float = 1.0

    @property
    def gap(self) -> Optional[float]:
        """Ratio min_nonzero_sv / max_zero_sv, None when one side is empty."""
        if self.max_zero_sv is None or self.min_nonzero_sv is None:
            return None
        if self.max_zero_sv == 0.0:
            return float("inf")
        return self.min_nonzero_sv / self.max_zero_sv


def as_dense(matrix) -> np.ndarray:
    """Validates a dense matrix: 2D and finite."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValueError(f"Expected a 2D matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("Matrix has NaN or Inf entries")
    return matrix


def _check_eps(eps: float):
    if not eps > 0:
        raise ValueError(f"Truncation parameter eps must be > 0, got {eps}")


def equilibration(matrix: np.ndarray):
    """Row and column scalings (1/2-norms, 1 for zero rows/columns)."""
    rows = np.linalg.norm(matrix, axis=1)
    cols = np.linalg.norm(matrix, axis=0)
    rows = np.where(rows > 0.0, 1.0 / np.where(rows > 0.0, rows, 1.0), 1.0)
    cols = np.where(cols > 0.0, 1.0 / np.where(cols > 0.0, cols, 1.0), 1.0)
    return rows, cols


def svd(matrix):
    """
    Full SVD M = U diag(s) V^H.

    Returns:
        (U, s, V) with s descending and V holding the right singular vectors as columns.

    Raises:
        DecompositionError: if LAPACK does not converge.
    """
    matrix = as_dense(matrix)
    try:
        u, s, vh = scipy.linalg.svd(matrix, full_matrices=True, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        logger.warning("gesdd did not converge, retrying with gesvd")
        try:
            u, s, vh = scipy.linalg.svd(matrix, full_matrices=True, lapack_driver="gesvd")
        except np.linalg.LinAlgError as e:
            raise DecompositionError(f"SVD did not converge for a {matrix.shape} matrix: {e}") from e
    return u, s, vh.conj().T


def qr(matrix, pivoting: bool = False):
    """
    Full QR factorization M = Q R (M P = Q R with pivoting).

    Returns:
        (Q, R) or (Q, R, P) when pivoting; P is the column permutation as index array.
    """
    matrix = as_dense(matrix)
    try:
        return scipy.linalg.qr(matrix, mode="full", pivoting=pivoting)
    except np.linalg.LinAlgError as e:
        raise DecompositionError(f"QR failed for a {matrix.shape} matrix: {e}") from e


def _threshold(values: np.ndarray, eps: float, scaled: bool) -> tuple:
    top = float(values[0]) if len(values) else 0.0
    scale = max(1.0, top) if scaled else 1.0
    return eps * scale, scale


def kernel(matrix, eps: float = DEFAULT_EPS, method: str = "svd", scaled: bool = True,
           equilibrate: bool = False) -> KernelResult:
    """
    Numerical kernel of a matrix.

    Singular values (svd) or |R_ii| of the pivoted QR of M^H (qr) below the threshold
    are classified as zeros; their count is the kernel dimension and the matching
    columns of V (resp. Q) span the kernel. With `equilibrate=True` the decision is
    made on diag(r) M diag(c) and the kernel is mapped back through diag(c) and
    re-orthonormalized.

    Raises:
        ValueError: for eps <= 0 or an unknown method.
    """
    _check_eps(eps)
    if method not in KERNEL_METHODS:
        raise ValueError(f"Unknown kernel method '{method}', expected one of {KERNEL_METHODS}")
    matrix = as_dense(matrix)
    n_rows, n_cols = matrix.shape
    rows = cols = None
    work = matrix
    if equilibrate:
        rows, cols = equilibration(matrix)
        work = rows[:, None] * matrix * cols[None, :]

    if method == "svd":
        _, s, v = svd(work)
        threshold, scale = _threshold(s, eps, scaled)
        rank = int(np.count_nonzero(s >= threshold))
        basis = v[:, rank:]
        diag = s
    else:
        q, r, _ = qr(work.conj().T, pivoting=True)
        diag = np.abs(np.diag(r)) if r.size else np.zeros(0)
        threshold, scale = _threshold(diag, eps, scaled)
        # pivoting keeps |R_ii| non-increasing, so zeros cluster last
        rank = int(np.count_nonzero(diag >= threshold))
        basis = q[:, rank:]

    if equilibrate and basis.shape[1] > 0:
        basis, _ = scipy.linalg.qr(cols[:, None] * basis, mode="economic")

    zeros = diag[diag < threshold]
    kept = diag[diag >= threshold]
    result = KernelResult(
        kernel_basis=basis,
        singular_values=diag / scale,
        dimension=n_cols - rank,
        max_zero_sv=float(zeros.max() / scale) if len(zeros) else None,
        min_nonzero_sv=float(kept.min() / scale) if len(kept) else None,
        method=method,
        scale=scale,
    )
    if result.gap is not None and result.gap < 1e3:
        logger.warning(f"Weak singular value gap {result.gap:.2e} for a {n_rows}x{n_cols} matrix (eps={eps}); kernel dimension {result.dimension} may be misclassified")
    return result


def pseudo_apply(matrix, rhs, eps: float = DEFAULT_EPS, scaled: bool = True,
                 equilibrate: bool = False) -> np.ndarray:
    """
    x = M^+ rhs through a truncated SVD (same eps rule as `kernel`).

    For rhs outside the range of M this is the least-squares solution; the residual is
    logged. With `equilibrate=True` the truncated pseudoinverse of diag(r) M diag(c) is
    applied to diag(r) rhs and scaled back, which still solves M x = rhs whenever rhs
    lies in the range of M. `rhs` may be a vector or a matrix of right-hand sides.
    """
    _check_eps(eps)
    matrix = as_dense(matrix)
    rhs = np.asarray(rhs)
    if rhs.shape[0] != matrix.shape[0]:
        raise ValueError(f"Right-hand side of length {rhs.shape[0]} for a matrix with {matrix.shape[0]} rows")
    if matrix.size == 0:
        return np.zeros((matrix.shape[1],) + rhs.shape[1:], dtype=np.result_type(matrix, rhs))
    rows = np.ones(matrix.shape[0])
    cols = np.ones(matrix.shape[1])
    if equilibrate:
        rows, cols = equilibration(matrix)
    work = rows[:, None] * matrix * cols[None, :]
    try:
        u, s, vh = scipy.linalg.svd(work, full_matrices=False)
    except np.linalg.LinAlgError as e:
        raise DecompositionError(f"SVD did not converge for a {matrix.shape} matrix: {e}") from e
    threshold, _ = _threshold(s, eps, scaled)
    inverse = np.where(s >= threshold, 1.0 / np.where(s > 0.0, s, 1.0), 0.0)
    scaled_rhs = rows.reshape((-1,) + (1,) * (rhs.ndim - 1)) * rhs
    coeffs = u.conj().T @ scaled_rhs
    coeffs = inverse.reshape((-1,) + (1,) * (rhs.ndim - 1)) * coeffs
    x = cols.reshape((-1,) + (1,) * (rhs.ndim - 1)) * (vh.conj().T @ coeffs)
    residual = np.linalg.norm(matrix @ x - rhs)
    logger.debug(f"pseudo_apply: |Mx - rhs| = {residual:.3e} (|rhs| = {np.linalg.norm(rhs):.3e})")
    return x


def lu_factor(matrix):
    """
    Partial-pivoted LU factors of a square matrix.

    Raises:
        ValueError: for non-square input.
        np.linalg.LinAlgError: for an exactly singular matrix.
    """
    matrix = as_dense(matrix)
    if matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"LU needs a square matrix, got {matrix.shape}")
    lu, piv = scipy.linalg.lu_factor(matrix, check_finite=False)
    if np.any(np.diag(lu) == 0.0):
        raise np.linalg.LinAlgError("Matrix is exactly singular")
    return lu, piv


def lu_solve(matrix, rhs, factors=None) -> np.ndarray:
    """Solves M x = rhs by partial-pivoted LU; `factors` reuses an earlier `lu_factor`."""
    rhs = np.asarray(rhs)
    if factors is None:
        if np.asarray(matrix).shape == (0, 0):
            return np.zeros(rhs.shape, dtype=np.result_type(np.asarray(matrix), rhs))
        factors = lu_factor(matrix)
    return scipy.linalg.lu_solve(factors, rhs, check_finite=False)


def cond2(matrix) -> float:
    """Spectral condition number sigma_max / sigma_min (inf if sigma_min < 1e-300)."""
    matrix = as_dense(matrix)
    if matrix.size == 0 or not np.any(matrix):
        raise ValueError("cond2 of a zero or empty matrix is undefined")
    s = scipy.linalg.svdvals(matrix)
    if s[-1] < 1e-300:
        return float("inf")
    return float(s[0] / s[-1])
