"""
Block-sparse global matrices, the block-diagonal Trefftz embedding and sparse solvers.

Global matrices are assembled as `BlockSparseMatrix` (one dense block per element pair)
and converted to `scipy.sparse.csr_matrix` for solving. Block keys are kept in
insertion order and converted in sorted order, so conversions are deterministic.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from . import dense
from ..utils.errors import SolverError
from ..utils.logger import get_logger

logger = get_logger(__name__)

SPD = "spd"
GENERAL = "general"
DROP_TOLERANCE = 1e-300
DIRECT = "direct"
ITERATIVE = "iterative"
SOLVER_STRATEGIES = (DIRECT, ITERATIVE)


class BlockSparseMatrix:
    """
    Sparse matrix stored as dense blocks on a block-row/block-column partition.

    Adding a block twice accumulates it.
    """

    def __init__(self, row_sizes, col_sizes, dtype=float):
        self.row_sizes = np.asarray(row_sizes, dtype=int)
        self.col_sizes = np.asarray(col_sizes, dtype=int)
        self.row_offsets = np.concatenate([[0], np.cumsum(self.row_sizes)]).astype(int)
        self.col_offsets = np.concatenate([[0], np.cumsum(self.col_sizes)]).astype(int)
        self.dtype = np.dtype(dtype)
        self.blocks = {}

    @property
    def shape(self) -> tuple:
        return int(self.row_offsets[-1]), int(self.col_offsets[-1])

    @property
    def n_block_rows(self) -> int:
        return len(self.row_sizes)

    @property
    def n_block_cols(self) -> int:
        return len(self.col_sizes)

    def add_block(self, i: int, j: int, block):
        block = np.asarray(block)
        expected = (self.row_sizes[i], self.col_sizes[j])
        if block.shape != expected:
            raise ValueError(f"Block ({i},{j}) has shape {block.shape}, partition expects {expected}")
        if np.iscomplexobj(block) and not np.issubdtype(self.dtype, np.complexfloating):
            self.dtype = np.result_type(self.dtype, block.dtype)
            self.blocks = {key: value.astype(self.dtype) for key, value in self.blocks.items()}
        if (i, j) in self.blocks:
            self.blocks[(i, j)] = self.blocks[(i, j)] + block
        else:
            self.blocks[(i, j)] = np.array(block, dtype=self.dtype)

    def block(self, i: int, j: int) -> Optional[np.ndarray]:
        return self.blocks.get((i, j))

    def block_keys(self) -> list:
        return sorted(self.blocks)

    def structural_nnz(self) -> int:
        """Entries covered by stored blocks (the nzes cost measure)."""
        return int(sum(self.row_sizes[i] * self.col_sizes[j] for i, j in self.blocks))

    def is_block_diagonal(self) -> bool:
        return all(i == j for i, j in self.blocks)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[0] != self.shape[1]:
            raise ValueError(f"Vector of length {x.shape[0]} for a matrix of shape {self.shape}")
        y = np.zeros(self.shape[0], dtype=np.result_type(self.dtype, x))
        for (i, j) in self.block_keys():
            block = self.blocks[(i, j)]
            y[self.row_offsets[i]:self.row_offsets[i + 1]] += block @ x[self.col_offsets[j]:self.col_offsets[j + 1]]
        return y

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=self.dtype)
        for (i, j) in self.block_keys():
            out[self.row_offsets[i]:self.row_offsets[i + 1], self.col_offsets[j]:self.col_offsets[j + 1]] += self.blocks[(i, j)]
        return out

    def __repr__(self):
        return f"BlockSparseMatrix(shape={self.shape}, blocks={len(self.blocks)}, dtype={self.dtype})"


def block_diagonal(blocks, dtype=float) -> BlockSparseMatrix:
    """Block-diagonal matrix from a list of (N_K x M_K) blocks."""
    matrix = BlockSparseMatrix([b.shape[0] for b in blocks], [b.shape[1] for b in blocks], dtype=dtype)
    for k, b in enumerate(blocks):
        matrix.add_block(k, k, b)
    return matrix


def to_csr(matrix: BlockSparseMatrix) -> scipy.sparse.csr_matrix:
    """Exact entrywise conversion; only entries with |a| < 1e-300 are dropped."""
    rows, cols, values = [], [], []
    for (i, j) in matrix.block_keys():
        block = matrix.blocks[(i, j)]
        if block.size == 0:
            continue
        r, c = np.nonzero(np.abs(block) >= DROP_TOLERANCE)
        rows.append(r + matrix.row_offsets[i])
        cols.append(c + matrix.col_offsets[j])
        values.append(block[r, c])
    if rows:
        rows, cols, values = np.concatenate(rows), np.concatenate(cols), np.concatenate(values)
    else:
        rows = cols = np.zeros(0, dtype=int)
        values = np.zeros(0, dtype=matrix.dtype)
    csr = scipy.sparse.coo_matrix((values, (rows, cols)), shape=matrix.shape, dtype=matrix.dtype).tocsr()
    csr.sum_duplicates()
    csr.sort_indices()
    return csr


def _check_embedding(embedding: BlockSparseMatrix):
    if not embedding.is_block_diagonal():
        raise ValueError("The embedding matrix must be block diagonal")


def triple_product(embedding: BlockSparseMatrix, matrix: BlockSparseMatrix) -> BlockSparseMatrix:
    """
    T^H A T computed block by block: (K, K') -> T_K^H A_{K,K'} T_{K'}.

    The result has the block sparsity pattern of A.
    """
    _check_embedding(embedding)
    if not (np.array_equal(embedding.row_sizes, matrix.row_sizes) and np.array_equal(embedding.row_sizes, matrix.col_sizes)):
        raise ValueError("Embedding partition does not match the system matrix partition")
    dtype = np.result_type(embedding.dtype, matrix.dtype)
    reduced = BlockSparseMatrix(embedding.col_sizes, embedding.col_sizes, dtype=dtype)
    for (i, j) in matrix.block_keys():
        t_i = embedding.blocks[(i, i)]
        t_j = embedding.blocks[(j, j)]
        reduced.add_block(i, j, t_i.conj().T @ matrix.blocks[(i, j)] @ t_j)
    return reduced


def apply(embedding: BlockSparseMatrix, v: np.ndarray) -> np.ndarray:
    """T v, mapping reduced coefficients to DG coefficients."""
    _check_embedding(embedding)
    return embedding.matvec(v)


def apply_transpose(embedding: BlockSparseMatrix, v: np.ndarray) -> np.ndarray:
    """T^H v, restricting DG vectors to the reduced space."""
    _check_embedding(embedding)
    v = np.asarray(v)
    if v.shape[0] != embedding.shape[0]:
        raise ValueError(f"Vector of length {v.shape[0]} for an embedding with {embedding.shape[0]} rows")
    w = np.zeros(embedding.shape[1], dtype=np.result_type(embedding.dtype, v))
    for k in range(embedding.n_block_rows):
        block = embedding.blocks[(k, k)]
        w[embedding.col_offsets[k]:embedding.col_offsets[k + 1]] = block.conj().T @ v[embedding.row_offsets[k]:embedding.row_offsets[k + 1]]
    return w


@dataclass(frozen=True)
class SolveResult:
    x: np.ndarray
    residual: float     # relative residual |Mx - b| / |b|
    method: str
    iterations: int = 0


def _relative_residual(matrix, x, rhs) -> float:
    norm = np.linalg.norm(rhs)
    r = np.linalg.norm(matrix @ x - rhs)
    return float(r / norm) if norm > 0 else float(r)


def _dense_solve(matrix, rhs) -> np.ndarray:
    dense_matrix = matrix.toarray()
    try:
        factors = dense.lu_factor(dense_matrix)
    except np.linalg.LinAlgError as e:
        raise SolverError(f"Singular system of size {matrix.shape[0]}", method="dense-lu") from e
    x = dense.lu_solve(dense_matrix, rhs, factors)
    # one step of iterative refinement
    return x + dense.lu_solve(dense_matrix, rhs - dense_matrix @ x, factors)


def _direct_solve(matrix, rhs) -> np.ndarray:
    dtype = np.result_type(matrix.dtype, rhs.dtype)
    matrix = matrix.astype(dtype)
    rhs = rhs.astype(dtype)
    try:
        factors = scipy.sparse.linalg.splu(matrix.tocsc())
    except RuntimeError as e:
        raise SolverError(f"Sparse LU failed: {e}", method="sparse-lu") from e
    x = factors.solve(rhs)
    # one step of iterative refinement
    return x + factors.solve(rhs - matrix @ x)


def solve(matrix: scipy.sparse.csr_matrix, rhs: np.ndarray, symmetry_hint: str = GENERAL,
          tol: float = 1e-10, dense_threshold: int = 2000, target: float = 1e-9,
          strategy: str = DIRECT) -> SolveResult:
    """
    Solves M x = rhs.

    Systems up to `dense_threshold` unknowns use dense LU with one refinement step.
    Larger ones use sparse LU with one refinement step (strategy='direct'), or with
    strategy='iterative' CG with a Jacobi preconditioner (symmetry_hint='spd') or
    restarted GMRES with an incomplete-LU preconditioner (general/complex), relative
    tolerance `tol` and at most 20 n iterations. An iterative result missing the
    `target` relative residual is recomputed with sparse LU.

    Raises:
        SolverError: if the system is singular or no method reaches `target`.
    """
    if strategy not in SOLVER_STRATEGIES:
        raise ValueError(f"Unknown solver strategy '{strategy}', expected one of {SOLVER_STRATEGIES}")
    n = matrix.shape[0]
    if matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"solve needs a square matrix, got {matrix.shape}")
    rhs = np.asarray(rhs)
    if rhs.shape[0] != n:
        raise ValueError(f"Right-hand side of length {rhs.shape[0]} for a system of size {n}")
    dtype = np.result_type(matrix.dtype, rhs.dtype)
    if n == 0:
        return SolveResult(np.zeros(0, dtype=dtype), 0.0, "empty")
    if not np.any(rhs):
        return SolveResult(np.zeros(n, dtype=dtype), 0.0, "trivial")

    iterations = 0
    if n <= dense_threshold:
        method = "dense-lu"
        x = _dense_solve(matrix, rhs)
    elif strategy == DIRECT:
        method = "sparse-lu"
        x = _direct_solve(matrix, rhs)
    elif symmetry_hint == SPD:
        method = "cg"
        diagonal = matrix.diagonal()
        if np.any(diagonal <= 0):
            raise SolverError("SPD hint given for a matrix with non-positive diagonal", method=method)
        preconditioner = scipy.sparse.linalg.LinearOperator(matrix.shape, matvec=lambda v: v / diagonal, dtype=dtype)
        counter = _Counter()
        x, info = scipy.sparse.linalg.cg(matrix, rhs, rtol=tol, maxiter=20 * n, M=preconditioner, callback=counter)
        iterations = counter.count
        if info != 0:
            logger.warning(f"CG stopped with info={info} after {iterations} iterations")
    else:
        method = "gmres"
        counter = _Counter()
        try:
            ilu = scipy.sparse.linalg.spilu(matrix.tocsc(), drop_tol=1e-5, fill_factor=20)
            preconditioner = scipy.sparse.linalg.LinearOperator(matrix.shape, matvec=ilu.solve, dtype=dtype)
        except RuntimeError as e:
            logger.warning(f"Incomplete LU failed ({e}); running GMRES unpreconditioned")
            preconditioner = None
        x, info = scipy.sparse.linalg.gmres(matrix, rhs, rtol=tol, restart=100, maxiter=20 * n,
                                            M=preconditioner, callback=counter, callback_type="pr_norm")
        iterations = counter.count
        if info != 0:
            logger.warning(f"GMRES stopped with info={info} after {iterations} iterations")

    residual = _relative_residual(matrix, x, rhs)
    if residual > target and method in ("cg", "gmres"):
        logger.warning(f"{method} reached relative residual {residual:.2e} > {target:.0e}; falling back to sparse LU")
        method = "sparse-lu"
        x = _direct_solve(matrix, rhs)
        residual = _relative_residual(matrix, x, rhs)
    if not np.isfinite(residual) or residual > target:
        raise SolverError(f"Linear solve of size {n} did not reach the target residual {target:.0e}", residual=residual, method=method)
    logger.debug(f"Solved system of size {n} with {method}: relative residual {residual:.2e}, {iterations} iterations")
    return SolveResult(x, residual, method, iterations)


class _Counter:
    def __init__(self):
        self.count = 0

    def __call__(self, *args):
        self.count += 1
