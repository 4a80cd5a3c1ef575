"""
Embedded Trefftz DG.

The weak Trefftz space of an operator L is the kernel of the block-diagonal matrix
W with W_K[i, j] = <L phi_j, L~ phi_i>_K. Orthonormal kernel bases T_K form the
embedding T; the DG system is then solved in the reduced space

    T^H A T u_T = T^H (l - A u_f),      u_h = T u_T + u_f,

where u_f = W^+ w, w_K[i] = <f, L~ phi_i>_K, homogenizes a nonzero right-hand side.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from ..discretization.basis import dof_offsets, element_bases
from ..discretization.diffop import DiffOp
from ..discretization.quadrature import quadrature_for
from ..forms.base_form import AssembledSystem, sample
from ..geometry.mesh import Mesh
from ..linalg import dense, sparse
from ..linalg.dense import DEFAULT_EPS, KernelResult
from ..linalg.sparse import BlockSparseMatrix
from ..utils.errors import NotApplicableError
from ..utils.logger import get_logger
from ..utils.parallel import ordered_map

logger = get_logger(__name__)

SURJECTIVITY_TOLERANCE = 1e-6


def _degree(p: int, quad_degree: Optional[int]) -> int:
    return quad_degree if quad_degree is not None else 2 * p + 2


def assemble_W(mesh: Mesh, p: int, L: DiffOp, Lt: DiffOp, quad_degree: Optional[int] = None,
               threads: int = 1) -> BlockSparseMatrix:
    """
    Block-diagonal W with W_K[i, j] = <L phi_j, L~ phi_i>_K (test functions conjugated).

    Args:
        mesh: the mesh
        p: polynomial degree of the DG space
        L: the operator whose (weak) Trefftz space is wanted
        Lt: the test operator, usually `leading_part(L, L.order)`
        quad_degree: element quadrature degree (default 2p+2)
        threads: worker threads for the element loop

    Returns:
        BlockSparseMatrix with one N_K x N_K block per element
    """
    if L.dim != mesh.dim or Lt.dim != mesh.dim:
        raise ValueError(f"Operators of dimension {L.dim}/{Lt.dim} on a {mesh.dim}D mesh")
    degree = _degree(p, quad_degree)
    bases = element_bases(mesh, p)

    def element_block(k):
        rule = quadrature_for(mesh, k, degree)
        trial = L.apply(bases[k], rule.points)
        test = Lt.apply(bases[k], rule.points)
        return (test.conj() * rule.weights) @ trial.T

    blocks = ordered_map(element_block, range(mesh.n_elements), threads)
    dtype = np.result_type(*blocks) if blocks else float
    return sparse.block_diagonal(blocks, dtype=dtype)


@dataclass(frozen=True, eq=False)
class TrefftzEmbedding:
    blocks: list                   # T_K, N_K x M_K with orthonormal columns
    kernel_dims: list              # M_K
    T: BlockSparseMatrix
    diagnostics: list              # KernelResult per element
    u_f: Optional[np.ndarray] = None
    operator: Optional[DiffOp] = field(default=None, repr=False)
    test_operator: Optional[DiffOp] = field(default=None, repr=False)

    @property
    def M(self) -> int:
        return int(sum(self.kernel_dims))

    @property
    def N(self) -> int:
        return int(sum(block.shape[0] for block in self.blocks))

    @property
    def reduced_offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.kernel_dims)]).astype(int)


def build_embedding(W: BlockSparseMatrix, eps: float = DEFAULT_EPS, method: str = "svd", scaled: bool = True,
                    equilibrate: bool = True, threads: int = 1) -> TrefftzEmbedding:
    """
    Extracts the numerical kernel of every diagonal block of W.

    The kernel dimension M_K is decided from the singular values alone; nothing about
    the expected dimension is passed in.
    """
    if not W.is_block_diagonal():
        raise ValueError("W must be block diagonal")

    def element_kernel(k) -> KernelResult:
        block = W.block(k, k)
        if block is None:
            block = np.zeros((W.row_sizes[k], W.col_sizes[k]))
        return dense.kernel(block, eps=eps, method=method, scaled=scaled, equilibrate=equilibrate)

    diagnostics = ordered_map(element_kernel, range(W.n_block_rows), threads)
    blocks = [result.kernel_basis for result in diagnostics]
    dims = [result.dimension for result in diagnostics]
    T = sparse.block_diagonal(blocks, dtype=np.result_type(*blocks) if blocks else float)
    logger.info(f"Trefftz embedding: N={T.shape[0]} -> M={T.shape[1]} ({method}, eps={eps:g})")
    if len(set(dims)) > 1:
        logger.debug(f"Kernel dimensions differ between elements: {sorted(set(dims))}")
    return TrefftzEmbedding(blocks=blocks, kernel_dims=dims, T=T, diagnostics=diagnostics)


def _element_load(f: Callable, Lt: DiffOp, basis, rule) -> np.ndarray:
    values = sample(f, rule.points, dtype=complex)
    if not np.any(values.imag):
        values = values.real
    return Lt.apply(basis, rule.points).conj() @ (rule.weights * values)


def particular_solution(W: BlockSparseMatrix, f: Optional[Callable], Lt: DiffOp, mesh: Mesh, p: int,
                        eps: float = DEFAULT_EPS, scaled: bool = True, equilibrate: bool = True,
                        quad_degree: Optional[int] = None, threads: int = 1) -> np.ndarray:
    """
    Element-local particular solution (u_f)_K = W_K^+ w_K with w_K[i] = <f, L~ phi_i>_K.

    A least-squares residual above 1e-6 |w_K| means the projected operator is not
    surjective on that element; it is logged as a warning.

    Returns:
        u_f in the DG dof numbering (zeros for f = None)
    """
    bases = element_bases(mesh, p)
    offsets = dof_offsets(bases)
    if f is None:
        return np.zeros(int(offsets[-1]))
    degree = _degree(p, quad_degree)

    def element_solution(k):
        rule = quadrature_for(mesh, k, degree)
        w = _element_load(f, Lt, bases[k], rule)
        block = W.block(k, k)
        x = dense.pseudo_apply(block, w, eps=eps, scaled=scaled, equilibrate=equilibrate)
        residual = np.linalg.norm(block @ x - w)
        if residual > SURJECTIVITY_TOLERANCE * np.linalg.norm(w):
            logger.warning(f"Element {k}: particular solution residual {residual:.2e} exceeds "
                           f"{SURJECTIVITY_TOLERANCE:g}*|w_K| = {SURJECTIVITY_TOLERANCE * np.linalg.norm(w):.2e}")
        return x

    parts = ordered_map(element_solution, range(mesh.n_elements), threads)
    return np.concatenate(parts) if parts else np.zeros(0)


def particular_residual(u_f: np.ndarray, f: Optional[Callable], L: DiffOp, Lt: DiffOp, mesh: Mesh, p: int,
                        quad_degree: Optional[int] = None) -> np.ndarray:
    """
    Per element max_i |<L u_f - f, L~ phi_i>_K| / max(1, |w_K|).
    """
    bases = element_bases(mesh, p)
    offsets = dof_offsets(bases)
    degree = _degree(p, quad_degree)
    residuals = np.zeros(mesh.n_elements)
    for k, basis in enumerate(bases):
        rule = quadrature_for(mesh, k, degree)
        test = Lt.apply(basis, rule.points).conj()
        Lu = L.apply_to_coefficients(basis, u_f[offsets[k]:offsets[k + 1]], rule.points)
        w = _element_load(f, Lt, basis, rule) if f is not None else np.zeros(basis.size)
        r = test @ (rule.weights * Lu) - w
        residuals[k] = np.max(np.abs(r), initial=0.0) / max(1.0, float(np.linalg.norm(w)))
    return residuals


def trefftz_embedding(mesh: Mesh, p: int, L: DiffOp, Lt: DiffOp, f: Optional[Callable] = None,
                      eps: float = DEFAULT_EPS, method: str = "svd", scaled: bool = True,
                      equilibrate: bool = True, quad_degree: Optional[int] = None,
                      threads: int = 1) -> TrefftzEmbedding:
    """assemble_W, build_embedding and (for f given) particular_solution in one call."""
    W = assemble_W(mesh, p, L, Lt, quad_degree=quad_degree, threads=threads)
    embedding = build_embedding(W, eps=eps, method=method, scaled=scaled, equilibrate=equilibrate, threads=threads)
    u_f = None
    if f is not None:
        u_f = particular_solution(W, f, Lt, mesh, p, eps=eps, scaled=scaled, equilibrate=equilibrate,
                                  quad_degree=quad_degree, threads=threads)
    return replace(embedding, u_f=u_f, operator=L, test_operator=Lt)


@dataclass(frozen=True)
class EmbeddedReport:
    M: int
    N: int
    nnz_full: int
    nnz_reduced: int
    residual: float
    method: str
    iterations: int = 0
    reduced: Optional[BlockSparseMatrix] = field(default=None, repr=False, compare=False)


def reduce_system(system: AssembledSystem, emb: TrefftzEmbedding):
    """(T^H A T, T^H (l - A u_f)) as a block matrix and a vector."""
    if emb.N != system.N:
        raise ValueError(f"Embedding with N={emb.N} does not match a system with N={system.N}")
    reduced = sparse.triple_product(emb.T, system.A)
    rhs = system.l
    if emb.u_f is not None:
        rhs = rhs - system.A.matvec(emb.u_f)
    return reduced, sparse.apply_transpose(emb.T, rhs)


def solve_embedded(system: AssembledSystem, emb: TrefftzEmbedding, **solver_options):
    """
    Solves the DG problem in the embedded Trefftz space.

    Returns:
        (u_h, u_T, EmbeddedReport) with u_h = T u_T + u_f in the DG dof numbering;
        the report carries the reduced matrix T^H A T

    Raises:
        SolverError: if the reduced solve fails
    """
    reduced, rhs = reduce_system(system, emb)
    result = sparse.solve(sparse.to_csr(reduced), rhs, symmetry_hint=system.problem.symmetry_hint, **solver_options)
    u_T = result.x
    u_h = sparse.apply(emb.T, u_T)
    if emb.u_f is not None:
        u_h = u_h + emb.u_f
    report = EmbeddedReport(
        M=emb.M,
        N=emb.N,
        nnz_full=system.A.structural_nnz(),
        nnz_reduced=reduced.structural_nnz(),
        residual=result.residual,
        method=result.method,
        iterations=result.iterations,
        reduced=reduced,
    )
    logger.info(f"Embedded solve: M={report.M} of N={report.N}, nnz {report.nnz_reduced} of {report.nnz_full}, "
                f"residual {report.residual:.2e} ({report.method})")
    return u_h, u_T, report


def _is_strong(L: DiffOp, Lt: Optional[DiffOp]) -> bool:
    if Lt is None or Lt is L:
        return True
    if not Lt.has_constant_coefficients or len(L.terms) != len(Lt.terms):
        return False
    ratios = set()
    target = {term.multi_index: term.coefficient for term in Lt.terms}
    for term in L.terms:
        other = target.get(term.multi_index)
        if other is None or (other == 0) != (term.coefficient == 0):
            return False
        if other != 0:
            ratios.add(round(term.coefficient / other, 12))
    return len(ratios) <= 1


def trefftz_residual(emb: TrefftzEmbedding, L: DiffOp, mesh: Mesh, p: int,
                     quad_degree: Optional[int] = None) -> np.ndarray:
    """
    Per element max over kernel columns and quadrature points of |L(T_K[:, c] . phi)|,
    each column normalized by |T_K[:, c]| sum_terms |a_term| h_K^-|term|, the size of L applied
    to a scaled monomial combination with those coefficients.

    Raises:
        NotApplicableError: if L has variable coefficients or the embedding was built
            with a test operator other than L (weak Trefftz space)
    """
    if not L.has_constant_coefficients or not _is_strong(L, emb.test_operator):
        raise NotApplicableError(f"Operator {L.name!r} with test operator "
                                 f"{getattr(emb.test_operator, 'name', None)!r} only defines a weak Trefftz space")
    bases = element_bases(mesh, p)
    degree = _degree(p, quad_degree)
    residuals = np.zeros(mesh.n_elements)
    for k, basis in enumerate(bases):
        block = emb.blocks[k]
        if block.shape[1] == 0:
            continue
        points = quadrature_for(mesh, k, degree).points
        values = block.T @ L.apply(basis, points)           # (M_K, nq)
        size = sum(abs(term.coefficient) / basis.scale ** term.order for term in L.terms)
        column_scale = np.maximum(size * np.linalg.norm(block, axis=0),
                                  np.finfo(float).tiny)
        residuals[k] = float(np.max(np.max(np.abs(values), axis=1) / column_scale))
    return residuals
