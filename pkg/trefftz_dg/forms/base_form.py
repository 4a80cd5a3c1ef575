from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..discretization.basis import ElementBasis, dof_offsets, element_bases
from ..discretization.diffop import DiffOp
from ..discretization.quadrature import QuadratureRule, facet_quadrature_for, quadrature_for
from ..geometry.mesh import Mesh
from ..linalg import sparse
from ..linalg.sparse import BlockSparseMatrix
from ..utils.logger import get_logger
from ..utils.parallel import ordered_map

logger = get_logger(__name__)

SIP_LAPLACE = "sip_laplace"
HELMHOLTZ = "helmholtz"
ADVECTION = "advection"

DEFAULT_PARAMETERS = {
    SIP_LAPLACE: {"alpha": 4.0},
    HELMHOLTZ: {"alpha": 0.5, "beta": 0.5, "delta": 0.5},
    ADVECTION: {},
}


@dataclass
class DGProblem:
    """
    A boundary value problem together with the parameters of its DG scheme.

    Data callables take an (nq, dim) array of points and return (nq,) values (the
    velocity `b` returns (nq, dim)). `g` is the Dirichlet datum for SIP and the
    impedance datum du/dn + i omega u for Helmholtz; `u_D` is the inflow datum for
    advection.
    """
    kind: str
    operator: DiffOp
    alpha: Optional[float] = None
    beta: Optional[float] = None
    delta: Optional[float] = None
    omega: Optional[float] = None
    g: Optional[Callable] = None
    u_D: Optional[Callable] = None
    f: Optional[Callable] = None
    b: Optional[Callable] = None
    field: str = "real"
    exact: Optional[Callable] = None
    exact_grad: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in DEFAULT_PARAMETERS:
            raise ValueError(f"Unknown problem kind '{self.kind}'")
        for name, value in DEFAULT_PARAMETERS[self.kind].items():
            if getattr(self, name) is None:
                setattr(self, name, value)
        expected = "complex" if self.kind == HELMHOLTZ else "real"
        if self.field != expected:
            raise ValueError(f"{self.kind} problems live over the {expected} field, got '{self.field}'")
        if self.kind == SIP_LAPLACE and not self.alpha > 0:
            raise ValueError(f"SIP penalty alpha must be > 0, got {self.alpha}")
        if self.kind == HELMHOLTZ and not (self.omega and self.omega > 0):
            raise ValueError(f"Helmholtz needs omega > 0, got {self.omega}")
        if self.kind == ADVECTION and self.b is None:
            raise ValueError("Advection needs a velocity field b")

    @property
    def dtype(self):
        return complex if self.field == "complex" else float

    @property
    def symmetry_hint(self) -> str:
        return sparse.SPD if self.kind == SIP_LAPLACE else sparse.GENERAL


@dataclass
class AssembledSystem:
    A: BlockSparseMatrix
    l: np.ndarray
    offsets: np.ndarray   # element k owns dofs offsets[k]:offsets[k+1]
    bases: list
    problem: DGProblem
    p: int

    @property
    def N(self) -> int:
        return int(self.offsets[-1])

    def dof_range(self, element_id: int) -> slice:
        return slice(int(self.offsets[element_id]), int(self.offsets[element_id + 1]))


@dataclass(frozen=True, eq=False)
class Trace:
    """Basis data of one side of a facet at the facet quadrature points."""
    element_id: int
    values: np.ndarray      # (N, nq)
    gradients: np.ndarray   # (dim, N, nq)
    normal_derivatives: np.ndarray  # (N, nq), along the facet normal


@dataclass(frozen=True, eq=False)
class FacetData:
    facet_id: int
    rule: QuadratureRule
    normal: np.ndarray
    h: float                        # mean diameter of the adjacent elements
    plus: Trace
    minus: Optional[Trace] = field(default=None)


def _trace(basis: ElementBasis, points: np.ndarray, normal: np.ndarray) -> Trace:
    gradients = basis.gradients(points)
    return Trace(
        element_id=basis.element_id,
        values=basis.evaluate(points),
        gradients=gradients,
        normal_derivatives=np.tensordot(normal, gradients, axes=1),
    )


def weighted(left: np.ndarray, weights: np.ndarray, right: np.ndarray) -> np.ndarray:
    """sum_q left[i, q] w[q] right[j, q] -> (i, j) block."""
    return (left * weights) @ right.T


class DGForm(ABC):
    """
    Template for DG assembly: volume terms per element, then facet terms per facet,
    accumulated into a BlockSparseMatrix in element-id then facet-id order.

    Every interior facet inserts all four coupling blocks, so the block pattern is
    the element+neighbour pattern regardless of coefficient values.
    """
    kind = None

    def assemble(self, mesh: Mesh, p: int, problem: DGProblem, quad_degree: Optional[int] = None,
                 threads: int = 1) -> AssembledSystem:
        if problem.kind != self.kind:
            raise ValueError(f"{self.__class__.__name__} assembles '{self.kind}' problems, got '{problem.kind}'")
        if p < 0:
            raise ValueError(f"Polynomial degree must be >= 0, got {p}")
        degree = quad_degree if quad_degree is not None else 2 * p + 2
        bases = element_bases(mesh, p)
        offsets = dof_offsets(bases)
        sizes = [b.size for b in bases]
        A = BlockSparseMatrix(sizes, sizes, dtype=problem.dtype)
        l = np.zeros(int(offsets[-1]), dtype=problem.dtype)

        def element_work(k):
            rule = quadrature_for(mesh, k, degree)
            return self.volume_terms(bases[k], rule, problem, p)

        def facet_work(facet_id):
            return self.facet_terms(self._facet_data(mesh, facet_id, bases, degree), problem, p)

        for k, (block, load) in enumerate(ordered_map(element_work, range(mesh.n_elements), threads)):
            A.add_block(k, k, block)
            if load is not None:
                l[offsets[k]:offsets[k + 1]] += load

        for blocks, loads in ordered_map(facet_work, range(mesh.n_facets), threads):
            for (i, j), block in blocks.items():
                A.add_block(i, j, block)
            for k, load in loads.items():
                l[offsets[k]:offsets[k + 1]] += load

        logger.info(f"Assembled {self.kind} system: p={p}, {mesh.n_elements} elements, N={int(offsets[-1])}, {len(A.blocks)} blocks")
        return AssembledSystem(A=A, l=l, offsets=offsets, bases=bases, problem=problem, p=p)

    @staticmethod
    def _facet_data(mesh: Mesh, facet_id: int, bases: list, degree: int) -> FacetData:
        facet = mesh.facets[facet_id]
        rule = facet_quadrature_for(mesh, facet_id, degree)
        normal = facet.unit_normal
        ids = facet.adjacent_element_ids
        plus = _trace(bases[ids[0]], rule.points, normal)
        minus = _trace(bases[ids[1]], rule.points, normal) if len(ids) == 2 else None
        h = float(np.mean([mesh.diameters[k] for k in ids]))
        return FacetData(facet_id=facet_id, rule=rule, normal=normal, h=h, plus=plus, minus=minus)

    def facet_terms(self, data: FacetData, problem: DGProblem, p: int):
        """Returns ({(row element, col element): block}, {element: load})."""
        if data.minus is None:
            block, load = self.boundary_terms(data, problem, p)
            k = data.plus.element_id
            return {(k, k): block}, ({k: load} if load is not None else {})
        sides = {"+": data.plus, "-": data.minus}
        blocks = {}
        for s, test in sides.items():
            for t, trial in sides.items():
                key = (test.element_id, trial.element_id)
                blocks[key] = self.interior_block(data, test, s, trial, t, problem, p)
        return blocks, {}

    @abstractmethod
    def volume_terms(self, basis: ElementBasis, rule: QuadratureRule, problem: DGProblem, p: int):
        """Returns (element block, element load or None)."""

    @abstractmethod
    def interior_block(self, data: FacetData, test: Trace, test_side: str, trial: Trace, trial_side: str,
                       problem: DGProblem, p: int) -> np.ndarray:
        """Coupling of trial functions on `trial_side` with test functions on `test_side`."""

    @abstractmethod
    def boundary_terms(self, data: FacetData, problem: DGProblem, p: int):
        """Returns (block, load or None) of a boundary facet."""


def side_sign(side: str) -> float:
    """Sign of a trace inside a jump: jump(v) = (v+ - v-) n."""
    return 1.0 if side == "+" else -1.0


def sample(function: Optional[Callable], points: np.ndarray, dtype=float) -> np.ndarray:
    if function is None:
        return np.zeros(len(points), dtype=dtype)
    return np.asarray(function(points), dtype=dtype)


def solve_system(system: AssembledSystem, **solver_options) -> sparse.SolveResult:
    """Solves the full DG system A u = l."""
    matrix = sparse.to_csr(system.A)
    return sparse.solve(matrix, system.l, symmetry_hint=system.problem.symmetry_hint, **solver_options)
