"""Closed-form and block-pattern counts of unknowns and matrix entries."""

from dataclasses import asdict, dataclass

from ..discretization.basis import n_basis
from ..geometry.mesh import Mesh

FIRST_ORDER = "first_order"
SECOND_ORDER = "second_order"


@dataclass(frozen=True)
class DofCounts:
    n_elements: int
    p: int
    ndof_dg: int
    ndof_hdg: int
    ndof_tdg1: int
    ndof_tdg2: int
    nze_dg: int
    nze_hdg: int
    nze_tdg1: int
    nze_tdg2: int

    def reduced(self, operator_class: str) -> tuple:
        """(ndof, nze) of the Trefftz space for a first or second order operator."""
        if operator_class == FIRST_ORDER:
            return self.ndof_tdg1, self.nze_tdg1
        if operator_class == SECOND_ORDER:
            return self.ndof_tdg2, self.nze_tdg2
        raise ValueError(f"Unknown operator class '{operator_class}'")

    def to_dict(self) -> dict:
        return asdict(self)


def trefftz_dim(p: int, operator_class: str) -> int:
    """Per-element Trefftz dimension in 2D: p+1 (first order) or 2p+1 (second order)."""
    if operator_class == FIRST_ORDER:
        return p + 1
    if operator_class == SECOND_ORDER:
        return 2 * p + 1
    raise ValueError(f"Unknown operator class '{operator_class}'")


def block_nnz(mesh: Mesh, sizes) -> int:
    """Entries of the element+neighbour block pattern with per-element block sizes."""
    total = sum(n * n for n in sizes)
    for facet_id in mesh.interior_facet_ids:
        a, b = mesh.facets[facet_id].adjacent_element_ids
        total += 2 * sizes[a] * sizes[b]
    return int(total)


def dof_report(mesh: Mesh, p: int) -> DofCounts:
    """
    Unknowns and structural nonzeros of DG, hybridized DG (after static condensation)
    and the embedded Trefftz spaces of first and second order operators on a 2D mesh.
    """
    if mesh.dim != 2:
        raise ValueError(f"dof_report counts 2D meshes, got dimension {mesh.dim}")
    if p < 0:
        raise ValueError(f"Polynomial degree must be >= 0, got {p}")
    n = mesh.n_elements
    n_dg = n_basis(2, p)
    m1 = trefftz_dim(p, FIRST_ORDER)
    m2 = trefftz_dim(p, SECOND_ORDER)
    # every facet couples to itself and to the other two facets of each neighbour element
    hdg_blocks = mesh.n_facets + 6 * n
    return DofCounts(
        n_elements=n,
        p=p,
        ndof_dg=n * n_dg,
        ndof_hdg=mesh.n_facets * (p + 1),
        ndof_tdg1=n * m1,
        ndof_tdg2=n * m2,
        nze_dg=block_nnz(mesh, [n_dg] * n),
        nze_hdg=(p + 1) ** 2 * hdg_blocks,
        nze_tdg1=block_nnz(mesh, [m1] * n),
        nze_tdg2=block_nnz(mesh, [m2] * n),
    )
