import math
from typing import Iterable, List, Optional

from ..analysis.dofs import dof_report
from ..discretization.diffop import laplace
from ..embedding.trefftz import assemble_W, build_embedding
from ..geometry.mesh import Mesh, rectangle_mesh
from ..linalg.dense import DEFAULT_EPS
from ..storage.csv_storage import CsvStorage
from ..storage.models import DofTableRecord, SingularValueRecord
from ..utils.logger import get_logger

logger = get_logger(__name__)


def mesh_with_elements(n_elements: int) -> Mesh:
    """
    Triangulated nx x ny rectangle with exactly n_elements triangles, nx*ny = n_elements/2
    and ny the largest divisor not above sqrt(n_elements/2).

    Raises:
        ValueError: for an odd or non-positive element count
    """
    if n_elements <= 0 or n_elements % 2:
        raise ValueError(f"A triangulated rectangle has an even, positive element count, got {n_elements}")
    cells = n_elements // 2
    ny = max(d for d in range(1, math.isqrt(cells) + 1) if cells % d == 0)
    return rectangle_mesh(cells // ny, ny)


def run_dof_table(n_elements: int, p_list: Iterable[int],
                  storage: Optional[CsvStorage] = None) -> List[DofTableRecord]:
    """Dof and nze counts of DG, HDG and both Trefftz spaces, one record per degree."""
    mesh = mesh_with_elements(n_elements)
    records = [DofTableRecord.from_counts(dof_report(mesh, p)) for p in p_list]
    logger.info(f"Dof table for {n_elements} elements, p in {[r.p for r in records]}")
    if storage is not None:
        storage.save_records(records)
    return records


def run_sv_diagnostics(mesh: Mesh, p_list: Iterable[int], eps: float = DEFAULT_EPS, method: str = "svd",
                       scaled: bool = True, equilibrate: bool = True, threads: int = 1,
                       storage: Optional[CsvStorage] = None) -> List[SingularValueRecord]:
    """
    Kernel detection margins of -Laplace: per degree the largest singular value classified
    as zero and the smallest kept one, over all elements.
    """
    L = laplace(mesh.dim)
    records = []
    for p in p_list:
        emb = build_embedding(assemble_W(mesh, p, L, L, threads=threads), eps=eps, method=method,
                              scaled=scaled, equilibrate=equilibrate, threads=threads)
        zeros = [d.max_zero_sv for d in emb.diagnostics if d.max_zero_sv is not None]
        kept = [d.min_nonzero_sv for d in emb.diagnostics if d.min_nonzero_sv is not None]
        dims = sorted(set(emb.kernel_dims))
        if len(dims) > 1:
            logger.warning(f"p={p}: kernel dimensions differ between elements: {dims}")
        records.append(SingularValueRecord(
            p=p,
            n_elements=mesh.n_elements,
            kernel_dim=dims[-1],
            max_zero_sv=max(zeros) if zeros else None,
            min_nonzero_sv=min(kept) if kept else None,
        ))
    if storage is not None:
        storage.save_records(records)
    return records
