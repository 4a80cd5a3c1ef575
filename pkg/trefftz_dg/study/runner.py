import time
from dataclasses import dataclass
from typing import List, Optional

from .problems import StudyProblem, build_problem
from ..analysis.errors import dg_norm_error, l2_error
from ..config.settings import StudyConfig
from ..embedding.trefftz import solve_embedded, trefftz_embedding
from ..forms.base_form import solve_system
from ..geometry.mesh import Mesh, refine, unit_square_mesh
from ..linalg import dense
from ..storage.csv_storage import CsvStorage
from ..storage.models import StudyRecord
from ..utils.logger import get_logger

logger = get_logger(__name__)


def mesh_hierarchy(base_n: int, levels: int) -> List[Mesh]:
    """unit_square_mesh(base_n) and its first levels-1 red refinements."""
    meshes = [unit_square_mesh(base_n)]
    for _ in range(levels - 1):
        meshes.append(refine(meshes[-1]))
    return meshes


def _condition(matrix, limit: int) -> Optional[float]:
    if matrix.shape[0] == 0 or matrix.shape[0] > limit:
        return None
    return dense.cond2(matrix.to_dense())


@dataclass
class PointResult:
    dg: StudyRecord
    embedded: StudyRecord


class StudyRunner:
    """
    Runs one h/p convergence study: for every degree and mesh level the full DG system
    and the embedded Trefftz system are solved and compared with the exact solution.
    """
    def __init__(self, config: StudyConfig):
        self.config = config
        self.study = build_problem(config.problem, alpha=config.alpha, omega=config.wavenumber)
        logger.info(f"StudyRunner initialized: problem={config.problem}, p={config.pmin}..{config.pmax}, "
                    f"levels={config.refinements}, threads={config.threads}")

    def _errors(self, u, mesh: Mesh, p: int):
        study: StudyProblem = self.study
        problem = study.problem
        l2 = l2_error(u, problem.exact, mesh, p)
        dg = None
        if study.has_dg_norm:
            dg = dg_norm_error(u, problem.exact, mesh, p, alpha=problem.alpha, exact_grad=problem.exact_grad)
        return l2, dg

    def run_point(self, mesh: Mesh, p: int) -> PointResult:
        """Solves both methods on one mesh at one degree."""
        config = self.config
        study = self.study
        options = config.solver_options()
        h = float(mesh.h_max)
        logger.info(f"{study.name}: p={p}, h={h:.4g}, {mesh.n_elements} elements")

        start = time.perf_counter()
        system = study.assemble(mesh, p, study.problem, threads=config.threads)
        t_assemble = time.perf_counter() - start

        start = time.perf_counter()
        full = solve_system(system, **options)
        t_solve_full = time.perf_counter() - start
        cond_full = _condition(system.A, config.cond_max_dofs)

        start = time.perf_counter()
        emb = trefftz_embedding(mesh, p, study.L, study.Lt, f=study.f, eps=config.eps,
                                method=config.kernel_method, scaled=config.scaled_eps,
                                equilibrate=config.equilibrate, threads=config.threads)
        t_embed = time.perf_counter() - start

        start = time.perf_counter()
        u_h, _, report = solve_embedded(system, emb, **options)
        t_solve_embedded = time.perf_counter() - start
        if report.M > report.N:
            raise ValueError(f"Reduced dimension M={report.M} exceeds N={report.N}")
        cond_reduced = None
        if system.N <= config.cond_max_dofs:
            cond_reduced = _condition(report.reduced, config.cond_max_dofs)

        l2_full, dg_full = self._errors(full.x, mesh, p)
        l2_emb, dg_emb = self._errors(u_h, mesh, p)
        logger.info(f"{study.name}: p={p}, h={h:.4g}: dg L2 {l2_full:.3e} (N={report.N}), "
                    f"embedded L2 {l2_emb:.3e} (M={report.M})")

        timed = config.timings
        dg_row = StudyRecord(
            problem=study.name, method="dg", p=p, h=h, ndof=report.N, nzes=report.nnz_full,
            l2_error=l2_full, dg_error=dg_full, cond_full=cond_full,
            t_assemble=t_assemble if timed else None,
            t_solve=t_solve_full if timed else None,
        )
        embedded_row = StudyRecord(
            problem=study.name, method="embedded", p=p, h=h, ndof=report.M, nzes=report.nnz_reduced,
            l2_error=l2_emb, dg_error=dg_emb, cond_reduced=cond_reduced,
            t_assemble=t_assemble if timed else None,
            t_embed=t_embed if timed else None,
            t_solve=t_solve_embedded if timed else None,
        )
        return PointResult(dg=dg_row, embedded=embedded_row)

    def run(self) -> List[StudyRecord]:
        """Rows ordered by degree, then mesh level, then method (dg before embedded)."""
        meshes = mesh_hierarchy(self.config.base_n, self.config.refinements)
        records = []
        for p in self.config.degrees:
            for mesh in meshes:
                point = self.run_point(mesh, p)
                records.extend([point.dg, point.embedded])
        return records


def run_study(config: StudyConfig, storage: Optional[CsvStorage] = None) -> List[StudyRecord]:
    """
    Runs the configured study and writes the CSV to `config.out` (or `storage`).

    Raises:
        SolverError: if a full or reduced solve fails
    """
    records = StudyRunner(config).run()
    storage = storage or CsvStorage(config.out, StudyRecord.COLUMNS)
    storage.save_records(records)
    logger.info(f"Study '{config.problem}' finished with {len(records)} rows")
    return records


def group_errors(records: List[StudyRecord], method: str, p: int, column: str = "l2_error"):
    """(hs, errors) of one (method, p) group in mesh order."""
    rows = [r for r in records if r.method == method and r.p == p]
    return [r.h for r in rows], [getattr(r, column) for r in rows]
