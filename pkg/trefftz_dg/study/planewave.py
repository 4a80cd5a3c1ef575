"""
Approximation of sin(omega x) and cos(omega x) on [0, 1] by one element.

For -u'' - omega^2 u with test operator d^2/dx^2 the weak Trefftz space has dimension
two for every p >= 2; its best approximation is compared with that of the full V^p.
"""

import math
from typing import Iterable, List, Optional

import numpy as np
import scipy.linalg

from ..config.settings import PLANEWAVE_OMEGA
from ..discretization.basis import make_basis
from ..discretization.diffop import helmholtz, leading_part
from ..discretization.quadrature import quadrature_for
from ..embedding.trefftz import trefftz_embedding
from ..geometry.mesh import interval_mesh
from ..linalg.dense import DEFAULT_EPS
from ..storage.csv_storage import CsvStorage
from ..storage.models import PlaneWaveRecord
from ..utils.errors import DecompositionError
from ..utils.logger import get_logger

logger = get_logger(__name__)


def best_approximation_error(function, columns: np.ndarray, values: np.ndarray, weights: np.ndarray) -> float:
    """
    L2 distance from `function` values to span{columns . phi} by weighted least squares.

    Args:
        columns: (N, m) coefficient vectors spanning the space
        values: (N, nq) basis values at the quadrature points
        weights: (nq,) quadrature weights
    """
    root = np.sqrt(weights)
    target = root * function
    if columns.shape[1] == 0:
        return float(np.linalg.norm(target))
    design = (root * (columns.T @ values)).T
    coefficients, *_ = scipy.linalg.lstsq(design, target)
    return float(np.linalg.norm(design @ coefficients - target))


def planewave_point(p: int, omega: float = PLANEWAVE_OMEGA, eps: float = DEFAULT_EPS,
                    method: str = "svd", equilibrate: bool = True) -> PlaneWaveRecord:
    mesh = interval_mesh(0.0, 1.0, 1)
    L = helmholtz(omega, dim=1)
    emb = trefftz_embedding(mesh, p, L, leading_part(L, L.order), eps=eps, method=method, equilibrate=equilibrate)
    basis = make_basis(mesh, 0, p)
    # resolve the oscillation well beyond the polynomial degree
    rule = quadrature_for(mesh, 0, max(2 * p + 4, int(4 * omega) + 8))
    x = rule.points[:, 0]
    values = basis.evaluate(rule.points)
    full = np.eye(basis.size)
    embedded = emb.blocks[0]
    errors = {}
    for name, function in (("sin", np.sin(omega * x)), ("cos", np.cos(omega * x))):
        errors[name] = (best_approximation_error(function, embedded, values, rule.weights),
                        best_approximation_error(function, full, values, rule.weights))
    logger.info(f"Plane waves p={p}: embedded dim {embedded.shape[1]}, sin error {errors['sin'][0]:.3e} "
                f"(full {errors['sin'][1]:.3e})")
    return PlaneWaveRecord(
        p=p,
        omega=float(omega),
        embedded_dim=int(embedded.shape[1]),
        full_dim=basis.size,
        sin_error_embedded=errors["sin"][0],
        sin_error_full=errors["sin"][1],
        cos_error_embedded=errors["cos"][0],
        cos_error_full=errors["cos"][1],
    )


def run_planewave_1d(p_list: Iterable[int], omega: float = PLANEWAVE_OMEGA, eps: float = DEFAULT_EPS,
                     method: str = "svd", equilibrate: bool = True,
                     storage: Optional[CsvStorage] = None) -> List[PlaneWaveRecord]:
    """
    One record per degree; the CSV is written when `storage` is given.

    Raises:
        DecompositionError: if a degree p >= 2 does not give a two-dimensional embedded space
    """
    if not omega > 0 or not math.isfinite(omega):
        raise ValueError(f"omega must be a positive number, got {omega}")
    records = [planewave_point(p, omega, eps, method, equilibrate) for p in p_list]
    for record in records:
        if record.p >= 2 and record.embedded_dim != 2:
            raise DecompositionError(f"Embedded dimension {record.embedded_dim} at p={record.p}, expected 2 (eps={eps})")
    if storage is not None:
        storage.save_records(records)
    return records
