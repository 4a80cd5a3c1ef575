"""
Quadrature rules on intervals, triangles and mesh facets.

Reference rules live on [0,1] and on the unit triangle (0,0),(1,0),(0,1); weights sum
to the reference measure (1 and 1/2). Mapped rules carry physical points and
Jacobian-scaled weights.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..geometry.mesh import Mesh


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    points: np.ndarray            # (nq, dim) physical coordinates
    weights: np.ndarray           # (nq,)
    exactness_degree: int
    reference_points: np.ndarray  # (nq, ref_dim)

    @property
    def n_points(self) -> int:
        return len(self.weights)

    def integrate(self, values: np.ndarray):
        """Integrates sampled values (last axis = quadrature points)."""
        return values @ self.weights


def _readonly(*arrays):
    for array in arrays:
        array.setflags(write=False)
    return arrays


@lru_cache(maxsize=None)
def gauss_interval(degree: int):
    """Gauss-Legendre points/weights on [0,1], exact up to `degree`."""
    if degree < 0:
        raise ValueError(f"Quadrature degree must be >= 0, got {degree}")
    n = max(1, (degree + 2) // 2)
    x, w = np.polynomial.legendre.leggauss(n)
    return _readonly(0.5 * (x + 1.0), 0.5 * w)


@lru_cache(maxsize=None)
def triangle_rule(degree: int):
    """
    Points (nq, 2) and weights on the unit triangle, exact up to `degree`.

    Degrees 0-2 use the symmetric centroid and edge-interior rules; anything higher
    uses a collapsed (Duffy) tensor Gauss rule, so every degree is supported.
    """
    if degree < 0:
        raise ValueError(f"Quadrature degree must be >= 0, got {degree}")
    if degree <= 1:
        points = np.array([[1.0 / 3.0, 1.0 / 3.0]])
        weights = np.array([0.5])
    elif degree == 2:
        points = np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]])
        weights = np.full(3, 1.0 / 6.0)
    else:
        # x = u(1-v), y = v has Jacobian (1-v): one extra degree in v
        u, wu = gauss_interval(degree)
        v, wv = gauss_interval(degree + 1)
        uu, vv = np.meshgrid(u, v, indexing="ij")
        points = np.column_stack([(uu * (1.0 - vv)).ravel(), vv.ravel()])
        weights = (np.outer(wu, wv) * (1.0 - vv)).ravel()
    return _readonly(points, weights)


def quadrature_for(mesh: Mesh, element_id: int, degree: int) -> QuadratureRule:
    """Volume rule on one element, exact for polynomials of total degree `degree`."""
    coords = mesh.element_vertices(element_id)
    if mesh.dim == 1:
        ref, w = gauss_interval(degree)
        length = coords[1, 0] - coords[0, 0]
        points = coords[0, 0] + length * ref
        return QuadratureRule(points[:, None], w * length, degree, ref[:, None])
    ref, w = triangle_rule(degree)
    jac = np.column_stack([coords[1] - coords[0], coords[2] - coords[0]])
    points = coords[0] + ref @ jac.T
    det = abs(np.linalg.det(jac))
    return QuadratureRule(points, w * det, degree, ref)


def facet_quadrature_for(mesh: Mesh, facet_id: int, degree: int) -> QuadratureRule:
    """Rule on a facet: Gauss-Legendre along edges, a unit-weight point evaluation in 1D."""
    facet = mesh.facets[facet_id]
    if mesh.dim == 1:
        point = mesh.vertices[facet.vertex_ids[0]]
        return QuadratureRule(point[None, :], np.ones(1), degree, np.zeros((1, 0)))
    ref, w = gauss_interval(degree)
    a = mesh.vertices[facet.vertex_ids[0]]
    b = mesh.vertices[facet.vertex_ids[1]]
    points = a + np.outer(ref, b - a)
    return QuadratureRule(points, w * facet.measure, degree, ref[:, None])
