"""
Scaled monomial bases of P^p(K).

Basis function j on element K is ((x - c_K) / h_K) ** e_j with c_K the centroid, h_K the
diameter and e_j the j-th multi-index, ordered by total degree and then
lexicographically. Derivatives of any order are exact.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from ..geometry.mesh import Mesh


@lru_cache(maxsize=None)
def multi_indices(dim: int, p: int) -> tuple:
    """All multi-indices with |i| <= p, by total degree then lexicographic."""
    if p < 0:
        raise ValueError(f"Polynomial degree must be >= 0, got {p}")
    indices = [i for i in product(range(p + 1), repeat=dim) if sum(i) <= p]
    return tuple(sorted(indices, key=lambda i: (sum(i), i)))


def n_basis(dim: int, p: int) -> int:
    """N_K: p+1 in 1D, (p+1)(p+2)/2 in 2D."""
    return len(multi_indices(dim, p))


def _falling(n: np.ndarray, k: int) -> np.ndarray:
    """n (n-1) ... (n-k+1), zero whenever k > n."""
    result = np.ones_like(n, dtype=float)
    for m in range(k):
        result = result * np.maximum(n - m, 0)
    return result


@dataclass(frozen=True, eq=False)
class ElementBasis:
    element_id: int
    degree: int
    center: np.ndarray
    scale: float
    exponents: np.ndarray  # (N, dim) integer multi-indices

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def size(self) -> int:
        return len(self.exponents)

    def evaluate(self, points: np.ndarray, derivative=None) -> np.ndarray:
        """
        D^derivative of every basis function at `points`.

        Args:
            points: (nq, dim) physical coordinates.
            derivative: multi-index (defaults to the function values).

        Returns:
            (N, nq) array.
        """
        points = np.atleast_2d(points)
        d = np.zeros(self.dim, dtype=int) if derivative is None else np.asarray(derivative, dtype=int)
        if d.shape != (self.dim,):
            raise ValueError(f"Derivative {tuple(d)} does not match dimension {self.dim}")
        s = (points - self.center) / self.scale
        values = np.ones((self.size, len(points)))
        for axis in range(self.dim):
            e = self.exponents[:, axis]
            coef = _falling(e, d[axis]) / self.scale ** d[axis]
            power = np.maximum(e - d[axis], 0)
            values *= coef[:, None] * s[None, :, axis] ** power[:, None]
        return values

    def gradients(self, points: np.ndarray) -> np.ndarray:
        """(dim, N, nq) array of first partial derivatives."""
        return np.stack([self.evaluate(points, tuple(np.eye(self.dim, dtype=int)[k])) for k in range(self.dim)])

    def eval_deriv(self, j: int, derivative, point) -> float:
        """D^derivative of basis function j at a single point."""
        if not 0 <= j < self.size:
            raise IndexError(f"Basis index {j} out of range for N_K = {self.size}")
        return float(self.evaluate(np.asarray(point, dtype=float).reshape(1, -1), derivative)[j, 0])


def make_basis(mesh: Mesh, element_id: int, p: int) -> ElementBasis:
    """Scaled monomial basis of degree p on one element."""
    exponents = np.array(multi_indices(mesh.dim, p), dtype=int)
    return ElementBasis(
        element_id=element_id,
        degree=p,
        center=np.array(mesh.centroids[element_id]),
        scale=float(mesh.diameters[element_id]),
        exponents=exponents,
    )


def element_bases(mesh: Mesh, p: int) -> list:
    """Bases of all elements in mesh order."""
    return [make_basis(mesh, k, p) for k in range(mesh.n_elements)]


def dof_offsets(bases) -> np.ndarray:
    """Global dof offsets: element k owns offsets[k]:offsets[k+1]."""
    return np.concatenate([[0], np.cumsum([b.size for b in bases])]).astype(int)
