"""
Linear differential operators L = sum_j alpha_j(x) D^j.

Coefficients are either constants or callables taking an (nq, dim) array of points and
returning (nq,) values; callables are only ever sampled at quadrature points.
"""

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .basis import ElementBasis

Coefficient = Union[float, complex, Callable]


@dataclass(frozen=True, eq=False)
class Term:
    multi_index: tuple
    coefficient: Coefficient

    @property
    def order(self) -> int:
        return sum(self.multi_index)

    @property
    def is_constant(self) -> bool:
        return not callable(self.coefficient)

    def sample(self, points: np.ndarray) -> np.ndarray:
        if self.is_constant:
            return np.full(len(points), self.coefficient)
        return np.asarray(self.coefficient(points))


@dataclass(frozen=True, eq=False)
class DiffOp:
    terms: tuple
    dim: int
    name: str = ""

    def __post_init__(self):
        if not self.terms:
            raise ValueError("A differential operator needs at least one term")
        seen = set()
        for term in self.terms:
            if len(term.multi_index) != self.dim:
                raise ValueError(f"Multi-index {term.multi_index} does not match dimension {self.dim}")
            if term.multi_index in seen:
                raise ValueError(f"Duplicate multi-index {term.multi_index} in operator {self.name!r}")
            seen.add(term.multi_index)

    @property
    def order(self) -> int:
        return max(term.order for term in self.terms)

    @property
    def has_constant_coefficients(self) -> bool:
        return all(term.is_constant for term in self.terms)

    def apply(self, basis: ElementBasis, points: np.ndarray) -> np.ndarray:
        """(N, nq) values of L phi_j at the points."""
        if basis.dim != self.dim:
            raise ValueError(f"Operator of dimension {self.dim} applied to a {basis.dim}D basis")
        points = np.atleast_2d(points)
        result = None
        for term in self.terms:
            contribution = term.sample(points)[None, :] * basis.evaluate(points, term.multi_index)
            result = contribution if result is None else result + contribution
        return result

    def apply_to_coefficients(self, basis: ElementBasis, coefficients: np.ndarray, points: np.ndarray) -> np.ndarray:
        """L applied to the function sum_j c_j phi_j, sampled at the points."""
        return np.asarray(coefficients) @ self.apply(basis, points)

    def __repr__(self):
        return f"DiffOp({self.name or 'anonymous'}, order={self.order}, terms={len(self.terms)})"


def apply_to_basis(op: DiffOp, basis: ElementBasis, j: int, point):
    """L phi_j evaluated at a single point."""
    if not 0 <= j < basis.size:
        raise IndexError(f"Basis index {j} out of range for N_K = {basis.size}")
    point = np.asarray(point, dtype=float).reshape(1, -1)
    if point.shape[1] != op.dim:
        raise ValueError(f"Point of dimension {point.shape[1]} for a {op.dim}D operator")
    return op.apply(basis, point)[j, 0].item()


def leading_part(op: DiffOp, p: int) -> DiffOp:
    """
    Constant-coefficient leading part used as the test operator of W.

    Keeps the terms of maximal total order. Constant coefficients are normalized so the
    first kept one is +1; callable coefficients are replaced by 1. If L already has only
    constant top-order terms, L itself is returned.
    """
    if p < op.order:
        raise ValueError(f"Degree p={p} is below the operator order {op.order}")
    top = [term for term in op.terms if term.order == op.order]
    if len(top) == len(op.terms) and op.has_constant_coefficients:
        return op
    if all(term.is_constant for term in top):
        first = top[0].coefficient
        if first == 0:
            return op
        terms = tuple(Term(term.multi_index, term.coefficient / first) for term in top)
    else:
        terms = tuple(Term(term.multi_index, 1.0) for term in top)
    return DiffOp(terms=terms, dim=op.dim, name=f"leading({op.name})")


def _unit(dim: int, axis: int, order: int) -> tuple:
    return tuple(order if k == axis else 0 for k in range(dim))


def laplace(dim: int = 2) -> DiffOp:
    """L = -Laplacian."""
    terms = tuple(Term(_unit(dim, axis, 2), -1.0) for axis in range(dim))
    return DiffOp(terms=terms, dim=dim, name="laplace")


def helmholtz(omega: float, dim: int = 2) -> DiffOp:
    """L = -Laplacian - omega^2."""
    if omega <= 0:
        raise ValueError(f"Helmholtz needs omega > 0, got {omega}")
    terms = laplace(dim).terms + (Term((0,) * dim, -float(omega) ** 2),)
    return DiffOp(terms=terms, dim=dim, name="helmholtz")


def advection(b: Callable, dim: int = 2) -> DiffOp:
    """L = b . grad, with b mapping (nq, dim) points to (nq, dim) velocities."""
    terms = tuple(
        Term(_unit(dim, axis, 1), (lambda points, axis=axis: np.asarray(b(points))[:, axis]))
        for axis in range(dim)
    )
    return DiffOp(terms=terms, dim=dim, name="advection")


def identity(dim: int = 2) -> DiffOp:
    return DiffOp(terms=(Term((0,) * dim, 1.0),), dim=dim, name="identity")


def zero(dim: int = 2) -> DiffOp:
    return DiffOp(terms=(Term((0,) * dim, 0.0),), dim=dim, name="zero")


def builtin_operators() -> dict:
    """
    Catalog of shipped operators. Each entry maps to a factory returning (L, default L~);
    the default L~ is the leading part at the operator's own order.
    """
    def paired(factory):
        def build(*args, **kwargs):
            op = factory(*args, **kwargs)
            return op, leading_part(op, op.order)
        return build

    return {
        "laplace": paired(laplace),
        "helmholtz": paired(helmholtz),
        "advection": paired(advection),
        "identity": paired(identity),
        "zero": paired(zero),
    }
