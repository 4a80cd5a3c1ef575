"""Error norms of DG coefficient vectors and experimental orders of convergence."""

import math
from typing import Callable, Optional

import numpy as np

from ..discretization.basis import dof_offsets, element_bases
from ..discretization.quadrature import facet_quadrature_for, quadrature_for
from ..geometry.mesh import Mesh
from ..linalg import dense


def _degree(p: int, quad_degree: Optional[int]) -> int:
    return quad_degree if quad_degree is not None else 2 * p + 4


def _values(function: Optional[Callable], points: np.ndarray) -> np.ndarray:
    if function is None:
        return np.zeros(len(points))
    return np.asarray(function(points))


def l2_projection(function: Callable, mesh: Mesh, p: int, quad_degree: Optional[int] = None) -> np.ndarray:
    """Elementwise L2 projection onto V^p, as DG coefficients."""
    degree = _degree(p, quad_degree)
    parts = []
    for basis in element_bases(mesh, p):
        rule = quadrature_for(mesh, basis.element_id, degree)
        values = basis.evaluate(rule.points)
        mass = (values * rule.weights) @ values.T
        parts.append(dense.lu_solve(mass, values @ (rule.weights * _values(function, rule.points))))
    return np.concatenate(parts)


def evaluate(u_h: np.ndarray, mesh: Mesh, p: int, element_id: int, points: np.ndarray) -> np.ndarray:
    """Values of the DG function u_h at points of one element."""
    bases = element_bases(mesh, p)
    offsets = dof_offsets(bases)
    return bases[element_id].evaluate(points).T @ u_h[offsets[element_id]:offsets[element_id + 1]]


def l2_error(u_h: np.ndarray, u_exact: Callable, mesh: Mesh, p: int, quad_degree: Optional[int] = None) -> float:
    """
    sqrt(sum_K int_K |u_h - u_exact|^2), with the complex modulus for complex data.

    The default quadrature degree is 2p+4.
    """
    u_h = np.asarray(u_h)
    bases = element_bases(mesh, p)
    offsets = dof_offsets(bases)
    if u_h.shape != (int(offsets[-1]),):
        raise ValueError(f"Coefficient vector of shape {u_h.shape} for N = {int(offsets[-1])}")
    degree = _degree(p, quad_degree)
    total = 0.0
    for k, basis in enumerate(bases):
        rule = quadrature_for(mesh, k, degree)
        diff = basis.evaluate(rule.points).T @ u_h[offsets[k]:offsets[k + 1]] - _values(u_exact, rule.points)
        total += float(rule.weights @ np.abs(diff) ** 2)
    return math.sqrt(total)


def dg_norm_error(u_h: np.ndarray, u_exact: Optional[Callable], mesh: Mesh, p: int, alpha: float = 4.0,
                  exact_grad: Optional[Callable] = None, quad_degree: Optional[int] = None) -> float:
    """
    ||u_h - u||_DG^2 = sum_K ||grad(u_h - u)||_K^2 + sum_E ||sqrt(alpha p^2 / h) [u_h - u]||_E^2

    `exact_grad` maps (nq, dim) points to (nq, dim) gradients; None stands for u = 0
    together with `u_exact` = None. On boundary facets the jump is the trace of
    u_h - u. h is the mean diameter of the adjacent elements, like the SIP penalty.
    """
    if exact_grad is None and u_exact is not None:
        raise ValueError("dg_norm_error needs exact_grad when u_exact is given")
    u_h = np.asarray(u_h)
    bases = element_bases(mesh, p)
    offsets = dof_offsets(bases)
    degree = _degree(p, quad_degree)

    def local(k):
        return u_h[offsets[k]:offsets[k + 1]]

    total = 0.0
    for k, basis in enumerate(bases):
        rule = quadrature_for(mesh, k, degree)
        grad_h = np.einsum("dnq,n->qd", basis.gradients(rule.points), local(k))
        grad_u = np.zeros_like(grad_h) if exact_grad is None else np.asarray(exact_grad(rule.points))
        total += float(rule.weights @ np.sum(np.abs(grad_h - grad_u) ** 2, axis=1))

    for facet_id, facet in enumerate(mesh.facets):
        rule = facet_quadrature_for(mesh, facet_id, degree)
        ids = facet.adjacent_element_ids
        h = float(np.mean([mesh.diameters[k] for k in ids]))
        sigma = alpha * max(p, 1) ** 2 / h
        plus = bases[ids[0]].evaluate(rule.points).T @ local(ids[0])
        if facet.is_boundary:
            jump = plus - _values(u_exact, rule.points)
        else:
            jump = plus - bases[ids[1]].evaluate(rule.points).T @ local(ids[1])
        total += sigma * float(rule.weights @ np.abs(jump) ** 2)
    return math.sqrt(total)


def eoc(errors, hs) -> list:
    """
    Experimental orders of convergence log(e_i/e_{i+1}) / log(h_i/h_{i+1}).

    A rate involving a zero or negative error is undefined and returned as None.

    Raises:
        ValueError: for fewer than two values, length mismatch or hs not strictly decreasing
    """
    errors = list(errors)
    hs = list(hs)
    if len(errors) != len(hs):
        raise ValueError(f"{len(errors)} errors for {len(hs)} mesh sizes")
    if len(errors) < 2:
        raise ValueError("eoc needs at least two (error, h) pairs")
    if any(h <= 0 for h in hs) or any(a <= b for a, b in zip(hs, hs[1:])):
        raise ValueError(f"Mesh sizes must be positive and strictly decreasing, got {hs}")
    rates = []
    for (e0, e1), (h0, h1) in zip(zip(errors, errors[1:]), zip(hs, hs[1:])):
        if e0 is None or e1 is None or e0 <= 0 or e1 <= 0:
            rates.append(None)
        else:
            rates.append(math.log(e0 / e1) / math.log(h0 / h1))
    return rates
