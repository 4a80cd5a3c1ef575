"""
DG scheme for -Laplace(u) - omega^2 u = 0 with impedance data du/dn + i omega u = g.

The form is sesquilinear (test functions conjugated); the basis is real, so A is complex
symmetric.
"""

import numpy as np

from .base_form import HELMHOLTZ, DGForm, DGProblem, sample, side_sign, weighted
from ..discretization.diffop import helmholtz
from ..geometry.mesh import Mesh


class HelmholtzForm(DGForm):
    """
    a(u,v) = sum_K (grad u, grad v) - omega^2 (u, v)
             - <{grad u}.[v] + [u].{grad v}>_int
             + <i alpha omega [u].[v] - beta/(i omega) [du/dn][dv/dn]>_int
             - <delta (du/dn v + u dv/dn)>_bnd
             + <i (1-delta) omega u v - delta/(i omega) du/dn dv/dn>_bnd
    l(v)   = <(1-delta) g v - delta/(i omega) g dv/dn>_bnd
    """
    kind = HELMHOLTZ

    def volume_terms(self, basis, rule, problem, p):
        w = rule.weights
        values = basis.evaluate(rule.points)
        grads = basis.gradients(rule.points)
        block = sum(weighted(grads[d], w, grads[d]) for d in range(basis.dim))
        block = block - problem.omega ** 2 * weighted(values, w, values)
        return block.astype(complex), None

    def interior_block(self, data, test, test_side, trial, trial_side, problem, p):
        w = data.rule.weights
        omega = problem.omega
        es, et = side_sign(test_side), side_sign(trial_side)
        return (-0.5 * es * weighted(test.values, w, trial.normal_derivatives)
                - 0.5 * et * weighted(test.normal_derivatives, w, trial.values)
                + 1j * problem.alpha * omega * es * et * weighted(test.values, w, trial.values)
                - problem.beta / (1j * omega) * es * et * weighted(test.normal_derivatives, w, trial.normal_derivatives))

    def boundary_terms(self, data, problem, p):
        w = data.rule.weights
        omega, delta = problem.omega, problem.delta
        trace = data.plus
        block = (-delta * (weighted(trace.values, w, trace.normal_derivatives)
                           + weighted(trace.normal_derivatives, w, trace.values))
                 + 1j * (1.0 - delta) * omega * weighted(trace.values, w, trace.values)
                 - delta / (1j * omega) * weighted(trace.normal_derivatives, w, trace.normal_derivatives))
        g = sample(problem.g, data.rule.points, dtype=complex)
        load = ((1.0 - delta) * trace.values - delta / (1j * omega) * trace.normal_derivatives) @ (w * g)
        return block, load


def plane_wave(omega: float, direction):
    """
    Plane wave u = exp(i omega d.x) with its gradient and impedance datum
    g = du/dn + i omega u evaluated against a supplied normal.
    """
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)

    def u(points):
        return np.exp(1j * omega * (np.atleast_2d(points) @ d))

    def grad(points):
        return 1j * omega * u(points)[:, None] * d[None, :]

    return u, grad


def impedance_datum(u, grad, omega: float, normal_of):
    """g(x) = grad u(x) . n(x) + i omega u(x), with `normal_of(points)` the outward normals."""
    def g(points):
        normals = normal_of(points)
        return np.sum(grad(points) * normals, axis=1) + 1j * omega * u(points)
    return g


def unit_square_normal(points, tol: float = 1e-12):
    """Outward normals of the unit square at boundary points."""
    points = np.atleast_2d(points)
    normals = np.zeros_like(points)
    normals[np.abs(points[:, 0]) < tol] = (-1.0, 0.0)
    normals[np.abs(points[:, 0] - 1.0) < tol] = (1.0, 0.0)
    normals[np.abs(points[:, 1]) < tol] = (0.0, -1.0)
    normals[np.abs(points[:, 1] - 1.0) < tol] = (0.0, 1.0)
    return normals


def helmholtz_problem(omega: float, g=None, alpha: float = 0.5, beta: float = 0.5, delta: float = 0.5,
                      dim: int = 2, exact=None, exact_grad=None) -> DGProblem:
    return DGProblem(kind=HELMHOLTZ, operator=helmholtz(omega, dim), alpha=alpha, beta=beta, delta=delta,
                     omega=omega, g=g, field="complex", exact=exact, exact_grad=exact_grad)


def assemble_helmholtz(mesh: Mesh, p: int, problem: DGProblem, quad_degree=None, threads: int = 1):
    """Complex DG system for the Helmholtz problem."""
    return HelmholtzForm().assemble(mesh, p, problem, quad_degree=quad_degree, threads=threads)
