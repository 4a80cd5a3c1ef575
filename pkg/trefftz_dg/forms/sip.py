"""Symmetric interior penalty DG for -Laplace(u) = f with Dirichlet data g."""

import numpy as np

from .base_form import SIP_LAPLACE, DGForm, DGProblem, sample, side_sign, weighted
from ..discretization.diffop import laplace
from ..geometry.mesh import Mesh
from ..utils.logger import get_logger

logger = get_logger(__name__)


def penalty(alpha: float, p: int, h: float) -> float:
    """alpha p^2 / h, with p = 0 treated as p = 1."""
    return alpha * max(p, 1) ** 2 / h


class SipForm(DGForm):
    """
    a(u,v) = (grad u, grad v)
             - <{grad u}.[v] + {grad v}.[u] - sigma [u].[v]>_interior
             - <du/dn v + dv/dn u - sigma u v>_boundary
    l(v)   = (f, v) + <sigma g v - dv/dn g>_boundary
    """
    kind = SIP_LAPLACE

    def volume_terms(self, basis, rule, problem, p):
        weights = rule.weights
        grads = basis.gradients(rule.points)
        block = sum(weighted(grads[d], weights, grads[d]) for d in range(basis.dim))
        load = None
        if problem.f is not None:
            load = basis.evaluate(rule.points) @ (weights * sample(problem.f, rule.points))
        return block, load

    def interior_block(self, data, test, test_side, trial, trial_side, problem, p):
        w = data.rule.weights
        es, et = side_sign(test_side), side_sign(trial_side)
        sigma = penalty(problem.alpha, p, data.h)
        return (-0.5 * es * weighted(test.values, w, trial.normal_derivatives)
                - 0.5 * et * weighted(test.normal_derivatives, w, trial.values)
                + sigma * es * et * weighted(test.values, w, trial.values))

    def boundary_terms(self, data, problem, p):
        w = data.rule.weights
        trace = data.plus
        sigma = penalty(problem.alpha, p, data.h)
        block = (-weighted(trace.values, w, trace.normal_derivatives)
                 - weighted(trace.normal_derivatives, w, trace.values)
                 + sigma * weighted(trace.values, w, trace.values))
        g = sample(problem.g, data.rule.points)
        load = (sigma * trace.values - trace.normal_derivatives) @ (w * g)
        return block, load


def sip_problem(g=None, f=None, alpha: float = 4.0, dim: int = 2, exact=None, exact_grad=None) -> DGProblem:
    """Laplace (f = None) or Poisson problem with Dirichlet data g."""
    return DGProblem(kind=SIP_LAPLACE, operator=laplace(dim), alpha=alpha, g=g, f=f,
                     exact=exact, exact_grad=exact_grad)


def assemble_sip(mesh: Mesh, p: int, problem: DGProblem, quad_degree=None, threads: int = 1):
    """Symmetric interior penalty system for Laplace/Poisson problems."""
    return SipForm().assemble(mesh, p, problem, quad_degree=quad_degree, threads=threads)
