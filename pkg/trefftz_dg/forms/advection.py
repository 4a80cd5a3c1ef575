"""Upwind DG for b.grad(u) = f with inflow data u_D, b divergence-free."""

import numpy as np

from .base_form import ADVECTION, DGForm, DGProblem, sample, weighted
from ..discretization.diffop import advection
from ..geometry.mesh import Mesh


class UpwindForm(DGForm):
    """
    a(u,v) = sum_K -(u, b.grad v)_K + <b.n_K u^ v>_(dK minus inflow boundary)
    l(v)   = (f, v) - <b.n u_D v>_inflow

    Upwinding is decided per quadrature point by the sign of b.n.
    """
    kind = ADVECTION

    def volume_terms(self, basis, rule, problem, p):
        w = rule.weights
        values = basis.evaluate(rule.points)
        velocity = np.asarray(problem.b(rule.points))
        grads = basis.gradients(rule.points)
        transport = np.einsum("qd,dnq->nq", velocity, grads)
        block = -weighted(transport, w, values)
        load = None
        if problem.f is not None:
            load = values @ (w * sample(problem.f, rule.points))
        return block, load

    def interior_block(self, data, test, test_side, trial, trial_side, problem, p):
        bn = np.asarray(problem.b(data.rule.points)) @ data.normal
        # flux b.n u^ where u^ is the trace of the upwind element
        upwind = np.where(bn >= 0.0, bn, 0.0) if trial_side == "+" else np.where(bn < 0.0, bn, 0.0)
        sign = 1.0 if test_side == "+" else -1.0
        return sign * weighted(test.values, data.rule.weights * upwind, trial.values)

    def boundary_terms(self, data, problem, p):
        w = data.rule.weights
        trace = data.plus
        bn = np.asarray(problem.b(data.rule.points)) @ data.normal
        outflow = np.where(bn > 0.0, bn, 0.0)
        inflow = np.where(bn < 0.0, bn, 0.0)
        block = weighted(trace.values, w * outflow, trace.values)
        load = -trace.values @ (w * inflow * sample(problem.u_D, data.rule.points))
        return block, load


def advection_problem(b, u_D=None, f=None, dim: int = 2, exact=None, exact_grad=None) -> DGProblem:
    return DGProblem(kind=ADVECTION, operator=advection(b, dim), b=b, u_D=u_D, f=f,
                     exact=exact, exact_grad=exact_grad)


def assemble_advection(mesh: Mesh, p: int, problem: DGProblem, quad_degree=None, threads: int = 1):
    """Upwind DG system for the transport problem."""
    return UpwindForm().assemble(mesh, p, problem, quad_degree=quad_degree, threads=threads)
