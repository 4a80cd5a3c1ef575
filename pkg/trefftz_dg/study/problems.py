"""
Catalog of the study problems with their exact solutions.

    laplace    -Lap u = 0,            u = exp(x) sin(y),          Dirichlet data
    poisson    -Lap u = 2 pi^2 u,     u = sin(pi x) sin(pi y),    Dirichlet data
    helmholtz  -Lap u - omega^2 u = 0, plane wave exp(i omega d.x), impedance data
    advection  b.grad u = f,          u = sin(x) sin(y),          b = (-sin y, cos x)
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..analysis.dofs import FIRST_ORDER, SECOND_ORDER
from ..discretization.diffop import DiffOp, leading_part
from ..forms.advection import advection_problem, assemble_advection
from ..forms.base_form import DGProblem
from ..forms.helmholtz import (assemble_helmholtz, helmholtz_problem, impedance_datum, plane_wave,
                               unit_square_normal)
from ..forms.sip import assemble_sip, sip_problem

PLANE_WAVE_DIRECTION = (math.cos(math.pi / 5), math.sin(math.pi / 5))


@dataclass(frozen=True, eq=False)
class StudyProblem:
    name: str
    problem: DGProblem
    assemble: Callable
    L: DiffOp
    Lt: DiffOp
    f: Optional[Callable]          # right-hand side of L u = f, None for homogeneous problems
    operator_class: str
    has_dg_norm: bool


def _xy(points):
    points = np.atleast_2d(points)
    return points[:, 0], points[:, 1]


def laplace_solution():
    def u(points):
        x, y = _xy(points)
        return np.exp(x) * np.sin(y)

    def grad(points):
        x, y = _xy(points)
        return np.stack([np.exp(x) * np.sin(y), np.exp(x) * np.cos(y)], axis=1)

    return u, grad


def poisson_solution():
    def u(points):
        x, y = _xy(points)
        return np.sin(np.pi * x) * np.sin(np.pi * y)

    def grad(points):
        x, y = _xy(points)
        return np.pi * np.stack([np.cos(np.pi * x) * np.sin(np.pi * y),
                                 np.sin(np.pi * x) * np.cos(np.pi * y)], axis=1)

    def f(points):
        return 2.0 * np.pi ** 2 * u(points)

    return u, grad, f


def rotating_velocity(points):
    x, y = _xy(points)
    return np.stack([-np.sin(y), np.cos(x)], axis=1)


def advection_solution():
    def u(points):
        x, y = _xy(points)
        return np.sin(x) * np.sin(y)

    def grad(points):
        x, y = _xy(points)
        return np.stack([np.cos(x) * np.sin(y), np.sin(x) * np.cos(y)], axis=1)

    def f(points):
        return np.sum(rotating_velocity(points) * grad(points), axis=1)

    return u, grad, f


def build_problem(name: str, alpha: float = 4.0, omega: float = 4 * math.pi) -> StudyProblem:
    """
    The named study problem with its DG data, operator pair (L, L~) and exact solution.

    Raises:
        ValueError: for an unknown name
    """
    if name == "laplace":
        u, grad = laplace_solution()
        problem = sip_problem(g=u, alpha=alpha, exact=u, exact_grad=grad)
        return StudyProblem(name, problem, assemble_sip, problem.operator, problem.operator,
                            None, SECOND_ORDER, True)
    if name == "poisson":
        u, grad, f = poisson_solution()
        problem = sip_problem(g=u, f=f, alpha=alpha, exact=u, exact_grad=grad)
        return StudyProblem(name, problem, assemble_sip, problem.operator, problem.operator,
                            f, SECOND_ORDER, True)
    if name == "helmholtz":
        u, grad = plane_wave(omega, PLANE_WAVE_DIRECTION)
        g = impedance_datum(u, grad, omega, unit_square_normal)
        problem = helmholtz_problem(omega, g=g, exact=u, exact_grad=grad)
        L = problem.operator
        return StudyProblem(name, problem, assemble_helmholtz, L, leading_part(L, L.order),
                            None, SECOND_ORDER, False)
    if name == "advection":
        u, grad, f = advection_solution()
        problem = advection_problem(rotating_velocity, u_D=u, f=f, exact=u, exact_grad=grad)
        L = problem.operator
        return StudyProblem(name, problem, assemble_advection, L, leading_part(L, L.order),
                            f, FIRST_ORDER, False)
    raise ValueError(f"Unknown study problem '{name}'")
