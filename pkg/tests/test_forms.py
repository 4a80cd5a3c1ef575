import numpy as np
import pytest

from trefftz_dg.analysis.errors import l2_error
from trefftz_dg.discretization.quadrature import quadrature_for
from trefftz_dg.discretization.basis import make_basis
from trefftz_dg.forms.advection import advection_problem, assemble_advection
from trefftz_dg.forms.base_form import HELMHOLTZ, DGProblem, solve_system
from trefftz_dg.forms.helmholtz import (HelmholtzForm, assemble_helmholtz, helmholtz_problem, impedance_datum,
                                        plane_wave, unit_square_normal)
from trefftz_dg.forms.sip import SipForm, assemble_sip, sip_problem
from trefftz_dg.discretization.diffop import laplace
from trefftz_dg.geometry.mesh import unit_square_mesh

from conftest import interior_elements


def relative_residual(system, x):
    A = system.A.to_dense()
    return np.linalg.norm(A @ x - system.l) / np.linalg.norm(system.l)


def test_problem_defaults_and_validation():
    problem = sip_problem(g=lambda x: np.zeros(len(x)))
    assert problem.alpha == 4.0
    helm = helmholtz_problem(2.0)
    assert (helm.alpha, helm.beta, helm.delta) == (0.5, 0.5, 0.5)
    assert helm.dtype is complex
    with pytest.raises(ValueError):
        sip_problem(alpha=-1.0)
    with pytest.raises(ValueError):
        DGProblem(kind=HELMHOLTZ, operator=laplace(), omega=1.0, field="real")
    with pytest.raises(ValueError):
        DGProblem(kind="wave", operator=laplace())
    with pytest.raises(ValueError):
        advection_problem(None)


def test_form_rejects_other_kinds(square2):
    with pytest.raises(ValueError):
        SipForm().assemble(square2, 1, helmholtz_problem(1.0))
    with pytest.raises(ValueError):
        assemble_sip(square2, -1, sip_problem())


def test_sip_is_symmetric_positive_definite(square2):
    system = assemble_sip(square2, 2, sip_problem(g=lambda x: np.zeros(len(x))))
    A = system.A.to_dense()
    assert system.N == 6 * square2.n_elements
    np.testing.assert_allclose(A, A.T, atol=1e-12 * np.abs(A).max())
    assert np.linalg.eigvalsh(A).min() > 0


@pytest.mark.parametrize("p", [0, 1, 2, 3])
def test_sip_reproduces_constants(square2, p):
    problem = sip_problem(g=lambda x: np.full(len(x), 3.0))
    system = assemble_sip(square2, p, problem)
    result = solve_system(system)
    assert l2_error(result.x, lambda x: np.full(len(x), 3.0), square2, p) <= 1e-10
    assert relative_residual(system, result.x) <= 1e-9


def test_sip_reproduces_quadratic_poisson_solution(square2):
    u = lambda x: x[:, 0] ** 2 + x[:, 0] * x[:, 1]
    problem = sip_problem(g=u, f=lambda x: np.full(len(x), -2.0))
    system = assemble_sip(square2, 2, problem)
    assert l2_error(solve_system(system).x, u, square2, 2) <= 1e-10


def test_block_pattern(square2):
    system = assemble_sip(square2, 1, sip_problem())
    expected = {(k, k) for k in range(square2.n_elements)}
    for facet_id in square2.interior_facet_ids:
        a, b = square2.facets[facet_id].adjacent_element_ids
        expected |= {(a, b), (b, a)}
    assert set(system.A.blocks) == expected


def test_threads_do_not_change_the_system(square2):
    problem = sip_problem(g=lambda x: np.sin(x[:, 0]))
    one = assemble_sip(square2, 2, problem, threads=1)
    four = assemble_sip(square2, 2, problem, threads=4)
    np.testing.assert_array_equal(one.A.to_dense(), four.A.to_dense())
    np.testing.assert_array_equal(one.l, four.l)


def test_helmholtz_is_complex_symmetric(square2):
    u, grad = plane_wave(3.0, (1.0, 0.0))
    problem = helmholtz_problem(3.0, g=impedance_datum(u, grad, 3.0, unit_square_normal))
    system = assemble_helmholtz(square2, 2, problem)
    A = system.A.to_dense()
    assert np.iscomplexobj(A)
    np.testing.assert_allclose(A, A.T, atol=1e-12 * np.abs(A).max())
    assert relative_residual(system, solve_system(system).x) <= 1e-9


def test_helmholtz_volume_term_matches_direct_quadrature(square2):
    omega = 2.5
    basis = make_basis(square2, 5, 2)
    rule = quadrature_for(square2, 5, 6)
    block, load = HelmholtzForm().volume_terms(basis, rule, helmholtz_problem(omega), 2)
    assert load is None
    values = basis.evaluate(rule.points)
    grads = basis.gradients(rule.points)
    i, j = 3, 4
    expected = sum(rule.weights @ (grads[d, i] * grads[d, j]) for d in range(2)) \
        - omega ** 2 * rule.weights @ (values[i] * values[j])
    assert block[i, j] == pytest.approx(expected, rel=1e-12)


def test_helmholtz_small_omega_volume_terms_approach_laplace(square2):
    basis = make_basis(square2, 0, 3)
    rule = quadrature_for(square2, 0, 8)
    helm, _ = HelmholtzForm().volume_terms(basis, rule, helmholtz_problem(1e-8), 3)
    lap, _ = SipForm().volume_terms(basis, rule, sip_problem(), 3)
    np.testing.assert_allclose(helm.real, lap, atol=1e-12)
    assert np.all(helm.imag == 0)


def test_helmholtz_plane_wave_converges():
    omega = 2.0
    u, grad = plane_wave(omega, (np.cos(np.pi / 5), np.sin(np.pi / 5)))
    problem = helmholtz_problem(omega, g=impedance_datum(u, grad, omega, unit_square_normal), exact=u)
    errors = []
    for n in (4, 8):
        mesh = unit_square_mesh(n)
        errors.append(l2_error(solve_system(assemble_helmholtz(mesh, 2, problem)).x, u, mesh, 2))
    assert errors[0] / errors[1] > 5.0


def test_advection_reproduces_linear_solution(square2):
    problem = advection_problem(lambda x: np.tile([1.0, 0.0], (len(x), 1)),
                                u_D=lambda x: x[:, 0], f=lambda x: np.ones(len(x)))
    for p in (1, 2):
        system = assemble_advection(square2, p, problem)
        result = solve_system(system)
        assert l2_error(result.x, lambda x: x[:, 0], square2, p) <= 1e-10
        assert relative_residual(system, result.x) <= 1e-9


def test_advection_divergence_identity():
    mesh = unit_square_mesh(4)
    b = np.array([1.0, 0.5])
    system = assemble_advection(mesh, 1, advection_problem(lambda x: np.tile(b, (len(x), 1))))
    constant = np.zeros(system.N)
    constant[system.offsets[:-1]] = 1.0
    rows = (system.A.to_dense() @ constant)[system.offsets[:-1]]
    # outflow flux through x = 1 and y = 1
    assert rows.sum() == pytest.approx(1.5, abs=1e-12)
    inner = interior_elements(mesh)
    assert inner
    np.testing.assert_allclose(rows[inner], 0.0, atol=1e-12)


def rotating(x):
    return np.column_stack([-np.sin(x[:, 1]), np.cos(x[:, 0])])


@pytest.mark.parametrize("p", [1, 3])
def test_helmholtz_and_advection_solutions_satisfy_the_system(square2, p):
    omega = 4 * np.pi
    u, grad = plane_wave(omega, (np.cos(np.pi / 5), np.sin(np.pi / 5)))
    helmholtz = assemble_helmholtz(square2, p, helmholtz_problem(
        omega, g=impedance_datum(u, grad, omega, unit_square_normal)))
    advection = assemble_advection(square2, p, advection_problem(
        rotating, u_D=lambda x: np.sin(x[:, 0]) * np.sin(x[:, 1]), f=lambda x: np.cos(x[:, 0] + x[:, 1])))
    for system in (helmholtz, advection):
        assert relative_residual(system, solve_system(system).x) <= 1e-9


def test_large_sip_system_is_solved_to_dense_accuracy():
    mesh = unit_square_mesh(9)
    u = lambda x: np.exp(x[:, 0]) * np.sin(x[:, 1])
    system = assemble_sip(mesh, 4, sip_problem(g=u))
    assert system.N > 2000
    direct = solve_system(system)
    assert direct.method == "sparse-lu"
    reference = solve_system(system, dense_threshold=system.N)
    assert reference.method == "dense-lu"
    np.testing.assert_allclose(direct.x, reference.x, rtol=0, atol=1e-8 * np.abs(reference.x).max())
