import math

import numpy as np
import pytest

from trefftz_dg.analysis.dofs import FIRST_ORDER, SECOND_ORDER, block_nnz, dof_report, trefftz_dim
from trefftz_dg.analysis.errors import dg_norm_error, eoc, evaluate, l2_error, l2_projection
from trefftz_dg.discretization.diffop import laplace
from trefftz_dg.discretization.quadrature import quadrature_for
from trefftz_dg.embedding.trefftz import reduce_system, trefftz_embedding
from trefftz_dg.forms.sip import assemble_sip, sip_problem
from trefftz_dg.geometry.mesh import rectangle_mesh, unit_square_mesh


def smooth(x):
    return np.sin(2 * x[:, 0]) * np.cos(x[:, 1])


def test_projection_of_polynomial_is_exact(square2):
    u = lambda x: 1 + x[:, 0] ** 2 - 3 * x[:, 0] * x[:, 1]
    coefficients = l2_projection(u, square2, 2)
    assert l2_error(coefficients, u, square2, 2) <= 1e-12
    point = square2.centroids[4][None, :]
    assert evaluate(coefficients, square2, 2, 4, point)[0] == pytest.approx(u(point)[0])


def test_projection_error_is_positive(square2):
    assert l2_error(l2_projection(smooth, square2, 1), smooth, square2, 1) > 0


@pytest.mark.parametrize("p", [0, 1, 2])
def test_projection_error_rate(p):
    coarse, fine = unit_square_mesh(4), unit_square_mesh(8)
    e0 = l2_error(l2_projection(smooth, coarse, p), smooth, coarse, p)
    e1 = l2_error(l2_projection(smooth, fine, p), smooth, fine, p)
    assert e0 / e1 == pytest.approx(2 ** (p + 1), rel=0.2)


def test_complex_l2_error(square2):
    u = lambda x: np.exp(1j * x[:, 0])
    coefficients = l2_projection(u, square2, 1)
    assert np.iscomplexobj(coefficients)
    assert l2_error(coefficients, u, square2, 1) < l2_error(np.zeros_like(coefficients), u, square2, 1)
    assert l2_error(np.zeros(3 * square2.n_elements), lambda x: 1j * np.ones(len(x)), square2, 1) \
        == pytest.approx(1.0)


def test_l2_error_shape_check(square2):
    with pytest.raises(ValueError):
        l2_error(np.zeros(5), smooth, square2, 1)


def test_dg_norm_of_zero(square2):
    assert dg_norm_error(np.zeros(6 * square2.n_elements), None, square2, 2) == 0.0


def test_dg_norm_of_continuous_function_has_no_jump_part(square2):
    w = lambda x: x[:, 0] * (1 - x[:, 0]) * x[:, 1] * (1 - x[:, 1])

    def grad(x):
        X, Y = x[:, 0], x[:, 1]
        return np.column_stack([(1 - 2 * X) * Y * (1 - Y), X * (1 - X) * (1 - 2 * Y)])

    value = dg_norm_error(np.zeros(6 * square2.n_elements), w, square2, 2, exact_grad=grad)
    expected = 0.0
    for k in range(square2.n_elements):
        rule = quadrature_for(square2, k, 8)
        expected += rule.weights @ np.sum(grad(rule.points) ** 2, axis=1)
    assert value == pytest.approx(math.sqrt(expected), rel=1e-12)


def test_dg_norm_needs_gradient(square2):
    with pytest.raises(ValueError):
        dg_norm_error(np.zeros(6 * square2.n_elements), smooth, square2, 2)


def test_eoc():
    assert eoc([1.0, 0.25], [1.0, 0.5]) == [pytest.approx(2.0)]
    assert eoc([1.0, 1.0], [1.0, 0.5]) == [0.0]
    hs = [2.0 ** -k for k in range(5)]
    for rate in eoc([h ** 3 for h in hs], hs):
        assert rate == pytest.approx(3.0, abs=1e-12)
    assert eoc([1.0, 0.0, 0.0], [1.0, 0.5, 0.25]) == [None, None]


@pytest.mark.parametrize("errors, hs", [
    ([1.0], [1.0]),
    ([1.0, 0.5], [1.0]),
    ([1.0, 0.5], [0.5, 1.0]),
    ([1.0, 0.5], [1.0, 1.0]),
])
def test_eoc_rejects_bad_input(errors, hs):
    with pytest.raises(ValueError):
        eoc(errors, hs)


def test_dof_table_counts():
    mesh = rectangle_mesh(9, 3)
    counts = dof_report(mesh, 3)
    assert (counts.ndof_dg, counts.ndof_tdg1, counts.ndof_tdg2) == (540, 216, 378)
    assert counts.ndof_hdg == 93 * 4
    assert counts.nze_dg == 100 * (54 + 2 * 69)
    assert counts.nze_tdg2 == 49 * (54 + 2 * 69)
    assert counts.nze_hdg == 16 * (93 + 6 * 54)
    assert counts.reduced(FIRST_ORDER) == (216, 16 * (54 + 2 * 69))
    with pytest.raises(ValueError):
        counts.reduced("third_order")


def test_lowest_order_counts_coincide(square2):
    counts = dof_report(square2, 0)
    assert counts.ndof_dg == counts.ndof_tdg2 == counts.ndof_tdg1 == square2.n_elements
    assert counts.nze_dg == counts.nze_tdg2


def test_two_element_block_count():
    assert dof_report(unit_square_mesh(1), 1).nze_dg == 36


@pytest.mark.parametrize("p", [0, 1, 2, 3])
def test_dof_report_matches_assembly(square2, p):
    system = assemble_sip(square2, p, sip_problem())
    counts = dof_report(square2, p)
    assert counts.ndof_dg == system.N
    assert counts.nze_dg == system.A.structural_nnz()
    assert counts.nze_tdg2 <= counts.nze_dg


@pytest.mark.parametrize("p", [1, 3])
def test_block_count_matches_reduced_system(square2, p):
    system = assemble_sip(square2, p, sip_problem())
    emb = trefftz_embedding(square2, p, laplace(), laplace())
    reduced, _ = reduce_system(system, emb)
    assert block_nnz(square2, emb.kernel_dims) == reduced.structural_nnz() == dof_report(square2, p).nze_tdg2
    assert block_nnz(square2, [0] * square2.n_elements) == 0


def test_dof_report_rejects_bad_input(unit_interval, square2):
    with pytest.raises(ValueError):
        dof_report(unit_interval, 1)
    with pytest.raises(ValueError):
        dof_report(square2, -1)
    assert trefftz_dim(4, SECOND_ORDER) == 9
    with pytest.raises(ValueError):
        trefftz_dim(1, "zeroth")
