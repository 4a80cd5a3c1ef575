import numpy as np
import pytest

from trefftz_dg.discretization.basis import make_basis, multi_indices
from trefftz_dg.discretization.diffop import (DiffOp, Term, advection, apply_to_basis, builtin_operators,
                                              helmholtz, identity, laplace, leading_part, zero)


def test_laplace_of_quadratics(square2):
    basis = make_basis(square2, 2, 2)
    h = basis.scale
    values = laplace().apply(basis, square2.centroids[2][None, :])[:, 0]
    expected = np.zeros(basis.size)
    expected[multi_indices(2, 2).index((2, 0))] = -2 / h ** 2
    expected[multi_indices(2, 2).index((0, 2))] = -2 / h ** 2
    np.testing.assert_allclose(values, expected)


def test_helmholtz_adds_mass_term(square2):
    basis = make_basis(square2, 0, 1)
    point = square2.centroids[0]
    assert apply_to_basis(helmholtz(3.0), basis, 0, point) == pytest.approx(-9.0)
    with pytest.raises(ValueError):
        helmholtz(0.0)


def test_variable_coefficients(square2):
    b = lambda points: np.column_stack([points[:, 1], -points[:, 0]])
    op = advection(b)
    assert not op.has_constant_coefficients
    basis = make_basis(square2, 0, 1)
    point = np.array([0.2, 0.1])
    # phi = (x - c_x) / h
    j = multi_indices(2, 1).index((1, 0))
    assert apply_to_basis(op, basis, j, point) == pytest.approx(0.1 / basis.scale)


def test_apply_to_coefficients(square2):
    basis = make_basis(square2, 1, 2)
    coefficients = np.arange(basis.size, dtype=float)
    points = square2.centroids[1][None, :]
    value = laplace().apply_to_coefficients(basis, coefficients, points)
    assert value.shape == (1,)
    assert value[0] == pytest.approx(coefficients @ laplace().apply(basis, points)[:, 0])


def test_leading_parts():
    assert leading_part(laplace(), 2) is not None
    lap = laplace()
    assert leading_part(lap, 4) is lap
    lead = leading_part(helmholtz(2.0), 2)
    assert {t.multi_index: t.coefficient for t in lead.terms} == {(2, 0): 1.0, (0, 2): 1.0}
    lead = leading_part(advection(lambda x: np.ones_like(x)), 1)
    assert lead.has_constant_coefficients
    assert {t.multi_index: t.coefficient for t in lead.terms} == {(1, 0): 1.0, (0, 1): 1.0}
    with pytest.raises(ValueError):
        leading_part(laplace(), 1)


def test_invalid_operators(square2):
    with pytest.raises(ValueError):
        DiffOp(terms=(), dim=2)
    with pytest.raises(ValueError):
        DiffOp(terms=(Term((1, 0), 1.0), Term((1, 0), 2.0)), dim=2)
    with pytest.raises(ValueError):
        DiffOp(terms=(Term((1,), 1.0),), dim=2)
    with pytest.raises(IndexError):
        apply_to_basis(laplace(), make_basis(square2, 0, 1), 3, (0.5, 0.5))
    with pytest.raises(ValueError):
        laplace(1).apply(make_basis(square2, 0, 1), square2.centroids[:1])


def test_degenerate_operators(square2):
    basis = make_basis(square2, 0, 2)
    points = square2.centroids[:1]
    np.testing.assert_array_equal(zero().apply(basis, points), np.zeros((basis.size, 1)))
    np.testing.assert_allclose(identity().apply(basis, points), basis.evaluate(points))


def test_catalog():
    catalog = builtin_operators()
    assert set(catalog) == {"laplace", "helmholtz", "advection", "identity", "zero"}
    op, test_op = catalog["helmholtz"](4.0)
    assert op.order == 2 and test_op.order == 2
    op, test_op = catalog["laplace"]()
    assert test_op is op
    op, test_op = catalog["laplace"](1)
    assert op.dim == 1


def test_leading_part_is_idempotent():
    for op in (laplace(), helmholtz(4.0), advection(lambda x: np.column_stack([-np.sin(x[:, 1]), np.cos(x[:, 0])])),
               identity(), zero()):
        once = leading_part(op, 3)
        assert leading_part(once, 3) is once


@pytest.mark.parametrize("op", [laplace(), helmholtz(4.0),
                                advection(lambda x: np.column_stack([-np.sin(x[:, 1]), np.cos(x[:, 0])]))],
                         ids=["laplace", "helmholtz", "advection"])
def test_operators_are_linear(square2, rng, op):
    basis = make_basis(square2, 3, 4)
    points = rng.uniform(0.0, 1.0, size=(20, 2))
    for _ in range(10):
        c1, c2 = rng.standard_normal((2, basis.size))
        a, b = rng.standard_normal(2)
        combined = op.apply_to_coefficients(basis, a * c1 + b * c2, points)
        separate = a * op.apply_to_coefficients(basis, c1, points) + b * op.apply_to_coefficients(basis, c2, points)
        scale = np.abs(op.apply(basis, points)).max() * (abs(a) * np.abs(c1).sum() + abs(b) * np.abs(c2).sum())
        np.testing.assert_allclose(combined, separate, rtol=0, atol=1e-13 * scale)
    j = multi_indices(2, 4).index((2, 1))
    point = points[0]
    expected = op.apply(basis, point[None, :])[j, 0]
    assert apply_to_basis(op, basis, j, point) == pytest.approx(expected, rel=1e-13)
