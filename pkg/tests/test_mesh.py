import math

import numpy as np
import pytest

from trefftz_dg.geometry.mesh import (BOUNDARY, INTERIOR, build_mesh, facet_trace_pair, interval_mesh,
                                      rectangle_mesh, refine, unit_square_mesh, write_mesh)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_unit_square_counts(n):
    mesh = unit_square_mesh(n)
    assert mesh.dim == 2
    assert mesh.n_elements == 2 * n * n
    assert mesh.n_vertices == (n + 1) ** 2
    assert mesh.n_facets == 3 * n * n + 2 * n
    assert len(mesh.boundary_facet_ids) == 4 * n
    assert len(mesh.interior_facet_ids) == 3 * n * n - 2 * n
    assert mesh.h_max == pytest.approx(math.sqrt(2) / n)
    assert mesh.measures.sum() == pytest.approx(1.0)


def test_facet_kinds_and_owners(square2):
    for facet_id, facet in enumerate(square2.facets):
        owners = facet.adjacent_element_ids
        if facet_id in square2.boundary_facet_ids:
            assert facet.kind == BOUNDARY and len(owners) == 1
        else:
            assert facet.kind == INTERIOR and len(owners) == 2
            assert owners[0] < owners[1]


def test_normals_point_out_of_plus_element(square2_refined):
    mesh = square2_refined
    for facet_id, facet in enumerate(mesh.facets):
        plus, minus, normal = facet_trace_pair(facet_id, mesh)
        midpoint = mesh.vertices[list(facet.vertex_ids)].mean(axis=0)
        assert np.linalg.norm(normal) == pytest.approx(1.0)
        assert normal @ (midpoint - mesh.centroids[plus]) > 0
        if minus is not None:
            assert normal @ (midpoint - mesh.centroids[minus]) < 0


def test_element_facets_are_opposite_their_vertex(square2):
    for k, element in enumerate(square2.elements):
        for local, facet_id in enumerate(square2.element_facets[k]):
            assert element[local] not in square2.facets[facet_id].vertex_ids


def test_neighbours(square2):
    for k in range(square2.n_elements):
        for other in square2.neighbours(k):
            assert k in square2.neighbours(other)


def test_refine_2d(square2):
    fine = refine(square2)
    assert fine.n_elements == 4 * square2.n_elements
    assert fine.h_max == pytest.approx(square2.h_max / 2)
    assert fine.measures.sum() == pytest.approx(1.0)
    np.testing.assert_array_equal(fine.parents, np.repeat(np.arange(square2.n_elements), 4))
    assert np.all(fine.measures > 0)


def test_interval_mesh_and_refine(unit_interval):
    mesh = unit_interval
    assert mesh.dim == 1
    assert mesh.n_facets == 5
    assert len(mesh.boundary_facet_ids) == 2
    for facet_id in mesh.boundary_facet_ids:
        facet = mesh.facets[facet_id]
        x = mesh.vertices[facet.vertex_ids[0], 0]
        assert facet.unit_normal[0] == (-1.0 if x == 0.0 else 1.0)
    fine = refine(mesh)
    assert fine.n_elements == 8
    assert fine.h_max == pytest.approx(0.125)


def test_rectangle_mesh_with_54_elements():
    mesh = rectangle_mesh(9, 3)
    assert mesh.n_elements == 54
    assert mesh.n_facets == 93
    assert len(mesh.interior_facet_ids) == 69


def test_clockwise_element_is_rejected():
    with pytest.raises(ValueError):
        build_mesh([(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)], [(0, 1, 2)])


def test_facet_with_three_owners_is_rejected():
    vertices = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, 2.0)]
    with pytest.raises(ValueError, match="more than two"):
        build_mesh(vertices, [(0, 1, 2), (1, 3, 2), (1, 4, 2)])


def test_unknown_facet_id(square2):
    with pytest.raises(ValueError):
        facet_trace_pair(square2.n_facets, square2)


def test_invalid_generators():
    with pytest.raises(ValueError):
        unit_square_mesh(0)
    with pytest.raises(ValueError):
        interval_mesh(1.0, 0.0, 2)


def test_mesh_is_read_only(square2):
    with pytest.raises(ValueError):
        square2.vertices[0, 0] = 5.0


def test_text_dump(square2, tmp_path):
    text = square2.to_text()
    lines = text.splitlines()
    assert lines[0] == "2 9 8"
    assert len(lines) == 1 + 9 + 8
    path = tmp_path / "mesh.txt"
    write_mesh(square2, str(path))
    assert path.read_text(encoding="utf-8") == text
