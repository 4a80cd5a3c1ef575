"""
Simplicial meshes of intervals (1D) and triangles (2D).

Meshes are immutable once built: all connectivity (facets, element/facet adjacency,
boundary classification) is computed in the constructor helpers and stored as numpy
arrays or tuples, so element loops may read them concurrently.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..utils.logger import get_logger

logger = get_logger(__name__)

INTERIOR = "interior"
BOUNDARY = "boundary"


@dataclass(frozen=True, eq=False)
class Facet:
    """An edge (2D) or a point (1D) of the mesh."""
    vertex_ids: tuple
    adjacent_element_ids: tuple  # ascending; the normal points out of the first one
    unit_normal: np.ndarray
    measure: float
    kind: str

    def __post_init__(self):
        expected = INTERIOR if len(self.adjacent_element_ids) == 2 else BOUNDARY
        if self.kind != expected:
            raise ValueError(f"Facet {self.vertex_ids} has {len(self.adjacent_element_ids)} neighbours but kind '{self.kind}'")

    @property
    def is_boundary(self) -> bool:
        return self.kind == BOUNDARY


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable simplicial mesh with facet connectivity."""
    dim: int
    vertices: np.ndarray            # (nv, dim)
    elements: np.ndarray            # (ne, dim+1), positively oriented
    facets: tuple                   # tuple[Facet, ...]
    element_facets: np.ndarray      # (ne, dim+1) facet ids, local facet k is opposite local vertex k
    boundary_facet_ids: frozenset
    measures: np.ndarray            # (ne,)
    diameters: np.ndarray           # (ne,)
    centroids: np.ndarray           # (ne, dim)
    parents: Optional[np.ndarray] = field(default=None)  # refinement lineage

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_facets(self) -> int:
        return len(self.facets)

    @property
    def h_max(self) -> float:
        return float(self.diameters.max())

    @property
    def interior_facet_ids(self) -> list:
        return [k for k, facet in enumerate(self.facets) if not facet.is_boundary]

    def element_vertices(self, element_id: int) -> np.ndarray:
        return self.vertices[self.elements[element_id]]

    def neighbours(self, element_id: int) -> list:
        """Elements sharing a facet with `element_id`, in facet order."""
        result = []
        for facet_id in self.element_facets[element_id]:
            for other in self.facets[facet_id].adjacent_element_ids:
                if other != element_id:
                    result.append(int(other))
        return result

    def to_text(self) -> str:
        """Plain-text dump: "dim nv ne", vertex lines, element lines (0-based)."""
        lines = [f"{self.dim} {self.n_vertices} {self.n_elements}"]
        lines += [" ".join(repr(float(c)) for c in v) for v in self.vertices]
        lines += [" ".join(str(int(i)) for i in e) for e in self.elements]
        return "\n".join(lines) + "\n"


def _signed_measures(vertices: np.ndarray, elements: np.ndarray) -> np.ndarray:
    coords = vertices[elements]
    if vertices.shape[1] == 1:
        return coords[:, 1, 0] - coords[:, 0, 0]
    e1 = coords[:, 1] - coords[:, 0]
    e2 = coords[:, 2] - coords[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def _diameters(vertices: np.ndarray, elements: np.ndarray) -> np.ndarray:
    coords = vertices[elements]
    n_local = elements.shape[1]
    diam = np.zeros(len(elements))
    for a in range(n_local):
        for b in range(a + 1, n_local):
            diam = np.maximum(diam, np.linalg.norm(coords[:, a] - coords[:, b], axis=1))
    return diam


def _local_facets(dim: int, element: np.ndarray) -> list:
    """Local facets of an element; facet k is opposite local vertex k, traversed counter-clockwise."""
    if dim == 1:
        return [(element[1],), (element[0],)]
    v0, v1, v2 = element
    return [(v1, v2), (v2, v0), (v0, v1)]


def build_mesh(vertices, elements, parents=None) -> Mesh:
    """
    Builds a Mesh from vertex coordinates and element connectivity.

    Facets are numbered in order of first appearance (element order, then local facet
    order), so the first adjacent element of every facet is the lower-indexed one and
    the stored normal points out of it.

    Raises:
        ValueError: on degenerate or negatively oriented elements, or facets shared by
            more than two elements.
    """
    vertices = np.array(vertices, dtype=float)
    if vertices.ndim == 1:
        vertices = vertices[:, None]
    elements = np.array(elements, dtype=np.int64)
    dim = vertices.shape[1]
    if dim not in (1, 2) or elements.shape[1] != dim + 1:
        raise ValueError(f"Unsupported mesh shape: vertices {vertices.shape}, elements {elements.shape}")

    signed = _signed_measures(vertices, elements)
    if np.any(signed <= 0.0):
        bad = int(np.argmin(signed))
        raise ValueError(f"Element {bad} has non-positive measure {signed[bad]}")

    centroids = vertices[elements].mean(axis=1)
    facet_index = {}
    facet_vertices = []
    facet_owners = []
    element_facets = np.zeros_like(elements)
    for element_id, element in enumerate(elements):
        for local, fverts in enumerate(_local_facets(dim, element)):
            key = tuple(sorted(int(v) for v in fverts))
            facet_id = facet_index.get(key)
            if facet_id is None:
                facet_id = len(facet_vertices)
                facet_index[key] = facet_id
                facet_vertices.append(tuple(int(v) for v in fverts))
                facet_owners.append([element_id])
            else:
                if len(facet_owners[facet_id]) >= 2:
                    raise ValueError(f"Facet {key} is shared by more than two elements")
                facet_owners[facet_id].append(element_id)
            element_facets[element_id, local] = facet_id

    facets = []
    boundary = set()
    for facet_id, (fverts, owners) in enumerate(zip(facet_vertices, facet_owners)):
        first = owners[0]
        if dim == 1:
            point = vertices[fverts[0], 0]
            normal = np.array([1.0 if point > centroids[first, 0] else -1.0])
            measure = 1.0
        else:
            # fverts is traversed counter-clockwise by its first owner
            tangent = vertices[fverts[1]] - vertices[fverts[0]]
            measure = float(np.linalg.norm(tangent))
            normal = np.array([tangent[1], -tangent[0]]) / measure
        kind = INTERIOR if len(owners) == 2 else BOUNDARY
        if kind == BOUNDARY:
            boundary.add(facet_id)
        normal.setflags(write=False)
        facets.append(Facet(
            vertex_ids=fverts,
            adjacent_element_ids=tuple(owners),
            unit_normal=normal,
            measure=measure,
            kind=kind,
        ))

    for array in (vertices, elements, element_facets, signed, centroids):
        array.setflags(write=False)
    diameters = _diameters(vertices, elements)
    diameters.setflags(write=False)
    if parents is not None:
        parents = np.asarray(parents, dtype=np.int64)
        parents.setflags(write=False)

    mesh = Mesh(
        dim=dim,
        vertices=vertices,
        elements=elements,
        facets=tuple(facets),
        element_facets=element_facets,
        boundary_facet_ids=frozenset(boundary),
        measures=signed,
        diameters=diameters,
        centroids=centroids,
        parents=parents,
    )
    logger.debug(f"Built {dim}D mesh: {mesh.n_vertices} vertices, {mesh.n_elements} elements, {mesh.n_facets} facets")
    return mesh


def rectangle_mesh(nx: int, ny: int, width: float = 1.0, height: float = 1.0) -> Mesh:
    """
    Structured triangulation of (0,width)x(0,height): nx*ny rectangles, each cut along
    its (0,0)-(1,1) diagonal into two counter-clockwise triangles.
    Vertex (i, j) has index j*(nx+1) + i.
    """
    if nx < 1 or ny < 1:
        raise ValueError(f"rectangle_mesh needs nx, ny >= 1, got ({nx}, {ny})")
    if width <= 0 or height <= 0:
        raise ValueError(f"rectangle_mesh needs a positive extent, got ({width}, {height})")
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    vertices = np.array([(x, y) for y in ys for x in xs])
    elements = []
    for j in range(ny):
        for i in range(nx):
            v00 = j * (nx + 1) + i
            v10 = v00 + 1
            v01 = v00 + nx + 1
            v11 = v01 + 1
            elements.append((v00, v10, v11))
            elements.append((v00, v11, v01))
    return build_mesh(vertices, elements)


def unit_square_mesh(n: int) -> Mesh:
    """Diagonal-split triangulation of the unit square with n x n cells; h_max = sqrt(2)/n."""
    if n < 1:
        raise ValueError(f"unit_square_mesh needs n >= 1, got {n}")
    return rectangle_mesh(n, n)


def interval_mesh(a: float, b: float, n: int) -> Mesh:
    """n equal elements on (a, b)."""
    if not a < b:
        raise ValueError(f"interval_mesh needs a < b, got a={a}, b={b}")
    if n < 1:
        raise ValueError(f"interval_mesh needs n >= 1, got {n}")
    vertices = np.linspace(a, b, n + 1)
    elements = [(k, k + 1) for k in range(n)]
    return build_mesh(vertices, elements)


def refine(mesh: Mesh) -> Mesh:
    """
    Uniform refinement: intervals are bisected, triangles are red-refined into four
    congruent children through their edge midpoints. Midpoint vertices are appended in
    element order, children of element k are 2k..2k+1 (1D) or 4k..4k+3 (2D).
    """
    vertices = [v for v in mesh.vertices]
    midpoint_ids = {}

    def midpoint(a, b):
        key = (min(a, b), max(a, b))
        if key not in midpoint_ids:
            midpoint_ids[key] = len(vertices)
            vertices.append(0.5 * (mesh.vertices[a] + mesh.vertices[b]))
        return midpoint_ids[key]

    children = []
    parents = []
    for element_id, element in enumerate(mesh.elements):
        element = [int(v) for v in element]
        if mesh.dim == 1:
            m = midpoint(*element)
            new = [(element[0], m), (m, element[1])]
        else:
            v0, v1, v2 = element
            m01, m12, m20 = midpoint(v0, v1), midpoint(v1, v2), midpoint(v2, v0)
            new = [(v0, m01, m20), (m01, v1, m12), (m20, m12, v2), (m01, m12, m20)]
        children.extend(new)
        parents.extend([element_id] * len(new))

    refined = build_mesh(np.array(vertices), children, parents=parents)
    logger.debug(f"Refined mesh: {mesh.n_elements} -> {refined.n_elements} elements, h_max {mesh.h_max:.4g} -> {refined.h_max:.4g}")
    return refined


def facet_trace_pair(facet_id: int, mesh: Mesh):
    """
    Adjacency and orientation of a facet for jump/average evaluation.

    Returns:
        (element_plus, element_minus or None, normal) where normal is the unit normal
        pointing out of element_plus. With v+ and v- the traces,
        jump(v) = (v+ - v-) * normal and avg(v) = (v+ + v-) / 2; on boundary facets
        jump(v) = v+ * normal.

    Raises:
        ValueError: if facet_id is not a facet of the mesh.
    """
    if not 0 <= facet_id < mesh.n_facets:
        raise ValueError(f"Unknown facet id {facet_id} (mesh has {mesh.n_facets} facets)")
    facet = mesh.facets[facet_id]
    plus = facet.adjacent_element_ids[0]
    minus = facet.adjacent_element_ids[1] if len(facet.adjacent_element_ids) == 2 else None
    return plus, minus, facet.unit_normal


def write_mesh(mesh: Mesh, path: str):
    """Writes the plain-text debugging dump of a mesh."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(mesh.to_text())
    logger.info(f"Mesh written to {path}")
