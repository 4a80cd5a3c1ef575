import os
import tempfile

# keep test logs out of the working tree
os.environ.setdefault("TREFFTZ_DG_LOG_DIR", os.path.join(tempfile.gettempdir(), "trefftz_dg_test_logs"))

import numpy as np
import pytest

from trefftz_dg.geometry.mesh import interval_mesh, refine, unit_square_mesh


@pytest.fixture(scope="session")
def square2():
    return unit_square_mesh(2)


@pytest.fixture(scope="session")
def square2_refined(square2):
    return refine(square2)


@pytest.fixture(scope="session")
def unit_interval():
    return interval_mesh(0.0, 1.0, 4)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def interior_elements(mesh):
    """Elements without a boundary facet."""
    return [k for k in range(mesh.n_elements)
            if not any(mesh.facets[f].is_boundary for f in mesh.element_facets[k])]
