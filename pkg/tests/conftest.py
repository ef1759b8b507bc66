import numpy as np
import pytest

from hopflab.boundary import BoundarySpec, sample_boundary
from hopflab.energy import minimize_admissible
from hopflab.mesh import build_disk_mesh

_MESHES = {}


@pytest.fixture(scope="session")
def disk():
    """Memoized mesh factory shared across the whole session."""
    def get(rings, sectors):
        key = (rings, sectors)
        if key not in _MESHES:
            _MESHES[key] = build_disk_mesh(rings, sectors)
        return _MESHES[key]
    return get


def _fig1_minimizer(mesh):
    bv = sample_boundary(BoundarySpec.from_gallery("fig1"), mesh)
    return minimize_admissible(bv, mesh)


@pytest.fixture(scope="session")
def fig1_min_24(disk):
    return _fig1_minimizer(disk(24, 8))


@pytest.fixture(scope="session")
def fig1_min_48(disk):
    import time
    t0 = time.perf_counter()
    res = _fig1_minimizer(disk(48, 8))
    res.wall_time = time.perf_counter() - t0
    return res


def interior_grid(values: np.ndarray, nx: int = 20, ny: int = 20):
    xs = np.linspace(values.real.min(), values.real.max(), nx + 2)[1:-1]
    ys = np.linspace(values.imag.min(), values.imag.max(), ny + 2)[1:-1]
    return [complex(x, y) for y in ys for x in xs]
