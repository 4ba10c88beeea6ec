import numpy as np
import pytest

from hfrep import adf, dt, eikonal, frep, grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture(scope="session", autouse=True)
def warm_numba_kernels():
    """Compile the jit kernels once on tiny inputs so timed tests measure
    the algorithms, not LLVM."""
    bbox = grid.square(1.0)
    circle = frep.Circle(0.0, 0.0, 0.5)
    g = frep.sample_frep(circle, (17, 17), bbox)
    seeds = dt.extract_seeds(g)
    dt.vector_dt(seeds)
    eikonal.fim_solve(seeds, eps=1e-9)
    tree = adf.build_quadtree(circle, 2, 4, bbox)
    adf.hfim_solve(tree, seeds, eps=1e-9)
    bbox3 = grid.square(1.0, dim=3)
    g3 = frep.sample_frep(frep.Sphere(0, 0, 0, 0.5), (9, 9, 9), bbox3)
    dt.vector_dt(dt.extract_seeds(g3))
