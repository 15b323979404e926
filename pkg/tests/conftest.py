import numpy as np
import pytest

from eikfld.grid import GridSpec, PointSet


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def random_node_sources(seed: int, grid: GridSpec, k: int) -> PointSet:
    """k distinct node sources; the standard seeded test configuration."""
    rng = rng_for(seed)
    idx = rng.choice(grid.num_nodes, size=k, replace=False)
    return PointSet.from_node_indices(grid, np.sort(idx))


@pytest.fixture(scope="session")
def grid64() -> GridSpec:
    return GridSpec(origin=(0.0, 0.0), spacing=1.0 / 64.0, counts=(64, 64))
