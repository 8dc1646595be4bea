import os
from pathlib import Path

# share one on-disk cache across test runs and CLI invocations
os.environ.setdefault(
    "NLSLAB_CACHE", str(Path(__file__).resolve().parent.parent / ".nlslab-cache"))

import numpy as np  # noqa: E402
import pytest  # noqa: E402

import nlslab as nl  # noqa: E402


@pytest.fixture(scope="session")
def grid512():
    return nl.make_grid(512, 30.0)


@pytest.fixture(scope="session")
def gs512(grid512):
    return nl.solve_ground_state(grid512)


@pytest.fixture(scope="session")
def pair512(gs512):
    return nl.build_linearized(gs512)


@pytest.fixture(scope="session")
def sd512(pair512):
    return nl.solve_unstable_mode(pair512)


@pytest.fixture(scope="session")
def consts512(sd512, gs512):
    return nl.calibrate_constants(sd512, gs512, seed=0)


@pytest.fixture(scope="session")
def grid1024():
    return nl.make_grid(1024, 30.0)


@pytest.fixture(scope="session")
def gs1024(grid1024):
    return nl.solve_ground_state(grid1024)


@pytest.fixture(scope="session")
def sd1024(gs1024):
    return nl.solve_unstable_mode(nl.build_linearized(gs1024))


@pytest.fixture(scope="session")
def consts1024(sd1024, gs1024):
    return nl.calibrate_constants(sd1024, gs1024, seed=0)


@pytest.fixture(scope="session")
def grid4096():
    return nl.make_grid(4096, 30.0)


@pytest.fixture(scope="session")
def gs4096(grid4096):
    return nl.solve_ground_state(grid4096)


@pytest.fixture(scope="session")
def pair4096(gs4096):
    return nl.build_linearized(gs4096)


@pytest.fixture(scope="session")
def sd4096(pair4096):
    return nl.solve_unstable_mode(pair4096)


def random_bump_field(rng: np.random.Generator, grid, n_bumps: int = 3,
                      complex_amps: bool = True) -> np.ndarray:
    """Smooth random test field: a few Gaussian bumps well inside the wall."""
    u = np.zeros(grid.n, dtype=complex)
    for _ in range(n_bumps):
        r0 = rng.uniform(0.0, 10.0)
        sig = rng.uniform(0.4, 2.0)
        amp = rng.normal() + (1j * rng.normal() if complex_amps else 0.0)
        u += amp * np.exp(-((grid.r - r0) ** 2) / sig**2)
    u[-1] = 0.0
    return u
