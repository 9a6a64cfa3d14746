import numpy as np
import pytest
from hypothesis import settings

from anisolevy.mesh import build_grid
from anisolevy.model import preset

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def aniso1d():
    return preset("anisotropic-1d")


@pytest.fixture(scope="session")
def aniso2d():
    return preset("anisotropic-2d")


@pytest.fixture(scope="session")
def quasi():
    return preset("quasilinear-case1")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def bump(grid):
    def f(*xs):
        out = np.ones_like(xs[0])
        for x in xs:
            out = out * np.sin(np.pi * x)
        return out

    return grid.sample(f)


@pytest.fixture
def grid1d():
    return build_grid(1, 32)


def noise_free(spec):
    """Same drift, every noise channel switched off."""
    from dataclasses import replace

    from anisolevy.model import GammaFamily, HFamily, LevyMeasureSpec

    return replace(
        spec, zeta=(0.0,) * spec.d, h=HFamily(kind="zero"), gamma=GammaFamily(kind="zero"),
        nu=LevyMeasureSpec(c=0.0, lambda_large=0.0),
    )


def path_with_jumps(spec, count, T=0.2, n_steps=40, seed=0):
    """First path index whose large-jump count equals ``count``."""
    from anisolevy.noise import sample_path

    for idx in range(10_000):
        path = sample_path(spec, T, n_steps, seed, idx)
        if len(path.large_jump_nodes) == count:
            return path
    raise AssertionError(f"no path with {count} large jumps")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
