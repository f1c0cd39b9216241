"""Shared fixtures: reference grids and a generator for fields with a
prescribed carrier mass and perturbation size."""

import math

import numpy as np
import pytest

from torusnls import Grid, SpectralField


@pytest.fixture
def grid16():
    return Grid(K=16, d=1)


@pytest.fixture
def grid2():
    return Grid(K=2, d=1)


@pytest.fixture
def grid2d():
    return Grid(K=2, d=2)


@pytest.fixture
def rng():
    return np.random.default_rng(20260817)


@pytest.fixture
def make_datum():
    """Factory for a random field with exact mass rho^2 near the carrier orbit.

    The non-carrier block is Gaussian scaled to the requested L2 size; the
    carrier coefficient absorbs the remaining mass as a positive real number.
    """

    def _make(grid, ell, rho, noise, seed=0):
        rng = np.random.default_rng(seed)
        c = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        carrier = grid.index_of(ell)
        c[carrier] = 0.0
        size = math.sqrt(float(np.sum(np.abs(c) ** 2)))
        if size > 0.0 and noise > 0.0:
            c *= noise / size
        else:
            c[...] = 0.0
        c[carrier] = math.sqrt(rho**2 - float(np.sum(np.abs(c) ** 2)))
        return SpectralField(grid, c)

    return _make
