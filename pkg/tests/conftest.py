"""Shared fixtures: sector geometries and small spaces."""

import math

import pytest

from geometry.sector import build_sector
from numerics.quadrature import QuadratureRule
from spaces.tensor_space import build_tensor_space


@pytest.fixture(scope='session')
def disk():
    """Unit disk with a crack along the positive x-axis."""
    return build_sector(2.0 * math.pi)


@pytest.fixture(scope='session')
def quarter():
    return build_sector(0.5 * math.pi)


@pytest.fixture(scope='session')
def rule():
    return QuadratureRule(6)


@pytest.fixture(scope='session')
def small_space(disk):
    """p=2, C1, two rings of eight angular cells: 4 x 13 functions."""
    return build_tensor_space(disk, 2, 1, 2, 8)
