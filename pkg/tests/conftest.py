import numpy as np
import pytest

from gnatural import (MANIFOLD_NAMES, PRESET_NAMES, TangentPoint, make_manifold,
                      preset)


@pytest.fixture(scope="session")
def manifolds():
    return {name: make_manifold(name) for name in MANIFOLD_NAMES}


@pytest.fixture(scope="session")
def presets():
    return {name: preset(name) for name in PRESET_NAMES}


def draw_point(rng, M):
    lo, hi = M.sample_box
    return rng.uniform(lo, hi)


def draw_site(rng, M, radius=None):
    """Random tangent point with |u| (in the g-norm) equal to ``radius``."""
    x = draw_point(rng, M)
    if radius is None:
        radius = rng.uniform(0.0, 2.0)
    if radius == 0.0:
        return TangentPoint.at(M, x, np.zeros(M.dim))
    g = M.metric_at(x)
    w = rng.standard_normal(M.dim)
    w /= np.sqrt(float(w @ g @ w))
    return TangentPoint.at(M, x, radius * w)


def rel_err(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.abs(a - b).max() / max(1.0, float(np.abs(b).max())))
