"""Shared builders for the test suite.

Datasets used across modules:

* canonical grids (totally geodesic slice, vertical geodesic cylinder),
* an exact constant family of vertical cylinders in twisted bundles
  (tau != 0) that satisfies every structure equation to machine precision,
* invariant profiles integrated from seeds and lifted to grids.
"""

import numpy as np
import pytest

from ektau import (
    Chart,
    FundamentalDataGrid,
    ProfileState,
    SpaceParams,
    integrate_profile,
    lift_profile,
    synthesize_canonical,
)


def bundle_cylinder(kappa, tau, H, scale=1.0, n=17, half=1.0):
    """Constant data of a vertical cylinder over a geodesic, tau != 0.

    With A = i*scale on the imaginary axis, u = 0, lam = 4*scale^2 and
    p = lam*(H - i*tau)/2 every structure residual vanishes identically,
    for any admissible (kappa, tau) and any constant H.
    """
    chart = Chart(-half, half, -half, half, n, n)
    a2 = 4.0 * scale * scale
    shape = chart.shape
    return FundamentalDataGrid(
        SpaceParams(kappa, tau),
        chart,
        np.full(shape, a2),
        np.zeros(shape),
        np.full(shape, float(H)),
        np.full(shape, 0.5 * a2 * complex(H, -tau)),
        np.full(shape, complex(0.0, scale)),
    )


def minimal_helicoid_profile(span=(0.0, 1.0), step=1e-3):
    """Minimal (H = 0) helicoidal profile in the hyperbolic product space."""
    params = SpaceParams(-1.0, 0.0)
    seed = ProfileState(span[0], 2.0, 0.0, complex(-0.5, -0.5), complex(-0.5, -0.5))
    return integrate_profile(seed, 0.0, span, step, params)


def cmc_helicoid_profile(span=(0.0, 1.0), step=1e-3):
    """Constant mean curvature (H = 1) helicoidal profile, product space."""
    params = SpaceParams(-1.0, 0.0)
    seed = ProfileState(span[0], 2.0, 0.0, complex(-0.5, -0.5), complex(1.0, 0.0))
    return integrate_profile(seed, 1.0, span, step, params)


def bundle_helicoid_profile(span=(0.0, 1.0), step=1e-3):
    """Helicoidal profile with tau != 0 (kappa = -1, tau = 0.5, H = 1)."""
    params = SpaceParams(-1.0, 0.5)
    seed = ProfileState(span[0], 4.0, 0.0, complex(1.0, 0.0), complex(1.0, 1.0))
    return integrate_profile(seed, 1.0, span, step, params)


@pytest.fixture(scope="session")
def minimal_lift():
    """Minimal helicoid lifted to a 65 x 201 grid that passes the residuals."""
    sol = minimal_helicoid_profile()
    return lift_profile(sol, 65, (0.0, 1.0), stride=5)


@pytest.fixture(scope="session")
def cmc_lift():
    sol = cmc_helicoid_profile()
    return lift_profile(sol, 65, (0.0, 1.0), stride=5)


@pytest.fixture(scope="session")
def bundle_lift():
    sol = bundle_helicoid_profile()
    return lift_profile(sol, 33, (0.0, 1.0), stride=10)


@pytest.fixture
def spherical_slice():
    chart = Chart(-1.0, 1.0, -1.0, 1.0, 33, 33)
    return synthesize_canonical("slice", SpaceParams(1.0, 0.0), chart)


@pytest.fixture
def hyperbolic_slice():
    chart = Chart(-1.0, 1.0, -1.0, 1.0, 33, 33)
    return synthesize_canonical("slice", SpaceParams(-1.0, 0.0), chart)


@pytest.fixture
def geodesic_cylinder():
    chart = Chart(-1.0, 1.0, -1.0, 1.0, 33, 33)
    return synthesize_canonical("cylinder", SpaceParams(-1.0, 0.0), chart)


def fields_equal(a: FundamentalDataGrid, b: FundamentalDataGrid) -> bool:
    """Bitwise equality of the five field arrays."""
    return (
        np.array_equal(a.lam, b.lam)
        and np.array_equal(a.u, b.u)
        and np.array_equal(a.H, b.H)
        and np.array_equal(a.p, b.p)
        and np.array_equal(a.A, b.A)
    )


def fields_deviation(a: FundamentalDataGrid, b: FundamentalDataGrid) -> float:
    """Worst componentwise deviation between two data sets."""
    return max(
        float(np.max(np.abs(a.lam - b.lam))),
        float(np.max(np.abs(a.u - b.u))),
        float(np.max(np.abs(a.H - b.H))),
        float(np.max(np.abs(a.p - b.p))),
        float(np.max(np.abs(a.A - b.A))),
    )
