"""Shared numerical tolerances.

Two regimes are used throughout: pointwise algebraic identities are judged
at the fixed TOL_ALG, while identities that involve finite-difference
derivatives are judged at a grid-dependent tolerance matching the
second-order stencils.
"""

TOL_ALG = 1e-10

TOL_EMBED = 1e-8


def fd_tolerance(hs: float, ht: float) -> float:
    """Tolerance for residuals that contain second-order FD derivatives."""
    return 10.0 * max(hs, ht) ** 2


def defect_tolerance(step: float, span: float) -> float:
    """Drift budget for conserved quantities of the fixed-step RK4 profile flow."""
    return 100.0 * step**4 * abs(span)
