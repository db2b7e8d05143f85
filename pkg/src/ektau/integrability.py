"""Residuals of the structure system that fundamental data must satisfy.

For data (lam, u, H, p, A) on a chart in E(kappa, tau), with c = kappa - 4 tau^2:

    C1 : p_zbar  = (lam/2) (H_z + u A c)
    C2 : A_zbar  = (u lam / 2)(H + i tau)
    C3 : u_z     = -(H - i tau) A - (2 p / lam) conj(A)
    C4 : 4|A|^2 / lam = 1 - u^2
    C0 : A_z - (lam_z / lam) A = u p
    Gauss : K = det(S) + tau^2 + c u^2,  K = -(2/lam) d_z d_zbar log lam

Residuals are the differences LHS - RHS evaluated with the second-order
stencils of `fundata`.  Max/rms aggregation excludes the two outermost grid
rows and columns by default (one-sided stencil noise); pass
include_edges=True to keep them.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .fundata import FundamentalDataGrid, wirtinger_z, wirtinger_zbar
from .tolerances import TOL_ALG

EQUATIONS = ("C0", "C1", "C2", "C3", "C4", "Gauss")


def residual_fields(data: FundamentalDataGrid) -> dict[str, np.ndarray]:
    """Pointwise residual fields for C0..C4 and the Gauss equation."""
    if np.any(data.lam <= 0.0):
        raise PreconditionError("conformal factor must be positive")
    chart = data.chart
    params = data.params
    c = params.discriminant
    lam, u, H, p, A = data.lam, data.u, data.H, data.p, data.A
    Hz = wirtinger_z(H, chart)
    lam_z = wirtinger_z(lam, chart)
    r1 = wirtinger_zbar(p, chart) - 0.5 * lam * (Hz + u * A * c)
    r2 = wirtinger_zbar(A, chart) - 0.5 * u * lam * (H + 1j * params.tau)
    r3 = wirtinger_z(u, chart) + (H - 1j * params.tau) * A + (2.0 * p / lam) * np.conj(A)
    r4 = 4.0 * np.abs(A) ** 2 / lam - (1.0 - u**2)
    r0 = wirtinger_z(A, chart) - (lam_z / lam) * A - u * p
    return {
        "C0": r0,
        "C1": r1,
        "C2": r2,
        "C3": r3,
        "C4": r4,
        "Gauss": gauss_residual(data),
    }


def gaussian_curvature(data: FundamentalDataGrid) -> np.ndarray:
    """Intrinsic curvature K = -(2/lam) d_z d_zbar log lam via two stencil passes."""
    chart = data.chart
    log_lam = np.log(data.lam)
    mixed = wirtinger_zbar(wirtinger_z(log_lam, chart), chart)
    return -(2.0 / data.lam) * mixed.real


def shape_det(data: FundamentalDataGrid) -> np.ndarray:
    """Determinant of the shape operator, H^2 - 4|p|^2 / lam^2."""
    return data.H**2 - 4.0 * np.abs(data.p) ** 2 / data.lam**2


def principal_curvatures(data: FundamentalDataGrid) -> tuple[np.ndarray, np.ndarray]:
    """(k1, k2) = H +- 2|p|/lam with k1 >= k2 pointwise."""
    spread = 2.0 * np.abs(data.p) / data.lam
    return data.H + spread, data.H - spread


def gauss_residual(data: FundamentalDataGrid) -> np.ndarray:
    """K - det(S) - tau^2 - (kappa - 4 tau^2) u^2, pointwise."""
    params = data.params
    return (
        gaussian_curvature(data)
        - shape_det(data)
        - params.tau**2
        - params.discriminant * data.u**2
    )


@dataclass(frozen=True)
class ResidualRow:
    equation: str
    max_abs: float
    rms: float
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class ResidualReport:
    rows: tuple[ResidualRow, ...]
    include_edges: bool

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def row(self, equation: str) -> ResidualRow:
        for r in self.rows:
            if r.equation == equation:
                return r
        raise KeyError(equation)

    def max_abs(self, equation: str) -> float:
        return self.row(equation).max_abs

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["equation", "max_abs", "rms", "tolerance", "pass"])
            for r in self.rows:
                writer.writerow(
                    [
                        r.equation,
                        repr(r.max_abs),
                        repr(r.rms),
                        repr(r.tolerance),
                        "pass" if r.passed else "FAIL",
                    ]
                )


def interior(field: np.ndarray, include_edges: bool = False) -> np.ndarray:
    """Aggregation region: drop the outermost rows/columns unless included.

    Two layers are dropped when the grid allows it, one on very small grids.
    """
    if include_edges:
        return field
    nt, ns = field.shape
    trim_t = min(2, (nt - 2) // 2)
    trim_s = min(2, (ns - 2) // 2)
    return field[trim_t : nt - trim_t, trim_s : ns - trim_s]


def _stats(field: np.ndarray, include_edges: bool) -> tuple[float, float]:
    region = np.abs(interior(field, include_edges))
    return float(region.max()), float(np.sqrt(np.mean(region**2)))


def residuals(
    data: FundamentalDataGrid,
    include_edges: bool = False,
    fd_tol: float | None = None,
    alg_tol: float = TOL_ALG,
) -> ResidualReport:
    """Evaluate every residual and judge it against its tolerance.

    Derivative-bearing equations (C0..C3, Gauss) are judged at the chart's
    finite-difference tolerance (or fd_tol when given), the pointwise
    algebraic constraint C4 at alg_tol.
    """
    if fd_tol is None:
        fd_tol = data.chart.fd_tol
    fields = residual_fields(data)
    rows = []
    for eq in EQUATIONS:
        tol = alg_tol if eq == "C4" else fd_tol
        max_abs, rms = _stats(fields[eq], include_edges)
        rows.append(ResidualRow(eq, max_abs, rms, tol, max_abs <= tol))
    return ResidualReport(tuple(rows), include_edges)
