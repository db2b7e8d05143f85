"""Surface reconstruction in product spaces from fundamental data.

For tau = 0 the target space is M^2(kappa) x R, modeled on the quadric
<x, x> = 1/kappa inside flat 4-space (round sphere in Euclidean 4-space for
kappa > 0, upper hyperboloid sheet in Minkowski 4-space for kappa < 0) times
a height axis stored in the last coordinate slot.  The surface is rebuilt by
integrating the first-order frame system for (psi, psi_s, psi_t, eta): the
tangential part uses the Christoffel symbols of lam (ds^2 + dt^2) and the
second-fundamental-form coefficients

    b11 = lam H + 2 Re p,  b22 = lam H - 2 Re p,  b12 = -2 Im p,

and the flat-space correction -kappa <X_base, Y_base> (psi_base, 0) accounts
for the curvature of the model quadric.  The mesh is re-measured by finite
differences so round trips validate both directions.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import DefectError, PreconditionError
from .fundata import Chart, FundamentalDataGrid, _grid_gradients, _readonly
from .integrability import residuals
from .spaces import SpaceParams
from .tolerances import TOL_ALG, TOL_EMBED

EUCLIDEAN4 = "Euclidean4"
MINKOWSKI4 = "Minkowski4"

PROJECTIONS = ("PoincareDiskXR", "SphereXR_unrolled", "Raw4D_csv")

_BASE = np.array([1.0, 1.0, 1.0, 0.0])


def _signature(kappa: float) -> np.ndarray:
    return np.array([1.0 if kappa > 0 else -1.0, 1.0, 1.0, 1.0])


@dataclass(frozen=True)
class SurfaceMesh:
    """Frame-integrated surface: vertex positions in the flat 4-space model."""

    params: SpaceParams
    chart: Chart
    vertices: np.ndarray
    signature: str
    holonomy_defect: float
    max_quadric_drift: float

    def __post_init__(self) -> None:
        v = np.asarray(self.vertices, dtype=float)
        if v.shape != (self.chart.nt, self.chart.ns, 4):
            raise PreconditionError("vertex array does not match the chart")
        object.__setattr__(self, "vertices", _readonly(v, float))

    def quadric_defect(self) -> float:
        """max |<x_base, x_base> - 1/kappa| over all vertices."""
        sig = _signature(self.params.kappa)
        q = np.einsum("...i,...i->...", self.vertices * (sig * _BASE), self.vertices)
        return float(np.max(np.abs(q - 1.0 / self.params.kappa)))


@dataclass(frozen=True)
class MeasuredData:
    """Geometry re-measured from a mesh on the chart interior."""

    params: SpaceParams
    chart: Chart
    lam: np.ndarray
    H: np.ndarray
    u: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    conformality_defect: float


def integrate_height(data: FundamentalDataGrid) -> np.ndarray:
    """Height function h with h_s = 2 Re A and h_t = -2 Im A, h(corner) = 0.

    The cross-derivative closedness of (2 Re A, -2 Im A) is checked first;
    quadrature runs along the bottom row and then up the columns.
    """
    if data.params.tau != 0.0:
        raise PreconditionError("height integration requires tau = 0")
    hs_field = 2.0 * data.A.real
    ht_field = -2.0 * data.A.imag
    closed = _grid_gradients(hs_field, data.chart)[1] - _grid_gradients(ht_field, data.chart)[0]
    defect = float(np.max(np.abs(closed)))
    if defect > data.chart.fd_tol:
        raise PreconditionError(
            f"height form is not closed: defect {defect:.3e} > {data.chart.fd_tol:.3e}"
        )
    s = data.chart.s_values()
    t = data.chart.t_values()
    row0 = cumulative_trapezoid(hs_field[0, :], s, initial=0.0)
    cols = cumulative_trapezoid(ht_field, t, axis=0, initial=0.0)
    return row0[None, :] + cols


def _corner_frame(data: FundamentalDataGrid) -> np.ndarray:
    """Initial (psi, psi_s, psi_t, eta) rows at the chart corner.

    The vertical components of the frame are dictated by the data: psi_s and
    psi_t carry the height slopes 2 Re A and -2 Im A, eta carries u.  The
    remaining rotation about the vertical is pinned deterministically.
    """
    lam0 = float(data.lam[0, 0])
    u0 = float(data.u[0, 0])
    A0 = complex(data.A[0, 0])
    root = np.sqrt(lam0)
    w = np.array([2.0 * A0.real / root, -2.0 * A0.imag / root, u0])
    w = w / np.linalg.norm(w)
    pick = int(np.argmin(np.abs(w)))
    axis = np.zeros(3)
    axis[pick] = 1.0
    r1 = axis - np.dot(axis, w) * w
    r1 = r1 / np.linalg.norm(r1)
    r2 = np.cross(w, r1)
    rot = np.vstack([r1, r2, w])
    kappa = data.params.kappa
    state = np.zeros((4, 4))
    state[0, 0] = 1.0 / np.sqrt(abs(kappa))
    # columns of rot are the frame vectors in the tangent basis at the corner
    # (slots 1, 2 of 4-space plus the height slot).
    for rowidx, (column, scale) in enumerate(((0, root), (1, root), (2, 1.0)), start=1):
        state[rowidx, 1] = scale * rot[0, column]
        state[rowidx, 2] = scale * rot[1, column]
        state[rowidx, 3] = scale * rot[2, column]
    return state


def _coefficients(data: FundamentalDataGrid) -> dict[str, np.ndarray]:
    lam = data.lam
    lam_s, lam_t = _grid_gradients(lam, data.chart)
    return {
        "lam": lam,
        "a": lam_s / (2.0 * lam),
        "b": lam_t / (2.0 * lam),
        "b11": lam * data.H + 2.0 * data.p.real,
        "b22": lam * data.H - 2.0 * data.p.real,
        "b12": -2.0 * data.p.imag,
    }


def _rhs(state: np.ndarray, coeff: dict[str, np.ndarray], kappa: float,
         wbase: np.ndarray, axis: str) -> np.ndarray:
    psi = state[..., 0, :]
    X = state[..., 1, :]
    Y = state[..., 2, :]
    eta = state[..., 3, :]
    P = psi * _BASE
    q = lambda u, v: np.einsum("...i,...i->...", u * wbase, v)[..., None]
    col = lambda name: coeff[name][..., None]
    lam, a, b = col("lam"), col("a"), col("b")
    b11, b12, b22 = col("b11"), col("b12"), col("b22")
    out = np.empty_like(state)
    if axis == "s":
        out[..., 0, :] = X
        out[..., 1, :] = a * X - b * Y + b11 * eta - kappa * q(X, X) * P
        out[..., 2, :] = b * X + a * Y + b12 * eta - kappa * q(X, Y) * P
        out[..., 3, :] = -(b11 * X + b12 * Y) / lam - kappa * q(eta, X) * P
    else:
        out[..., 0, :] = Y
        out[..., 1, :] = b * X + a * Y + b12 * eta - kappa * q(X, Y) * P
        out[..., 2, :] = -a * X + b * Y + b22 * eta - kappa * q(Y, Y) * P
        out[..., 3, :] = -(b12 * X + b22 * Y) / lam - kappa * q(eta, Y) * P
    return out


def _rk4_step(state, h, c0, cmid, c1, kappa, wbase, axis):
    k1 = _rhs(state, c0, kappa, wbase, axis)
    k2 = _rhs(state + 0.5 * h * k1, cmid, kappa, wbase, axis)
    k3 = _rhs(state + 0.5 * h * k2, cmid, kappa, wbase, axis)
    k4 = _rhs(state + h * k3, c1, kappa, wbase, axis)
    return state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _project(state, kappa, wbase, budget):
    """Renormalize positions back onto the model quadric; return the drift.

    The pre-projection drift of a single step shrinks as h^5 under
    refinement, so the rejection budget scales the same way with a floor of
    10x the embedding tolerance for fine grids; a genuinely diverging
    integration blows past either limit immediately.
    """
    psi = state[..., 0, :]
    q = np.einsum("...i,...i->...", psi * wbase, psi)
    drift = float(np.max(np.abs(q - 1.0 / kappa)))
    if drift > budget:
        raise DefectError(
            f"quadric drift {drift:.3e} exceeds {budget:.3e} before projection"
        )
    factor = np.sqrt((1.0 / kappa) / q)[..., None]
    state[..., 0, :] = psi * (factor * _BASE + (1.0 - _BASE))
    return drift


def _pair(coeff: dict[str, np.ndarray], take) -> dict[str, np.ndarray]:
    return {k: take(v) for k, v in coeff.items()}


def _mid(c0: dict[str, np.ndarray], c1: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {k: 0.5 * (c0[k] + c1[k]) for k in c0}


def reconstruct_surface(
    data: FundamentalDataGrid,
    fd_tol: float | None = None,
    tol_embed: float = TOL_EMBED,
) -> SurfaceMesh:
    """Frame-integrate fundamental data into a mesh in the 4-space model.

    The data must belong to a product space (tau = 0), pass the structure
    residuals, and keep u^2 away from 1 (a constant u = +/-1 horizontal
    surface is accepted as-is).  Integration runs along the bottom row and
    then up all columns at once; positions are projected back to the model
    quadric after every step and the worst pre-projection drift is recorded.
    The holonomy defect compares the far corner reached via the first column
    and the top row against the column sweep.
    """
    params, chart = data.params, data.chart
    if params.tau != 0.0:
        raise PreconditionError("reconstruction requires tau = 0")
    report = residuals(data, fd_tol=fd_tol)
    if not report.passed:
        worst = max(report.rows, key=lambda r: r.max_abs / r.tolerance)
        raise PreconditionError(
            f"data fail the structure residuals ({worst.equation}: "
            f"{worst.max_abs:.3e} > {worst.tolerance:.3e})"
        )
    usq = float(np.max(data.u**2))
    if usq > 1.0 - TOL_ALG:
        flat = float(np.min(np.abs(data.u))) >= 1.0 - TOL_ALG
        if not (flat and float(np.max(np.abs(data.A))) <= TOL_ALG and np.ptp(data.u) <= TOL_ALG):
            raise PreconditionError("u reaches +/-1 inside the chart; not supported")
    kappa = params.kappa
    sig = _signature(kappa)
    wbase = sig * _BASE
    coeff = _coefficients(data)
    nt, ns = chart.shape
    hs, ht = chart.hs, chart.ht

    drift_max = 0.0

    def advance(state, h, c0, c1, axis):
        nonlocal drift_max
        new = _rk4_step(state, h, c0, _mid(c0, c1), c1, kappa, wbase, axis)
        budget = max(10.0 * tol_embed, 100.0 * h**5)
        drift_max = max(drift_max, _project(new, kappa, wbase, budget))
        return new

    # bottom row
    row_states = np.empty((ns, 4, 4))
    state = _corner_frame(data)
    row_states[0] = state
    for i in range(ns - 1):
        c0 = _pair(coeff, lambda v: v[0, i])
        c1 = _pair(coeff, lambda v: v[0, i + 1])
        state = advance(state, hs, c0, c1, "s")
        row_states[i + 1] = state

    # all columns at once
    vertices = np.empty((nt, ns, 4))
    vertices[0] = row_states[:, 0, :]
    col_states = row_states
    for j in range(nt - 1):
        c0 = _pair(coeff, lambda v: v[j, :])
        c1 = _pair(coeff, lambda v: v[j + 1, :])
        col_states = advance(col_states, ht, c0, c1, "t")
        vertices[j + 1] = col_states[:, 0, :]

    # holonomy: far corner via first column then top row
    state = col_states[0]
    for i in range(ns - 1):
        c0 = _pair(coeff, lambda v: v[nt - 1, i])
        c1 = _pair(coeff, lambda v: v[nt - 1, i + 1])
        state = advance(state[None, ...], hs, c0, c1, "s")[0]
    holonomy = float(np.linalg.norm(state[0, :] - vertices[-1, -1, :]))

    return SurfaceMesh(
        params, chart, vertices,
        EUCLIDEAN4 if kappa > 0 else MINKOWSKI4,
        holonomy, drift_max,
    )


def measure_mesh(mesh: SurfaceMesh) -> MeasuredData:
    """Re-measure conformal factor, normal, and curvatures on the interior.

    Derivatives are central differences; the normal is the vector orthogonal
    (in the ambient inner product) to the quadric normal and both tangents,
    oriented by the sign of the 4x4 frame determinant.
    """
    V = mesh.vertices
    chart = mesh.chart
    kappa = mesh.params.kappa
    sig = _signature(kappa)
    wbase = sig * _BASE
    hs, ht = chart.hs, chart.ht
    Vs = (V[1:-1, 2:] - V[1:-1, :-2]) / (2.0 * hs)
    Vt = (V[2:, 1:-1] - V[:-2, 1:-1]) / (2.0 * ht)
    Vss = (V[1:-1, 2:] - 2.0 * V[1:-1, 1:-1] + V[1:-1, :-2]) / hs**2
    Vtt = (V[2:, 1:-1] - 2.0 * V[1:-1, 1:-1] + V[:-2, 1:-1]) / ht**2
    Vst = (V[2:, 2:] - V[2:, :-2] - V[:-2, 2:] + V[:-2, :-2]) / (4.0 * hs * ht)
    dot = lambda a, b: np.einsum("...i,...i->...", a * sig, b)
    E = dot(Vs, Vs)
    G = dot(Vt, Vt)
    F = dot(Vs, Vt)
    if float(np.min(E)) <= 1e-12 or float(np.min(G)) <= 1e-12:
        raise PreconditionError("degenerate mesh cell: vanishing tangent vector")
    lam_hat = 0.5 * (E + G)
    conformality = float(np.max(np.abs(F)))

    nu = V[1:-1, 1:-1] * _BASE * np.sqrt(abs(kappa))
    rows = np.stack([nu * sig, Vs * sig, Vt * sig], axis=-2)
    normal = np.empty_like(nu)
    cols = np.arange(4)
    for i in range(4):
        minor = rows[..., cols != i]
        normal[..., i] = (-1.0) ** i * np.linalg.det(minor)
    norm_sq = dot(normal, normal)
    if float(np.min(norm_sq)) <= 0.0:
        raise PreconditionError("degenerate mesh cell: normal direction lost")
    normal /= np.sqrt(norm_sq)[..., None]
    frame = np.stack([nu, Vs, Vt, normal], axis=-2)
    orient = np.sign(np.linalg.det(frame))
    normal *= orient[..., None]

    b11 = dot(Vss, normal)
    b22 = dot(Vtt, normal)
    b12 = dot(Vst, normal)
    H_hat = (b11 + b22) / (2.0 * lam_hat)
    rad = np.sqrt((0.5 * (b11 - b22)) ** 2 + b12**2) / lam_hat
    return MeasuredData(
        mesh.params, chart, lam_hat, H_hat, normal[..., 3],
        H_hat + rad, H_hat - rad, conformality,
    )


def export_obj(mesh: SurfaceMesh, path: str, projection: str) -> None:
    """Write the mesh to disk in the requested projection.

    PoincareDiskXR (kappa < 0) and SphereXR_unrolled (kappa > 0) produce
    Wavefront OBJ files with each quad split into two triangles;
    Raw4D_csv writes the raw 4-space vertices as CSV.
    """
    if projection not in PROJECTIONS:
        raise PreconditionError(f"unknown projection {projection!r}")
    V = mesh.vertices
    nt, ns = mesh.chart.shape
    kappa = mesh.params.kappa
    if projection == "Raw4D_csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x0", "x1", "x2", "h"])
            for row in V.reshape(-1, 4):
                writer.writerow([repr(float(x)) for x in row])
        return
    if projection == "PoincareDiskXR":
        if kappa >= 0:
            raise PreconditionError("PoincareDiskXR requires kappa < 0")
        y = V[..., :3] * np.sqrt(-kappa)
        denom = 1.0 + y[..., 0]
        pts = np.stack([y[..., 1] / denom, y[..., 2] / denom, V[..., 3]], axis=-1)
    else:
        if kappa <= 0:
            raise PreconditionError("SphereXR_unrolled requires kappa > 0")
        y = V[..., :3] * np.sqrt(kappa)
        theta = np.arccos(np.clip(y[..., 0], -1.0, 1.0))
        phi = np.arctan2(y[..., 2], y[..., 1])
        pts = np.stack([theta, phi, V[..., 3]], axis=-1)
    with open(path, "w") as fh:
        for row in pts.reshape(-1, 3):
            fh.write(f"v {float(row[0])!r} {float(row[1])!r} {float(row[2])!r}\n")
        vid = lambda j, i: j * ns + i + 1
        for j in range(nt - 1):
            for i in range(ns - 1):
                fh.write(f"f {vid(j, i)} {vid(j, i + 1)} {vid(j + 1, i + 1)}\n")
                fh.write(f"f {vid(j, i)} {vid(j + 1, i + 1)} {vid(j + 1, i)}\n")
