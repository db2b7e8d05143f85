"""Fundamental data on conformal charts.

A surface in E(kappa, tau) is represented by five fields sampled on a uniform
rectangular grid in the conformal parameter z = s + i t:

    lam : conformal factor of the induced metric lam |dz|^2  (> 0)
    u   : angle function, inner product of the normal with the fiber field
    H   : mean curvature
    p   : coefficient of the Hopf differential p dz^2  (complex)
    A   : coefficient of the vertical (1,0)-form A dz   (complex)

Fields are stored row-major with t as the outer axis, shape (nt, ns); grid
point (i, j) sits at z = (s_min + i*hs) + 1j*(t_min + j*ht).

File format (".fdjson"): a single JSON document

    {"kappa": ..., "tau": ...,
     "chart": {"s_min": ..., "s_max": ..., "t_min": ..., "t_max": ...,
               "ns": ..., "nt": ...},
     "lambda": [...], "u": [...], "H": [...],
     "p_re": [...], "p_im": [...], "A_re": [...], "A_im": [...]}

with each field a flat row-major array (t outer, s inner) at full float
round-trip precision.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import FileFormatError, PreconditionError
from .spaces import SpaceParams
from .tolerances import TOL_ALG, fd_tolerance

SLICE = "slice"
CYLINDER = "cylinder"
CANONICAL_NAMES = (SLICE, CYLINDER)

# |u| may exceed 1 by at most this much (float roundoff of generated data);
# such values are clipped into [-1, 1] at construction, larger ones error.
_U_SLACK = 1e-12


@dataclass(frozen=True)
class Chart:
    """Uniform rectangular grid for the conformal parameter z = s + i t."""

    s_min: float
    s_max: float
    t_min: float
    t_max: float
    ns: int
    nt: int

    def __post_init__(self) -> None:
        for name in ("s_min", "s_max", "t_min", "t_max"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise PreconditionError(f"chart bound {name} must be finite")
        if not (self.s_min < self.s_max and self.t_min < self.t_max):
            raise PreconditionError("chart bounds must satisfy s_min < s_max and t_min < t_max")
        if not (isinstance(self.ns, int) and isinstance(self.nt, int)):
            raise PreconditionError("ns and nt must be integers")
        if self.ns < 4 or self.nt < 4:
            raise PreconditionError(f"grid too small (ns={self.ns}, nt={self.nt}; need >= 4)")

    @property
    def hs(self) -> float:
        return (self.s_max - self.s_min) / (self.ns - 1)

    @property
    def ht(self) -> float:
        return (self.t_max - self.t_min) / (self.nt - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nt, self.ns)

    def s_values(self) -> np.ndarray:
        return np.linspace(self.s_min, self.s_max, self.ns)

    def t_values(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.nt)

    def z_grid(self) -> np.ndarray:
        """Complex grid z[j, i] = s_i + 1j * t_j, shape (nt, ns)."""
        s = self.s_values()
        t = self.t_values()
        return s[None, :] + 1j * t[:, None]

    @property
    def fd_tol(self) -> float:
        return fd_tolerance(self.hs, self.ht)


def wirtinger_z(f: np.ndarray, chart: Chart) -> np.ndarray:
    """d/dz = (d/ds - i d/dt)/2 with second-order stencils.

    Central differences in the interior, one-sided three-point stencils of
    the same order on the boundary rows/columns.
    """
    fs, ft = _grid_gradients(f, chart)
    return 0.5 * (fs - 1j * ft)


def wirtinger_zbar(f: np.ndarray, chart: Chart) -> np.ndarray:
    """d/dzbar = (d/ds + i d/dt)/2 with second-order stencils."""
    fs, ft = _grid_gradients(f, chart)
    return 0.5 * (fs + 1j * ft)


def _grid_gradients(f: np.ndarray, chart: Chart) -> tuple[np.ndarray, np.ndarray]:
    f = np.asarray(f)
    if f.shape != chart.shape:
        raise PreconditionError(f"field shape {f.shape} does not match chart {chart.shape}")
    fs = np.gradient(f, chart.hs, axis=1, edge_order=2)
    ft = np.gradient(f, chart.ht, axis=0, edge_order=2)
    return fs, ft


def _readonly(arr: np.ndarray, dtype) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True, order="C")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FundamentalDataGrid:
    """The five fundamental fields sampled on a chart, with space parameters.

    Arrays are validated and frozen at construction; transformations return
    new instances.
    """

    params: SpaceParams
    chart: Chart
    lam: np.ndarray
    u: np.ndarray
    H: np.ndarray
    p: np.ndarray
    A: np.ndarray

    def __post_init__(self) -> None:
        def expand(value, name):
            try:
                return np.broadcast_to(value, self.chart.shape)
            except ValueError as exc:
                raise PreconditionError(
                    f"field {name} does not match chart shape {self.chart.shape}"
                ) from exc

        lam = _readonly(expand(self.lam, "lambda"), float)
        u = np.array(expand(self.u, "u"), dtype=float, order="C")
        H = _readonly(expand(self.H, "H"), float)
        p = _readonly(expand(self.p, "p"), complex)
        A = _readonly(expand(self.A, "A"), complex)
        for name, arr in (("lambda", lam), ("u", u), ("H", H), ("p", p), ("A", A)):
            if not np.all(np.isfinite(arr.view(float))):
                raise PreconditionError(f"field {name} contains non-finite entries")
        if np.any(lam <= 0.0):
            raise PreconditionError("conformal factor must be positive everywhere")
        over = np.abs(u) - 1.0
        if np.any(over > _U_SLACK):
            raise PreconditionError(f"|u| exceeds 1 by {over.max():.3e}")
        np.clip(u, -1.0, 1.0, out=u)
        u.setflags(write=False)
        for name, arr in (("lam", lam), ("u", u), ("H", H), ("p", p), ("A", A)):
            object.__setattr__(self, name, arr)

    def with_fields(self, **kw) -> "FundamentalDataGrid":
        """Copy with some of params/chart/lam/u/H/p/A replaced."""
        return dataclasses.replace(self, **kw)

    def c4_defect(self) -> float:
        """Max-norm of the pointwise constraint 4|A|^2 - lam (1 - u^2)."""
        r = 4.0 * np.abs(self.A) ** 2 - self.lam * (1.0 - self.u**2)
        return float(np.max(np.abs(r)))

    @property
    def integrable(self) -> bool:
        """True when the pointwise constraint holds at the algebraic tolerance."""
        return self.c4_defect() <= TOL_ALG


def max_t_derivative(data: FundamentalDataGrid) -> float:
    """Largest |d/dt| over all five fields; 0 for profile-lifted data."""
    ht = data.chart.ht
    worst = 0.0
    for arr in (data.lam, data.u, data.H, data.p, data.A):
        ft = np.gradient(arr, ht, axis=0, edge_order=2)
        worst = max(worst, float(np.max(np.abs(ft))))
    return worst


def synthesize_canonical(name: str, params: SpaceParams, chart: Chart) -> FundamentalDataGrid:
    """Canonical product-space datasets with closed-form fields.

    "slice": the horizontal totally geodesic surface M^2(kappa) x {t0} in the
    disk model, lam(z) = (1 + kappa |z|^2 / 4)^(-2) (so the metric has
    curvature kappa), u = 1, H = p = A = 0.

    "cylinder": the vertical cylinder over a complete geodesic, lam = 1,
    u = 0, H = p = 0, A = -i/2.

    Both require tau = 0; the slice additionally requires the chart to stay
    inside the disk model when kappa < 0.
    """
    if params.tau != 0.0:
        raise PreconditionError(f"canonical dataset {name!r} requires tau = 0")
    shape = chart.shape
    zeros = np.zeros(shape)
    czeros = np.zeros(shape, dtype=complex)
    if name == SLICE:
        zz = chart.z_grid()
        g = 1.0 + params.kappa * np.abs(zz) ** 2 / 4.0
        if np.any(g <= 0.0):
            raise PreconditionError(
                "chart leaves the disk model of M^2(kappa) (1 + kappa|z|^2/4 <= 0)"
            )
        lam = g**-2.0
        return FundamentalDataGrid(params, chart, lam, np.ones(shape), zeros, czeros, czeros)
    if name == CYLINDER:
        A = np.full(shape, -0.5j)
        return FundamentalDataGrid(params, chart, np.ones(shape), zeros, zeros, czeros, A)
    raise PreconditionError(f"unknown canonical dataset {name!r}; expected one of {CANONICAL_NAMES}")


def normalize_pitch(data: FundamentalDataGrid, target: float = -0.5) -> FundamentalDataGrid:
    """Rescale the conformal parameter so that Im A becomes `target`.

    Requires Im A constant on the chart and nonzero.  The parameter map
    z -> a z with real a = target / Im A pulls the fields back as
    A -> a A, lam -> a^2 lam, p -> a^2 p, and divides the chart bounds by a
    (for a < 0 the grid is reindexed so both axes stay increasing).
    """
    im = data.A.imag
    if float(np.ptp(im)) > TOL_ALG:
        raise PreconditionError("Im A is not constant on the chart")
    im0 = float(np.mean(im))
    if abs(im0) <= 1e-12:
        raise PreconditionError("Im A vanishes; pitch cannot be normalized")
    if not (math.isfinite(target) and target != 0.0):
        raise PreconditionError("normalization target must be finite and nonzero")
    a = target / im0
    c = data.chart
    bounds = (c.s_min / a, c.s_max / a, c.t_min / a, c.t_max / a)
    if a > 0:
        chart = Chart(bounds[0], bounds[1], bounds[2], bounds[3], c.ns, c.nt)
        flip = slice(None)
    else:
        chart = Chart(bounds[1], bounds[0], bounds[3], bounds[2], c.ns, c.nt)
        flip = slice(None, None, -1)
    rot = lambda arr: arr[flip, :][:, flip]
    return FundamentalDataGrid(
        data.params,
        chart,
        rot(a * a * data.lam),
        rot(data.u),
        rot(data.H),
        rot(a * a * data.p),
        rot(a * data.A),
    )


_CHART_KEYS = ("s_min", "s_max", "t_min", "t_max", "ns", "nt")
_FIELD_KEYS = ("lambda", "u", "H", "p_re", "p_im", "A_re", "A_im")


def save(data: FundamentalDataGrid, path: str) -> None:
    """Write a single-document JSON file (see module docstring for schema)."""
    c = data.chart
    doc = {
        "kappa": data.params.kappa,
        "tau": data.params.tau,
        "chart": {k: getattr(c, k) for k in _CHART_KEYS},
        "lambda": data.lam.ravel().tolist(),
        "u": data.u.ravel().tolist(),
        "H": data.H.ravel().tolist(),
        "p_re": data.p.real.ravel().tolist(),
        "p_im": data.p.imag.ravel().tolist(),
        "A_re": data.A.real.ravel().tolist(),
        "A_im": data.A.imag.ravel().tolist(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, allow_nan=False)


def _reject_constant(token: str):
    raise FileFormatError(f"non-finite constant {token!r} in data file")


def load(path: str) -> FundamentalDataGrid:
    """Read and validate a ".fdjson" document; inverse of save."""
    try:
        with open(path) as fh:
            doc = json.load(fh, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise FileFormatError("top-level JSON value must be an object")
    for key in ("kappa", "tau", "chart", *_FIELD_KEYS):
        if key not in doc:
            raise FileFormatError(f"missing key {key!r}")
    chart_doc = doc["chart"]
    if not isinstance(chart_doc, dict):
        raise FileFormatError("chart must be an object")
    for key in _CHART_KEYS:
        if key not in chart_doc:
            raise FileFormatError(f"missing chart key {key!r}")
    try:
        ns, nt = chart_doc["ns"], chart_doc["nt"]
        if not (isinstance(ns, int) and isinstance(nt, int)):
            raise FileFormatError("ns and nt must be integers")
        chart = Chart(
            float(chart_doc["s_min"]),
            float(chart_doc["s_max"]),
            float(chart_doc["t_min"]),
            float(chart_doc["t_max"]),
            ns,
            nt,
        )
        params = SpaceParams(float(doc["kappa"]), float(doc["tau"]))
        raw = {}
        for key in _FIELD_KEYS:
            values = doc[key]
            if not isinstance(values, list) or len(values) != ns * nt:
                raise FileFormatError(
                    f"field {key!r} must be a flat list of length ns*nt = {ns * nt}"
                )
            raw[key] = np.asarray(values, dtype=float).reshape(nt, ns)
        return FundamentalDataGrid(
            params,
            chart,
            raw["lambda"],
            raw["u"],
            raw["H"],
            raw["p_re"] + 1j * raw["p_im"],
            raw["A_re"] + 1j * raw["A_im"],
        )
    except FileFormatError:
        raise
    except (PreconditionError, TypeError, ValueError) as exc:
        raise FileFormatError(f"invalid data file {path}: {exc}") from exc
