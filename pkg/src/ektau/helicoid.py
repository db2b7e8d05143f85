"""Helicoidal reduction: s-only data as an ODE flow, and the mate audits.

For data depending on the real part of the conformal parameter only,
f_z = f'/2 turns the structure system into a first-order ODE system in
(lam, u, A, p) driven by a mean-curvature profile H(s):

    A'   = u lam (H + i tau)
    p'   = lam (H'/2 + u A (kappa - 4 tau^2))
    u'   = Re[-2 (H - i tau) A - (4 p / lam) conj(A)]
    lam' = Re[lam (u lam (H + i tau) - 2 u p) / A]

The imaginary parts of the u' and lam' brackets vanish on consistent data and
are tracked as defects, as is the first integral 4|A|^2 - lam (1 - u^2).
Integration is classical fixed-step RK4.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import DefectError, PreconditionError
from .fundata import Chart, FundamentalDataGrid, max_t_derivative, _grid_gradients, wirtinger_zbar
from .integrability import interior
from .mates import PairData, twin
from .spaces import SpaceParams
from .tolerances import TOL_ALG, defect_tolerance

# |A| below this floor triggers the lam'-limit rule (0 when u p ~ 0).
_A_FLOOR = 1e-13

# |beta_z| below this is masked out of the negative audit statistics.
_BETA_FLOOR = 1e-5


class MotionClass(Enum):
    ROTATIONAL = "Rotational"
    VERTICAL_CYLINDER = "VerticalCylinder"
    PROPERLY_HELICOIDAL = "ProperlyHelicoidal"


@dataclass(frozen=True)
class ProfileState:
    """State of the reduced flow at one s value."""

    s: float
    lam: float
    u: float
    A: complex
    p: complex


def ode_rhs(
    state: ProfileState, H_value: float, H_slope: float, params: SpaceParams
) -> tuple[float, float, complex, complex, dict[str, float]]:
    """Right-hand side (dlam, du, dA, dp) plus the two reality defects."""
    lam, u, A, p = state.lam, state.u, state.A, state.p
    if lam <= 0.0:
        raise PreconditionError("lam must be positive")
    c = params.discriminant
    w = complex(H_value, params.tau)
    dA = u * lam * w
    dp = lam * (0.5 * H_slope + u * A * c)
    du_bracket = -2.0 * w.conjugate() * A - (4.0 * p / lam) * A.conjugate()
    if abs(A) <= _A_FLOOR:
        if abs(u * p) <= _A_FLOOR:
            dlam_bracket = 0.0 + 0.0j
        else:
            raise PreconditionError("lam' is singular: A = 0 with u p != 0")
    else:
        dlam_bracket = lam * (dA - 2.0 * u * p) / A
    defects = {"im_u": du_bracket.imag, "im_lambda": dlam_bracket.imag}
    return dlam_bracket.real, du_bracket.real, dA, dp, defects


@dataclass(frozen=True)
class ProfileSolution:
    """Fixed-step trajectory of the reduced flow with its defect history."""

    params: SpaceParams
    s: np.ndarray
    lam: np.ndarray
    u: np.ndarray
    A: np.ndarray
    p: np.ndarray
    H_values: np.ndarray
    c4: np.ndarray
    im_u: np.ndarray
    im_lambda: np.ndarray
    step: float
    H_fn: Callable[[float], float]
    dH_fn: Callable[[float], float]

    def max_defects(self) -> dict[str, float]:
        return {
            "c4": float(np.max(np.abs(self.c4))),
            "im_u": float(np.max(np.abs(self.im_u))),
            "im_lambda": float(np.max(np.abs(self.im_lambda))),
        }

    def state(self, index: int) -> ProfileState:
        return ProfileState(
            float(self.s[index]),
            float(self.lam[index]),
            float(self.u[index]),
            complex(self.A[index]),
            complex(self.p[index]),
        )


def _as_profile(H_profile) -> tuple[Callable[[float], float], Callable[[float], float]]:
    if isinstance(H_profile, (int, float)):
        value = float(H_profile)
        return (lambda s: value), (lambda s: 0.0)
    try:
        H_fn, dH_fn = H_profile
    except (TypeError, ValueError) as exc:
        raise PreconditionError(
            "H_profile must be a constant or a (value, slope) pair of callables"
        ) from exc
    if not (callable(H_fn) and callable(dH_fn)):
        raise PreconditionError("H_profile pair entries must be callable")
    return H_fn, dH_fn


def integrate_profile(
    initial: ProfileState,
    H_profile,
    span: tuple[float, float],
    step: float,
    params: SpaceParams,
) -> ProfileSolution:
    """Integrate the reduced flow over span with classical fixed-step RK4.

    `H_profile` is either a constant or a pair (H, dH/ds) of callables.  The
    initial state must satisfy the first integral and both reality defects at
    the algebraic tolerance.  Every accepted state must keep lam > 0 and
    |u| <= 1 and its defects below defect_tolerance(step, span length).
    """
    s0, s1 = float(span[0]), float(span[1])
    if not s1 > s0:
        raise PreconditionError("span must be increasing")
    if step <= 0:
        raise PreconditionError("step must be positive")
    if abs(initial.s - s0) > 1e-12:
        raise PreconditionError("initial state must sit at the start of the span")
    H_fn, dH_fn = _as_profile(H_profile)
    n = max(1, round((s1 - s0) / step))
    h = (s1 - s0) / n
    tol = defect_tolerance(h, s1 - s0)

    def rhs(s, y):
        lam, u, A, p = y
        dlam, du, dA, dp, defects = ode_rhs(
            ProfileState(s, lam, u, A, p), H_fn(s), dH_fn(s), params
        )
        return (dlam, du, dA, dp), defects

    def c4_of(y):
        lam, u, A, p = y
        return 4.0 * abs(A) ** 2 - lam * (1.0 - u * u)

    y = (float(initial.lam), float(initial.u), complex(initial.A), complex(initial.p))
    if y[0] <= 0.0:
        raise PreconditionError("initial lam must be positive")
    if abs(y[1]) > 1.0:
        raise PreconditionError("initial u must lie in [-1, 1]")
    if abs(c4_of(y)) > TOL_ALG:
        raise PreconditionError(
            f"initial state violates 4|A|^2 = lam (1 - u^2) by {abs(c4_of(y)):.3e}"
        )
    _, defects0 = rhs(s0, y)
    if max(abs(defects0["im_u"]), abs(defects0["im_lambda"])) > TOL_ALG:
        raise PreconditionError("initial state violates the reality constraints")

    svals = s0 + h * np.arange(n + 1)
    lam_h = np.empty(n + 1)
    u_h = np.empty(n + 1)
    A_h = np.empty(n + 1, dtype=complex)
    p_h = np.empty(n + 1, dtype=complex)
    c4_h = np.empty(n + 1)
    imu_h = np.empty(n + 1)
    iml_h = np.empty(n + 1)

    def record(k, y, defects):
        lam_h[k], u_h[k], A_h[k], p_h[k] = y
        c4_h[k] = c4_of(y)
        imu_h[k] = defects["im_u"]
        iml_h[k] = defects["im_lambda"]

    record(0, y, defects0)
    add = lambda y, k, c: tuple(yi + c * ki for yi, ki in zip(y, k))
    for k in range(n):
        s = svals[k]
        k1, _ = rhs(s, y)
        k2, _ = rhs(s + 0.5 * h, add(y, k1, 0.5 * h))
        k3, _ = rhs(s + 0.5 * h, add(y, k2, 0.5 * h))
        k4, _ = rhs(s + h, add(y, k3, h))
        y = tuple(
            yi + (h / 6.0) * (a + 2.0 * b + 2.0 * c + d)
            for yi, a, b, c, d in zip(y, k1, k2, k3, k4)
        )
        if y[0] <= 0.0:
            raise DefectError(f"lam <= 0 at s = {svals[k + 1]:.6g}")
        if abs(y[1]) > 1.0:
            raise DefectError(f"|u| > 1 at s = {svals[k + 1]:.6g}")
        _, defects = rhs(svals[k + 1], y)
        record(k + 1, y, defects)
        worst = max(abs(c4_h[k + 1]), abs(imu_h[k + 1]), abs(iml_h[k + 1]))
        if worst > tol:
            raise DefectError(
                f"defect {worst:.3e} exceeds budget {tol:.3e} at s = {svals[k + 1]:.6g}"
            )
    H_vals = np.array([H_fn(s) for s in svals], dtype=float)
    return ProfileSolution(
        params, svals, lam_h, u_h, A_h, p_h, H_vals, c4_h, imu_h, iml_h, h, H_fn, dH_fn
    )


def write_profile_csv(sol: ProfileSolution, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["s", "lambda", "u", "A_re", "A_im", "p_re", "p_im",
             "c4_defect", "im_u_defect", "im_lambda_defect"]
        )
        for k in range(len(sol.s)):
            writer.writerow(
                [repr(float(x)) for x in (
                    sol.s[k], sol.lam[k], sol.u[k],
                    sol.A[k].real, sol.A[k].imag, sol.p[k].real, sol.p[k].imag,
                    sol.c4[k], sol.im_u[k], sol.im_lambda[k],
                )]
            )


def lift_profile(
    sol: ProfileSolution,
    nt: int,
    t_span: tuple[float, float],
    stride: int = 1,
) -> FundamentalDataGrid:
    """Broadcast a profile to a data grid constant in t.

    `stride` keeps every stride-th sample (the trajectory length minus one
    must be divisible by it), so a finely integrated profile can populate a
    coarser grid exactly.
    """
    if stride < 1 or (len(sol.s) - 1) % stride != 0:
        raise PreconditionError("stride must divide the number of integration steps")
    t0, t1 = float(t_span[0]), float(t_span[1])
    sl = slice(None, None, stride)
    svals = sol.s[sl]
    chart = Chart(float(svals[0]), float(svals[-1]), t0, t1, len(svals), nt)
    row = lambda arr: np.broadcast_to(arr[sl][None, :], (nt, len(svals)))
    return FundamentalDataGrid(
        sol.params, chart, row(sol.lam), row(np.clip(sol.u, -1.0, 1.0)),
        row(sol.H_values), row(sol.p), row(sol.A),
    )


def conformalize(
    E: np.ndarray, F: np.ndarray, G: np.ndarray, v1: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Conformal coordinates for a v1-dependent metric E dv1^2 + 2F dv1 dv2 + G dv2^2.

    Returns (s, shear) sampled on the v1 grid with s(v1[0]) = shear(v1[0]) = 0:
    s(v1) = integral of sqrt(EG - F^2)/G, t = v2 + shear(v1) with
    shear(v1) = integral of F/G.  In (s, t) the metric is G (ds^2 + dt^2).
    """
    E, F, G, v1 = (np.asarray(x, dtype=float) for x in (E, F, G, v1))
    if not (E.shape == F.shape == G.shape == v1.shape and v1.ndim == 1):
        raise PreconditionError("E, F, G, v1 must be 1-d arrays of equal length")
    if len(v1) < 2 or np.any(np.diff(v1) <= 0):
        raise PreconditionError("v1 grid must be strictly increasing")
    disc = E * G - F * F
    if np.any(E <= 0) or np.any(G <= 0) or np.any(disc <= 0):
        raise PreconditionError("metric must be positive definite (E, G, EG - F^2 > 0)")
    s = cumulative_trapezoid(np.sqrt(disc) / G, v1, initial=0.0)
    shear = cumulative_trapezoid(F / G, v1, initial=0.0)
    return s, shear


def classify_motion(obj, tol: float = 1e-8) -> MotionClass:
    """Motion type of the one-parameter family generated by an s-only data set.

    A real along the profile generates a rotation-type motion, purely
    imaginary A a vertical-cylinder translation; anything else moves both
    factors, a label reserved for product spaces (tau = 0).
    """
    if isinstance(obj, ProfileSolution):
        A, params = obj.A, obj.params
    elif isinstance(obj, FundamentalDataGrid):
        if max_t_derivative(obj) > obj.chart.fd_tol:
            raise PreconditionError("motion classification requires s-only data")
        A, params = obj.A, obj.params
    else:
        raise PreconditionError("expected a ProfileSolution or FundamentalDataGrid")
    re = float(np.max(np.abs(A.real)))
    im = float(np.max(np.abs(A.imag)))
    if re <= tol and im <= tol:
        raise PreconditionError("A vanishes identically; motion type undefined")
    if im <= tol:
        return MotionClass.ROTATIONAL
    if re <= tol:
        return MotionClass.VERTICAL_CYLINDER
    if params.tau != 0.0:
        raise PreconditionError(
            "mixed A indicates motion in both factors; that label requires tau = 0"
        )
    return MotionClass.PROPERLY_HELICOIDAL


@dataclass(frozen=True)
class AuditEntry:
    identity: str
    max_abs: float
    rms: float
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class AuditReport:
    """Named residual statistics for the mate-pair identities, plus the
    derived scalar fields they are built from."""

    kind: str
    entries: tuple[AuditEntry, ...]
    scalars: dict[str, np.ndarray]
    branch: str | None = None

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def entry(self, identity: str) -> AuditEntry:
        for e in self.entries:
            if e.identity == identity:
                return e
        raise KeyError(identity)

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["identity", "max_abs", "rms", "tolerance", "pass"])
            for e in self.entries:
                writer.writerow(
                    [
                        e.identity,
                        repr(e.max_abs),
                        repr(e.rms),
                        repr(e.tolerance),
                        "pass" if e.passed else "FAIL",
                    ]
                )


def _masked_stats(field: np.ndarray, mask: np.ndarray | None) -> tuple[float, float]:
    region = np.abs(interior(field))
    if mask is not None:
        sel = interior(mask)
        if not sel.any():
            return 0.0, 0.0
        region = region[sel]
    return float(region.max()), float(np.sqrt(np.mean(region**2)))


def _entry(name, field, tol, mask=None) -> AuditEntry:
    max_abs, rms = _masked_stats(field, mask)
    return AuditEntry(name, max_abs, rms, tol, max_abs <= tol)


def _alignment(
    grads_f: tuple[np.ndarray, np.ndarray], grads_g: tuple[np.ndarray, np.ndarray]
) -> np.ndarray:
    """Cross-gradient defect |f_s g_t - f_t g_s|: zero iff the level-set
    families of f and g agree (one is locally a function of the other)."""
    fs, ft = grads_f
    gs, gt = grads_g
    return np.abs(fs * gt - ft * gs)


def _delta_field(data: FundamentalDataGrid) -> np.ndarray:
    """delta = tau t + integral of H ds, the invariant combination along profiles."""
    s = data.chart.s_values()
    t = data.chart.t_values()
    h_int = cumulative_trapezoid(data.H, s, axis=1, initial=0.0)
    return data.params.tau * t[:, None] + h_int


def _require_pair_kind(pair: PairData, epsilon: int, what: str) -> None:
    if pair.epsilon != epsilon:
        raise PreconditionError(f"{what} requires a pair with H* = {epsilon:+d} H")


def audit_positive_pair(pair: PairData, fd_tol: float | None = None) -> AuditReport:
    """Identities satisfied by an H* = +H mate pair in pitch-normalized form.

    Requires A - sigma A* = -i on the chart (use normalize_pitch).  Reports
    the holomorphy of the difference form, flatness of H across the profile,
    alignment of f = -Re A with delta = tau t + integral(H ds), the f
    evolution identity -f_zbar = (lam u / 2)(H + i tau), and for constant H
    the constancy of F = p / (H - i tau) along delta level sets together with
    the slope identity lam u = -f'(delta).
    """
    _require_pair_kind(pair, +1, "positive audit")
    data, mate = pair.first, pair.second
    chart = data.chart
    tau = data.params.tau
    fd = chart.fd_tol if fd_tol is None else fd_tol
    diff = data.A - pair.sigma * mate.A
    if float(np.max(np.abs(diff + 1j))) > TOL_ALG:
        raise PreconditionError(
            "pair is not pitch-normalized (need A - sigma A* = -i; use normalize_pitch)"
        )
    f = -data.A.real
    delta = _delta_field(data)
    grads_f = _grid_gradients(f, chart)
    grads_delta = _grid_gradients(delta, chart)
    evolution = -wirtinger_zbar(f, chart) - 0.5 * data.lam * data.u * complex(0.0, tau)
    evolution -= 0.5 * data.lam * data.u * data.H
    entries = [
        _entry("alpha_holomorphy", np.abs(wirtinger_zbar(diff, chart)), fd),
        _entry("H_profile_flatness", np.abs(_grid_gradients(data.H, chart)[1]), fd),
        _entry("f_delta_alignment", _alignment(grads_f, grads_delta), fd),
        _entry("f_evolution", np.abs(evolution), fd),
    ]
    scalars = {"f": f, "delta": delta}
    H_const = float(np.ptp(data.H)) <= TOL_ALG
    Hc = float(np.mean(data.H))
    if H_const and (abs(Hc) > TOL_ALG or tau != 0.0):
        F = data.p / complex(Hc, -tau)
        grads_Fre = _grid_gradients(F.real, chart)
        grads_Fim = _grid_gradients(F.imag, chart)
        constancy = np.maximum(
            _alignment(grads_Fre, grads_delta), _alignment(grads_Fim, grads_delta)
        )
        slope = np.maximum(
            np.abs(grads_f[0] + data.lam * data.u * grads_delta[0]),
            np.abs(grads_f[1] + data.lam * data.u * grads_delta[1]),
        )
        entries.append(_entry("F_delta_constancy", constancy, fd))
        entries.append(_entry("lambda_u_slope", slope, fd))
        scalars["F"] = F
    return AuditReport("positive", tuple(entries), scalars)


def _potential_field(data: FundamentalDataGrid, sigma: int, mate: FundamentalDataGrid) -> np.ndarray:
    """phi with phi_z = A and phi_zbar = -sigma conj(A*), by cumulative quadrature."""
    phi_s = data.A - sigma * np.conj(mate.A)
    phi_t = 1j * (data.A + sigma * np.conj(mate.A))
    s = data.chart.s_values()
    t = data.chart.t_values()
    row0 = cumulative_trapezoid(phi_s[0, :], s, initial=0.0)
    cols = cumulative_trapezoid(phi_t, t, axis=0, initial=0.0)
    return row0[None, :] + cols


def audit_negative_pair(pair: PairData, fd_tol: float | None = None) -> AuditReport:
    """Identities satisfied by an H* = -H mate pair (tau != 0).

    Writes beta_z = A - sigma A* and extracts f from A = (1/2 + i f) beta_z on
    the region where beta_z is not negligible; reports the alignment of f and
    H with the level sets of the real potential beta (whose gradient is read
    off beta_z directly), the algebraic consistency |Re(A/beta_z) - 1/2|, and
    for twin-form pairs the constant-f identity |2 f H - tau| = 0.  A pair
    with beta_z = 0 everywhere is flagged as the helicoidal-mates branch.
    """
    _require_pair_kind(pair, -1, "negative audit")
    data, mate = pair.first, pair.second
    chart = data.chart
    tau = data.params.tau
    if tau == 0.0:
        raise PreconditionError("negative audit requires tau != 0")
    fd = chart.fd_tol if fd_tol is None else fd_tol
    beta_z = data.A - pair.sigma * mate.A
    phi = _potential_field(data, pair.sigma, mate)
    beta = 2.0 * phi.real
    scalars = {"beta_z": beta_z, "phi": phi, "beta": beta}
    if float(np.max(np.abs(beta_z))) <= _BETA_FLOOR:
        return AuditReport(
            "negative", (), scalars, branch="helicoidal mates branch (A = sigma A*)"
        )
    mask = np.abs(beta_z) > _BETA_FLOOR
    safe = np.where(mask, beta_z, 1.0)
    ratio = data.A / safe
    f = np.where(mask, ratio.imag, 0.0)
    half = np.where(mask, np.abs(ratio.real - 0.5), 0.0)
    grads_beta = (2.0 * beta_z.real, -2.0 * beta_z.imag)
    grads_f = _grid_gradients(f, chart)
    grads_H = _grid_gradients(data.H, chart)
    fd_mask = _erode(mask)
    entries = [
        _entry("beta_f_consistency", _alignment(grads_f, grads_beta), fd, fd_mask),
        _entry("H_beta_alignment", _alignment(grads_H, grads_beta), fd, fd_mask),
        _entry("beta_half_identity", half, TOL_ALG, mask),
    ]
    scalars["f"] = f
    if _is_twin_form(pair):
        case_field = np.where(mask, np.abs(2.0 * f * data.H - tau), 0.0)
        entries.append(_entry("two_f_H_minus_tau", case_field, TOL_ALG, mask))
    return AuditReport("negative", tuple(entries), scalars)


def _is_twin_form(pair: PairData) -> bool:
    """Whether the second member is the twin of the first.

    The constant-f identity holds on this branch of the constant-H analysis;
    the other branch (invariant surfaces with their screw-type mates) has
    genuinely varying f, so the entry would be meaningless there.
    """
    try:
        expected = twin(pair.first)
    except PreconditionError:
        return False
    mate = pair.second
    return (
        float(np.max(np.abs(mate.u - expected.u))) <= TOL_ALG
        and float(np.max(np.abs(mate.p - expected.p))) <= TOL_ALG
        and float(np.max(np.abs(mate.A - expected.A))) <= TOL_ALG
    )


def _erode(mask: np.ndarray) -> np.ndarray:
    """Shrink a boolean region by one cell so FD stencils stay inside it."""
    out = mask.copy()
    out[1:, :] &= mask[:-1, :]
    out[:-1, :] &= mask[1:, :]
    out[:, 1:] &= mask[:, :-1]
    out[:, :-1] &= mask[:, 1:]
    return out
