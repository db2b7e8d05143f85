"""Mate transformations: isometric, non-congruent companions as data maps.

Every operation here acts on fundamental data, never on an immersion: a mate
is produced by transforming (lam, u, H, p, A) exactly (sign flips, complex
conjugation, unit phases), so the outputs satisfy the structure system
whenever the inputs do.

The pair bookkeeping follows the common form of all such pairs: two data sets
over the same chart share lam, have u^2 = (u*)^2 (a global sign sigma) and
H* = epsilon H with epsilon in {+1, -1}, epsilon = +1 forced when tau = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import PreconditionError
from .fundata import FundamentalDataGrid, max_t_derivative
from .spaces import SpaceParams
from .tolerances import TOL_ALG


class IsometryCase(Enum):
    """Ambient isometry classes by their action on base and fiber orientations."""

    PRESERVE_BOTH = "PreserveBoth"
    REVERSE_BOTH = "ReverseBoth"
    PRESERVE_BASE_REVERSE_FIBER = "PreserveBaseReverseFiber"
    REVERSE_BASE_PRESERVE_FIBER = "ReverseBasePreserveFiber"


def legal_cases(params: SpaceParams) -> tuple[IsometryCase, ...]:
    """Isometry classes available in E(kappa, tau); mixed ones need tau = 0."""
    if params.tau == 0.0:
        return tuple(IsometryCase)
    return (IsometryCase.PRESERVE_BOTH, IsometryCase.REVERSE_BOTH)


def isometry_action(data: FundamentalDataGrid, case: IsometryCase) -> FundamentalDataGrid:
    """How an ambient isometry of the given class transforms fundamental data."""
    if case not in legal_cases(data.params):
        raise PreconditionError(f"{case.value} requires tau = 0")
    if case is IsometryCase.PRESERVE_BOTH:
        return data
    if case is IsometryCase.REVERSE_BOTH:
        return data.with_fields(u=-data.u, A=-data.A)
    if case is IsometryCase.PRESERVE_BASE_REVERSE_FIBER:
        return data.with_fields(H=-data.H, p=-data.p, A=-data.A)
    return data.with_fields(u=-data.u, H=-data.H, p=-data.p)


def _require_minimal(data: FundamentalDataGrid) -> None:
    if float(np.max(np.abs(data.H))) > TOL_ALG:
        raise PreconditionError("requires H = 0 everywhere")


def _require_s_only(data: FundamentalDataGrid, what: str) -> None:
    worst = max_t_derivative(data)
    if worst > data.chart.fd_tol:
        raise PreconditionError(
            f"{what} requires data depending on s only (max |d/dt| = {worst:.3e})"
        )


def _constant_H(data: FundamentalDataGrid, what: str) -> float:
    if float(np.ptp(data.H)) > TOL_ALG:
        raise PreconditionError(f"{what} requires constant H")
    return float(np.mean(data.H))


def associate(data: FundamentalDataGrid, theta: float) -> FundamentalDataGrid:
    """Associate family member of a minimal product-space surface.

    Multiplies p and A by the unit phase e^(i theta); requires tau = 0 and
    H = 0.  associate(0) is the identity and phases compose additively.
    """
    if data.params.tau != 0.0:
        raise PreconditionError("associate family requires tau = 0")
    _require_minimal(data)
    phase = complex(math.cos(theta), math.sin(theta))
    return data.with_fields(p=phase * data.p, A=phase * data.A)


def helicoidal_mate_product(data: FundamentalDataGrid) -> FundamentalDataGrid:
    """Mate of a helicoidal surface in a product space: conjugate p and A.

    Requires tau = 0 and data depending on s only.  An involution.
    """
    if data.params.tau != 0.0:
        raise PreconditionError("product-space helicoidal mate requires tau = 0")
    _require_s_only(data, "helicoidal mate")
    return data.with_fields(p=np.conj(data.p), A=np.conj(data.A))


def twin(data: FundamentalDataGrid) -> FundamentalDataGrid:
    """Twin of a constant-H surface with tau != 0: (lam, u, -H, e^(ia) p, e^(ia) A)
    with the unit phase determined by e^(ia) (H + i tau) = -H + i tau.
    """
    params = data.params
    if params.tau == 0.0:
        raise PreconditionError("twin requires tau != 0")
    H = _constant_H(data, "twin")
    if abs(H) <= TOL_ALG:
        raise PreconditionError("twin requires H != 0")
    phase = complex(-H, params.tau) / complex(H, params.tau)
    return data.with_fields(H=-data.H, p=phase * data.p, A=phase * data.A)


def helicoidal_mate_screw(data: FundamentalDataGrid) -> FundamentalDataGrid:
    """Mate of a helicoidal surface with tau != 0: (lam, u, -H, -conj p, -conj A).

    Requires data depending on s only and H not identically zero.
    An involution.
    """
    if data.params.tau == 0.0:
        raise PreconditionError("screw-type helicoidal mate requires tau != 0")
    _require_s_only(data, "helicoidal mate")
    if float(np.max(np.abs(data.H))) <= TOL_ALG:
        raise PreconditionError("screw-type helicoidal mate requires H not identically zero")
    return data.with_fields(H=-data.H, p=-np.conj(data.p), A=-np.conj(data.A))


def sister(
    data: FundamentalDataGrid, target: SpaceParams, H2: float
) -> FundamentalDataGrid:
    """Sister surface data in another space with the same discriminant.

    Requires constant H, kappa1 - 4 tau1^2 = kappa2 - 4 tau2^2 and
    H2^2 + tau2^2 = H^2 + tau1^2 (all within the algebraic tolerance).  The
    data transforms by the unit phase with e^(-ia) = (H2 - i tau2)/(H - i tau1)
    into (lam, u, H2, e^(ia) p, e^(ia) A) tagged with the target parameters.
    """
    params = data.params
    H1 = _constant_H(data, "sister")
    if abs(params.discriminant - target.discriminant) > TOL_ALG:
        raise PreconditionError(
            "sister requires equal kappa - 4 tau^2 "
            f"({params.discriminant} vs {target.discriminant})"
        )
    lhs = H2 * H2 + target.tau * target.tau
    rhs = H1 * H1 + params.tau * params.tau
    if abs(lhs - rhs) > TOL_ALG:
        raise PreconditionError(
            f"sister requires H2^2 + tau2^2 = H^2 + tau1^2 ({lhs} vs {rhs})"
        )
    denom = complex(H2, -target.tau)
    numer = complex(H1, -params.tau)
    if denom == 0:
        raise PreconditionError(
            "sister with H = tau = 0 on both sides is the associate family; use associate"
        )
    phase = numer / denom
    return data.with_fields(
        params=target,
        H=np.full(data.chart.shape, float(H2)),
        p=phase * data.p,
        A=phase * data.A,
    )


def conjugate_parameter(data: FundamentalDataGrid) -> FundamentalDataGrid:
    """Orientation-and-parameter conjugation of s-only data.

    Reflecting the conformal parameter (z -> zbar) and reversing the normal
    sends (lam, u, H, p, A) to (lam, -u, -H, -conj p, conj A).  Composed with
    the appropriate ambient isometry action this reproduces the helicoidal
    mates exactly.
    """
    _require_s_only(data, "parameter conjugation")
    return data.with_fields(u=-data.u, H=-data.H, p=-np.conj(data.p), A=np.conj(data.A))


def _fields_close(a: FundamentalDataGrid, b: FundamentalDataGrid, tol: float) -> bool:
    return (
        float(np.max(np.abs(a.lam - b.lam))) <= tol
        and float(np.max(np.abs(a.u - b.u))) <= tol
        and float(np.max(np.abs(a.H - b.H))) <= tol
        and float(np.max(np.abs(a.p - b.p))) <= tol
        and float(np.max(np.abs(a.A - b.A))) <= tol
    )


def pointwise_congruent(
    a: FundamentalDataGrid, b: FundamentalDataGrid, tol: float = TOL_ALG
) -> tuple[bool, IsometryCase | None]:
    """Whether b is the image of a under some legal ambient isometry action.

    Comparison is absolute at `tol` on all five fields.  Charts and space
    parameters must agree.
    """
    if a.params != b.params:
        raise PreconditionError("congruence comparison requires equal space parameters")
    if a.chart != b.chart:
        raise PreconditionError("congruence comparison requires a common chart")
    for case in legal_cases(a.params):
        if _fields_close(isometry_action(a, case), b, tol):
            return True, case
    return False, None


@dataclass(frozen=True)
class PairData:
    """A validated pair of data sets over one chart: u* = sigma u, H* = epsilon H."""

    first: FundamentalDataGrid
    second: FundamentalDataGrid
    sigma: int
    epsilon: int


# |u| below this is treated as zero when inferring the global sign sigma.
_U_SIGN_FLOOR = 1e-6


def make_pair(
    a: FundamentalDataGrid, b: FundamentalDataGrid, tol: float = TOL_ALG
) -> PairData:
    """Validate the common form of a mate pair and infer (sigma, epsilon).

    Checks: common chart and parameters, equal conformal factors, u^2 = (u*)^2
    with one global sign sigma on {|u| > 1e-6} (sigma = +1 by convention when
    u vanishes identically), and H* = epsilon H with epsilon = +1 forced for
    tau = 0 (a tau = 0 pair with H* = -H != 0 is rejected).
    """
    if a.params != b.params:
        raise PreconditionError("pair requires equal space parameters")
    if a.chart != b.chart:
        raise PreconditionError("pair requires a common chart")
    if float(np.max(np.abs(a.lam - b.lam))) > tol:
        raise PreconditionError("pair requires equal conformal factors")
    if float(np.max(np.abs(a.u**2 - b.u**2))) > tol:
        raise PreconditionError("pair requires u^2 = (u*)^2")

    mask = np.abs(a.u) > _U_SIGN_FLOOR
    if not mask.any():
        sigma = 1
    elif float(np.max(np.abs(b.u[mask] - a.u[mask]))) <= tol:
        sigma = 1
    elif float(np.max(np.abs(b.u[mask] + a.u[mask]))) <= tol:
        sigma = -1
    else:
        raise PreconditionError("no global sign sigma with u* = sigma u")

    if float(np.max(np.abs(a.H))) <= tol and float(np.max(np.abs(b.H))) <= tol:
        epsilon = 1
    elif float(np.max(np.abs(b.H - a.H))) <= tol:
        epsilon = 1
    elif float(np.max(np.abs(b.H + a.H))) <= tol:
        epsilon = -1
    else:
        raise PreconditionError("no global sign epsilon with H* = epsilon H")
    if epsilon == -1 and a.params.tau == 0.0:
        raise PreconditionError("tau = 0 pairs require H* = +H")
    return PairData(a, b, sigma, epsilon)
