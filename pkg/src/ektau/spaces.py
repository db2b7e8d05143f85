"""The two-parameter family of homogeneous 3-manifolds E(kappa, tau).

A pair (kappa, tau) with kappa - 4 tau^2 != 0 selects a simply connected
homogeneous 3-manifold with a Riemannian fibration over the complete surface
of curvature kappa, with bundle curvature tau.  tau = 0 gives the product
spaces S^2(kappa) x R and H^2(kappa) x R; tau != 0 gives Nil3, the Berger
spheres and the universal cover of PSL(2, R) depending on the sign of kappa.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import PreconditionError
from .tolerances import TOL_ALG


class SpaceClass(Enum):
    PRODUCT_S2_R = "ProductS2xR"
    PRODUCT_H2_R = "ProductH2xR"
    NIL3 = "Nil3"
    BERGER_SPHERE = "BergerSphere"
    PSL_COVER = "PslCover"


@dataclass(frozen=True)
class SpaceParams:
    """Base curvature kappa and bundle curvature tau, kappa - 4 tau^2 != 0."""

    kappa: float
    tau: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.kappa) and math.isfinite(self.tau)):
            raise PreconditionError("kappa and tau must be finite")
        if self.discriminant == 0.0:
            raise PreconditionError(
                f"degenerate space: kappa - 4 tau^2 = 0 "
                f"(kappa={self.kappa}, tau={self.tau})"
            )

    @property
    def discriminant(self) -> float:
        """kappa - 4 tau^2, the quantity shared by sister spaces."""
        return self.kappa - 4.0 * self.tau * self.tau

    @property
    def is_product(self) -> bool:
        return self.tau == 0.0


def classify_space(params: SpaceParams) -> SpaceClass:
    """Classify (kappa, tau) into one of the five space classes."""
    if params.tau == 0.0:
        return SpaceClass.PRODUCT_S2_R if params.kappa > 0 else SpaceClass.PRODUCT_H2_R
    if params.kappa == 0.0:
        return SpaceClass.NIL3
    return SpaceClass.BERGER_SPHERE if params.kappa > 0 else SpaceClass.PSL_COVER


def validate_sister_params(
    params1: SpaceParams, params2: SpaceParams, H1: float
) -> set[float]:
    """Admissible constant mean curvatures H2 for a sister in params2.

    A sister correspondence from (params1, H1) into params2 requires equal
    discriminants kappa - 4 tau^2 and equal H^2 + tau^2.  Returns the set of
    admissible H2 values: {+r, -r} with r = sqrt(H1^2 + tau1^2 - tau2^2),
    a single {0.0} when the radicand vanishes, and the empty set when the
    discriminants differ or the radicand is negative.
    """
    if abs(params1.discriminant - params2.discriminant) > TOL_ALG:
        return set()
    radicand = H1 * H1 + (params1.tau * params1.tau - params2.tau * params2.tau)
    if radicand < 0.0:
        return set()
    root = math.sqrt(radicand)
    return {root, -root} if root != 0.0 else {0.0}
