"""Surfaces in homogeneous 3-manifolds E(kappa, tau) from fundamental data.

The toolkit represents a conformally immersed surface by its fundamental
data (lam, u, H, p, A) on a rectangular chart, checks the structure
equations that make such data realizable, transforms data into its mates
(associate, product, screw, twin, sister), reduces invariant surfaces to an
ODE flow with defect monitoring, audits the identities satisfied by mate
pairs, and rebuilds product-space surfaces as meshes by frame integration.
"""
from .errors import DefectError, FileFormatError, PreconditionError
from .fundata import (
    CYLINDER,
    SLICE,
    Chart,
    FundamentalDataGrid,
    load,
    max_t_derivative,
    normalize_pitch,
    save,
    synthesize_canonical,
    wirtinger_z,
    wirtinger_zbar,
)
from .helicoid import (
    AuditEntry,
    AuditReport,
    MotionClass,
    ProfileSolution,
    ProfileState,
    audit_negative_pair,
    audit_positive_pair,
    classify_motion,
    conformalize,
    integrate_profile,
    lift_profile,
    ode_rhs,
    write_profile_csv,
)
from .integrability import (
    EQUATIONS,
    ResidualReport,
    ResidualRow,
    gauss_residual,
    gaussian_curvature,
    principal_curvatures,
    residual_fields,
    residuals,
    shape_det,
)
from .mates import (
    IsometryCase,
    PairData,
    associate,
    conjugate_parameter,
    helicoidal_mate_product,
    helicoidal_mate_screw,
    isometry_action,
    legal_cases,
    make_pair,
    pointwise_congruent,
    sister,
    twin,
)
from .reconstruct import (
    MeasuredData,
    SurfaceMesh,
    export_obj,
    integrate_height,
    measure_mesh,
    reconstruct_surface,
)
from .spaces import SpaceClass, SpaceParams, classify_space, validate_sister_params
from .tolerances import TOL_ALG, TOL_EMBED, defect_tolerance, fd_tolerance

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
