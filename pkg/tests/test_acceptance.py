"""Acceptance gate: one criterion per test, one printed pass/fail line each.

Run with `pytest -v` to see the per-criterion verdicts as test outcomes, or
with `pytest -s` to also see the printed summary lines and timings.
"""

import time

import numpy as np
import pytest

from ektau import (
    Chart,
    IsometryCase,
    ProfileState,
    SpaceParams,
    TOL_ALG,
    associate,
    audit_negative_pair,
    audit_positive_pair,
    conjugate_parameter,
    defect_tolerance,
    helicoidal_mate_product,
    helicoidal_mate_screw,
    integrate_profile,
    isometry_action,
    lift_profile,
    make_pair,
    measure_mesh,
    pointwise_congruent,
    principal_curvatures,
    reconstruct_surface,
    residuals,
    sister,
    synthesize_canonical,
    twin,
)

from conftest import bundle_cylinder, fields_equal


def conclude(number, name, failures, elapsed=None):
    verdict = "PASS" if not failures else "FAIL"
    stamp = f" [{elapsed:.2f}s]" if elapsed is not None else ""
    print(f"criterion {number} ({name}): {verdict}{stamp}")
    assert not failures, "; ".join(failures)


def check(failures, ok, message):
    if not ok:
        failures.append(message)


def test_criterion_1_canonical_residual_exactness():
    """Canonical datasets at 129 x 129 satisfy the full residual system."""
    failures = []
    t0 = time.perf_counter()
    chart = Chart(-1.0, 1.0, -1.0, 1.0, 129, 129)
    for name, kappa in (("slice", 1.0), ("slice", -1.0), ("cylinder", -1.0)):
        data = synthesize_canonical(name, SpaceParams(kappa, 0.0), chart)
        report = residuals(data)
        check(failures, report.passed, f"{name} kappa={kappa} residuals fail")
        for row in report.rows:
            if row.equation in ("C0", "C1", "C2", "C3", "C4"):
                check(
                    failures,
                    row.max_abs == 0.0,
                    f"{name} kappa={kappa} {row.equation} = {row.max_abs:.3e} != 0",
                )
    elapsed = time.perf_counter() - t0
    check(failures, elapsed < 1.0, f"took {elapsed:.2f}s >= 1s")
    conclude(1, "canonical residual exactness", failures, elapsed)


def test_criterion_2_mate_laws(minimal_lift, cmc_lift, bundle_lift):
    """Each mate transformation preserves the invariant fields exactly and
    the transformed data still satisfies the residual system."""
    failures = []
    berger = bundle_cylinder(0.0, 0.5, 0.5)
    hyper = bundle_cylinder(-1.0, 0.5, 0.75)
    cases = {
        "associate": (minimal_lift, lambda d: associate(d, np.pi / 3)),
        "product": (cmc_lift, helicoidal_mate_product),
        "screw": (bundle_lift, helicoidal_mate_screw),
        "twin": (berger, twin),
        "sister": (hyper, lambda d: sister(d, SpaceParams(1.24, 0.9), 0.05)),
    }
    worst_time = 0.0
    for label, (data, law) in cases.items():
        t0 = time.perf_counter()
        mate = law(data)
        check(failures, np.array_equal(mate.lam, data.lam), f"{label} changes lam")
        check(
            failures,
            float(np.max(np.abs(np.abs(mate.u) - np.abs(data.u)))) == 0.0,
            f"{label} changes |u|",
        )
        check(
            failures,
            float(np.max(np.abs(np.abs(mate.p) - np.abs(data.p)))) <= TOL_ALG,
            f"{label} changes |p|",
        )
        check(
            failures,
            float(np.max(np.abs(np.abs(mate.A) - np.abs(data.A)))) <= TOL_ALG,
            f"{label} changes |A|",
        )
        check(failures, residuals(mate).passed, f"{label} output residuals fail")
        worst_time = max(worst_time, time.perf_counter() - t0)
    check(failures, worst_time < 1.0, f"slowest case took {worst_time:.2f}s >= 1s")
    conclude(2, "mate transformation laws", failures, worst_time)


def test_criterion_3_curvature_correspondence(minimal_lift, cmc_lift, bundle_lift):
    """Sign-preserving pairs keep both principal curvatures; sign-reversing
    pairs swap and negate them."""
    failures = []
    berger = bundle_cylinder(0.0, 0.5, 0.5)
    pairs = [
        ("product", cmc_lift, helicoidal_mate_product(cmc_lift)),
        ("associate", minimal_lift, associate(minimal_lift, np.pi / 3)),
        ("screw", bundle_lift, helicoidal_mate_screw(bundle_lift)),
        ("twin", berger, twin(berger)),
    ]
    for label, first, second in pairs:
        pair = make_pair(first, second)
        k1, k2 = principal_curvatures(first)
        m1, m2 = principal_curvatures(second)
        if pair.epsilon == 1:
            err = max(np.max(np.abs(m1 - k1)), np.max(np.abs(m2 - k2)))
        else:
            err = max(np.max(np.abs(m1 + k2)), np.max(np.abs(m2 + k1)))
        check(
            failures,
            err <= TOL_ALG,
            f"{label} (epsilon={pair.epsilon:+d}) curvature map off by {err:.3e}",
        )
    check(failures, len(pairs) >= 3, "fewer than three datasets")
    conclude(3, "principal curvature correspondence", failures)


def test_criterion_4_profile_integration():
    """The minimal helicoidal profile integrates across a unit span with
    certified defects, lifts to a residual-clean grid, keeps the vertical
    form real, and converges at order >= 3 in the first integral."""
    failures = []
    t0 = time.perf_counter()
    params = SpaceParams(-1.0, 0.0)
    seed = ProfileState(0.0, 2.0, 0.0, complex(-0.5, -0.5), complex(-0.5, -0.5))
    sol = integrate_profile(seed, 0.0, (0.0, 1.0), 1e-3, params)
    defects = sol.max_defects()
    budget = defect_tolerance(1e-3, 1.0)
    check(failures, defects["c4"] <= budget, f"c4 {defects['c4']:.2e} > {budget:.2e}")

    im_drift = float(np.max(np.abs(sol.A.imag - seed.A.imag)))
    check(failures, im_drift <= 1e-10, f"Im A drifts by {im_drift:.2e}")

    data = lift_profile(sol, 65, (0.0, 1.0), stride=5)
    report = residuals(data)
    check(failures, report.passed, "lifted grid fails the residual system")

    c4 = []
    for h in (8e-3, 4e-3, 2e-3):
        c4.append(integrate_profile(seed, 0.0, (0.0, 1.0), h, params).max_defects()["c4"])
    for a, b in zip(c4, c4[1:]):
        check(failures, a / b >= 8.0, f"defect ratio {a / b:.1f} < 8 (order < 3)")

    elapsed = time.perf_counter() - t0
    check(failures, elapsed < 5.0, f"took {elapsed:.2f}s >= 5s")
    conclude(4, "helicoidal profile integration", failures, elapsed)


def test_criterion_5_noncongruent_mate_witness(minimal_lift):
    """A mate pair in normalized form whose members are not pointwise
    congruent, witnessed on data with both components of A bounded away
    from zero."""
    failures = []
    check(
        failures,
        float(np.min(np.abs(minimal_lift.A.real))) > 0.1
        and float(np.min(np.abs(minimal_lift.A.imag))) > 0.1,
        "witness needs |Re A| > 0.1 and |Im A| > 0.1",
    )
    mate = helicoidal_mate_product(minimal_lift)
    pair = make_pair(minimal_lift, mate)
    check(failures, (pair.sigma, pair.epsilon) == (1, 1), "pair signs not (+1, +1)")
    congruent, case = pointwise_congruent(minimal_lift, mate)
    check(failures, not congruent, f"members congruent via {case}")
    conclude(5, "noncongruent mate witness", failures)


def test_criterion_6_mate_factorization(cmc_lift, bundle_lift):
    """Helicoidal mates factor bit-exactly through parameter conjugation
    composed with one ambient isometry action."""
    failures = []
    screw_direct = helicoidal_mate_screw(bundle_lift)
    screw_composed = isometry_action(
        conjugate_parameter(bundle_lift), IsometryCase.REVERSE_BOTH
    )
    check(failures, fields_equal(screw_direct, screw_composed), "screw factorization differs")

    family = bundle_cylinder(-1.0, 0.5, 0.75)
    check(
        failures,
        fields_equal(
            helicoidal_mate_screw(family),
            isometry_action(conjugate_parameter(family), IsometryCase.REVERSE_BOTH),
        ),
        "screw factorization differs on the cylinder family",
    )

    product_direct = helicoidal_mate_product(cmc_lift)
    product_composed = isometry_action(
        conjugate_parameter(cmc_lift), IsometryCase.REVERSE_BASE_PRESERVE_FIBER
    )
    check(failures, fields_equal(product_direct, product_composed), "product factorization differs")
    conclude(6, "mate factorization bit-exact", failures)


def _reconstruction_case(builder):
    meshes, errors = {}, {}
    for n, cells in ((65, 2), (129, 4)):
        data = builder(n)
        mesh = reconstruct_surface(data)
        m = measure_mesh(mesh)
        k1, k2 = principal_curvatures(data)
        trim = lambda f: f[1:-1, 1:-1]
        cut = lambda f: f[cells:-cells, cells:-cells]
        errors[n] = {
            "lam": float(np.max(np.abs(cut(m.lam) - cut(trim(data.lam))))),
            "H": float(np.max(np.abs(cut(m.H) - cut(trim(data.H))))),
            "u": float(np.max(np.abs(cut(m.u) - cut(trim(data.u))))),
            "k1": float(np.max(np.abs(cut(m.k1) - cut(trim(k1))))),
            "k2": float(np.max(np.abs(cut(m.k2) - cut(trim(k2))))),
        }
        meshes[n] = mesh
    return meshes, errors


def _ratio_ok(coarse, fine, floor=1e-12):
    if coarse <= floor and fine <= floor:
        return True
    return fine > 0.0 and coarse / fine >= 3.5


def test_criterion_7_reconstruction_convergence():
    """Slice, cylinder, and helicoid rebuild from their data; refining the
    grid 2x divides every measured-field error and the holonomy defect by
    at least 3.5 (errors already at rounding level are exempt)."""
    failures = []
    t0 = time.perf_counter()

    def slice_builder(n):
        chart = Chart(-1.0, 1.0, -1.0, 1.0, n, n)
        return synthesize_canonical("slice", SpaceParams(1.0, 0.0), chart)

    def cylinder_builder(n):
        chart = Chart(-1.0, 1.0, -1.0, 1.0, n, n)
        return synthesize_canonical("cylinder", SpaceParams(-1.0, 0.0), chart)

    def helicoid_builder(n):
        params = SpaceParams(-1.0, 0.0)
        seed = ProfileState(0.0, 2.0, 0.0, complex(-0.5, -0.5), complex(-0.5, -0.5))
        hs = 0.6 / (n - 1)
        sol = integrate_profile(seed, 0.0, (0.0, 0.6), hs / 16.0, params)
        return lift_profile(sol, n, (0.0, 1.0), stride=16)

    for label, builder in (
        ("slice", slice_builder),
        ("cylinder", cylinder_builder),
        ("helicoid", helicoid_builder),
    ):
        meshes, errors = _reconstruction_case(builder)
        for field in ("lam", "H", "u", "k1", "k2"):
            ok = _ratio_ok(errors[65][field], errors[129][field])
            check(
                failures,
                ok,
                f"{label} {field}: {errors[65][field]:.2e} -> {errors[129][field]:.2e}",
            )
        ok = _ratio_ok(meshes[65].holonomy_defect, meshes[129].holonomy_defect)
        check(
            failures,
            ok,
            f"{label} holonomy: {meshes[65].holonomy_defect:.2e} -> "
            f"{meshes[129].holonomy_defect:.2e}",
        )
    elapsed = time.perf_counter() - t0
    check(failures, elapsed < 30.0, f"took {elapsed:.2f}s >= 30s")
    conclude(7, "reconstruction convergence", failures, elapsed)


def test_criterion_8_audit_identities(cmc_lift):
    """The twin of a constant-H cylinder pitches at exactly 2 f H = tau, and
    the positive audit certifies the CMC pair's conserved quantities."""
    failures = []
    berger = bundle_cylinder(0.0, 0.5, 0.5)
    twin_report = audit_negative_pair(make_pair(berger, twin(berger)))
    entries = {e.identity: e for e in twin_report.entries}
    check(failures, "two_f_H_minus_tau" in entries, "pitch identity not audited")
    if "two_f_H_minus_tau" in entries:
        worst = entries["two_f_H_minus_tau"].max_abs
        check(failures, worst <= 1e-10, f"|2 f H - tau| = {worst:.3e} > 1e-10")
    check(failures, twin_report.passed, "twin audit failed")

    pos_report = audit_positive_pair(make_pair(cmc_lift, helicoidal_mate_product(cmc_lift)))
    entries = {e.identity: e for e in pos_report.entries}
    for name in ("F_delta_constancy", "alpha_holomorphy"):
        check(failures, name in entries, f"{name} not audited")
        if name in entries:
            e = entries[name]
            check(
                failures,
                e.max_abs <= e.tolerance,
                f"{name} = {e.max_abs:.3e} > {e.tolerance:.3e}",
            )
    check(failures, pos_report.passed, "positive audit failed")
    conclude(8, "mate-pair audit identities", failures)
