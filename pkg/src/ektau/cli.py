"""Command-line interface.

Subcommands: synth, check, mate, helicoid, audit, reconstruct.  Exit codes:
0 success, 1 a numeric check failed, 2 precondition or argument error,
3 I/O or file-format error.  The environment variable BCV_TOL_FD overrides
the finite-difference tolerance used by check, audit, and reconstruct.
Report-writing commands also render a PNG figure next to each report unless
--no-figures is given.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import fundata, helicoid, mates, reconstruct
from .errors import DefectError, FileFormatError, PreconditionError
from .helicoid import ProfileState, classify_motion, integrate_profile, lift_profile
from .integrability import residuals
from .spaces import SpaceParams, classify_space


def _fd_override() -> float | None:
    raw = os.environ.get("BCV_TOL_FD")
    if raw is None or raw == "":
        return None
    try:
        value = float(raw)
    except ValueError:
        raise PreconditionError(f"BCV_TOL_FD is not a number: {raw!r}") from None
    if not value > 0:
        raise PreconditionError("BCV_TOL_FD must be positive")
    return value


def _figure_path(report: str) -> str:
    return str(Path(report).with_suffix(".png"))


def _print_pair_summary(data, mate_data) -> None:
    if mate_data.params != data.params:
        print("pair summary skipped (different target space)")
        return
    pair = mates.make_pair(data, mate_data)
    congruent, case = mates.pointwise_congruent(data, mate_data)
    print(f"sigma: {pair.sigma:+d}")
    print(f"epsilon: {pair.epsilon:+d}")
    line = f"pointwise_congruent: {str(congruent).lower()}"
    if congruent:
        line += f" ({case.value})"
    print(line)


def cmd_synth(args) -> int:
    params = SpaceParams(args.kappa, args.tau)
    chart = fundata.Chart(args.s_min, args.s_max, args.t_min, args.t_max,
                          args.ns, args.nt)
    data = fundata.synthesize_canonical(args.name, params, chart)
    fundata.save(data, args.out)
    print(f"wrote {args.out} ({args.name}, {classify_space(params).value}, "
          f"{chart.ns}x{chart.nt})")
    return 0


def cmd_check(args) -> int:
    data = fundata.load(args.infile)
    report = residuals(data, include_edges=args.include_edges, fd_tol=_fd_override())
    for row in report.rows:
        verdict = "pass" if row.passed else "FAIL"
        print(f"{row.equation}: max {row.max_abs:.3e} rms {row.rms:.3e} "
              f"(tol {row.tolerance:.3e}) {verdict}")
    if args.report:
        report.write_csv(args.report)
        print(f"wrote {args.report}")
        if not args.no_figures:
            from .figures import save_residual_figure

            save_residual_figure(data, _figure_path(args.report))
            print(f"wrote {_figure_path(args.report)}")
    return 0 if report.passed else 1


def cmd_mate(args) -> int:
    data = fundata.load(args.infile)
    if args.kind == "associate":
        if args.theta is None:
            raise PreconditionError("associate requires --theta")
        result = mates.associate(data, args.theta)
    elif args.kind == "product":
        result = mates.helicoidal_mate_product(data)
    elif args.kind == "screw":
        result = mates.helicoidal_mate_screw(data)
    elif args.kind == "twin":
        result = mates.twin(data)
    else:
        if args.kappa2 is None or args.tau2 is None:
            raise PreconditionError("sister requires --kappa2 and --tau2")
        target = SpaceParams(args.kappa2, args.tau2)
        H2 = args.H2
        if H2 is None:
            H1 = float(np.mean(data.H))
            radicand = H1 * H1 + data.params.tau**2 - target.tau**2
            if radicand < 0.0:
                raise PreconditionError(
                    "no admissible target mean curvature (H^2 + tau^2 too small)"
                )
            H2 = float(np.sqrt(radicand))
            print(f"H2 not given; using H2 = {H2!r}")
        result = mates.sister(data, target, H2)
    fundata.save(result, args.out)
    print(f"wrote {args.out} ({args.kind} mate)")
    _print_pair_summary(data, result)
    return 0


def cmd_helicoid(args) -> int:
    params = SpaceParams(args.kappa, args.tau)
    span = (args.span[0], args.span[1])
    initial = ProfileState(span[0], args.lambda0, args.u0,
                           complex(args.A0_re, args.A0_im),
                           complex(args.p0_re, args.p0_im))
    sol = integrate_profile(initial, args.H, span, args.step, params)
    helicoid.write_profile_csv(sol, args.out)
    defects = sol.max_defects()
    print(f"wrote {args.out} ({len(sol.s)} samples, step {sol.step:g})")
    print(f"max |c4| {defects['c4']:.3e}, max |im_u| {defects['im_u']:.3e}, "
          f"max |im_lambda| {defects['im_lambda']:.3e}")
    try:
        print(f"motion: {classify_motion(sol).value}")
    except PreconditionError as exc:
        print(f"motion: undetermined ({exc})")
    if not args.no_figures:
        from .figures import save_profile_figure

        save_profile_figure(sol, _figure_path(args.out))
        print(f"wrote {_figure_path(args.out)}")
    if args.lift:
        grid = lift_profile(sol, args.nt, (args.t_min, args.t_max), args.stride)
        fundata.save(grid, args.lift)
        print(f"wrote {args.lift} ({grid.chart.ns}x{grid.chart.nt})")
    return 0


def cmd_audit(args) -> int:
    first = fundata.load(args.pair[0])
    second = fundata.load(args.pair[1])
    pair = mates.make_pair(first, second)
    print(f"sigma: {pair.sigma:+d}, epsilon: {pair.epsilon:+d}")
    fd = _fd_override()
    if pair.epsilon == 1:
        report = helicoid.audit_positive_pair(pair, fd_tol=fd)
    else:
        report = helicoid.audit_negative_pair(pair, fd_tol=fd)
    if report.branch:
        print(f"branch: {report.branch}")
    for e in report.entries:
        verdict = "pass" if e.passed else "FAIL"
        print(f"{e.identity}: max {e.max_abs:.3e} rms {e.rms:.3e} "
              f"(tol {e.tolerance:.3e}) {verdict}")
    if args.report:
        report.write_csv(args.report)
        print(f"wrote {args.report}")
        if not args.no_figures:
            from .figures import save_audit_figure

            save_audit_figure(report, _figure_path(args.report))
            print(f"wrote {_figure_path(args.report)}")
    return 0 if report.passed else 1


def cmd_reconstruct(args) -> int:
    data = fundata.load(args.infile)
    mesh = reconstruct.reconstruct_surface(data, fd_tol=_fd_override())
    projection = args.projection
    if projection is None:
        projection = "PoincareDiskXR" if data.params.kappa < 0 else "SphereXR_unrolled"
    reconstruct.export_obj(mesh, args.out, projection)
    print(f"wrote {args.out} ({projection})")
    print(f"holonomy defect {mesh.holonomy_defect:.3e}, "
          f"quadric drift {mesh.max_quadric_drift:.3e}, "
          f"quadric defect {mesh.quadric_defect():.3e}")
    if not args.no_figures:
        from .figures import save_mesh_figure

        save_mesh_figure(mesh, _figure_path(args.out))
        print(f"wrote {_figure_path(args.out)}")
    return 0


def _add_chart_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--s-min", type=float, default=-1.0)
    p.add_argument("--s-max", type=float, default=1.0)
    p.add_argument("--t-min", type=float, default=-1.0)
    p.add_argument("--t-max", type=float, default=1.0)
    p.add_argument("--ns", type=int, default=65)
    p.add_argument("--nt", type=int, default=65)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ektau",
        description="Surfaces in homogeneous 3-manifolds from fundamental data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write canonical fundamental data")
    p.add_argument("name", choices=[fundata.SLICE, fundata.CYLINDER])
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--tau", type=float, default=0.0)
    _add_chart_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("check", help="evaluate the structure residuals")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--report", help="write a CSV report here")
    p.add_argument("--include-edges", action="store_true",
                   help="aggregate over the full grid including boundary stencils")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("mate", help="apply a mate transformation")
    p.add_argument("kind", choices=["associate", "product", "screw", "twin", "sister"])
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--theta", type=float, help="associate family angle")
    p.add_argument("--kappa2", type=float, help="sister target base curvature")
    p.add_argument("--tau2", type=float, help="sister target bundle curvature")
    p.add_argument("--H2", type=float,
                   help="sister target mean curvature (default: nonnegative root)")
    p.set_defaults(func=cmd_mate)

    p = sub.add_parser("helicoid", help="integrate an invariant-profile seed")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--lambda0", type=float, required=True)
    p.add_argument("--u0", type=float, default=0.0)
    p.add_argument("--A0-re", type=float, default=0.0)
    p.add_argument("--A0-im", type=float, default=0.0)
    p.add_argument("--p0-re", type=float, default=0.0)
    p.add_argument("--p0-im", type=float, default=0.0)
    p.add_argument("--H", type=float, default=0.0, help="constant mean curvature")
    p.add_argument("--span", type=float, nargs=2, default=[0.0, 1.0])
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--out", required=True, help="profile CSV path")
    p.add_argument("--lift", help="also write the broadcast grid here (.fdjson)")
    p.add_argument("--nt", type=int, default=65)
    p.add_argument("--t-min", type=float, default=-0.5)
    p.add_argument("--t-max", type=float, default=0.5)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_helicoid)

    p = sub.add_parser("audit", help="audit a mate pair")
    p.add_argument("--pair", nargs=2, required=True, metavar=("FIRST", "SECOND"))
    p.add_argument("--report", help="write a CSV report here")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("reconstruct", help="rebuild a surface mesh (tau = 0)")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True, help="mesh output path (OBJ or CSV)")
    p.add_argument("--projection", choices=list(reconstruct.PROJECTIONS))
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_reconstruct)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DefectError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1
    except FileFormatError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
