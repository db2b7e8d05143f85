"""Figure rendering for CLI reports.

Every figure writer takes a target path and saves a PNG; the Agg backend is
forced so the toolkit works headless.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .fundata import FundamentalDataGrid
from .helicoid import AuditReport, ProfileSolution
from .integrability import EQUATIONS, residual_fields
from .reconstruct import SurfaceMesh

_FLOOR = 1e-18


def save_residual_figure(data: FundamentalDataGrid, path: str) -> None:
    """Log-magnitude heatmaps of all structure residuals."""
    fields = residual_fields(data)
    chart = data.chart
    extent = (chart.s_min, chart.s_max, chart.t_min, chart.t_max)
    fig, axes = plt.subplots(2, 3, figsize=(12, 6.5), constrained_layout=True)
    for ax, eq in zip(axes.ravel(), EQUATIONS):
        mag = np.log10(np.abs(fields[eq]) + _FLOOR)
        im = ax.imshow(mag, origin="lower", extent=extent, aspect="auto", cmap="magma")
        ax.set_title(f"log10 |{eq}|")
        ax.set_xlabel("s")
        ax.set_ylabel("t")
        fig.colorbar(im, ax=ax, shrink=0.85)
    fig.suptitle(f"residuals, kappa={data.params.kappa:g} tau={data.params.tau:g}")
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_profile_figure(sol: ProfileSolution, path: str) -> None:
    """State curves and defect history of an integrated profile."""
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(8, 7), sharex=True,
                                      constrained_layout=True)
    top.plot(sol.s, sol.lam, label="lambda")
    top.plot(sol.s, sol.u, label="u")
    top.plot(sol.s, sol.A.real, label="Re A")
    top.plot(sol.s, sol.A.imag, label="Im A")
    top.plot(sol.s, sol.p.real, label="Re p", linestyle="--")
    top.plot(sol.s, sol.p.imag, label="Im p", linestyle="--")
    top.set_ylabel("state")
    top.legend(ncol=3, fontsize=8)
    for name, hist in (("c4", sol.c4), ("im_u", sol.im_u), ("im_lambda", sol.im_lambda)):
        bottom.semilogy(sol.s, np.abs(hist) + _FLOOR, label=name)
    bottom.set_xlabel("s")
    bottom.set_ylabel("|defect|")
    bottom.legend(fontsize=8)
    fig.suptitle(f"profile, step={sol.step:g}")
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_audit_figure(report: AuditReport, path: str) -> None:
    """Bar chart of audit entries against their tolerances."""
    fig, ax = plt.subplots(figsize=(8, 0.9 * max(3, len(report.entries))),
                           constrained_layout=True)
    if not report.entries:
        ax.axis("off")
        ax.text(0.5, 0.5, report.branch or "no entries",
                ha="center", va="center", fontsize=12)
    else:
        names = [e.identity for e in report.entries]
        values = [max(e.max_abs, _FLOOR) for e in report.entries]
        tols = [e.tolerance for e in report.entries]
        pos = np.arange(len(names))
        colors = ["tab:green" if e.passed else "tab:red" for e in report.entries]
        ax.barh(pos, values, color=colors)
        ax.scatter(tols, pos, color="black", marker="|", s=200, label="tolerance")
        ax.set_yticks(pos, names)
        ax.set_xscale("log")
        ax.set_xlabel("max |defect|")
        ax.legend(fontsize=8)
        ax.invert_yaxis()
    fig.suptitle(f"{report.kind} pair audit")
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_mesh_figure(mesh: SurfaceMesh, path: str) -> None:
    """Wireframe of the mesh in the projection matching the base curvature."""
    V = mesh.vertices
    kappa = mesh.params.kappa
    if kappa < 0:
        y = V[..., :3] * np.sqrt(-kappa)
        denom = 1.0 + y[..., 0]
        x1, x2 = y[..., 1] / denom, y[..., 2] / denom
        labels = ("disk x", "disk y")
    else:
        y = V[..., :3] * np.sqrt(kappa)
        x1 = np.arccos(np.clip(y[..., 0], -1.0, 1.0))
        x2 = np.arctan2(y[..., 2], y[..., 1])
        labels = ("theta", "phi")
    h = V[..., 3]
    fig, (left, right) = plt.subplots(1, 2, figsize=(11, 5), constrained_layout=True)
    step_t = max(1, V.shape[0] // 24)
    step_s = max(1, V.shape[1] // 24)
    for j in range(0, V.shape[0], step_t):
        left.plot(x1[j], x2[j], color="tab:blue", linewidth=0.6)
    for i in range(0, V.shape[1], step_s):
        left.plot(x1[:, i], x2[:, i], color="tab:blue", linewidth=0.6)
    left.set_xlabel(labels[0])
    left.set_ylabel(labels[1])
    left.set_title("base projection")
    left.set_aspect("equal", adjustable="datalim")
    im = right.imshow(h, origin="lower", aspect="auto", cmap="viridis",
                      extent=(mesh.chart.s_min, mesh.chart.s_max,
                              mesh.chart.t_min, mesh.chart.t_max))
    right.set_title("height")
    right.set_xlabel("s")
    right.set_ylabel("t")
    fig.colorbar(im, ax=right, shrink=0.85)
    fig.suptitle(
        f"mesh ({mesh.signature}), holonomy {mesh.holonomy_defect:.2e}, "
        f"drift {mesh.max_quadric_drift:.2e}"
    )
    fig.savefig(path, dpi=130)
    plt.close(fig)
