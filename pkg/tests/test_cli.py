"""End-to-end command line flows driven through subprocesses.

Exit code contract: 0 all checks passed, 1 numeric failure, 2 bad
arguments or preconditions, 3 file and I/O problems.
"""

import json
import os
import subprocess
import sys

import pytest


def run_cli(*args, cwd, env_extra=None):
    env = dict(os.environ)
    env.pop("BCV_TOL_FD", None)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "ektau.cli", *map(str, args)],
        cwd=cwd,
        env=env,
        capture_output=True,
        text=True,
        timeout=120,
    )


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    r = run_cli(
        "synth", "cylinder", "--kappa", -1.0, "--ns", 33, "--nt", 17,
        "--out", "cyl.fdjson", cwd=d,
    )
    assert r.returncode == 0, r.stderr
    r = run_cli(
        "synth", "slice", "--kappa", 1.0, "--ns", 17, "--nt", 17,
        "--out", "slice.fdjson", cwd=d,
    )
    assert r.returncode == 0, r.stderr
    return d


def test_check_passes_and_writes_report_and_figure(workdir):
    r = run_cli("check", "--in", "cyl.fdjson", "--report", "rep.csv", cwd=workdir)
    assert r.returncode == 0
    assert "C4" in r.stdout and "pass" in r.stdout
    assert (workdir / "rep.csv").exists()
    assert (workdir / "rep.png").exists()


def test_check_no_figures(workdir):
    r = run_cli(
        "check", "--in", "cyl.fdjson", "--report", "rep2.csv", "--no-figures",
        cwd=workdir,
    )
    assert r.returncode == 0
    assert (workdir / "rep2.csv").exists()
    assert not (workdir / "rep2.png").exists()


def test_check_numeric_failure_exit_code(workdir):
    raw = json.loads((workdir / "cyl.fdjson").read_text())
    raw["u"] = [v + 0.3 for v in raw["u"]]
    (workdir / "broken.fdjson").write_text(json.dumps(raw))
    r = run_cli("check", "--in", "broken.fdjson", "--no-figures", cwd=workdir)
    assert r.returncode == 1
    assert "FAIL" in r.stdout


def test_check_env_override_keeps_algebraic_gate(workdir):
    r = run_cli(
        "check", "--in", "broken.fdjson", "--no-figures",
        cwd=workdir, env_extra={"BCV_TOL_FD": "1e6"},
    )
    # loose derivative tolerance cannot excuse the pointwise constraint
    assert r.returncode == 1
    assert "1.000e+06" in r.stdout
    r = run_cli(
        "check", "--in", "cyl.fdjson", "--no-figures",
        cwd=workdir, env_extra={"BCV_TOL_FD": "not-a-number"},
    )
    assert r.returncode == 2


def test_malformed_file_exit_code(workdir):
    (workdir / "garbage.fdjson").write_text("{oops")
    r = run_cli("check", "--in", "garbage.fdjson", cwd=workdir)
    assert r.returncode == 3
    r = run_cli("check", "--in", "missing.fdjson", cwd=workdir)
    assert r.returncode == 3


def test_synth_precondition_exit_code(workdir):
    r = run_cli(
        "synth", "cylinder", "--kappa", 1.0, "--tau", 0.5,
        "--out", "x.fdjson", cwd=workdir,
    )
    assert r.returncode == 2
    assert "tau" in r.stderr


def test_mate_product_summary(workdir):
    r = run_cli(
        "mate", "product", "--in", "cyl.fdjson", "--out", "mate.fdjson", cwd=workdir
    )
    assert r.returncode == 0
    assert "sigma: +1" in r.stdout
    assert "epsilon: +1" in r.stdout
    r2 = run_cli("check", "--in", "mate.fdjson", "--no-figures", cwd=workdir)
    assert r2.returncode == 0


def test_mate_twin_requires_twisted_bundle(workdir):
    r = run_cli(
        "mate", "twin", "--in", "cyl.fdjson", "--out", "x.fdjson", cwd=workdir
    )
    assert r.returncode == 2


def test_helicoid_profile_lift_audit_flow(workdir):
    r = run_cli(
        "helicoid", "--kappa", 0.0, "--tau", 0.5, "--lambda0", 4.0,
        "--A0-re", 1.0, "--A0-im", 0.0, "--p0-re", -1.0, "--p0-im", 1.0,
        "--H", 0.5, "--span", 0.0, 1.0, "--step", 0.0078125,
        "--out", "prof.csv", "--lift", "lifted.fdjson",
        "--nt", 17, "--t-min", 0.0, "--t-max", 1.0, "--stride", 8,
        "--no-figures", cwd=workdir,
    )
    assert r.returncode == 0, r.stderr
    assert (workdir / "prof.csv").exists()
    assert (workdir / "lifted.fdjson").exists()

    r = run_cli(
        "mate", "twin", "--in", "lifted.fdjson", "--out", "twin.fdjson", cwd=workdir
    )
    assert r.returncode == 0
    assert "epsilon: -1" in r.stdout

    r = run_cli(
        "audit", "--pair", "lifted.fdjson", "twin.fdjson",
        "--report", "audit.csv", "--no-figures", cwd=workdir,
    )
    assert r.returncode == 0, r.stderr
    assert "two_f_H_minus_tau" in r.stdout
    assert (workdir / "audit.csv").exists()


def test_helicoid_rejects_invalid_seed(workdir):
    r = run_cli(
        "helicoid", "--kappa", -1.0, "--lambda0", 1.0,
        "--A0-re", -0.5, "--A0-im", -0.5, "--p0-re", -0.5, "--p0-im", -0.5,
        "--span", 0.0, 1.0, "--step", 0.001, "--out", "x.csv",
        "--no-figures", cwd=workdir,
    )
    assert r.returncode == 2


def test_helicoid_defect_abort_exit_code(workdir):
    # the minimal profile drives u past -1 when integrated too far
    r = run_cli(
        "helicoid", "--kappa", -1.0, "--lambda0", 2.0,
        "--A0-re", -0.5, "--A0-im", -0.5, "--p0-re", -0.5, "--p0-im", -0.5,
        "--span", 0.0, 2.0, "--step", 0.001, "--out", "x.csv",
        "--no-figures", cwd=workdir,
    )
    assert r.returncode == 1


def test_audit_positive_pair_flow(workdir):
    r = run_cli(
        "audit", "--pair", "cyl.fdjson", "mate.fdjson",
        "--report", "pos.csv", "--no-figures", cwd=workdir,
    )
    assert r.returncode == 0
    assert "alpha_holomorphy" in r.stdout


def test_reconstruct_obj_and_figure(workdir):
    r = run_cli("reconstruct", "--in", "cyl.fdjson", "--out", "mesh.obj", cwd=workdir)
    assert r.returncode == 0
    assert "PoincareDiskXR" in r.stdout
    assert (workdir / "mesh.obj").exists()
    assert (workdir / "mesh.png").exists()
    head = (workdir / "mesh.obj").read_text().splitlines()[0]
    assert head.startswith("v ")


def test_reconstruct_sphere_default_projection(workdir):
    r = run_cli(
        "reconstruct", "--in", "slice.fdjson", "--out", "slice.obj",
        "--no-figures", cwd=workdir,
    )
    assert r.returncode == 0
    assert "SphereXR_unrolled" in r.stdout


def test_reconstruct_rejects_twisted_bundle(workdir):
    r = run_cli(
        "reconstruct", "--in", "lifted.fdjson", "--out", "x.obj", cwd=workdir
    )
    assert r.returncode == 2
