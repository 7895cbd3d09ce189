import json

import numpy as np
import pytest

from pharmonic.cli import (
    EXIT_DOMAIN,
    EXIT_FAIL,
    EXIT_PASS,
    EXIT_USAGE,
    RunConfig,
    cmd_calibrate,
    cmd_dual,
    cmd_flag,
    cmd_grassmann,
    cmd_pharmonic,
    main,
)
from pharmonic.reports import validate_report_dict


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


# -- commands through the Python API ---------------------------------------------


def test_calibrate_passes_small_group():
    report = cmd_calibrate(RunConfig("calibrate", m=1, n=1, samples=5))
    assert report.passed
    assert max(report.max_residuals.values()) <= 1e-10


def test_calibrate_rescaled_basis_fails():
    report = cmd_calibrate(RunConfig("calibrate", m=2, n=2, samples=3, basis_scale=1.1))
    assert not report.passed


def test_grassmann_negative_control(tmp_path):
    bad = np.diag([1.0, -1.0, 0.0, 0.0])
    path = tmp_path / "bad.csv"
    rows = [",".join(f"{v}:0" for v in row) for row in bad]
    path.write_text("\n".join(rows) + "\n")
    report = cmd_grassmann(
        RunConfig("grassmann", m=2, n=2, samples=3, a_file=str(path))
    )
    assert not report.passed
    failed = {r.check for r in report.checks if not r.passed}
    assert "matrix_rank" in failed and "matrix_square" in failed
    assert any("kappa_eigen" in c for c in failed)


def test_grassmann_single_row_window_matches_sphere_eigenvalue():
    # m = 1 runs against the eigenvalue -(n+1), the degree-two value on the sphere
    report = cmd_grassmann(RunConfig("grassmann", m=1, n=3, samples=3))
    assert report.passed
    assert any("-(n+1) = -4" in note for note in report.notes)


def test_pharmonic_equal_eigenvalue_case_noted():
    report = cmd_pharmonic(RunConfig("pharmonic", m=1, n=1, p=2, samples=3))
    assert report.passed
    assert any("lam = mu" in note for note in report.notes)


def test_pharmonic_first_order_reduces_to_harmonicity():
    report = cmd_pharmonic(RunConfig("pharmonic", m=2, n=2, p=1, samples=3))
    assert report.passed
    assert report.max_residuals["tau_p_residual"] <= 1e-9


def test_pharmonic_domain_exhaustion_when_function_is_tiny():
    # coefficients so small that every sample sits under the magnitude floor
    with pytest.raises(Exception) as err:
        cmd_pharmonic(RunConfig("pharmonic", m=2, n=2, p=2, samples=3, w="1e-9,1e-9,1e-9"))
    assert "conditioned" in str(err.value) or "branch" in str(err.value)


def test_flag_two_blocks_skips_non_descent():
    report = cmd_flag(RunConfig("flag", blocks=(2, 2), p=2, samples=3))
    assert report.passed
    assert not report.records_for("non_descent_witness")
    assert any("skipped" in note for note in report.notes)


def test_flag_three_blocks_has_witness():
    report = cmd_flag(RunConfig("flag", blocks=(1, 1, 2), p=2, samples=3))
    assert report.passed
    assert report.records_for("non_descent_witness")


def test_flag_third_order_two_blocks():
    report = cmd_flag(RunConfig("flag", blocks=(2, 2), p=3, samples=2))
    assert report.passed
    assert report.max_residuals["tau_p_residual"] <= 1e-6


def test_dual_radius_zero_is_degenerate():
    report = cmd_dual(RunConfig("dual", m=2, n=2, p=2, samples=4, radius=0.0))
    assert any("degenerate" in note for note in report.notes)


def test_dual_small_radius_passes():
    report = cmd_dual(RunConfig("dual", m=1, n=2, p=2, samples=4, radius=0.5))
    assert report.passed


def test_usage_validation():
    with pytest.raises(Exception):
        cmd_calibrate(RunConfig("calibrate", m=0, n=2))


# -- the executable surface ---------------------------------------------------------


def test_main_calibrate_writes_report(tmp_path, capsys):
    out_file = tmp_path / "report.json"
    code, out = run_cli(
        capsys,
        "calibrate", "--m", "2", "--n", "2", "--samples", "3", "--out", str(out_file),
    )
    assert code == EXIT_PASS
    doc = json.loads(out)
    validate_report_dict(doc)
    on_disk = json.loads(out_file.read_text())
    validate_report_dict(on_disk)
    assert on_disk["config"]["seed"] == 7


def test_main_csv_residual_dump(tmp_path, capsys):
    csv_file = tmp_path / "residuals.csv"
    code, _ = run_cli(
        capsys,
        "calibrate", "--m", "2", "--n", "2", "--samples", "2", "--csv", str(csv_file),
    )
    assert code == EXIT_PASS
    lines = csv_file.read_text().strip().splitlines()
    assert lines[0] == "check,point,residual,threshold,passed,kind"
    assert len(lines) == 1 + 4  # two checks per sample point
    assert all(line.endswith(",True,upper") for line in lines[1:])


def test_main_grassmann_with_w(capsys):
    code, out = run_cli(
        capsys,
        "grassmann", "--m", "2", "--n", "3", "--w", "1,2,3,4", "--samples", "3",
    )
    assert code == EXIT_PASS
    doc = json.loads(out)
    assert doc["passed"] is True


def test_main_exit_code_on_verification_failure(tmp_path, capsys):
    bad = np.zeros((4, 4))
    bad[0, 0], bad[1, 1] = 1.0, -1.0
    path = tmp_path / "bad.csv"
    path.write_text("\n".join(",".join(f"{v}:0" for v in row) for row in bad) + "\n")
    code, out = run_cli(
        capsys,
        "grassmann", "--m", "2", "--n", "2", "--A", str(path), "--samples", "3",
    )
    assert code == EXIT_FAIL
    doc = json.loads(out)
    assert doc["passed"] is False


def test_main_exit_code_on_bad_config(capsys):
    code, _ = run_cli(capsys, "flag", "--blocks", "4", "--samples", "3")
    assert code == EXIT_USAGE
    code, _ = run_cli(capsys, "grassmann", "--w", "1,2", "--m", "2", "--n", "2")
    assert code == EXIT_USAGE
    code, _ = run_cli(capsys, "pharmonic", "--p", "9")
    assert code == EXIT_USAGE


def test_main_exit_code_on_domain_failure(capsys):
    code, _ = run_cli(
        capsys,
        "pharmonic", "--m", "2", "--n", "2", "--p", "2", "--samples", "3",
        "--w", "1e-9,1e-9,1e-9",
    )
    assert code == EXIT_DOMAIN


def test_main_rejects_unknown_command(capsys):
    assert main(["definitely-not-a-command"]) == EXIT_USAGE


def test_main_determinism_modulo_timing(capsys):
    argv = ["pharmonic", "--m", "1", "--n", "2", "--p", "2", "--samples", "3"]
    code1, out1 = run_cli(capsys, *argv)
    code2, out2 = run_cli(capsys, *argv)
    assert code1 == code2 == EXIT_PASS
    d1, d2 = json.loads(out1), json.loads(out2)
    d1.pop("timing_seconds"), d2.pop("timing_seconds")
    assert json.dumps(d1, sort_keys=True) == json.dumps(d2, sort_keys=True)


def test_main_report_schema(capsys):
    code, out = run_cli(capsys, "report-schema")
    assert code == EXIT_PASS
    schema = json.loads(out)
    assert schema["schema_version"]
    assert "checks" in schema["properties"]


def test_tol_scale_environment_variable(monkeypatch, capsys):
    # an absurdly tight global scale forces residuals over threshold
    monkeypatch.setenv("GH_VERIFY_TOL_SCALE", "1e-12")
    code, out = run_cli(capsys, "calibrate", "--m", "2", "--n", "2", "--samples", "2")
    assert code == EXIT_FAIL
    monkeypatch.setenv("GH_VERIFY_TOL_SCALE", "not-a-number")
    code, _ = run_cli(capsys, "calibrate", "--m", "2", "--n", "2", "--samples", "2")
    assert code == EXIT_USAGE


def test_tol_override_flag(capsys):
    code, out = run_cli(
        capsys,
        "calibrate", "--m", "2", "--n", "2", "--samples", "2", "--tol", "1e-18",
    )
    assert code == EXIT_FAIL
