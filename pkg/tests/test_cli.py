import json
import subprocess
import sys

import numpy as np
import pytest

from newtonlk import cli

KEYS = ["schema_version", "config_echo", "predicted", "fitted", "residuals", "identities", "classification"]
CAP = ["verify-example", "--family", "umbilic_sphere_cap", "--n", "2", "--tau", "0.5", "--k", "0", "--samples", "60"]
CLIFFORD = ["verify-example", "--family", "riemannian_product", "--c", "1", "--n", "2", "--m", "1", "--r", "0.70710678", "--k", "0", "--samples", "60"]


def run(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = cli.main(argv + ["--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_identity_suite(tmp_path):
    code, rep = run(["identity-suite", "--n-max", "6", "--trials", "100", "--seed", "42"], tmp_path)
    assert code == 0
    assert list(rep) == KEYS and rep["schema_version"] == 1
    assert max(rep["identities"]["max_residual"].values()) <= 1e-12
    assert set(rep["identities"]["per_dimension"]) == {"2", "3", "4", "5", "6"}


def test_identity_suite_smoke(tmp_path):
    assert run(["identity-suite", "--n-max", "8", "--trials", "1", "--seed", "0"], tmp_path)[0] == 0


def test_identity_suite_usage_error(tmp_path, capsys):
    code, rep = run(["identity-suite", "--n-max", "1"], tmp_path)
    assert code == 2 and rep is None
    assert "n-max" in capsys.readouterr().err


def test_verify_sphere_cap(tmp_path):
    code, rep = run(CAP, tmp_path)
    assert code == 0
    assert rep["classification"]["verdict"] == "totally_umbilical"
    b = np.array(rep["fitted"]["aligned_b"])
    a = np.array([0, 0, 0, 1.0])
    assert np.allclose(b / np.linalg.norm(b), a, atol=1e-8)
    assert np.allclose(rep["predicted"]["A"], -(8 / 3) * np.eye(4))
    assert all(rep["residuals"]["checks"].values())


def test_verify_clifford(tmp_path):
    code, rep = run(CLIFFORD, tmp_path)
    assert code == 0
    assert np.abs(np.array(rep["fitted"]["A"]) + 2 * np.eye(4)).max() <= 1e-4
    assert np.abs(rep["fitted"]["b"]).max() <= 1e-4
    assert rep["classification"]["verdict"] == "isoparametric_product"


@pytest.mark.parametrize(
    "argv",
    [
        ["verify-example", "--family", "riemannian_product", "--c", "1", "--n", "2", "--m", "1", "--r", "1.5"],
        ["verify-example", "--family", "umbilic_sphere_cap", "--n", "2", "--tau", "0.5", "--k", "2"],
        ["verify-example", "--family", "umbilic_sphere_cap", "--n", "2", "--tau", "0.5", "--axis", "timelike"],
        ["verify-example", "--family", "umbilic_hyperbolic", "--n", "2", "--tau", "0.5", "--axis", "timelike"],
        ["verify-example", "--family", "klein_bottle", "--n", "2"],
        ["fit", "--csv", "x.csv", "--k", "0"],
    ],
)
def test_usage_errors(tmp_path, argv):
    assert cli.main(argv) == 2


def test_verify_with_constraint_and_lightlike(tmp_path):
    argv = ["verify-example", "--family", "umbilic_hyperbolic", "--n", "2", "--tau", "-0.8", "--axis", "lightlike",
            "--k", "1", "--samples", "40", "--constrain-selfadjoint"]
    code, rep = run(argv, tmp_path)
    assert code == 0
    assert rep["fitted"]["constrained_selfadjoint"] is True
    assert np.abs(rep["predicted"]["A"]).max() == 0.0
    assert rep["residuals"]["structural"]["b_dot_x_minus_ckHk_std"] <= 1e-6


def test_determinism(tmp_path):
    assert cli.main(CAP + ["--seed", "5", "--out", str(tmp_path / "a.json")]) == 0
    assert cli.main(CAP + ["--seed", "5", "--out", str(tmp_path / "b.json")]) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert cli.main(CAP + ["--seed", "6", "--out", str(tmp_path / "c.json")]) == 0
    assert (tmp_path / "a.json").read_bytes() != (tmp_path / "c.json").read_bytes()


def test_csv_round_trip(tmp_path):
    csv_path = tmp_path / "s.csv"
    code, rep = run(CLIFFORD + ["--csv", str(csv_path)], tmp_path)
    assert code == 0
    header = csv_path.read_text().splitlines()[0].split(",")
    assert header == ["u_1", "u_2", "x_0", "x_1", "x_2", "x_3", "Lkx_0", "Lkx_1", "Lkx_2", "Lkx_3"]
    before = csv_path.read_bytes()
    code, fitted = run(["fit", "--csv", str(csv_path), "--k", "0", "--c", "1"], tmp_path, "fit.json")
    assert code == 0
    assert csv_path.read_bytes() == before
    assert np.abs(np.array(fitted["fitted"]["A"]) - np.array(rep["fitted"]["A"])).max() <= 1e-12
    assert np.abs(np.array(fitted["fitted"]["b"]) - np.array(rep["fitted"]["b"])).max() <= 1e-12
    assert list(fitted) == KEYS and fitted["predicted"] is None


def test_fit_classifies_from_csv(tmp_path):
    csv_path = tmp_path / "cap.csv"
    run(CAP + ["--csv", str(csv_path)], tmp_path)
    code, rep = run(["fit", "--csv", str(csv_path), "--k", "0", "--c", "1"], tmp_path, "fit.json")
    assert code == 0
    assert rep["classification"]["verdict"] == "totally_umbilical"
    assert rep["classification"]["evidence"]["shape_source"] == "reconstructed_from_fit"


def write_rows(path, header, rows):
    lines = [",".join(header)] + [",".join(str(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")


def test_fit_header_only(tmp_path, capsys):
    p = tmp_path / "h.csv"
    write_rows(p, cli.csv_header(2), [])
    assert cli.main(["fit", "--csv", str(p), "--k", "0", "--c", "1"]) == 2
    assert "no sample rows" in capsys.readouterr().err


def test_fit_mixed_n(tmp_path, capsys):
    p = tmp_path / "m.csv"
    row2 = [0.1, 0.2, 0, 0, 0, 1.0, 0, 0, 0, -2.0]
    row3 = [0.1, 0.2, 0.3, 0, 0, 0, 0, 1.0, 0, 0, 0, 0, 0, -3.0]
    write_rows(p, cli.csv_header(2), [row2, row3])
    assert cli.main(["fit", "--csv", str(p), "--k", "0", "--c", "1"]) == 2
    err = capsys.readouterr().err
    assert "row 3" in err and "columns" in err


def test_fit_bad_cells(tmp_path, capsys):
    p = tmp_path / "b.csv"
    write_rows(p, cli.csv_header(2), [[0.1, 0.2, 0, 0, 0, 1.0, 0, 0, 0, -2.0], [0.1, "abc", 0, 0, 0, 1.0, 0, 0, 0, -2.0]])
    assert cli.main(["fit", "--csv", str(p), "--k", "0", "--c", "1"]) == 2
    assert "row 3, column u_2" in capsys.readouterr().err
    write_rows(p, cli.csv_header(2), [[0.1, 0.2, 0, 0, 2.0, 1.0, 0, 0, 0, -2.0]] * 2)
    assert cli.main(["fit", "--csv", str(p), "--k", "0", "--c", "1"]) == 2
    write_rows(p, ["a", "b"], [[1, 2]])
    assert cli.main(["fit", "--csv", str(p), "--k", "0", "--c", "1"]) == 2


def test_fit_missing_file(tmp_path):
    assert cli.main(["fit", "--csv", str(tmp_path / "none.csv"), "--k", "0", "--c", "1"]) == 3


def test_unwritable_output(tmp_path):
    assert cli.main(["identity-suite", "--n-max", "2", "--trials", "1", "--out", str(tmp_path / "no" / "x.json")]) == 3


def test_fit_random_cloud_fails_checks(tmp_path):
    rng = np.random.default_rng(0)
    x = rng.normal(size=(50, 4))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    rows = np.hstack([rng.normal(size=(50, 2)), x, rng.normal(size=(50, 4))])
    p = tmp_path / "r.csv"
    write_rows(p, cli.csv_header(2), [[repr(float(v)) for v in r] for r in rows])
    code, rep = run(["fit", "--csv", str(p), "--k", "0", "--c", "1"], tmp_path)
    assert code == 1
    assert rep["classification"]["verdict"] == "no_match"
    assert rep["residuals"]["rms_residual"] > 1e-2


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "newtonlk.cli", "identity-suite", "--n-max", "3", "--trials", "2"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["identities"]["passed"] is True


def test_render_report_handles_numpy_and_nonfinite():
    text = cli.render_report({"a": np.array([1.0, np.nan]), "b": np.float64(-0.0), "c": np.int64(3), "d": np.bool_(True)})
    assert json.loads(text) == {"a": [1.0, None], "b": 0.0, "c": 3, "d": True}
    assert "-0.0" not in text
