import json
import subprocess
import sys

import numpy as np
import pytest

from pseudodet.cli import format_float, main, read_dataset, read_matrix
from pseudodet.exceptions import EmptyDataset, InputError

ONES2 = [[1.0, 1.0], [1.0, 1.0]]


def write_matrix(path, M, imag=None):
    M = np.asarray(M, dtype=float)
    doc = {"n": M.shape[0], "real": M.tolist()}
    if imag is not None:
        doc["imag"] = np.asarray(imag, dtype=float).tolist()
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def files(tmp_path):
    a, b = np.sqrt(1.0), 2.0
    out = {
        "ones2": write_matrix(tmp_path / "ones2.json", ONES2),
        "zero2": write_matrix(tmp_path / "zero2.json", np.zeros((2, 2))),
        "zero3": write_matrix(tmp_path / "zero3.json", np.zeros((3, 3))),
        "constant4": write_matrix(tmp_path / "constant4.json", np.ones((4, 4))),
        "lap2_c3": write_matrix(tmp_path / "lap2_c3.json", 3 * np.array([[1, -1], [-1, 1]])),
        "projdil_1_2": write_matrix(
            tmp_path / "projdil_1_2.json", [[a * a, a * b], [a * b, b * b]]
        ),
        "diag_a0": write_matrix(tmp_path / "diag_a0.json", np.diag([7.0, 0.0])),
        "diag10": write_matrix(tmp_path / "diag10.json", np.diag([1.0, 0.0])),
        "diag01": write_matrix(tmp_path / "diag01.json", np.diag([0.0, 1.0])),
        "diag20": write_matrix(tmp_path / "diag20.json", np.diag([2.0, 0.0])),
        "diag30": write_matrix(tmp_path / "diag30.json", np.diag([3.0, 0.0])),
        "eye2": write_matrix(tmp_path / "eye2.json", np.eye(2)),
        "half": write_matrix(tmp_path / "half.json", 0.5 * np.ones((2, 2))),
        "asym": write_matrix(tmp_path / "asym.json", [[0, 1], [0, 0]]),
        "notpsd": write_matrix(tmp_path / "notpsd.json", np.diag([1.0, -1.0])),
    }
    for name, vec in {"zero_vec": [0, 0], "mu12": [1, 2], "x_off": [1, -1], "zero3_vec": [0, 0, 0]}.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(vec))
        out[name] = str(p)
    p = tmp_path / "two.csv"
    p.write_text("1,1\n-1,-1\n")
    out["two"] = str(p)
    p = tmp_path / "basis.csv"
    p.write_text("1,0\n0,1\n")
    out["basis"] = str(p)
    p = tmp_path / "empty.csv"
    p.write_text("")
    out["empty"] = str(p)
    p = tmp_path / "ragged.csv"
    p.write_text("1,2\n3\n")
    out["ragged"] = str(p)
    return out


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    doc = json.loads(captured.out) if code == 0 and captured.out.strip().startswith("{") else None
    return code, doc, captured


def matrix(obj):
    return np.asarray(obj["real"])


class TestPdet:
    def test_spectral(self, capsys, files):
        code, doc, _ = run(capsys, "pdet", files["ones2"])
        assert code == 0
        assert doc["command"] == "pdet"
        assert doc["result"]["value"] == pytest.approx(2, abs=1e-14)
        assert doc["result"]["rank"] == 1
        assert doc["diagnostics"]["rank"] == 1

    def test_zero(self, capsys, files):
        _, doc, _ = run(capsys, "pdet", files["zero3"])
        assert doc["result"]["value"] == 1 and doc["result"]["rank"] == 0

    def test_minor(self, capsys, files):
        _, doc, _ = run(capsys, "pdet", files["ones2"], "--method", "minor")
        assert doc["result"]["value"] == 2.0

    def test_limit_sequence(self, capsys, files):
        _, doc, _ = run(capsys, "pdet", files["ones2"], "--method", "limit")
        est = doc["result"]["estimates"]
        assert [e["delta"] for e in est] == [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
        assert doc["result"]["value"] == pytest.approx(2, abs=1e-5)

    def test_rejects_asymmetric(self, capsys, files):
        code, _, cap = run(capsys, "pdet", files["asym"])
        assert code == 1 and cap.out == "" and "not Hermitian" in cap.err

    def test_symmetrize_flag(self, capsys, files):
        code, doc, _ = run(capsys, "pdet", files["asym"], "--symmetrize")
        assert code == 0
        assert doc["result"]["value"] == pytest.approx(-0.25)

    def test_rel_tol_flag(self, capsys, tmp_path):
        f = write_matrix(tmp_path / "m.json", np.diag([1.0, 1e-9]))
        _, doc, _ = run(capsys, "pdet", f, "--rel-tol", "1e-6")
        assert doc["result"]["rank"] == 1 and doc["inputs"]["rel_tol"] == 1e-6

    def test_minor_cap_env(self, capsys, tmp_path, monkeypatch):
        f = write_matrix(tmp_path / "m.json", np.eye(3))
        monkeypatch.setenv("PSEUDODET_MINOR_CAP", "2")
        code, _, cap = run(capsys, "pdet", f, "--method", "minor")
        assert code == 2 and "cap" in cap.err

    def test_complex_input(self, capsys, tmp_path):
        f = write_matrix(tmp_path / "c.json", [[2, 0], [0, 2]], imag=[[0, 1], [-1, 0]])
        _, doc, _ = run(capsys, "pdet", f)
        # eigenvalues 1 and 3
        assert doc["result"]["value"] == pytest.approx(3)

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "pdet", str(tmp_path / "nope.json"))
        assert code == 1


class TestPinv:
    def test_ones(self, capsys, files):
        _, doc, _ = run(capsys, "pinv", files["ones2"])
        np.testing.assert_allclose(matrix(doc["result"]["pinv"]), 0.25 * np.ones((2, 2)), atol=1e-15)
        assert max(doc["diagnostics"]["penrose"].values()) < 1e-14

    def test_constant4_berg(self, capsys, files):
        _, doc, _ = run(capsys, "pinv", files["constant4"], "--method", "berg")
        np.testing.assert_allclose(matrix(doc["result"]["pinv"]), np.ones((4, 4)) / 16, atol=1e-14)

    def test_zero(self, capsys, files):
        _, doc, _ = run(capsys, "pinv", files["zero2"])
        assert matrix(doc["result"]["pinv"]).tolist() == [[0, 0], [0, 0]]


class TestGrad:
    def test_laplacian(self, capsys, files):
        _, doc, _ = run(capsys, "grad", files["lap2_c3"])
        np.testing.assert_allclose(matrix(doc["result"]["can"]), 0.5 * np.array([[1, -1], [-1, 1]]), atol=1e-15)
        assert doc["result"]["det"] == pytest.approx(6)
        assert doc["diagnostics"]["class_residual1"] < 1e-12

    def test_projection_dilation(self, capsys, files):
        _, doc, _ = run(capsys, "grad", files["projdil_1_2"])
        A = np.array([[1, 2], [2, 4.0]])
        np.testing.assert_allclose(matrix(doc["result"]["can"]), A / 5, atol=1e-14)

    def test_diag(self, capsys, files):
        _, doc, _ = run(capsys, "grad", files["diag_a0"])
        np.testing.assert_allclose(matrix(doc["result"]["can"]), np.diag([1, 0]), atol=1e-15)


class TestCheck:
    def test_ones(self, capsys, files):
        code, doc, _ = run(capsys, "check", files["ones2"], files["ones2"])
        r = doc["result"]
        assert code == 0 and r["kernel_match"] is True
        assert r["analytic"] == pytest.approx(2, abs=1e-14)
        assert r["finite_difference"] == pytest.approx(2, abs=1e-8)

    def test_kernel_mismatch(self, capsys, files):
        code, doc, cap = run(capsys, "check", files["diag10"], files["diag01"])
        assert code == 2 and doc is None and "kernel" in cap.err

    def test_diag(self, capsys, files):
        _, doc, _ = run(capsys, "check", files["diag20"], files["diag30"], "--tau", "1e-6")
        assert doc["result"]["analytic"] == 3.0
        assert doc["result"]["abs_err"] <= 1e-8


class TestMle:
    def test_kernel_free(self, capsys, files):
        _, doc, _ = run(capsys, "mle", files["two"], "--mean-zero")
        r = doc["result"]
        np.testing.assert_allclose(matrix(r["sigma_hat"]), np.ones((2, 2)))
        np.testing.assert_allclose(matrix(r["R"]), 2 * np.ones((2, 2)))
        assert r["N"] == 2 and r["mode"] == "kernel_free"
        assert r["projected_gradient_norm"] <= 1e-12

    def test_fixed_range(self, capsys, files):
        _, doc, _ = run(capsys, "mle", files["basis"], "--mean", files["zero_vec"], "--projector", files["half"])
        assert doc["result"]["mode"] == "fixed_range"
        np.testing.assert_allclose(matrix(doc["result"]["sigma_hat"]), 0.25 * np.ones((2, 2)), atol=1e-15)

    def test_empty(self, capsys, files):
        assert run(capsys, "mle", files["empty"], "--mean-zero")[0] == 1

    def test_ragged(self, capsys, files):
        assert run(capsys, "mle", files["ragged"], "--mean-zero")[0] == 1

    def test_invalid_projector(self, capsys, files):
        assert run(capsys, "mle", files["two"], "--mean-zero", "--projector", files["ones2"])[0] == 2

    def test_mean_dimension(self, capsys, files):
        assert run(capsys, "mle", files["two"], "--mean", files["zero3_vec"])[0] == 1

    def test_sample_mean(self, capsys, files):
        _, doc, _ = run(capsys, "mle", files["two"], "--sample-mean")
        np.testing.assert_allclose(matrix(doc["result"]["sigma_hat"]), np.ones((2, 2)))


class TestDensity:
    def test_mode(self, capsys, files):
        _, doc, _ = run(capsys, "density", files["zero_vec"], "--mean", files["zero_vec"], "--cov", files["ones2"])
        assert doc["result"]["density"] == pytest.approx((4 * np.pi) ** -0.5, rel=1e-14)
        assert doc["result"]["on_support"] is True and doc["result"]["rank"] == 1

    def test_off_support(self, capsys, files):
        _, doc, _ = run(capsys, "density", files["x_off"], "--mean", files["zero_vec"], "--cov", files["ones2"])
        assert doc["result"]["density"] == 0.0
        assert doc["result"]["on_support"] is False
        assert doc["result"]["log_density"] is None

    def test_standard(self, capsys, files):
        _, doc, _ = run(capsys, "density", files["zero_vec"], "--mean", files["zero_vec"], "--cov", files["eye2"])
        assert doc["result"]["density"] == pytest.approx(1 / (2 * np.pi), rel=1e-14)

    def test_dimension_mismatch(self, capsys, files):
        code, _, _ = run(capsys, "density", files["zero3_vec"], "--mean", files["zero_vec"], "--cov", files["eye2"])
        assert code == 1


class TestSample:
    def test_point_mass(self, capsys, files):
        code = main(["sample", "--cov", files["zero2"], "--mean", files["mu12"], "--count", "3"])
        cap = capsys.readouterr()
        assert code == 0
        assert cap.out == "1,2\n1,2\n1,2\n"
        assert json.loads(cap.err)["result"]["count"] == 3

    def test_deterministic_bytes(self, capsys, files):
        outs = []
        for _ in range(2):
            main(["sample", "--cov", files["ones2"], "--mean", files["zero_vec"], "--count", "5", "--seed", "42"])
            outs.append(capsys.readouterr().out.encode())
        assert outs[0] == outs[1] and len(outs[0].splitlines()) == 5

    def test_on_range(self, capsys, files, tmp_path):
        out = tmp_path / "s.csv"
        code, doc, _ = run(capsys, "sample", "--cov", files["ones2"], "--mean", files["zero_vec"],
                           "--count", "10000", "--output", str(out))
        assert code == 0 and doc["result"]["output"] == str(out)
        X = read_dataset(str(out))
        assert X.shape == (10000, 2)
        assert np.max(np.abs(X[:, 0] - X[:, 1])) <= 1e-9

    def test_not_psd(self, capsys, files):
        code = main(["sample", "--cov", files["notpsd"], "--mean", files["zero_vec"], "--count", "3"])
        assert code == 2


def test_pipe_sample_into_mle(files, tmp_path):
    S = np.diag([2.0, 0.5, 0.0])
    cov = write_matrix(tmp_path / "s.json", S)
    proj = write_matrix(tmp_path / "p.json", np.diag([1.0, 1.0, 0.0]))
    mean = tmp_path / "m.json"
    mean.write_text("[0, 0, 0]")
    cmd = [sys.executable, "-m", "pseudodet"]
    sample = subprocess.run(
        cmd + ["sample", "--cov", cov, "--mean", str(mean), "--count", "2000", "--seed", "1"],
        capture_output=True, text=True, check=True,
    )
    mle = subprocess.run(
        cmd + ["mle", "-", "--mean", str(mean), "--projector", proj],
        input=sample.stdout, capture_output=True, text=True, check=True,
    )
    Shat = matrix(json.loads(mle.stdout)["result"]["sigma_hat"])
    assert np.linalg.norm(Shat - S) / np.linalg.norm(S) <= 0.15
    assert mle.stderr == ""


def test_format_float():
    assert format_float(1.0) == "1"
    assert format_float(0.1) == "0.1"
    assert float(format_float(1 / 3)) == 1 / 3


def test_read_matrix_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"n": 3, "real": ONES2}))
    with pytest.raises(InputError):
        read_matrix(str(p))
    p.write_text(json.dumps({"n": 2, "real": ONES2, "imag": [[0]]}))
    with pytest.raises(InputError):
        read_matrix(str(p))


def test_read_dataset_empty(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("\n\n")
    with pytest.raises(EmptyDataset):
        read_dataset(str(p))
