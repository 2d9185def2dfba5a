import json
import os

import numpy as np
import pytest

from diracgeom.cli import main, sommerfeld_level
from diracgeom.io import read_manifest_hash


def write_cfg(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def assert_no_orphans(outdir):
    man = json.load(open(os.path.join(outdir, "manifest.json")))
    files = set(os.listdir(outdir)) - {"manifest.json"}
    assert files == set(man["outputs"])
    for f in files:
        assert read_manifest_hash(os.path.join(outdir, f)) == man["manifest_hash"], f
    return man


def test_verify_default(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "[verify]\nsamples = 200\n")
    code, cap = run_cli(capsys, "verify", "--config", cfg, "--out", tmp_path / "o", "--seed", 1)
    assert code == 0, cap.out
    assert "FAIL" not in cap.out
    rep = json.load(open(tmp_path / "o" / "verify_report.json"))
    assert rep["failed"] == [] and all(r["value"] <= r["tol"] for r in rep["checks"])
    assert_no_orphans(tmp_path / "o")


def test_verify_fault_hook(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "[verify]\nsuites = algebra\nsamples = 50\nfault = corrupt_matrix\n")
    code, cap = run_cli(capsys, "verify", "--config", cfg, "--out", tmp_path / "o")
    assert code == 1
    rep = json.load(open(tmp_path / "o" / "verify_report.json"))
    assert rep["failed"]
    assert any(f"FAIL {name}" in cap.out for name in rep["failed"])


@pytest.mark.parametrize("text", ["[verify]\nsuites = algebra, nonsense\n", "[verify]\nfault = other\n",
                                  "[verify]\nbogus_key = 1\n"])
def test_verify_config_errors(tmp_path, capsys, text):
    code, _ = run_cli(capsys, "verify", "--config", write_cfg(tmp_path, text), "--out", tmp_path / "o")
    assert code == 2


def test_usage_errors(tmp_path, capsys):
    assert run_cli(capsys, "verify", "--config", tmp_path / "missing.ini")[0] == 2
    assert run_cli(capsys, "radial", "--config", tmp_path / "missing.ini")[0] == 2
    assert run_cli(capsys, "nocommand")[0] == 2
    assert run_cli(capsys, "verify", "--tol-scale", "0", "--out", tmp_path / "o")[0] == 2
    assert run_cli(capsys, "tetrad", "--out", tmp_path / "o")[0] == 2


def test_radial_coulomb_case(tmp_path, capsys):
    code, cap = run_cli(capsys, "radial", "--case", "coulomb_Z0.5", "--out", tmp_path / "o")
    assert code == 0, cap.out
    spec = json.load(open(tmp_path / "o" / "spectrum.json"))
    E = spec["levels"][0]["E"]
    assert abs(E - np.sqrt(0.75)) < 1e-6
    assert spec["analytic"]["abs_error"] < 1e-6
    assert sommerfeld_level(1, -1, 0.5) == pytest.approx(np.sqrt(0.75), abs=1e-15)
    assert_no_orphans(tmp_path / "o")


def test_radial_aleph_config(tmp_path, capsys):
    # a reduced version of the bundled axial-potential case; convergence metadata must be present
    cfg = write_cfg(tmp_path, "[radial]\ncase = aleph_spherical\nn_nodes = 600\nE_lo = 0.9\nE_hi = 0.99\nnE = 15\n")
    code, cap = run_cli(capsys, "radial", "--config", cfg, "--out", tmp_path / "o")
    assert code == 0, cap.out
    spec = json.load(open(tmp_path / "o" / "spectrum.json"))
    assert spec["levels"]
    conv = spec["convergence"]
    assert any("observed_order" in c for c in conv)
    assert_no_orphans(tmp_path / "o")


def test_radial_no_sign_change(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "[radial]\nZalpha = 0.5\nn_nodes = 400\nE_lo = 0.90\nE_hi = 0.91\nnE = 0\n")
    code, cap = run_cli(capsys, "radial", "--config", cfg, "--out", tmp_path / "o")
    assert code == 1
    assert "NoSignChange" in cap.out and "0.9" in cap.out
    assert json.load(open(tmp_path / "o" / "spectrum.json"))["error"]["bracket"] == [0.9, 0.91]


EVOLVE_SMALL = "[evolve]\nN = 128\nL = 64.0\nsteps = 200\nsample_every = 20\n"


def test_evolve_linear(tmp_path, capsys):
    cfg = write_cfg(tmp_path, EVOLVE_SMALL + "nonlinear = false\nmomentum = 0.5\nsnapshot_every = 100\n")
    code, cap = run_cli(capsys, "evolve", "--config", cfg, "--out", tmp_path / "o")
    assert code == 0
    assert "PASS evolve.conservation" in cap.out
    man = assert_no_orphans(tmp_path / "o")
    assert "snapshot_0000.npz" in man["outputs"] and "diagnostics.csv" in man["outputs"]


def test_evolve_vacuum_identical(tmp_path, capsys):
    cfg = write_cfg(tmp_path, EVOLVE_SMALL + "nonlinear = true\n")
    code, cap = run_cli(capsys, "evolve", "--config", cfg, "--out", tmp_path / "o")
    assert code == 0
    assert "identical_to_linear = True" in cap.out
    assert json.load(open(tmp_path / "o" / "evolve_summary.json"))["identical_to_linear"] is True


def test_evolve_caustic(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "[evolve]\nN = 128\nL = 64.0\nsteps = 1500\nself_coupling = 0.5\nwidth = 3.0\n")
    code, cap = run_cli(capsys, "evolve", "--config", cfg, "--out", tmp_path / "o")
    assert code == 0
    assert "caustic" in cap.out
    man = json.load(open(tmp_path / "o" / "manifest.json"))
    assert man["status"] == "caustic" and man["stop_time"] > 0


def test_evolve_bad_config(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "[evolve]\nN = 16\n")
    assert run_cli(capsys, "evolve", "--config", cfg, "--out", tmp_path / "o")[0] == 2


def _read_all(outdir):
    res = {}
    for f in sorted(os.listdir(outdir)):
        p = os.path.join(outdir, f)
        if f.endswith(".json"):
            d = json.load(open(p))
            for k in ("wall_time", "solve_time"):
                d.pop(k, None)
            res[f] = d
        elif f.endswith(".npz"):
            with np.load(p) as z:
                res[f] = {k: z[k].tobytes() for k in z.files}
        else:
            res[f] = open(p, "rb").read()
    return res


def test_determinism(tmp_path, capsys):
    cfg = write_cfg(tmp_path, EVOLVE_SMALL + "self_coupling = 0.1\nsnapshot_every = 50\n")
    for d in ("a", "b"):
        assert run_cli(capsys, "evolve", "--config", cfg, "--seed", 7, "--out", tmp_path / d)[0] == 0
    assert _read_all(tmp_path / "a") == _read_all(tmp_path / "b")
    vcfg = write_cfg(tmp_path, "[verify]\nsamples = 100\nsuites = algebra, lorentz\n", "v.ini")
    for d in ("va", "vb"):
        assert run_cli(capsys, "verify", "--config", vcfg, "--seed", 5, "--out", tmp_path / d)[0] == 0
    assert _read_all(tmp_path / "va") == _read_all(tmp_path / "vb")


def test_tetrad_command(tmp_path, capsys):
    from diracgeom.manufactured import rest_spinor
    psi = np.zeros((5, 1, 1, 5, 4), complex)
    psi[...] = rest_spinor(2.0, 0.3)
    f = tmp_path / "field.npz"
    np.savez(f, psi=psi, spacing=np.array([0.1, 1, 1, 0.1]))
    cfg = write_cfg(tmp_path, "[tetrad]\nchart = world_time\n")
    code, cap = run_cli(capsys, "tetrad", "--config", cfg, "--field", f, "--out", tmp_path / "o")
    assert code == 0, cap.out
    man = assert_no_orphans(tmp_path / "o")
    assert {"tetrad.csv", "metric.csv", "curvature.csv", "tetrad_summary.json"} <= set(man["outputs"])
    g = np.loadtxt(tmp_path / "o" / "metric.csv", delimiter=",", skiprows=2)
    assert g.shape == (25, 20)
    assert np.allclose(g[:, 4:].reshape(-1, 4, 4)[:, 0, 0], 1 / 4.0)
    curv = np.loadtxt(tmp_path / "o" / "curvature.csv", delimiter=",", skiprows=2)
    assert np.abs(curv[:, 4]).max() < 1e-10


def test_tetrad_bad_field(tmp_path, capsys):
    f = tmp_path / "field.npz"
    np.savez(f, psi=np.zeros((3, 4)))
    assert run_cli(capsys, "tetrad", "--field", f, "--out", tmp_path / "o")[0] == 2
    np.savez(f, psi=np.zeros((2, 1, 1, 1, 4)))
    assert run_cli(capsys, "tetrad", "--field", f, "--out", tmp_path / "o")[0] == 1
