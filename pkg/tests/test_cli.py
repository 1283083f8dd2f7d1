import csv
import json
import os

import numpy as np
import pytest

from barrier_billiards import cli
from barrier_billiards.errors import NumericalAbort
from barrier_billiards.quantization import rectangle_levels


def _read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _manifest(outdir):
    with open(os.path.join(outdir, "manifest.json")) as fh:
        return json.load(fh)


def test_kplus_run(tmp_path):
    out = str(tmp_path / "kp")
    rc = cli.main(["kplus", "--k", "50", "--alpha-sweep", "15:45:5",
                   "--n-terms", "3000", "--output-dir", out])
    assert rc == 0
    header, rows = _read_csv(os.path.join(out, "kplus.csv"))
    assert header == ["alpha_re", "alpha_im", "kplus_re", "kplus_im",
                      "ratio_to_asymptotic_re", "ratio_to_asymptotic_im"]
    assert len(rows) == 7
    ratios = np.array([[float(r[4]), float(r[5])] for r in rows])
    assert np.all(np.hypot(*ratios.T) > 0.5)
    manifest = _manifest(out)
    assert manifest["command"] == "kplus"
    assert manifest["outputs"] == ["kplus.csv"]


def test_kplus_requires_alpha(tmp_path):
    rc = cli.main(["kplus", "--k", "50", "--output-dir", str(tmp_path / "x")])
    assert rc == 2


def test_bad_sweep_is_validation_error(tmp_path):
    rc = cli.main(["kplus", "--k", "50", "--alpha-sweep", "45:15:5",
                   "--output-dir", str(tmp_path / "x")])
    assert rc == 2


def test_smatrix_run(tmp_path):
    out = str(tmp_path / "sm")
    rc = cli.main(["smatrix", "--k", "30", "--h1", "0.3", "--output-dir", out])
    assert rc == 0
    summary = _manifest(out)["summary"]
    assert summary["involution_defect"] < 1e-10
    assert summary["b_unitarity_defect"] < 1e-10
    header, rows = _read_csv(os.path.join(out, "smatrix.csv"))
    assert header == ["row", "col", "re", "im"]
    assert len(rows) == summary["n_prop"] ** 2


def test_ensemble_run_with_reference_law(tmp_path):
    out = str(tmp_path / "ens")
    rc = cli.main(["ensemble", "--kind", "lax", "--dim", "3", "--alpha", "0.5",
                   "--realisations", "400", "--bins", "15", "--s-max", "1.5",
                   "--seed", "7", "--output-dir", out])
    assert rc == 0
    header, rows = _read_csv(os.path.join(out, "pn_0.csv"))
    assert header == ["s_bin_center", "density", "law_reference_density",
                      "realisations", "seed"]
    s = np.array([float(r[0]) for r in rows])
    ref = np.array([float(r[2]) for r in rows])
    # reference column carries the finite-dimension law 8/9 s
    assert np.abs(ref - 8 / 9 * s).max() < 1e-12
    assert _manifest(out)["summary"]["law_family"] == "model-a"


def test_ensemble_determinism_and_seed_sensitivity(tmp_path):
    args = ["ensemble", "--kind", "c", "--dim", "20", "--realisations", "30"]
    out1, out2, out3 = (str(tmp_path / d) for d in "abc")
    assert cli.main(args + ["--seed", "5", "--output-dir", out1]) == 0
    assert cli.main(args + ["--seed", "5", "--output-dir", out2]) == 0
    assert cli.main(args + ["--seed", "6", "--output-dir", out3]) == 0
    b1 = open(os.path.join(out1, "pn_0.csv"), "rb").read()
    b2 = open(os.path.join(out2, "pn_0.csv"), "rb").read()
    b3 = open(os.path.join(out3, "pn_0.csv"), "rb").read()
    assert b1 == b2
    assert b1 != b3


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"kind": "c", "dim": 15, "realisations": 20,
                               "s-max": 3.0}))
    out = str(tmp_path / "cfg")
    rc = cli.main(["ensemble", "--config", str(cfg), "--dim", "25",
                   "--output-dir", out])
    assert rc == 0
    conf = _manifest(out)["config"]
    assert conf["kind"] == "c"
    assert conf["dim"] == 25  # explicit flag wins over the file
    assert conf["realisations"] == 20


def test_stats_run(tmp_path):
    out = str(tmp_path / "st")
    rc = cli.main(["stats", "--kind", "xi", "--dim", "60", "--realisations",
                   "20", "--output-dir", out, "--l-max-window", "10"])
    assert rc == 0
    for name in ("pn.csv", "formfactor.csv", "numbervariance.csv"):
        assert os.path.exists(os.path.join(out, name))
    summary = _manifest(out)["summary"]
    assert 0.0 < summary["compressibility"] < 1.0
    assert "r2_tail_mass" in summary


def test_trace_run_with_qcheck_and_spectrum(tmp_path):
    spectrum = tmp_path / "spectrum.csv"
    with open(spectrum, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "k_root", "residual", "flag"])
        for i, k in enumerate(rectangle_levels(1.0, 1.0, 400)):
            writer.writerow([i, f"{k:.17g}", "0", ""])
    out = str(tmp_path / "tr")
    rc = cli.main(["trace", "--h1", "0.3", "--l-max", "8",
                   "--qcheck-pairs", "2:1,3:1", "--r-dim", "60",
                   "--spectrum-csv", str(spectrum),
                   "--l-grid-min", "2.0", "--l-grid-step", "0.02",
                   "--output-dir", out])
    assert rc == 0
    header, rows = _read_csv(os.path.join(out, "orbits.csv"))
    assert header == ["M", "N", "length", "K", "eta", "amplitude"]
    assert len(rows) == 7
    header, rows = _read_csv(os.path.join(out, "qcheck.csv"))
    assert [r[1:3] for r in rows] == [["2", "1"], ["3", "1"]]
    for r in rows:
        assert abs(float(r[4]) - float(r[5])) < 0.1
    assert os.path.exists(os.path.join(out, "lengthspec.csv"))
    assert _manifest(out)["summary"]["window"] == "hann"


def test_spectrum_run(tmp_path):
    out = str(tmp_path / "sp")
    rc = cli.main(["spectrum", "--h1", "0.3", "--k-min", "4", "--k-max", "6",
                   "--dk", "0.05", "--output-dir", out])
    assert rc == 0
    header, rows = _read_csv(os.path.join(out, "spectrum.csv"))
    assert header == ["index", "k_root", "residual", "flag"]
    ks = [float(r[1]) for r in rows]
    assert ks == sorted(ks)
    assert all(float(r[2]) <= 1e-6 for r in rows)
    assert "determinism" in _manifest(out)["summary"]


def test_output_dir_collision_is_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    rc = cli.main(["kplus", "--k", "50", "--alpha", "20",
                   "--output-dir", str(blocker / "sub")])
    assert rc == 4


def test_numerical_abort_exit_code(tmp_path, monkeypatch):
    def boom(sample, modulus_tol=1e-6):
        raise NumericalAbort("synthetic drift")

    monkeypatch.setattr(cli, "eigenphases", boom)
    rc = cli.main(["ensemble", "--kind", "c", "--dim", "10",
                   "--realisations", "2", "--output-dir", str(tmp_path / "na")])
    assert rc == 3


def test_output_root_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv(cli._OUTPUT_ROOT_ENV, str(tmp_path / "root"))
    rc = cli.main(["kplus", "--k", "40", "--alpha", "10"])
    assert rc == 0
    assert os.path.exists(tmp_path / "root" / "kplus" / "kplus.csv")
