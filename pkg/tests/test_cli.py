import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from stefan_lab.cli import REPORT_COLUMNS, build_report, main
from stefan_lab.fields import read_binary
from stefan_lab.manifest import RunManifest, sha256

CONFIG = """mode = radial
n = {n}
h = 0.02
dt = 0.002
boundary.kind = scaled
boundary.kappa = 10
snapshot_stride = 5
"""


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    cfg = root / "planar.cfg"
    cfg.write_text(CONFIG.format(n=2))
    assert main(["simulate", "--config", str(cfg), "--out", str(root / "run")]) == 0
    return root / "run"


def test_simulate_writes_all_outputs(run_dir):
    assert {"history.csv", "config.cfg", "manifest.json", "snapshots"} <= set(os.listdir(run_dir))
    rows = read_csv(run_dir / "history.csv")
    assert list(rows[0]) == ["t", "inradius", "circumradius", "volume"]
    snaps = sorted(os.listdir(run_dir / "snapshots"))
    f = read_binary(run_dir / "snapshots" / snaps[0])
    assert f.radial and f.n == 2 and np.all(f.values >= 0)


def test_manifest_is_complete(run_dir):
    man = RunManifest.read(run_dir)
    assert man.command == "simulate"
    assert man.config["mode"] == "radial" and man.config["n"] == 2
    assert man.seed == 0
    assert {"numpy", "scipy", "python", "stefan_lab"} <= set(man.version)
    assert man.flags["extinct"] and man.flags["complementarity_ok"]
    assert man.results["t_star"] == pytest.approx(0.2778, abs=0.01)
    assert "history.csv" in man.outputs and man.timings
    assert man.outputs["history.csv"] == sha256(run_dir / "history.csv")
    assert man.verify(run_dir) == []
    assert "delta" in man.constants


def test_manifest_detects_damage(run_dir, tmp_path):
    import shutil
    copy = tmp_path / "copy"
    shutil.copytree(run_dir, copy)
    with open(copy / "history.csv", "a") as fh:
        fh.write("0,0,0,0\n")
    assert RunManifest.read(copy).verify(copy) == ["history.csv"]


def test_simulation_is_reproducible(run_dir, tmp_path):
    cfg = tmp_path / "again.cfg"
    cfg.write_text(CONFIG.format(n=2))
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "r"),
                 "--no-snapshots"]) == 0
    assert sha256(tmp_path / "r" / "history.csv") == sha256(run_dir / "history.csv")


def test_parallel_sweep(tmp_path):
    cfgs = []
    for n in (2, 3):
        p = tmp_path / f"n{n}.cfg"
        p.write_text(CONFIG.format(n=n))
        cfgs.append(str(p))
    assert main(["simulate", "--config", *cfgs, "--out", str(tmp_path / "sweep"),
                 "--no-snapshots"]) == 0
    t2 = RunManifest.read(tmp_path / "sweep" / "n2").results["t_star"]
    t3 = RunManifest.read(tmp_path / "sweep" / "n3").results["t_star"]
    assert t3 < t2


def test_report_round_trip(run_dir, tmp_path):
    out = tmp_path / "rep"
    assert main(["report", "--run-dir", str(run_dir), "--out", str(out)]) == 0
    with open(f"{out}.json") as fh:
        rep = json.load(fh)
    fresh = build_report(str(run_dir))
    assert rep == json.loads(json.dumps(fresh))
    rows = read_csv(f"{out}.csv")
    assert tuple(rows[0]) == REPORT_COLUMNS
    assert rows[0]["intact"] == "1" and rows[0]["command"] == "simulate"


def test_freq_on_run(run_dir, tmp_path):
    out = tmp_path / "freq.csv"
    assert main(["freq", "--input", str(run_dir), "--radii", "0.25,0.125", "--no-cutoff",
                 "--out", str(out)]) == 0
    rows = read_csv(out)
    assert [float(r["r"]) for r in rows] == [0.25, 0.125]
    for r in rows:
        assert float(r["phi"]) == pytest.approx(float(r["D"]) / float(r["H"]), rel=1e-12)
    assert os.path.exists(f"{out}.manifest.json")


def test_rates_fit_json(tmp_path):
    from stefan_lab.rates import synthetic_history
    hist = synthetic_history("radial", np.geomspace(1e-8, 1e-2, 200), n=3)
    path = tmp_path / "history.csv"
    hist.to_csv(path)
    out = tmp_path / "fit.json"
    assert main(["rates", "fit", "--history", str(path), "--model", "loglog_nd",
                 "--tstar", "0", "--exclude-last", "0", "--out", str(out)]) == 0
    fit = json.loads(out.read_text())
    assert fit["slope"] == pytest.approx(-1.0, abs=1e-8)


def test_rates_envelope_table(tmp_path):
    out = tmp_path / "env.csv"
    assert main(["rates", "envelope", "--theorem", "planar", "--t-grid", "1e-6,1e-2,5",
                 "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 5 and list(rows[0]) == ["t", "inner", "outer"]


def test_eigen_and_competitor_tables(tmp_path):
    out = tmp_path / "eig.csv"
    assert main(["eigen", "--n", "2", "--eta", "0.1", "--N", "2000", "--R", "12",
                 "--out", str(out)]) == 0
    row = read_csv(out)[0]
    assert float(row["eps"]) == pytest.approx(0.174193, rel=1e-3)
    assert float(row["eps_ub"]) >= float(row["eps"])
    out2 = tmp_path / "comp.csv"
    assert main(["spectra", "competitor", "--n", "4", "--m", "2", "--eta-list", "0.1,0.05",
                 "--no-eigen", "--out", str(out2)]) == 0
    assert len(read_csv(out2)) == 2


def test_geom_sandwich(tmp_path):
    out = tmp_path / "sand.csv"
    assert main(["geom", "check-sandwich", "--n", "3", "--m", "1", "--eta", "0.1",
                 "--samples", "200", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 200 and all(r["ok"] in ("1", "True") for r in rows)


def test_selfcheck_passes(capsys):
    assert main(["selfcheck"]) == 0
    assert "checks passed" in capsys.readouterr().out


def test_exit_codes(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "missing.cfg"),
                 "--out", str(tmp_path / "o")]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("mode = radial\nn = two\nh = 0.1\ndt = 0.1\n")
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert main(["eigen", "--n", "2", "--eta", "0.5"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["simulate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["rates", "envelope", "--theorem", "planar", "--t-grid", "1e-3,1e-2"])
    assert exc.value.code == 2


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "stefan_lab.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip()
