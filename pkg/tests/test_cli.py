import json

import numpy as np
import pytest

from invcone import cli
from invcone.errors import ConvergenceError, GrazingError
from invcone.io import read_table


def run(tmp_path, *argv):
    return cli.run(list(argv))


@pytest.fixture(scope="module")
def backbone_run(tmp_path_factory):
    d = tmp_path_factory.mktemp("bb")
    rc = cli.run(["backbone", "--mode", "1", "--method", "both", "--out", str(d / "bb.csv"), "--verify"])
    return rc, d


def test_backbone_outputs(backbone_run, jiang):
    rc, d = backbone_run
    assert rc == 0
    for name in ("bb.csv", "bb_shooting.csv", "bb.json", "bb.png"):
        assert (d / name).exists()
    header, data = read_table(d / "bb.csv")
    assert header[:6] == ["crossing", "log10_energy", "omega", "t_minus", "t_plus", "stable"]
    om = data[:, 2]
    assert om[0] == pytest.approx(0.6472, abs=1e-4)
    assert np.all(np.diff(data[:, 1]) >= 0)
    st = data[:, 5].astype(bool)
    assert st.any() and not st.all()
    s = json.loads((d / "bb.json").read_text())
    assert s["verify"]["mic"]["passed"] and s["verify"]["shooting"]["passed"]
    assert s["shooting"]["max_abs_delta_omega"] <= 1e-6
    assert len(s["mic"]["stability_transitions"]) == 2


def test_backbone_is_deterministic(backbone_run, tmp_path):
    _, d = backbone_run
    assert cli.run(["backbone", "--out", str(tmp_path / "b.csv"), "--no-plot"]) == 0
    assert (tmp_path / "b.csv").read_bytes() == (d / "bb.csv").read_bytes()
    assert not (tmp_path / "b.png").exists()


def test_frc_both_methods_agree(tmp_path):
    out = tmp_path / "f.csv"
    assert cli.run(["frc", "--method", "both", "--out", str(out), "--verify"]) == 0
    s = json.loads((tmp_path / "f.json").read_text())
    assert s["shooting"]["max_abs_delta_amplitude"] <= 1e-6
    assert s["verify"]["mic"]["passed"]
    assert s["mic"]["peak"]["Omega"] == pytest.approx(0.8035, abs=1e-3)
    assert (tmp_path / "f.png").exists()
    _, a = read_table(out)
    _, b = read_table(tmp_path / "f_shooting.csv")
    assert a.shape == b.shape
    assert np.array_equal(a[:, 5], b[:, 5])


def test_cone_command(tmp_path):
    assert cli.run(["cone", "--mode", "1", "--out", str(tmp_path / "c.csv")]) == 0
    header, data = read_table(tmp_path / "c.csv")
    assert header[0] == "omega"
    assert data[0, 0] == pytest.approx(0.8165, abs=1e-3)
    assert data[0, 3] > 0


def test_shoot_command(tmp_path):
    assert cli.run(["shoot", "--energy", "5", "--out", str(tmp_path / "s.csv")]) == 0
    s = json.loads((tmp_path / "s.json").read_text())
    assert s["residual"] <= 1e-10 and s["energy"] == 5.0
    assert cli.run(["shoot", "--omega", "0.4", "--out", str(tmp_path / "g.csv")]) == 0


def test_simulate_equilibrium(tmp_path):
    assert cli.run(["simulate", "--t-end", "5", "--out", str(tmp_path / "t.csv")]) == 0
    header, data = read_table(tmp_path / "t.csv")
    q = data[:, [header.index("q_1"), header.index("q_2")]]
    assert np.allclose(q, 0, atol=1e-12)
    assert (tmp_path / "t.png").exists()
    assert cli.run(["simulate", "--q0=-3,0", "--t-end", "20", "--no-plot", "--out", str(tmp_path / "u.csv")]) == 0
    s = json.loads((tmp_path / "u.json").read_text())
    assert s["crossings"] > 0


@pytest.mark.parametrize(
    "argv",
    [
        ["backbone", "--mode", "5"],
        ["backbone", "--delta", "0"],
        ["frc", "--omega-range", "0.9"],
        ["frc", "--famp", "0"],
        ["frc", "--alpha", "0"],
        ["simulate", "--q0", "1,2,3"],
        ["backbone", "--tol", "-1"],
        ["backbone", "missing.yaml"],
    ],
)
def test_configuration_errors_exit_2(tmp_path, argv, capsys):
    assert cli.run(argv + ["--out", str(tmp_path / "x.csv")]) == cli.EXIT_CONFIG
    assert capsys.readouterr().err.startswith("error[")


def test_solver_and_grazing_exit_codes(tmp_path, monkeypatch, capsys):
    def fail(*a, **k):
        raise ConvergenceError("no convergence", 3, 1.0)

    monkeypatch.setattr(cli.bb, "trace_backbone", fail)
    assert cli.run(["backbone", "--out", str(tmp_path / "x.csv")]) == cli.EXIT_SOLVER

    def graze(*a, **k):
        raise GrazingError("grazing")

    monkeypatch.setattr(cli.bb, "trace_backbone", graze)
    assert cli.run(["backbone", "--out", str(tmp_path / "x.csv")]) == cli.EXIT_GRAZING
    err = capsys.readouterr().err
    assert "error[" in err


def test_failed_verification_exits_3(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "VERIFY_TOL", 0.0)
    assert cli.run(["cone", "--out", str(tmp_path / "c.csv")]) == 0
    assert cli.run(["backbone", "--verify", "--no-plot", "--out", str(tmp_path / "b.csv")]) == cli.EXIT_SOLVER


def test_homogeneous_system_file(tmp_path):
    from invcone.io import bundled_system_path
    path = str(bundled_system_path("jiang_homogeneous"))
    assert cli.run(["frc", path, "--omega-range", "0.85:0.95", "--no-plot", "--out", str(tmp_path / "h.csv")]) == 0
    _, data = read_table(tmp_path / "h.csv")
    assert data[:, 0].min() >= 0.85 and data[:, 0].max() <= 0.95
