import json

import numpy as np
import pytest

from anisomorrey.cli import main
from anisomorrey.gridio import read_grid, write_grid
from anisomorrey.grid import Box, GridFunction


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_norm_morrey_closed_form(capsys):
    code, out, _ = run(capsys, "norm", "--type", "morrey", "--p", "1", "--kappa", "0.3333333",
                       "--weight", "powabs:-0.25", "--fn", "ind(0,1)*powabs(-0.5)", "--domain", "0:1",
                       "--shape", "4096")
    assert code == 0
    value = float(out.splitlines()[0].rsplit(":", 1)[1])
    assert value == pytest.approx(3.63, rel=2e-2)
    assert "argmax box" in out


def test_norm_lp_and_weak(capsys):
    code, out, _ = run(capsys, "norm", "--type", "lp", "--p", "2", "--fn", "const(3)", "--domain", "-1:1", "--shape", "16")
    assert code == 0 and float(out.rsplit(":", 1)[1]) == pytest.approx(3 * np.sqrt(2))
    code, out, _ = run(capsys, "norm", "--type", "weak", "--p", "1", "--fn", "const(3)", "--shape", "16")
    assert code == 0 and float(out.rsplit(":", 1)[1]) == pytest.approx(6.0, rel=1e-12)


def test_apconst_constant_weight(capsys):
    code, out, _ = run(capsys, "apconst", "--weight", "const:1", "--p", "2", "--domain", "-1:1", "--shape", "64")
    assert code == 0
    lines = dict(line.split(": ", 1) for line in out.splitlines() if ": " in line)
    ap = [v for k, v in lines.items() if k.startswith("A_p")][0]
    assert float(ap) == 1.0
    assert float(lines["A_1 characteristic"]) == 1.0


def test_verify_maximal_bound_writes_report(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "verify", "maximal-bound", "--seed", "7", "--shape", "256", "--json", str(path))
    assert code == 0
    doc = json.loads(path.read_text())
    checks = doc.get("checks", [doc])
    assert checks[0]["status"] == "exact-pass"
    assert doc["config"]["seed"] == 7


def test_failed_check_exits_one_with_witness(capsys):
    code, _, err = run(capsys, "verify", "dilation-bound", "--domain", "-1:1,-1:1", "--shape", "16x16",
                       "--aniso", "1,3", "--p", "1.2", "--lambdas", "2", "--count", "2")
    assert code == 1
    assert "witness" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["norm", "--type", "nope"],
        ["norm", "--fn", "bogus(1)"],
        ["norm", "--domain", "1:0"],
        ["apconst", "--weight", "powrho:1"],
        ["maximal", "--shape", "0"],
        ["verify", "not-a-check"],
        ["norm", "--config", "/nonexistent/file"],
        [],
    ],
)
def test_configuration_errors_exit_two(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_bad_thread_count(capsys, monkeypatch):
    monkeypatch.setenv("ANISO_THREADS", "zero")
    assert run(capsys, "norm", "--fn", "const(1)")[0] == 2


def test_maximal_output_roundtrip(capsys, tmp_path):
    out = tmp_path / "mf.csv"
    code, _, _ = run(capsys, "maximal", "--fn", "ind(-1:1)", "--domain", "-8:8", "--shape", "512", "--out", str(out))
    assert code == 0
    first = out.read_bytes()
    gf = read_grid(out)
    write_grid(gf, tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_bytes() == first
    assert gf.values.max() == 1.0


@pytest.mark.parametrize("flag", ["--uncentered", "--sharp", "--weighted"])
def test_maximal_variants_from_input_grid(capsys, tmp_path, flag):
    src = tmp_path / "f.json"
    write_grid(GridFunction(Box([-1.0], [1.0]), np.random.default_rng(0).normal(size=64)), src)
    out = tmp_path / "o.json"
    argv = ["maximal", "--input", str(src), "--out", str(out), flag]
    if flag == "--weighted":
        argv += ["--weight", "powabs:0.5"]
    code, _, _ = run(capsys, *argv)
    assert code == 0
    assert read_grid(out).shape == (64,)


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\ntype = lp\np = 2\nfn = const(3)\ndomain = -1:1\nshape = 16\n")
    code, out, _ = run(capsys, "norm", "--config", str(cfg))
    assert code == 0 and float(out.rsplit(":", 1)[1]) == pytest.approx(3 * np.sqrt(2))
    code, out, _ = run(capsys, "norm", "--config", str(cfg), "--p", "1")
    assert float(out.rsplit(":", 1)[1]) == pytest.approx(6.0)


def test_plot_grid_and_history(capsys, tmp_path):
    src = tmp_path / "f.csv"
    write_grid(GridFunction(Box([-1.0], [1.0]), np.linspace(1, 2, 32)), src)
    svg = tmp_path / "f.svg"
    assert run(capsys, "plot", "--input", str(src), "--out", str(svg))[0] == 0
    assert svg.read_text().startswith("<svg")
    rep = tmp_path / "r.json"
    assert run(capsys, "verify", "weak-morrey", "--fn", "ind(-1:1)", "--domain", "-4:4", "--shapes", "128;256",
               "--kappa", "0.5", "--json", str(rep))[0] == 0
    assert run(capsys, "plot", "--report", str(rep), "--out", str(tmp_path / "h.svg"), "--log-x")[0] == 0
    assert "<polyline" in (tmp_path / "h.svg").read_text()
    assert run(capsys, "plot", "--out", str(svg))[0] == 2
