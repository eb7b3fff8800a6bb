import json
import math
import subprocess
import sys

import numpy as np
import pytest

from dyadrep import DyadicStep, Lp
from dyadrep.cli import main, parse_function


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out.strip(), out.err


@pytest.mark.parametrize("space, inp, expected", [
    ("lp:2", "const:1", "1.000000000000"),
    ("lorentz:power:2", "box:0.25:1", "0.500000000000"),
    ("orlicz:exp:1", "const:1", "1.000000000000"),
])
def test_norm(space, inp, expected, capsys):
    assert run(["norm", "--space", space, "--input", inp], capsys)[:2] == (0, expected)


def test_norm_from_file(tmp_path, capsys):
    path = tmp_path / "x.json"
    path.write_text(DyadicStep([3.0, -4.0]).to_json())
    code, out, _ = run(["norm", "--space", "lp:2", "--input", str(path)], capsys)
    assert code == 0
    assert float(out) == pytest.approx(math.sqrt(12.5), rel=1e-12)


@pytest.mark.parametrize("argv", [
    ["norm", "--space", "lp:zero", "--input", "const:1"],
    ["norm", "--space", "lp:2", "--input", "no/such/file.json"],
    ["norm", "--space", "lp:2", "--input", "box:0.3"],
    ["decompose", "--space", "lp:2", "--generator", "box:0.5:0", "--target", "const:1"],
    ["frame-check", "--space", "orlicz:exp:1", "--generator", "const:1"],
])
def test_bad_input_exits_two(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert err.startswith("error:")


def test_rank_cap_override(monkeypatch, capsys):
    monkeypatch.setenv("DYADREP_MAX_RANK", "3")
    assert run(["norm", "--space", "lp:2", "--input", "const:1:4"], capsys)[0] == 2
    assert run(["norm", "--space", "lp:2", "--input", "const:1:3"], capsys)[0] == 0


def test_decompose_converged(tmp_path, capsys):
    code, out, _ = run(["decompose", "--space", "lp:2", "--generator", "box:0.5:2", "--target", "const:1",
                        "--tol", "1e-6", "--out", str(tmp_path)], capsys)
    assert code == 0 and out.startswith("converged")
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["schema_version"] == 1
    assert report["config"]["space"] == "lp:2"
    assert report["result"]["rounds"] == 40
    assert report["result"]["reconstruction_error"] <= 1e-6
    blocks = json.loads((tmp_path / "blocks.json").read_text())
    assert len(blocks["blocks"]) == 40
    trace = (tmp_path / "trace.csv").read_text().splitlines()
    assert trace[0] == "round,rank,residual_norm,block_mass,ratio,truncation_error"
    assert len(trace) == 41


def test_decompose_no_contraction(tmp_path, capsys):
    code, _, err = run(["decompose", "--space", "lorentz:power:2", "--generator", "witness:power:2",
                        "--target", "const:1", "--out", str(tmp_path)], capsys)
    assert code == 3
    assert "no-contraction" in err
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["result"]["status"] == "no-contraction"


def test_decompose_truncated(monkeypatch, capsys):
    monkeypatch.setenv("DYADREP_MAX_RANK", "5")
    code, out, _ = run(["decompose", "--space", "lp:2", "--generator", "const:1", "--target", "const:1",
                        "--max-rounds", "1"], capsys)
    assert code == 0
    code, out, _ = run(["decompose", "--space", "lp:2", "--generator", "random:1:3", "--target", "const:1"],
                       capsys)
    assert code == 4 and out.startswith("truncated")


def test_frame_check_unit(tmp_path, capsys):
    code, out, _ = run(["frame-check", "--space", "lp:2", "--generator", "const:1", "--out", str(tmp_path)], capsys)
    assert code == 0
    res = json.loads((tmp_path / "report.json").read_text())["result"]
    assert res["A_observed"] == 1.0 and res["B_observed"] == 1.0


def test_multiplicator_lp(tmp_path, capsys):
    code, _, _ = run(["multiplicator", "--space", "lp:3", "--generator", "random:4:1", "--out", str(tmp_path)],
                     capsys)
    assert code == 0
    res = json.loads((tmp_path / "report.json").read_text())["result"]
    expected = Lp(3.0).norm(parse_function("random:4:1"))
    assert abs(res["lower"] - expected) <= 1e-6 and abs(res["upper"] - expected) <= 1e-6


def test_smoothness_lorentz(tmp_path, capsys):
    code, out, _ = run(["smoothness", "--space", "lorentz:power:2", "--out", str(tmp_path)], capsys)
    assert code == 0 and out.endswith("non_smooth = true")
    res = json.loads((tmp_path / "report.json").read_text())["result"]
    assert res["min_over_lambda"]["value"] >= 1.0 - 1e-9


def test_smoothness_needs_generator_outside_lorentz(capsys):
    assert run(["smoothness", "--space", "lp:2"], capsys)[0] == 2
    code, out, _ = run(["smoothness", "--space", "lp:2", "--generator", "box:0.5:2"], capsys)
    assert code == 0 and out.endswith("non_smooth = false")


def test_necessary_and_membership(tmp_path, capsys):
    code, out, _ = run(["necessary", "--space", "lorentz:slowlog", "--generator", "shells:0.9:1000",
                        "--out", str(tmp_path)], capsys)
    assert code == 0 and out.startswith("fail")
    assert (tmp_path / "curve.csv").read_text().startswith("j,ratio\n")
    assert run(["membership", "--phi", "power:2", "--generator", "power:0.25:14"], capsys)[1] == "bounded"
    assert run(["membership", "--phi", "slowlog", "--generator", "shells:0.9:1000"], capsys)[1] == "growing"


def test_submult(capsys):
    code, out, _ = run(["submult", "--phi", "slowlog"], capsys)
    assert code == 0 and out.endswith("unbounded_trend = true")


def test_presets():
    assert parse_function("const:2:3") == DyadicStep([2.0])
    assert list(parse_function("box:0.5:2").values) == [2.0, 0.0]
    assert list(parse_function("witness:power:2").values) == [-2.0, 1.0, 1.0, 1.0]
    assert parse_function("phiprime:power:2:4").rank == 4
    assert np.array_equal(parse_function("random:3:7").values, parse_function("random:3:7").values)
    assert len(parse_function("shells:0.5:10")) == 11


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dyadrep", "norm", "--space", "lp:1", "--input", "box:0.5:2"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.strip() == "1.000000000000"
