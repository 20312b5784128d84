import csv
import io
import json
import subprocess
import sys

import pytest

from cfeinstein.cli import HEADER, parse_grid, run_command, UsageError


def run(capsys, *argv):
    code = run_command(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_of(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_convergents_json(capsys):
    code, out, _ = run(capsys, "convergents", "--periodic", "3", "--depth", "10", "--json")
    assert code == 0
    data = json.loads(out)
    # big integers are exported as decimal strings
    assert data["table"]["pairs"][4] == ["21", "8"]
    assert data["version"] == "0.1.0"


def test_convergents_csv(capsys):
    code, out, _ = run(capsys, "convergents", "--digits", "3,4,3", "--depth", "3")
    assert code == 0 and out.startswith(HEADER)
    rows = rows_of(out)
    assert (rows[3]["m_j"], rows[3]["n_j"]) == ("11", "4")
    assert rows[1]["a_j"] == "1/2"


def test_envelope_and_field(capsys):
    code, out, _ = run(capsys, "envelope", "--periodic", "3", "--depth", "20", "--grid", "0.7:0.7:1")
    assert code == 0 and float(rows_of(out)[0]["eta"]) == pytest.approx(0.7, abs=1e-15)
    code, out, _ = run(capsys, "field", "--periodic", "3", "--depth", "40", "--grid", "0.7:0.7:1,0.1:0.1:1")
    assert code == 0
    r = rows_of(out)[0]
    assert float(r["f"]) == pytest.approx(0.6755321941144454, abs=1e-13)
    assert float(r["w_int"]) == pytest.approx(float(r["w_alg"]), rel=1e-6)


def test_metric_curvature(capsys):
    code, out, _ = run(capsys, "metric", "--periodic", "3", "--depth", "40",
                       "--grid", "0.7:0.7:1,0.3:0.3:1", "--curvature", "--json")
    assert code == 0
    r = json.loads(out)["rows"][0]
    assert r["einstein_residual"] < 1e-3 and r["lambda"] < 0 and r["weyl_sd"] < 1e-3


def test_topology(capsys):
    code, out, _ = run(capsys, "topology", "--periodic", "3", "--depth", "3")
    data = json.loads(out)
    assert code == 0
    assert data["intersection"] == {"diag": [3, 3, 3], "offdiag": -1}
    assert data["leading_minors"] == ["3", "8", "21"]
    assert data["edges"][2]["label"] == [3, 1]


def test_verify_exit_codes(capsys):
    code, out, err = run(capsys, "verify", "--periodic", "3", "--depth", "30")
    assert code == 0
    data = json.loads(out)
    assert data["passed"] and len(data["suites"]) == 6
    assert data["config"]["depth"] == 30
    assert "identities: PASS" in err


def test_figure1(capsys):
    code, out, _ = run(capsys, "figure1", "--periodic", "3", "--points", "50")
    assert code == 0
    assert out.splitlines()[1].startswith("# depth=")
    rows = rows_of(out)
    assert len(rows) == 50
    for r in rows:
        assert float(r["eta"]) <= float(r["sqrt_sqrt5_x_minus_alpha"]) + 1e-9


@pytest.mark.parametrize("argv", [
    ["convergents", "--periodic", "3"],
    ["nonsense"],
    [],
    ["convergents", "--depth", "3"],
    ["convergents", "--digits", "3,x", "--depth", "3"],
    ["convergents", "--digits", "1,3", "--depth", "3"],
    ["field", "--periodic", "3", "--depth", "10", "--grid", "0:1"],
    ["topology", "--periodic", "3", "--depth", "3", "--sign", "2"],
])
def test_usage_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == "" and "usage error" in err


def test_computation_error_exit_one(capsys):
    code, _, err = run(capsys, "field", "--periodic", "3", "--depth", "5", "--tol", "1e-8",
                       "--grid", "0.7:0.7:1,0.1:0.1:1")
    assert code == 1 and "error" in err


def test_reruns_identical_and_round_trip(capsys):
    argv = ["field", "--periodic", "3,4", "--depth", "40", "--grid", "0.5:1.5:3,0.05:1:3"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b
    from cfeinstein import DigitSequence, boundary_data
    from cfeinstein.field import f_eval
    bd = boundary_data(DigitSequence.periodic([3, 4]), 40)
    for r in rows_of(a):
        assert float(r["f"]) == f_eval(bd, (float(r["x"]), float(r["y"])))[0]


def test_output_file(capsys, tmp_path):
    path = tmp_path / "out.json"
    code, out, _ = run(capsys, "topology", "--periodic", "3,5", "--depth", "2", "--output", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["intersection"]["diag"] == [3, 5]


def test_file_digits(capsys, tmp_path):
    path = tmp_path / "d.txt"
    path.write_text("3 4\n5\n")
    code, out, _ = run(capsys, "convergents", "--file", str(path), "--depth", "3", "--json")
    assert code == 0 and json.loads(out)["table"]["digits"] == [3, 4, 5]


def test_parse_grid():
    xs, ys = parse_grid("0:1:3,2:4:2", 2)
    assert list(xs) == [0.0, 0.5, 1.0] and list(ys) == [2.0, 4.0]
    with pytest.raises(UsageError):
        parse_grid("0:1:0", 1)


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "cfeinstein.cli", "convergents", "--periodic", "3",
                           "--depth", "2"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith(HEADER)
