from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from conecert.certify import Certificate
from conecert.cli import ProblemFileError, load_problem, main

QUADRATIC = {
    "equations": [{"bc": "dirichlet-dirichlet", "f": "lambda*u^2"}],
    "params": {"lambda": 256},
    "mode": "krasnoselskii",
    "ladder": {"auto": [0.001, 2]},
}
SYSTEM = {
    "equations": [
        {"bc": "dirichlet-dirichlet", "f": "18+sin(u*v)"},
        {"bc": "dirichlet-neumann", "f": "exp((u^2+v^2)/25)-1"},
    ],
    "ladder": {"radii": [1, 5], "kinds": ["I0star:1", "I1"]},
}


def _file(tmp_path, data, name="problem.json"):
    path = tmp_path / name
    path.write_text(data if isinstance(data, str) else json.dumps(data, indent=2), encoding="utf-8")
    return str(path)


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _json(capsys, *argv):
    code, out, _ = _run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


@pytest.mark.parametrize("bc,expected", [
    ("dirichlet-dirichlet", {"m": 8.0, "M": 16.0, "a": 0.25, "b": 0.75, "c": 0.25}),
    ("dirichlet-neumann", {"m": 2.0, "M": 4.0, "a": 0.5, "b": 1.0, "c": 0.5}),
])
def test_constants_scalar(tmp_path, capsys, bc, expected):
    path = _file(tmp_path, {"equations": [{"bc": bc, "f": "u"}]})
    code, report = _json(capsys, "constants", "--problem", path)
    assert code == 0
    row = report["equations"][0]
    for key, value in expected.items():
        assert row[key] == pytest.approx(value, abs=1e-9)


def test_constants_system(tmp_path, capsys):
    code, report = _json(capsys, "constants", "--problem", _file(tmp_path, SYSTEM))
    assert code == 0 and report["c"] == 0.25
    code, text, _ = _run(capsys, "constants", "--problem", _file(tmp_path, SYSTEM))
    assert "0.25" in text


def test_check_system_conditions(tmp_path, capsys):
    path = _file(tmp_path, SYSTEM)
    code, report = _json(capsys, "check", "--problem", path, "--condition", "I1", "--rho", "5")
    assert code == 0 and report["verdict"] == "PASS"
    code, report = _json(capsys, "check", "--problem", path, "--condition", "I0star:1", "--rho", "1")
    assert code == 0 and report["verdict"] == "PASS"


def test_check_failure_exit_code(tmp_path, capsys):
    path = _file(tmp_path, dict(QUADRATIC, params={"lambda": 100}))
    code, report = _json(capsys, "check", "--problem", path, "--condition", "K_lower", "--rho", "1")
    assert code == 3
    assert report["verdict"] == "FAIL" and report["witness"] is not None


def test_check_undecided_exit_code(tmp_path, capsys):
    path = _file(tmp_path, {"equations": [{"bc": "dirichlet-dirichlet", "f": "7.999*u*(2-u)"}]})
    # sup is 7.999 < 8 at rho = 1, but the first enclosure is [0, 15.998]
    code, report = _json(capsys, "check", "--problem", path, "--condition", "I1", "--rho", "1", "--budget", "2")
    assert code == 2 and report["verdict"] == "UNDECIDED"


def test_certify_quadratic_and_round_trip(tmp_path, capsys):
    out = tmp_path / "cert.json"
    code, report = _json(capsys, "certify", "--problem", _file(tmp_path, QUADRATIC), "--out", str(out))
    assert code == 0
    cert = Certificate.from_dict(report["certificate"])
    assert cert.case == "H1" and cert.solutions == 1
    lo, hi = cert.windows[0]
    assert lo == pytest.approx(1 / 32, rel=0.04) and hi == 1.0
    assert json.loads(out.read_text())["certificate"] == report["certificate"]
    assert Certificate.from_dict(report["certificate"]).to_dict() == report["certificate"]


def test_certify_system(tmp_path, capsys):
    code, report = _json(capsys, "certify", "--problem", _file(tmp_path, SYSTEM))
    assert code == 0
    assert report["certificate"]["case"] == "S1"
    assert report["certificate"]["windows"] == [[1.0, 4.0]]


def test_certify_zero_is_inconclusive(tmp_path, capsys):
    path = _file(tmp_path, {"equations": [{"bc": "dirichlet-dirichlet", "f": "0"}], "ladder": {"auto": [0.001, 2]}})
    code, report = _json(capsys, "certify", "--problem", path)
    assert code == 2 and report["status"] == "inconclusive"


def test_solve_quadratic_confirmed(tmp_path, capsys):
    out = tmp_path / "u.csv"
    code, report = _json(capsys, "solve", "--problem", _file(tmp_path, QUADRATIC), "--out", str(out))
    assert code == 0 and report["status"] == "confirmed"
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0] == ["t", "u"] and len(rows) == 202


def test_solve_constant_load(tmp_path, capsys):
    path = _file(tmp_path, {"equations": [{"bc": "dirichlet-dirichlet", "f": "1"}]})
    code, report = _json(capsys, "solve", "--problem", path)
    assert code == 0
    assert report["solutions"][0]["norm"] == pytest.approx(1 / 8, abs=1e-8)


def test_solve_system(tmp_path, capsys):
    out = tmp_path / "uv.csv"
    code, report = _json(capsys, "solve", "--problem", _file(tmp_path, SYSTEM), "--out", str(out))
    assert code == 0 and report["status"] == "confirmed"
    assert all(1.0 <= x <= 4.0 for x in report["windows"][0]["norms"])
    assert out.read_text().splitlines()[0] == "t,u,v"


def _bands(text):
    rows = list(csv.DictReader(io.StringIO(text)))
    out = {}
    for r in rows:
        out.setdefault(int(r["band_id"]), []).append((float(r["u"]), float(r["lower"]), float(r["upper"]), r["kind"]))
    return out


def test_region_mixed_kernel_two_bands(tmp_path, capsys):
    rho1, rho2 = 0.5, 3.0
    path = _file(tmp_path, {"equations": [{"bc": "dirichlet-neumann", "f": "u"}],
                            "ladder": {"radii": [rho1, rho2], "kinds": ["I1", "I0"]}})
    code, text, _ = _run(capsys, "region", "--problem", path, "--points", "13")
    assert code == 0
    bands = _bands(text)
    cap, floor = bands[1], bands[2]
    assert {(lo, up, k) for _, lo, up, k in cap} == {(2 * rho1, float("inf"), "I1")}
    assert min(u for u, *_ in cap) == 0.0 and max(u for u, *_ in cap) == rho1
    assert {(lo, up, k) for _, lo, up, k in floor} == {(0.0, 4 * rho2, "I0")}
    assert min(u for u, *_ in floor) == rho2 and max(u for u, *_ in floor) == 2 * rho2


def test_region_single_cap_matches_constants(tmp_path, capsys):
    path = _file(tmp_path, {"equations": [{"bc": "dirichlet-dirichlet", "f": "u"}]})
    code, text, _ = _run(capsys, "region", "--problem", path, "--condition", "I1", "--rho", "1")
    assert code == 0
    bands = _bands(text)
    assert list(bands) == [1]
    assert {lo for _, lo, _, _ in bands[1]} == {8.0}
    _, report = _json(capsys, "constants", "--problem", path)
    assert report["equations"][0]["m"] * 1.0 == 8.0


def test_region_empty_ladder(tmp_path, capsys):
    path = _file(tmp_path, {"equations": [{"bc": "dirichlet-dirichlet", "f": "u"}]})
    code, text, _ = _run(capsys, "region", "--problem", path)
    assert code == 0 and text == "u,band_id,lower,upper,kind\n"


BAD_EXPR = """{
  "equations": [
    {"bc": "dirichlet-dirichlet", "f": "lambda*u**2"}
  ],
  "params": {"lambda": 256}
}
"""


def test_expression_error_position():
    with pytest.raises(ProblemFileError) as err:
        load_problem(BAD_EXPR)
    assert err.value.line == 3
    # column of the second '*' inside the string literal
    assert err.value.column == BAD_EXPR.splitlines()[2].index("**") + 2


def test_json_syntax_error_position():
    with pytest.raises(ProblemFileError) as err:
        load_problem('{\n  "equations": [\n  }\n')
    assert err.value.line == 3


@pytest.mark.parametrize("data,needle", [
    ({"equations": []}, "equations"),
    ({"equations": [{"bc": "periodic", "f": "u"}]}, "bc"),
    ({"equations": [{"bc": "dirichlet-dirichlet", "f": "lambda*u"}]}, "unbound"),
    ({"equations": [{"bc": "dirichlet-dirichlet", "f": "u"}], "mode": "k"}, "mode"),
    ({"equations": [{"bc": "dirichlet-dirichlet", "f": "u"}], "ladder": {"radii": [2, 1], "kinds": ["I1", "I0"]}},
     "increasing"),
    ({"equations": [{"bc": "dirichlet-dirichlet", "f": "u"}], "budget": 0}, "budget"),
])
def test_validation_errors(data, needle):
    with pytest.raises(ProblemFileError, match=needle):
        load_problem(json.dumps(data, indent=2))


def test_errors_exit_with_one(tmp_path, capsys):
    code, _, err = _run(capsys, "certify", "--problem", _file(tmp_path, BAD_EXPR))
    assert code == 1 and "line 3" in err
    code, _, err = _run(capsys, "constants", "--problem", str(tmp_path / "missing.json"))
    assert code == 1


def test_exit_codes_are_deterministic(tmp_path, capsys):
    path = _file(tmp_path, SYSTEM)
    codes = {_run(capsys, "certify", "--problem", path)[0] for _ in range(3)}
    assert codes == {0}


def test_module_entry_point(tmp_path):
    path = _file(tmp_path, SYSTEM)
    done = subprocess.run([sys.executable, "-m", "conecert", "constants", "--problem", path],
                          capture_output=True, text=True, check=False)
    assert done.returncode == 0 and "0.25" in done.stdout
