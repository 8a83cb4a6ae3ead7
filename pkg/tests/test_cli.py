import json

import numpy as np
import pytest

from dualmink.cli import main
from dualmink.io import InputError, parse_body, parse_problem


@pytest.fixture
def files(tmp_path):
    def put(name, obj):
        p = tmp_path / name
        p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(p)

    return put


def test_parse_body_variants(g3):
    assert parse_body({"type": "ball", "radius": 2, "center": [0.1, 0, 0]}).n == 3
    assert parse_body({"type": "ellipsoid", "axes": [1, 2]}).n == 2
    vals = np.ones(build_size := 32 * 64).tolist()
    assert parse_body({"type": "support_field", "L": 32, "values": vals}).volume() == pytest.approx(4 * np.pi / 3)
    for bad in ({"type": "cone"}, {"axes": [1]}, {"type": "ball"}, {"type": "support_field", "L": 8, "values": [1]}):
        with pytest.raises(InputError):
            parse_body(bad)


def test_parse_problem():
    spec = parse_problem({"n": 3, "p": 0, "q": 3, "f": {"constant": 1, "harmonics": [{"k": 2, "m": 0, "coef": 0.01}]}})
    assert spec.f == (1.0, [(2, 0, 0.01)])
    with pytest.raises(InputError):
        parse_problem({"n": 3, "p": 0})


def test_measure_ball_and_ellipsoid(files, tmp_path):
    out = tmp_path / "m.json"
    assert main(["measure", files("b.json", {"type": "ball", "radius": 2}), "-o", str(out)]) == 0
    res = json.loads(out.read_text())
    assert res["total"] == pytest.approx(32 * np.pi, rel=1e-12)
    assert set(res["identities"]) == {"nVk_check", "scaling_check"}
    assert main(["measure", files("e.json", {"type": "ellipsoid", "axes": [1, 2, 3]}), "-o", str(out)]) == 0
    assert json.loads(out.read_text())["total"] == pytest.approx(24 * np.pi, rel=1e-4)


def test_measure_exit_codes(files):
    assert main(["measure", files("bad.json", "{not json")]) == 2
    assert main(["measure", files("x.json", {"type": "ellipsoid", "axes": [1, 1, 1], "center": [3, 0, 0]})]) == 3


def test_measure_is_byte_deterministic(files, tmp_path):
    body = files("c.json", {"type": "polytope", "vertices": (2 * np.indices((2, 2, 2)).reshape(3, -1).T - 1).tolist()})
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["--seed", "5", "measure", body, "--p", "0.5", "--mc-samples", "100000", "-o", str(a)])
    main(["--seed", "5", "measure", body, "--p", "0.5", "--mc-samples", "100000", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_solve_outputs_and_codes(files, tmp_path):
    out, csv = tmp_path / "s.json", tmp_path / "s.csv"
    iso = files("p.json", {"n": 3, "p": 0.0, "q": 3.0, "f": {"constant": 1.0}})
    assert main(["solve", iso, "-o", str(out), "--field", str(csv)]) == 0
    assert json.loads(out.read_text())["converged"]
    u = np.loadtxt(csv, delimiter=",", skiprows=1)[:, -1]
    assert np.allclose(u, 1.0, atol=1e-12)
    neg = files("n.json", {"n": 3, "p": 0.0, "q": 3.0, "f": {"constant": 0.0, "harmonics": [{"k": 2, "m": 0, "coef": 0.1}]}})
    assert main(["solve", neg]) == 3
    hard = files("h.json", {"n": 3, "p": 0.0, "q": 3.0, "f": {"constant": 1.0, "harmonics": [{"k": 2, "m": 0, "coef": 0.1}]}})
    assert main(["solve", hard, "--max-iter", "1", "-o", str(out)]) == 4


def test_probe_command(files, tmp_path):
    out = tmp_path / "p.json"
    iso = files("p.json", {"n": 2, "p": 0.0, "q": 2.5})
    assert main(["probe", iso, "--starts", "3", "-o", str(out)]) == 0
    assert json.loads(out.read_text())["spread"] < 1e-8


def test_verify_suite_filter_and_unknown(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "--suite", "lemma43", "-o", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert {r["name"] for r in rep["reports"]} == {"lemma43"}
    assert main(["verify", "--suite", "unknown"]) == 2


def test_scan_command(tmp_path):
    out = tmp_path / "s.json"
    assert main(["scan", "ball", "--params", "0.5,1,2", "-o", str(out)]) == 0
    assert len(json.loads(out.read_text())["metadata"]["members"]) == 3
