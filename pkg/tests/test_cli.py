import json
import math

import pytest

from ehz.cli import main


@pytest.fixture
def bodies(tmp_path):
    paths = {}
    docs = {
        "ball4": {"type": "ball", "r": 1.0, "dim": 4},
        "ball4_2": {"type": "ball", "r": 2.0, "dim": 4},
        "ellipsoid": {"type": "ellipsoid", "radii": [1.0, 2.0]},
        "ball2": {"type": "ball", "r": 1.0, "dim": 2},
        "odd": {"type": "polytope", "vertices": [[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, -1, -1]]},
    }
    for name, doc in docs.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(doc))
        paths[name] = str(p)
    paths["dir"] = tmp_path
    return paths


def test_capacity_ball(bodies, capsys):
    code = main(["capacity", bodies["ball4"], "--modes", "8", "--starts", "4"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["capacity"] == pytest.approx(math.pi, rel=1e-8)
    assert out["converged"]
    assert out["config"]["modes"] == 8
    assert out["certificates"]["euler_residual_rel"] <= 1e-8


def test_capacity_artifact_deterministic(bodies):
    out1 = bodies["dir"] / "a1.json"
    out2 = bodies["dir"] / "a2.json"
    assert main(["capacity", bodies["ellipsoid"], "--modes", "8", "--starts", "2",
                 "--seed", "5", "--out", str(out1)]) == 0
    assert main(["capacity", bodies["ellipsoid"], "--modes", "8", "--starts", "2",
                 "--seed", "5", "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    # timestamps live in the sidecar, not the artifact
    assert (bodies["dir"] / "a1.json.meta.json").exists()
    assert "written_at" not in out1.read_text()


def test_capacity_cache_roundtrip(bodies, capsys):
    cache = str(bodies["dir"] / "cache")
    assert main(["capacity", bodies["ball4"], "--modes", "8", "--starts", "2",
                 "--cache", cache]) == 0
    first = json.loads(capsys.readouterr().out)
    assert main(["capacity", bodies["ball4"], "--modes", "8", "--starts", "2",
                 "--cache", cache]) == 0
    second = json.loads(capsys.readouterr().out)
    assert first == second


def test_capacity_csv_format(bodies, capsys):
    assert main(["capacity", bodies["ball4"], "--modes", "8", "--starts", "2",
                 "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    keys = dict(line.split(",", 1) for line in lines)
    assert float(keys["capacity"]) == pytest.approx(math.pi, rel=1e-8)


def test_carrier_csv(bodies, capsys):
    out = str(bodies["dir"] / "carrier.csv")
    code = main(["carrier", bodies["ball4"], "--modes", "8", "--starts", "2",
                 "--out", out])
    assert code == 0
    with open(out) as fh:
        header = fh.readline().strip().split(",")
    assert header == ["t", "z_1", "z_2", "z_3", "z_4"]
    summary = json.loads(capsys.readouterr().out)
    assert summary["capacity"] == pytest.approx(math.pi, rel=1e-8)


def test_bm_equality_exit_zero(bodies, capsys):
    code = main(["bm", bodies["ball4"], bodies["ball4_2"], "--p", "1",
                 "--modes", "8", "--starts", "4"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert abs(out["deficit"]) <= 1e-8 * out["rhs"]


def test_bm_csv_summary(bodies, capsys):
    code = main(["bm", bodies["ball4"], bodies["ball4_2"], "--p", "1", "--modes", "8",
                 "--starts", "2", "--format", "csv"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "name,lhs,rhs,deficit,pass"
    assert lines[1].startswith("bm,")


def test_usage_errors_exit_two(bodies, capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"type": "ellipsoid", "radius": [1, 2]}')
    assert main(["capacity", str(bad)]) == 2
    assert "radii" in capsys.readouterr().err

    assert main(["capacity", str(tmp_path / "missing.json")]) == 2

    notjson = tmp_path / "notjson.json"
    notjson.write_text("{broken")
    assert main(["capacity", str(notjson)]) == 2
    assert "line" in capsys.readouterr().err


def test_odd_dimension_rejected(bodies, capsys):
    assert main(["capacity", bodies["odd"]]) == 2
    assert "even" in capsys.readouterr().err


def test_dimension_mismatch_between_files(bodies, capsys):
    assert main(["bm", bodies["ball4"], bodies["ball2"], "--modes", "8"]) == 2
    assert "dimension mismatch" in capsys.readouterr().err


def test_unknown_flag_rejected(bodies):
    assert main(["capacity", bodies["ball4"], "--frobnicate"]) == 2


def test_meanwidth(bodies, capsys):
    code = main(["meanwidth", bodies["ball4"], "--samples", "5000", "--seed", "3"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["estimate"] == pytest.approx(1.0, abs=1e-10)


def test_derivative_command(bodies, capsys):
    code = main(["derivative", bodies["ball4"], bodies["ball4"], "--modes", "8",
                 "--starts", "2", "--eps", "0.2,0.1"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["passed"]


def test_suite_single_criterion(capsys):
    code = main(["suite", "--only", "1"])
    out = capsys.readouterr().out
    assert code == 0
    assert "ACCEPTANCE  1 [PASS]" in out
    assert "SUITE: 1/1" in out
