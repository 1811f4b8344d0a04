import csv
import io
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from elliptic_media.cli import dump_csv, main, write_output
from elliptic_media.fieldmodel import field_to_dict, scalar_field
from elliptic_media.media import catalog_field

PI = math.pi


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture
def lossy_problem(tmp_path):
    data = {
        "bc": "Dirichlet",
        "omega": 1.0,
        "eps": field_to_dict(scalar_field("eps", [1 + 1j], dim=3)),
        "mu": field_to_dict(scalar_field("mu", [1.0], dim=3)),
    }
    return write_json(tmp_path / "problem.json", data)


def test_certify_lossy_exit_zero(tmp_path, capsys):
    inp = write_json(tmp_path / "eps.json", field_to_dict(scalar_field("eps", [1 + 1j], dim=3)))
    out = tmp_path / "cert.json"
    assert main(["certify", "--input", inp, "--output", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["elliptic"] and d["sharp"] and d["method"] == "ClosedFormScalar"
    assert d["theta_set"][0]["start"] == pytest.approx(-3 * PI / 4)
    assert d["theta_set"][0]["end"] == pytest.approx(PI / 4)


def test_certify_unclamped_cloak_exit_two(tmp_path):
    f = catalog_field("mu", "spherical_cloak", {"R1": 1.0, "R2": 2.0, "clamp": False}, r=(1.0, 2.0, 9))
    inp = write_json(tmp_path / "cloak.json", field_to_dict(f))
    out = tmp_path / "cert.json"
    assert main(["certify", "-i", inp, "-o", str(out)]) == 2
    d = json.loads(out.read_text())
    assert not d["elliptic"]
    assert d["witnesses"][0]["sample_id"] == "r=1.0"


def test_malformed_json_exit_one_without_partial_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"name": "x",\n  "dim": }')
    out = tmp_path / "never.json"
    assert main(["certify", "-i", str(bad), "-o", str(out)]) == 1
    assert not out.exists()
    err = capsys.readouterr().err
    assert f"{bad}:2:" in err
    assert [p.name for p in tmp_path.iterdir()] == ["bad.json"]


def test_missing_file_and_bad_grid(tmp_path, capsys):
    assert main(["certify", "-i", str(tmp_path / "nope.json")]) == 1
    assert main(["certify", "-i", str(tmp_path / "nope.json"), "--grid", "8"]) == 1


def test_theta_imaginary_single_arc(tmp_path):
    inp = write_json(tmp_path / "i.json", field_to_dict(scalar_field("i", [2j])))
    out = tmp_path / "t.json"
    assert main(["theta", "-i", inp, "-o", str(out), "--grid", "256"]) == 0
    d = json.loads(out.read_text())
    assert len(d["theta_set"]) == 1
    assert (d["theta_set"][0]["start"], d["theta_set"][0]["end"]) == pytest.approx((-PI, 0.0))
    for row in d["curve"]:
        if abs(row["xi_minus"]) > 1e-12 * 2:  # grid points on the boundary evaluate to roundoff
            assert (row["xi_minus"] > 0) == row["in_theta_set"]


def test_theta_hermitian_negative_two_intervals_csv(tmp_path):
    f = scalar_field("n", [-1.0, -2.0], dim=3)
    inp = write_json(tmp_path / "n.json", field_to_dict(f))
    out = tmp_path / "curve.csv"
    assert main(["theta", "-i", inp, "-o", str(out), "--format", "csv", "--grid", "512"]) == 0
    raw = out.read_bytes()
    assert b"\r\n" not in raw
    rows = list(csv.DictReader(io.StringIO(raw.decode())))
    assert len(rows) == 512
    for r in rows:
        assert (float(r["xi_minus"]) > 0) == (r["in_theta_set"] == "1")
    out2 = tmp_path / "cert.json"
    main(["certify", "-i", inp, "-o", str(out2)])
    assert len(json.loads(out2.read_text())["theta_set"]) == 2


def test_coercivity_lossy(lossy_problem, tmp_path, capsys):
    out = tmp_path / "rep.json"
    curve = tmp_path / "c.csv"
    assert main(["coercivity", "-i", lossy_problem, "-o", str(out), "--curve", str(curve), "--grid", "1024"]) == 0
    d = json.loads(out.read_text())
    assert d["theta_star"] == pytest.approx(-PI + math.atan(2), abs=1e-6)
    assert d["c_star"] == pytest.approx(5**-0.5, abs=1e-6)
    assert "warning" in capsys.readouterr().err
    header = curve.read_text().splitlines()[0]
    assert header == "theta,curl_term,mass_term,boundary_term,c"


def test_coercivity_robin_breakdown(tmp_path):
    data = {
        "bc": "Robin",
        "omega": 1.0,
        "eps": field_to_dict(scalar_field("eps", [1 + 1j], dim=3)),
        "mu": field_to_dict(scalar_field("mu", [1.0], dim=3)),
        "alpha": field_to_dict(scalar_field("alpha", [np.exp(1j * PI / 8)], dim=2)),
    }
    inp = write_json(tmp_path / "robin.json", data)
    out = tmp_path / "rep.json"
    code = main(["coercivity", "-i", inp, "-o", str(out), "--assert-geometry-I", "--assert-geometry-II", "--assert-alpha-regularity"])
    assert code == 0
    d = json.loads(out.read_text())
    b = d["breakdown"]
    assert d["c_star"] == pytest.approx(min(b["curl_term"], b["mass_term"], b["boundary_term"]), abs=0)
    assert d["hypothesis_checklist"]["geometry_I"] == "user-asserted"
    assert d["hypothesis_checklist"]["alpha_regularity"] == "user-asserted"


def test_coercivity_empty_common_exit_three(tmp_path):
    data = {
        "omega": 1.0,
        "eps": field_to_dict(scalar_field("eps", [1.0], dim=3)),
        "mu": field_to_dict(scalar_field("mu", [1.0], dim=3)),
    }
    inp = write_json(tmp_path / "h.json", data)
    out = tmp_path / "rep.json"
    assert main(["coercivity", "-i", inp, "-o", str(out)]) == 3
    assert json.loads(out.read_text())["verdict"] == "Fredholm-sense per paper, not certified coercive"


def test_degrees_presentation(tmp_path):
    inp = write_json(tmp_path / "e.json", field_to_dict(scalar_field("eps", [1 + 1j])))
    out = tmp_path / "c.json"
    assert main(["certify", "-i", inp, "-o", str(out), "--degrees"]) == 0
    d = json.loads(out.read_text())
    assert d["angle_unit"] == "deg"
    assert (d["theta_set"][0]["start"], d["theta_set"][0]["end"]) == pytest.approx((-135.0, 45.0))
    assert d["theta_measure"] == pytest.approx(PI)  # measures stay in radians


def test_media_list_and_emit(tmp_path, capsys):
    assert main(["media", "list"]) == 0
    listing = json.loads(capsys.readouterr().out)
    assert "spherical_pml" in listing["models"]
    out = tmp_path / "cloak.json"
    args = ["media", "emit", "--model", "spherical_cloak", "--params", '{"R1": 1, "R2": 2}', "--axis", "r=1:2:3", "-o", str(out)]
    assert main(args) == 0
    d = json.loads(out.read_text())
    assert d["source"]["type"] == "explicit"
    assert [s["id"] for s in d["source"]["samples"]] == ["r=1.0", "r=1.5", "r=2.0"]
    assert main(["certify", "-i", str(out)]) == 0
    capsys.readouterr()
    assert main(["media", "emit", "--model", "spherical_cloak", "--params", '{"R1": 1, "R2": 2}', "--definition"]) == 0
    assert json.loads(capsys.readouterr().out)["source"]["type"] == "parametric"
    assert main(["media", "emit", "--model", "nope"]) == 1
    assert main(["media", "emit", "--model", "ferrite", "--params", "{bad"]) == 1
    assert main(["media", "emit", "--model", "spherical_cloak", "--params", '{"R1": 1, "R2": 2}', "--axis", "r=1"]) == 1
    assert main(["media", "emit"]) == 1


def test_verify_perturb_reports_failure(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert main(["verify", "--perturb", "-o", str(out), "--grid", "1024"]) == 2
    d = json.loads(out.read_text())
    assert d["failed"] >= 1
    assert "failed" in capsys.readouterr().err


def test_verify_half_grid_scales_tolerance(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "-o", str(out), "--grid", "2048"]) == 0
    d = json.loads(out.read_text())
    assert d["endpoint_tolerance"] == pytest.approx(2 * 2 * PI / 2048 + 1e-8)


def test_verify_deterministic_subprocess(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"v{k}.json"
        r = subprocess.run([sys.executable, "-m", "elliptic_media", "verify", "--seed", "42", "-o", str(path)], capture_output=True)
        assert r.returncode == 0, r.stderr.decode()
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_csv_format_helpers(tmp_path):
    text = dump_csv(["a", "b"], [(0.1, None), (True, 1 / 3)])
    assert text == "a,b\n0.10000000000000001,\n1,0.33333333333333331\n"
    p = tmp_path / "x.txt"
    write_output("hello\n", str(p))
    assert p.read_text() == "hello\n"
    assert sorted(os.listdir(tmp_path)) == ["x.txt"]
