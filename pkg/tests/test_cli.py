import csv
import io
import json

import pytest

from krylab.cli import main, parse_enclosure, parse_subspace, parse_vector
from krylab.space import AmbientSpace


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_scenario_list(capsys):
    code, out, _ = run(capsys, "scenario", "list")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["id", "expected", "citation"]
    assert len(rows) == 18
    code, out, _ = run(capsys, "scenario", "list", "--format", "json")
    assert len(json.loads(out)["scenarios"]) == 17


def test_scenario_run(capsys):
    code, out, _ = run(capsys, "scenario", "run", "--id", "EX31", "--param", "n=4", "--param", "D=20", "--format", "json")
    assert code == 0
    d = json.loads(out)
    assert d["pass"] is True and d["params"]["n"] == 4
    code, out, _ = run(capsys, "scenario", "run", "--id", "EX31")
    assert code == 0 and out.startswith("# EX31")


def test_usage_errors(capsys):
    assert run(capsys, "scenario", "run", "--id", "NOPE")[0] == 2
    assert run(capsys, "scenario", "run", "--id", "EX31", "--param", "n")[0] == 2
    code, _, err = run(capsys, "scenario", "run", "--id", "EX31", "--param", "n=0")
    assert code == 2 and "krylab: error" in err
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2


def test_suite_run(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenarios": ["EX31", "REM78"], "seed": 1}))
    code, out, _ = run(capsys, "suite", "run", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 0
    assert "2/2 passed" in out
    assert (tmp_path / "o" / "EX31.csv").exists()
    cfg.write_text(json.dumps({"scenarios": ["EX31"], "bad": 1}))
    assert run(capsys, "suite", "run", "--config", str(cfg), "--out", str(tmp_path / "o"))[0] == 2
    cfg.write_text(json.dumps({"scenarios": [{"id": "EX31", "params": {"n": 12, "N_max": 6}}]}))
    code, out, _ = run(capsys, "suite", "run", "--config", str(cfg), "--out", str(tmp_path / "p"), "--format", "json")
    assert code == 1 and json.loads(out)["exit_code"] == 1
    assert run(capsys, "suite", "run", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path))[0] == 2


def test_krylov_diagnose(capsys):
    code, out, _ = run(capsys, "krylov", "diagnose", "--op", "EX31_R", "--param", "D=30", "--g", "e:2", "--f", "e:1", "--format", "json")
    assert code == 0
    assert json.loads(out)["verdict"] == "NotKrylovSolvable"
    code, out, _ = run(capsys, "krylov", "diagnose", "--op", "EX31_Rn", "--param", "n=6", "--param", "D=30", "--g", "e:2", "--n-max", "8")
    lines = out.splitlines()
    assert lines[0] == "N,rel_dist" and float(lines[-1].split(",")[1]) < 1e-10


def test_gap_compute(capsys):
    code, out, _ = run(capsys, "gap", "compute", "--space", "unilateral:3", "--U", "e:1", "--V", "e:1+e:2", "--format", "json")
    d = json.loads(out)
    assert d["delta_UV"] == pytest.approx(2**-0.5)
    assert d["d_hat"] == pytest.approx(0.76537, abs=1e-5)
    code, out, _ = run(capsys, "gap", "compute", "--space", "unilateral:3", "--U", "e:1", "--V", "0")
    assert "d_UV,2" in out
    assert run(capsys, "gap", "compute", "--space", "weird:3", "--U", "e:1", "--V", "0")[0] == 2


def test_weakgap_compute(capsys):
    code, out, _ = run(capsys, "weakgap", "compute", "--space", "unilateral:4", "--U", "e:3", "--V", "0",
                       "--brute-step", "0.05", "--format", "json")
    d = json.loads(out)
    assert d["d_w_UV"]["value"] == pytest.approx(0.125, abs=1e-9)
    assert d["brute_force_UV"] == pytest.approx(0.125, abs=0.05)


def test_kclass_check(capsys):
    code, out, _ = run(capsys, "kclass", "check", "--op", "LEM43_An", "--param", "n=4", "--param", "D=20",
                       "--enclosure", "interval:0.25,1.25", "--degree", "10", "--format", "json")
    d = json.loads(out)
    assert d["verdict"] == "Certified" and d["poly"]["degree"] == 10
    code, out, _ = run(capsys, "kclass", "check", "--op", "EX44_A", "--param", "K=8", "--enclosure", "lid:4", "--format", "json")
    assert json.loads(out)["verdict"] == "Refuted"
    assert run(capsys, "kclass", "check", "--op", "EX44_A", "--enclosure", "square:1")[0] == 2


def test_parsers():
    sp = AmbientSpace.unilateral(4)
    v = parse_vector(sp, "e:1 + 0.5*e:3")
    assert list(v.coords.real) == [1, 0, 0.5, 0]
    assert parse_subspace(sp, "H").dim == 4
    assert parse_subspace(sp, "e:1;e:2;e:1+e:2").dim == 2
    assert parse_enclosure("disk:1,0,0.5").r == 0.5
