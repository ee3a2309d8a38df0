import json
import shutil

import pytest

from conftest import DATA
from polishpath.cli import main


@pytest.fixture
def cfg_copy(tmp_path):
    for f in DATA.iterdir():
        shutil.copy(f, tmp_path / f.name)
    return tmp_path


def test_parse_ok(capsys):
    assert main(["parse", str(DATA / "hemisphere_toe.cls")]) == 0
    assert "toe_hemisphere" in capsys.readouterr().out


def test_parse_error_exit_code(tmp_path):
    bad = tmp_path / "bad.cls"
    bad.write_text("TOOL PATH/x\nGOTO/1,2,3\n")
    assert main(["parse", str(bad)]) == 2


def test_usage_errors_exit_1(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 1
    assert main(["compile", "--config", str(tmp_path / "missing.json")]) == 1


def test_mirror_twice_is_identity(tmp_path):
    once, twice = tmp_path / "l.cls", tmp_path / "r.cls"
    assert main(["mirror", str(DATA / "shoe_right.cls"), str(once)]) == 0
    assert main(["mirror", str(once), str(twice)]) == 0
    assert twice.read_text() == (DATA / "shoe_right.cls").read_text()


def test_compile_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["compile", "--config", str(DATA / "hemisphere.json"), "--out", str(out)]) == 0
    assert (a / "hemisphere_toe.script").read_bytes() == (b / "hemisphere_toe.script").read_bytes()
    assert "total below threshold: 0" in (a / "reachability.txt").read_text()


def test_compile_infeasible_exit_3(cfg_copy):
    cfg = json.loads((cfg_copy / "hemisphere.json").read_text())
    cfg["frames"]["base_to_shoe_probe"]["translation"] = [-3.0, 0.0, 0.3]
    (cfg_copy / "short.cls").write_text("TOOL PATH/short\nGOTO/0,0,0,0,0,1\nGOTO/5,0,0,0,0,1\n")
    cfg["cls"] = ["short.cls"]
    (cfg_copy / "far.json").write_text(json.dumps(cfg))
    assert main(["compile", "--config", str(cfg_copy / "far.json"), "--out", str(cfg_copy / "o")]) == 3


def test_simulate_outputs(tmp_path, capsys):
    assert main(["simulate", "--config", str(DATA / "hemisphere.json"), "--out", str(tmp_path), "--seed", "5"]) == 0
    assert (tmp_path / "toe_hemisphere_force.csv").read_text().startswith("t,force\n")
    assert (tmp_path / "force_stats.csv").read_text().startswith("label,mean,median,sigma,q1,q3,outliers\n")
    first = (tmp_path / "force_boxplot.svg").read_bytes()
    assert main(["simulate", "--config", str(DATA / "hemisphere.json"), "--out", str(tmp_path), "--seed", "5"]) == 0
    assert (tmp_path / "force_boxplot.svg").read_bytes() == first


def test_simulate_bad_controller_exit_4(cfg_copy):
    cfg = json.loads((cfg_copy / "hemisphere.json").read_text())
    cfg["contact"]["noise_sigma"] = 0.0
    cfg["controller"]["rate"] = 1e-6  # time step longer than the whole path
    (cfg_copy / "slow.json").write_text(json.dumps(cfg))
    assert main(["simulate", "--config", str(cfg_copy / "slow.json"), "--out", str(cfg_copy / "o")]) == 4


def test_dose(capsys):
    assert main(["dose", "--volume", "1000"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "20 steps"
    assert main(["dose", "--volume", "1000", "--steps-used", "7995"]) == 1


def test_report_shoe2(tmp_path, capsys):
    assert main(["report", "--config", str(DATA / "shoe2.json"), "--out", str(tmp_path)]) == 0
    text = (tmp_path / "report.txt").read_text()
    assert "pitch ok: True" in text and "replace pad" in text


def test_config_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("POLISHPATH_CONFIG", str(DATA / "hemisphere.json"))
    assert main(["compile", "--out", str(tmp_path), "--v0", "0.02"]) == 0
    assert "v=0.02000" in (tmp_path / "hemisphere_toe.script").read_text()
