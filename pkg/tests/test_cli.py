import json

import pytest

from squeezebell.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_VERIFY, angle, main, squeezing


def test_value_parsers():
    assert squeezing("0.5") == 0.5
    assert squeezing("6.2696dB") == pytest.approx(0.7218, abs=1e-4)
    assert angle("0.5pi") == pytest.approx(1.5707963267948966)
    assert angle("pi") == pytest.approx(3.141592653589793)


def test_dr_run(tmp_path, capsys):
    assert main(["dr-run", "--cap", "12", "--out", str(tmp_path)]) == EXIT_OK
    data = json.loads((tmp_path / "dr_report.json").read_text())
    assert data["overall"] == pytest.approx(0.64, abs=5e-3)  # cap 12 truncates the ψ tails
    assert (tmp_path / "dr_report.csv").exists()
    manifest = json.loads((tmp_path / "dr-run.manifest.json").read_text())
    assert manifest["command"] == "dr-run" and manifest["config"]["cap"] == 12


def test_sr_run_passive(tmp_path):
    assert main(["sr-run", "--r", "0", "--cap", "6", "--out", str(tmp_path)]) == EXIT_OK
    assert json.loads((tmp_path / "sr_report.json").read_text())["overall"] == pytest.approx(0.5)


def test_verify_failure_exit_code(tmp_path):
    assert main(["verify", "--cap", "4", "--no-grid", "--tol", "0", "--out", str(tmp_path)]) == EXIT_VERIFY


def test_repeater(tmp_path, capsys):
    assert main(["repeater", "--out", str(tmp_path)]) == EXIT_OK
    rows = json.loads((tmp_path / "repeater.json").read_text())
    assert [round(r["rate_factor"], 6) for r in rows] == [0.000152, 0.00114]


def test_sweep_with_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"theta1_step_pi": 1.0, "r_step": 0.5, "cap": 8, "constraints": ["Omega+"]}))
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
    assert len((tmp_path / "sweep.csv").read_text().splitlines()) == 1 + 2 * 3 * 3
    for name in ("surface.svg", "equal_squeezing.svg", "surface.csv", "optimum.json"):
        assert (tmp_path / name).exists()
    assert main(["plot", str(tmp_path / "sweep.csv"), "--out", str(tmp_path / "p")]) == EXIT_OK


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"nope": 1}')
    assert main(["sweep", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["sweep", "--config", str(tmp_path / "missing.json")]) == EXIT_IO
    with pytest.raises(SystemExit) as exc:
        main(["dr-run", "--r", "strong"])
    assert exc.value.code == 2
