import io
import json
from pathlib import Path

import pytest

from ecbrake import export
from ecbrake.cli import main
from ecbrake.model import OperatingPoint, TorqueModel, torque
from ecbrake.search import run_sweep

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    status = main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def test_torque(capsys):
    status, out, _ = run(capsys, "torque", "8000")
    assert status == 0
    record = json.loads(out.splitlines()[1])
    assert record["torque_Nm"] == torque(TorqueModel(), OperatingPoint(8000))
    assert record["calibration"] == "uncalibrated"
    assert record["speed_convention"] == "rad_s"
    assert "uncalibrated" in out.splitlines()[0]


def test_torque_zero_speed(capsys):
    status, out, _ = run(capsys, "torque", "0")
    assert status == 0
    assert json.loads(out.splitlines()[1])["torque_Nm"] == 0.0


def test_torque_with_unit(capsys):
    _, out, _ = run(capsys, "torque", "104.71975511965977 rad/s")
    assert json.loads(out.splitlines()[1])["speed_rpm"] == pytest.approx(1000.0)


def test_flags_after_subcommand(capsys):
    _, out, _ = run(capsys, "torque", "1000", "--lambda", "2", "--speed-convention", "rpm")
    record = json.loads(out.splitlines()[1])
    base = torque(TorqueModel(), OperatingPoint(1000, "rpm"))
    assert record["torque_Nm"] == 2 * base
    assert record["calibration"] == "user-scaled"


def test_verbose_echo_on_stderr(capsys):
    _, _, err = run(capsys, "--verbose", "requirement")
    assert err == (GOLDEN / "default_echo.txt").read_text()


def test_requirement(capsys):
    status, out, _ = run(capsys, "requirement")
    assert status == 0
    assert "test_speed = 160 km/h" in out
    assert "rounded 972" in out and "rounded 243" in out
    assert "9.722 s" in out


def test_sweep_golden(tmp_path, capsys):
    target = tmp_path / "sweep.csv"
    status, _, _ = run(capsys, "sweep", "--config", str(GOLDEN / "small_grid.toml"), "--out", str(target))
    assert status == 0
    produced = target.read_text().splitlines()
    expected = (GOLDEN / "small_grid.csv").read_text().splitlines()
    assert produced[0] == expected[0]
    assert len(produced) == len(expected) == 9
    for p, e in zip(produced[1:], expected[1:]):
        pb, pw, ps, pt, pstat = p.split(",")
        eb, ew, es, et, estat = e.split(",")
        assert (pb, pw, ps, pstat) == (eb, ew, es, estat)
        assert float(pt) == pytest.approx(float(et), rel=1e-12)
        assert all(f == format(float(f), ".17g") for f in (pb, pw, ps, pt))


def test_csv_round_trip(tmp_path, capsys):
    from ecbrake.config import load_config

    cfg = load_config(GOLDEN / "small_grid.toml")
    result = run_sweep(TorqueModel(), cfg.grid)
    text = export.sweep_csv_text(result)
    assert export.read_sweep_csv(io.StringIO(text)) == list(result.entries)


def test_rank(capsys):
    status, out, _ = run(capsys, "rank", "--config", str(GOLDEN / "small_grid.toml"), "--target", "100", "--top", "2")
    assert status == 0
    lines = out.splitlines()
    assert lines[0].startswith("# target=100")
    assert len(lines) == 4


def test_rank_empty_feasible_set(capsys):
    status, _, err = run(capsys, "rank", "--config", str(GOLDEN / "small_grid.toml"), "--feasible-only")
    assert status == 3
    assert "EMPTY_FEASIBLE_SET" in err


def test_calibrate_writes_sidecar(tmp_path, capsys):
    out = tmp_path / "cal.txt"
    status, _, _ = run(capsys, "calibrate", "--out", str(out))
    assert status == 0
    text = out.read_text()
    assert "lambda_star=" in text and "gate" in text
    sidecars = list(tmp_path.glob("calibration-*.json"))
    assert len(sidecars) == 1
    loaded = export.load_calibration(sidecars[0])
    assert loaded.lambda_star > 0


def test_calibration_block_applies_scale(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text("[calibration]\n")
    _, out, _ = run(capsys, "torque", "8000", "--config", str(cfg))
    record = json.loads(out.splitlines()[1])
    assert record["calibration"] == "calibrated"
    assert record["torque_Nm"] == pytest.approx(253.802, rel=1e-12)
    _, out, _ = run(capsys, "torque", "8000", "--config", str(cfg), "--lambda", "2")
    assert json.loads(out.splitlines()[1])["calibration"] == "user-scaled"


def test_oracle_check(tmp_path, capsys):
    cfg = tmp_path / "o.toml"
    cfg.write_text('[oracle]\nmesh = 32\nn = [1]\nk = [1, 3]\nspeeds = ["0 rpm", "8000 rpm"]\n')
    status, out, _ = run(capsys, "oracle-check", "--config", str(cfg))
    assert status == 0
    assert "PASS" in out.splitlines()[-1]
    assert "observed_order=" in out
    status, out, _ = run(capsys, "oracle-check", "--config", str(cfg), "--mesh", "8")
    assert status == 3
    assert "FAIL" in out.splitlines()[-1]


@pytest.mark.parametrize(
    "body,code",
    [('[geometry]\nb = "30"\n', "UNIT_ERROR"), ('[geometry]\nb = "-1 mm"\n', "RANGE_ERROR"), ("x =", "PARSE_ERROR")],
)
def test_validation_exit_status(tmp_path, capsys, body, code):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(body)
    status, _, err = run(capsys, "torque", "1000", "--config", str(cfg))
    assert status == 2
    assert code in err


def test_numerical_exit_status(tmp_path, capsys):
    cfg = tmp_path / "strict.toml"
    cfg.write_text("[truncation]\nn_max = 2\nk_max = 2\nband_rtol = 1e-12\n")
    status, _, err = run(capsys, "torque", "1000", "--config", str(cfg))
    assert status == 3
    assert "NON_CONVERGED" in err


def test_io_exit_status(tmp_path, capsys):
    status, _, err = run(capsys, "torque", "1000", "--config", str(tmp_path / "missing.toml"))
    assert status == 4
    assert "IO_ERROR" in err
    status, _, _ = run(capsys, "requirement", "--out", str(tmp_path / "no" / "such" / "dir.txt"))
    assert status == 4
