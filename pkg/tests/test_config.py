from pathlib import Path

import pytest

from ecbrake.config import SCHEMA, load_config, parse_config, parse_quantity
from ecbrake.errors import ParseError, RangeError, UnitError
from ecbrake.model import SpeedConvention, TorqueModel

GOLDEN = Path(__file__).parent / "golden"


def test_defaults_match_golden_echo():
    assert "\n".join(parse_config("").echo()) + "\n" == (GOLDEN / "default_echo.txt").read_text()


def test_default_values():
    cfg = parse_config("")
    g = cfg.geometry
    assert (g.r3, g.r2, g.magnet_thickness, g.air_gap, g.plate_thickness) == (0.14, 0.112, 0.03, 0.001, 0.002)
    assert g.w_m == pytest.approx(0.11)
    m = cfg.magnets
    assert (m.pole_pairs, m.pole_arc_ratio, m.remanence) == (4, 0.444, 1.25)
    assert cfg.materials.sigma == 57e7
    v, r = cfg.vehicle, cfg.requirement
    assert (v.mass, v.wheel_effective_radius, v.max_speed, v.braked_wheels) == (1735.0, 0.14, 200.0, 4)
    assert (r.min_deceleration, r.test_speed_fraction, r.handover_speed, r.per_wheel_torque) == (4.0, 0.8, 20.0, 243.0)
    assert cfg.speed_convention is SpeedConvention.RADIANS_PER_SECOND
    assert cfg.calibration is None
    assert cfg.model() == TorqueModel()


def test_every_key_has_provenance():
    cfg = parse_config("")
    for section, specs in SCHEMA.items():
        for spec in specs:
            assert cfg.provenance[f"{section}.{spec.key}"]


def test_user_values_and_provenance():
    cfg = parse_config('[geometry]\nb = "40 mm"\nw_m = "11 cm"\n')
    assert cfg.geometry.magnet_thickness == 0.04
    assert cfg.geometry.w_m == pytest.approx(0.11)
    assert cfg.provenance["geometry.b"] == "user"
    assert cfg.is_user("geometry", "b") and not cfg.is_user("geometry", "r3")
    assert "geometry.b = 0.04 m  [user]" in cfg.echo()


def test_r1_derives_w_m():
    cfg = parse_config('[geometry]\nr1 = "12 mm"\n')
    assert cfg.geometry.w_m == pytest.approx(0.1)
    assert cfg.provenance["geometry.w_m"] == "derived from r1"


def test_r1_and_w_m_exclusive():
    with pytest.raises(ParseError):
        parse_config('[geometry]\nr1 = "12 mm"\nw_m = "100 mm"\n')


@pytest.mark.parametrize("text,expected", [("30 mm", 0.03), ("3 cm", 0.03), ("0.03 m", 0.03), ("2 mm", 0.002)])
def test_length_conversion_exact(text, expected):
    assert parse_quantity(text, "length", "x") == expected


def test_speed_units():
    assert parse_quantity("1000 rpm", "speed", "x") == pytest.approx(1000.0)
    assert parse_quantity("104.71975511965977 rad/s", "speed", "x") == pytest.approx(1000.0, rel=1e-12)


@pytest.mark.parametrize("text", ["30", "30 kg", "thirty mm", 30])
def test_unit_errors(text):
    with pytest.raises(UnitError):
        parse_quantity(text, "length", "geometry.b")


def test_negative_thickness_range_error():
    with pytest.raises(RangeError, match="magnet thickness range"):
        parse_config('[geometry]\nb = "-1 mm"\n')


def test_out_of_box_range_error():
    with pytest.raises(RangeError):
        parse_config('[geometry]\nw_m = "120 mm"\n')


def test_invariant_violation_is_range_error():
    with pytest.raises(RangeError):
        parse_config('[geometry]\nr2 = "150 mm"\n')


def test_pole_arc_open_interval():
    with pytest.raises(RangeError):
        parse_config("[magnets]\npole_arc_ratio = 1.0\n")


def test_unknown_key_and_section():
    with pytest.raises(ParseError):
        parse_config('[geometry]\nbee = "1 mm"\n')
    with pytest.raises(ParseError):
        parse_config("[nonsense]\nx = 1\n")


def test_malformed_reports_position():
    with pytest.raises(ParseError) as info:
        parse_config('[geometry]\nb = "30 mm\n')
    assert info.value.line == 2
    assert info.value.column == 11


def test_wrong_dimension_in_list():
    with pytest.raises(UnitError):
        parse_config('[grid]\nspeeds = ["1000 kg"]\n')


def test_speed_convention():
    assert parse_config('[model]\nspeed_convention = "rpm"\n').speed_convention is SpeedConvention.RPM
    with pytest.raises(UnitError):
        parse_config('[model]\nspeed_convention = "hz"\n')


def test_calibration_block():
    cfg = parse_config('[calibration]\ntorque = "250 N*m"\n')
    assert cfg.calibration.torque == 250.0
    assert cfg.calibration.b == 0.03
    assert any(line.startswith("calibration.torque") for line in cfg.echo())


def test_grid_from_config():
    cfg = load_config(GOLDEN / "small_grid.toml")
    assert cfg.grid.b_points == (0.029, 0.03)
    assert cfg.grid.wm_points == (0.108, 0.11)
    assert cfg.grid.speeds_rpm == (1000.0, 8000.0)


def test_missing_file():
    with pytest.raises(OSError):
        load_config("/nonexistent/config.toml")
