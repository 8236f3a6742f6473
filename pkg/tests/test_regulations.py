import math
import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ecbrake.errors import InvalidSpeeds, ValidationError
from ecbrake.regulations import (
    RequirementSpec,
    VehicleSpec,
    handover_time,
    per_wheel_torque,
    required_total_torque,
    requirement_report,
    test_speed as compute_test_speed,
)
from ecbrake.units import Kmh, NewtonMeters, Seconds


def test_test_speed():
    v = compute_test_speed(VehicleSpec(), RequirementSpec())
    assert isinstance(v, Kmh)
    assert v == pytest.approx(160.0, rel=1e-15)


def test_total_and_per_wheel():
    total = required_total_torque(VehicleSpec(), RequirementSpec())
    assert isinstance(total, NewtonMeters)
    assert total == pytest.approx(971.6, rel=1e-12)
    assert per_wheel_torque(total, VehicleSpec()) == pytest.approx(242.9, rel=1e-12)


def test_rounded_presentation():
    report = requirement_report(VehicleSpec(), RequirementSpec())
    assert report.total_torque_rounded == 972.0
    assert report.per_wheel_torque_rounded == 243.0
    assert report.total_torque == pytest.approx(971.6)
    lines = "\n".join(report.lines())
    assert "160 km/h" in lines and "971.6" in lines and "242.9" in lines


def test_handover_time():
    t = handover_time(RequirementSpec(), 160.0)
    assert isinstance(t, Seconds)
    assert t == pytest.approx((140 / 3.6) / 4.0, rel=1e-12)
    assert t == pytest.approx(9.722, abs=5e-4)


@pytest.mark.parametrize("v", [20.0, 10.0])
def test_handover_invalid(v):
    with pytest.raises(InvalidSpeeds):
        handover_time(RequirementSpec(), v)


def test_zero_deceleration():
    req = RequirementSpec(min_deceleration=0.0)
    assert required_total_torque(VehicleSpec(), req) == 0.0
    assert per_wheel_torque(0.0, VehicleSpec()) == 0.0
    assert math.isinf(handover_time(req, 160.0))


def test_heavy_vehicle_warns():
    with pytest.warns(UserWarning):
        VehicleSpec(mass=3600.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        VehicleSpec(mass=3500.0)


@pytest.mark.parametrize(
    "kwargs",
    [dict(mass=0.0), dict(wheel_effective_radius=-0.1), dict(braked_wheels=0), dict(braked_wheels=2.5)],
)
def test_vehicle_validation(kwargs):
    with pytest.raises(ValidationError):
        VehicleSpec(**kwargs)


@pytest.mark.parametrize(
    "kwargs",
    [dict(test_speed_fraction=0.0), dict(test_speed_fraction=1.1), dict(min_deceleration=-1.0),
     dict(speed_range_rpm=(8000.0, 1000.0))],
)
def test_requirement_validation(kwargs):
    with pytest.raises(ValidationError):
        RequirementSpec(**kwargs)


def test_negative_total_rejected():
    with pytest.raises(ValidationError):
        per_wheel_torque(-1.0, VehicleSpec())


@given(st.floats(1.0, 3500.0), st.floats(0.0, 20.0), st.floats(0.05, 0.5), st.integers(1, 8))
def test_linearity_and_reconstruction(mass, decel, radius, wheels):
    v = VehicleSpec(mass=mass, wheel_effective_radius=radius, braked_wheels=wheels)
    req = RequirementSpec(min_deceleration=decel)
    total = required_total_torque(v, req)
    doubled = required_total_torque(VehicleSpec(mass=2 * mass if 2 * mass <= 3500 else mass, wheel_effective_radius=radius), req)
    if 2 * mass <= 3500:
        assert doubled == pytest.approx(2 * total, rel=1e-12)
    assert per_wheel_torque(total, v) * wheels == pytest.approx(total, rel=1e-12, abs=1e-300)
