"""Torque requirement arithmetic derived from braking regulations.

A lightweight vehicle must reach a minimum deceleration during a high-speed
test run at a fraction of its top speed; the brake's share of the torque
follows from ``T = m * a * r`` split evenly over the braked wheels.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

from .errors import InvalidSpeeds, ValidationError
from .units import Kmh, NewtonMeters, Seconds, kmh_to_m_s

LIGHT_VEHICLE_MAX_MASS = 3500.0


@dataclass(frozen=True)
class VehicleSpec:
    mass: float = 1735.0
    wheel_effective_radius: float = 0.14
    max_speed: float = 200.0  # km/h
    braked_wheels: int = 4

    def __post_init__(self):
        if not self.mass > 0.0:
            raise ValidationError(f"mass must be positive, got {self.mass}")
        if self.mass > LIGHT_VEHICLE_MAX_MASS:
            warnings.warn(
                f"mass {self.mass} kg exceeds the {LIGHT_VEHICLE_MAX_MASS:g} kg light-vehicle limit",
                stacklevel=2,
            )
        if not self.wheel_effective_radius > 0.0:
            raise ValidationError("wheel_effective_radius must be positive")
        if self.max_speed < 0.0:
            raise ValidationError("max_speed must be >= 0")
        if isinstance(self.braked_wheels, bool) or int(self.braked_wheels) != self.braked_wheels or self.braked_wheels < 1:
            raise ValidationError(f"braked_wheels must be an integer >= 1, got {self.braked_wheels!r}")


@dataclass(frozen=True)
class RequirementSpec:
    min_deceleration: float = 4.0  # m/s^2
    test_speed_fraction: float = 0.8
    handover_speed: float = 20.0  # km/h
    per_wheel_torque: float = 243.0  # N*m, design target
    speed_range_rpm: tuple[float, float] = (1000.0, 8000.0)

    def __post_init__(self):
        object.__setattr__(self, "speed_range_rpm", tuple(float(s) for s in self.speed_range_rpm))
        if not 0.0 < self.test_speed_fraction <= 1.0:
            raise ValidationError(f"test_speed_fraction must lie in (0, 1], got {self.test_speed_fraction}")
        # zero is accepted so the arithmetic degenerates cleanly to zero torque
        if self.min_deceleration < 0.0:
            raise ValidationError(f"min_deceleration must be >= 0, got {self.min_deceleration}")
        if self.per_wheel_torque < 0.0:
            raise ValidationError("per_wheel_torque must be >= 0")
        low, high = self.speed_range_rpm
        if not low < high:
            raise ValidationError(f"speed range must satisfy low < high, got {self.speed_range_rpm}")


def test_speed(vehicle: VehicleSpec, req: RequirementSpec) -> Kmh:
    """High-speed test speed in km/h."""
    return Kmh(req.test_speed_fraction * vehicle.max_speed)


test_speed.__test__ = False  # not a pytest test despite the name


def required_total_torque(vehicle: VehicleSpec, req: RequirementSpec) -> NewtonMeters:
    return NewtonMeters(vehicle.mass * req.min_deceleration * vehicle.wheel_effective_radius)


def per_wheel_torque(total: float, vehicle: VehicleSpec) -> NewtonMeters:
    if total < 0.0:
        raise ValidationError(f"total torque must be >= 0, got {total}")
    return NewtonMeters(total / vehicle.braked_wheels)


def handover_time(req: RequirementSpec, test_speed_kmh: float) -> Seconds:
    """Seconds to decelerate from the test speed down to the friction-brake handover speed."""
    if test_speed_kmh <= req.handover_speed:
        raise InvalidSpeeds(
            f"test speed {test_speed_kmh} km/h must exceed the handover speed {req.handover_speed} km/h"
        )
    if req.min_deceleration == 0.0:
        return Seconds(float("inf"))
    return Seconds(kmh_to_m_s(test_speed_kmh - req.handover_speed) / req.min_deceleration)


@dataclass(frozen=True)
class RequirementReport:
    test_speed: Kmh
    total_torque: NewtonMeters
    per_wheel_torque: NewtonMeters
    total_torque_rounded: float
    per_wheel_torque_rounded: float
    handover_time: Seconds | None

    def lines(self) -> list[str]:
        handover = "n/a (test speed not above handover)" if self.handover_time is None else f"{self.handover_time:.4g} s"
        return [
            f"test_speed = {self.test_speed:.6g} km/h",
            f"total_torque = {self.total_torque:.6g} N*m (rounded {self.total_torque_rounded:g})",
            f"per_wheel_torque = {self.per_wheel_torque:.6g} N*m (rounded {self.per_wheel_torque_rounded:g})",
            f"handover_time = {handover}",
        ]


def requirement_report(vehicle: VehicleSpec, req: RequirementSpec) -> RequirementReport:
    """Exact requirement figures plus the rounded presentation.

    The rounded figures round the total to whole N*m before splitting it
    across wheels (971.6 -> 972 -> 243); the exact ones never round.
    """
    v = test_speed(vehicle, req)
    total = required_total_torque(vehicle, req)
    rounded_total = float(round(total))
    try:
        t_handover = handover_time(req, v)
    except InvalidSpeeds:
        t_handover = None
    return RequirementReport(
        test_speed=v,
        total_torque=total,
        per_wheel_torque=per_wheel_torque(total, vehicle),
        total_torque_rounded=rounded_total,
        per_wheel_torque_rounded=round(rounded_total / vehicle.braked_wheels, 6),
        handover_time=t_handover,
    )
