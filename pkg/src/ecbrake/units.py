"""Unit-tagged scalars.

The tags are plain ``float`` subclasses: arithmetic on them yields ordinary
floats, but a tagged value keeps its unit in ``repr`` and can be rejected by
consumers expecting a different unit (e.g. a km/h figure passed as a slip
speed).
"""
import math


class _Tagged(float):
    unit = ""

    def __repr__(self):
        return f"{float(self)!r} {self.unit}"


class Kmh(_Tagged):
    unit = "km/h"


class Rpm(_Tagged):
    unit = "rpm"


class RadPerSecond(_Tagged):
    unit = "rad/s"


class NewtonMeters(_Tagged):
    unit = "N*m"


class Seconds(_Tagged):
    unit = "s"


class Watts(_Tagged):
    unit = "W"


def rpm_to_rad_s(rpm: float) -> RadPerSecond:
    return RadPerSecond(2.0 * math.pi * rpm / 60.0)


def rad_s_to_rpm(omega: float) -> Rpm:
    return Rpm(omega * 60.0 / (2.0 * math.pi))


def kmh_to_m_s(speed: float) -> float:
    return speed / 3.6
