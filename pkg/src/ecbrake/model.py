"""Mean-radius analytical torque model of an axial-flux permanent-magnet
eddy-current brake.

The brake is unrolled at the mean radius into a linear stack (back iron,
magnets, air gap, conducting plate, back iron) and the field is expanded in
a double harmonic series over radial order ``n`` and circumferential order
``k``. Each harmonic contributes through a complex reflection coefficient of
the gap/plate stack; the braking torque is the real part of the summed
contributions.

All lengths are SI meters. Slip speeds are carried in rpm and converted
once, at series entry, according to the :class:`SpeedConvention`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from .errors import DegenerateDenominator, EcbError, NonConverged, UnitError, ValidationError
from .units import Kmh, Watts, rpm_to_rad_s

MU0 = 4e-7 * math.pi

# Smallest scaled denominator magnitude accepted before the reflection ratio
# is declared nonphysical.
DENOMINATOR_FLOOR = 1e-300


class SpeedConvention(str, enum.Enum):
    """How the slip speed enters the diffusion eigenvalue.

    ``RADIANS_PER_SECOND`` inserts the angular speed in rad/s, which makes
    ``sigma * mu0 * omega * R_m * k*pi/tau`` a proper 1/m^2 quantity.
    ``RPM`` inserts the raw rpm figure.
    """

    RADIANS_PER_SECOND = "rad_s"
    RPM = "rpm"


def _check_finite(**values):
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValidationError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class BrakeGeometry:
    """Radii and axial layer thicknesses of the coupling stack (meters)."""

    r1: float = 0.112 - 0.110
    r2: float = 0.112
    r3: float = 0.140
    magnet_thickness: float = 0.030
    air_gap: float = 0.001
    plate_thickness: float = 0.002
    back_iron_thickness: float = 0.002

    def __post_init__(self):
        _check_finite(**{f: getattr(self, f) for f in self.__dataclass_fields__})
        if not 0.0 < self.r1 < self.r2 <= self.r3:
            raise ValidationError(
                f"radii must satisfy 0 < r1 < r2 <= r3, got r1={self.r1}, r2={self.r2}, r3={self.r3}"
            )
        for name in ("magnet_thickness", "air_gap", "plate_thickness", "back_iron_thickness"):
            if getattr(self, name) <= 0.0:
                raise ValidationError(f"{name} must be positive, got {getattr(self, name)}")

    @classmethod
    def from_extrusion(cls, w_m: float, **kwargs) -> BrakeGeometry:
        """Build a geometry from the radial magnet width ``w_m = r2 - r1``."""
        r2 = kwargs.pop("r2", cls.r2)
        if not 0.0 < w_m < r2:
            raise ValidationError(f"radial extrusion w_m must satisfy 0 < w_m < r2={r2}, got {w_m}")
        return cls(r1=r2 - w_m, r2=r2, **kwargs)

    @property
    def w_m(self) -> float:
        return self.r2 - self.r1

    @property
    def b(self) -> float:
        return self.magnet_thickness


@dataclass(frozen=True)
class MagnetSpec:
    pole_pairs: int = 4
    pole_arc_ratio: float = 0.444
    remanence: float = 1.25

    def __post_init__(self):
        if isinstance(self.pole_pairs, bool) or int(self.pole_pairs) != self.pole_pairs or self.pole_pairs < 1:
            raise ValidationError(f"pole_pairs must be an integer >= 1, got {self.pole_pairs!r}")
        _check_finite(pole_arc_ratio=self.pole_arc_ratio, remanence=self.remanence)
        if not 0.0 < self.pole_arc_ratio < 1.0:
            raise ValidationError(f"pole_arc_ratio must lie in (0, 1), got {self.pole_arc_ratio}")
        if self.remanence < 0.0:
            raise ValidationError(f"remanence must be >= 0, got {self.remanence}")


@dataclass(frozen=True)
class MaterialSpec:
    """Free-space permeability and plate conductivity.

    The default conductivity is the literal 57e7 S/m design value. Copper is
    about 5.7e7 S/m, so that figure is probably off by a factor of ten; it is
    kept as the default and stays configurable.
    """

    mu0: float = MU0
    sigma: float = 57e7

    def __post_init__(self):
        _check_finite(mu0=self.mu0, sigma=self.sigma)
        if self.mu0 <= 0.0:
            raise ValidationError(f"mu0 must be positive, got {self.mu0}")
        if self.sigma < 0.0:
            raise ValidationError(f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class OperatingPoint:
    """Signed slip speed in rpm plus the convention used inside the series."""

    slip_speed: float
    speed_convention: SpeedConvention = SpeedConvention.RADIANS_PER_SECOND

    def __post_init__(self):
        if isinstance(self.slip_speed, Kmh):
            raise UnitError("slip speed given in km/h; convert to a shaft speed in rpm first")
        _check_finite(slip_speed=self.slip_speed)
        object.__setattr__(self, "speed_convention", SpeedConvention(self.speed_convention))

    @classmethod
    def from_rad_s(cls, omega: float, convention=SpeedConvention.RADIANS_PER_SECOND) -> OperatingPoint:
        return cls(omega * 60.0 / (2.0 * math.pi), convention)

    @property
    def omega(self) -> float:
        """Mechanical slip speed in rad/s."""
        return rpm_to_rad_s(self.slip_speed)

    @property
    def series_speed(self) -> float:
        """The number substituted for the speed inside the diffusion eigenvalue."""
        if self.speed_convention is SpeedConvention.RPM:
            return float(self.slip_speed)
        return float(self.omega)


@dataclass(frozen=True)
class Truncation:
    """Harmonic truncation limits.

    ``band_rtol`` bounds the outermost shell of terms (``n == n_max`` or
    ``k == k_max``) relative to the total torque; a larger shell means the
    series has not settled at this truncation.
    """

    n_max: int = 30
    k_max: int = 30
    band_rtol: float = 0.05

    def __post_init__(self):
        for name in ("n_max", "k_max"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ValidationError(f"{name} must be an integer >= 1, got {value!r}")
        if not self.band_rtol > 0.0:
            raise ValidationError(f"band_rtol must be positive, got {self.band_rtol}")


@dataclass(frozen=True)
class TorqueModel:
    geometry: BrakeGeometry = field(default_factory=BrakeGeometry)
    magnets: MagnetSpec = field(default_factory=MagnetSpec)
    materials: MaterialSpec = field(default_factory=MaterialSpec)
    truncation: Truncation = field(default_factory=Truncation)
    lambda_scale: float = 1.0
    # CalibrationResult from ecbrake.search, when lambda_scale came from a fit.
    calibration: Any = field(default=None, compare=False)

    def __post_init__(self):
        _check_finite(lambda_scale=self.lambda_scale)
        if self.lambda_scale <= 0.0:
            raise ValidationError(f"lambda_scale must be positive, got {self.lambda_scale}")

    def with_geometry(self, **changes) -> TorqueModel:
        return replace(self, geometry=replace(self.geometry, **changes))

    def with_cell(self, b: float, w_m: float) -> TorqueModel:
        """Copy with magnet thickness ``b`` and radial extrusion ``w_m`` (r1 = r2 - w_m)."""
        r2 = self.geometry.r2
        if not 0.0 < w_m < r2:
            raise ValidationError(f"radial extrusion w_m must satisfy 0 < w_m < r2={r2}, got {w_m}")
        return self.with_geometry(r1=r2 - w_m, magnet_thickness=b)

    def with_lambda(self, lambda_scale: float) -> TorqueModel:
        return replace(self, lambda_scale=lambda_scale, calibration=None)

    def calibrated(self, result, convention: SpeedConvention | None = None) -> TorqueModel:
        """Attach a calibration record and adopt its scale factor.

        With ``convention`` given, the factor fitted under that convention is
        used instead of the preferred one.
        """
        lam = result.lambda_star if convention is None else result.lambda_by_convention[SpeedConvention(convention)]
        return replace(self, lambda_scale=lam, calibration=result)

    @property
    def calibration_label(self) -> str:
        if self.calibration is not None:
            return "calibrated"
        if self.lambda_scale == 1.0:
            return "uncalibrated"
        return "user-scaled"


@dataclass(frozen=True)
class HarmonicTerm:
    n: int
    k: int
    m_nk: float
    a_nk: float
    gamma_nk: complex
    r_nk: complex
    contribution: complex


def mean_radius(geometry: BrakeGeometry) -> float:
    return (geometry.r1 + geometry.r2) / 2.0


def pole_pitch(geometry: BrakeGeometry, magnets: MagnetSpec) -> float:
    """Circumferential pole pitch at the mean radius, ``pi * R_m / p``."""
    return math.pi * mean_radius(geometry) / magnets.pole_pairs


def _check_orders(n, k):
    if int(n) != n or int(k) != k or n < 1 or k < 1:
        raise ValidationError(f"harmonic orders must be integers >= 1, got n={n}, k={k}")


def _magnetization(n, k, model: TorqueModel):
    g, m = model.geometry, model.magnets
    return (
        (16.0 * m.remanence) / (math.pi**2 * model.materials.mu0 * n * k)
        * np.sin(k * m.pole_arc_ratio * math.pi / 2.0)
        * np.sin(n * (math.pi / 2.0) * (g.r2 - g.r1) / g.r3)
    )


def _spatial(n, k, model: TorqueModel):
    tau = pole_pitch(model.geometry, model.magnets)
    return np.sqrt((n * math.pi / model.geometry.r3) ** 2 + (k * math.pi / tau) ** 2)


def _diffusion_sq(n, k, model: TorqueModel, op: OperatingPoint):
    g = model.geometry
    tau = pole_pitch(g, model.magnets)
    mat = model.materials
    drive = mat.sigma * mat.mu0 * op.series_speed * mean_radius(g) * k * math.pi / tau
    return _spatial(n, k, model) ** 2 + 1j * drive


def magnetization_coefficient(n: int, k: int, model: TorqueModel) -> float:
    """Magnetization coefficient ``M_nk`` of harmonic (n, k)."""
    _check_orders(n, k)
    return float(_magnetization(n, k, model))


def spatial_eigenvalue(n: int, k: int, model: TorqueModel) -> float:
    _check_orders(n, k)
    return float(_spatial(n, k, model))


def diffusion_eigenvalue(n: int, k: int, model: TorqueModel, op: OperatingPoint) -> complex:
    """Principal square root of ``a_nk**2 + j*sigma*mu0*speed*R_m*k*pi/tau``."""
    _check_orders(n, k)
    return complex(np.sqrt(complex(_diffusion_sq(n, k, model, op))))


def _scaled_parts(a, gamma, b, c, d):
    """Numerator and denominator of the reflection ratio with the growing
    exponentials factored out.

    The true numerator is ``exp(a*c + gamma*d)/4 * num`` and the true
    denominator ``exp(a*(b+c) + gamma*d)/4 * den``; both scaled parts are
    O(1) for any layer thickness, so the ratio never overflows.
    """
    ratio = a / gamma
    em_g = -np.expm1(-2.0 * gamma * d)  # 1 - exp(-2 gamma d)
    ep_g = 2.0 - em_g
    em_c = -np.expm1(-2.0 * a * c)
    em_bc = -np.expm1(-2.0 * a * (b + c))
    num = (2.0 - em_c) * em_g + ratio * em_c * ep_g
    den = (2.0 - em_bc) * em_g + ratio * em_bc * ep_g
    return num, den


def _check_denominator(den, model, op):
    small = np.abs(den) < DENOMINATOR_FLOOR
    if np.any(small):
        raise DegenerateDenominator(
            "scaled reflection denominator vanished; layer data is nonphysical",
            slip_speed=op.slip_speed,
        )


def reflection_coefficient(n: int, k: int, model: TorqueModel, op: OperatingPoint) -> complex:
    """Complex reflection coefficient ``r_nk`` of the gap/plate stack.

    Evaluated in rescaled form: ``r = -exp(-a*b) * num/den`` with ``num`` and
    ``den`` from :func:`_scaled_parts`.
    """
    _check_orders(n, k)
    g = model.geometry
    a = float(_spatial(n, k, model))
    gamma = complex(np.sqrt(complex(_diffusion_sq(n, k, model, op))))
    num, den = _scaled_parts(a, gamma, g.magnet_thickness, g.air_gap, g.plate_thickness)
    _check_denominator(den, model, op)
    return complex(-math.exp(-a * g.magnet_thickness) * num / den)


def _series(model: TorqueModel, op: OperatingPoint):
    """Per-harmonic arrays over the full (n_max, k_max) truncation."""
    g = model.geometry
    n = np.arange(1, model.truncation.n_max + 1, dtype=float)[:, None]
    k = np.arange(1, model.truncation.k_max + 1, dtype=float)[None, :]
    m_nk = _magnetization(n, k, model)
    a = _spatial(n, k, model)
    gamma = np.sqrt(_diffusion_sq(n, k, model, op) + 0j)
    num, den = _scaled_parts(a, gamma, g.magnet_thickness, g.air_gap, g.plate_thickness)
    _check_denominator(den, model, op)
    ratio = num / den
    # r * sinh(a b) = -(num/den) * exp(-a b) * sinh(a b) = -(num/den) * (1 - exp(-2 a b)) / 2
    r_sinh = -ratio * (-np.expm1(-2.0 * a * g.magnet_thickness)) / 2.0
    contributions = 1j * k * (m_nk**2 / a) * r_sinh
    return n, k, m_nk, a, gamma, ratio, contributions


def _prefactor(model: TorqueModel) -> float:
    g = model.geometry
    p = model.magnets.pole_pairs
    return 0.5 * model.materials.mu0 * p**2 * pole_pitch(g, model.magnets) * g.r3


def harmonic_terms(model: TorqueModel, op: OperatingPoint) -> list[HarmonicTerm]:
    """All (n, k) terms of the series with their intermediate quantities."""
    n, k, m_nk, a, gamma, ratio, contributions = _series(model, op)
    r = -np.exp(-a * model.geometry.magnet_thickness) * ratio
    shape = contributions.shape
    terms = []
    for i in range(shape[0]):
        for j in range(shape[1]):
            terms.append(
                HarmonicTerm(
                    n=i + 1,
                    k=j + 1,
                    m_nk=float(m_nk[i, j]),
                    a_nk=float(a[i, j]),
                    gamma_nk=complex(gamma[i, j]),
                    r_nk=complex(r[i, j]),
                    contribution=complex(contributions[i, j]),
                )
            )
    return terms


def torque_terms_magnitude(model: TorqueModel, op: OperatingPoint) -> float:
    """Sum of ``|contribution|`` over all terms, scaled like the torque."""
    contributions = _series(model, op)[-1]
    return model.lambda_scale * _prefactor(model) * float(np.abs(contributions).sum())


def torque(model: TorqueModel, op: OperatingPoint) -> float:
    """Braking torque in N*m; positive when it opposes positive slip.

    Raises :class:`NonConverged` when the outermost shell of harmonics
    carries more than ``truncation.band_rtol`` of the total.
    """
    contributions = _series(model, op)[-1]
    real = contributions.real
    total = float(real.sum())
    shell = float(np.abs(real[-1, :]).sum() + np.abs(real[:-1, -1]).sum())
    if shell > model.truncation.band_rtol * abs(total):
        raise NonConverged(
            f"outer harmonic shell is {shell / abs(total) if total else math.inf:.3g} of the total "
            f"at n_max={model.truncation.n_max}, k_max={model.truncation.k_max}",
            slip_speed=op.slip_speed,
        )
    return model.lambda_scale * (_prefactor(model) * total)


def torque_speed_curve(model: TorqueModel, speeds: Sequence[OperatingPoint]) -> list[tuple[OperatingPoint, float]]:
    if not speeds:
        raise ValidationError("speed list is empty")
    curve = []
    for op in speeds:
        try:
            curve.append((op, torque(model, op)))
        except EcbError as exc:
            raise type(exc)(f"at slip speed {op.slip_speed} rpm: {exc.args[0]}", slip_speed=op.slip_speed) from exc
    return curve


def dissipated_power(torque_nm: float, op: OperatingPoint) -> Watts:
    """Steady-state power absorbed by the brake, ``T * omega``."""
    return Watts(torque_nm * op.omega)
