"""Design tools for axial-flux permanent-magnet eddy-current brakes."""
from .errors import EcbError
from .model import (
    BrakeGeometry,
    HarmonicTerm,
    MagnetSpec,
    MaterialSpec,
    OperatingPoint,
    SpeedConvention,
    TorqueModel,
    Truncation,
    diffusion_eigenvalue,
    dissipated_power,
    harmonic_terms,
    magnetization_coefficient,
    mean_radius,
    pole_pitch,
    reflection_coefficient,
    spatial_eigenvalue,
    torque,
    torque_speed_curve,
)

__all__ = [
    "EcbError",
    "BrakeGeometry",
    "HarmonicTerm",
    "MagnetSpec",
    "MaterialSpec",
    "OperatingPoint",
    "SpeedConvention",
    "TorqueModel",
    "Truncation",
    "diffusion_eigenvalue",
    "dissipated_power",
    "harmonic_terms",
    "magnetization_coefficient",
    "mean_radius",
    "pole_pitch",
    "reflection_coefficient",
    "spatial_eigenvalue",
    "torque",
    "torque_speed_curve",
]

__version__ = "0.1.0"
