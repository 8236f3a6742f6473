"""Finite-difference check of the closed-form reflection coefficient.

For one harmonic (n, k) the field across the layer stack reduces to a
two-point boundary-value problem in the axial coordinate ``z``.  With
``psi`` proportional to the tangential field and ``kappa**2`` the local
eigenvalue (``a_nk**2`` in non-conducting layers, plus the motional
diffusion term in the plate)::

    d/dz( mu_r / kappa**2 * dpsi/dz ) = mu_r * psi

Tangential H (``psi``) and normal B (``mu_r/kappa**2 * psi'``) are
continuous across interfaces. Infinitely permeable iron closes the stack
with ``psi = 0``. The magnet excitation is imposed at the magnet backing,
and the reflection coefficient is read off as
``-psi(magnet/gap face) / psi(magnet backing)``.

The discretisation is a vertex-centred, flux-conservative second-order
scheme on a uniform mesh inside each layer, solved by banded elimination.
Two levels of Richardson extrapolation (meshes m, 2m, 4m) lift the
reported value to sixth order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .errors import NoConvergence, SingularSystem, ValidationError
from .model import (
    OperatingPoint,
    SpeedConvention,
    TorqueModel,
    _magnetization,
    _spatial,
    mean_radius,
    pole_pitch,
    reflection_coefficient,
)

MIN_MESH = 8


@dataclass(frozen=True)
class Layer:
    thickness: float
    relative_permeability: float = 1.0
    conductivity: float = 0.0
    is_source: bool = False
    name: str = ""

    @property
    def is_closure(self) -> bool:
        return math.isinf(self.relative_permeability)


@dataclass(frozen=True)
class LayerStack:
    """Bottom-to-top layer list: back iron, magnets, gap, plate, back iron."""

    layers: tuple[Layer, ...]
    mesh_points_per_layer: int = 128

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        sources = [i for i, layer in enumerate(self.layers) if layer.is_source]
        if len(sources) != 1:
            raise ValidationError(f"exactly one source layer required, found {len(sources)}")
        for layer in self.layers:
            if not layer.thickness > 0.0:
                raise ValidationError(f"layer {layer.name or '?'} thickness must be positive")
            if not layer.relative_permeability > 0.0:
                raise ValidationError(f"layer {layer.name or '?'} permeability must be positive")
        if int(self.mesh_points_per_layer) != self.mesh_points_per_layer or self.mesh_points_per_layer < MIN_MESH:
            raise ValidationError(f"mesh_points_per_layer must be an integer >= {MIN_MESH}")
        above = self.layers[sources[0] + 1 :]
        if not above or self.layers[sources[0]].is_closure or any(l.is_closure for l in above[:-1]):
            raise ValidationError("only the outermost layers may be infinitely permeable closures")

    @classmethod
    def from_model(cls, model: TorqueModel, mesh: int = 128, iron_permeability: float = math.inf) -> LayerStack:
        g = model.geometry
        iron = dict(relative_permeability=iron_permeability)
        return cls(
            (
                Layer(g.back_iron_thickness, name="magnet back iron", **iron),
                Layer(g.magnet_thickness, is_source=True, name="magnets"),
                Layer(g.air_gap, name="air gap"),
                Layer(g.plate_thickness, conductivity=model.materials.sigma, name="plate"),
                Layer(g.back_iron_thickness, name="plate back iron", **iron),
            ),
            mesh,
        )

    @property
    def source_index(self) -> int:
        return next(i for i, layer in enumerate(self.layers) if layer.is_source)

    def with_mesh(self, mesh: int) -> LayerStack:
        return LayerStack(self.layers, mesh)


@dataclass(frozen=True)
class OracleResult:
    r_numeric: complex
    grid_size: int
    residual_norm: float
    error_estimate: float = 0.0


@dataclass(frozen=True)
class RefinementStudy:
    meshes: tuple[int, ...]
    errors: tuple[float, ...]
    orders: tuple[float, ...]

    @property
    def order(self) -> float:
        return float(np.mean(self.orders))

    def rows(self) -> list[tuple[int, float]]:
        return list(zip(self.meshes, self.errors))


@dataclass(frozen=True)
class OracleRecord:
    n: int
    k: int
    speed_rpm: float
    closed_form: complex
    numeric: complex
    rel_error: float
    mesh: int
    residual: float
    error_estimate: float

    def format(self) -> str:
        return (
            f"n={self.n} k={self.k} speed_rpm={self.speed_rpm:g} "
            f"closed_form={self.closed_form:.12e} numeric={self.numeric:.12e} "
            f"rel_error={self.rel_error:.3e} mesh={self.mesh} residual={self.residual:.3e} "
            f"richardson_estimate={self.error_estimate:.3e}"
        )


def _kappa_sq(layer: Layer, a_sq: float, model: TorqueModel, op: OperatingPoint, k: int) -> complex:
    drive = (
        layer.conductivity * model.materials.mu0 * layer.relative_permeability
        * op.series_speed * mean_radius(model.geometry) * k * math.pi / pole_pitch(model.geometry, model.magnets)
    )
    return complex(a_sq, drive)


def _solve_raw(stack: LayerStack, n: int, k: int, model: TorqueModel, op: OperatingPoint):
    """One second-order solve. Returns (r, unknown count, relative residual)."""
    mesh = int(stack.mesh_points_per_layer)
    a_sq = float(_spatial(n, k, model)) ** 2
    src = stack.source_index
    domain = [l for l in stack.layers[src:] if not l.is_closure]

    h = np.concatenate([np.full(mesh, l.thickness / mesh) for l in domain])
    beta = np.concatenate(
        [np.full(mesh, l.relative_permeability / _kappa_sq(l, a_sq, model, op, k)) for l in domain]
    )
    mass = np.concatenate([np.full(mesh, l.relative_permeability, dtype=complex) for l in domain])

    m_nk = float(_magnetization(n, k, model))
    # The ratio below does not depend on the excitation amplitude.
    psi0 = m_nk if m_nk != 0.0 else 1.0

    # unknown j sits at node j+1; node 0 carries the excitation, the last node psi = 0
    c_left = beta[:-1] / h[:-1]
    c_right = beta[1:] / h[1:]
    diag = -(c_left + c_right) - 0.5 * (mass[:-1] * h[:-1] + mass[1:] * h[1:])
    size = diag.size
    bands = np.zeros((3, size), dtype=complex)
    bands[0, 1:] = c_right[:-1]
    bands[1, :] = diag
    bands[2, :-1] = c_left[1:]
    rhs = np.zeros(size, dtype=complex)
    rhs[0] = -c_left[0] * psi0

    try:
        psi = solve_banded((1, 1), bands, rhs, check_finite=True)
    except (LinAlgError, ValueError) as exc:
        raise SingularSystem(f"layer system not solvable for n={n}, k={k}: {exc}") from exc
    if not np.all(np.isfinite(psi)):
        raise SingularSystem(f"layer system produced non-finite values for n={n}, k={k}")

    applied = diag * psi
    applied[:-1] += bands[0, 1:] * psi[1:]
    applied[1:] += bands[2, :-1] * psi[:-1]
    residual = float(np.linalg.norm(applied - rhs) / np.linalg.norm(rhs))

    face = psi[mesh - 1]  # node `mesh` is the magnet/gap interface
    return complex(-face / psi0), size, residual


def solve_harmonic_bvp(
    n: int,
    k: int,
    model: TorqueModel,
    op: OperatingPoint,
    mesh: int = 128,
    *,
    iron_permeability: float = math.inf,
    rtol: float | None = 1e-6,
) -> OracleResult:
    """Numerical reflection coefficient of harmonic (n, k).

    Solves on ``mesh``, ``2*mesh`` and ``4*mesh`` cells per layer and
    Richardson-extrapolates twice. ``rtol`` bounds the relative gap between
    the last two extrapolation levels; pass ``None`` to skip the check.
    """
    stack = LayerStack.from_model(model, mesh, iron_permeability)
    raw = [_solve_raw(stack.with_mesh(mesh * f), n, k, model, op) for f in (1, 2, 4)]
    r = [item[0] for item in raw]
    first = [(4.0 * r[i + 1] - r[i]) / 3.0 for i in range(2)]
    best = (16.0 * first[1] - first[0]) / 15.0
    scale = abs(best) if best != 0 else 1.0
    estimate = abs(best - first[1]) / scale
    if rtol is not None and estimate > rtol:
        raise NoConvergence(
            f"Richardson error estimate {estimate:.3e} exceeds {rtol:.1e} for n={n}, k={k} at mesh {mesh}"
        )
    return OracleResult(
        r_numeric=complex(best),
        grid_size=raw[-1][1],
        residual_norm=max(item[2] for item in raw),
        error_estimate=estimate,
    )


def refinement_study(
    n: int, k: int, model: TorqueModel, op: OperatingPoint, meshes: Sequence[int]
) -> RefinementStudy:
    """Raw second-order errors on each mesh against the extrapolated finest one."""
    meshes = tuple(int(m) for m in meshes)
    if len(meshes) < 3:
        raise ValidationError("refinement study needs at least three meshes")
    if any(b <= a for a, b in zip(meshes, meshes[1:])):
        raise ValidationError(f"meshes must be strictly increasing, got {meshes}")
    reference = solve_harmonic_bvp(n, k, model, op, meshes[-1], rtol=None).r_numeric
    stack = LayerStack.from_model(model, meshes[0])
    scale = abs(reference) if reference != 0 else 1.0
    errors = tuple(
        abs(_solve_raw(stack.with_mesh(m), n, k, model, op)[0] - reference) / scale for m in meshes
    )
    orders = tuple(
        math.log(e0 / e1) / math.log(m1 / m0) if e0 > 0 and e1 > 0 else math.nan
        for (m0, e0), (m1, e1) in zip(zip(meshes, errors), zip(meshes[1:], errors[1:]))
    )
    return RefinementStudy(meshes, errors, orders)


def oracle_report(
    model: TorqueModel,
    ns: Iterable[int] = (1, 3, 5),
    ks: Iterable[int] = (1, 3, 5),
    speeds_rpm: Iterable[float] = (0.0, 1000.0, 4000.0, 8000.0),
    mesh: int = 128,
    convention: SpeedConvention = SpeedConvention.RADIANS_PER_SECOND,
) -> list[OracleRecord]:
    records = []
    for speed in speeds_rpm:
        op = OperatingPoint(speed, convention)
        for n in ns:
            for k in ks:
                closed = reflection_coefficient(n, k, model, op)
                result = solve_harmonic_bvp(n, k, model, op, mesh, rtol=None)
                err = abs(result.r_numeric - closed) / abs(closed) if closed != 0 else abs(result.r_numeric)
                records.append(
                    OracleRecord(n, k, float(speed), closed, result.r_numeric, err, mesh,
                                 result.residual_norm, result.error_estimate)
                )
    return records
