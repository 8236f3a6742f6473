"""Design-space sweep, ranking and scale-factor calibration."""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from decimal import Decimal
from typing import Iterable, Mapping, Sequence

from .errors import EcbError, EmptyFeasibleSet, ValidationError, ZeroReference
from .model import OperatingPoint, SpeedConvention, TorqueModel, torque
from .regulations import RequirementSpec


@dataclass(frozen=True)
class PublishedSolution:
    name: str
    b: float
    w_m: float
    torque_by_speed: Mapping[float, float]


# Published reference designs: magnet thickness b, radial extrusion w_m (m)
# and torque (N*m) per slip speed (rpm).
PUBLISHED_SOLUTIONS = (
    PublishedSolution(
        "solution-1", 0.03, 0.11,
        {1000.0: 250.179, 2000.0: 252.359, 4000.0: 253.229, 6000.0: 253.229, 8000.0: 253.802},
    ),
    PublishedSolution(
        "solution-2", 0.04, 0.11,
        {1000.0: 307.630, 2000.0: 315.286, 4000.0: 315.28, 6000.0: 316.177, 8000.0: 316.710},
    ),
)


def _points(lo: float, hi: float, step: float) -> tuple[float, ...]:
    # decimal arithmetic so that e.g. 0.002 + 28 * 0.001 lands on 0.03 exactly
    dlo, dhi, dstep = (Decimal(repr(float(v))) for v in (lo, hi, step))
    count = int((dhi - dlo) / dstep) + 1
    return tuple(float(dlo + i * dstep) for i in range(count))


@dataclass(frozen=True)
class SweepGrid:
    b_range: tuple[float, float, float] = (0.002, 0.040, 0.001)
    wm_range: tuple[float, float, float] = (0.002, 0.110, 0.002)
    speeds_rpm: tuple[float, ...] = (1000.0, 2000.0, 4000.0, 6000.0, 8000.0)

    def __post_init__(self):
        for name in ("b_range", "wm_range"):
            lo, hi, step = getattr(self, name)
            if not (lo <= hi and step > 0):
                raise ValidationError(f"{name} must satisfy min <= max and step > 0, got {(lo, hi, step)}")
            object.__setattr__(self, name, (float(lo), float(hi), float(step)))
        if not self.speeds_rpm:
            raise ValidationError("speeds_rpm must not be empty")
        object.__setattr__(self, "speeds_rpm", tuple(float(s) for s in self.speeds_rpm))

    @classmethod
    def single(cls, b: float, w_m: float, speeds_rpm=(1000.0, 2000.0, 4000.0, 6000.0, 8000.0)) -> SweepGrid:
        return cls((b, b, 1.0), (w_m, w_m, 1.0), tuple(speeds_rpm))

    @property
    def b_points(self) -> tuple[float, ...]:
        return _points(*self.b_range)

    @property
    def wm_points(self) -> tuple[float, ...]:
        return _points(*self.wm_range)

    @property
    def size(self) -> int:
        return len(self.b_points) * len(self.wm_points) * len(self.speeds_rpm)


@dataclass(frozen=True)
class SweepEntry:
    b: float
    w_m: float
    speed_rpm: float
    torque: float | None
    status: str = "ok"


@dataclass(frozen=True)
class SweepResult:
    entries: tuple[SweepEntry, ...]
    model_fingerprint: str
    speeds_rpm: tuple[float, ...]


@dataclass(frozen=True)
class DesignSolution:
    b: float
    w_m: float
    torque_by_speed: Mapping[float, float]
    avg_torque: float
    min_torque: float
    objective: float
    feasible: bool


@dataclass(frozen=True)
class CalibrationReference:
    b: float = 0.03
    w_m: float = 0.11
    speed_rpm: float = 8000.0
    torque: float = 253.802


@dataclass(frozen=True)
class Residual:
    speed_rpm: float
    solution: str
    predicted: float
    published: float
    relative_error: float


@dataclass(frozen=True)
class CalibrationResult:
    lambda_star: float
    reference: CalibrationReference
    residuals: tuple[Residual, ...]
    convention_used: SpeedConvention
    lambda_by_convention: Mapping[SpeedConvention, float] = field(default_factory=dict)
    residuals_by_convention: Mapping[SpeedConvention, tuple[Residual, ...]] = field(default_factory=dict)
    model_fingerprint: str = ""

    @property
    def max_residual(self) -> float:
        return max((abs(r.relative_error) for r in self.residuals), default=0.0)

    def passes(self, tolerance: float = 0.05) -> bool:
        return self.max_residual <= tolerance

    def to_dict(self) -> dict:
        return {
            "lambda_star": self.lambda_star,
            "convention_used": self.convention_used.value,
            "reference": asdict(self.reference),
            "lambda_by_convention": {c.value: v for c, v in self.lambda_by_convention.items()},
            "residuals_by_convention": {
                c.value: [asdict(r) for r in rs] for c, rs in self.residuals_by_convention.items()
            },
            "model_fingerprint": self.model_fingerprint,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> CalibrationResult:
        conv = SpeedConvention(data["convention_used"])
        by_conv = {
            SpeedConvention(c): tuple(Residual(**r) for r in rs)
            for c, rs in data["residuals_by_convention"].items()
        }
        return cls(
            lambda_star=float(data["lambda_star"]),
            reference=CalibrationReference(**data["reference"]),
            residuals=by_conv[conv],
            convention_used=conv,
            lambda_by_convention={SpeedConvention(c): float(v) for c, v in data["lambda_by_convention"].items()},
            residuals_by_convention=by_conv,
            model_fingerprint=data.get("model_fingerprint", ""),
        )


def model_fingerprint(model: TorqueModel, **extra) -> str:
    """SHA-256 over every model input (the calibration record excluded)."""
    payload = {
        "geometry": asdict(model.geometry),
        "magnets": asdict(model.magnets),
        "materials": asdict(model.materials),
        "truncation": asdict(model.truncation),
        "lambda_scale": model.lambda_scale,
    }
    payload.update(extra)
    text = json.dumps(payload, sort_keys=True, default=repr)
    return hashlib.sha256(text.encode()).hexdigest()


def _sweep_row(template: TorqueModel, b: float, wm_points, speeds, convention) -> list[SweepEntry]:
    row = []
    for w_m in wm_points:
        try:
            cell = template.with_cell(b, w_m)
        except EcbError as exc:
            row.extend(SweepEntry(b, w_m, s, None, exc.code) for s in speeds)
            continue
        for s in speeds:
            try:
                row.append(SweepEntry(b, w_m, s, torque(cell, OperatingPoint(s, convention))))
            except EcbError as exc:
                row.append(SweepEntry(b, w_m, s, None, exc.code))
    return row


def _sweep_row_star(args):
    return _sweep_row(*args)


def run_sweep(
    template: TorqueModel,
    grid: SweepGrid = SweepGrid(),
    convention: SpeedConvention = SpeedConvention.RADIANS_PER_SECOND,
    workers: int = 1,
) -> SweepResult:
    """Evaluate the torque on every (b, w_m, speed) cell, b-major.

    Failed cells are recorded with their error code instead of a torque.
    Rows are farmed out per b value when ``workers > 1``; each cell is
    computed by the same code path, so the result is identical to a
    sequential run.
    """
    convention = SpeedConvention(convention)
    wm_points, speeds = grid.wm_points, grid.speeds_rpm
    jobs = [(template, b, wm_points, speeds, convention) for b in grid.b_points]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row_star, jobs))
    else:
        rows = [_sweep_row_star(job) for job in jobs]
    entries = tuple(e for row in rows for e in row)
    fingerprint = model_fingerprint(
        template,
        convention=convention.value,
        grid={"b": grid.b_range, "w_m": grid.wm_range, "speeds": grid.speeds_rpm},
    )
    return SweepResult(entries, fingerprint, speeds)


def _cells(result: SweepResult):
    cells: dict[tuple[float, float], dict[float, float | None]] = {}
    for e in result.entries:
        cells.setdefault((e.b, e.w_m), {})[e.speed_rpm] = e.torque
    return cells


def summarize_cell(b: float, w_m: float, torque_by_speed: Mapping[float, float], target: float) -> DesignSolution:
    values = list(torque_by_speed.values())
    avg = math.fsum(values) / len(values)
    low = min(values)
    return DesignSolution(b, w_m, dict(torque_by_speed), avg, low, abs(avg - target), low >= target)


def rank_solutions(result: SweepResult, target: float, feasible_only: bool = False) -> list[DesignSolution]:
    """Cells ordered by ``|avg_torque - target|``; ties go to smaller b, then smaller w_m."""
    if not result.entries:
        raise ValidationError("sweep result is empty")
    solutions = [
        summarize_cell(b, w_m, by_speed, target)
        for (b, w_m), by_speed in _cells(result).items()
        if all(t is not None for t in by_speed.values())
    ]
    if feasible_only:
        solutions = [s for s in solutions if s.feasible]
        if not solutions:
            raise EmptyFeasibleSet(
                f"no cell keeps torque >= {target:g} N*m at every speed; widen the grid or lower the target"
            )
    solutions.sort(key=lambda s: (s.objective, s.b, s.w_m))
    return solutions


def _residuals(template, lam, convention, reference, published) -> tuple[Residual, ...]:
    out = []
    for sol in published:
        cell = template.with_cell(sol.b, sol.w_m)
        for speed, value in sol.torque_by_speed.items():
            if (sol.b, sol.w_m, speed) == (reference.b, reference.w_m, reference.speed_rpm):
                continue
            predicted = lam * torque(cell, OperatingPoint(speed, convention))
            out.append(Residual(speed, sol.name, predicted, value, (predicted - value) / value))
    return tuple(out)


def calibrate_lambda(
    model_template: TorqueModel,
    reference: CalibrationReference = CalibrationReference(),
    published: Sequence[PublishedSolution] = PUBLISHED_SOLUTIONS,
    conventions: Iterable[SpeedConvention] = tuple(SpeedConvention),
) -> CalibrationResult:
    """Fit the multiplicative scale so the model hits ``reference.torque``.

    The torque is linear in the scale, so the fit is the ratio of the
    reference torque to the unscaled model torque. Every other published
    entry becomes a residual; the speed convention with the smaller worst
    residual wins.
    """
    unscaled = model_template.with_lambda(1.0)
    cell = unscaled.with_cell(reference.b, reference.w_m)
    lambdas, residuals = {}, {}
    for conv in conventions:
        conv = SpeedConvention(conv)
        base = torque(cell, OperatingPoint(reference.speed_rpm, conv))
        if base == 0.0:
            raise ZeroReference(
                f"unscaled torque is zero at the reference point ({reference.speed_rpm} rpm, {conv.value})"
            )
        lambdas[conv] = reference.torque / base
        residuals[conv] = _residuals(unscaled, lambdas[conv], conv, reference, published)

    def worst(conv):
        return max((abs(r.relative_error) for r in residuals[conv]), default=0.0)

    best = min(lambdas, key=lambda c: (worst(c), list(SpeedConvention).index(c)))
    if not lambdas[best] > 0.0:
        raise ZeroReference(f"fitted scale {lambdas[best]} is not positive")
    return CalibrationResult(
        lambda_star=lambdas[best],
        reference=reference,
        residuals=residuals[best],
        convention_used=best,
        lambda_by_convention=lambdas,
        residuals_by_convention=residuals,
        model_fingerprint=model_fingerprint(unscaled),
    )


@dataclass(frozen=True)
class RequirementCheck:
    passed: bool
    target: float
    margins: Mapping[float, float]

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"


def check_requirement(solution: DesignSolution, req: RequirementSpec) -> RequirementCheck:
    missing = [s for s in req.speed_range_rpm if s not in solution.torque_by_speed]
    if missing:
        raise ValidationError(f"solution lacks torque at required speeds {missing}")
    target = req.per_wheel_torque
    margins = {s: t - target for s, t in solution.torque_by_speed.items()}
    return RequirementCheck(min(solution.torque_by_speed.values()) >= target, target, margins)
