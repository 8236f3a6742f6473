"""Run configuration: strict TOML schema with unit-suffixed values.

Every dimensional value is written with its unit (``b = "30 mm"``,
``sigma = "57e7 S/m"``) and converted to SI exactly once, here. Absent
keys take the design defaults; each effective value remembers where it
came from so ``--verbose`` can echo it.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any

import tomli

from .errors import ParseError, RangeError, UnitError, ValidationError
from .model import BrakeGeometry, MagnetSpec, MaterialSpec, SpeedConvention, TorqueModel, Truncation
from .regulations import RequirementSpec, VehicleSpec
from .search import CalibrationReference, SweepGrid

USER = "user"
REQUIREMENTS = "design-requirements default"
CONSTRAINTS = "auxiliary-constraints default"
MATERIALS = "material-properties default"
REGULATION = "regulation default"
PUBLISHED = "published-solution default"
ARTIFACT = "tool default"


@dataclass(frozen=True)
class Spec:
    key: str
    kind: str
    default: Any
    provenance: str
    lo: float | None = None
    hi: float | None = None
    lo_open: bool = False
    hi_open: bool = False
    note: str = ""


# kind -> (pint dimensionality, SI/display unit)
DIMENSIONS = {
    "length": ("[length]", "m"),
    "speed": ("1/[time]", "rpm"),
    "flux_density": ("[mass]/[time]**2/[current]", "T"),
    "conductivity": ("[current]**2*[time]**3/[mass]/[length]**3", "S/m"),
    "permeability": ("[mass]*[length]/[time]**2/[current]**2", "H/m"),
    "mass": ("[mass]", "kg"),
    "acceleration": ("[length]/[time]**2", "m/s^2"),
    "road_speed": ("[length]/[time]", "km/h"),
    "torque": ("[mass]*[length]**2/[time]**2", "N*m"),
}

SCHEMA: dict[str, list[Spec]] = {
    "geometry": [
        Spec("r3", "length", "140 mm", REQUIREMENTS, 0.0, lo_open=True),
        Spec("r2", "length", "112 mm", REQUIREMENTS, 0.0, lo_open=True),
        Spec("w_m", "length", "110 mm", REQUIREMENTS, 0.002, 0.110, note="radial extrusion range [2, 110] mm"),
        Spec("r1", "length", None, ARTIFACT, 0.0, lo_open=True),
        Spec("b", "length", "30 mm", REQUIREMENTS, 0.002, 0.040, note="magnet thickness range [2, 40] mm"),
        Spec("air_gap", "length", "1 mm", CONSTRAINTS, 0.0, lo_open=True),
        Spec("plate_thickness", "length", "2 mm", CONSTRAINTS, 0.0, lo_open=True),
        Spec("back_iron_thickness", "length", "2 mm", CONSTRAINTS, 0.0, lo_open=True),
    ],
    "magnets": [
        Spec("pole_pairs", "int", 4, CONSTRAINTS, 1),
        Spec("pole_arc_ratio", "float", 0.444, CONSTRAINTS, 0.0, 1.0, lo_open=True, hi_open=True, note="must lie in (0, 1)"),
        Spec("remanence", "flux_density", "1.25 T", MATERIALS, 0.0),
    ],
    "materials": [
        Spec("mu0", "permeability", f"{4e-7 * math.pi!r} H/m", MATERIALS, 0.0, lo_open=True),
        Spec("sigma", "conductivity", "57e7 S/m", MATERIALS, 0.0),
    ],
    "truncation": [
        Spec("n_max", "int", 30, ARTIFACT, 1),
        Spec("k_max", "int", 30, ARTIFACT, 1),
        Spec("band_rtol", "float", 0.05, ARTIFACT, 0.0, lo_open=True),
    ],
    "model": [
        Spec("lambda", "float", 1.0, ARTIFACT, 0.0, lo_open=True),
        Spec("speed_convention", "convention", "rad_s", ARTIFACT),
    ],
    "grid": [
        Spec("b_min", "length", "2 mm", REQUIREMENTS, 0.0, lo_open=True),
        Spec("b_max", "length", "40 mm", REQUIREMENTS, 0.0, lo_open=True),
        Spec("b_step", "length", "1 mm", ARTIFACT, 0.0, lo_open=True),
        Spec("w_m_min", "length", "2 mm", REQUIREMENTS, 0.0, lo_open=True),
        Spec("w_m_max", "length", "110 mm", REQUIREMENTS, 0.0, lo_open=True),
        Spec("w_m_step", "length", "2 mm", ARTIFACT, 0.0, lo_open=True),
        Spec("speeds", "speed_list", ["1000 rpm", "2000 rpm", "4000 rpm", "6000 rpm", "8000 rpm"], REQUIREMENTS),
    ],
    "vehicle": [
        Spec("mass", "mass", "1735 kg", REGULATION, 0.0, lo_open=True),
        Spec("wheel_effective_radius", "length", "0.14 m", REGULATION, 0.0, lo_open=True),
        Spec("max_speed", "road_speed", "200 km/h", REGULATION, 0.0),
        Spec("braked_wheels", "int", 4, REGULATION, 1),
    ],
    "requirement": [
        Spec("min_deceleration", "acceleration", "4 m/s^2", REGULATION, 0.0),
        Spec("test_speed_fraction", "float", 0.8, REGULATION, 0.0, 1.0, lo_open=True, note="must lie in (0, 1]"),
        Spec("handover_speed", "road_speed", "20 km/h", REGULATION, 0.0),
        Spec("per_wheel_torque", "torque", "243 N*m", REQUIREMENTS, 0.0),
        Spec("speed_range", "speed_list", ["1000 rpm", "8000 rpm"], REQUIREMENTS),
    ],
    "calibration": [
        Spec("b", "length", "30 mm", PUBLISHED, 0.0, lo_open=True),
        Spec("w_m", "length", "110 mm", PUBLISHED, 0.0, lo_open=True),
        Spec("speed", "speed", "8000 rpm", PUBLISHED),
        Spec("torque", "torque", "253.802 N*m", PUBLISHED, 0.0, lo_open=True),
    ],
    "oracle": [
        Spec("mesh", "int", 128, ARTIFACT, 8),
        Spec("n", "int_list", [1, 3, 5], ARTIFACT, 1),
        Spec("k", "int_list", [1, 3, 5], ARTIFACT, 1),
        Spec("speeds", "speed_list", ["0 rpm", "1000 rpm", "4000 rpm", "8000 rpm"], ARTIFACT),
    ],
}

OPTIONAL_SECTIONS = {"calibration"}


@lru_cache(maxsize=1)
def _registry():
    import pint

    return pint.UnitRegistry()


def parse_quantity(text: Any, kind: str, where: str) -> float:
    """Convert a unit-suffixed string to the SI (or display) unit of ``kind``."""
    import pint

    dim, target = DIMENSIONS[kind]
    if not isinstance(text, str):
        raise UnitError(f"{where}: expected a value with unit {target!r} (e.g. \"1 {target}\"), got {text!r}")
    ureg = _registry()
    try:
        q = ureg.Quantity(text.strip())
    except (pint.errors.PintError, AttributeError, ValueError, TypeError, SyntaxError) as exc:
        raise UnitError(f"{where}: cannot parse {text!r}: {exc}") from exc
    if not isinstance(q, ureg.Quantity) or q.unitless:
        raise UnitError(f"{where}: {text!r} has no unit, expected {target}")
    if not q.check(dim):
        raise UnitError(f"{where}: {text!r} is not convertible to {target}")
    factor = float(ureg.Quantity(1.0, q.units).to(target).magnitude)
    magnitude = float(q.magnitude)
    inverse = 1.0 / factor
    # divide by an exact integer factor (mm -> m is /1000) for correctly rounded results
    if factor < 1.0 and abs(inverse - round(inverse)) < 1e-9 * inverse:
        return magnitude / round(inverse)
    return magnitude * factor


def _as_int(value, where):
    if isinstance(value, bool) or not isinstance(value, int):
        raise UnitError(f"{where}: expected an integer, got {value!r}")
    return value


def _as_float(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise UnitError(f"{where}: expected a plain number, got {value!r}")
    return float(value)


def _convert(spec: Spec, raw, where: str):
    kind = spec.kind
    if kind == "int":
        return _as_int(raw, where)
    if kind == "float":
        return _as_float(raw, where)
    if kind == "convention":
        try:
            return SpeedConvention(raw)
        except ValueError:
            raise UnitError(f"{where}: speed convention must be 'rad_s' or 'rpm', got {raw!r}") from None
    if kind == "int_list":
        if not isinstance(raw, list) or not raw:
            raise UnitError(f"{where}: expected a non-empty list of integers")
        return tuple(_as_int(v, where) for v in raw)
    if kind == "speed_list":
        if not isinstance(raw, list) or not raw:
            raise UnitError(f"{where}: expected a non-empty list of speeds such as [\"1000 rpm\"]")
        return tuple(parse_quantity(v, "speed", where) for v in raw)
    return parse_quantity(raw, kind, where)


def _check_range(spec: Spec, value, where: str):
    values = value if isinstance(value, tuple) else (value,)
    for v in values:
        if not isinstance(v, (int, float)):
            continue
        if not math.isfinite(v):
            raise RangeError(f"{where} = {v} is not finite")
        bad_lo = spec.lo is not None and (v <= spec.lo if spec.lo_open else v < spec.lo)
        bad_hi = spec.hi is not None and (v >= spec.hi if spec.hi_open else v > spec.hi)
        if bad_lo or bad_hi:
            if spec.note:
                bound = spec.note
            elif spec.hi is None:
                bound = f"must be {'>' if spec.lo_open else '>='} {spec.lo:g}"
            else:
                bound = f"must lie in [{spec.lo:g}, {spec.hi:g}]"
            raise RangeError(f"{where} = {v:g} violates bound: {bound}")


def _display(spec: Spec, value) -> str:
    unit = DIMENSIONS[spec.kind][1] if spec.kind in DIMENSIONS else ""
    if spec.kind == "speed_list":
        unit = "rpm"
    if isinstance(value, tuple):
        body = "[" + ", ".join(f"{v!r}" for v in value) + "]"
    elif isinstance(value, SpeedConvention):
        body = value.value
    else:
        body = repr(value)
    return f"{body} {unit}".rstrip()


@dataclass
class RunConfig:
    values: dict[str, dict[str, Any]]
    provenance: dict[str, str]
    sections_present: set[str] = field(default_factory=set)
    source: Path | None = None

    def get(self, section: str, key: str):
        return self.values[section][key]

    # -- model-side views -------------------------------------------------
    @property
    def geometry(self) -> BrakeGeometry:
        g = self.values["geometry"]
        r2 = g["r2"]
        r1 = g["r1"] if g["r1"] is not None else r2 - g["w_m"]
        return BrakeGeometry(
            r1=r1, r2=r2, r3=g["r3"], magnet_thickness=g["b"], air_gap=g["air_gap"],
            plate_thickness=g["plate_thickness"], back_iron_thickness=g["back_iron_thickness"],
        )

    @property
    def magnets(self) -> MagnetSpec:
        return MagnetSpec(**self.values["magnets"])

    @property
    def materials(self) -> MaterialSpec:
        return MaterialSpec(**self.values["materials"])

    @property
    def truncation(self) -> Truncation:
        return Truncation(**self.values["truncation"])

    @property
    def lambda_scale(self) -> float:
        return self.values["model"]["lambda"]

    @property
    def speed_convention(self) -> SpeedConvention:
        return self.values["model"]["speed_convention"]

    def is_user(self, section: str, key: str) -> bool:
        return self.provenance[f"{section}.{key}"] == USER

    def model(self) -> TorqueModel:
        return TorqueModel(self.geometry, self.magnets, self.materials, self.truncation, self.lambda_scale)

    @property
    def grid(self) -> SweepGrid:
        g = self.values["grid"]
        return SweepGrid(
            (g["b_min"], g["b_max"], g["b_step"]), (g["w_m_min"], g["w_m_max"], g["w_m_step"]), g["speeds"]
        )

    @property
    def vehicle(self) -> VehicleSpec:
        v = self.values["vehicle"]
        return VehicleSpec(v["mass"], v["wheel_effective_radius"], v["max_speed"], v["braked_wheels"])

    @property
    def requirement(self) -> RequirementSpec:
        r = self.values["requirement"]
        if len(r["speed_range"]) != 2:
            raise RangeError("requirement.speed_range must hold exactly two speeds [low, high]")
        return RequirementSpec(
            r["min_deceleration"], r["test_speed_fraction"], r["handover_speed"],
            r["per_wheel_torque"], r["speed_range"],
        )

    @property
    def calibration(self) -> CalibrationReference | None:
        if "calibration" not in self.sections_present:
            return None
        c = self.values["calibration"]
        return CalibrationReference(c["b"], c["w_m"], c["speed"], c["torque"])

    def echo(self) -> list[str]:
        """One line per effective parameter with its provenance."""
        lines = []
        for section, specs in SCHEMA.items():
            if section in OPTIONAL_SECTIONS and section not in self.sections_present:
                continue
            for spec in specs:
                value = self.values[section][spec.key]
                if value is None:
                    continue
                lines.append(f"{section}.{spec.key} = {_display(spec, value)}  [{self.provenance[f'{section}.{spec.key}']}]")
        return lines


def _decode_position(exc: tomli.TOMLDecodeError):
    line = getattr(exc, "lineno", None)
    column = getattr(exc, "colno", None)
    if line is None:
        m = re.search(r"line (\d+), column (\d+)", str(exc))
        if m:
            line, column = int(m.group(1)), int(m.group(2))
    return line, column


def parse_config(text: str, source: Path | None = None) -> RunConfig:
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        line, column = _decode_position(exc)
        raise ParseError(f"malformed config: {exc}", line=line, column=column) from exc

    for section in raw:
        if section not in SCHEMA:
            raise ParseError(f"unknown section [{section}]")
        if not isinstance(raw[section], dict):
            raise ParseError(f"{section} must be a table")
        known = {s.key for s in SCHEMA[section]}
        for key in raw[section]:
            if key not in known:
                raise ParseError(f"unknown key {section}.{key}")
    if "r1" in raw.get("geometry", {}) and "w_m" in raw.get("geometry", {}):
        raise ParseError("geometry.r1 and geometry.w_m are mutually exclusive")

    values: dict[str, dict[str, Any]] = {}
    provenance: dict[str, str] = {}
    for section, specs in SCHEMA.items():
        given = raw.get(section, {})
        values[section] = {}
        for spec in specs:
            where = f"{section}.{spec.key}"
            if spec.key in given:
                value = _convert(spec, given[spec.key], where)
                provenance[where] = USER
            else:
                value = None if spec.default is None else _convert(spec, spec.default, where)
                provenance[where] = spec.provenance
            if value is not None:
                _check_range(spec, value, where)
            values[section][spec.key] = value

    cfg = RunConfig(values, provenance, set(raw), source)
    # surface invariant violations (e.g. r2 > r3) at load time
    try:
        cfg.model(), cfg.grid, cfg.vehicle, cfg.requirement, cfg.calibration
    except (ParseError, UnitError, RangeError):
        raise
    except ValidationError as exc:
        raise RangeError(exc.args[0]) from exc
    if cfg.values["geometry"]["r1"] is not None and provenance["geometry.w_m"] != USER:
        provenance["geometry.w_m"] = "derived from r1"
        values["geometry"]["w_m"] = values["geometry"]["r2"] - values["geometry"]["r1"]
    return cfg


def load_config(path: str | Path | None) -> RunConfig:
    """Load and validate a config file; ``None`` yields all defaults."""
    if path is None:
        return parse_config("")
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_config(text, path)
