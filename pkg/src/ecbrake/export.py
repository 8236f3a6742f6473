"""Text serialisations: sweep CSV, ranking tables, calibration sidecars."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import IO, Iterable, Sequence

from .search import CalibrationResult, DesignSolution, SweepEntry, SweepResult

CSV_HEADER = ("b_m", "w_m_m", "speed_rpm", "torque_Nm", "status")


def fmt(value: float) -> str:
    """17 significant digits: enough for an exact float round trip."""
    return format(value, ".17g")


def write_sweep_csv(result: SweepResult, stream: IO[str]) -> None:
    stream.write(",".join(CSV_HEADER) + "\n")
    for e in result.entries:
        torque = "" if e.torque is None else fmt(e.torque)
        stream.write(f"{fmt(e.b)},{fmt(e.w_m)},{fmt(e.speed_rpm)},{torque},{e.status}\n")


def sweep_csv_text(result: SweepResult) -> str:
    buf = io.StringIO()
    write_sweep_csv(result, buf)
    return buf.getvalue()


def read_sweep_csv(stream: IO[str]) -> list[SweepEntry]:
    reader = csv.reader(stream)
    header = next(reader)
    if tuple(header) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    return [
        SweepEntry(float(b), float(w), float(s), float(t) if t else None, status)
        for b, w, s, t, status in reader
    ]


def format_rankings(solutions: Sequence[DesignSolution], speeds: Iterable[float], top: int = 10) -> list[str]:
    speeds = list(speeds)
    head = ["rank", "b_m", "w_m_m"] + [f"T@{s:g}rpm" for s in speeds] + ["avg", "min", "objective", "feasible"]
    lines = ["  ".join(f"{h:>11}" for h in head)]
    for i, sol in enumerate(solutions[:top], start=1):
        row = [str(i), f"{sol.b:.4g}", f"{sol.w_m:.4g}"]
        row += [f"{sol.torque_by_speed[s]:.3f}" for s in speeds]
        row += [f"{sol.avg_torque:.3f}", f"{sol.min_torque:.3f}", f"{sol.objective:.3f}", "yes" if sol.feasible else "no"]
        lines.append("  ".join(f"{c:>11}" for c in row))
    return lines


def format_calibration(result: CalibrationResult, gate: float = 0.05) -> list[str]:
    ref = result.reference
    lines = [
        f"reference: b={ref.b:g} m w_m={ref.w_m:g} m speed={ref.speed_rpm:g} rpm torque={ref.torque:g} N*m",
    ]
    for conv, lam in result.lambda_by_convention.items():
        worst = max((abs(r.relative_error) for r in result.residuals_by_convention[conv]), default=0.0)
        lines.append(f"convention={conv.value} lambda={fmt(lam)} max_residual={worst:.4f}")
    lines.append(f"selected convention={result.convention_used.value} lambda_star={fmt(result.lambda_star)}")
    lines.append(f"{'solution':>11} {'speed_rpm':>9} {'published':>10} {'predicted':>10} {'rel_error':>10}")
    for r in result.residuals:
        lines.append(
            f"{r.solution:>11} {r.speed_rpm:>9g} {r.published:>10.3f} {r.predicted:>10.3f} {r.relative_error:>+10.4f}"
        )
    verdict = "PASS" if result.passes(gate) else "FAIL"
    lines.append(f"gate max|residual| <= {gate:g}: {verdict} ({result.max_residual:.4f})")
    return lines


def sidecar_path(directory: Path, fingerprint: str) -> Path:
    return Path(directory) / f"calibration-{fingerprint[:16]}.json"


def save_calibration(result: CalibrationResult, directory: Path) -> Path:
    path = sidecar_path(directory, result.model_fingerprint)
    path.write_text(json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_calibration(path: Path) -> CalibrationResult:
    return CalibrationResult.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
