"""Raw swipe traces: domain types, structural validation, quality gating and
the line-delimited JSON trace file format."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

ROLES = ("victim", "blind_attacker", "ots_attacker")


class StructuralError(ValueError):
    """Trace is malformed (bad schema, non-monotone time, out-of-range
    coordinates). Distinct from a quality rejection."""


@dataclass(frozen=True)
class TouchPoint:
    t_ms: float
    x_px: float
    y_px: float
    size: float


@dataclass
class RawTrace:
    profile_id: str
    role: str
    attempt_index: int
    device_width: int
    device_height: int
    sample_rate_hz: float
    points: list[TouchPoint]

    def validate(self) -> "RawTrace":
        """Check structural invariants, raising StructuralError on violation.

        Equal timestamps are deduplicated (last point wins) before the
        monotonicity check; touch drivers emit duplicates under load.
        """
        if self.role not in ROLES:
            raise StructuralError(f"unknown role {self.role!r}")
        if len(self.points) < 2:
            raise StructuralError("trace needs at least 2 points")
        if self.device_width <= 0 or self.device_height <= 0:
            raise StructuralError("non-positive device dimensions")
        deduped = _dedup_timestamps(self.points)
        if len(deduped) < 2:
            raise StructuralError("fewer than 2 distinct timestamps")
        t = np.array([p.t_ms for p in deduped])
        if not np.all(np.diff(t) > 0):
            raise StructuralError("timestamps not increasing after dedup")
        for p in deduped:
            if not (0 <= p.x_px <= self.device_width):
                raise StructuralError(f"x={p.x_px} outside [0, {self.device_width}]")
            if not (0 <= p.y_px <= self.device_height):
                raise StructuralError(f"y={p.y_px} outside [0, {self.device_height}]")
            if p.size < 0:
                raise StructuralError("negative pointer size")
        self.points = deduped
        return self


@dataclass(frozen=True)
class QualityPolicy:
    """Acceptance thresholds for a swipe; all boundaries inclusive."""

    min_points: int = 8
    min_duration_ms: float = 50.0
    min_path_frac: float = 0.2  # of screen width


@dataclass(frozen=True)
class QualityVerdict:
    accepted: bool
    reason: str | None = None  # too_few_points | too_short | path_too_short


def quality_gate(trace: RawTrace, policy: QualityPolicy = QualityPolicy()) -> QualityVerdict:
    """Pure accept/reject predicate over a structurally valid trace."""
    pts = trace.points
    if len(pts) < policy.min_points:
        return QualityVerdict(False, "too_few_points")
    duration = pts[-1].t_ms - pts[0].t_ms
    if duration < policy.min_duration_ms:
        return QualityVerdict(False, "too_short")
    xy = np.array([[p.x_px, p.y_px] for p in pts])
    path_len = float(np.sum(np.hypot(*np.diff(xy, axis=0).T)))
    if path_len / trace.device_width < policy.min_path_frac:
        return QualityVerdict(False, "path_too_short")
    return QualityVerdict(True)


@dataclass
class NormalizedTrace:
    """Trace mapped onto the unit square and unit duration. Pointer size is
    left in device units (z-scored downstream)."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    size: np.ndarray


def normalize(trace: RawTrace) -> NormalizedTrace:
    pts = trace.points
    t = np.array([p.t_ms for p in pts], dtype=float)
    duration = t[-1] - t[0]
    if duration <= 0:
        raise StructuralError("zero duration after dedup")
    return NormalizedTrace(
        t=(t - t[0]) / duration,
        x=np.array([p.x_px for p in pts]) / trace.device_width,
        y=np.array([p.y_px for p in pts]) / trace.device_height,
        size=np.array([p.size for p in pts], dtype=float),
    )


def _dedup_timestamps(points: list[TouchPoint]) -> list[TouchPoint]:
    out: list[TouchPoint] = []
    for p in points:
        if out and p.t_ms == out[-1].t_ms:
            out[-1] = p
        else:
            out.append(p)
    return out


# --- trace file format (line-delimited JSON) ---

def trace_to_dict(trace: RawTrace) -> dict:
    return {
        "profile_id": trace.profile_id,
        "role": trace.role,
        "attempt_index": trace.attempt_index,
        "device": {
            "width_px": trace.device_width,
            "height_px": trace.device_height,
            "sample_rate_hz": trace.sample_rate_hz,
        },
        "points": [
            {"t_ms": p.t_ms, "x_px": p.x_px, "y_px": p.y_px, "size": p.size}
            for p in trace.points
        ],
    }


def trace_from_dict(obj: dict) -> RawTrace:
    try:
        device = obj["device"]
        trace = RawTrace(
            profile_id=str(obj["profile_id"]),
            role=obj["role"],
            attempt_index=int(obj["attempt_index"]),
            device_width=int(device["width_px"]),
            device_height=int(device["height_px"]),
            sample_rate_hz=float(device["sample_rate_hz"]),
            points=[
                TouchPoint(
                    t_ms=float(p["t_ms"]),
                    x_px=float(p["x_px"]),
                    y_px=float(p["y_px"]),
                    size=float(p["size"]),
                )
                for p in obj["points"]
            ],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise StructuralError(f"malformed trace object: {exc}") from exc
    return trace.validate()


def write_traces(path, traces: Iterable[RawTrace]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for trace in traces:
            fh.write(json.dumps(trace_to_dict(trace)) + "\n")


def read_traces(path) -> Iterator[RawTrace]:
    """Yield traces from a line-delimited JSON file; raises StructuralError
    with the offending line number on malformed input."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise StructuralError(f"line {lineno}: invalid JSON: {exc}") from exc
            try:
                yield trace_from_dict(obj)
            except StructuralError as exc:
                raise StructuralError(f"line {lineno}: {exc}") from exc


def read_traces_lenient(path) -> tuple[list[RawTrace], list[tuple[int, str]]]:
    """Like read_traces but collects (lineno, message) for bad lines instead
    of failing on the first."""
    good: list[RawTrace] = []
    bad: list[tuple[int, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                good.append(trace_from_dict(json.loads(line)))
            except (json.JSONDecodeError, StructuralError) as exc:
                bad.append((lineno, str(exc)))
    return good, bad
