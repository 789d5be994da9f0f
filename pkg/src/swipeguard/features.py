"""Fixed-length feature vectors from normalized swipe traces.

Each trace is interpolated with a natural cubic spline and evaluated on an
even time grid of G cell midpoints, yielding 7 channels laid out
channel-major: x, y, speed, tangential acceleration, unwrapped angle,
angular acceleration, pointer size. Feature dimension is d = 7 * G.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .traces import NormalizedTrace, StructuralError

N_CHANNELS = 7
DEFAULT_GRID = 10
CHANNEL_NAMES = ("x", "y", "speed", "accel", "angle", "angular_accel", "size")

# dense evaluation grid refinement per cell, odd so coarse midpoints are
# also fine midpoints
_ANGLE_REFINE = 21
_SPEED_FLOOR = 1e-12


def grid_points(grid: int) -> np.ndarray:
    """Cell midpoints (g - 0.5) / G for g = 1..G."""
    return (np.arange(1, grid + 1) - 0.5) / grid


def feature_dim(grid: int = DEFAULT_GRID) -> int:
    return N_CHANNELS * grid


def extract_features(trace: NormalizedTrace, grid: int = DEFAULT_GRID) -> np.ndarray:
    """Resample a normalized trace into a length-(7*G) feature vector.

    Derivatives are taken analytically from the spline interpolants; the
    angle channel is unwrapped on a dense grid before being sampled so that
    2-pi jumps never appear between grid points.
    """
    t = np.asarray(trace.t, dtype=float)
    if t.size < 4:
        raise StructuralError("need at least 4 points to interpolate")
    if np.any(np.diff(t) <= 0):
        raise StructuralError("duplicate abscissae in normalized trace")

    try:
        sx = CubicSpline(t, trace.x, bc_type="natural")
        sy = CubicSpline(t, trace.y, bc_type="natural")
        ss = CubicSpline(t, trace.size, bc_type="natural")
    except ValueError as exc:
        raise StructuralError(f"interpolant construction failed: {exc}") from exc

    tg = grid_points(grid)
    dx, dy = sx.derivative(), sy.derivative()
    ddx, ddy = sx.derivative(2), sy.derivative(2)

    vx, vy = dx(tg), dy(tg)
    speed = np.hypot(vx, vy)
    # d|v|/dt = (v . a) / |v|, guarded against stationary points
    accel = (vx * ddx(tg) + vy * ddy(tg)) / np.maximum(speed, _SPEED_FLOOR)

    # unwrap on a dense midpoint grid containing tg
    td = grid_points(grid * _ANGLE_REFINE)
    angle_dense = np.unwrap(np.arctan2(dy(td), dx(td)))
    angle_spline = CubicSpline(td, angle_dense, bc_type="natural")
    angle = angle_spline(tg)
    angular_accel = angle_spline.derivative(2)(tg)

    vec = np.concatenate([sx(tg), sy(tg), speed, accel, angle, angular_accel, ss(tg)])
    if not np.all(np.isfinite(vec)):
        raise StructuralError("non-finite feature values")
    return vec


@dataclass(frozen=True)
class PopulationStats:
    """Per-dimension z-score statistics persisted alongside trained models."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def identity(cls, d: int) -> "PopulationStats":
        return cls(mean=np.zeros(d), std=np.ones(d))

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, obj: dict) -> "PopulationStats":
        return cls(mean=np.asarray(obj["mean"], float), std=np.asarray(obj["std"], float))


def standardize(
    vectors: list[np.ndarray], stats: PopulationStats | None = None
) -> tuple[list[np.ndarray], PopulationStats]:
    """Z-score vectors per dimension, computing stats from the input when
    none are supplied. Stds below 1e-9 are clamped to 1e-9."""
    if not vectors:
        raise ValueError("empty vector list")
    mat = np.asarray(vectors, dtype=float)
    if mat.ndim != 2:
        raise ValueError("vectors have mismatched dimensions")
    if stats is None:
        stats = PopulationStats(mean=mat.mean(axis=0), std=mat.std(axis=0))
    if stats.mean.shape[0] != mat.shape[1]:
        raise ValueError("stats dimension mismatch")
    std = np.maximum(stats.std, 1e-9)
    stats = PopulationStats(mean=stats.mean, std=std)
    out = (mat - stats.mean) / stats.std
    return [row for row in out], stats


def position_dims(grid: int = DEFAULT_GRID) -> np.ndarray:
    """Indices of the x and y channels within the feature vector."""
    return np.arange(2 * grid)
