"""Input validation helpers used by the estimators and geometry functions."""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np


def check_points(points, *, min_points: int = 0, name: str = "points") -> np.ndarray:
    """Coerce ``points`` to a float array of shape (n, 2) holding (lat, lon).

    Accepts GeoPoint instances, (lat, lon) pairs, or an existing array.
    Raises ValueError on bad shape, non-finite values, out-of-range
    coordinates, or fewer than ``min_points`` rows.
    """
    if isinstance(points, np.ndarray):
        arr = np.asarray(points, dtype=float)
    else:
        rows = [_as_pair(p) for p in points]
        arr = np.asarray(rows, dtype=float).reshape(len(rows), 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{name} must have shape (n, 2), got {arr.shape}")
    if arr.shape[0] < min_points:
        raise ValueError(f"{name} needs at least {min_points} points, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite coordinates")
    if np.any(np.abs(arr[:, 0]) > 90.0) or np.any(np.abs(arr[:, 1]) > 180.0):
        raise ValueError(f"{name} contains coordinates outside the valid lat/lon range")
    return arr


def _as_pair(p) -> tuple[float, float]:
    if hasattr(p, "lat_deg"):
        return (p.lat_deg, p.lon_deg)
    lat, lon = p
    return (float(lat), float(lon))


def check_fraction(value: float, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def unique_sorted(items: Iterable[str]) -> list[str]:
    return sorted(set(items))
