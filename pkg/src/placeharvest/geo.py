"""Great-circle distances and a local planar projection."""

from __future__ import annotations

import math

import numpy as np

from ._validation import check_points

EARTH_RADIUS_M = 6_371_008.8


def haversine_m(a, b) -> float:
    """Great-circle distance in meters between two GeoPoints (or (lat, lon) pairs)."""
    lat1, lon1 = (a.lat_deg, a.lon_deg) if hasattr(a, "lat_deg") else a
    lat2, lon2 = (b.lat_deg, b.lon_deg) if hasattr(b, "lat_deg") else b
    phi1 = math.radians(lat1)
    phi2 = math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlmb = math.radians(lon2 - lon1)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlmb / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(math.sqrt(min(1.0, h)))


def distance_matrix(points) -> np.ndarray:
    """Symmetric (n, n) matrix of haversine distances in meters."""
    arr = check_points(points)
    phi = np.radians(arr[:, 0])
    lmb = np.radians(arr[:, 1])
    dphi = phi[None, :] - phi[:, None]
    dlmb = lmb[None, :] - lmb[:, None]
    h = np.sin(dphi / 2) ** 2 + np.cos(phi)[:, None] * np.cos(phi)[None, :] * np.sin(dlmb / 2) ** 2
    d = 2 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.minimum(h, 1.0)))
    # Mirror the upper triangle so d[i, j] == d[j, i] bit for bit.
    upper = np.triu(d, k=1)
    return upper + upper.T


class LocalProjection:
    """Equirectangular projection around a reference point, in meters.

    Adequate for city-scale extents; not meant for spans above a few hundred
    kilometers or latitudes beyond 85 degrees.
    """

    def __init__(self, lat0: float, lon0: float):
        self.lat0 = float(lat0)
        self.lon0 = float(lon0)
        self._kx = math.radians(1.0) * EARTH_RADIUS_M * math.cos(math.radians(self.lat0))
        self._ky = math.radians(1.0) * EARTH_RADIUS_M

    @classmethod
    def around(cls, points) -> "LocalProjection":
        arr = check_points(points, min_points=1)
        return cls(arr[:, 0].mean(), arr[:, 1].mean())

    def forward(self, points) -> np.ndarray:
        """(lat, lon) rows to (x_east_m, y_north_m) rows."""
        arr = check_points(points)
        x = (arr[:, 1] - self.lon0) * self._kx
        y = (arr[:, 0] - self.lat0) * self._ky
        return np.column_stack([x, y])

    def inverse(self, xy) -> np.ndarray:
        """(x_east_m, y_north_m) rows back to (lat, lon) rows."""
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        lon = xy[:, 0] / self._kx + self.lon0
        lat = xy[:, 1] / self._ky + self.lat0
        return np.column_stack([lat, lon])
