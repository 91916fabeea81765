"""Rough spatial footprints: convex hulls and kernel-density contours.

Geometry is computed in a local equirectangular plane around the point
set, then mapped back to latitude/longitude.
"""

from __future__ import annotations

import json
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr
from skimage import measure

from ._validation import check_fraction, check_points
from .corpus import GeoPoint
from .exceptions import DegenerateGeometryError
from .geo import LocalProjection

MAX_GRID_CELLS = 4_000_000
PAD_BANDWIDTHS = 3.0


@dataclass(frozen=True)
class Polygon:
    """Counterclockwise ring of vertices, implicitly closed (first != last)."""

    ring: tuple[GeoPoint, ...]

    def __post_init__(self):
        if len(self.ring) < 3:
            raise DegenerateGeometryError("a polygon needs at least 3 vertices")

    def coordinates(self) -> list[list[float]]:
        """Closed [lon, lat] ring as GeoJSON expects it."""
        coords = [[p.lon_deg, p.lat_deg] for p in self.ring]
        return coords + [coords[0]]

    def signed_area_deg2(self) -> float:
        xs = [p.lon_deg for p in self.ring]
        ys = [p.lat_deg for p in self.ring]
        n = len(xs)
        return 0.5 * sum(xs[i] * ys[(i + 1) % n] - xs[(i + 1) % n] * ys[i] for i in range(n))


@dataclass
class DensityGrid:
    """Row-major densities (per square meter) on a regular planar grid.

    Row 0 is the southern edge; ``origin`` is the southwest corner.
    """

    origin: GeoPoint
    cell_size_m: float
    n_rows: int
    n_cols: int
    values: np.ndarray
    projection: LocalProjection
    bandwidth_m: float

    def cell_mass(self) -> np.ndarray:
        return self.values * self.cell_size_m ** 2

    def cell_center_xy(self, row: float, col: float) -> tuple[float, float]:
        x0, y0 = self.projection.forward([(self.origin.lat_deg, self.origin.lon_deg)])[0]
        return x0 + (col + 0.5) * self.cell_size_m, y0 + (row + 0.5) * self.cell_size_m


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _planar(points):
    arr = check_points(points)
    mean_lat = float(arr[:, 0].mean()) if len(arr) else 0.0
    # lon scaled by cos(mean lat); a positive scale keeps orientation intact
    scale = math.cos(math.radians(mean_lat))
    return arr, np.column_stack([arr[:, 1] * scale, arr[:, 0]])


def convex_hull(points) -> Polygon:
    """Convex hull by monotone chain in the local plane.

    Vertices come back counterclockwise; points lying on a hull edge are not
    vertices. Raises :class:`DegenerateGeometryError` when fewer than three
    distinct points remain or all of them are collinear.
    """
    arr, xy = _planar(points)
    order = sorted(range(len(arr)), key=lambda i: (xy[i, 0], xy[i, 1]))
    unique: list[int] = []
    for i in order:
        if not unique or (xy[i, 0], xy[i, 1]) != (xy[unique[-1], 0], xy[unique[-1], 1]):
            unique.append(i)
    if len(unique) < 3:
        raise DegenerateGeometryError(f"need 3 distinct points for a hull, got {len(unique)}")

    def chain(indices):
        out: list[int] = []
        for i in indices:
            while len(out) >= 2 and _cross(xy[out[-2]], xy[out[-1]], xy[i]) <= 0:
                out.pop()
            out.append(i)
        return out

    lower = chain(unique)
    upper = chain(reversed(unique))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateGeometryError("all points are collinear")
    return Polygon(tuple(GeoPoint(float(arr[i, 0]), float(arr[i, 1])) for i in hull))


def scott_bandwidth(xy: np.ndarray) -> float:
    """n**(-1/6) times the mean of the per-axis standard deviations."""
    n = xy.shape[0]
    sigma = float(np.mean(np.std(xy, axis=0, ddof=1)))
    return sigma * n ** (-1.0 / 6.0)


def kde_surface(points, bandwidth_m: float | None = None, cell_size_m: float = 50.0) -> DensityGrid:
    """Gaussian kernel density on a grid padded by three bandwidths.

    Each cell stores the kernel mass falling inside it divided by the cell
    area, so the grid integrates to the captured mass exactly whatever the
    ratio of cell size to bandwidth.
    """
    arr = check_points(points, min_points=3)
    proj = LocalProjection.around(arr)
    xy = proj.forward(arr)
    if np.allclose(xy, xy[0], atol=1e-9, rtol=0.0):
        raise DegenerateGeometryError("all points coincide; emit the points instead of a density")
    h = scott_bandwidth(xy) if bandwidth_m is None else float(bandwidth_m)
    if not h > 0:
        raise DegenerateGeometryError("zero bandwidth; emit the points instead of a density")
    if not cell_size_m > 0:
        raise ValueError("cell_size_m must be positive")

    pad = PAD_BANDWIDTHS * h
    x0, y0 = xy.min(axis=0) - pad
    x1, y1 = xy.max(axis=0) + pad
    n_cols = max(1, int(math.ceil((x1 - x0) / cell_size_m)))
    n_rows = max(1, int(math.ceil((y1 - y0) / cell_size_m)))
    if n_rows * n_cols > MAX_GRID_CELLS:
        raise ValueError(f"grid of {n_rows}x{n_cols} cells is too large; increase cell_size_m")

    x_edges = x0 + cell_size_m * np.arange(n_cols + 1)
    y_edges = y0 + cell_size_m * np.arange(n_rows + 1)
    # Per-point mass along each axis, then an outer product summed over points.
    mx = np.diff(ndtr((x_edges[None, :] - xy[:, :1]) / h), axis=1)
    my = np.diff(ndtr((y_edges[None, :] - xy[:, 1:]) / h), axis=1)
    mass = my.T @ mx / len(xy)
    values = np.clip(mass, 0.0, None) / cell_size_m ** 2

    sw = proj.inverse([[x0, y0]])[0]
    return DensityGrid(
        origin=GeoPoint(float(sw[0]), float(sw[1])),
        cell_size_m=float(cell_size_m),
        n_rows=n_rows,
        n_cols=n_cols,
        values=values,
        projection=proj,
        bandwidth_m=h,
    )


def density_level(grid: DensityGrid, mass_level: float) -> float:
    """Density value whose superlevel set holds ``mass_level`` of the grid mass.

    The level sits halfway between the last included cell and the next one
    down, so no cell lies exactly on the isoline.
    """
    check_fraction(mass_level, "mass_level")
    v = np.sort(grid.values.ravel())[::-1]
    total = v.sum()
    if total <= 0 or v[0] == v[-1]:
        raise DegenerateGeometryError("flat density grid has no contour")
    cum = np.cumsum(v) / total
    idx = int(np.searchsorted(cum, mass_level - 1e-12))
    idx = min(idx, len(v) - 1)
    # extend over cells tied with the boundary value
    while idx + 1 < len(v) and v[idx + 1] == v[idx]:
        idx += 1
    nxt = v[idx + 1] if idx + 1 < len(v) else 0.0
    return 0.5 * (v[idx] + nxt)


def kde_contour(grid: DensityGrid, mass_level: float = 0.90) -> list[Polygon]:
    """Outer boundaries of the region holding ``mass_level`` of the density.

    Contours are traced with marching squares on the cell-center lattice,
    padded with a zero border so every contour closes. Holes are omitted.
    """
    level = density_level(grid, mass_level)
    padded = np.pad(grid.values, 1, constant_values=0.0)
    contours = measure.find_contours(padded, level, fully_connected="high", positive_orientation="high")
    polygons = []
    for c in contours:
        ring = c[:-1] if np.allclose(c[0], c[-1]) else c
        if len(ring) < 3:
            continue
        rows, cols = ring[:, 0] - 1.0, ring[:, 1] - 1.0
        x0, y0 = grid.cell_center_xy(0, 0)
        xy = np.column_stack([x0 + cols * grid.cell_size_m, y0 + rows * grid.cell_size_m])
        area = 0.5 * np.sum(xy[:, 0] * np.roll(xy[:, 1], -1) - np.roll(xy[:, 0], -1) * xy[:, 1])
        # (row, col) -> (y, x) swaps handedness: outer rings of high regions
        # come out clockwise in (x, y), holes counterclockwise.
        if area >= 0:
            continue
        latlon = grid.projection.inverse(xy[::-1])
        polygons.append(Polygon(tuple(GeoPoint(float(a), float(b)) for a, b in latlon)))
    return polygons


def point_in_polygon(point, polygon: Polygon, tol: float = 1e-9) -> bool:
    """True when a (lat, lon) point lies inside or within ``tol`` of a convex ring."""
    lat, lon = (point.lat_deg, point.lon_deg) if hasattr(point, "lat_deg") else point
    ring = polygon.ring
    n = len(ring)
    for i in range(n):
        a, b = ring[i], ring[(i + 1) % n]
        ex, ey = b.lon_deg - a.lon_deg, b.lat_deg - a.lat_deg
        cross = ex * (lat - a.lat_deg) - ey * (lon - a.lon_deg)
        if cross < -tol * math.hypot(ex, ey):
            return False
    return True


def footprint_feature(term: str, geometry) -> dict:
    if isinstance(geometry, Polygon):
        geom = {"type": "Polygon", "coordinates": [geometry.coordinates()]}
    elif isinstance(geometry, (list, tuple)) and geometry and all(isinstance(g, Polygon) for g in geometry):
        if len(geometry) == 1:
            geom = {"type": "Polygon", "coordinates": [geometry[0].coordinates()]}
        else:
            geom = {"type": "MultiPolygon", "coordinates": [[g.coordinates()] for g in geometry]}
    else:
        arr = check_points(geometry)
        geom = {"type": "MultiPoint", "coordinates": [[float(lon), float(lat)] for lat, lon in arr]}
    return {"type": "Feature", "properties": {"name": term}, "geometry": geom}


def to_geojson(named_footprints: Sequence[tuple[str, object]]) -> dict:
    """FeatureCollection with one feature per term.

    A geometry may be a :class:`Polygon`, a list of polygons, or a point
    list; point lists become MultiPoint features.
    """
    return {
        "type": "FeatureCollection",
        "features": [footprint_feature(term, geom) for term, geom in named_footprints],
    }


def hull_or_points(points):
    """Convex hull, or the points themselves when no hull can be formed."""
    try:
        return convex_hull(points)
    except DegenerateGeometryError:
        return list(points)


def kde_or_points(points, bandwidth_m=None, cell_size_m=50.0, mass_level=0.90):
    try:
        grid = kde_surface(points, bandwidth_m, cell_size_m)
        polygons = kde_contour(grid, mass_level)
    except (DegenerateGeometryError, ValueError):
        return list(points)
    return polygons or list(points)


def dump_geojson(document: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(document, fh, indent=1, sort_keys=True)
        fh.write("\n")
