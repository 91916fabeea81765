import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import offset, random_points
from oracles import brute_hull_vertices
from placeharvest.corpus import GeoPoint
from placeharvest.exceptions import DegenerateGeometryError
from placeharvest.footprint import (
    Polygon,
    convex_hull,
    density_level,
    hull_or_points,
    kde_contour,
    kde_surface,
    point_in_polygon,
    to_geojson,
)
from placeharvest.geo import LocalProjection

C = (43.6, -116.2)


def as_pairs(poly):
    return [(p.lat_deg, p.lon_deg) for p in poly.ring]


def planar(points):
    lat = np.mean([p[0] for p in points])
    k = math.cos(math.radians(lat))
    return [(lon * k, la) for la, lon in points]


def test_square_with_center():
    sq = [offset(*C, east_m=x, north_m=y) for x, y in ((0, 0), (100, 0), (100, 100), (0, 100))]
    hull = convex_hull(sq + [offset(*C, east_m=50, north_m=50)])
    assert sorted(as_pairs(hull)) == sorted(sq)
    assert hull.signed_area_deg2() > 0


def test_circle_points_all_on_hull_in_angular_order():
    pts = [offset(*C, east_m=500 * math.cos(a), north_m=500 * math.sin(a)) for a in np.linspace(0, 2 * math.pi, 24, endpoint=False)]
    ring = as_pairs(convex_hull(pts))
    assert sorted(ring) == sorted(pts)
    start = ring.index(pts[0])
    assert ring[start:] + ring[:start] == pts


def test_collinear_boundary_points_excluded():
    pts = [offset(*C, east_m=x, north_m=y) for x, y in ((0, 0), (50, 0), (100, 0), (100, 100), (0, 100))]
    assert len(convex_hull(pts).ring) == 4


def test_degenerate_inputs():
    with pytest.raises(DegenerateGeometryError):
        convex_hull([C, offset(*C, east_m=5)])
    with pytest.raises(DegenerateGeometryError):
        convex_hull([offset(*C, east_m=10 * i) for i in range(5)])
    with pytest.raises(DegenerateGeometryError):
        convex_hull([C, C, C])
    with pytest.raises(DegenerateGeometryError):
        Polygon((GeoPoint(0, 0), GeoPoint(1, 1)))


def test_hull_matches_brute_force(rng):
    for _ in range(50):
        pts = random_points(rng, 50, box_km=10)
        hull = convex_hull(pts)
        expected = {pts[i] for i in brute_hull_vertices(planar(pts))}
        assert set(as_pairs(hull)) == expected
        assert all(point_in_polygon(p, hull) for p in pts)


@settings(max_examples=100, deadline=None)
@given(st.integers(3, 25), st.integers(0, 10**6), st.randoms())
def test_hull_permutation_and_duplicate_invariance(n, seed, rnd):
    pts = random_points(np.random.default_rng(seed), n, box_km=5)
    base = set(as_pairs(convex_hull(pts)))
    shuffled = pts + pts[: n // 2]
    rnd.shuffle(shuffled)
    assert set(as_pairs(convex_hull(shuffled))) == base
    assert len(base) <= n


def gaussian_points(rng, center, sigma, n):
    return [offset(*center, east_m=x, north_m=y) for x, y in rng.normal(0, sigma, (n, 2))]


def test_kde_single_cluster_is_unimodal(rng):
    pts = gaussian_points(rng, C, 200, 150)
    grid = kde_surface(pts)
    assert grid.values.min() >= 0 and np.all(np.isfinite(grid.values))
    assert grid.cell_mass().sum() == pytest.approx(1.0, abs=0.02)
    row, col = np.unravel_index(np.argmax(grid.values), grid.values.shape)
    xy = grid.projection.forward(pts).mean(axis=0)
    cx, cy = grid.cell_center_xy(row, col)
    assert abs(cx - xy[0]) <= 1.5 * grid.cell_size_m and abs(cy - xy[1]) <= 1.5 * grid.cell_size_m
    polys = kde_contour(grid)
    assert len(polys) == 1
    mode = grid.projection.inverse([[cx, cy]])[0]
    ring = planar(as_pairs(polys[0]))
    # point-in-polygon by ray casting (the contour need not be convex)
    k = math.cos(math.radians(np.mean([p[0] for p in as_pairs(polys[0])])))
    x, y = mode[1] * k, mode[0]
    inside = False
    for (x1, y1), (x2, y2) in zip(ring, ring[1:] + ring[:1]):
        if (y1 > y) != (y2 > y) and x < x1 + (y - y1) * (x2 - x1) / (y2 - y1):
            inside = not inside
    assert inside
    assert polys[0].signed_area_deg2() > 0


def test_kde_two_clusters_bimodal(rng):
    far = offset(*C, east_m=10_000)
    pts = gaussian_points(rng, C, 150, 60) + gaussian_points(rng, far, 150, 60)
    grid = kde_surface(pts, bandwidth_m=100)
    assert grid.cell_mass().sum() == pytest.approx(1.0, abs=0.02)
    x0, _ = grid.cell_center_xy(0, 0)
    saddle_col = int(round((5_000 - (x0 - grid.projection.forward([C])[0][0])) / grid.cell_size_m))
    assert grid.values[:, saddle_col].max() < 1e-12 * grid.values.max()
    assert len(kde_contour(grid, 0.90)) == 2


def test_kde_mass_within_three_sigma(rng):
    sigma = 300.0
    pts = gaussian_points(rng, C, sigma, 200)
    grid = kde_surface(pts)
    cx, cy = grid.projection.forward([C])[0]
    rows, cols = np.indices(grid.values.shape)
    x0, y0 = grid.cell_center_xy(0, 0)
    r = np.hypot(x0 + cols * grid.cell_size_m - cx, y0 + rows * grid.cell_size_m - cy)
    assert grid.cell_mass()[r <= 3 * sigma].sum() >= 0.95


def test_kde_contour_full_mass_covers_all_cells(rng):
    grid = kde_surface(gaussian_points(rng, C, 100, 30), cell_size_m=40)
    level = density_level(grid, 1.0)
    assert level < grid.values[grid.values > 0].min()
    assert len(kde_contour(grid, 1.0)) == 1


def test_kde_errors():
    with pytest.raises(ValueError):
        kde_surface([C, C])
    with pytest.raises(DegenerateGeometryError):
        kde_surface([C, C, C])


def test_kde_permutation_invariant(rng):
    pts = gaussian_points(rng, C, 200, 40)
    a = kde_surface(pts).values
    b = kde_surface(pts[::-1]).values
    assert np.allclose(a, b, rtol=1e-12, atol=0)


def test_geojson_polygon_feature():
    tri = convex_hull([C, offset(*C, east_m=100), offset(*C, north_m=100)])
    doc = to_geojson([("greenbelt", tri)])
    assert doc["type"] == "FeatureCollection" and len(doc["features"]) == 1
    feat = doc["features"][0]
    assert feat["properties"] == {"name": "greenbelt"}
    ring = feat["geometry"]["coordinates"][0]
    assert feat["geometry"]["type"] == "Polygon" and ring[0] == ring[-1] and len(ring) == 4
    assert ring[0] == [C[1], C[0]]
    json.dumps(doc)


def test_geojson_empty_and_multipoint_fallback():
    assert to_geojson([]) == {"type": "FeatureCollection", "features": []}
    line = [offset(*C, east_m=10 * i) for i in range(4)]
    feat = to_geojson([("road", hull_or_points(line))])["features"][0]
    assert feat["geometry"]["type"] == "MultiPoint"
    assert len(feat["geometry"]["coordinates"]) == 4


def test_local_projection_roundtrip(rng):
    pts = random_points(rng, 20, box_km=30, lat0=43.6, lon0=-116.2)
    proj = LocalProjection.around(pts)
    back = proj.inverse(proj.forward(pts))
    assert np.allclose(back, np.asarray(pts), atol=1e-12)
