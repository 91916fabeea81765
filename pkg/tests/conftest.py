from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


def random_points(rng, n, box_km=100.0, lat0=40.0, lon0=-100.0):
    """n (lat, lon) pairs uniform in a box of side ``box_km`` around (lat0, lon0)."""
    half_lat = box_km / 2 / 111.195
    half_lon = half_lat / np.cos(np.radians(lat0))
    lat = lat0 + rng.uniform(-half_lat, half_lat, n)
    lon = lon0 + rng.uniform(-half_lon, half_lon, n)
    return [(float(a), float(b)) for a, b in zip(lat, lon)]


def offset(lat, lon, east_m=0.0, north_m=0.0):
    """Point displaced by small planar offsets in meters."""
    r = 6_371_008.8
    dlat = np.degrees(north_m / r)
    dlon = np.degrees(east_m / (r * np.cos(np.radians(lat))))
    return (lat + dlat, lon + dlon)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "tests": 0, "failed": 0})
    if report.when == "call":
        entry["tests"] += 1
    if report.failed:
        entry["failed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        e = _criteria[number]
        status = "FAIL" if e["failed"] or not e["tests"] else "PASS"
        terminalreporter.write_line(f"[{status}] criterion {number}: {e['title']} ({e['tests']} tests)")
