"""Seeded synthetic corpora with planted place names and scattered noise terms.

Place terms are mentioned by ads scattered as a 2-D Gaussian around a
term-specific center; noise terms by ads spread uniformly over the region
box. Mention counts are fixed, or drawn per term when ``mentions_max`` is
set. Every ad mentions one term right after a cue phrase, and three
annotators agree on every planted place name.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .corpus import Advertisement, Corpus, GeoPoint, write_corpus
from .extractors import normalize_term
from .geo import LocalProjection

_PLACE_FIRST = (
    "Maple Cedar Willow Aspen Juniper Laurel Sycamore Hawthorn Magnolia Birch "
    "Alder Cypress Linden Hazel Rowan Spruce Poplar Chestnut Elmwood Oakmont "
    "Redstone Silverlake Bluewater Goldcrest Fairview Brookside Stonegate Riverbend "
    "Kingsley Ashford"
).split()
_PLACE_SECOND = "Heights Village Commons Square Terrace Hollow Landing Gardens Crossing Park Harbor Ridge".split()
_NOISE_FIRST = (
    "Granite Stainless Hardwood Vaulted Central Private Covered Tiled Quartz Carpeted "
    "Gated Heated Fenced Shared Reserved Modern Updated Renovated Furnished Spacious"
).split()
_NOISE_SECOND = "Countertops Appliances Floors Ceilings Air Balcony Parking Laundry Closets Patio Storage Kitchen".split()

_PLACE_TEMPLATES = (
    "cozy {beds}br apartment close to {term}. rent is ${rent} a month, pets ok.",
    "quiet {beds} bedroom unit near {term}, water and trash included.",
    "bright {beds}br flat minutes from {term}. available now for ${rent}.",
    "updated {beds}br home walking distance to {term}. call for a tour.",
)
_NOISE_TEMPLATES = (
    "roomy {beds}br apartment with {term}. rent is ${rent} a month, pets ok.",
    "clean {beds} bedroom unit, features {term}. water and trash included.",
    "{beds}br flat comes with {term}. available now for ${rent}.",
    "lovely {beds}br home offering {term}. call for a tour.",
)


@dataclass(frozen=True)
class SynthSpec:
    n_place_terms: int = 20
    n_noise_terms: int = 20
    mentions_per_term: int = 15
    cluster_sigma_m: float = 300.0
    region_box_km: float = 40.0
    seed: int = 0
    mentions_max: int | None = None
    center_lat: float = 43.615
    center_lon: float = -116.2023
    region_id: str = "synthetic"
    start_time: datetime = datetime(2017, 1, 1, tzinfo=timezone.utc)

    def __post_init__(self):
        for name in ("n_place_terms", "n_noise_terms", "mentions_per_term"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.mentions_max is not None and self.mentions_max < self.mentions_per_term:
            raise ValueError("mentions_max must be >= mentions_per_term")
        if self.cluster_sigma_m <= 0 or self.region_box_km <= 0:
            raise ValueError("cluster_sigma_m and region_box_km must be positive")


@dataclass
class SynthResult:
    corpus: Corpus
    truth_records: list[dict]
    place_terms: list[str]
    noise_terms: list[str]
    centers: dict[str, GeoPoint] = field(default_factory=dict)


def _names(rng, first, second, count, exclude=()):
    pool = [f"{a} {b}" for a, b in itertools.product(first, second)]
    pool = [p for p in pool if p not in exclude]
    if count > len(pool):
        raise ValueError(f"cannot draw {count} distinct names from a pool of {len(pool)}")
    idx = rng.choice(len(pool), size=count, replace=False)
    return [pool[i] for i in idx]


def generate(spec: SynthSpec) -> SynthResult:
    """Build the corpus and ground-truth records in memory."""
    rng = np.random.default_rng(spec.seed)
    places = _names(rng, _PLACE_FIRST, _PLACE_SECOND, spec.n_place_terms)
    noise = _names(rng, _NOISE_FIRST, _NOISE_SECOND, spec.n_noise_terms)
    half = spec.region_box_km * 500.0
    proj = LocalProjection(spec.center_lat, spec.center_lon)

    def n_mentions():
        if spec.mentions_max is None:
            return spec.mentions_per_term
        return int(rng.integers(spec.mentions_per_term, spec.mentions_max + 1))

    events = []  # (term, is_place, x, y)
    centers = {}
    for term in places:
        c = rng.uniform(-0.8 * half, 0.8 * half, size=2)
        centers[term] = c
        xy = c + rng.normal(0.0, spec.cluster_sigma_m, size=(n_mentions(), 2))
        events.extend((term, True, x, y) for x, y in xy)
    for term in noise:
        xy = rng.uniform(-half, half, size=(n_mentions(), 2))
        events.extend((term, False, x, y) for x, y in xy)

    order = rng.permutation(len(events))
    ads = []
    truth = []
    for serial, i in enumerate(order):
        term, is_place, x, y = events[i]
        templates = _PLACE_TEMPLATES if is_place else _NOISE_TEMPLATES
        body = templates[int(rng.integers(len(templates)))].format(
            term=term, beds=int(rng.integers(1, 5)), rent=int(rng.integers(6, 30)) * 100
        )
        lat, lon = proj.inverse([[x, y]])[0]
        post_id = f"{spec.region_id}-{serial:06d}"
        ads.append(Advertisement(
            post_id=post_id,
            post_time=spec.start_time + timedelta(minutes=serial),
            location=GeoPoint(round(float(lat), 7), round(float(lon), 7)),
            text=f"ref {serial:06d}: {body}",
        ))
        names = [term] if is_place else []
        truth.extend({"post_id": post_id, "annotator_id": f"a{j}", "names": names} for j in (1, 2, 3))

    center_points = {
        normalize_term(t): GeoPoint(*map(float, proj.inverse([c])[0])) for t, c in centers.items()
    }
    return SynthResult(
        corpus=Corpus(spec.region_id, tuple(ads)),
        truth_records=truth,
        place_terms=[normalize_term(t) for t in places],
        noise_terms=[normalize_term(t) for t in noise],
        centers=center_points,
    )


def synth(spec: SynthSpec, out_dir) -> dict[str, Path]:
    """Write ``ads.csv``, ``truth.jsonl`` and ``synth_manifest.json`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = generate(spec)
    paths = {
        "ads": out / "ads.csv",
        "ground_truth": out / "truth.jsonl",
        "manifest": out / "synth_manifest.json",
    }
    write_corpus(result.corpus, paths["ads"])
    with paths["ground_truth"].open("w", encoding="utf-8") as fh:
        for rec in result.truth_records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    manifest = {
        "seed": spec.seed,
        "place_terms": result.place_terms,
        "noise_terms": result.noise_terms,
        "centers": {t: [p.lat_deg, p.lon_deg] for t, p in sorted(result.centers.items())},
    }
    paths["manifest"].write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return paths
