"""Loading, validation and de-duplication of geotagged advertisement corpora.

The ads CSV has the header ``post_id,repost_id,post_time,longitude,latitude,text``.
Rows without usable coordinates are skipped and reported, never fatal on
their own.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .exceptions import DataError

logger = logging.getLogger(__name__)

ADS_COLUMNS = ("post_id", "repost_id", "post_time", "longitude", "latitude", "text")
PREFIX_CHARS = 50


@dataclass(frozen=True, slots=True)
class GeoPoint:
    lat_deg: float
    lon_deg: float

    def __post_init__(self):
        if not -90.0 <= self.lat_deg <= 90.0:
            raise ValueError(f"latitude {self.lat_deg} outside [-90, 90]")
        if not -180.0 <= self.lon_deg <= 180.0:
            raise ValueError(f"longitude {self.lon_deg} outside [-180, 180]")


@dataclass(frozen=True, slots=True)
class Advertisement:
    post_id: str
    post_time: datetime
    location: GeoPoint
    text: str
    repost_id: str | None = None

    def __post_init__(self):
        if not self.post_id:
            raise ValueError("post_id must be non-empty")
        if not self.text.strip():
            raise ValueError(f"ad {self.post_id} has empty text")
        if self.post_time.tzinfo is None:
            raise ValueError(f"ad {self.post_id} has a naive timestamp")


@dataclass(frozen=True)
class Corpus:
    """An ordered, immutable collection of ads for one region.

    ``skipped`` records ``(row_number, reason)`` for rows dropped on load.
    """

    region_id: str
    ads: tuple[Advertisement, ...]
    skipped: tuple[tuple[int, str], ...] = field(default=())

    def __len__(self):
        return len(self.ads)

    def __iter__(self):
        return iter(self.ads)

    def by_id(self) -> dict[str, Advertisement]:
        return {ad.post_id: ad for ad in self.ads}


def parse_time(value: str) -> datetime:
    """Parse an ISO 8601 timestamp and convert it to UTC.

    Naive timestamps are taken to be UTC already.
    """
    value = value.strip()
    if value.endswith(("Z", "z")):
        value = value[:-1] + "+00:00"
    ts = datetime.fromisoformat(value)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_time(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _parse_row(row: dict[str, str]) -> Advertisement:
    lon_raw = (row.get("longitude") or "").strip()
    lat_raw = (row.get("latitude") or "").strip()
    if not lon_raw or not lat_raw:
        raise ValueError("missing coordinates")
    location = GeoPoint(float(lat_raw), float(lon_raw))
    repost = (row.get("repost_id") or "").strip() or None
    return Advertisement(
        post_id=(row.get("post_id") or "").strip(),
        repost_id=repost,
        post_time=parse_time(row.get("post_time") or ""),
        location=location,
        text=row.get("text") or "",
    )


def load_corpus(path, region_id: str) -> Corpus:
    """Read an ads CSV into a :class:`Corpus`.

    Per-row problems (missing or out-of-range coordinates, bad timestamps,
    empty text) are collected in ``Corpus.skipped``. A :class:`DataError` is
    raised for an unreadable file, a wrong header, or when every data row
    fails.
    """
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read ads file {path}: {exc}") from exc

    ads: list[Advertisement] = []
    skipped: list[tuple[int, str]] = []
    with handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames
        if header is None or [h.strip() for h in header] != list(ADS_COLUMNS):
            raise DataError(f"{path}: expected header {','.join(ADS_COLUMNS)}, got {header}")
        try:
            for row_number, row in enumerate(reader, start=2):
                try:
                    ads.append(_parse_row(row))
                except (ValueError, TypeError) as exc:
                    skipped.append((row_number, str(exc)))
        except csv.Error as exc:
            raise DataError(f"{path}: malformed CSV: {exc}") from exc

    if skipped and not ads:
        raise DataError(f"{path}: all {len(skipped)} rows failed to parse; first: {skipped[0]}")
    if skipped:
        logger.warning("%s: skipped %d rows", path, len(skipped))
    return Corpus(region_id=region_id, ads=tuple(ads), skipped=tuple(skipped))


def write_corpus(corpus: Corpus, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ADS_COLUMNS)
        for ad in corpus.ads:
            writer.writerow([
                ad.post_id,
                ad.repost_id or "",
                format_time(ad.post_time),
                repr(ad.location.lon_deg),
                repr(ad.location.lat_deg),
                ad.text,
            ])


def _canonical_key(ad: Advertisement):
    # post_time then post_id; the rest only orders exact-id collisions
    return (ad.post_time, ad.post_id, ad.text, ad.repost_id or "", ad.location.lat_deg, ad.location.lon_deg)


def dedup(corpus: Corpus) -> Corpus:
    """Drop reposts and ads whose first 50 characters repeat an earlier ad.

    Ads are visited in (post_time, post_id) order so the earliest copy is
    kept. An ad is a repost when its ``repost_id`` names an ad seen earlier,
    either kept or itself dropped as a duplicate, so chains of reposts
    collapse onto the first copy. The text prefix is compared raw, without
    case folding.
    """
    ordered = sorted(corpus.ads, key=_canonical_key)
    seen_ids: set[str] = set()
    seen_prefixes: set[str] = set()
    kept: list[Advertisement] = []
    for ad in ordered:
        duplicate = (
            ad.post_id in seen_ids
            or (ad.repost_id is not None and ad.repost_id in seen_ids)
            or ad.text[:PREFIX_CHARS] in seen_prefixes
        )
        seen_ids.add(ad.post_id)
        if ad.repost_id is not None:
            seen_ids.add(ad.repost_id)
        if duplicate:
            continue
        kept.append(ad)
        seen_prefixes.add(ad.text[:PREFIX_CHARS])
    return Corpus(region_id=corpus.region_id, ads=tuple(kept), skipped=corpus.skipped)
