"""Matching extracted names against gazetteer entries.

Terms are classified in order: a direct match (normalized names equal,
optionally ignoring spaces), then an indirect match (the term's tokens
appear as a contiguous run inside an entry name), else unmatched and left
for manual review.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import GeoPoint
from .exceptions import DataError
from .extractors import normalize_term

GAZETTEER_COLUMNS = ("name", "latitude", "longitude", "feature_type")
REPORT_COLUMNS = ("term", "category", "matched_name", "source")


@dataclass(frozen=True)
class GazetteerEntry:
    name: str
    name_norm: str
    name_tokens: tuple[str, ...]
    source: str
    location: GeoPoint | None = None
    feature_type: str | None = None

    @classmethod
    def create(cls, name: str, source: str = "", location: GeoPoint | None = None, feature_type: str | None = None):
        norm = normalize_term(name)
        return cls(name, norm, tokenize_name(norm), source, location, feature_type or None)


def tokenize_name(name: str) -> tuple[str, ...]:
    """Whitespace tokens of a normalized name, bare of surrounding punctuation.

    >>> tokenize_name("boise state university (bsu) education building")
    ('boise', 'state', 'university', 'bsu', 'education', 'building')
    """
    return tuple(t for t in (normalize_term(tok) for tok in name.split()) if t)


@dataclass
class MatchReport:
    direct: list[tuple[str, list[GazetteerEntry]]] = field(default_factory=list)
    indirect: list[tuple[str, list[GazetteerEntry]]] = field(default_factory=list)
    unmatched: list[str] = field(default_factory=list)
    excluded: list[str] = field(default_factory=list)

    @property
    def counts(self) -> dict[str, int]:
        return {
            "direct": len(self.direct),
            "indirect": len(self.indirect),
            "unmatched": len(self.unmatched),
        }

    def rows(self) -> list[tuple[str, str, str, str]]:
        out = []
        for category, items in (("direct", self.direct), ("indirect", self.indirect)):
            for term, entries in items:
                for e in entries:
                    out.append((term, category, e.name, e.source))
        out.extend((term, "unmatched", "", "") for term in self.unmatched)
        return out


def load_gazetteer(path, source: str | None = None) -> list[GazetteerEntry]:
    """Read a gazetteer CSV with header ``name,latitude,longitude,feature_type``.

    Rows without a name, or with unparseable coordinates, are skipped; the
    count is on the returned list's ``rejected`` attribute.
    """
    path = Path(path)
    source = source or path.stem
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read gazetteer {path}: {exc}") from exc
    entries = _EntryList()
    with handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            return entries
        if tuple(h.strip() for h in reader.fieldnames) != GAZETTEER_COLUMNS:
            raise DataError(f"{path}: expected header {','.join(GAZETTEER_COLUMNS)}, got {reader.fieldnames}")
        for row in reader:
            name = (row.get("name") or "").strip()
            if not normalize_term(name):
                entries.rejected += 1
                continue
            lat, lon = (row.get("latitude") or "").strip(), (row.get("longitude") or "").strip()
            try:
                location = GeoPoint(float(lat), float(lon)) if lat and lon else None
            except ValueError:
                entries.rejected += 1
                continue
            entries.append(GazetteerEntry.create(name, source, location, (row.get("feature_type") or "").strip()))
    return entries


class _EntryList(list):
    rejected = 0


def _squash(s: str) -> str:
    return s.replace(" ", "")


def direct_match(term: str, entries: Iterable[GazetteerEntry], space_insensitive: bool = True) -> list[GazetteerEntry]:
    """Entries whose normalized name equals ``term`` (also ignoring spaces if asked)."""
    squashed = _squash(term)
    return [
        e for e in entries
        if e.name_norm == term or (space_insensitive and _squash(e.name_norm) == squashed)
    ]


def _contains_run(haystack: Sequence[str], needle: Sequence[str]) -> bool:
    n = len(needle)
    if n == 0 or n > len(haystack):
        return False
    return any(tuple(haystack[i:i + n]) == tuple(needle) for i in range(len(haystack) - n + 1))


def indirect_match(term: str, entries: Iterable[GazetteerEntry]) -> list[GazetteerEntry]:
    """Entries whose name tokens contain the term's tokens as a contiguous run.

    Single generic tokens such as "park" match very broadly; no attempt is
    made to suppress that.
    """
    needle = tokenize_name(term)
    return [e for e in entries if _contains_run(e.name_tokens, needle)]


class GazetteerIndex:
    """Exact-name and token inverted indexes; results equal a linear scan."""

    def __init__(self, entries: Iterable[GazetteerEntry]):
        self.entries = sorted(entries, key=lambda e: (e.name_norm, e.source, e.name))
        self._by_name: dict[str, list[int]] = defaultdict(list)
        self._by_squashed: dict[str, list[int]] = defaultdict(list)
        self._by_token: dict[str, set[int]] = defaultdict(set)
        for i, e in enumerate(self.entries):
            self._by_name[e.name_norm].append(i)
            self._by_squashed[_squash(e.name_norm)].append(i)
            for tok in e.name_tokens:
                self._by_token[tok].add(i)

    def direct(self, term: str, space_insensitive: bool = True) -> list[GazetteerEntry]:
        hits = set(self._by_name.get(term, ()))
        if space_insensitive:
            hits.update(self._by_squashed.get(_squash(term), ()))
        return [self.entries[i] for i in sorted(hits)]

    def indirect(self, term: str) -> list[GazetteerEntry]:
        tokens = tokenize_name(term)
        if not tokens:
            return []
        pools = [self._by_token.get(t, set()) for t in tokens]
        candidates = set.intersection(*pools) if pools else set()
        return [self.entries[i] for i in sorted(candidates) if _contains_run(self.entries[i].name_tokens, tokens)]


def load_exclusions(path) -> set[str]:
    """One term per line; blank lines and ``#`` comments ignored."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read exclusion list {path}: {exc}") from exc
    return {normalize_term(line) for line in lines if line.strip() and not line.lstrip().startswith("#")}


def compare(
    terms: Iterable[str],
    entries: Iterable[GazetteerEntry],
    *,
    space_insensitive: bool = True,
    exclude: Iterable[str] = (),
) -> MatchReport:
    """Partition terms into direct, indirect and unmatched.

    Terms listed in ``exclude`` (already normalized) are set aside in
    ``MatchReport.excluded`` and not classified.
    """
    index = GazetteerIndex(entries)
    skip = set(exclude)
    report = MatchReport()
    for term in sorted(set(terms)):
        if term in skip:
            report.excluded.append(term)
            continue
        hits = index.direct(term, space_insensitive)
        if hits:
            report.direct.append((term, hits))
            continue
        hits = index.indirect(term)
        if hits:
            report.indirect.append((term, hits))
        else:
            report.unmatched.append(term)
    return report


def write_match_report(report: MatchReport, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        writer.writerows(report.rows())
