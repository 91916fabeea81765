"""Ground truth, precision/recall/F, threshold sweeps and threshold selection."""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .exceptions import DataError
from .extractors import normalize_term

CURVE_COLUMNS = ("threshold", "precision", "recall", "f_score")
N_STEPS = 100


@dataclass(frozen=True)
class AnnotationRecord:
    post_id: str
    annotator_id: str
    names: frozenset[str]

    @classmethod
    def create(cls, post_id: str, annotator_id: str, names: Iterable[str]) -> "AnnotationRecord":
        cleaned = frozenset(t for t in (normalize_term(n) for n in names) if t)
        return cls(str(post_id), str(annotator_id), cleaned)


@dataclass
class GroundTruth:
    per_post: dict[str, frozenset[str]] = field(default_factory=dict)

    @property
    def all_names(self) -> frozenset[str]:
        out: set[str] = set()
        for names in self.per_post.values():
            out |= names
        return frozenset(out)


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f_score: float


@dataclass
class PrCurve:
    points: list[tuple[float, Metrics]]

    def __len__(self):
        return len(self.points)

    @property
    def thresholds(self) -> list[float]:
        return [t for t, _ in self.points]


def load_annotations(path) -> list[AnnotationRecord]:
    """Read ground-truth JSONL: ``{"post_id", "annotator_id", "names": [...]}`` per line."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read ground truth {path}: {exc}") from exc
    records = []
    seen = set()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            rec = AnnotationRecord.create(obj["post_id"], obj["annotator_id"], obj.get("names", []))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DataError(f"{path}:{lineno}: malformed ground-truth line: {exc}") from exc
        key = (rec.post_id, rec.annotator_id)
        if key in seen:
            raise DataError(f"{path}:{lineno}: duplicate record for post {key[0]} annotator {key[1]}")
        seen.add(key)
        records.append(rec)
    return records


def majority_vote(records: Sequence[AnnotationRecord], quorum: int = 2) -> GroundTruth:
    """Keep, per post, the names labelled by at least ``quorum`` annotators."""
    annotators = {r.annotator_id for r in records}
    if len(annotators) < quorum:
        raise ValueError(f"need at least {quorum} distinct annotators, found {len(annotators)}")
    votes: dict[str, dict[str, set[str]]] = defaultdict(lambda: defaultdict(set))
    posts = set()
    for r in records:
        posts.add(r.post_id)
        for name in r.names:
            votes[r.post_id][name].add(r.annotator_id)
    per_post = {
        post: frozenset(name for name, who in votes[post].items() if len(who) >= quorum)
        for post in sorted(posts)
    }
    return GroundTruth(per_post=per_post)


def f_score(precision: float, recall: float) -> float:
    if precision + recall <= 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def score(extracted: Iterable[str], truth: GroundTruth) -> Metrics:
    """Set-based precision, recall and F against all ground-truth names."""
    relevant = truth.all_names
    if not relevant:
        raise ValueError("ground truth contains no place names")
    extracted = set(extracted)
    hits = len(extracted & relevant)
    precision = hits / len(extracted) if extracted else 0.0
    recall = hits / len(relevant)
    return Metrics(precision, recall, f_score(precision, recall))


def thresholds(steps: int = N_STEPS) -> list[float]:
    return [i / steps for i in range(steps + 1)]


def pr_curve(ranked, truth: GroundTruth) -> PrCurve:
    """Metrics at thresholds 0.00, 0.01, ..., 1.00 on the normalized score.

    At threshold ``t`` the extracted set is every term scoring ``<= t``.
    """
    items = [(r.term, r.normalized_score) for r in ranked]
    points = []
    for t in thresholds():
        extracted = {term for term, s in items if s <= t}
        points.append((t, score(extracted, truth)))
    return PrCurve(points)


def select_threshold(curve: PrCurve, top_n: int = 10) -> float:
    """Pick the highest-recall threshold among the ``top_n`` best F-scores.

    Every threshold tied with the ``top_n``-th F value is admitted to the
    pool. Remaining recall ties go to the smaller threshold.
    """
    if not curve.points:
        raise ValueError("empty precision-recall curve")
    by_f = sorted(curve.points, key=lambda p: -p[1].f_score)
    cutoff = by_f[min(top_n, len(by_f)) - 1][1].f_score
    pool = [p for p in curve.points if p[1].f_score >= cutoff]
    best = min(pool, key=lambda p: (-p[1].recall, p[0]))
    return best[0]


def write_curve_csv(curve: PrCurve, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CURVE_COLUMNS)
        for t, m in curve.points:
            writer.writerow([f"{t:.2f}", f"{m.precision:.12g}", f"{m.recall:.12g}", f"{m.f_score:.12g}"])


def read_curve_csv(path) -> PrCurve:
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != CURVE_COLUMNS:
                raise DataError(f"{path}: expected header {','.join(CURVE_COLUMNS)}")
            points = [
                (float(row["threshold"]), Metrics(float(row["precision"]), float(row["recall"]), float(row["f_score"])))
                for row in reader
            ]
    except OSError as exc:
        raise DataError(f"cannot read curve file {path}: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, DataError):
            raise
        raise DataError(f"{path}: malformed curve row: {exc}") from exc
    return PrCurve(points)
