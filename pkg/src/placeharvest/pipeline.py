"""End-to-end orchestration: ingest, extract, rank, evaluate, footprint, compare.

Each stage reads its declared inputs and writes files into the output
directory, so intermediates can be inspected or re-run one at a time from
the command line.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .corpus import Corpus, GeoPoint, dedup, load_corpus, write_corpus
from .evaluation import load_annotations, majority_vote, pr_curve, score, select_threshold, write_curve_csv
from .exceptions import ConfigError, DataError, PlaceHarvestError
from .extractors import CandidateEntry, CandidateExtractor, CandidateSet, MentionSpan
from .footprint import dump_geojson, hull_or_points, kde_or_points, to_geojson
from .gazetteer import compare, load_exclusions, load_gazetteer, write_match_report
from .geocluster import NormalizationMode, ScaleSet, rank_candidates, spatial_filter, write_ranked_csv

logger = logging.getLogger(__name__)

PLACES_COLUMNS = ("term", "normalized_score", "n_filtered")


@dataclass
class PipelineConfig:
    ads: str | None = None
    region_id: str = "region"
    annotations: list[str] = field(default_factory=list)
    ground_truth: str | None = None
    gazetteers: list[dict] = field(default_factory=list)
    exclusions: str | None = None
    alpha_m: float = 2.0
    mode: str = "inv_sqrt"
    min_points: int = 3
    threshold: float | None = None
    top_n: int = 10
    quorum: int = 2
    extractors: list[str] = field(default_factory=lambda: ["capitalized", "cue"])
    cues: list[str] | None = None
    stopwords: list[str] | None = None
    labels: list[str] | None = None
    footprint: str = "hull"
    kde_bandwidth_m: float | None = None
    kde_cell_size_m: float = 50.0
    kde_mass_level: float = 0.90
    out_dir: str = "out"
    threads: int = 1

    @classmethod
    def load(cls, path=None, **overrides) -> "PipelineConfig":
        """Build a config from an optional JSON file; non-None overrides win."""
        data: dict = {}
        if path is not None:
            try:
                data = json.loads(Path(path).read_text(encoding="utf-8"))
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
            if not isinstance(data, dict):
                raise ConfigError(f"config {path} must hold a JSON object")
            base = Path(path).parent
            for key in ("ads", "ground_truth", "exclusions"):
                if data.get(key):
                    data[key] = str(base / data[key])
            data["annotations"] = [str(base / p) for p in data.get("annotations", [])]
            data["gazetteers"] = [
                {**g, "path": str(base / g["path"])} if isinstance(g, dict) else {"path": str(base / g)}
                for g in data.get("gazetteers", [])
            ]
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        try:
            config = cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        config.validate()
        return config

    def validate(self) -> None:
        try:
            ScaleSet(float(self.alpha_m))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        try:
            NormalizationMode(self.mode)
        except ValueError:
            raise ConfigError(f"mode must be one of {[m.value for m in NormalizationMode]}, got {self.mode!r}") from None
        if int(self.min_points) < 2:
            raise ConfigError("min_points must be at least 2")
        if int(self.threads) < 1:
            raise ConfigError("threads must be at least 1")
        if self.threshold is not None and not 0.0 <= float(self.threshold) <= 1.0:
            raise ConfigError("threshold must lie in [0, 1]")
        if self.footprint not in ("hull", "kde"):
            raise ConfigError("footprint must be 'hull' or 'kde'")
        for g in self.gazetteers:
            if not isinstance(g, dict) or "path" not in g:
                raise ConfigError("each gazetteer needs a 'path'")

    def to_dict(self) -> dict:
        return asdict(self)


class StageError(PlaceHarvestError):
    """Wraps a failure with the name of the pipeline stage it came from."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 3)


class _Stage:
    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        logger.info("stage %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is None or isinstance(exc, StageError):
            return False
        if isinstance(exc, (OSError, ValueError, KeyError)) and not isinstance(exc, PlaceHarvestError):
            exc = DataError(str(exc))
        raise StageError(self.name, exc) from exc


def candidates_to_json(candidates: CandidateSet, region_id: str = "") -> dict:
    return {
        "region_id": region_id,
        "terms": [
            {
                "term": term,
                "post_ids": entry.post_ids,
                "points_latlon": [[p.lat_deg, p.lon_deg] for p in entry.points],
                "mentions": [
                    {"post_id": m.post_id, "start": m.start, "end": m.end, "surface": m.surface, "source": m.source}
                    for m in entry.mentions
                ],
            }
            for term, entry in sorted(candidates.entries.items())
        ],
    }


def candidates_from_json(doc: dict) -> CandidateSet:
    out = CandidateSet()
    for item in doc["terms"]:
        out.entries[item["term"]] = CandidateEntry(
            mentions=[MentionSpan(**m) for m in item.get("mentions", [])],
            post_ids=list(item["post_ids"]),
            points=[GeoPoint(float(a), float(b)) for a, b in item["points_latlon"]],
        )
    return out


def write_json(doc, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def read_candidates(path) -> CandidateSet:
    try:
        return candidates_from_json(json.loads(Path(path).read_text(encoding="utf-8")))
    except OSError as exc:
        raise DataError(f"cannot read candidates {path}: {exc}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed candidates file: {exc}") from exc


def write_places(ranked, threshold: float, path) -> list[str]:
    selected = [r for r in ranked if r.normalized_score <= threshold]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PLACES_COLUMNS)
        for r in selected:
            writer.writerow([r.term, f"{r.normalized_score:.12g}", r.n_filtered])
    return [r.term for r in selected]


def read_terms(path) -> list[str]:
    """Terms from a places/ranked CSV (``term`` column) or a plain one-per-line list."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read term list {path}: {exc}") from exc
    lines = text.splitlines()
    if lines and lines[0].split(",")[0] == "term":
        return [row["term"] for row in csv.DictReader(lines)]
    return [line.strip() for line in lines if line.strip()]


def build_footprints(candidates: CandidateSet, terms, config: PipelineConfig) -> dict:
    """GeoJSON footprints from each term's spatially filtered points."""

    def one(term):
        pts = spatial_filter(candidates[term].points)
        if config.footprint == "kde":
            geom = kde_or_points(pts, config.kde_bandwidth_m, config.kde_cell_size_m, config.kde_mass_level)
        else:
            geom = hull_or_points(pts)
        return term, geom

    terms = [t for t in terms if t in candidates]
    if config.threads > 1 and len(terms) > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            named = list(pool.map(one, terms))
    else:
        named = [one(t) for t in terms]
    return to_geojson(named)


def run_pipeline(config: PipelineConfig) -> dict[str, Path]:
    """Run every stage and return the paths of the artifacts written.

    Raises :class:`StageError` naming the failing stage.
    """
    config.validate()
    if config.ads is None:
        raise ConfigError("config needs an 'ads' path")
    if config.ground_truth is None and config.threshold is None:
        raise ConfigError("without ground_truth an explicit threshold is required")
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    with _Stage("ingest"):
        corpus: Corpus = dedup(load_corpus(config.ads, config.region_id))
        paths["ads"] = out / "ads.dedup.csv"
        write_corpus(corpus, paths["ads"])

    with _Stage("extract"):
        extractor = CandidateExtractor(
            extractors=tuple(config.extractors),
            annotations=tuple(config.annotations),
            cues=config.cues,
            stopwords=config.stopwords,
            labels=config.labels,
        )
        candidates = extractor.fit_transform(corpus)
        paths["candidates"] = out / "candidates.json"
        write_json(candidates_to_json(candidates, config.region_id), paths["candidates"])

    with _Stage("rank"):
        ranked = rank_candidates(
            candidates, ScaleSet(float(config.alpha_m)), config.mode, int(config.min_points), threads=int(config.threads)
        )
        paths["ranked"] = out / "ranked.csv"
        write_ranked_csv(ranked, paths["ranked"])

    threshold = config.threshold
    source = "config"
    metrics = None
    if config.ground_truth is not None:
        with _Stage("curve"):
            truth = majority_vote(load_annotations(config.ground_truth), config.quorum)
            curve = pr_curve(ranked, truth)
            paths["curve"] = out / "curve.csv"
            write_curve_csv(curve, paths["curve"])
        with _Stage("select-threshold"):
            if threshold is None:
                threshold = select_threshold(curve, config.top_n)
                source = "curve"
            metrics = score({r.term for r in ranked if r.normalized_score <= threshold}, truth)

    with _Stage("select"):
        paths["threshold"] = out / "threshold.json"
        doc = {"threshold": threshold, "source": source, "mode": NormalizationMode(config.mode).value}
        if metrics is not None:
            doc.update(precision=metrics.precision, recall=metrics.recall, f_score=metrics.f_score)
        write_json(doc, paths["threshold"])
        paths["places"] = out / "places.csv"
        places = write_places(ranked, threshold, paths["places"])

    with _Stage("footprint"):
        paths["footprints"] = out / "footprints.geojson"
        dump_geojson(build_footprints(candidates, places, config), paths["footprints"])

    if config.gazetteers:
        with _Stage("compare"):
            exclude = load_exclusions(config.exclusions) if config.exclusions else set()
            for g in config.gazetteers:
                source_label = g.get("source") or Path(g["path"]).stem
                report = compare(places, load_gazetteer(g["path"], source_label), exclude=exclude)
                key = f"matches_{source_label}"
                paths[key] = out / f"{key}.csv"
                write_match_report(report, paths[key])

    return paths
