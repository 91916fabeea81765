"""Harvest local place names from geotagged housing advertisements."""

from .corpus import Advertisement, Corpus, GeoPoint, dedup, load_corpus
from .evaluation import GroundTruth, Metrics, PrCurve, majority_vote, pr_curve, score, select_threshold
from .extractors import (
    CandidateExtractor,
    CandidateSet,
    MentionSpan,
    extract_capitalized,
    extract_preposition_cue,
    load_external_annotations,
    normalize_term,
    union_candidates,
)
from .footprint import DensityGrid, Polygon, convex_hull, kde_contour, kde_surface, to_geojson
from .gazetteer import GazetteerEntry, MatchReport, compare, direct_match, indirect_match, load_gazetteer
from .geo import haversine_m
from .geocluster import (
    NormalizationMode,
    ScaleSet,
    SsiRanker,
    SsiResult,
    entropy_at_scale,
    medoid,
    rank_candidates,
    spatial_filter,
    ssi,
)
from .pipeline import PipelineConfig, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "Advertisement",
    "CandidateExtractor",
    "CandidateSet",
    "compare",
    "convex_hull",
    "Corpus",
    "dedup",
    "DensityGrid",
    "direct_match",
    "entropy_at_scale",
    "extract_capitalized",
    "extract_preposition_cue",
    "GazetteerEntry",
    "GeoPoint",
    "GroundTruth",
    "haversine_m",
    "indirect_match",
    "kde_contour",
    "kde_surface",
    "load_corpus",
    "load_external_annotations",
    "load_gazetteer",
    "majority_vote",
    "MatchReport",
    "medoid",
    "MentionSpan",
    "Metrics",
    "NormalizationMode",
    "normalize_term",
    "PipelineConfig",
    "Polygon",
    "pr_curve",
    "PrCurve",
    "rank_candidates",
    "run_pipeline",
    "ScaleSet",
    "score",
    "select_threshold",
    "spatial_filter",
    "ssi",
    "SsiRanker",
    "SsiResult",
    "to_geojson",
    "union_candidates",
]
