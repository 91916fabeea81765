"""Multi-scale spatial clustering used to rank candidates by geo-indicativeness.

For each candidate term the mention locations are first cleaned with a
medoid / third-quartile filter. The surviving points are linked at
geometrically growing distance thresholds ``alpha**k`` meters, and the
Shannon entropy (bits) of the connected-component size distribution is
summed over all scales until the graph is fully connected. Terms whose
points collapse into one cluster quickly get low sums and rank first.
"""

from __future__ import annotations

import csv
import enum
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_points, check_positive_int
from .exceptions import DataError, InvariantError
from .geo import distance_matrix
from .unionfind import DisjointSet

RANKED_COLUMNS = ("term", "n_raw", "n_filtered", "entropy_sum", "adjusted_sum", "normalized_score")


class NormalizationMode(str, enum.Enum):
    """How the raw entropy sum is scaled by the point count ``n``."""

    NONE = "none"
    INV_SQRT = "inv_sqrt"
    INV_LINEAR = "inv_linear"
    INV_LOG = "inv_log"

    def factor(self, n: int) -> float:
        if self is NormalizationMode.NONE:
            return 1.0
        if self is NormalizationMode.INV_SQRT:
            return 1.0 / math.sqrt(n)
        if self is NormalizationMode.INV_LINEAR:
            return 1.0 / n
        if n <= 1:
            raise ValueError("inv_log normalization needs at least 2 points")
        return 1.0 / math.log2(n)


@dataclass(frozen=True)
class ScaleSet:
    """Distance thresholds ``alpha**k`` meters for k = 1, 2, ..."""

    alpha: float = 2.0

    def __post_init__(self):
        if not self.alpha > 1.0:
            raise ValueError(f"alpha must be > 1, got {self.alpha}")

    def radius(self, k: int) -> float:
        return self.alpha ** k


@dataclass
class SsiResult:
    term: str
    n_raw: int
    n_filtered: int
    entropies: list[tuple[int, float]] = field(default_factory=list)
    entropy_sum: float = 0.0
    adjusted_sum: float = 0.0
    normalized_score: float = 0.0

    @property
    def k_max(self) -> int:
        return self.entropies[-1][0] if self.entropies else 0


def medoid(points) -> int:
    """Index of the point with the smallest summed distance to all others.

    Ties go to the lowest index.
    """
    arr = check_points(points, min_points=1)
    return _medoid_from_matrix(distance_matrix(arr))


def _medoid_from_matrix(d: np.ndarray) -> int:
    return int(np.argmin(d.sum(axis=1)))


def third_quartile(values) -> float:
    """75th percentile using the (n + 1) * p position with linear interpolation.

    The 1-based position is clamped to ``[1, n]``.
    """
    xs = sorted(float(v) for v in values)
    if not xs:
        raise ValueError("third_quartile of an empty sequence")
    n = len(xs)
    pos = min(max((n + 1) * 0.75, 1.0), float(n))
    lo = int(math.floor(pos))
    frac = pos - lo
    if lo >= n:
        return xs[-1]
    return xs[lo - 1] + frac * (xs[lo] - xs[lo - 1])


def spatial_filter(points) -> list:
    """Keep points no farther from the medoid than the third-quartile distance.

    The medoid is always retained and input order is preserved.
    """
    pts = list(points)
    if not pts:
        raise ValueError("spatial_filter needs at least one point")
    keep = _filter_mask(check_points(pts))
    return [p for p, k in zip(pts, keep) if k]


def _filter_mask(arr: np.ndarray, d: np.ndarray | None = None) -> np.ndarray:
    if d is None:
        d = distance_matrix(arr)
    to_medoid = d[_medoid_from_matrix(d)]
    return to_medoid <= third_quartile(to_medoid)


def entropy_at_scale(component_sizes: Sequence[int], n: int) -> float:
    """Shannon entropy in bits of a partition of ``n`` points into components."""
    sizes = [int(s) for s in component_sizes]
    if n < 1 or any(s <= 0 for s in sizes) or sum(sizes) != n:
        raise ValueError(f"component sizes {sizes} do not partition {n} points")
    h = 0.0
    for s in sorted(sizes):
        p = s / n
        h -= p * math.log2(p)
    # -0.0 for a single component
    return h + 0.0


def ssi(points, scales: ScaleSet | None = None, mode=NormalizationMode.INV_SQRT, *, term: str = "", n_raw: int | None = None) -> SsiResult:
    """Multi-scale entropy sum of a point set.

    Pairwise edges are sorted once and merged into a disjoint-set forest as
    the radius grows, which gives the same components as rebuilding the
    threshold graph at every scale. Iteration stops at the first scale where
    everything is connected; that scale's entropy is 0, as is every later
    one.
    """
    scales = scales or ScaleSet()
    mode = NormalizationMode(mode)
    arr = check_points(points, min_points=2)
    return _ssi_from_matrix(distance_matrix(arr), scales, mode, term=term, n_raw=n_raw)


def _ssi_from_matrix(d: np.ndarray, scales: ScaleSet, mode: NormalizationMode, *, term: str = "", n_raw: int | None = None) -> SsiResult:
    n = d.shape[0]
    if n < 2:
        raise ValueError("ssi needs at least 2 points")
    iu, ju = np.triu_indices(n, k=1)
    weights = d[iu, ju]
    order = np.argsort(weights, kind="stable")
    iu, ju, weights = iu[order].tolist(), ju[order].tolist(), weights[order].tolist()

    forest = DisjointSet(n)
    entropies: list[tuple[int, float]] = []
    e = 0
    k = 0
    entropy = math.log2(n)
    changed = True
    while True:
        k += 1
        radius = scales.radius(k)
        if math.isinf(radius):
            raise InvariantError(f"scale overflow before full connectivity for term {term!r}")
        while e < len(weights) and weights[e] <= radius:
            changed |= forest.union(iu[e], ju[e])
            e += 1
        if changed:
            entropy = entropy_at_scale(forest.component_sizes(), n)
            changed = False
        entropies.append((k, entropy))
        if forest.n_components == 1:
            break

    total = math.fsum(h for _, h in entropies)
    return SsiResult(
        term=term,
        n_raw=n if n_raw is None else n_raw,
        n_filtered=n,
        entropies=entropies,
        entropy_sum=total,
        adjusted_sum=total * mode.factor(n),
    )


def _score_one(term: str, points, scales: ScaleSet, mode: NormalizationMode, min_points: int) -> SsiResult | None:
    arr = check_points(points)
    if arr.shape[0] == 0:
        return None
    d = distance_matrix(arr)
    keep = _filter_mask(arr, d)
    n_filtered = int(keep.sum())
    if n_filtered < min_points:
        return None
    sub = d[np.ix_(keep, keep)]
    return _ssi_from_matrix(sub, scales, mode, term=term, n_raw=arr.shape[0])


def _point_sets(candidates) -> dict:
    if hasattr(candidates, "point_sets"):
        return candidates.point_sets()
    return dict(candidates)


def min_max_normalize(results: list[SsiResult], lo: float | None = None, hi: float | None = None) -> None:
    """Rescale ``adjusted_sum`` into ``normalized_score`` in place.

    When every sum is equal the scores are all 0.
    """
    if not results:
        return
    values = [r.adjusted_sum for r in results]
    lo = min(values) if lo is None else lo
    hi = max(values) if hi is None else hi
    span = hi - lo
    for r in results:
        r.normalized_score = 0.0 if span <= 0 else (r.adjusted_sum - lo) / span


def sort_results(results: list[SsiResult]) -> list[SsiResult]:
    return sorted(results, key=lambda r: (r.normalized_score, -r.n_filtered, r.term))


def rank_candidates(
    candidates,
    scales: ScaleSet | None = None,
    mode=NormalizationMode.INV_SQRT,
    min_points: int = 3,
    *,
    threads: int = 1,
) -> list[SsiResult]:
    """Filter, score and rank every candidate, most geo-indicative first.

    ``candidates`` is a :class:`~placeharvest.extractors.CandidateSet` or any
    mapping of term to points. Terms left with fewer than ``min_points``
    points after the spatial filter are dropped. Adjusted sums are min-max
    normalized across the survivors; ties in the final order go to the term
    with more points, then alphabetically.
    """
    scales = scales or ScaleSet()
    mode = NormalizationMode(mode)
    min_points = check_positive_int(min_points, "min_points", minimum=2)
    threads = check_positive_int(threads, "threads")
    point_sets = _point_sets(candidates)
    terms = sorted(point_sets)

    def work(term):
        return _score_one(term, point_sets[term], scales, mode, min_points)

    if threads > 1 and len(terms) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scored = list(pool.map(work, terms))
    else:
        scored = [work(t) for t in terms]
    results = [r for r in scored if r is not None]
    min_max_normalize(results)
    return sort_results(results)


class SsiRanker(BaseEstimator):
    """Estimator wrapper around :func:`rank_candidates`.

    ``fit`` scores a candidate set and learns the min/max used to normalize
    adjusted sums. With ground truth it also picks an operating threshold
    from the precision-recall sweep unless ``threshold`` is given.
    ``transform`` returns normalized scores for any candidate set and
    ``predict`` returns the terms at or below the threshold.

    Parameters
    ----------
    alpha : float
        Base of the distance scales in meters.
    mode : str
        One of ``none``, ``inv_sqrt``, ``inv_linear``, ``inv_log``.
    min_points : int
        Minimum points a term needs after spatial filtering.
    threshold : float, optional
        Fixed cut on the normalized score.
    top_n : int
        Size of the top-F pool used by threshold selection.
    threads : int
        Worker threads for per-term scoring.
    """

    def __init__(self, alpha=2.0, mode="inv_sqrt", min_points=3, threshold=None, top_n=10, threads=1):
        self.alpha = alpha
        self.mode = mode
        self.min_points = min_points
        self.threshold = threshold
        self.top_n = top_n
        self.threads = threads

    def _rank(self, X):
        return rank_candidates(X, ScaleSet(self.alpha), self.mode, self.min_points, threads=self.threads)

    def fit(self, X, y=None):
        from .evaluation import pr_curve, select_threshold

        self.ranking_ = self._rank(X)
        sums = [r.adjusted_sum for r in self.ranking_]
        self.min_ = min(sums) if sums else 0.0
        self.max_ = max(sums) if sums else 0.0
        self.curve_ = None
        if self.threshold is not None:
            self.threshold_ = float(self.threshold)
        elif y is not None:
            self.curve_ = pr_curve(self.ranking_, y)
            self.threshold_ = select_threshold(self.curve_, self.top_n)
        else:
            self.threshold_ = None
        return self

    def transform(self, X) -> dict[str, float]:
        """Normalized score per surviving term, using the fitted min/max."""
        check_is_fitted(self, "ranking_")
        results = self._rank(X)
        min_max_normalize(results, self.min_, self.max_)
        return {r.term: r.normalized_score for r in sort_results(results)}

    def fit_transform(self, X, y=None):
        self.fit(X, y)
        return {r.term: r.normalized_score for r in self.ranking_}

    def predict(self, X=None) -> list[str]:
        """Terms whose normalized score is at most ``threshold_``."""
        check_is_fitted(self, "ranking_")
        if self.threshold_ is None:
            raise ValueError("no threshold: pass threshold= or fit with ground truth")
        scores = {r.term: r.normalized_score for r in self.ranking_} if X is None else self.transform(X)
        return [t for t, s in scores.items() if s <= self.threshold_]


def write_ranked_csv(results: Sequence[SsiResult], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RANKED_COLUMNS)
        for r in results:
            writer.writerow([
                r.term,
                r.n_raw,
                r.n_filtered,
                f"{r.entropy_sum:.12g}",
                f"{r.adjusted_sum:.12g}",
                f"{r.normalized_score:.12g}",
            ])


def read_ranked_csv(path) -> list[SsiResult]:
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != RANKED_COLUMNS:
                raise DataError(f"{path}: expected header {','.join(RANKED_COLUMNS)}")
            return [
                SsiResult(
                    term=row["term"],
                    n_raw=int(row["n_raw"]),
                    n_filtered=int(row["n_filtered"]),
                    entropy_sum=float(row["entropy_sum"]),
                    adjusted_sum=float(row["adjusted_sum"]),
                    normalized_score=float(row["normalized_score"]),
                )
                for row in reader
            ]
    except OSError as exc:
        raise DataError(f"cannot read ranked file {path}: {exc}") from exc
    except (KeyError, ValueError) as exc:
        if isinstance(exc, DataError):
            raise
        raise DataError(f"{path}: malformed ranked row: {exc}") from exc
