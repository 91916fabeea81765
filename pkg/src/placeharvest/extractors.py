"""Place-name candidate extraction and the union of extractor outputs.

Two heuristic extractors are built in. Spans from external NER tools come
in through an annotations JSONL file. Every source yields
:class:`MentionSpan` objects, and :func:`union_candidates` pools them into a
:class:`CandidateSet` keyed by normalized term.
"""

from __future__ import annotations

import json
import logging
import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from sklearn.base import BaseEstimator, TransformerMixin

from .corpus import Corpus, GeoPoint
from .exceptions import DataError

logger = logging.getLogger(__name__)

DEFAULT_STOPWORDS = frozenset(
    """
    a an the this that these those my our your his her its their
    and or but nor so yet
    in on at to from of for by with near into onto over under above below
    about across after before behind between beyond during inside outside
    through throughout toward towards upon within without around along
    off out up down via per than
    i we you he she it they me us him them is are was were be been am
    january february march april may june july august september october
    november december jan feb mar apr jun jul aug sep sept oct nov dec
    monday tuesday wednesday thursday friday saturday sunday
    mon tue tues wed thu thur thurs fri sat sun
    """.split()
)

DEFAULT_CUES = (
    "in",
    "near",
    "at",
    "close to",
    "minutes from",
    "walking distance to",
    "heart of",
)

MAX_RUN_TOKENS = 4
CAPS_GUARD_RATIO = 0.8
SHOUT_RUN = 3

_WORD = r"\w+(?:['’-]\w+)*"
_TOKEN_RE = re.compile(rf"(?P<word>{_WORD})|(?P<punct>[.,;:!?()\[\]\n\"|])")


@dataclass(frozen=True, slots=True)
class MentionSpan:
    post_id: str
    start: int
    end: int
    surface: str
    source: str


@dataclass
class CandidateEntry:
    """Mentions of one normalized term and one point per mentioning ad."""

    mentions: list[MentionSpan] = field(default_factory=list)
    post_ids: list[str] = field(default_factory=list)
    points: list[GeoPoint] = field(default_factory=list)


@dataclass
class CandidateSet:
    entries: dict[str, CandidateEntry] = field(default_factory=dict)
    dropped: int = 0

    def __len__(self):
        return len(self.entries)

    def __contains__(self, term):
        return term in self.entries

    def __getitem__(self, term) -> CandidateEntry:
        return self.entries[term]

    def terms(self) -> list[str]:
        return sorted(self.entries)

    def point_sets(self) -> dict[str, list[GeoPoint]]:
        return {term: list(entry.points) for term, entry in self.entries.items()}


def normalize_term(raw: str) -> str:
    """Lowercase, trim surrounding punctuation/whitespace, collapse inner spaces.

    >>> normalize_term("  K-Town!! ")
    'k-town'
    """
    text = " ".join(raw.lower().split())
    start, end = 0, len(text)
    while start < end and not text[start].isalnum():
        start += 1
    while end > start and not text[end - 1].isalnum():
        end -= 1
    return text[start:end]


def _tokenize(text: str):
    """Yield (kind, start, end, token) where kind is 'word' or 'punct'."""
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        yield kind, m.start(), m.end(), m.group()


def _is_all_caps(token: str) -> bool:
    letters = [c for c in token if c.isalpha()]
    return bool(letters) and all(c.isupper() for c in letters)


def _is_name_like(token: str) -> bool:
    if not token[0].isupper():
        return False
    if _is_all_caps(token):
        return 2 <= len(token) <= 6
    return any(c.islower() for c in token[1:])


def _trim_stopwords(run, stopwords):
    lo, hi = 0, len(run)
    while lo < hi and run[lo][2].lower() in stopwords:
        lo += 1
    while hi > lo and run[hi - 1][2].lower() in stopwords:
        hi -= 1
    return run[lo:hi]


def _span(text, run, post_id, source) -> MentionSpan:
    start, end = run[0][0], run[-1][1]
    return MentionSpan(post_id, start, end, text[start:end], source)


def extract_capitalized(
    text: str,
    *,
    post_id: str = "",
    stopwords: Iterable[str] | None = None,
    max_tokens: int = MAX_RUN_TOKENS,
) -> list[MentionSpan]:
    """Find runs of 1 to ``max_tokens`` adjacent capitalized tokens.

    A token qualifies when it starts uppercase and contains a lowercase
    letter ("SoHo", "K-Town"), or is all caps with 2 to 6 characters
    ("BSU"). Tokens are adjacent only when separated by whitespace. Runs are
    trimmed of leading and trailing stopwords; runs still longer than
    ``max_tokens`` are discarded.

    Shouting is ignored: when more than 80% of the words are all caps the
    whole text yields nothing, and any stretch of three or more consecutive
    all-caps words contributes no tokens.
    """
    stop = DEFAULT_STOPWORDS if stopwords is None else frozenset(w.lower() for w in stopwords)
    tokens = list(_tokenize(text))
    words = [t for t in tokens if t[0] == "word" and any(c.isalpha() for c in t[3])]
    if not words:
        return []
    caps = sum(_is_all_caps(t[3]) for t in words)
    if caps > CAPS_GUARD_RATIO * len(words):
        return []

    shouted: set[int] = set()
    stretch: list[int] = []
    # Punctuation does not interrupt a shouted stretch; a non-caps word does.
    for i, (kind, _, _, tok) in enumerate(tokens + [("word", 0, 0, "")]):
        if kind != "word":
            continue
        if _is_all_caps(tok):
            stretch.append(i)
            continue
        if len(stretch) >= SHOUT_RUN:
            shouted.update(stretch)
        stretch = []

    spans: list[MentionSpan] = []
    run: list[tuple[int, int, str]] = []

    def flush():
        trimmed = _trim_stopwords(run, stop)
        if trimmed and len(trimmed) <= max_tokens:
            spans.append(_span(text, trimmed, post_id, "capitalized"))
        run.clear()

    prev_end = None
    for i, (kind, start, end, tok) in enumerate(tokens):
        qualifies = kind == "word" and i not in shouted and _is_name_like(tok)
        if qualifies and run and not text[prev_end:start].isspace():
            flush()
        if qualifies:
            run.append((start, end, tok))
            prev_end = end
        elif run:
            flush()
    if run:
        flush()
    return spans


def _compile_cues(cues: Iterable[str]) -> list[tuple[str, ...]]:
    compiled = {tuple(c.lower().split()) for c in cues if c.strip()}
    # Longest cue first so "close to" wins over a bare "to".
    return sorted(compiled, key=lambda c: (-len(c), c))


def _match_cue(words, i, cues) -> int:
    """Length in tokens of the cue starting at word index ``i``, or 0."""
    for cue in cues:
        n = len(cue)
        if i + n <= len(words) and all(
            words[i + j][0] == "word" and words[i + j][3].lower() == cue[j] for j in range(n)
        ):
            return n
    return 0


def extract_preposition_cue(
    text: str,
    *,
    post_id: str = "",
    cues: Iterable[str] | None = None,
    stopwords: Iterable[str] | None = None,
    max_tokens: int = MAX_RUN_TOKENS,
) -> list[MentionSpan]:
    """Capture up to ``max_tokens`` words following a cue phrase.

    Cues match case-insensitively on whole words. A run ends at punctuation,
    at the start of another cue, or at the length cap. Leading and trailing
    stopwords are trimmed from the run, so "in the heart of K-Town" yields
    only "K-Town" (the "heart of" cue takes over).
    """
    cue_list = _compile_cues(DEFAULT_CUES if cues is None else cues)
    stop = DEFAULT_STOPWORDS if stopwords is None else frozenset(w.lower() for w in stopwords)
    tokens = list(_tokenize(text))
    spans: list[MentionSpan] = []
    i = 0
    while i < len(tokens):
        n_cue = _match_cue(tokens, i, cue_list) if tokens[i][0] == "word" else 0
        if not n_cue:
            i += 1
            continue
        j = i + n_cue
        run: list[tuple[int, int, str]] = []
        while j < len(tokens) and len(run) < max_tokens:
            kind, start, end, tok = tokens[j]
            if kind != "word" or _match_cue(tokens, j, cue_list):
                break
            run.append((start, end, tok))
            j += 1
        trimmed = _trim_stopwords(run, stop)
        if trimmed:
            spans.append(_span(text, trimmed, post_id, "cue"))
        i += n_cue
    return spans


BUILTIN_EXTRACTORS = {
    "capitalized": extract_capitalized,
    "cue": extract_preposition_cue,
}


def load_external_annotations(
    path,
    corpus: Corpus | None = None,
    *,
    labels: Iterable[str] | None = None,
    source: str | None = None,
) -> dict[str, list[MentionSpan]]:
    """Read NER spans from an annotations JSONL file.

    Each line is ``{"post_id": ..., "spans": [{"start", "end", "text", "label"}]}``.
    Malformed lines are logged with their line number and skipped. When a
    corpus is given, spans whose offsets fall outside the ad text or whose
    ``text`` differs from the slice are dropped. ``labels`` restricts the
    accepted entity labels; by default every label is accepted.

    The number of dropped spans and bad lines is available on the returned
    mapping's ``dropped`` attribute.
    """
    path = Path(path)
    source = source or path.stem
    allowed = None if labels is None else {lab.upper() for lab in labels}
    texts = {ad.post_id: ad.text for ad in corpus.ads} if corpus is not None else None
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read annotations file {path}: {exc}") from exc

    result = _AnnotationMap()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            post_id = str(record["post_id"])
            raw_spans = record.get("spans", [])
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            logger.warning("%s:%d: malformed annotation line (%s)", path, lineno, exc)
            result.bad_lines.append(lineno)
            continue
        for raw in raw_spans:
            try:
                start, end = int(raw["start"]), int(raw["end"])
                surface = str(raw["text"])
                label = str(raw.get("label", ""))
            except (KeyError, TypeError, ValueError):
                result.dropped += 1
                continue
            if allowed is not None and label.upper() not in allowed:
                continue
            if not 0 <= start < end:
                result.dropped += 1
                continue
            if texts is not None:
                text = texts.get(post_id)
                if text is None or end > len(text) or text[start:end] != surface:
                    result.dropped += 1
                    continue
            elif end - start != len(surface):
                result.dropped += 1
                continue
            result.setdefault(post_id, []).append(MentionSpan(post_id, start, end, surface, source))
    return result


class _AnnotationMap(dict):
    def __init__(self):
        super().__init__()
        self.dropped = 0
        self.bad_lines: list[int] = []


def extract_corpus(corpus: Corpus, extractor, **kwargs) -> dict[str, list[MentionSpan]]:
    """Apply a built-in extractor (name or callable) to every ad."""
    func = BUILTIN_EXTRACTORS[extractor] if isinstance(extractor, str) else extractor
    out: dict[str, list[MentionSpan]] = {}
    for ad in corpus.ads:
        spans = func(ad.text, post_id=ad.post_id, **kwargs)
        if spans:
            out[ad.post_id] = spans
    return out


def union_candidates(
    corpus: Corpus, *extractions: Mapping[str, Sequence[MentionSpan]]
) -> CandidateSet:
    """Pool spans from every source into one term -> mentions/points map.

    Each ad contributes at most one point per term, however many times or by
    however many extractors the term is found in it. Spans naming a post_id
    missing from the corpus are dropped and counted in ``dropped``.
    """
    ads = corpus.by_id()
    result = CandidateSet()
    for extraction in extractions:
        for post_id in sorted(extraction):
            ad = ads.get(post_id)
            for span in extraction[post_id]:
                if ad is None or span.post_id != post_id:
                    result.dropped += 1
                    continue
                term = normalize_term(span.surface)
                if not term:
                    continue
                entry = result.entries.setdefault(term, CandidateEntry())
                entry.mentions.append(span)
                if post_id not in entry.post_ids:
                    entry.post_ids.append(post_id)
                    entry.points.append(ad.location)
    # Canonical ordering: terms sorted, points in corpus order.
    order = {ad.post_id: i for i, ad in enumerate(corpus.ads)}
    canonical = CandidateSet(dropped=result.dropped)
    for term in sorted(result.entries):
        entry = result.entries[term]
        idx = sorted(range(len(entry.post_ids)), key=lambda i: order[entry.post_ids[i]])
        canonical.entries[term] = CandidateEntry(
            mentions=sorted(entry.mentions, key=lambda s: (order[s.post_id], s.start, s.end, s.source)),
            post_ids=[entry.post_ids[i] for i in idx],
            points=[entry.points[i] for i in idx],
        )
    return canonical


class CandidateExtractor(TransformerMixin, BaseEstimator):
    """Transform a :class:`Corpus` into a :class:`CandidateSet`.

    Parameters
    ----------
    extractors : sequence of str
        Built-in extractors to run, any of ``"capitalized"`` and ``"cue"``.
    annotations : sequence of path, optional
        External NER annotation JSONL files to include in the union.
    cues, stopwords : sequence of str, optional
        Override the default cue phrases and stopword list.
    labels : sequence of str, optional
        Entity labels accepted from annotation files (default: all).
    max_tokens : int
        Longest run, in tokens, the built-in extractors emit.
    """

    def __init__(
        self,
        extractors=("capitalized", "cue"),
        annotations=(),
        cues=None,
        stopwords=None,
        labels=None,
        max_tokens=MAX_RUN_TOKENS,
    ):
        self.extractors = extractors
        self.annotations = annotations
        self.cues = cues
        self.stopwords = stopwords
        self.labels = labels
        self.max_tokens = max_tokens

    def fit(self, X, y=None):
        unknown = set(self.extractors) - set(BUILTIN_EXTRACTORS)
        if unknown:
            raise ValueError(f"unknown extractors: {sorted(unknown)}")
        return self

    def extract(self, X: Corpus) -> list[dict[str, list[MentionSpan]]]:
        """Per-source span collections, before the union."""
        self.fit(X)
        collections = []
        for name in self.extractors:
            kwargs = {"stopwords": self.stopwords, "max_tokens": self.max_tokens}
            if name == "cue":
                kwargs["cues"] = self.cues
            collections.append(extract_corpus(X, name, **kwargs))
        for path in self.annotations or ():
            collections.append(load_external_annotations(path, X, labels=self.labels))
        return collections

    def transform(self, X: Corpus) -> CandidateSet:
        return union_candidates(X, *self.extract(X))
