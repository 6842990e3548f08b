"""Tag corpora, vocabulary matching, and the TF-IDF vector-space model.

The pipeline here goes: raw (track, tag, count) assignments -> term-level
counts via controlled-vocabulary matching -> prevalence filtering ->
sparse TF-IDF matrix with weights ``(count + 1) * ln(R / f_i)`` where
``R`` is the number of tracks and ``f_i`` the number of tracks term ``i``
is associated with.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateTermError,
    EmptyCorpusError,
    EmptyQueryError,
)

_NON_ALNUM = re.compile(r"[^0-9a-z]+")


def normalize_text(text: str) -> str:
    """Lowercase, map runs of non-alphanumerics to single spaces, trim.

    Hyphens and all other punctuation act as word boundaries.
    """
    return _NON_ALNUM.sub(" ", text.lower()).strip()


def _words(text: str) -> tuple[str, ...]:
    norm = normalize_text(text)
    return tuple(norm.split()) if norm else ()


@dataclass(frozen=True)
class Vocabulary:
    """Controlled vocabulary of canonical terms with inflection lists.

    Each canonical term and each of its inflections is a *surface form*;
    a surface form (after normalization) must map to exactly one
    canonical term.
    """

    entries: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self):
        if not self.entries:
            raise ConfigurationError("vocabulary is empty")
        surface_to_term: dict[tuple[str, ...], str] = {}
        canonicals: set[str] = set()
        for term, inflections in self.entries:
            canon = normalize_text(term)
            if not canon:
                raise ConfigurationError(f"vocabulary term {term!r} normalizes to nothing")
            if canon in canonicals:
                raise ConfigurationError(f"duplicate canonical term {canon!r}")
            canonicals.add(canon)
            for surface in (term, *inflections):
                words = _words(surface)
                if not words:
                    raise ConfigurationError(
                        f"inflection {surface!r} of {canon!r} normalizes to nothing"
                    )
                owner = surface_to_term.get(words)
                if owner is not None and owner != canon:
                    raise ConfigurationError(
                        f"surface form {' '.join(words)!r} maps to both "
                        f"{owner!r} and {canon!r}"
                    )
                surface_to_term[words] = canon
        object.__setattr__(self, "_surface_to_term", surface_to_term)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, Sequence[str]]]) -> "Vocabulary":
        return cls(tuple((term, tuple(infl)) for term, infl in pairs))

    @property
    def terms(self) -> tuple[str, ...]:
        return tuple(normalize_text(t) for t, _ in self.entries)

    def surfaces_of(self, canonical: str) -> list[tuple[str, ...]]:
        canon = normalize_text(canonical)
        return [w for w, t in self._surface_to_term.items() if t == canon]

    def match_words(self, words: Sequence[str]) -> set[str]:
        """Canonical terms whose surface forms occur in ``words`` as a
        whole word or whole consecutive word sequence."""
        found: set[str] = set()
        index = self._first_word_index()
        n = len(words)
        for pos, w in enumerate(words):
            for surface in index.get(w, ()):
                L = len(surface)
                if pos + L <= n and tuple(words[pos:pos + L]) == surface:
                    found.add(self._surface_to_term[surface])
        return found

    def _first_word_index(self) -> dict[str, list[tuple[str, ...]]]:
        cached = getattr(self, "_index_cache", None)
        if cached is None:
            cached = {}
            for surface in self._surface_to_term:
                cached.setdefault(surface[0], []).append(surface)
            object.__setattr__(self, "_index_cache", cached)
        return cached


@dataclass(frozen=True)
class TrackInfo:
    track_id: str
    artist: str
    title: str


@dataclass(frozen=True)
class TagAssignment:
    """One (track, tag) association with its normalized count."""

    track_id: str
    tag: str
    count: int

    def __post_init__(self):
        if self.count < 0:
            raise ConfigurationError(
                f"negative count {self.count} for tag {self.tag!r} on {self.track_id!r}"
            )


@dataclass(frozen=True)
class TagCorpus:
    """Raw tag-document corpus.

    Duplicate (track_id, tag) rows are merged at ingest, keeping the
    maximum count.
    """

    tracks: tuple[TrackInfo, ...]
    assignments: tuple[TagAssignment, ...]

    def __post_init__(self):
        known = {t.track_id for t in self.tracks}
        if len(known) != len(self.tracks):
            raise ConfigurationError("duplicate track_id in track list")
        for a in self.assignments:
            if a.track_id not in known:
                raise ConfigurationError(f"assignment references unknown track {a.track_id!r}")
        seen: set[tuple[str, str]] = set()
        for a in self.assignments:
            key = (a.track_id, a.tag)
            if key in seen:
                raise ConfigurationError(f"duplicate (track, tag) pair {key!r}")
            seen.add(key)

    @classmethod
    def from_rows(
        cls,
        tracks: Iterable[tuple[str, str, str]],
        assignments: Iterable[tuple[str, str, int]],
    ) -> "TagCorpus":
        """Build a corpus, merging duplicate (track, tag) rows by max count."""
        infos = tuple(TrackInfo(*t) for t in tracks)
        merged: dict[tuple[str, str], int] = {}
        order: list[tuple[str, str]] = []
        for track_id, tag, count in assignments:
            key = (track_id, tag)
            if key in merged:
                merged[key] = max(merged[key], count)
            else:
                merged[key] = count
                order.append(key)
        assigns = tuple(TagAssignment(tid, tag, merged[(tid, tag)]) for tid, tag in order)
        return cls(infos, assigns)

    def track_info(self, track_id: str) -> TrackInfo:
        by_id = getattr(self, "_by_id", None)
        if by_id is None:
            by_id = {t.track_id: t for t in self.tracks}
            object.__setattr__(self, "_by_id", by_id)
        return by_id[track_id]


@dataclass(frozen=True)
class MatchedCorpus:
    """Term-level corpus: per-track raw counts of canonical terms.

    Only tracks with at least one matched term are kept; track order
    follows the source corpus.
    """

    track_ids: tuple[str, ...]
    counts: Mapping[str, Mapping[str, int]]  # track_id -> term -> raw count

    @property
    def num_tracks(self) -> int:
        return len(self.track_ids)

    def terms_present(self) -> tuple[str, ...]:
        terms: set[str] = set()
        for per_track in self.counts.values():
            terms.update(per_track)
        return tuple(sorted(terms))

    def prevalence(self) -> dict[str, int]:
        """Number of distinct tracks each term is associated with (f_i)."""
        prev: dict[str, int] = {}
        for per_track in self.counts.values():
            for term in per_track:
                prev[term] = prev.get(term, 0) + 1
        return prev

    def terms_per_track(self) -> dict[str, int]:
        return {tid: len(self.counts[tid]) for tid in self.track_ids}


def _match_track_tags(
    tags: Iterable[tuple[str, int]],
    vocab: Vocabulary,
    artist: str = "",
    title: str = "",
) -> dict[str, int]:
    """Match one track's tags against the vocabulary.

    Returns term -> summed raw count.  Associations whose term (any
    surface form) occurs as a whole word sequence inside the track title
    or artist name are dropped, since such tags tend to describe track
    metadata rather than mood.
    """
    metadata_terms: set[str] = set()
    for text in (artist, title):
        if text:
            metadata_terms |= vocab.match_words(_words(text))
    matched: dict[str, int] = {}
    for tag, count in tags:
        for term in vocab.match_words(_words(tag)):
            if term in metadata_terms:
                continue
            matched[term] = matched.get(term, 0) + count
    return matched


def match_terms(corpus: TagCorpus, vocab: Vocabulary) -> MatchedCorpus:
    """Associate tags to canonical vocabulary terms.

    A tag is associated to a term iff, after normalization, the tag
    contains the term or one of its inflections as a whole word (or
    whole consecutive word sequence).  Counts of multiple matching tags
    for the same (track, term) are summed.
    """
    if not corpus.tracks:
        raise ConfigurationError("corpus has no tracks")
    tags_by_track: dict[str, list[tuple[str, int]]] = {}
    for a in corpus.assignments:
        tags_by_track.setdefault(a.track_id, []).append((a.tag, a.count))
    track_ids: list[str] = []
    counts: dict[str, dict[str, int]] = {}
    for info in corpus.tracks:
        tags = tags_by_track.get(info.track_id)
        if not tags:
            continue
        matched = _match_track_tags(tags, vocab, artist=info.artist, title=info.title)
        if matched:
            track_ids.append(info.track_id)
            counts[info.track_id] = matched
    return MatchedCorpus(tuple(track_ids), counts)


def filter_corpus(
    matched: MatchedCorpus,
    min_term_prevalence: int,
    min_terms_per_track: int,
) -> MatchedCorpus:
    """Drop rare terms and weakly-tagged tracks, to a fixed point.

    Alternates removal of terms associated with fewer than
    ``min_term_prevalence`` tracks and of tracks with fewer than
    ``min_terms_per_track`` distinct terms until neither pass removes
    anything.  Tracks left without any term are always dropped (a track
    with no association is not representable in the matrix).
    """
    if min_term_prevalence < 0 or min_terms_per_track < 0:
        raise ConfigurationError("filter thresholds must be non-negative")
    counts = {tid: dict(matched.counts[tid]) for tid in matched.track_ids}
    order = list(matched.track_ids)
    while True:
        prevalence: dict[str, int] = {}
        for per_track in counts.values():
            for term in per_track:
                prevalence[term] = prevalence.get(term, 0) + 1
        bad_terms = {t for t, p in prevalence.items() if p < min_term_prevalence}
        for per_track in counts.values():
            for term in bad_terms:
                per_track.pop(term, None)
        bad_tracks = [
            tid for tid in order
            if len(counts[tid]) < max(min_terms_per_track, 1)
        ]
        for tid in bad_tracks:
            del counts[tid]
        order = [tid for tid in order if tid in counts]
        if not bad_terms and not bad_tracks:
            break
    if not order:
        raise EmptyCorpusError(
            f"filtering with thresholds ({min_term_prevalence}, "
            f"{min_terms_per_track}) removed every track"
        )
    return MatchedCorpus(tuple(order), counts)


@dataclass(frozen=True)
class TermDocMatrix:
    """Sparse TF-IDF matrix over canonical terms and track ids.

    ``cells`` maps (term index, track index) to a strictly positive
    weight; ``doc_freq[i]`` equals the number of stored cells in row i.
    """

    terms: tuple[str, ...]
    track_ids: tuple[str, ...]
    cells: Mapping[tuple[int, int], float]
    doc_freq: tuple[int, ...]
    num_tracks: int
    term_index: Mapping[str, int] = field(repr=False, default=None)

    def __post_init__(self):
        if self.term_index is None:
            object.__setattr__(
                self, "term_index", {t: i for i, t in enumerate(self.terms)}
            )

    @classmethod
    def from_dense(
        cls,
        terms: Sequence[str],
        track_ids: Sequence[str],
        dense: np.ndarray,
    ) -> "TermDocMatrix":
        """Wrap a dense nonnegative array; zero entries are not stored."""
        dense = np.asarray(dense, dtype=float)
        if dense.shape != (len(terms), len(track_ids)):
            raise ConfigurationError("dense array shape does not match labels")
        if np.any(dense < 0):
            raise ConfigurationError("matrix weights must be nonnegative")
        cells = {
            (int(i), int(j)): float(dense[i, j])
            for i, j in zip(*np.nonzero(dense))
        }
        doc_freq = tuple(int(np.count_nonzero(dense[i])) for i in range(len(terms)))
        return cls(tuple(terms), tuple(track_ids), cells, doc_freq, len(track_ids))

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((len(self.terms), len(self.track_ids)))
        for (i, j), w in self.cells.items():
            dense[i, j] = w
        return dense

    def column(self, j: int) -> np.ndarray:
        col = np.zeros(len(self.terms))
        for (i, jj), w in self.cells.items():
            if jj == j:
                col[i] = w
        return col

    def terms_per_track_counts(self) -> np.ndarray:
        """Number of stored terms for each track column."""
        counts = np.zeros(len(self.track_ids), dtype=int)
        for (_, j) in self.cells:
            counts[j] += 1
        return counts


def build_tfidf(matched: MatchedCorpus) -> TermDocMatrix:
    """Build the TF-IDF matrix: cell (i, j) = (n_ij + 1) * ln(R / f_i).

    Natural logarithm.  Associations with raw count 0 are retained and
    weigh ln(R / f_i).  A term present on every track (f_i = R) would
    weigh 0 everywhere and is rejected.
    """
    if matched.num_tracks == 0:
        raise EmptyCorpusError("cannot build a matrix from an empty corpus")
    terms = matched.terms_present()
    if not terms:
        raise EmptyCorpusError("corpus has no terms")
    term_to_i = {t: i for i, t in enumerate(terms)}
    R = matched.num_tracks
    prevalence = matched.prevalence()
    for term in terms:
        if prevalence[term] >= R:
            raise DegenerateTermError(
                f"term {term!r} is associated with every track (f_i = R = {R}); "
                "its TF-IDF weight would be 0"
            )
    idf = {t: math.log(R / prevalence[t]) for t in terms}
    cells: dict[tuple[int, int], float] = {}
    for j, tid in enumerate(matched.track_ids):
        for term, n in matched.counts[tid].items():
            cells[(term_to_i[term], j)] = (n + 1) * idf[term]
    doc_freq = tuple(prevalence[t] for t in terms)
    return TermDocMatrix(terms, tuple(matched.track_ids), cells, doc_freq, R)


def weights_from_term_counts(
    term_counts: Mapping[str, int],
    matrix: TermDocMatrix,
) -> np.ndarray:
    """TF-IDF query weights for raw term counts, using the matrix's R and f_i.

    Terms unknown to the matrix are ignored; an empty result raises.
    """
    q = np.zeros(len(matrix.terms))
    hit = False
    for term, count in term_counts.items():
        i = matrix.term_index.get(term)
        if i is None:
            continue
        q[i] = (count + 1) * math.log(matrix.num_tracks / matrix.doc_freq[i])
        hit = True
    if not hit:
        raise EmptyQueryError("no term of the query exists in the matrix")
    return q


def vectorize_track(
    tags: Iterable[tuple[str, int]],
    vocab: Vocabulary,
    matrix: TermDocMatrix,
    artist: str = "",
    title: str = "",
) -> np.ndarray:
    """Transform one track's raw tags into a TF-IDF query vector.

    Applies the same matching rules as :func:`match_terms` (including
    the title/artist drop when metadata is given), then the TF-IDF
    formula with the matrix's stored R and f_i.  Tags matching no
    vocabulary term are silently ignored.
    """
    matched = _match_track_tags(tags, vocab, artist=artist, title=title)
    if not matched:
        raise EmptyQueryError("no tag matches any vocabulary term")
    return weights_from_term_counts(matched, matrix)
