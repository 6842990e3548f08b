"""Synthetic tag corpora with planted valence-arousal structure.

The generator plants mood terms on the valence-arousal plane, gives each
track a planted mood position, and tags it with nearby terms (selection
probability decays with distance).  Recovering the planted dimensions
from the tags is the end-to-end benchmark for the mood-space pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .corpus import TagCorpus, Vocabulary
from .evaluate import RatingsTable
from .moodspace import ReferenceSpace


@dataclass(frozen=True)
class SyntheticBenchmark:
    vocabulary: Vocabulary
    corpus: TagCorpus
    reference: ReferenceSpace
    term_positions: Mapping[str, tuple[float, float]]
    track_moods: Mapping[str, tuple[float, float]]
    ratings: RatingsTable

    def matched_term_counts(self) -> dict[str, dict[str, int]]:
        """Term-level counts per track (tags are emitted pre-matched)."""
        out: dict[str, dict[str, int]] = {}
        canon = {}
        for term, inflections in self.vocabulary.entries:
            canon[term] = term
            for inf in inflections:
                canon[inf] = term
        for a in self.corpus.assignments:
            term = canon[a.tag]
            per = out.setdefault(a.track_id, {})
            per[term] = per.get(term, 0) + a.count
        return out


def _planted_terms(num_terms: int, rng: np.random.Generator) -> list[tuple[str, float, float]]:
    """Terms spread around the circumplex with jittered angle and radius."""
    out = []
    for i in range(num_terms):
        angle = 2.0 * math.pi * i / num_terms + rng.uniform(-0.06, 0.06)
        radius = 0.55 + 0.4 * rng.random()
        out.append((f"mood{i:02d}", radius * math.cos(angle), radius * math.sin(angle)))
    return out


def dimension_value(mood: tuple[float, float], scale: str) -> float:
    """Planted value of a dimension scale for a (valence, arousal) mood."""
    v, a = mood
    if scale == "valence":
        return v
    if scale == "arousal":
        return a
    if scale == "tension":
        return (a - v) / math.sqrt(2.0)
    raise ValueError(f"unknown dimension scale {scale!r}")


def make_planted_benchmark(
    num_terms: int = 30,
    num_tracks: int = 2000,
    seed: int = 0,
    terms_min: int = 2,
    terms_max: int = 8,
    decay: float = 0.25,
    num_anchors: int = 15,
    num_raters: int = 5,
    rating_noise: float = 0.25,
) -> SyntheticBenchmark:
    """Build a corpus whose tags encode planted track moods.

    Each track gets ``terms_min``..``terms_max`` distinct terms, chosen
    with probability proportional to exp(-distance/decay) from the
    planted track mood to the planted term positions; raw counts also
    decay with that distance.  Every other term (``num_anchors`` of them)
    is exported with its planted position as the alignment reference.
    Likert ratings map each planted dimension to [1, 9] with per-rater
    noise.
    """
    rng = np.random.default_rng(seed)
    planted = _planted_terms(num_terms, rng)
    term_names = [t for t, _, _ in planted]
    term_xy = np.array([[x, y] for _, x, y in planted])
    vocab = Vocabulary.from_pairs(
        [(name, (name + "ish",)) for name in term_names]
    )
    tracks = []
    assignments = []
    track_moods: dict[str, tuple[float, float]] = {}
    for t in range(num_tracks):
        track_id = f"track-{t:05d}"
        tracks.append((track_id, f"artist-{t % 37:02d}", f"title {t:05d}"))
        angle = rng.uniform(0.0, 2.0 * math.pi)
        radius = 0.95 * math.sqrt(rng.random())
        mood = (radius * math.cos(angle), radius * math.sin(angle))
        track_moods[track_id] = mood
        dists = np.linalg.norm(term_xy - np.array(mood), axis=1)
        probs = np.exp(-dists / decay)
        probs /= probs.sum()
        count = int(rng.integers(terms_min, terms_max + 1))
        chosen = rng.choice(num_terms, size=count, replace=False, p=probs)
        for i in chosen:
            name = term_names[i]
            surface = name if rng.random() < 0.5 else name + "ish"
            raw = int(np.clip(round(100.0 * math.exp(-dists[i] / decay)
                                    * (0.6 + 0.4 * rng.random())), 1, 100))
            assignments.append((track_id, surface, raw))
    corpus = TagCorpus.from_rows(tracks, assignments)
    anchors = {
        name: (float(x), float(y))
        for i, (name, x, y) in enumerate(planted)
        if i % 2 == 0 and i // 2 < num_anchors
    }
    reference = ReferenceSpace(anchors, source_label=f"planted(seed={seed})")
    rating_rows = []
    for track_id, mood in track_moods.items():
        for scale in ("valence", "arousal", "tension"):
            base = 5.0 + 4.0 * dimension_value(mood, scale) / math.sqrt(2.0)
            for rater in range(num_raters):
                noisy = base + rng.normal(0.0, rating_noise)
                value = float(np.clip(round(noisy), 1, 9))
                rating_rows.append((track_id, f"rater-{rater:02d}", scale, value))
    ratings = RatingsTable.from_rows(rating_rows)
    term_positions = {name: (float(x), float(y)) for name, x, y in planted}
    return SyntheticBenchmark(vocab, corpus, reference, term_positions, track_moods, ratings)
