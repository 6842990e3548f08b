"""Scoring predictions against listener ratings, and the sparsity ablation.

Predictions are compared with aggregated per-track ratings by Spearman's
rank correlation (average ranks for ties).  Rating consistency across
raters is measured by Cronbach's alpha.  The ablation strips term-track
associations one at a time and re-evaluates at integer terms-per-track
levels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np
from scipy.stats import rankdata

from .corpus import TermDocMatrix
from .errors import (
    CoverageError,
    NothingToAblateError,
    ParameterError,
    SchemaError,
    UndefinedAlphaError,
    UndefinedCorrelationError,
)
from .moodspace import ActModel
from .predict import predict_tracks_act

LIKERT_MIN, LIKERT_MAX = 1.0, 9.0


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman's rank correlation with average (fractional) ranks for ties."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
        raise ParameterError("inputs must be 1-D vectors of equal length")
    if x.size < 3:
        raise ParameterError(f"need at least 3 observations, got {x.size}")
    rx = rankdata(x, method="average")
    ry = rankdata(y, method="average")
    sx = rx - rx.mean()
    sy = ry - ry.mean()
    vx = float(sx @ sx)
    vy = float(sy @ sy)
    if vx == 0.0 or vy == 0.0:
        raise UndefinedCorrelationError("an input vector is constant; ranks have no variance")
    rho = float(sx @ sy) / np.sqrt(vx * vy)
    return float(min(1.0, max(-1.0, rho)))


def cronbach_alpha(ratings: np.ndarray) -> float:
    """Cronbach's alpha with raters as test parts and tracks as items.

    alpha = k/(k-1) * (1 - sum of per-rater variances / variance of the
    per-track sums over raters), variances taken across tracks.
    """
    arr = np.asarray(ratings, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] < 2:
        raise ParameterError("need a complete matrix of >= 2 raters x >= 2 items")
    if not np.all(np.isfinite(arr)):
        raise ParameterError("rating matrix must be complete (no missing values)")
    k = arr.shape[0]
    part_vars = arr.var(axis=1, ddof=1)
    total_var = float(arr.sum(axis=0).var(ddof=1))
    if total_var == 0.0:
        raise UndefinedAlphaError("per-item rating sums have zero variance")
    return float(k / (k - 1) * (1.0 - float(part_vars.sum()) / total_var))


@dataclass(frozen=True)
class RatingsTable:
    """Per-rater Likert ratings with per-track means.

    ``aggregated`` maps (track_id, scale) to the mean over the raters who
    rated that track on that scale; missing ratings are simply excluded
    from the mean.
    """

    scales: tuple[str, ...]
    rows: tuple[tuple[str, str, str, float], ...]  # (track, rater, scale, value)
    aggregated: Mapping[tuple[str, str], float]

    @classmethod
    def from_rows(cls, rows: Sequence[tuple[str, str, str, float]]) -> "RatingsTable":
        seen: set[tuple[str, str, str]] = set()
        sums: dict[tuple[str, str], float] = {}
        counts: dict[tuple[str, str], int] = {}
        scales: list[str] = []
        clean: list[tuple[str, str, str, float]] = []
        for track_id, rater_id, scale, value in rows:
            value = float(value)
            if not LIKERT_MIN <= value <= LIKERT_MAX:
                raise SchemaError(
                    f"rating {value} for {track_id!r}/{scale!r} outside [1, 9]"
                )
            key = (track_id, rater_id, scale)
            if key in seen:
                raise SchemaError(f"duplicate rating row {key!r}")
            seen.add(key)
            if scale not in scales:
                scales.append(scale)
            agg_key = (track_id, scale)
            sums[agg_key] = sums.get(agg_key, 0.0) + value
            counts[agg_key] = counts.get(agg_key, 0) + 1
            clean.append((track_id, rater_id, scale, value))
        if not clean:
            raise SchemaError("ratings table is empty")
        aggregated = {k: sums[k] / counts[k] for k in sums}
        return cls(tuple(scales), tuple(clean), aggregated)

    def mean_by_track(self, scale: str) -> dict[str, float]:
        return {
            track: mean
            for (track, s), mean in self.aggregated.items()
            if s == scale
        }

    def complete_matrix(self, scale: str) -> tuple[np.ndarray, tuple[str, ...], tuple[str, ...]]:
        """Raters x tracks matrix for one scale; keeps only raters who
        rated every track that has any rating on the scale."""
        by_rater: dict[str, dict[str, float]] = {}
        tracks: set[str] = set()
        for track_id, rater_id, s, value in self.rows:
            if s != scale:
                continue
            by_rater.setdefault(rater_id, {})[track_id] = value
            tracks.add(track_id)
        track_list = tuple(sorted(tracks))
        raters = tuple(sorted(
            r for r, vals in by_rater.items()
            if all(t in vals for t in track_list)
        ))
        if len(raters) < 2 or len(track_list) < 2:
            raise ParameterError(
                f"scale {scale!r} has no complete >= 2 x >= 2 rater/track matrix"
            )
        arr = np.array([[by_rater[r][t] for t in track_list] for r in raters])
        return arr, raters, track_list


@dataclass(frozen=True)
class ReportRow:
    scale: str
    method: str
    k: object
    rho: float
    n: int


@dataclass(frozen=True)
class PredictionReport:
    rows: tuple[ReportRow, ...]
    metadata: Mapping[str, object] = field(default_factory=dict)


def evaluate_predictions(
    predictions: Mapping[str, Mapping[str, float]],
    ratings: RatingsTable,
    method: str = "",
    k: object = None,
    metadata: Mapping[str, object] | None = None,
) -> PredictionReport:
    """Spearman rho of predictions against aggregated ratings, per scale.

    Tracks are inner-joined on track_id; fewer than 3 shared tracks on a
    scale is a coverage error.
    """
    rows = []
    for scale, pred in predictions.items():
        rated = ratings.mean_by_track(scale)
        common = sorted(set(pred) & set(rated))
        if len(common) < 3:
            raise CoverageError(
                f"scale {scale!r} shares only {len(common)} tracks between "
                "predictions and ratings"
            )
        rho = spearman_rho(
            [pred[t] for t in common], [rated[t] for t in common]
        )
        rows.append(ReportRow(scale, method, k, rho, len(common)))
    return PredictionReport(tuple(rows), dict(metadata or {}))


# ---------------------------------------------------------------------------
# tag-sparsity ablation


@dataclass(frozen=True)
class AblationRecord:
    run: int
    level: int
    scale: str
    k: object
    rho: float
    n: int


@dataclass(frozen=True)
class AblationReport:
    records: tuple[AblationRecord, ...]
    runs: int
    levels: tuple[int, ...]
    scales: tuple[str, ...]
    k_list: tuple[object, ...]

    def mean_over_runs(self, level: int, scale: str, k: object) -> float:
        vals = [r.rho for r in self.records
                if r.level == level and r.scale == scale and r.k == k]
        if not vals:
            raise ParameterError(f"no records for level={level} scale={scale!r} k={k!r}")
        return float(np.mean(vals))

    def median_across_k(self, level: int, scale: str) -> float:
        """Median over the k list of the per-k mean over runs."""
        return float(np.median(
            [self.mean_over_runs(level, scale, k) for k in self.k_list]
        ))

    def median_by_run(self, level: int, scale: str) -> dict[int, float]:
        """Per run: median across k of that run's rho at the level."""
        out: dict[int, float] = {}
        for run in range(self.runs):
            vals = [r.rho for r in self.records
                    if r.run == run and r.level == level and r.scale == scale]
            if vals:
                out[run] = float(np.median(vals))
        return out

    def summary_rows(self) -> list[tuple[int, str, float, int]]:
        """(level, scale, median-across-k of mean-over-runs, runs) rows."""
        return [
            (level, scale, self.median_across_k(level, scale), self.runs)
            for level in self.levels
            for scale in self.scales
        ]


def _prepare_ablation_counts(
    test_counts: Mapping[str, Mapping[str, int]],
    matrix: TermDocMatrix,
) -> dict[str, dict[str, int]]:
    known = set(matrix.terms)
    prepared: dict[str, dict[str, int]] = {}
    for track_id, counts in test_counts.items():
        kept = {t: int(c) for t, c in counts.items() if t in known}
        if not kept:
            raise ParameterError(
                f"test track {track_id!r} has no association with a matrix term"
            )
        prepared[track_id] = kept
    if not prepared:
        raise ParameterError("test corpus is empty")
    return prepared


def ablate_sparsity(
    test_counts: Mapping[str, Mapping[str, int]],
    matrix: TermDocMatrix,
    models_by_k: Union[ActModel, Mapping[object, ActModel]],
    ratings: RatingsTable,
    runs: int = 10,
    seed: int = 0,
    levels: Sequence[int] = (8, 7, 6, 5, 4, 3, 2, 1),
    scales: Sequence[str] | None = None,
) -> AblationReport:
    """Strip term-track associations and re-evaluate at integer levels.

    Per run, one association is removed at a time: a track is chosen with
    probability proportional to its current association count (tracks at
    one association are never reduced further), then one of its
    associations with probability proportional to 1/count.  Whenever the
    corpus-wide mean terms-per-track first reaches a requested level, the
    predictions of every k model are scored; levels at or above the
    starting mean are scored on the untouched corpus.  Reported rho means
    are per (level, scale, k) over runs.
    """
    if isinstance(models_by_k, ActModel):
        models = {models_by_k.provenance.get("k"): models_by_k}
    else:
        models = dict(models_by_k)
    if not models:
        raise ParameterError("no models supplied")
    base_counts = _prepare_ablation_counts(test_counts, matrix)
    track_list = sorted(base_counts)
    scale_list = tuple(scales) if scales is not None else ratings.scales
    level_list = tuple(sorted(set(int(v) for v in levels), reverse=True))
    if any(lv < 1 for lv in level_list):
        raise ParameterError("levels must be >= 1")
    if all(len(base_counts[t]) == 1 for t in track_list):
        raise NothingToAblateError("every test track already has one association")

    records: list[AblationRecord] = []

    def score(run: int, level: int, counts: dict[str, dict[str, int]]):
        for k, act in models.items():
            preds = predict_tracks_act(act, matrix, counts, scale_list)
            report = evaluate_predictions(preds, ratings)
            for row in report.rows:
                records.append(AblationRecord(run, level, row.scale, k, row.rho, row.n))

    num_tracks = len(track_list)
    for run in range(runs):
        rng = np.random.default_rng([seed, run])
        counts = {t: dict(base_counts[t]) for t in track_list}
        assoc = np.array([len(counts[t]) for t in track_list], dtype=float)
        total = float(assoc.sum())
        pending = list(level_list)
        while pending and total / num_tracks <= pending[0]:
            score(run, pending.pop(0), counts)
        while pending:
            weights = np.where(assoc >= 2, assoc, 0.0)
            wsum = weights.sum()
            if wsum <= 0:
                break
            ti = int(rng.choice(num_tracks, p=weights / wsum))
            track_id = track_list[ti]
            terms = sorted(counts[track_id])
            inv = np.array([1.0 / max(counts[track_id][t], 1) for t in terms])
            term = terms[int(rng.choice(len(terms), p=inv / inv.sum()))]
            del counts[track_id][term]
            assoc[ti] -= 1
            total -= 1.0
            while pending and total / num_tracks <= pending[0]:
                score(run, pending.pop(0), counts)
        for leftover in pending:
            score(run, leftover, counts)
    return AblationReport(
        tuple(records), runs, level_list, scale_list, tuple(models.keys())
    )
