"""Clustering-tendency statistics for track positions in a mood space.

Hopkins' index compares nearest-neighbor distance sums of artificial
points (sampled coordinate-wise from the empirical marginals of the real
data) against those of sampled real points:

    H = sum(A_j) / (sum(A_j) + sum(R_j))

H near 0.5 indicates uniform structure, H near 1 strong clusterability;
H = 0.75 rejects uniformity at the 90% confidence level.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ParameterError, SampleSizeError, ScheduleError

SeedLike = Union[int, Sequence[int]]

#: terms-per-track -> sampled tracks; decaying schedule totalling 4088.
DEFAULT_SCHEDULE: tuple[tuple[int, int], ...] = (
    (2, 2048), (3, 1024), (4, 512), (5, 256), (6, 128),
    (7, 64), (8, 32), (9, 16), (10, 8),
)


def _seed_list(seed: SeedLike, *extra: int) -> list[int]:
    base = [int(seed)] if isinstance(seed, (int, np.integer)) else [int(s) for s in seed]
    return base + [int(e) for e in extra]


@dataclass(frozen=True)
class HopkinsResult:
    h: float
    num_real: int
    num_artificial: int
    per_run_values: tuple[float, ...]
    seed: SeedLike

    @property
    def h_sd(self) -> float:
        if len(self.per_run_values) < 2:
            return 0.0
        return float(np.std(self.per_run_values, ddof=1))


def default_sample_count(n: int) -> int:
    """Conventional small Hopkins sample: 10% of the data, capped at 100."""
    return max(1, min(n // 10, 100))


def hopkins_index(
    points: np.ndarray,
    sample_count: int | None = None,
    runs: int = 10,
    seed: SeedLike = 0,
) -> HopkinsResult:
    """Hopkins' index with marginal-bootstrap artificial points.

    Per run, ``sample_count`` real points are drawn without replacement
    and R_j is each one's distance to its nearest other real point; the
    same number of artificial points is built by sampling every
    coordinate independently from that coordinate's observed values, and
    A_j is each one's distance to the nearest real point.  The result
    averages H over runs.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] < 1:
        raise ParameterError("points must be an n x d array with d >= 1")
    n = pts.shape[0]
    m = default_sample_count(n) if sample_count is None else int(sample_count)
    if m < 1:
        raise SampleSizeError(f"sample_count={m} must be >= 1")
    if n < 2 * m:
        raise SampleSizeError(f"need at least 2 * m = {2 * m} points, got {n}")
    if runs < 1:
        raise ParameterError("runs must be >= 1")
    per_run: list[float] = []
    for r in range(runs):
        rng = np.random.default_rng(_seed_list(seed, r))
        real_idx = rng.choice(n, size=m, replace=False)
        real_d = cdist(pts[real_idx], pts)
        real_d[np.arange(m), real_idx] = np.inf
        r_sum = float(real_d.min(axis=1).sum())
        artificial = np.empty((m, pts.shape[1]))
        for c in range(pts.shape[1]):
            artificial[:, c] = pts[rng.integers(0, n, size=m), c]
        a_sum = float(cdist(artificial, pts).min(axis=1).sum())
        denom = a_sum + r_sum
        per_run.append(a_sum / denom if denom > 0 else 0.5)
    per_run_t = tuple(per_run)
    return HopkinsResult(float(np.mean(per_run_t)), m, m, per_run_t, seed)


@dataclass(frozen=True)
class ProtocolResult:
    k: object
    h_mean: float
    h_sd: float
    runs: int
    per_run_values: tuple[float, ...]


def clusterability_protocol(
    positions_by_k: Mapping[object, np.ndarray],
    terms_per_track: np.ndarray,
    schedule: Sequence[tuple[int, int]] | None = None,
    runs: int = 10,
    seed: int = 0,
    sample_count: int | None = None,
) -> dict[object, ProtocolResult]:
    """Hopkins' index over rank-k spaces with a fixed terms-per-track mix.

    Per run and per rank, each schedule bucket (c terms -> n_c tracks)
    contributes n_c tracks sampled without replacement from the tracks
    having exactly c associated terms; Hopkins' index is computed on the
    pooled positions and averaged over runs.
    """
    sched = tuple(schedule) if schedule is not None else DEFAULT_SCHEDULE
    if not sched:
        raise ParameterError("schedule is empty")
    tpt = np.asarray(terms_per_track, dtype=int)
    eligible: dict[int, np.ndarray] = {}
    for c, n_c in sched:
        if n_c < 1:
            raise ParameterError(f"schedule bucket {c} requests {n_c} tracks")
        idx = np.flatnonzero(tpt == c)
        if idx.size < n_c:
            raise ScheduleError(
                f"bucket for {c} terms per track needs {n_c} tracks, "
                f"corpus has {idx.size}"
            )
        eligible[c] = idx
    results: dict[object, ProtocolResult] = {}
    for ki, (k, positions) in enumerate(positions_by_k.items()):
        pos = np.asarray(positions, dtype=float)
        if pos.shape[0] != tpt.size:
            raise ParameterError(
                f"positions for k={k!r} have {pos.shape[0]} rows, "
                f"expected {tpt.size}"
            )
        per_run: list[float] = []
        for r in range(runs):
            rng = np.random.default_rng([seed, ki, r])
            pooled = [
                pos[rng.choice(eligible[c], size=n_c, replace=False)]
                for c, n_c in sched
            ]
            sample = np.concatenate(pooled, axis=0)
            res = hopkins_index(
                sample, sample_count=sample_count, runs=1, seed=[seed, ki, r, 1]
            )
            per_run.append(res.h)
        vals = tuple(per_run)
        sd = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
        results[k] = ProtocolResult(k, float(np.mean(vals)), sd, runs, vals)
    return results
