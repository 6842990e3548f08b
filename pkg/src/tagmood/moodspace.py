"""3-D mood-term spaces: non-metric MDS, valence-arousal alignment, prediction.

The pipeline embeds term dissimilarities into three dimensions by
non-metric MDS (Kruskal Stress-1), then aligns the configuration to a
2-D valence-arousal reference with classical Procrustes analysis -- the
affective circumplex transform (ACT).  The reference is zero-padded to
3-D, so the aligned space has explicit valence and arousal dimensions
plus a residual third dimension.  Tracks are positioned by the
center-of-mass of their terms and moods are read off by projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .corpus import TermDocMatrix, normalize_text
from .errors import (
    DegenerateTermError,
    EmptyCandidateError,
    EmptyQueryError,
    InsufficientAnchorError,
    ParameterError,
)
from .factorize import SvdModel, _cosine_dissimilarity, svd_fit, term_dissimilarity

_EPS = 1e-12

DIMENSIONS = ("valence", "arousal", "tension")
#: Tension lies along negative valence and positive arousal.
TENSION_DIRECTION = np.array([-1.0, 1.0, 0.0]) / math.sqrt(2.0)

_AXES = {
    "valence": np.array([1.0, 0.0, 0.0]),
    "arousal": np.array([0.0, 1.0, 0.0]),
    "tension": TENSION_DIRECTION,
}


# ---------------------------------------------------------------------------
# non-metric MDS


def _pav(y: np.ndarray) -> np.ndarray:
    """Pool-adjacent-violators: least-squares non-decreasing fit to y."""
    vals: list[float] = []
    sizes: list[int] = []
    for v in y:
        vals.append(float(v))
        sizes.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            v2, s2 = vals.pop(), sizes.pop()
            v1, s1 = vals.pop(), sizes.pop()
            vals.append((v1 * s1 + v2 * s2) / (s1 + s2))
            sizes.append(s1 + s2)
    out = np.empty(len(y))
    pos = 0
    for v, s in zip(vals, sizes):
        out[pos:pos + s] = v
        pos += s
    return out


def _stress1(d: np.ndarray, delta: np.ndarray) -> tuple[float, np.ndarray]:
    """Kruskal Stress-1 of embedded distances d against dissimilarities delta.

    Disparities are the isotonic (rank-preserving in delta) least-squares
    fit to d.  Ties in delta are handled by the primary approach: within a
    tie block the distances are pre-sorted, so tied dissimilarities may
    receive unequal disparities.
    """
    order = np.lexsort((d, delta))
    fitted = _pav(d[order])
    disparities = np.empty_like(d)
    disparities[order] = fitted
    denom = float(np.sum(d * d))
    if denom <= 0.0:
        return math.inf, disparities
    stress = math.sqrt(float(np.sum((d - disparities) ** 2)) / denom)
    return stress, disparities


def _guttman_step(x: np.ndarray, d: np.ndarray, disparities: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    ratio = squareform(disparities / np.maximum(d, _EPS))
    b = -ratio
    np.fill_diagonal(b, ratio.sum(axis=1))
    return (b @ x) / n


def _classical_mds(delta_sq: np.ndarray, dims: int) -> np.ndarray:
    n = delta_sq.shape[0]
    j = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * j @ delta_sq @ j
    eigvals, eigvecs = np.linalg.eigh(b)
    idx = np.argsort(eigvals)[::-1][:dims]
    vals = np.clip(eigvals[idx], 0.0, None)
    return eigvecs[:, idx] * np.sqrt(vals)


@dataclass(frozen=True)
class MdsEmbedding:
    """Term coordinates with the achieved Stress-1 value.

    ``stress_traces`` holds the per-iteration stress sequence of every
    restart; traces are non-increasing by construction.
    """

    coords: np.ndarray  # n x dims, centered
    stress1: float
    dims: int
    restarts_used: int
    stress_traces: tuple[tuple[float, ...], ...] = ()


def _validate_dissimilarity(diss: np.ndarray) -> np.ndarray:
    diss = np.asarray(diss, dtype=float)
    if diss.ndim != 2 or diss.shape[0] != diss.shape[1]:
        raise ParameterError("dissimilarity input must be a square matrix")
    if not np.allclose(diss, diss.T, atol=1e-10):
        raise ParameterError("dissimilarity matrix must be symmetric")
    if np.any(np.abs(np.diag(diss)) > 1e-12):
        raise ParameterError("dissimilarity matrix must have a zero diagonal")
    if np.any(diss < 0):
        raise ParameterError("dissimilarities must be non-negative")
    return diss


def mds_embed(
    dissimilarity: np.ndarray,
    dims: int = 3,
    restarts: int = 4,
    max_iter: int = 300,
    tol: float = 1e-7,
    seed: int = 0,
) -> MdsEmbedding:
    """Non-metric MDS minimizing Kruskal's Stress-1.

    Alternates isotonic-regression disparities with majorization steps on
    the configuration; each step is accepted only if the stress does not
    increase (backtracking otherwise), so the stress trace of a run never
    increases.  The first restart starts from classical metric MDS, the
    remaining ones from seeded random configurations; the best restart
    wins.  The result is translated to zero column means.
    """
    diss = _validate_dissimilarity(dissimilarity)
    n = diss.shape[0]
    if dims < 1 or dims >= n:
        raise ParameterError(f"dims={dims} must satisfy 1 <= dims < {n} points")
    if restarts < 1:
        raise ParameterError("restarts must be >= 1")
    iu = np.triu_indices(n, k=1)
    delta = diss[iu]

    best: tuple[float, np.ndarray] | None = None
    traces: list[tuple[float, ...]] = []
    for r in range(restarts):
        if r == 0:
            x = _classical_mds(diss ** 2, dims)
        else:
            rng = np.random.default_rng([seed, r])
            scale = float(delta.mean()) if delta.size and delta.mean() > 0 else 1.0
            x = rng.standard_normal((n, dims)) * scale
        d = pdist(x)
        stress, disparities = _stress1(d, delta)
        trace = [stress]
        for _ in range(max_iter):
            if stress == 0.0 or not math.isfinite(stress):
                break
            x_target = _guttman_step(x, d, disparities)
            step = x_target - x
            accepted = None
            t = 1.0
            while t >= 2.0 ** -20:
                x_cand = x + t * step
                d_cand = pdist(x_cand)
                s_cand, disp_cand = _stress1(d_cand, delta)
                if s_cand <= stress:
                    accepted = (x_cand, d_cand, s_cand, disp_cand)
                    break
                t /= 2.0
            if accepted is None:
                break
            x, d, new_stress, disparities = accepted
            trace.append(new_stress)
            if stress - new_stress < tol * max(stress, _EPS):
                stress = new_stress
                break
            stress = new_stress
        traces.append(tuple(trace))
        if best is None or stress < best[0]:
            best = (stress, x)
    final_stress, x = best
    x = x - x.mean(axis=0, keepdims=True)
    return MdsEmbedding(x, float(final_stress), dims, restarts, tuple(traces))


# ---------------------------------------------------------------------------
# Procrustes alignment (ACT)


@dataclass(frozen=True)
class ReferenceSpace:
    """Valence-arousal reference positions for mood terms.

    ``entries`` maps normalized terms to (valence, arousal) in [-1, 1].
    """

    entries: Mapping[str, tuple[float, float]]
    source_label: str = ""

    def __post_init__(self):
        cleaned = {}
        for term, (v, a) in self.entries.items():
            norm = normalize_text(term)
            if not norm:
                raise ParameterError(f"reference term {term!r} normalizes to nothing")
            cleaned[norm] = (float(v), float(a))
        object.__setattr__(self, "entries", cleaned)


@dataclass(frozen=True)
class ActModel:
    """Procrustes components and the transformed term configuration.

    The transform of a coordinate row y is ``B * y @ T + C``; it was
    fitted against the zero-padded reference, with dimension 1 = valence,
    dimension 2 = arousal, dimension 3 = residual.
    """

    terms: tuple[str, ...]
    scale_b: float
    rotation_t: np.ndarray  # 3 x 3 orthogonal, det +-1
    translation_c: np.ndarray  # length 3
    term_coords: np.ndarray  # terms x 3
    matched_terms: tuple[tuple[str, tuple[float, float]], ...]
    fit_x2_raw: float
    fit_x2_standardized: float
    provenance: Mapping[str, object] = field(default_factory=dict)
    term_index: Mapping[str, int] = field(repr=False, default=None)

    def __post_init__(self):
        if self.term_index is None:
            object.__setattr__(
                self, "term_index",
                {normalize_text(t): i for i, t in enumerate(self.terms)},
            )

    @property
    def fit_x2(self) -> float:
        return self.fit_x2_raw

    def transform(self, coords: np.ndarray) -> np.ndarray:
        """Apply the fitted transform to rows of 3-D coordinates."""
        coords = np.asarray(coords, dtype=float)
        return self.scale_b * coords @ self.rotation_t + self.translation_c


def procrustes_fit(
    embedding: Union[MdsEmbedding, np.ndarray],
    terms: Sequence[str],
    reference: ReferenceSpace,
    provenance: Mapping[str, object] | None = None,
) -> ActModel:
    """Align a 3-D term configuration to the valence-arousal reference.

    Terms are matched by normalized string equality; each matched 2-D
    reference point is padded with a third coordinate 0.  The classical
    Procrustes solution (isotropic scale B, orthogonal T with reflections
    permitted, translation C) minimizes the sum of squared errors X2 over
    matched terms, then transforms every term.
    """
    coords = embedding.coords if isinstance(embedding, MdsEmbedding) else np.asarray(embedding, dtype=float)
    if coords.ndim != 2 or coords.shape[1] != 3:
        raise ParameterError("Procrustes alignment needs an n x 3 configuration")
    if coords.shape[0] != len(terms):
        raise ParameterError("terms and coordinate rows disagree in length")
    matched_idx: list[int] = []
    matched: list[tuple[str, tuple[float, float]]] = []
    for i, term in enumerate(terms):
        norm = normalize_text(term)
        va = reference.entries.get(norm)
        if va is not None:
            matched_idx.append(i)
            matched.append((norm, va))
    if len(matched) < 3:
        raise InsufficientAnchorError(
            "need at least 3 reference terms in the configuration, matched only: "
            + (", ".join(t for t, _ in matched) if matched else "(none)")
        )
    y = coords[matched_idx]
    x = np.array([[v, a, 0.0] for _, (v, a) in matched])
    y_mean = y.mean(axis=0)
    x_mean = x.mean(axis=0)
    yc = y - y_mean
    xc = x - x_mean
    y_ss = float(np.sum(yc * yc))
    if y_ss <= 0.0:
        raise ParameterError("anchor configuration is degenerate (all points coincide)")
    p, sing, qt = np.linalg.svd(yc.T @ xc)
    t = p @ qt
    b = float(sing.sum()) / y_ss
    if b <= 0.0:
        raise ParameterError("anchor configurations admit no positive scale")
    c = x_mean - b * (y_mean @ t)
    term_coords = b * coords @ t + c
    residual = x - (b * y @ t + c)
    x2_raw = float(np.sum(residual * residual))
    x_ss = float(np.sum(xc * xc))
    x2_std = x2_raw / x_ss if x_ss > 0 else math.inf
    return ActModel(
        terms=tuple(terms),
        scale_b=b,
        rotation_t=t,
        translation_c=c,
        term_coords=term_coords,
        matched_terms=tuple(matched),
        fit_x2_raw=x2_raw,
        fit_x2_standardized=x2_std,
        provenance=dict(provenance or {}),
    )


# ---------------------------------------------------------------------------
# prediction


def project_track(act: ActModel, q: np.ndarray) -> np.ndarray:
    """Center-of-mass position of a track: sum_i q_i x_i / sum_i q_i."""
    q = np.asarray(q, dtype=float).ravel()
    if q.size != len(act.terms):
        raise ParameterError(f"query has {q.size} entries, model has {len(act.terms)} terms")
    total = float(q.sum())
    if q.size == 0 or not np.any(q) or total <= 0.0:
        raise EmptyQueryError("query is empty or has zero total weight")
    return (q @ act.term_coords) / total


def track_positions(matrix: TermDocMatrix, term_coords: np.ndarray) -> np.ndarray:
    """Center-of-mass positions of all matrix columns in one pass."""
    dense = matrix.to_dense()
    totals = dense.sum(axis=0)
    if np.any(totals <= 0):
        j = int(np.argmin(totals))
        raise EmptyQueryError(f"track {matrix.track_ids[j]!r} has zero total weight")
    return (dense.T @ np.asarray(term_coords, dtype=float)) / totals[:, None]


def predict_dimension(position: np.ndarray, dimension: str) -> float:
    """Read a mood dimension off a track position.

    Valence and arousal are the first two coordinates; tension is the
    projection onto (-1, 1, 0)/sqrt(2).
    """
    position = np.asarray(position, dtype=float).ravel()
    if position.size != 3 or not np.all(np.isfinite(position)):
        raise ParameterError("position must be a finite 3-vector")
    if dimension == "valence":
        return float(position[0])
    if dimension == "arousal":
        return float(position[1])
    if dimension == "tension":
        return float(position @ TENSION_DIRECTION)
    raise ParameterError(f"unknown dimension {dimension!r}")


def predict_term(act: ActModel, position: np.ndarray, term: str) -> float:
    """Weight of a mood term for a track: unit term direction dotted with
    the track position."""
    position = np.asarray(position, dtype=float).ravel()
    i = act.term_index.get(normalize_text(term))
    if i is None:
        raise ParameterError(f"term {term!r} is not in the model")
    x = act.term_coords[i]
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        raise DegenerateTermError(f"term {term!r} has a zero-norm position")
    return float((x / norm) @ position)


@dataclass(frozen=True)
class ProxySelection:
    """A mood term standing in for a dimension, with its axis angle."""

    term: str
    angle_degrees: float
    sign: float  # +1 if the term points along the positive dimension
    prevalence: int


def select_dimension_proxy(
    act: ActModel,
    term_prevalence: Mapping[str, int],
    num_tracks: int,
    min_share: float = 0.1,
) -> dict[str, ProxySelection]:
    """Pick, per dimension, the prevalent term closest to the dimension axis.

    Candidates must be associated with at least ``min_share`` of all
    tracks.  The angle is measured against the axis as a line (a term at
    the negative pole scores the same angle as its mirror image; its
    orientation is reported in ``sign``).  Ties break toward higher
    prevalence, then lexicographic term order.
    """
    threshold = min_share * num_tracks
    candidates: list[tuple[str, int, np.ndarray]] = []
    for term in act.terms:
        norm_term = normalize_text(term)
        prev = term_prevalence.get(norm_term, term_prevalence.get(term, 0))
        if prev < threshold:
            continue
        x = act.term_coords[act.term_index[norm_term]]
        if float(np.linalg.norm(x)) == 0.0:
            continue
        candidates.append((norm_term, int(prev), x))
    if not candidates:
        raise EmptyCandidateError(
            f"no term reaches the prevalence share {min_share} of {num_tracks} tracks"
        )
    out: dict[str, ProxySelection] = {}
    for dim in DIMENSIONS:
        axis = _AXES[dim]
        ranked = []
        for term, prev, x in candidates:
            cos = float((x @ axis) / (np.linalg.norm(x) * np.linalg.norm(axis)))
            angle = math.degrees(math.acos(min(1.0, abs(cos))))
            sign = 1.0 if cos >= 0 else -1.0
            ranked.append((angle, -prev, term, sign))
        angle, neg_prev, term, sign = min(ranked)
        out[dim] = ProxySelection(term, angle, sign, -neg_prev)
    return out


# ---------------------------------------------------------------------------
# pipeline variants


VARIANTS = ("standard", "svd_only", "mds_only")


def act_variants(
    matrix: TermDocMatrix,
    reference: ReferenceSpace,
    variant: str = "standard",
    k: int = 16,
    restarts: int = 4,
    max_iter: int = 300,
    tol: float = 1e-7,
    seed: int = 0,
) -> ActModel:
    """Fit an aligned mood space by one of three routes.

    standard: rank-k SVD -> cosine term dissimilarities -> 3-D non-metric
    MDS -> Procrustes.  svd_only: the rank-3 SVD term configuration goes
    straight to Procrustes (k is forced to 3).  mds_only: cosine
    distances between raw TF-IDF term rows -> MDS -> Procrustes, which
    matches the standard route at full rank.
    """
    if variant not in VARIANTS:
        raise ParameterError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    provenance = {
        "variant": variant,
        "k": 3 if variant == "svd_only" else k,
        "seed": seed,
        "restarts": restarts,
        "mds_max_iter": max_iter,
        "mds_tol": tol,
    }
    if variant == "svd_only":
        model = svd_fit(matrix, 3)
        return procrustes_fit(model.term_config(), matrix.terms, reference, provenance)
    if variant == "mds_only":
        diss = _cosine_dissimilarity(matrix.to_dense(), matrix.terms)
    else:
        diss = term_dissimilarity(svd_fit(matrix, k))
    embedding = mds_embed(diss, 3, restarts=restarts, max_iter=max_iter, tol=tol, seed=seed)
    provenance["stress1"] = embedding.stress1
    return procrustes_fit(embedding, matrix.terms, reference, provenance)
