"""Scale predictions for tracks represented as term-count queries.

A "scale" is either one of the mood dimensions (valence, arousal,
tension) or a mood term.  The aligned mood space predicts dimensions by
coordinate read-off and terms by directional projection; the low-rank
baselines predict term weights by fold-in and need a proxy term (with
its orientation sign) to stand in for a dimension.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .corpus import TermDocMatrix, normalize_text, weights_from_term_counts
from .errors import ConfigurationError, ParameterError
from .factorize import (
    NmfModel,
    PlsaModel,
    SvdModel,
    nmf_predict_weights,
    plsa_predict_weights,
    svd_predict_weights,
)
from .moodspace import (
    DIMENSIONS,
    ActModel,
    predict_dimension,
    predict_term,
    project_track,
)

BASELINE_METHODS = ("svd", "nmf", "plsa", "vsm")
METHODS = ("act",) + BASELINE_METHODS

TermCounts = Mapping[str, int]


def act_scale_values(act: ActModel, q: np.ndarray, scales: tuple[str, ...]) -> dict[str, float]:
    """Predict every scale for one query from the aligned mood space."""
    position = project_track(act, q)
    out = {}
    for scale in scales:
        if scale in DIMENSIONS:
            out[scale] = predict_dimension(position, scale)
        else:
            out[scale] = predict_term(act, position, scale)
    return out


def predict_tracks_act(
    act: ActModel,
    matrix: TermDocMatrix,
    track_term_counts: Mapping[str, TermCounts],
    scales: tuple[str, ...],
) -> dict[str, dict[str, float]]:
    """Per-scale predictions for many tracks given their raw term counts."""
    out: dict[str, dict[str, float]] = {scale: {} for scale in scales}
    for track_id, counts in track_term_counts.items():
        q = weights_from_term_counts(counts, matrix)
        values = act_scale_values(act, q, scales)
        for scale, value in values.items():
            out[scale][track_id] = value
    return out


def _baseline_weights(method: str, model, matrix: TermDocMatrix | None, q: np.ndarray,
                      max_iter: int, tol: float) -> tuple[np.ndarray, tuple[str, ...]]:
    if method == "svd":
        if not isinstance(model, SvdModel):
            raise ParameterError("method 'svd' needs an SvdModel")
        return svd_predict_weights(model, q), model.terms
    if method == "nmf":
        if not isinstance(model, NmfModel):
            raise ParameterError("method 'nmf' needs an NmfModel")
        return nmf_predict_weights(model, q, max_iter=max_iter, tol=tol), model.terms
    if method == "plsa":
        if not isinstance(model, PlsaModel):
            raise ParameterError("method 'plsa' needs a PlsaModel")
        return plsa_predict_weights(model, q, max_iter=max_iter, tol=tol), model.terms
    if method == "vsm":
        if matrix is None:
            raise ParameterError("method 'vsm' needs the TF-IDF matrix")
        return q, matrix.terms
    raise ParameterError(f"unknown method {method!r}; expected one of {METHODS}")


def predict_tracks_baseline(
    method: str,
    model,
    matrix: TermDocMatrix,
    track_term_counts: Mapping[str, TermCounts],
    scales: tuple[str, ...],
    proxies: Mapping[str, tuple[str, float]] | None = None,
    max_iter: int = 50,
    tol: float = 1e-6,
) -> dict[str, dict[str, float]]:
    """Per-scale predictions from a low-rank baseline (or the raw VSM).

    ``proxies`` maps a dimension to (term, sign); the dimension's value is
    the signed weight of the proxy term.  Dimension scales without a
    proxy are a configuration error.
    """
    for scale in scales:
        if scale in DIMENSIONS and (proxies is None or scale not in proxies):
            raise ConfigurationError(
                f"dimension scale {scale!r} needs a proxy term for method {method!r}"
            )
    out: dict[str, dict[str, float]] = {scale: {} for scale in scales}
    index: dict[str, int] | None = None
    for track_id, counts in track_term_counts.items():
        q = weights_from_term_counts(counts, matrix)
        weights, terms = _baseline_weights(method, model, matrix, q, max_iter, tol)
        if index is None:
            index = {normalize_text(t): i for i, t in enumerate(terms)}
        for scale in scales:
            if scale in DIMENSIONS:
                proxy_term, sign = proxies[scale]
                i = index.get(normalize_text(proxy_term))
                if i is None:
                    raise ConfigurationError(
                        f"proxy term {proxy_term!r} is not in the model"
                    )
                out[scale][track_id] = float(sign) * float(weights[i])
            else:
                i = index.get(normalize_text(scale))
                if i is None:
                    raise ParameterError(f"scale term {scale!r} is not in the model")
                out[scale][track_id] = float(weights[i])
    return out
