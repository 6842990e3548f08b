"""Low-rank semantic models of the TF-IDF matrix: SVD, NMF, and PLSA.

Each model supports folding in an unseen track (a sparse TF-IDF query
vector) and predicting a per-term weight vector from it.  Fits are
deterministic given (matrix, k, seed, tol, max_iter).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .corpus import TermDocMatrix
from .errors import DegenerateTermError, EmptyQueryError, ParameterError

_EPS = 1e-12  # denominator floor for multiplicative updates and EM


def _as_dense(matrix: Union[TermDocMatrix, np.ndarray]) -> tuple[np.ndarray, tuple, tuple]:
    if isinstance(matrix, TermDocMatrix):
        return matrix.to_dense(), matrix.terms, matrix.track_ids
    dense = np.asarray(matrix, dtype=float)
    if dense.ndim != 2:
        raise ParameterError("expected a 2-D matrix")
    terms = tuple(f"t{i}" for i in range(dense.shape[0]))
    tracks = tuple(f"d{j}" for j in range(dense.shape[1]))
    return dense, terms, tracks


def _check_query(q: np.ndarray, num_terms: int) -> np.ndarray:
    q = np.asarray(q, dtype=float).ravel()
    if q.size != num_terms:
        raise ParameterError(f"query has {q.size} entries, model has {num_terms} terms")
    if q.size == 0 or not np.any(q):
        raise EmptyQueryError("query vector is empty")
    return q


@dataclass(frozen=True)
class SvdModel:
    """Truncated SVD of the TF-IDF matrix: N ~= U diag(S) V^T."""

    terms: tuple[str, ...]
    track_ids: tuple[str, ...]
    u: np.ndarray  # terms x k
    s: np.ndarray  # k, descending
    v: np.ndarray  # tracks x k
    k: int

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.s) @ self.v.T

    def term_config(self) -> np.ndarray:
        """Rows U_i * S used for term geometry."""
        return self.u * self.s


def svd_fit(matrix: Union[TermDocMatrix, np.ndarray], k: int) -> SvdModel:
    """Top-k singular triplets of the dense TF-IDF matrix."""
    dense, terms, tracks = _as_dense(matrix)
    if not 1 <= k <= min(dense.shape):
        raise ParameterError(
            f"rank k={k} outside [1, {min(dense.shape)}] for shape {dense.shape}"
        )
    u, s, vt = np.linalg.svd(dense, full_matrices=False)
    return SvdModel(terms, tracks, u[:, :k].copy(), s[:k].copy(), vt[:k].T.copy(), k)


def svd_predict_weights(model: SvdModel, q: np.ndarray) -> np.ndarray:
    """Fold a query into the rank-k space and read back per-term weights.

    q_hat = S^-1 U^T q, then weight_i = U_i S q_hat^T.
    """
    q = _check_query(q, len(model.terms))
    q_hat = (model.u.T @ q) / model.s
    return (model.u * model.s) @ q_hat


def _cosine_dissimilarity(rows: np.ndarray, terms: tuple[str, ...]) -> np.ndarray:
    norms = np.linalg.norm(rows, axis=1)
    if np.any(norms == 0):
        bad = terms[int(np.argmin(norms))]
        raise DegenerateTermError(f"term {bad!r} has a zero-norm configuration row")
    cos = (rows @ rows.T) / np.outer(norms, norms)
    d = 1.0 - cos
    d = np.clip((d + d.T) / 2.0, 0.0, 2.0)
    np.fill_diagonal(d, 0.0)
    return d


def term_dissimilarity(model: SvdModel) -> np.ndarray:
    """Cosine distances between term rows U_i S; symmetric, zero diagonal."""
    return _cosine_dissimilarity(model.term_config(), model.terms)


@dataclass(frozen=True)
class NmfModel:
    """Nonnegative factorization N ~= W H fitted by multiplicative updates."""

    terms: tuple[str, ...]
    track_ids: tuple[str, ...]
    w: np.ndarray  # terms x k
    h: np.ndarray  # k x tracks
    k: int
    objective_trace: tuple[float, ...]
    seed: int = 0
    tol: float = 1e-6
    max_iter: int = 200


def _nmf_objective(n: np.ndarray, w: np.ndarray, h: np.ndarray) -> float:
    return 0.5 * float(np.linalg.norm(n - w @ h, "fro") ** 2)


def nmf_fit(
    matrix: Union[TermDocMatrix, np.ndarray],
    k: int,
    max_iter: int = 200,
    tol: float = 1e-6,
    seed: int = 0,
) -> NmfModel:
    """Lee-Seung multiplicative updates for 0.5 * ||N - WH||_F^2.

    W and H start uniform-random in (0, 1] from ``seed``.  Stops when the
    relative objective decrease drops below ``tol`` or after ``max_iter``
    iterations.  The recorded trace starts with the objective of the
    initial factors and appends one value per iteration.
    """
    dense, terms, tracks = _as_dense(matrix)
    if np.any(dense < 0):
        raise ParameterError("NMF requires a nonnegative matrix")
    if k < 1:
        raise ParameterError(f"rank k={k} must be >= 1")
    rng = np.random.default_rng(seed)
    m, n = dense.shape
    w = 1.0 - rng.random((m, k))
    h = 1.0 - rng.random((k, n))
    trace = [_nmf_objective(dense, w, h)]
    for _ in range(max_iter):
        h *= (w.T @ dense) / np.maximum(w.T @ w @ h, _EPS)
        w *= (dense @ h.T) / np.maximum(w @ h @ h.T, _EPS)
        obj = _nmf_objective(dense, w, h)
        prev = trace[-1]
        trace.append(obj)
        if prev - obj < tol * max(prev, _EPS):
            break
    return NmfModel(terms, tracks, w, h, k, tuple(trace), seed, tol, max_iter)


def nmf_predict_weights(
    model: NmfModel,
    q: np.ndarray,
    max_iter: int = 50,
    tol: float = 1e-6,
) -> np.ndarray:
    """Fold in q by solving min_{c >= 0} 0.5 * ||q - c H||_F^2 with H fixed.

    The coefficient row starts at ones (deterministic) and follows the
    same multiplicative rule as the fit; weight_i = W_i c.
    """
    q = _check_query(q, len(model.terms))
    if np.any(q < 0):
        raise ParameterError("NMF fold-in requires a nonnegative query")
    h = model.h
    hht = h @ h.T
    qht = q @ h.T
    c = np.ones(model.k)
    prev = 0.5 * float(np.linalg.norm(q - c @ h) ** 2)
    for _ in range(max_iter):
        c *= qht / np.maximum(c @ hht, _EPS)
        obj = 0.5 * float(np.linalg.norm(q - c @ h) ** 2)
        if prev - obj < tol * max(prev, _EPS):
            break
        prev = obj
    return model.w @ c


@dataclass(frozen=True)
class PlsaModel:
    """Aspect model P(t, w) = P(t) sum_z P(w|z) P(z|t) fitted by EM."""

    terms: tuple[str, ...]
    track_ids: tuple[str, ...]
    p_w_given_z: np.ndarray  # terms x k, column-stochastic
    p_z_given_t: np.ndarray  # k x tracks, column-stochastic
    p_t: np.ndarray  # track prior
    k: int
    loglik_trace: tuple[float, ...]
    seed: int = 0
    tol: float = 1e-6
    max_iter: int = 200


def _plsa_loglik(n: np.ndarray, pwz: np.ndarray, pzt: np.ndarray, pt: np.ndarray) -> float:
    mix = np.maximum(pwz @ pzt, _EPS)
    log_joint = np.log(mix) + np.log(np.maximum(pt, _EPS))[None, :]
    return float(np.sum(n * log_joint))


def _random_stochastic(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    m = 1.0 - rng.random((rows, cols))
    return m / m.sum(axis=0, keepdims=True)


def plsa_fit(
    matrix: Union[TermDocMatrix, np.ndarray],
    k: int,
    max_iter: int = 200,
    tol: float = 1e-6,
    seed: int = 0,
) -> PlsaModel:
    """EM for the aspect model, maximizing sum_ij N_ij log P(t_j, w_i).

    P(t_j) is the maximum-likelihood column marginal and stays fixed.
    Both factors are renormalized every M-step, so their columns remain
    stochastic after every iteration.  The trace starts with the
    log-likelihood of the random initialization.
    """
    dense, terms, tracks = _as_dense(matrix)
    if np.any(dense < 0):
        raise ParameterError("PLSA requires a nonnegative matrix")
    if k < 1:
        raise ParameterError(f"rank k={k} must be >= 1")
    rng = np.random.default_rng(seed)
    pwz = _random_stochastic(rng, dense.shape[0], k)
    pzt = _random_stochastic(rng, k, dense.shape[1])
    total = dense.sum()
    if total <= 0:
        raise ParameterError("PLSA requires a matrix with positive mass")
    pt = dense.sum(axis=0) / total
    trace = [_plsa_loglik(dense, pwz, pzt, pt)]
    for _ in range(max_iter):
        mix = np.maximum(pwz @ pzt, _EPS)
        ratio = dense / mix
        # M-step from the shared E-step posterior: both numerators use the
        # old factors, then columns are renormalized.
        pwz_num = pwz * (ratio @ pzt.T)
        pzt_num = pzt * (pwz.T @ ratio)
        pwz = pwz_num / np.maximum(pwz_num.sum(axis=0, keepdims=True), _EPS)
        pzt = pzt_num / np.maximum(pzt_num.sum(axis=0, keepdims=True), _EPS)
        ll = _plsa_loglik(dense, pwz, pzt, pt)
        prev = trace[-1]
        trace.append(ll)
        if ll - prev < tol * abs(prev):
            break
    return PlsaModel(terms, tracks, pwz, pzt, pt, k, tuple(trace), seed, tol, max_iter)


def plsa_predict_weights(
    model: PlsaModel,
    q: np.ndarray,
    max_iter: int = 50,
    tol: float = 1e-6,
) -> np.ndarray:
    """Fold in q by EM over P(z|q) only, with P(w|z) frozen.

    P(z|q) starts uniform, so the fold-in is deterministic for a fitted
    model.  The returned weight for term i is sum_z P(w_i|z) P(z|q); the
    weight vector is a mixture of stochastic columns and sums to 1.
    """
    q = _check_query(q, len(model.terms))
    if np.any(q < 0):
        raise ParameterError("PLSA fold-in requires a nonnegative query")
    pwz = model.p_w_given_z
    pzq = np.full(model.k, 1.0 / model.k)
    prev = -np.inf
    for _ in range(max_iter):
        mix = np.maximum(pwz @ pzq, _EPS)
        # posterior P(z|q, w_i) folded directly into the M-step sum
        weighted = (q / mix) @ (pwz * pzq[None, :])
        pzq = weighted / max(weighted.sum(), _EPS)
        ll = float(q @ np.log(np.maximum(pwz @ pzq, _EPS)))
        if ll - prev < tol * max(abs(prev), _EPS) and np.isfinite(prev):
            break
        prev = ll
    return pwz @ pzq
