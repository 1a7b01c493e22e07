"""Pairwise sentence distances, locally-scaled similarity graphs, graph fusion.

Every distance matrix is symmetric, nonnegative, with a zero diagonal;
graphs carry edge weights in [0, 1] with a unit diagonal. Symmetry is
exact by construction: the upper triangle is computed once and mirrored.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import FormatError
from .features import SentenceFeatures, TfidfVector

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimilarityGraph:
    """Symmetric nonnegative edge-weight matrix over one task unit."""

    w: np.ndarray  # (n, n), values in [0, 1], diagonal 1
    meta: str  # feature-source label
    k_nn: int  # neighbor rank used for local scaling

    @property
    def n(self) -> int:
        return self.w.shape[0]


def check_distance_matrix(d: np.ndarray) -> None:
    """Validate the distance-matrix invariants (symmetric, >= 0, zero diag)."""
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise FormatError("distance matrix must be square")
    if not np.array_equal(d, d.T):
        raise FormatError("distance matrix must be symmetric")
    if np.any(d < 0):
        raise FormatError("distance matrix must be nonnegative")
    if np.any(np.diag(d) != 0):
        raise FormatError("distance matrix must have a zero diagonal")


def cosine_distance(a, b, *, clamp_negative: bool = True) -> float:
    """1 - cos(a, b) with cosine clamped to [0, 1] by default.

    Accepts dense vectors or sparse TfidfVectors (both arguments of the
    same kind). A zero or absent vector yields distance 1. With
    ``clamp_negative=False`` the raw cosine is used and the distance may
    reach 2.
    """
    if isinstance(a, TfidfVector) or isinstance(b, TfidfVector):
        if not (isinstance(a, TfidfVector) and isinstance(b, TfidfVector)):
            raise FormatError("cosine_distance: mixed sparse/dense arguments")
        if a.norm == 0.0 or b.norm == 0.0:
            return 1.0
        small, big = (a.entries, b.entries) if len(a.entries) <= len(b.entries) else (b.entries, a.entries)
        cos = sum(v * big[t] for t, v in small.items() if t in big)
    else:
        if a is None or b is None:
            return 1.0
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if a.shape != b.shape:
            raise FormatError(f"cosine_distance: dimension mismatch {a.shape} vs {b.shape}")
        na = float(np.linalg.norm(a))
        nb = float(np.linalg.norm(b))
        if na == 0.0 or nb == 0.0:
            return 1.0
        cos = float(np.dot(a, b)) / (na * nb)
    if clamp_negative:
        cos = min(max(cos, 0.0), 1.0)
    else:
        cos = min(cos, 1.0)
    return 1.0 - cos


def _normalize_rows(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return m / safe


def _canonical_key(m: np.ndarray) -> tuple:
    return (m.shape[0], m.shape[1], m.tobytes())


def text_semantic_similarity(vi: np.ndarray | None, vj: np.ndarray | None) -> float:
    """Symmetric average of per-word best-match cosine similarities.

    ``vi`` and ``vj`` are (n_tokens, dim) matrices of embedded content
    tokens (one row per occurrence). Each word contributes its maximal
    cosine similarity (clamped to [0, 1]) against the other sentence,
    averaged per side: the result lies in [0, 1] and equals 1 when both
    sides carry identical token matrices. An empty or absent side gives 0.
    """
    if vi is None or vj is None or vi.shape[0] == 0 or vj.shape[0] == 0:
        return 0.0
    if vi.shape[1] != vj.shape[1]:
        raise FormatError(f"text_semantic_similarity: dim mismatch {vi.shape[1]} vs {vj.shape[1]}")
    if vi.shape == vj.shape and np.array_equal(vi, vj):
        return 1.0
    # Canonical argument order makes the float result exactly symmetric.
    if _canonical_key(vj) < _canonical_key(vi):
        vi, vj = vj, vi
    a = _normalize_rows(np.asarray(vi, dtype=np.float64))
    b = _normalize_rows(np.asarray(vj, dtype=np.float64))
    c = np.clip(a @ b.T, 0.0, 1.0)
    return float(c.max(axis=1).sum() / (2 * a.shape[0]) + c.max(axis=0).sum() / (2 * b.shape[0]))


def tss_distance(vi: np.ndarray | None, vj: np.ndarray | None) -> float:
    """Distance induced by the text semantic similarity: 1 - r, in [0, 1]."""
    return 1.0 - text_semantic_similarity(vi, vj)


def wmd_distance(
    pi: tuple[np.ndarray, np.ndarray] | None,
    pj: tuple[np.ndarray, np.ndarray] | None,
) -> float:
    """Exact minimum-cost transport between two nBOW distributions.

    Each argument is a (vectors, weights) pair; the ground metric is the
    Euclidean distance between token vectors. Solved exactly as a
    transportation LP. An empty (None) distribution yields the sentinel
    distance 1.0 (degenerate case; callers log it).
    """
    if pi is None or pj is None:
        return 1.0
    vi, wi = pi
    vj, wj = pj
    if vi.shape[0] == 0 or vj.shape[0] == 0:
        return 1.0
    if vi.shape[1] != vj.shape[1]:
        raise FormatError(f"wmd_distance: dim mismatch {vi.shape[1]} vs {vj.shape[1]}")
    if (
        vi.shape == vj.shape
        and np.array_equal(vi, vj)
        and np.array_equal(wi, wj)
    ):
        return 0.0
    # Canonical argument order makes the float result exactly symmetric.
    if (_canonical_key(vj), wj.tobytes()) < (_canonical_key(vi), wi.tobytes()):
        vi, wi, vj, wj = vj, wj, vi, wi
    if vi.shape[0] == 1 and vj.shape[0] == 1:
        return float(np.linalg.norm(vi[0] - vj[0]))
    cost = np.linalg.norm(vi[:, None, :] - vj[None, :, :], axis=2)
    m, n = cost.shape
    a_eq = np.zeros((m + n - 1, m * n))
    for u in range(m):
        a_eq[u, u * n : (u + 1) * n] = 1.0
    for v in range(n - 1):  # last column constraint is redundant
        a_eq[m + v, v::n] = 1.0
    b_eq = np.concatenate([wi, wj[:-1]])
    res = linprog(cost.ravel(), A_eq=a_eq, b_eq=b_eq, method="highs")
    if res.status != 0:
        raise FormatError(f"wmd_distance: transport LP failed with status {res.status}")
    return float(res.fun)


def build_graph(d: np.ndarray, k_nn: int, *, meta: str = "") -> SimilarityGraph:
    """Gaussian kernel with local scaling over a distance matrix.

    The per-vertex scale is the distance to the k_nn-th nearest other
    vertex (ascending, ties broken by lower index):
    w[i][j] = exp(-d[i][j]^2 / (delta_i * delta_j)). When a scale product
    is zero the weight degenerates to 1 for coincident points and 0
    otherwise. The diagonal is forced to 1. Invariant under uniform
    positive rescaling of d.
    """
    d = np.asarray(d, dtype=np.float64)
    check_distance_matrix(d)
    n = d.shape[0]
    if n < 2:
        raise FormatError("build_graph requires at least 2 vertices")
    if not 1 <= k_nn <= n - 1:
        raise FormatError(f"k_nn={k_nn} out of range [1, {n - 1}]")

    delta = np.empty(n)
    idx = np.arange(n)
    for i in range(n):
        others = idx[idx != i]
        # ascending distance, ties by lower index
        order = others[np.lexsort((others, d[i, others]))]
        delta[i] = d[i, order[k_nn - 1]]

    w = np.ones((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            denom = delta[i] * delta[j]
            if denom == 0.0:
                w[i, j] = 1.0 if d[i, j] == 0.0 else 0.0
            else:
                w[i, j] = np.exp(-(d[i, j] ** 2) / denom)
            w[j, i] = w[i, j]
    return SimilarityGraph(w=w, meta=meta, k_nn=k_nn)


def fuse_graphs(graphs: list[SimilarityGraph], weights: list[float]) -> SimilarityGraph:
    """Weighted average of edge weights; weights are normalized to sum 1."""
    if len(graphs) < 2:
        raise FormatError("fuse_graphs requires at least 2 graphs")
    if len(weights) != len(graphs):
        raise FormatError(f"{len(graphs)} graphs but {len(weights)} weights")
    n = graphs[0].n
    for g in graphs[1:]:
        if g.n != n:
            raise FormatError("fuse_graphs: size mismatch")
    alpha = np.asarray(weights, dtype=np.float64)
    if np.any(alpha < 0):
        raise FormatError("fusion weights must be nonnegative")
    total = alpha.sum()
    if total <= 0:
        raise FormatError("fusion weights must sum to a positive value")
    alpha = alpha / total
    fused = np.zeros((n, n))
    for a, g in zip(alpha, graphs):
        fused += a * g.w
    np.fill_diagonal(fused, 1.0)
    fused = np.clip(fused, 0.0, 1.0)
    meta = "fuse(" + "+".join(g.meta or "?" for g in graphs) + ")"
    return SimilarityGraph(w=fused, meta=meta, k_nn=graphs[0].k_nn)


def _mirror(d: np.ndarray) -> np.ndarray:
    """Copy the strict upper triangle onto the lower and zero the diagonal."""
    out = np.triu(d, 1)
    return out + out.T


def tfidf_distances(vectors: list[TfidfVector]) -> np.ndarray:
    n = len(vectors)
    d = np.ones((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = cosine_distance(vectors[i], vectors[j])
    return _mirror(d)


def dense_cosine_distances(vecs: list[np.ndarray | None]) -> np.ndarray:
    n = len(vecs)
    d = np.ones((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = cosine_distance(vecs[i], vecs[j])
    return _mirror(d)


def tss_distances(token_mats: list[np.ndarray | None]) -> np.ndarray:
    n = len(token_mats)
    d = np.ones((n, n))
    degenerate = [i for i, m in enumerate(token_mats) if m is None or m.shape[0] == 0]
    if degenerate:
        logger.warning("text-similarity: %d sentence(s) with no embedded tokens: %s",
                       len(degenerate), degenerate)
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = tss_distance(token_mats[i], token_mats[j])
    return _mirror(d)


def wmd_distances(nbows: list[tuple[np.ndarray, np.ndarray] | None]) -> np.ndarray:
    n = len(nbows)
    d = np.ones((n, n))
    degenerate = [i for i, p in enumerate(nbows) if p is None]
    if degenerate:
        logger.warning("transport distance: %d sentence(s) with empty distributions: %s",
                       len(degenerate), degenerate)
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = wmd_distance(nbows[i], nbows[j])
    return _mirror(d)


def save_graph_tsv(graph: SimilarityGraph, path) -> None:
    """Export edges as TSV: "i<TAB>j<TAB>w" for i < j, 17 significant digits."""
    lines = [f"# n={graph.n} source={graph.meta} k={graph.k_nn}"]
    for i in range(graph.n):
        for j in range(i + 1, graph.n):
            lines.append(f"{i}\t{j}\t{graph.w[i, j]:.17g}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
