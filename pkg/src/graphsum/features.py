"""Per-sentence feature descriptors: tf-idf, embedding means, token matrices.

Embeddings are consumed from files, never trained here: static tables in
word-vector text format and contextual per-token matrices in JSONL.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Sentence, TaskUnit
from .errors import FormatError


@dataclass(frozen=True)
class TfidfVector:
    """Sparse tf-idf vector; L2-normalized unless empty (norm 0)."""

    entries: dict[str, float]
    norm: float  # 1.0 after normalization, 0.0 for an empty sentence


@dataclass
class EmbeddingTable:
    """Static token -> vector table, read-only after load."""

    dim: int
    vectors: dict[str, np.ndarray]

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def get(self, token: str) -> np.ndarray | None:
        return self.vectors.get(token)


@dataclass
class SentenceFeatures:
    """Feature bundle for one sentence.

    ``token_vecs`` holds one row per embedded content-token occurrence
    (the input to the max-cosine text similarity); ``nbow_vecs`` /
    ``nbow_weights`` hold one row per distinct in-vocabulary token type
    with count-normalized weights (the input to the transport distance).
    """

    sent_id: int
    tfidf: TfidfVector
    mean_vec: np.ndarray | None = None
    token_vecs: np.ndarray | None = None
    nbow_vecs: np.ndarray | None = None
    nbow_weights: np.ndarray | None = None


def compute_tfidf(unit: TaskUnit) -> list[TfidfVector]:
    """Smoothed tf-idf over the unit's sentences, L2-normalized.

    Sentences act as the idf documents: idf = ln((1+N)/(1+df)) + 1 with
    N = |V|. All tokens participate (no stopword filtering here).
    """
    n = unit.n
    df: Counter[str] = Counter()
    for s in unit.sentences:
        df.update(set(s.tokens))
    idf = {t: math.log((1 + n) / (1 + c)) + 1.0 for t, c in df.items()}
    out = []
    for s in unit.sentences:
        tf = Counter(s.tokens)
        entries = {t: c * idf[t] for t, c in tf.items()}
        norm = math.sqrt(sum(v * v for v in entries.values()))
        if norm > 0:
            entries = {t: v / norm for t, v in entries.items()}
            out.append(TfidfVector(entries=entries, norm=1.0))
        else:
            out.append(TfidfVector(entries={}, norm=0.0))
    return out


def load_embedding_table(path: str | Path) -> EmbeddingTable:
    """Load a word-vector text file: header "<count> <dim>", then one
    token and ``dim`` floats per line. Duplicate tokens: last wins."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise FormatError(f"{path}: line 1: header must be '<count> <dim>'")
        try:
            _, dim = int(parts[0]), int(parts[1])
        except ValueError as e:
            raise FormatError(f"{path}: line 1: non-integer header field") from e
        if dim < 1:
            raise FormatError(f"{path}: line 1: dim must be >= 1")
        vectors: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            fields = line.rstrip("\n").split(" ")
            token = fields[0]
            values = [f for f in fields[1:] if f]
            if len(values) != dim:
                raise FormatError(
                    f"{path}: line {lineno}: expected {dim} values, got {len(values)}"
                )
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as e:
                raise FormatError(f"{path}: line {lineno}: non-numeric field") from e
            vectors[token] = vec
    return EmbeddingTable(dim=dim, vectors=vectors)


def load_contextual_embeddings(
    path: str | Path,
    unit: TaskUnit,
    *,
    allow_missing: bool = False,
) -> list[np.ndarray | None]:
    """Load per-sentence contextual token matrices from JSONL.

    Each row is {"doc_id", "sent_id", "tokens", "vectors"}; a leading
    {"meta": ...} line is skipped. Row tokens must equal the sentence's
    content tokens. Returns one (n_content_tokens, dim) matrix per
    sentence, aligned with ``unit.sentences``; sentences absent from the
    file raise unless ``allow_missing``, in which case they get ``None``
    and participate downstream with zero similarity.
    """
    path = Path(path)
    rows: dict[tuple[str, int], tuple[list[str], np.ndarray]] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise FormatError(f"{path}: line {lineno}: malformed JSON: {e.msg}") from e
            if "meta" in obj and "sent_id" not in obj:
                continue
            try:
                key = (str(obj["doc_id"]), int(obj["sent_id"]))
                tokens = [str(t) for t in obj["tokens"]]
                vectors = obj["vectors"]
            except (KeyError, TypeError, ValueError) as e:
                raise FormatError(f"{path}: line {lineno}: missing or invalid field") from e
            if len(vectors) != len(tokens):
                raise FormatError(
                    f"{path}: line {lineno}: {len(tokens)} tokens but {len(vectors)} vectors"
                )
            mat = np.array(vectors, dtype=np.float64).reshape(len(tokens), -1)
            if len(tokens) > 0:
                if dim is None:
                    dim = mat.shape[1]
                elif mat.shape[1] != dim:
                    raise FormatError(
                        f"{path}: line {lineno}: vector dim {mat.shape[1]} != {dim}"
                    )
            rows[key] = (tokens, mat)

    out: list[np.ndarray | None] = []
    for s in unit.sentences:
        key = (s.doc_id, s.sent_id)
        if key not in rows:
            if allow_missing:
                out.append(None)
                continue
            raise FormatError(
                f"{path}: no row for sentence (doc_id={s.doc_id!r}, sent_id={s.sent_id})"
            )
        tokens, mat = rows[key]
        expected = list(s.content_tokens)
        if tokens != expected:
            diverge = next(
                (i for i, (a, b) in enumerate(zip(tokens, expected)) if a != b),
                min(len(tokens), len(expected)),
            )
            got = tokens[diverge] if diverge < len(tokens) else "<end>"
            want = expected[diverge] if diverge < len(expected) else "<end>"
            raise FormatError(
                f"{path}: sentence (doc_id={s.doc_id!r}, sent_id={s.sent_id}): "
                f"token mismatch at index {diverge}: file has {got!r}, engine has {want!r}"
            )
        out.append(mat)
    return out


def sentence_mean_embedding(
    sentence: Sentence,
    table: EmbeddingTable,
    *,
    all_tokens: bool = False,
) -> np.ndarray | None:
    """Arithmetic mean of the table vectors of the sentence's content
    tokens (occurrences); out-of-vocabulary tokens are skipped. Returns
    None when nothing matched."""
    tokens = sentence.tokens if all_tokens else sentence.content_tokens
    vecs = [table.vectors[t] for t in tokens if t in table.vectors]
    if not vecs:
        return None
    return np.mean(np.asarray(vecs, dtype=np.float64), axis=0)


def token_vectors(sentence: Sentence, table: EmbeddingTable) -> np.ndarray | None:
    """Static table vectors for each embedded content-token occurrence."""
    vecs = [table.vectors[t] for t in sentence.content_tokens if t in table.vectors]
    if not vecs:
        return None
    return np.asarray(vecs, dtype=np.float64)


def nbow_distribution(
    sentence: Sentence,
    table: EmbeddingTable,
) -> tuple[np.ndarray, np.ndarray] | None:
    """Normalized bag-of-words over in-vocabulary content tokens.

    Rows are deduplicated by token type (first-occurrence order); weights
    are count-proportional and sum to 1. Returns None when every token is
    out of vocabulary (the empty-distribution condition).
    """
    counts: dict[str, int] = {}
    for t in sentence.content_tokens:
        if t in table.vectors:
            counts[t] = counts.get(t, 0) + 1
    if not counts:
        return None
    total = sum(counts.values())
    vecs = np.asarray([table.vectors[t] for t in counts], dtype=np.float64)
    weights = np.array([c / total for c in counts.values()], dtype=np.float64)
    return vecs, weights


def build_sentence_features(
    unit: TaskUnit,
    *,
    table: EmbeddingTable | None = None,
    contextual: list[np.ndarray | None] | None = None,
) -> list[SentenceFeatures]:
    """Assemble the feature bundles a run needs.

    With a static ``table``: mean vectors, per-occurrence token matrices
    and nBOW distributions. With ``contextual`` matrices: they become the
    token matrices and their row means become the mean vectors.
    """
    tfidf = compute_tfidf(unit)
    feats = [SentenceFeatures(sent_id=s.sent_id, tfidf=tfidf[i]) for i, s in enumerate(unit.sentences)]
    if table is not None:
        for s, f in zip(unit.sentences, feats):
            f.mean_vec = sentence_mean_embedding(s, table)
            f.token_vecs = token_vectors(s, table)
            nbow = nbow_distribution(s, table)
            if nbow is not None:
                f.nbow_vecs, f.nbow_weights = nbow
    if contextual is not None:
        for f, mat in zip(feats, contextual):
            f.token_vecs = mat
            if mat is not None and mat.shape[0] > 0:
                f.mean_vec = mat.mean(axis=0)
    return feats
