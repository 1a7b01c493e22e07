"""Static embedding export: word2vec models -> word-vector text tables."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .textnorm import content_tokens, default_stopwords


class ModelFormatError(ValueError):
    pass


def load_word2vec_binary(path: str | Path) -> tuple[int, dict[str, np.ndarray]]:
    """Parse the classic word2vec C binary format: an ASCII "<count> <dim>"
    header line, then per entry the token, a space, and dim float32s."""
    path = Path(path)
    with open(path, "rb") as fh:
        header = fh.readline().decode("utf-8").split()
        if len(header) != 2:
            raise ModelFormatError(f"{path}: bad word2vec binary header")
        count, dim = int(header[0]), int(header[1])
        vectors: dict[str, np.ndarray] = {}
        width = 4 * dim
        for _ in range(count):
            chars = bytearray()
            while True:
                ch = fh.read(1)
                if not ch:
                    raise ModelFormatError(f"{path}: truncated entry after {len(vectors)} tokens")
                if ch == b" ":
                    break
                if ch != b"\n":  # some writers put a newline before each token
                    chars.extend(ch)
            token = chars.decode("utf-8")
            raw = fh.read(width)
            if len(raw) != width:
                raise ModelFormatError(f"{path}: truncated vector for token {token!r}")
            vectors[token] = np.frombuffer(raw, dtype=np.float32).astype(np.float64)
    return dim, vectors


def load_word2vec_text(path: str | Path) -> tuple[int, dict[str, np.ndarray]]:
    """Parse the word-vector text format (same layout the engine reads)."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ModelFormatError(f"{path}: bad word-vector text header")
        dim = int(header[1])
        vectors: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            fields = line.rstrip("\n").split(" ")
            values = [f for f in fields[1:] if f]
            if len(values) != dim:
                raise ModelFormatError(f"{path}: line {lineno}: expected {dim} values")
            vectors[fields[0]] = np.array([float(v) for v in values])
    return dim, vectors


def load_static_model(path: str | Path) -> tuple[int, dict[str, np.ndarray]]:
    path = Path(path)
    if path.suffix == ".bin":
        return load_word2vec_binary(path)
    return load_word2vec_text(path)


def read_vocab(path: str | Path, stopwords: frozenset[str] | None = None) -> list[str]:
    """A vocabulary request: either a plain token list (one per line) or a
    cluster-json unit, from which the sorted set of content tokens is taken."""
    path = Path(path)
    if path.suffix == ".json":
        if stopwords is None:
            stopwords = default_stopwords()
        obj = json.loads(path.read_text("utf-8"))
        tokens: set[str] = set()
        for doc in obj.get("documents", []):
            for text in doc.get("sentences", []):
                tokens.update(content_tokens(str(text), stopwords))
        return sorted(tokens)
    return [ln.strip() for ln in path.read_text("utf-8").splitlines() if ln.strip()]


def export_static(
    model_path: str | Path,
    vocab: list[str],
    out_path: str | Path,
    log_path: str | Path | None = None,
) -> tuple[int, list[str]]:
    """Write the model's vectors for the requested vocabulary in the
    word-vector text format; the header count matches the emitted rows.
    Tokens absent from the model are skipped and listed in the sidecar
    log. Returns (rows written, skipped tokens)."""
    out_path = Path(out_path)
    dim, vectors = load_static_model(model_path)
    present = [t for t in vocab if t in vectors]
    missing = [t for t in vocab if t not in vectors]
    lines = [f"{len(present)} {dim}"]
    for token in present:
        lines.append(token + " " + " ".join(f"{v:.6f}" for v in vectors[token]))
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    log = Path(log_path) if log_path else out_path.with_name(out_path.name + ".skipped.log")
    log.write_text("".join(t + "\n" for t in missing), encoding="utf-8")
    return len(present), missing
