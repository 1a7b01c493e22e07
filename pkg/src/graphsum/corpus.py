"""Sentence ingestion: loading task units, splitting, tokenizing, stopword filtering.

A task unit is the sentence universe for one summarization run: either a
single document (``lines`` format, one sentence per line) or a cluster of
documents with optional reference summaries (``cluster-json`` format).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import FormatError

# Whitespace-separated chunks are further split on punctuation runs, except
# that periods and apostrophes survive inside a token ("u.s", "don't").
_INNER_SPLIT = re.compile(r"[^\w.']+")
_EDGE_STRIP = re.compile(r"^\W+|\W+$")

# Candidate sentence boundary: terminal punctuation followed by whitespace.
_BOUNDARY = re.compile(r"([.!?]+)(\s+)")


@dataclass(frozen=True)
class Sentence:
    """One tokenized sentence of a task unit.

    ``tokens``, ``content_tokens`` and ``byte_len`` are derived from the
    working text: ``raw_text`` normally, ``compressed_text`` when the unit
    was loaded with ``use_compressed``. Budget accounting and summary
    emission use the same working text, so ``byte_len`` is the single
    source of truth for byte budgets.
    """

    sent_id: int
    doc_id: str
    position_m: int  # 1-based position within its document
    raw_text: str
    tokens: tuple[str, ...]
    content_tokens: tuple[str, ...]
    byte_len: int
    compressed_text: str | None = None


@dataclass(frozen=True)
class TaskUnit:
    """The sentence universe V for one summarization task."""

    unit_id: str
    sentences: tuple[Sentence, ...]
    references: tuple[str, ...] = ()
    use_compressed: bool = False

    @property
    def n(self) -> int:
        return len(self.sentences)

    def emitted_text(self, sentence: Sentence) -> str:
        """Text a summary would emit for this sentence."""
        if self.use_compressed:
            assert sentence.compressed_text is not None
            return sentence.compressed_text
        return sentence.raw_text


def default_stopwords() -> frozenset[str]:
    """The bundled English function-word list."""
    data = resources.files("graphsum.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(line.strip() for line in data.splitlines() if line.strip())


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Load a stopword file: UTF-8, one token per line."""
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip() for line in fh if line.strip())


def default_abbreviations() -> frozenset[str]:
    data = resources.files("graphsum.data").joinpath("abbreviations.txt").read_text("utf-8")
    return frozenset(line.strip() for line in data.splitlines() if line.strip())


def tokenize(text: str) -> list[str]:
    """Lowercase and split ``text`` into tokens.

    Splits on Unicode whitespace, then on punctuation runs other than
    periods and apostrophes; leading/trailing punctuation is stripped from
    each piece and empty results are dropped. Digits are retained, as are
    internal periods ("u.s") and apostrophes ("don't").
    """
    out: list[str] = []
    for chunk in text.lower().split():
        for piece in _INNER_SPLIT.split(chunk):
            piece = _EDGE_STRIP.sub("", piece)
            if piece:
                out.append(piece)
    return out


def filter_function_words(tokens: list[str], stoplist: frozenset[str] | set[str]) -> list[str]:
    """Remove exact stoplist matches, preserving order."""
    return [t for t in tokens if t not in stoplist]


def split_sentences(text: str, abbreviations: frozenset[str] | None = None) -> list[str]:
    """Rule-based sentence splitting.

    Splits at ``[.?!]`` runs followed by whitespace and a capital letter,
    except after known abbreviations or single-letter initials ("Mr.",
    "J."). Splits only at whitespace, so tokens are never cut apart.
    """
    if abbreviations is None:
        abbreviations = default_abbreviations()
    pieces: list[str] = []
    start = 0
    for m in _BOUNDARY.finditer(text):
        end_ws = m.end()
        if end_ws >= len(text) or not text[end_ws].isupper():
            continue
        punct = m.group(1)
        if punct == ".":
            before = text[:m.start(1)]
            word = re.search(r"[\w.']+$", before)
            if word is not None:
                prev = word.group(0).lower().rstrip(".")
                if prev in abbreviations or (len(prev) == 1 and prev.isalpha()):
                    continue
        pieces.append(text[start:m.start(2)])
        start = end_ws
    pieces.append(text[start:])
    return [p.strip() for p in pieces if p.strip()]


def _build_sentence(
    sent_id: int,
    doc_id: str,
    position_m: int,
    raw_text: str,
    compressed_text: str | None,
    use_compressed: bool,
    stopwords: frozenset[str],
) -> Sentence:
    working = compressed_text if use_compressed else raw_text
    assert working is not None
    tokens = tuple(tokenize(working))
    content = tuple(filter_function_words(list(tokens), stopwords))
    return Sentence(
        sent_id=sent_id,
        doc_id=doc_id,
        position_m=position_m,
        raw_text=raw_text,
        tokens=tokens,
        content_tokens=content,
        byte_len=len(working.encode("utf-8")),
        compressed_text=compressed_text,
    )


def load_task_unit(
    path: str | Path,
    format: str = "lines",
    *,
    stopwords: frozenset[str] | None = None,
    use_compressed: bool = False,
    split: bool = False,
) -> TaskUnit:
    """Load a task unit from ``path``.

    ``lines``: UTF-8, one sentence per line, one document per file.
    ``cluster-json``: one JSON object with documents, optional compressed
    sentence variants, and reference summaries. Documents are concatenated
    in file order; ``sent_id`` runs over the whole cluster while
    ``position_m`` restarts at 1 in each document.

    With ``split`` (lines format only), each line is further passed
    through the rule-based sentence splitter.
    """
    path = Path(path)
    if stopwords is None:
        stopwords = default_stopwords()

    if format == "lines":
        if use_compressed:
            raise FormatError("lines format carries no compressed variants")
        raw_lines = [ln.strip() for ln in path.read_text("utf-8").splitlines()]
        texts = [ln for ln in raw_lines if ln]
        if split:
            texts = [piece for ln in texts for piece in split_sentences(ln)]
        if not texts:
            raise FormatError(f"{path}: empty task unit")
        sentences = tuple(
            _build_sentence(i, path.stem, i + 1, text, None, False, stopwords)
            for i, text in enumerate(texts)
        )
        return TaskUnit(unit_id=path.stem, sentences=sentences)

    if format == "cluster-json":
        try:
            obj = json.loads(path.read_text("utf-8"))
        except json.JSONDecodeError as e:
            raise FormatError(f"{path}: malformed JSON at line {e.lineno}: {e.msg}") from e
        if not isinstance(obj, dict) or "documents" not in obj:
            raise FormatError(f"{path}: cluster-json must be an object with a 'documents' list")
        unit_id = str(obj.get("cluster_id", path.stem))
        references = tuple(str(r) for r in obj.get("references", []))
        sentences: list[Sentence] = []
        sent_id = 0
        for d, doc in enumerate(obj["documents"]):
            doc_id = str(doc.get("doc_id", f"doc{d}"))
            texts = [str(t) for t in doc.get("sentences", [])]
            compressed = doc.get("compressed")
            if compressed is not None and len(compressed) != len(texts):
                raise FormatError(
                    f"{path}: document '{doc_id}' has {len(texts)} sentences "
                    f"but {len(compressed)} compressed variants"
                )
            if use_compressed and compressed is None:
                raise FormatError(
                    f"{path}: use_compressed set but document '{doc_id}' has no compressed variants"
                )
            for m, text in enumerate(texts):
                ctext = str(compressed[m]) if compressed is not None else None
                sentences.append(
                    _build_sentence(sent_id, doc_id, m + 1, text, ctext, use_compressed, stopwords)
                )
                sent_id += 1
        if not sentences:
            raise FormatError(f"{path}: empty task unit")
        return TaskUnit(
            unit_id=unit_id,
            sentences=tuple(sentences),
            references=references,
            use_compressed=use_compressed,
        )

    raise FormatError(f"unknown task unit format: {format!r}")
