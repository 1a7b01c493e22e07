"""Engine-aligned text normalization.

The summarization engine matches contextual JSONL rows against its own
content tokens, so the exporter must tokenize and stopword-filter exactly
the same way: lowercase, split on whitespace, split on punctuation runs
other than periods and apostrophes, strip edge punctuation, drop empties,
then remove function words.
"""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path

_INNER_SPLIT = re.compile(r"[^\w.']+")
_EDGE_STRIP = re.compile(r"^\W+|\W+$")


def tokenize(text: str) -> list[str]:
    out: list[str] = []
    for chunk in text.lower().split():
        for piece in _INNER_SPLIT.split(chunk):
            piece = _EDGE_STRIP.sub("", piece)
            if piece:
                out.append(piece)
    return out


def default_stopwords() -> frozenset[str]:
    data = resources.files("embexport.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(line.strip() for line in data.splitlines() if line.strip())


def load_stopwords(path: str | Path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip() for line in fh if line.strip())


def content_tokens(text: str, stopwords: frozenset[str]) -> list[str]:
    return [t for t in tokenize(text) if t not in stopwords]
