"""Self-contained ROUGE-1/2/L scorer with byte-limit truncation and stemming.

Multiple references are combined by keeping the reference with the best
F-1 (documented divergence from jackknifing). The byte limit truncates
the candidate only, before tokenization.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

from .porter import stem

_TOKEN = re.compile(r"\w+")

METRICS = ("r1", "r2", "rl")


@dataclass(frozen=True)
class RougeReport:
    metric: str  # "r1", "r2" or "rl"
    precision: float
    recall: float
    f1: float
    byte_limit: int | None = None
    stemming: bool = True


def truncate_bytes(text: str, limit: int) -> str:
    """Longest UTF-8-valid prefix of at most ``limit`` bytes; a multi-byte
    character straddling the limit is dropped entirely."""
    if limit < 0:
        raise ValueError("byte limit must be >= 0")
    return text.encode("utf-8")[:limit].decode("utf-8", errors="ignore")


def _tokens(text: str, stemming: bool) -> list[str]:
    toks = _TOKEN.findall(text.lower())
    if stemming:
        toks = [stem(t) for t in toks]
    return toks


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def _prf_ngram(cand: list[str], ref: list[str], n: int) -> tuple[float, float, float]:
    cand_grams = _ngrams(cand, n)
    ref_grams = _ngrams(ref, n)
    total_c = sum(cand_grams.values())
    total_r = sum(ref_grams.values())
    if total_c == 0 or total_r == 0:
        return 0.0, 0.0, 0.0
    overlap = sum(min(c, ref_grams[g]) for g, c in cand_grams.items() if g in ref_grams)
    p = overlap / total_c
    r = overlap / total_r
    return p, r, _f1(p, r)


def _lcs_len(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            if x == y:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def _prf_lcs(cand: list[str], ref: list[str]) -> tuple[float, float, float]:
    if not cand or not ref:
        return 0.0, 0.0, 0.0
    lcs = _lcs_len(cand, ref)
    p = lcs / len(cand)
    r = lcs / len(ref)
    return p, r, _f1(p, r)


def _best_reference(scores: list[tuple[float, float, float]]) -> tuple[float, float, float]:
    """The (p, r, f) of the reference with the highest F-1 (first wins ties)."""
    best = scores[0]
    for s in scores[1:]:
        if s[2] > best[2]:
            best = s
    return best


def _score(
    candidate: str,
    references: list[str],
    metric: str,
    byte_limit: int | None,
    stemming: bool,
) -> RougeReport:
    if not references:
        raise ValueError("at least one reference is required")
    if byte_limit is not None:
        candidate = truncate_bytes(candidate, byte_limit)
    cand = _tokens(candidate, stemming)
    per_ref = []
    for ref_text in references:
        ref = _tokens(ref_text, stemming)
        if metric == "rl":
            per_ref.append(_prf_lcs(cand, ref))
        else:
            per_ref.append(_prf_ngram(cand, ref, 1 if metric == "r1" else 2))
    p, r, f = _best_reference(per_ref)
    return RougeReport(metric=metric, precision=p, recall=r, f1=f,
                       byte_limit=byte_limit, stemming=stemming)


def rouge_n(
    candidate: str,
    references: list[str],
    n: int,
    *,
    byte_limit: int | None = None,
    stemming: bool = True,
) -> RougeReport:
    """Clipped n-gram overlap scores, n in {1, 2}."""
    if n not in (1, 2):
        raise ValueError("only n=1 and n=2 are supported")
    return _score(candidate, references, "r1" if n == 1 else "r2", byte_limit, stemming)


def rouge_l(
    candidate: str,
    references: list[str],
    *,
    byte_limit: int | None = None,
    stemming: bool = True,
) -> RougeReport:
    """Longest-common-subsequence scores over token sequences."""
    return _score(candidate, references, "rl", byte_limit, stemming)


def score_all(
    candidate: str,
    references: list[str],
    metrics: tuple[str, ...] = METRICS,
    *,
    byte_limit: int | None = None,
    stemming: bool = True,
) -> dict[str, RougeReport]:
    out = {}
    for m in metrics:
        if m == "r1":
            out[m] = rouge_n(candidate, references, 1, byte_limit=byte_limit, stemming=stemming)
        elif m == "r2":
            out[m] = rouge_n(candidate, references, 2, byte_limit=byte_limit, stemming=stemming)
        elif m == "rl":
            out[m] = rouge_l(candidate, references, byte_limit=byte_limit, stemming=stemming)
        else:
            raise ValueError(f"unknown metric {m!r}")
    return out
