"""Contextual embedding export: transformer checkpoints -> token-matrix JSONL.

Each engine content token is tokenized into subwords separately, the full
sequence runs through the model once (in windows when it exceeds the
model's position limit), and every token's vector is the mean of its
subword vectors from the chosen hidden layer. Row tokens therefore equal
the engine's content tokens exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer

from .textnorm import content_tokens, default_stopwords


def subword_spans(tokens: list[str], tokenizer) -> tuple[list[int], list[tuple[int, int]], list[str]]:
    """Subword ids for a token sequence plus each token's [start, end) span.

    A token the tokenizer maps to nothing falls back to the unknown-token
    id (best-effort span) and is reported in the warnings list.
    """
    ids: list[int] = []
    spans: list[tuple[int, int]] = []
    warnings: list[str] = []
    for tok in tokens:
        piece_ids = tokenizer.encode(tok, add_special_tokens=False)
        if not piece_ids:
            piece_ids = [tokenizer.unk_token_id]
            warnings.append(f"token {tok!r}: no subwords, fell back to {tokenizer.unk_token}")
        spans.append((len(ids), len(ids) + len(piece_ids)))
        ids.extend(piece_ids)
    return ids, spans, warnings


def _window_bounds(spans: list[tuple[int, int]], max_window: int) -> list[tuple[int, int]]:
    """Split the subword sequence at token boundaries into windows of at
    most ``max_window`` subwords (a single overlong token gets its own
    window and is truncated by the caller)."""
    bounds: list[tuple[int, int]] = []
    start = 0
    end = 0
    for s, e in spans:
        if e - start > max_window and end > start:
            bounds.append((start, end))
            start = end
        end = e
    if end > start or not bounds:
        bounds.append((start, end))
    return bounds


@torch.no_grad()
def sentence_matrix(
    tokens: list[str],
    tokenizer,
    model,
    layer: int,
) -> tuple[np.ndarray, list[str]]:
    """One row per token: mean of its subword vectors at ``layer``
    (an index into hidden_states; -1 is the final layer)."""
    dim = model.config.hidden_size
    if not tokens:
        return np.zeros((0, dim)), []
    ids, spans, warnings = subword_spans(tokens, tokenizer)
    max_window = int(model.config.max_position_embeddings) - 2
    hidden_rows: list[torch.Tensor] = []
    for wstart, wend in _window_bounds(spans, max_window):
        window_ids = ids[wstart:wend][:max_window]
        input_ids = torch.tensor(
            [[tokenizer.cls_token_id] + window_ids + [tokenizer.sep_token_id]]
        )
        out = model(input_ids=input_ids, output_hidden_states=True)
        states = out.hidden_states[layer][0, 1 : 1 + len(window_ids)]
        if len(window_ids) < wend - wstart:  # overlong token truncated
            pad = states[-1:].expand(wend - wstart - len(window_ids), -1)
            states = torch.cat([states, pad])
        hidden_rows.append(states)
    hidden = torch.cat(hidden_rows)
    mat = np.stack([
        hidden[s:e].mean(dim=0).numpy().astype(np.float64) for s, e in spans
    ])
    return mat, warnings


def export_contextual(
    model_path: str | Path,
    unit_json: str | Path,
    out_path: str | Path,
    *,
    layer: int = -1,
    stopwords: frozenset[str] | None = None,
    log_path: str | Path | None = None,
) -> tuple[int, list[str]]:
    """Run the model over every sentence of a cluster-json unit and emit
    JSONL rows keyed by (doc_id, sent_id), tokens equal to the engine's
    content tokens. Returns (rows written, warnings)."""
    out_path = Path(out_path)
    if stopwords is None:
        stopwords = default_stopwords()
    tokenizer = AutoTokenizer.from_pretrained(str(model_path))
    model = AutoModel.from_pretrained(str(model_path))
    model.eval()

    obj = json.loads(Path(unit_json).read_text("utf-8"))
    n_layers = model.config.num_hidden_layers
    resolved_layer = layer if layer >= 0 else n_layers + 1 + layer
    rows = [json.dumps({"meta": {
        "model": str(model_path),
        "dim": model.config.hidden_size,
        "layer": resolved_layer,
    }})]
    all_warnings: list[str] = []
    sent_id = 0
    for d, doc in enumerate(obj.get("documents", [])):
        doc_id = str(doc.get("doc_id", f"doc{d}"))
        for text in doc.get("sentences", []):
            tokens = content_tokens(str(text), stopwords)
            mat, warnings = sentence_matrix(tokens, tokenizer, model, layer)
            for w in warnings:
                all_warnings.append(f"(doc_id={doc_id}, sent_id={sent_id}) {w}")
            rows.append(json.dumps({
                "doc_id": doc_id,
                "sent_id": sent_id,
                "tokens": tokens,
                "vectors": [[round(float(v), 6) for v in row] for row in mat],
            }))
            sent_id += 1

    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    log = Path(log_path) if log_path else out_path.with_name(out_path.name + ".warnings.log")
    log.write_text("".join(w + "\n" for w in all_warnings), encoding="utf-8")
    return sent_id, all_warnings
