"""Round-trip acceptance: exporter output must load cleanly in the engine.

The engine package is imported here purely as the oracle for its own file
formats; the exporter's production code never touches it.
"""

import struct

import numpy as np
import pytest

from embexport.cli import main
from embexport.static import export_static, read_vocab
from embexport.contextual import export_contextual

from conftest import MINI_CLUSTER

PASS = "ACCEPTANCE {}: PASS"


def test_static_roundtrip_six_decimals(tmp_path):
    rng = np.random.default_rng(13)
    vocab = read_vocab(MINI_CLUSTER)
    entries = {t: rng.normal(size=5).astype(np.float32) for t in vocab[:30]}
    model = tmp_path / "model.bin"
    with open(model, "wb") as fh:
        fh.write(f"{len(entries)} 5\n".encode())
        for token, vec in entries.items():
            fh.write(token.encode() + b" " + struct.pack("<5f", *vec) + b"\n")

    out = tmp_path / "table.txt"
    written, missing = export_static(model, vocab, out)
    assert written == len(entries)

    from graphsum.features import load_embedding_table

    table = load_embedding_table(out)
    assert table.dim == 5
    assert set(table.vectors) == set(entries)
    for t, vec in entries.items():
        np.testing.assert_allclose(table.vectors[t], vec.astype(np.float64), atol=1e-6)
    print(PASS.format(f"exporter-static-roundtrip ({written} vectors, 6 decimals)"))


def test_contextual_roundtrip_zero_token_mismatches(tiny_bert_dir, tmp_path):
    out = tmp_path / "ctx.jsonl"
    rows, _ = export_contextual(tiny_bert_dir, MINI_CLUSTER, out)
    assert rows == 10

    from graphsum.corpus import load_task_unit
    from graphsum.features import load_contextual_embeddings

    unit = load_task_unit(MINI_CLUSTER, "cluster-json")
    # strict mode: any token mismatch or missing sentence raises
    mats = load_contextual_embeddings(out, unit, allow_missing=False)
    assert len(mats) == unit.n
    for s, m in zip(unit.sentences, mats):
        assert m is not None
        assert m.shape == (len(s.content_tokens), 32)
    print(PASS.format("exporter-contextual-roundtrip (zero token mismatches)"))


def test_cli_end_to_end(tiny_bert_dir, tmp_path, capsys):
    table = tmp_path / "table.txt"
    ctx = tmp_path / "ctx.jsonl"
    rng_model = tmp_path / "model.txt"
    vocab = read_vocab(MINI_CLUSTER)
    lines = [f"{len(vocab)} 3"]
    rng = np.random.default_rng(5)
    for t in vocab:
        lines.append(t + " " + " ".join(f"{v:.4f}" for v in rng.normal(size=3)))
    rng_model.write_text("\n".join(lines) + "\n", "utf-8")

    assert main(["export-static", "--model", str(rng_model),
                 "--input", str(MINI_CLUSTER), "--output", str(table)]) == 0
    assert main(["export-contextual", "--model", str(tiny_bert_dir),
                 "--input", str(MINI_CLUSTER), "--output", str(ctx)]) == 0
    assert table.exists() and ctx.exists()

    # the engine consumes both files end to end
    from graphsum.cli import main as engine_main

    summary = tmp_path / "summary.txt"
    rc = engine_main([
        "summarize", "--input", str(MINI_CLUSTER),
        "--fusion", "graph",
        "--embeddings", str(table), "--contextual", str(ctx),
        "--budget-bytes", "300", "--output", str(summary),
    ])
    assert rc == 0
    assert summary.read_text("utf-8").strip()

    assert main(["export-static", "--model", str(tmp_path / "missing.bin"),
                 "--input", str(MINI_CLUSTER), "--output", str(table)]) == 1
