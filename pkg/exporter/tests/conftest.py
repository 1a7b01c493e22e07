import json
from pathlib import Path

import pytest
import torch
from transformers import BertConfig, BertModel, BertTokenizer

from embexport.textnorm import content_tokens, default_stopwords

ENGINE_FIXTURES = Path(__file__).resolve().parents[2] / "tests" / "fixtures"
MINI_CLUSTER = ENGINE_FIXTURES / "mini_cluster.json"


def fixture_content_tokens() -> list[str]:
    stops = default_stopwords()
    obj = json.loads(MINI_CLUSTER.read_text("utf-8"))
    seen: dict[str, None] = {}
    for doc in obj["documents"]:
        for text in doc["sentences"]:
            for tok in content_tokens(text, stops):
                seen[tok] = None
    return list(seen)


def build_wordpiece_vocab(tokens: list[str]) -> list[str]:
    """Specials plus one entry per token, except every third token which is
    split into two wordpieces so subword pooling is actually exercised."""
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", ".", "'", ","]
    for i, tok in enumerate(sorted(tokens)):
        if i % 3 == 0 and len(tok) >= 4:
            cut = len(tok) // 2
            vocab += [tok[:cut], "##" + tok[cut:]]
        else:
            vocab.append(tok)
    # dedupe, keep order
    seen: dict[str, None] = {}
    for v in vocab:
        seen[v] = None
    return list(seen)


def make_tiny_bert(out_dir: Path, max_position_embeddings: int = 64) -> Path:
    tokens = fixture_content_tokens()
    vocab = build_wordpiece_vocab(tokens)
    out_dir.mkdir(parents=True, exist_ok=True)
    vocab_file = out_dir / "vocab.txt"
    vocab_file.write_text("\n".join(vocab) + "\n", encoding="utf-8")
    tokenizer = BertTokenizer(str(vocab_file))
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=max_position_embeddings,
    )
    torch.manual_seed(0)
    model = BertModel(config)
    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    return out_dir


@pytest.fixture(scope="session")
def tiny_bert_dir(tmp_path_factory) -> Path:
    return make_tiny_bert(tmp_path_factory.mktemp("tiny-bert"))
