import json

from embexport.textnorm import content_tokens, default_stopwords, tokenize

from conftest import MINI_CLUSTER


def test_tokenize_rules():
    assert tokenize("The cat sat.") == ["the", "cat", "sat"]
    assert tokenize("U.S.-based, 2019") == ["u.s", "based", "2019"]
    assert tokenize("Don't panic!") == ["don't", "panic"]
    assert tokenize("") == []


def test_alignment_contract_with_engine():
    """The exporter's tokenization must equal the engine's bit for bit on
    the fixture corpus (the engine rejects misaligned rows)."""
    from graphsum.corpus import load_task_unit

    unit = load_task_unit(MINI_CLUSTER, "cluster-json")
    stops = default_stopwords()
    obj = json.loads(MINI_CLUSTER.read_text("utf-8"))
    texts = [t for doc in obj["documents"] for t in doc["sentences"]]
    assert len(texts) == unit.n
    for text, sentence in zip(texts, unit.sentences):
        assert tokenize(text) == list(sentence.tokens)
        assert content_tokens(text, stops) == list(sentence.content_tokens)


def test_stopword_lists_match_engine():
    from graphsum.corpus import default_stopwords as engine_stopwords

    assert default_stopwords() == engine_stopwords()
