import pytest

from graphsum.porter import stem

# Canonical input/output pairs for the classic rule tables; full-chain
# results, traced by hand through every step.
CANONICAL = [
    ("caresses", "caress"),
    ("ponies", "poni"),
    ("ties", "ti"),
    ("caress", "caress"),
    ("cats", "cat"),
    ("feed", "feed"),
    ("agreed", "agre"),
    ("plastered", "plaster"),
    ("bled", "bled"),
    ("motoring", "motor"),
    ("sing", "sing"),
    ("happy", "happi"),
    ("sky", "sky"),
    ("running", "run"),
    ("runs", "run"),
    ("hopping", "hop"),
    ("falling", "fall"),
    ("hissing", "hiss"),
    ("fizzed", "fizz"),
    ("controlling", "control"),
    ("generalizations", "gener"),
    ("oscillators", "oscil"),
    ("connected", "connect"),
    ("connection", "connect"),
    ("connections", "connect"),
    ("conditional", "condit"),
    ("rational", "ration"),
]


@pytest.mark.parametrize("word,expected", CANONICAL)
def test_canonical_pairs(word, expected):
    assert stem(word) == expected


def test_short_words_unchanged():
    for w in ("a", "is", "be", "at"):
        assert stem(w) == w


def test_non_alphabetic_unchanged():
    assert stem("2019") == "2019"
    assert stem("u.s") == "u.s"
    assert stem("don't") == "don't"
    assert stem("naïve") == "naïve"


def test_result_is_prefix_compatible():
    # stems never grow longer than input + 1 (only the +e restorations)
    words = ["visualization", "realizing", "mightily", "electricity", "analogously"]
    for w in words:
        assert len(stem(w)) <= len(w)
