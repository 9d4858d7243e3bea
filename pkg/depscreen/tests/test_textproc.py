from contextlib import nullcontext as does_not_raise

import numpy as np
import pytest

from ..textproc import FirstPersonSet
from ..textproc import PolarityLexicon
from ..textproc import PosLexicon
from ..textproc import StopwordSet
from ..textproc import Tag
from ..textproc import count_first_person
from ..textproc import count_stopwords
from ..textproc import default_lexica
from ..textproc import load_lexica
from ..textproc import load_polarity_lexicon
from ..textproc import load_pos_lexicon
from ..textproc import load_stopwords
from ..textproc import polarity
from ..textproc import pos_tag
from ..textproc import tokenize
from .tools import brute_force_polarity
from .tools import small_polarity


@pytest.mark.parametrize(
    "text, expected",
    [
        ["i feel fine", ["i", "feel", "fine"]],
        ["", []],
        ["a  b", ["a", "b"]],
        ["  leading and trailing  ", ["leading", "and", "trailing"]],
    ],
)
def test_tokenize(text, expected):
    assert tokenize(text) == expected


@pytest.mark.parametrize(
    "tokens, expected",
    [
        [["good"], 0.7],
        [["not", "good"], -0.7],
        [["the", "cat", "sat"], 0.0],
        [[], 0.0],
        [["not", "not", "good"], 0.7],
        [["good", "bad"], 0.15],
        [["never", "sad"], 0.4],
        # negator falls outside the 3-token window
        [["not", "a", "b", "c", "good"], 0.7],
        [["not", "a", "b", "good"], -0.7],
        # one negator flips every hit within its reach
        [["not", "good", "happy"], -0.7],
    ],
)
def test_polarity(tokens, expected):
    assert polarity(tokens, small_polarity()) == pytest.approx(expected)


def test_polarity_window_zero():
    lex = small_polarity(window=0)
    assert polarity(["not", "good"], lex) == pytest.approx(0.7)


def test_polarity_range(lexica):
    tokens = "i love love love it but i hate hate never bad not sad".split()
    assert -1.0 <= polarity(tokens, lexica.polarity) <= 1.0


@pytest.mark.parametrize("window", [0, 1, 3, 6])
def test_polarity_matches_oracle(window):
    lex = small_polarity(window=window)
    vocabulary = sorted(lex.entries) + sorted(lex.negators) + ["i", "feel", "it", "very"]
    rng = np.random.default_rng(window)
    for _ in range(300):
        tokens = list(rng.choice(vocabulary, size=rng.integers(0, 12)))
        assert polarity(tokens, lex) == pytest.approx(brute_force_polarity(tokens, lex), abs=1e-12), tokens


def test_pos_tag_length(lexica):
    rng = np.random.default_rng(4)
    vocabulary = ["quickly", "running", "ly", "i", "think", "zorblax", "happiness", "", "good"]
    for size in range(0, 15):
        tokens = list(rng.choice(vocabulary, size=size))
        tags = pos_tag(tokens, lexica.pos)
        assert len(tags) == len(tokens)
        assert all(isinstance(t, Tag) for t in tags)


@pytest.mark.parametrize(
    "entries, negators, window, context",
    [
        [{"good": 0.7}, {"not"}, 3, does_not_raise()],
        [{"good": 1.5}, set(), 3, pytest.raises(ValueError)],
        [{"good": 0.7, "not": -0.1}, {"not"}, 3, pytest.raises(ValueError)],
        [{"good": 0.7}, set(), -1, pytest.raises(ValueError)],
    ],
)
def test_polarity_lexicon_checks(entries, negators, window, context):
    with context:
        PolarityLexicon(entries=entries, negators=negators, negation_window=window)


def test_pos_rules():
    lex = PosLexicon({"fast": "ADJ"}, (("ly", "ADV"), ("ing", "VERB"), ("ed", "VERB"), ("ized", "ADJ")))
    assert pos_tag(["quickly", "running", "zorblax"], lex) == [Tag.ADV, Tag.VERB, Tag.NOUN]
    assert lex.tag("fast") == Tag.ADJ
    # longest suffix first
    assert lex.tag("realized") == Tag.ADJ
    assert lex.tag("walked") == Tag.VERB
    # a token equal to a suffix matches it
    assert lex.tag("ly") == Tag.ADV
    assert lex.tag("ed") == Tag.VERB


def test_shipped_pos(lexica):
    tags = pos_tag("i think quickly good pilot".split(), lexica.pos)
    assert tags == [Tag.OTHER, Tag.VERB, Tag.ADV, Tag.ADJ, Tag.NOUN]


@pytest.mark.parametrize(
    "tokens, expected",
    [
        [["um", "i", "um"], 3],
        [[], 0],
        [["cat", "dog"], 0],
    ],
)
def test_count_stopwords(tokens, expected, lexica):
    assert count_stopwords(tokens, lexica.stopwords) == expected


@pytest.mark.parametrize(
    "tokens, expected",
    [
        [["i", "like", "it"], 1],
        [["we", "like", "us"], 2],
        [["cats", "like", "it"], 0],
    ],
)
def test_count_first_person(tokens, expected, lexica):
    assert count_first_person(tokens, lexica.first_person) == expected


@pytest.mark.parametrize(
    "words, context",
    [
        [{"uh", "um", "mm", "the"}, does_not_raise()],
        [{"uh", "um"}, pytest.raises(ValueError)],
        [set(), pytest.raises(ValueError)],
    ],
)
def test_stopword_set(words, context):
    with context:
        StopwordSet(words)


@pytest.mark.parametrize(
    "words, context",
    [
        [{"i", "we", "us", "me"}, does_not_raise()],
        [{"i", "we"}, pytest.raises(ValueError)],
    ],
)
def test_first_person_set(words, context):
    with context:
        FirstPersonSet(words)


def test_load_from_files(tmp_path):
    polarity_path = tmp_path / "polarity.tsv"
    polarity_path.write_text("# comment\n\nGood\t0.5\nawful\t-0.9\n")
    negators_path = tmp_path / "negators.txt"
    negators_path.write_text("not\n")
    lex = load_polarity_lexicon(polarity_path, negators_path, negation_window=2)
    assert lex.entries == {"good": 0.5, "awful": -0.9}
    assert lex.negators == frozenset({"not"})
    assert lex.negation_window == 2

    stop_path = tmp_path / "stop.txt"
    stop_path.write_text("uh\num\nmm\nthe\n")
    assert "the" in load_stopwords(stop_path)

    pos_path = tmp_path / "pos.tsv"
    pos_path.write_text("dog\tnoun\n")
    suffix_path = tmp_path / "suffixes.tsv"
    suffix_path.write_text("ly\tadv\n")
    pos = load_pos_lexicon(pos_path, suffix_path)
    assert pos.tag("dog") == Tag.NOUN
    assert pos.tag("sadly") == Tag.ADV


@pytest.mark.parametrize(
    "content",
    [
        "good 0.5\n",  # no tab
        "good\thigh\n",  # not a number
        "good\t0.5\textra\n",
    ],
)
def test_bad_polarity_file(content, tmp_path):
    path = tmp_path / "polarity.tsv"
    path.write_text(content)
    with pytest.raises(ValueError):
        load_polarity_lexicon(path)


def test_shipped_lexica():
    lexica = load_lexica()
    assert lexica.polarity.entries["good"] == pytest.approx(0.7)
    assert {"not", "no", "never"} <= lexica.polarity.negators
    assert {"uh", "um", "mm", "i"} <= lexica.stopwords.words
    assert {"i", "we", "us"} <= lexica.first_person.words
    assert default_lexica() is default_lexica()
