"""
Linguistic primitives: tokens, polarity, part-of-speech, word lists.

Everything here is deterministic and pure.  Lexica are immutable once loaded
and can be shared between threads or worker processes.

.. autosummary::

    ~Tag
    ~PolarityLexicon
    ~PosLexicon
    ~StopwordSet
    ~FirstPersonSet
    ~Lexica
    ~tokenize
    ~polarity
    ~pos_tag
    ~count_stopwords
    ~count_first_person
    ~load_polarity_lexicon
    ~load_pos_lexicon
    ~load_stopwords
    ~load_first_person
    ~load_lexica
    ~default_lexica

Lexicon files are UTF-8 with one entry per line.  Polarity entries are
``token<TAB>score``, POS entries are ``token<TAB>tag``; stop words,
first-person words and negators are one token per line.  Blank lines and
lines starting with ``#`` are ignored.
"""

__all__ = """
    count_first_person
    count_stopwords
    default_lexica
    FirstPersonSet
    Lexica
    load_first_person
    load_lexica
    load_polarity_lexicon
    load_pos_lexicon
    load_stopwords
    PolarityLexicon
    pos_tag
    PosLexicon
    polarity
    StopwordSet
    Tag
    tokenize
""".split()

import enum
import functools
import logging
import pathlib
from dataclasses import dataclass
from dataclasses import field
from importlib import resources
from typing import Dict
from typing import FrozenSet
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_NEGATION_WINDOW = 3
FILLER_TOKENS = frozenset("uh um mm".split())
REQUIRED_FIRST_PERSON = frozenset("i we us".split())


class Tag(str, enum.Enum):
    """Coarse part-of-speech tags."""

    NOUN = "NOUN"
    VERB = "VERB"
    ADJ = "ADJ"
    ADV = "ADV"
    OTHER = "OTHER"


@dataclass(frozen=True)
class PolarityLexicon:
    """
    Token polarities plus the negation rule.

    A lexicon hit is sign-flipped when an odd number of negators occur in the
    ``negation_window`` tokens preceding it.
    """

    entries: Dict[str, float]
    negators: FrozenSet[str] = frozenset()
    negation_window: int = DEFAULT_NEGATION_WINDOW

    def __post_init__(self):
        object.__setattr__(self, "negators", frozenset(self.negators))
        for token, score in self.entries.items():
            if not -1.0 <= score <= 1.0:
                raise ValueError(f"polarity of {token!r} is {score}, not in [-1, 1]")
        overlap = self.negators & set(self.entries)
        if overlap:
            raise ValueError(f"negators also listed as polarity entries: {sorted(overlap)}")
        if self.negation_window < 0:
            raise ValueError(f"negation_window must be >= 0, received {self.negation_window}")


@dataclass(frozen=True)
class PosLexicon:
    """Word-to-tag table with suffix fallback rules (longest suffix first)."""

    word_tags: Dict[str, Tag]
    suffix_rules: Tuple[Tuple[str, Tag], ...] = ()

    def __post_init__(self):
        tags = {word: Tag(tag) for word, tag in self.word_tags.items()}
        # stable sort keeps file order among suffixes of equal length
        rules = sorted(((s, Tag(t)) for s, t in self.suffix_rules), key=lambda r: -len(r[0]))
        object.__setattr__(self, "word_tags", tags)
        object.__setattr__(self, "suffix_rules", tuple(rules))

    def tag(self, token: str) -> Tag:
        """Tag one token: lexicon, then first matching suffix, then NOUN."""
        found = self.word_tags.get(token)
        if found is not None:
            return found
        for suffix, tag in self.suffix_rules:
            if token.endswith(suffix):
                return tag
        return Tag.NOUN


@dataclass(frozen=True)
class StopwordSet:
    """Low-content tokens, always including the fillers ``uh``, ``um``, ``mm``."""

    words: FrozenSet[str]

    def __post_init__(self):
        object.__setattr__(self, "words", frozenset(self.words))
        missing = FILLER_TOKENS - self.words
        if missing:
            raise ValueError(f"stop-word set is missing filler tokens {sorted(missing)}")

    def __contains__(self, token):
        return token in self.words


@dataclass(frozen=True)
class FirstPersonSet:
    """First-person words; must contain ``i``, ``we`` and ``us``."""

    words: FrozenSet[str]

    def __post_init__(self):
        object.__setattr__(self, "words", frozenset(self.words))
        missing = REQUIRED_FIRST_PERSON - self.words
        if missing:
            raise ValueError(f"first-person set is missing {sorted(missing)}")

    def __contains__(self, token):
        return token in self.words


@dataclass(frozen=True)
class Lexica:
    """The four lexica consumed by feature extraction."""

    polarity: PolarityLexicon
    pos: PosLexicon
    stopwords: StopwordSet
    first_person: FirstPersonSet = field(default_factory=lambda: FirstPersonSet(REQUIRED_FIRST_PERSON))


def tokenize(text: str) -> List[str]:
    """Split cleaned text on whitespace, preserving order."""
    return text.split()


def polarity(tokens: Sequence[str], lex: PolarityLexicon) -> float:
    """
    Mean polarity of the lexicon hits in ``tokens``, clamped to [-1, 1].

    No hits gives 0.0, the neutral value.
    """
    scores = []
    for idx, token in enumerate(tokens):
        score = lex.entries.get(token)
        if score is None:
            continue
        start = max(0, idx - lex.negation_window)
        negations = sum(1 for t in tokens[start:idx] if t in lex.negators)
        scores.append(-score if negations % 2 else score)
    if not scores:
        return 0.0
    return float(np.clip(sum(scores) / len(scores), -1.0, 1.0))


def pos_tag(tokens: Sequence[str], lex: PosLexicon) -> List[Tag]:
    """One coarse tag per token."""
    return [lex.tag(token) for token in tokens]


def count_stopwords(tokens: Sequence[str], sw: StopwordSet) -> int:
    """Number of tokens (with multiplicity) that are stop words."""
    return sum(1 for token in tokens if token in sw)


def count_first_person(tokens: Sequence[str], fp: FirstPersonSet) -> int:
    """Number of tokens (with multiplicity) that are first-person words."""
    return sum(1 for token in tokens if token in fp)


def _data_path(name):
    return resources.files("depscreen") / "data" / name


def _read_lines(path):
    """Yield (line number, stripped line) for content lines of a lexicon file."""
    if isinstance(path, (str, pathlib.Path)):
        text = pathlib.Path(path).read_text(encoding="utf-8")
    else:
        text = path.read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def _read_pairs(path):
    for lineno, line in _read_lines(path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'token<TAB>value', received {line!r}")
        yield lineno, parts[0].strip().lower(), parts[1].strip()


def _read_words(path):
    return frozenset(line.lower() for _, line in _read_lines(path))


def load_polarity_lexicon(path=None, negators_path=None, negation_window=DEFAULT_NEGATION_WINDOW):
    """Load a polarity lexicon (default: the shipped one)."""
    entries = {}
    for lineno, token, value in _read_pairs(path or _data_path("polarity.tsv")):
        try:
            entries[token] = float(value)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: polarity {value!r} is not a number")
    negators = _read_words(negators_path or _data_path("negators.txt"))
    logger.debug("polarity lexicon: %d entries, %d negators", len(entries), len(negators))
    return PolarityLexicon(entries=entries, negators=negators, negation_window=negation_window)


def load_pos_lexicon(path=None, suffix_path=None):
    """Load a POS lexicon and its suffix rules (default: the shipped ones)."""
    word_tags = {token: Tag(tag.upper()) for _, token, tag in _read_pairs(path or _data_path("pos.tsv"))}
    rules = _read_pairs(suffix_path or _data_path("pos_suffixes.tsv"))
    suffixes = [(suffix, Tag(tag.upper())) for _, suffix, tag in rules]
    return PosLexicon(word_tags=word_tags, suffix_rules=tuple(suffixes))


def load_stopwords(path=None):
    """Load a stop-word list (default: the shipped extended list)."""
    return StopwordSet(_read_words(path or _data_path("stopwords.txt")))


def load_first_person(path=None):
    """Load a first-person word list (default: the shipped one)."""
    return FirstPersonSet(_read_words(path or _data_path("first_person.txt")))


def load_lexica(
    polarity_path: Optional[str] = None,
    negators_path: Optional[str] = None,
    pos_path: Optional[str] = None,
    suffix_path: Optional[str] = None,
    stopwords_path: Optional[str] = None,
    first_person_path: Optional[str] = None,
    negation_window: int = DEFAULT_NEGATION_WINDOW,
) -> Lexica:
    """Load all lexica; any path left as ``None`` uses the shipped file."""
    return Lexica(
        polarity=load_polarity_lexicon(polarity_path, negators_path, negation_window),
        pos=load_pos_lexicon(pos_path, suffix_path),
        stopwords=load_stopwords(stopwords_path),
        first_person=load_first_person(first_person_path),
    )


@functools.lru_cache(maxsize=None)
def default_lexica() -> Lexica:
    """The shipped lexica, loaded once per process."""
    return load_lexica()
