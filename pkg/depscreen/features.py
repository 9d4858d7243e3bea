"""
Per-session feature vectors and feature matrices.

Thirty features per session: the sentiment of the answer to each of the 19
registry questions (``q_<key>``), followed by eleven scalar
linguistic/behavioral features.  Every per-comment feature is averaged over
participant utterances that have at least one token.  A feature whose
denominator set is empty evaluates to 0 and logs a warning; an unasked
question has sentiment 0.

.. autosummary::

    ~QuestionRegistry
    ~FeatureVector
    ~FeatureMatrix
    ~load_registry
    ~default_registry
    ~feature_keys
    ~feature_label
    ~match_question
    ~collect_answer
    ~collect_answers
    ~question_sentiment_features
    ~avg_sentiment
    ~avg_response_time
    ~speech_speed
    ~avg_unique_frequency
    ~avg_sw_frequency
    ~avg_characters
    ~pos_frequencies
    ~fp_avg
    ~extract_features
    ~build_matrix
    ~write_feature_csv
    ~read_feature_csv
"""

__all__ = """
    avg_characters
    avg_response_time
    avg_sentiment
    avg_sw_frequency
    avg_unique_frequency
    build_matrix
    collect_answer
    collect_answers
    default_registry
    extract_features
    feature_keys
    feature_label
    FeatureMatrix
    FeatureVector
    fp_avg
    load_registry
    match_question
    pos_frequencies
    QuestionRegistry
    question_sentiment_features
    read_feature_csv
    SCALAR_KEYS
    speech_speed
    write_feature_csv
""".split()

import functools
import logging
import pathlib
from dataclasses import dataclass
from importlib import resources
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
import pandas as pd

from .corpus import Corpus
from .corpus import Session
from .corpus import Speaker
from .exceptions import UnknownFeatureKey
from .exceptions import UnlabeledSession
from .textproc import FirstPersonSet
from .textproc import Lexica
from .textproc import PolarityLexicon
from .textproc import PosLexicon
from .textproc import StopwordSet
from .textproc import Tag
from .textproc import count_first_person
from .textproc import count_stopwords
from .textproc import default_lexica
from .textproc import polarity
from .textproc import pos_tag
from .textproc import tokenize

logger = logging.getLogger(__name__)

DEFAULT_REGISTRY_SIZE = 19
QUESTION_PREFIX = "q_"
# fmt: off
SCALAR_KEYS = (
    "avg_sentiment",
    "avg_response_time",
    "speech_speed",
    "avg_unique_frequency",
    "avg_sw_frequency",
    "avg_characters",
    "avg_nouns",
    "avg_verbs",
    "adj_freq",
    "avg_adv",
    "fp_avg",
)
# fmt: on
POS_TAGS = (Tag.NOUN, Tag.VERB, Tag.ADJ, Tag.ADV)
SCALAR_LABELS = {
    "avg_sentiment": "avg sentiment",
    "avg_response_time": "avg response time",
    "speech_speed": "speech speed",
    "avg_unique_frequency": "avg unique frequency",
    "avg_sw_frequency": "avg sw frequency",
    "avg_characters": "avg characters",
    "avg_nouns": "avg nouns",
    "avg_verbs": "avg verbs",
    "adj_freq": "adj freq",
    "avg_adv": "avg adv",
    "fp_avg": "fp avg",
}


@dataclass(frozen=True)
class QuestionRegistry:
    """
    Interviewer questions whose answers become sentiment features.

    ``entries`` is an ordered sequence of ``(key, patterns)``; a bot turn
    matches the first entry with any pattern occurring in its cleaned text.
    """

    entries: Tuple[Tuple[str, Tuple[str, ...]], ...]

    def __post_init__(self):
        entries = tuple((key, tuple(patterns)) for key, patterns in self.entries)
        object.__setattr__(self, "entries", entries)
        keys = [key for key, _ in entries]
        duplicates = sorted({k for k in keys if keys.count(k) > 1})
        if duplicates:
            raise ValueError(f"duplicate question keys: {duplicates}")
        for key, patterns in entries:
            if not key or not key.isidentifier():
                raise ValueError(f"question key {key!r} must be an identifier")
            if not patterns or not all(patterns):
                raise ValueError(f"question {key!r} needs at least one non-empty pattern")
            for pattern in patterns:
                if pattern != pattern.lower():
                    raise ValueError(f"question {key!r}: pattern {pattern!r} must be lowercase")

    def __len__(self):
        return len(self.entries)

    @property
    def keys(self) -> List[str]:
        return [key for key, _ in self.entries]

    def patterns(self, key) -> Tuple[str, ...]:
        for k, patterns in self.entries:
            if k == key:
                return patterns
        raise KeyError(key)


@dataclass(frozen=True)
class FeatureVector:
    """Feature values of one session, in registry order."""

    session_id: str
    values: Dict[str, float]

    @property
    def keys(self):
        return list(self.values)

    def as_array(self, keys: Optional[Sequence[str]] = None) -> np.ndarray:
        keys = self.keys if keys is None else keys
        return np.array([self.values[k] for k in keys], dtype=float)


@dataclass(frozen=True)
class FeatureMatrix:
    """
    Rows of feature values with aligned labels.

    ``values`` has shape ``(len(session_ids), len(feature_keys))``.
    """

    session_ids: Tuple[str, ...]
    feature_keys: Tuple[str, ...]
    values: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "session_ids", tuple(self.session_ids))
        object.__setattr__(self, "feature_keys", tuple(self.feature_keys))
        values = np.asarray(self.values, dtype=float).reshape(len(self.session_ids), len(self.feature_keys))
        labels = np.asarray(self.labels, dtype=int).reshape(len(self.session_ids))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.session_ids)

    @property
    def shape(self):
        return self.values.shape

    def select(self, keys: Sequence[str]) -> "FeatureMatrix":
        """Columns ``keys``, in that order."""
        index = {k: i for i, k in enumerate(self.feature_keys)}
        for key in keys:
            if key not in index:
                raise UnknownFeatureKey(key)
        columns = [index[k] for k in keys]
        return FeatureMatrix(self.session_ids, tuple(keys), self.values[:, columns], self.labels)

    def column_indices(self, keys: Sequence[str]) -> List[int]:
        index = {k: i for i, k in enumerate(self.feature_keys)}
        try:
            return [index[k] for k in keys]
        except KeyError as exc:
            raise UnknownFeatureKey(exc.args[0])

    def rows(self, ids) -> "FeatureMatrix":
        """Rows whose session id is in ``ids``, in matrix order."""
        wanted = set(ids)
        mask = np.array([sid in wanted for sid in self.session_ids], dtype=bool)
        kept = tuple(sid for sid in self.session_ids if sid in wanted)
        return FeatureMatrix(kept, self.feature_keys, self.values[mask], self.labels[mask])

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.values, columns=list(self.feature_keys))
        frame.insert(0, "label", self.labels)
        frame.insert(0, "session_id", list(self.session_ids))
        return frame


def _parse_registry(text, source):
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{source}:{lineno}: expected 'key<TAB>pattern|...', received {line!r}")
        patterns = tuple(p.strip().lower() for p in parts[1].split("|") if p.strip())
        entries.append((parts[0].strip(), patterns))
    return QuestionRegistry(tuple(entries))


def load_registry(path=None) -> QuestionRegistry:
    """Read a question registry file (default: the shipped 19 questions)."""
    if path is None:
        source = resources.files("depscreen") / "data" / "questions.tsv"
    else:
        source = pathlib.Path(path)
    return _parse_registry(source.read_text(encoding="utf-8"), source)


@functools.lru_cache(maxsize=None)
def default_registry() -> QuestionRegistry:
    """The shipped registry, loaded once per process."""
    registry = load_registry()
    if len(registry) != DEFAULT_REGISTRY_SIZE:
        raise ValueError(f"shipped registry has {len(registry)} questions, expected {DEFAULT_REGISTRY_SIZE}")
    return registry


def feature_keys(reg: QuestionRegistry = None) -> List[str]:
    """All feature keys: ``q_<key>`` for each question, then the scalars."""
    reg = reg or default_registry()
    return [QUESTION_PREFIX + key for key in reg.keys] + list(SCALAR_KEYS)


def feature_label(key: str, reg: QuestionRegistry = None) -> str:
    """Readable name of a feature key, for report tables."""
    reg = reg or default_registry()
    if key.startswith(QUESTION_PREFIX):
        question = key[len(QUESTION_PREFIX) :]
        if question in reg.keys:
            return f'"{reg.patterns(question)[0]}"'
    return SCALAR_LABELS.get(key, key)


def match_question(bot_text: str, reg: QuestionRegistry = None) -> Optional[str]:
    """Key of the first registry question whose pattern occurs in ``bot_text``."""
    reg = reg or default_registry()
    for key, patterns in reg.entries:
        if any(p in bot_text for p in patterns):
            return key
    return None


def collect_answers(s: Session, reg: QuestionRegistry = None) -> Dict[str, str]:
    """Answer text for every registry question (empty when never asked)."""
    reg = reg or default_registry()
    parts = {key: [] for key in reg.keys}
    current = None
    for u in s.utterances:
        if u.speaker == Speaker.BOT:
            current = match_question(u.text, reg)
        elif current is not None:
            parts[current].append(u.text)
    return {key: " ".join(texts) for key, texts in parts.items()}


def collect_answer(s: Session, key: str, reg: QuestionRegistry = None) -> str:
    """
    Participant text between each bot turn asking ``key`` and the next bot turn.

    Answers to repeated askings are joined in transcript order.
    """
    reg = reg or default_registry()
    if key not in reg.keys:
        raise KeyError(key)
    return collect_answers(s, reg)[key]


def question_sentiment_features(s: Session, reg: QuestionRegistry, lex: PolarityLexicon) -> List[float]:
    """Polarity of each question's answer, in registry order."""
    answers = collect_answers(s, reg)
    return [polarity(tokenize(answers[key]), lex) for key in reg.keys]


def _comments(s: Session) -> List[Tuple[str, List[str]]]:
    """(text, tokens) of participant utterances with at least one token."""
    comments = []
    for u in s.participant:
        tokens = tokenize(u.text)
        if tokens:
            comments.append((u.text, tokens))
    return comments


def _mean(values, feature, session_id):
    if not values:
        logger.warning("%s: no qualifying comments for %s, using 0", session_id, feature)
        return 0.0
    return float(np.mean(values))


def avg_sentiment(s: Session, lex: PolarityLexicon) -> float:
    """Polarity of everything the participant said, as one token stream."""
    tokens = [t for u in s.participant for t in tokenize(u.text)]
    return polarity(tokens, lex)


def avg_response_time(s: Session) -> float:
    """Mean delay (seconds) from a bot turn's end to the participant turn right after it."""
    delays = [
        max(0.0, cur.start_time - prev.stop_time)
        for prev, cur in zip(s.utterances, s.utterances[1:])
        if prev.speaker == Speaker.BOT and cur.speaker == Speaker.PARTICIPANT
    ]
    return _mean(delays, "avg_response_time", s.session_id)


def speech_speed(s: Session) -> float:
    """Mean words per second over participant turns of non-zero duration."""
    rates = [len(tokenize(u.text)) / u.duration for u in s.participant if u.stop_time > u.start_time]
    return _mean(rates, "speech_speed", s.session_id)


def avg_unique_frequency(s: Session) -> float:
    """Mean type-token ratio per comment."""
    ratios = [len(set(tokens)) / len(tokens) for _, tokens in _comments(s)]
    return _mean(ratios, "avg_unique_frequency", s.session_id)


def avg_sw_frequency(s: Session, sw: StopwordSet) -> float:
    """Mean share of stop words per comment."""
    shares = [count_stopwords(tokens, sw) / len(tokens) for _, tokens in _comments(s)]
    return _mean(shares, "avg_sw_frequency", s.session_id)


def avg_characters(s: Session) -> float:
    """Mean non-whitespace characters per word, per comment."""
    sizes = [sum(len(t) for t in tokens) / len(tokens) for _, tokens in _comments(s)]
    return _mean(sizes, "avg_characters", s.session_id)


def pos_frequencies(s: Session, lex: PosLexicon) -> Tuple[float, float, float, float]:
    """Mean per-comment share of nouns, verbs, adjectives and adverbs."""
    comments = _comments(s)
    if not comments:
        logger.warning("%s: no qualifying comments for pos_frequencies, using 0", s.session_id)
        return (0.0, 0.0, 0.0, 0.0)
    shares = np.zeros((len(comments), len(POS_TAGS)))
    for row, (_, tokens) in enumerate(comments):
        tags = pos_tag(tokens, lex)
        for col, tag in enumerate(POS_TAGS):
            shares[row, col] = tags.count(tag) / len(tokens)
    return tuple(float(v) for v in shares.mean(axis=0))


def fp_avg(s: Session, fp: FirstPersonSet) -> float:
    """Mean share of first-person words per comment."""
    shares = [count_first_person(tokens, fp) / len(tokens) for _, tokens in _comments(s)]
    return _mean(shares, "fp_avg", s.session_id)


def extract_features(s: Session, reg: QuestionRegistry = None, lexica: Lexica = None) -> FeatureVector:
    """All features of one session, keyed and ordered as :func:`feature_keys`."""
    reg = reg or default_registry()
    lexica = lexica or default_lexica()
    values = dict(
        zip(
            (QUESTION_PREFIX + key for key in reg.keys),
            question_sentiment_features(s, reg, lexica.polarity),
        )
    )
    nouns, verbs, adjectives, adverbs = pos_frequencies(s, lexica.pos)
    # fmt: off
    values.update(
        avg_sentiment=avg_sentiment(s, lexica.polarity),
        avg_response_time=avg_response_time(s),
        speech_speed=speech_speed(s),
        avg_unique_frequency=avg_unique_frequency(s),
        avg_sw_frequency=avg_sw_frequency(s, lexica.stopwords),
        avg_characters=avg_characters(s),
        avg_nouns=nouns,
        avg_verbs=verbs,
        adj_freq=adjectives,
        avg_adv=adverbs,
        fp_avg=fp_avg(s, lexica.first_person),
    )
    # fmt: on
    for key, value in values.items():
        if not np.isfinite(value):
            raise ValueError(f"{s.session_id}: feature {key} is not finite ({value})")
    return FeatureVector(s.session_id, values)


def build_matrix(
    c: Corpus,
    labels=None,
    selected_keys: Optional[Sequence[str]] = None,
    reg: QuestionRegistry = None,
    lexica: Lexica = None,
) -> FeatureMatrix:
    """
    Feature matrix of a labeled corpus.

    PARAMETERS

    c *Corpus*:
        Validated sessions; rows follow corpus order.
    labels *mapping* or *LabelTable*:
        Label per session id.  When None, each session's own label is used.
    selected_keys *[str]*:
        Columns, in order.  Default: every feature key.
    """
    reg = reg or default_registry()
    known = feature_keys(reg)
    selected = list(known if selected_keys is None else selected_keys)
    for key in selected:
        if key not in known:
            raise UnknownFeatureKey(key)

    y = []
    for session in c:
        label = session.label if labels is None else labels.get(session.session_id)
        if label is None:
            raise UnlabeledSession(session.session_id)
        y.append(int(label))

    vectors = [extract_features(session, reg, lexica) for session in c]
    values = np.array([v.as_array(selected) for v in vectors], dtype=float).reshape(len(vectors), len(selected))
    logger.info("feature matrix: %d sessions x %d features", *values.shape)
    return FeatureMatrix(tuple(c.ids), tuple(selected), values, np.array(y, dtype=int))


def write_feature_csv(matrix: FeatureMatrix, path) -> pathlib.Path:
    """Write ``session_id,label,<feature keys...>`` CSV."""
    path = pathlib.Path(path)
    matrix.to_frame().to_csv(path, index=False, lineterminator="\n")
    return path


def read_feature_csv(path) -> FeatureMatrix:
    """Read a CSV written by :func:`write_feature_csv`."""
    frame = pd.read_csv(path, dtype={"session_id": str}, keep_default_na=False, float_precision="round_trip")
    for column in ("session_id", "label"):
        if column not in frame.columns:
            raise KeyError(f"{path}: missing column {column!r}")
    keys = [c for c in frame.columns if c not in ("session_id", "label")]
    return FeatureMatrix(
        tuple(frame["session_id"]),
        tuple(keys),
        frame[keys].to_numpy(dtype=float),
        frame["label"].to_numpy(dtype=int),
    )
