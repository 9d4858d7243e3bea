"""
Synthetic interview corpora for tests and dry runs.

The real interview corpus is access-restricted, so the pipeline is exercised on
scripted dialogues: the bot asks registry questions and the participant
answers from small vocabularies.  Sessions labeled positive get a longer
response delay, slower speech and more negative wording, each scaled by
``signal_strength``.  With ``signal_strength=0`` the two classes are drawn
from identical distributions.

.. autosummary::

    ~SyntheticSpec
    ~generate_synthetic_corpus
    ~write_synthetic_corpus
"""

__all__ = """
    generate_synthetic_corpus
    SyntheticSpec
    write_synthetic_corpus
""".split()

import logging
import pathlib
from dataclasses import dataclass
from typing import Dict
from typing import Tuple

import numpy as np
import pandas as pd

from .corpus import Corpus
from .corpus import Label
from .corpus import LabelTable
from .corpus import Provenance
from .corpus import Session
from .corpus import Speaker
from .corpus import TRANSCRIPT_SUFFIX
from .corpus import Utterance
from .corpus import serialize_transcript
from .exceptions import BadSpec
from .features import QuestionRegistry
from .features import default_registry

logger = logging.getLogger(__name__)

FIRST_SESSION_ID = 300
TIME_DIGITS = 3

# how the interviewer phrases each default registry question
QUESTION_TEXT = {
    "dream_job": "what's your dream job",
    "introvert": "do you consider yourself an introvert",
    "relax": "what do you do to relax",
    "controlling_temper": "how are you at controlling your temper",
    "last_argued": "when was the last time you argued with someone and what was it about",
    "close_to_family": "how close are you to your family",
    "regrets": "do you have any regrets",
    "memorable_experience": "tell me about a memorable experience",
    "living_situation": "how is your living situation",
    "sleep_poorly": "what are you like when you don't sleep well",
    "feel_down": "have you been feeling down lately",
    "last_happy": "when was the last time you felt really happy",
    "origin": "where are you from originally",
    "doing_today": "how are you doing today",
    "ptsd_diagnosis": "have you ever been diagnosed with ptsd",
    "depression_diagnosis": "have you been diagnosed with depression",
    "sleep_quality": "how easy is it for you to get a good night's sleep",
    "best_friend": "how would your best friend describe you",
    "proudest": "what are you most proud of in your life",
}
GREETING = "hi i'm ellie thanks for coming in today"
ACKNOWLEDGEMENTS = ("okay", "mhm", "i see", "uh huh", "right")
CLOSING = "okay i think i have asked everything i need to thanks for sharing your thoughts with me"

POSITIVE_WORDS = "good great happy love nice fun enjoy glad wonderful proud calm excited".split()
NEGATIVE_WORDS = """
    sad bad tired lonely hate angry awful terrible worried hard depressed anxious upset stressed
""".split()
NEUTRAL_WORDS = "work job city school people weekend music movies things time house travel read day really".split()
FILLER_WORDS = "uh um mm".split()
FIRST_PERSON_WORDS = "i me my we".split()
MARKERS = ("<laughter>", "<sigh>", "[sync]")

# per-token draw probabilities for participant speech
P_FILLER = 0.10
P_FIRST_PERSON = 0.15
P_SENTIMENT = 0.20
P_MARKER = 0.05
BASE_NEGATIVE_SHARE = 0.3


@dataclass(frozen=True)
class SyntheticSpec:
    """
    Parameters of a synthetic corpus.

    ``n_botless`` sessions are written without any interviewer turns, to be
    rejected by validation.
    """

    n_sessions: int
    positive_fraction: float = 0.3
    signal_strength: float = 1.0
    seed: int = 0
    n_botless: int = 0

    def validate(self):
        if int(self.n_sessions) != self.n_sessions or self.n_sessions < 2:
            raise BadSpec(f"n_sessions must be an integer >= 2, received {self.n_sessions}")
        if not 0 < self.positive_fraction < 1:
            raise BadSpec(f"positive_fraction must be in (0, 1), received {self.positive_fraction}")
        if self.signal_strength < 0:
            raise BadSpec(f"signal_strength must be >= 0, received {self.signal_strength}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise BadSpec(f"seed must be an unsigned integer, received {self.seed}")
        if not 0 <= self.n_botless <= self.n_sessions:
            raise BadSpec(f"n_botless must be in [0, {self.n_sessions}], received {self.n_botless}")


class _Dialogue:
    """Accumulates utterances on a running clock."""

    def __init__(self):
        self.clock = 0.0
        self.utterances = []

    def say(self, speaker, text, duration, gap=0.0):
        start = round(self.clock + gap, TIME_DIGITS)
        stop = round(start + duration, TIME_DIGITS)
        self.utterances.append(Utterance(start, stop, speaker, text))
        self.clock = stop


def _answer_words(rng, n_words, negative_share):
    words = []
    for _ in range(n_words):
        draw = rng.random()
        if draw < P_FILLER:
            words.append(rng.choice(FILLER_WORDS))
        elif draw < P_FILLER + P_FIRST_PERSON:
            words.append(rng.choice(FIRST_PERSON_WORDS))
        elif draw < P_FILLER + P_FIRST_PERSON + P_SENTIMENT:
            pool = NEGATIVE_WORDS if rng.random() < negative_share else POSITIVE_WORDS
            words.append(rng.choice(pool))
        else:
            words.append(rng.choice(NEUTRAL_WORDS))
    return [str(w) for w in words]


def _session(rng, session_id, positive, spec, registry, botless):
    shift = spec.signal_strength if positive else 0.0
    speech_rate = rng.uniform(2.0, 3.2) / (1.0 + 0.25 * shift)
    negative_share = min(0.95, BASE_NEGATIVE_SHARE + 0.2 * shift)
    bot_rate = 2.5

    n_questions = int(rng.integers(8, len(registry) + 1))
    asked = sorted(rng.choice(len(registry), size=n_questions, replace=False))
    keys = registry.keys

    talk = _Dialogue()
    if not botless:
        talk.say(Speaker.BOT, GREETING, len(GREETING.split()) / bot_rate)
    for index in asked:
        key = keys[index]
        question = QUESTION_TEXT.get(key, registry.patterns(key)[0])
        if not botless:
            talk.say(Speaker.BOT, question, len(question.split()) / bot_rate, gap=0.3)
        gap = rng.uniform(0.2, 1.4) + 0.6 * shift
        for part in range(int(rng.integers(1, 3))):
            n_words = int(rng.integers(3, 14))
            words = _answer_words(rng, n_words, negative_share)
            text = " ".join(words)
            if rng.random() < P_MARKER:
                text = f"{text} {rng.choice(MARKERS)}"
            talk.say(Speaker.PARTICIPANT, text, n_words / speech_rate, gap=gap if part == 0 else 0.4)
        if not botless and rng.random() < 0.3:
            ack = str(rng.choice(ACKNOWLEDGEMENTS))
            talk.say(Speaker.BOT, ack, 0.5, gap=0.2)
    if not botless:
        talk.say(Speaker.BOT, CLOSING, len(CLOSING.split()) / bot_rate, gap=0.5)

    label = Label.DEPRESSED if positive else Label.NOT_DEPRESSED
    return Session(session_id, tuple(talk.utterances), label=label)


def generate_synthetic_corpus(
    n_sessions: int,
    positive_fraction: float = 0.3,
    signal_strength: float = 1.0,
    seed: int = 0,
    n_botless: int = 0,
    registry: QuestionRegistry = None,
) -> Tuple[Corpus, LabelTable]:
    """
    Generate a seeded synthetic corpus and its labels.

    ``round(n_sessions * positive_fraction)`` sessions (at least one of each
    class) are labeled positive.  Session ids count up from 300.  The same
    arguments always produce the same corpus.
    """
    spec = SyntheticSpec(n_sessions, positive_fraction, signal_strength, seed, n_botless)
    spec.validate()
    registry = registry or default_registry()

    rng = np.random.default_rng(int(seed))
    n_pos = min(n_sessions - 1, max(1, round(n_sessions * positive_fraction)))
    positive = np.zeros(n_sessions, dtype=bool)
    positive[rng.choice(n_sessions, size=n_pos, replace=False)] = True
    botless = np.zeros(n_sessions, dtype=bool)
    if n_botless:
        botless[rng.choice(n_sessions, size=n_botless, replace=False)] = True

    sessions = [
        _session(rng, str(FIRST_SESSION_ID + i), bool(positive[i]), spec, registry, bool(botless[i]))
        for i in range(n_sessions)
    ]
    corpus = Corpus(sessions, provenance=Provenance.SYNTHETIC)
    labels = LabelTable({s.session_id: s.label for s in sessions})
    logger.info(
        "synthetic corpus: %d sessions, %d positive, %d bot-less, strength %s, seed %d",
        n_sessions,
        n_pos,
        n_botless,
        signal_strength,
        seed,
    )
    return corpus, labels


def write_synthetic_corpus(corpus: Corpus, labels: LabelTable, out_dir) -> Dict[str, pathlib.Path]:
    """
    Write ``<id>_TRANSCRIPT.tsv`` files and ``labels.csv`` into ``out_dir``.

    Returns the paths written, keyed by ``"labels"`` and by session id.
    """
    out_dir = pathlib.Path(out_dir)
    transcripts = out_dir / "transcripts"
    transcripts.mkdir(parents=True, exist_ok=True)
    written = {}
    for session in corpus:
        path = transcripts / f"{session.session_id}{TRANSCRIPT_SUFFIX}"
        path.write_bytes(serialize_transcript(session))
        written[session.session_id] = path

    frame = pd.DataFrame(
        [(sid, int(label)) for sid, label in labels.labels.items()],
        columns=["session_id", "phq8_binary"],
    )
    written["labels"] = out_dir / "labels.csv"
    frame.to_csv(written["labels"], index=False, lineterminator="\n")
    return written
