"""
Transcript corpora: parse, clean, validate, label and split.

.. autosummary::

    ~Speaker
    ~Label
    ~Provenance
    ~Utterance
    ~RejectedRow
    ~Session
    ~Corpus
    ~SplitPlan
    ~CleaningPolicy
    ~RejectReason
    ~Verdict
    ~LabelTable
    ~SessionRecord
    ~IngestResult
    ~parse_transcript
    ~serialize_transcript
    ~clean_utterance
    ~clean_session
    ~validate_session
    ~load_labels
    ~split_corpus
    ~split_ids
    ~load_split_plan
    ~write_split_plan
    ~session_id_from_path
    ~ingest_directory

Transcripts are UTF-8 TSV files with the header
``start_time<TAB>stop_time<TAB>speaker<TAB>value`` and times in decimal
seconds.  Labels are CSV with at least ``session_id,phq8_binary``.  A split
plan is one ``session_id<TAB>{train|test}`` per line, no header.
"""

__all__ = """
    CleaningPolicy
    clean_session
    clean_utterance
    Corpus
    ingest_directory
    IngestResult
    Label
    LabelTable
    load_labels
    load_split_plan
    parse_transcript
    Provenance
    RejectedRow
    RejectReason
    serialize_transcript
    Session
    session_id_from_path
    SessionRecord
    Speaker
    split_corpus
    split_ids
    SplitPlan
    Utterance
    validate_session
    Verdict
    write_split_plan
""".split()

import csv
import enum
import io
import logging
import math
import pathlib
import re
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from typing import Dict
from typing import FrozenSet
from typing import List
from typing import Optional
from typing import Tuple

import numpy as np
import pandas as pd
import pyRestTable

from .exceptions import BadTimestamp
from .exceptions import DuplicateSession
from .exceptions import LabelError
from .exceptions import MalformedHeader
from .exceptions import MissingColumn
from .exceptions import NonBinaryLabel
from .exceptions import TranscriptError
from .exceptions import UnknownSpeaker
from .exceptions import UnlabeledSession

logger = logging.getLogger(__name__)

TRANSCRIPT_COLUMNS = "start_time stop_time speaker value".split()
LABEL_COLUMNS = "session_id phq8_binary".split()
TRANSCRIPT_SUFFIX = "_TRANSCRIPT.tsv"
DEFAULT_PUNCTUATION = frozenset(",.[]()?!;:\"'")
DEFAULT_MARKERS = (("<", ">"), ("[", "]"), ("(", ")"))
DEFAULT_SPLIT_RATIO = 0.8
SPLIT_ROLES = ("train", "test")


class Speaker(str, enum.Enum):
    """Who spoke a turn."""

    BOT = "BOT"
    PARTICIPANT = "PARTICIPANT"

    @classmethod
    def from_text(cls, text):
        """Map a transcript speaker string (case-insensitive), or None."""
        return _SPEAKER_NAMES.get(text.strip().lower())


_SPEAKER_NAMES = {"ellie": Speaker.BOT, "participant": Speaker.PARTICIPANT}
_SPEAKER_TEXT = {Speaker.BOT: "Ellie", Speaker.PARTICIPANT: "Participant"}


class Label(enum.IntEnum):
    """Binary screening label."""

    NOT_DEPRESSED = 0
    DEPRESSED = 1


class Provenance(str, enum.Enum):
    REAL = "REAL"
    SYNTHETIC = "SYNTHETIC"


@dataclass(frozen=True)
class Utterance:
    """One timed speaker turn."""

    start_time: float
    stop_time: float
    speaker: Speaker
    text: str

    def __post_init__(self):
        if not (math.isfinite(self.start_time) and math.isfinite(self.stop_time)):
            raise ValueError(f"times must be finite, received {self.start_time}, {self.stop_time}")
        if self.start_time < 0 or self.stop_time < self.start_time:
            raise ValueError(f"need 0 <= start_time <= stop_time, received {self.start_time}, {self.stop_time}")

    @property
    def duration(self):
        return self.stop_time - self.start_time


@dataclass(frozen=True)
class RejectedRow:
    """A transcript row dropped by lenient parsing."""

    row: int
    reason: str


@dataclass(frozen=True)
class Session:
    """
    One interview: utterances in time order plus an optional label.

    Utterances are kept sorted by ``start_time``; ties keep input order.
    """

    session_id: str
    utterances: Tuple[Utterance, ...] = ()
    label: Optional[Label] = None
    rejected_rows: Tuple[RejectedRow, ...] = ()

    def __post_init__(self):
        ordered = tuple(sorted(self.utterances, key=lambda u: u.start_time))
        object.__setattr__(self, "utterances", ordered)
        object.__setattr__(self, "rejected_rows", tuple(self.rejected_rows))
        if self.label is not None:
            object.__setattr__(self, "label", Label(int(self.label)))

    def by_speaker(self, speaker: Speaker) -> List[Utterance]:
        return [u for u in self.utterances if u.speaker == speaker]

    @property
    def participant(self):
        """Participant utterances (comments) in transcript order."""
        return self.by_speaker(Speaker.PARTICIPANT)

    @property
    def bot(self):
        return self.by_speaker(Speaker.BOT)

    def with_label(self, label):
        return replace(self, label=label)


@dataclass(frozen=True)
class Corpus:
    """A set of sessions with unique ids."""

    sessions: Tuple[Session, ...] = ()
    provenance: Provenance = Provenance.REAL

    def __post_init__(self):
        object.__setattr__(self, "sessions", tuple(self.sessions))
        seen = set()
        for row, session in enumerate(self.sessions, start=1):
            if session.session_id in seen:
                raise DuplicateSession(row, session.session_id)
            seen.add(session.session_id)

    def __len__(self):
        return len(self.sessions)

    def __iter__(self):
        return iter(self.sessions)

    @property
    def ids(self) -> List[str]:
        return [s.session_id for s in self.sessions]

    def get(self, session_id) -> Session:
        for session in self.sessions:
            if session.session_id == session_id:
                return session
        raise KeyError(session_id)

    def with_labels(self, labels: Dict[str, int]) -> "Corpus":
        """New corpus whose sessions carry the labels found in ``labels``."""
        sessions = [s.with_label(labels.get(s.session_id)) for s in self.sessions]
        return Corpus(sessions, provenance=self.provenance)

    def subset(self, ids) -> "Corpus":
        """Sessions whose id is in ``ids``, in corpus order."""
        wanted = set(ids)
        return Corpus([s for s in self.sessions if s.session_id in wanted], provenance=self.provenance)


@dataclass(frozen=True)
class SplitPlan:
    """
    Train/test partition of session ids.

    ``seed`` is None for a plan read from a file.
    """

    train_ids: FrozenSet[str]
    test_ids: FrozenSet[str]
    ratio: float = DEFAULT_SPLIT_RATIO
    seed: Optional[int] = 0

    def __post_init__(self):
        object.__setattr__(self, "train_ids", frozenset(self.train_ids))
        object.__setattr__(self, "test_ids", frozenset(self.test_ids))
        overlap = self.train_ids & self.test_ids
        if overlap:
            raise ValueError(f"sessions in both train and test: {sorted(overlap)}")

    @property
    def all_ids(self):
        return self.train_ids | self.test_ids


@dataclass(frozen=True)
class CleaningPolicy:
    """
    How utterance text is cleaned.

    Markers are removed first (whole span, delimiters included), then
    punctuation, then case, then whitespace.  With ``keep_contractions``, an
    apostrophe between two alphanumeric characters survives.
    """

    lowercase: bool = True
    punctuation_set: FrozenSet[str] = DEFAULT_PUNCTUATION
    marker_delimiters: Tuple[Tuple[str, str], ...] = DEFAULT_MARKERS
    keep_contractions: bool = True
    remove_stopwords: bool = False

    def __post_init__(self):
        object.__setattr__(self, "punctuation_set", frozenset(self.punctuation_set))
        pairs = tuple(tuple(p) for p in self.marker_delimiters)
        object.__setattr__(self, "marker_delimiters", pairs)
        used = []
        for pair in pairs:
            if len(pair) != 2 or not all(isinstance(c, str) and len(c) == 1 for c in pair):
                raise ValueError(f"marker delimiter must be two single characters, received {pair!r}")
            if pair[0] == pair[1]:
                raise ValueError(f"marker delimiter {pair!r} opens and closes with the same character")
            used.extend(pair)
        if len(used) != len(set(used)):
            raise ValueError(f"marker delimiters overlap: {pairs!r}")
        for char in self.punctuation_set:
            if len(char) != 1 or char.isalnum() or char.isspace():
                raise ValueError(f"punctuation must be single non-alphanumeric characters, received {char!r}")

    @property
    def marker_patterns(self):
        # innermost span of each pair; applied until nothing changes
        patterns = []
        for opening, closing in self.marker_delimiters:
            o, c = re.escape(opening), re.escape(closing)
            patterns.append(re.compile(f"{o}[^{o}{c}]*{c}"))
        return patterns


class RejectReason(str, enum.Enum):
    """Why a session is left out of the corpus."""

    NoBotUtterances = "NoBotUtterances"
    NoParticipantUtterances = "NoParticipantUtterances"
    Unlabeled = "Unlabeled"
    Unparseable = "Unparseable"
    Duplicate = "Duplicate"


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    reason: Optional[RejectReason] = None

    def __bool__(self):
        return self.accepted


@dataclass(frozen=True)
class LabelTable:
    """Labels by session id, plus class counts."""

    labels: Dict[str, Label] = field(default_factory=dict)

    @property
    def total(self):
        return len(self.labels)

    @property
    def positives(self):
        return sum(1 for v in self.labels.values() if v == Label.DEPRESSED)

    @property
    def negatives(self):
        return self.total - self.positives

    def __len__(self):
        return self.total

    def __contains__(self, session_id):
        return session_id in self.labels

    def get(self, session_id, default=None):
        return self.labels.get(session_id, default)


def _buffer(raw):
    """Binary buffer for bytes, or pass a file-like object through."""
    if isinstance(raw, (bytes, bytearray, memoryview)):
        return io.BytesIO(bytes(raw))
    return raw


def _parse_time(text, row):
    try:
        value = float(text)
    except ValueError:
        raise BadTimestamp(row, f"{text!r} is not a number")
    if not math.isfinite(value) or value < 0:
        raise BadTimestamp(row, f"{text!r} is not a non-negative finite number")
    return value


def _parse_row(row, start, stop, speaker_text, text):
    start_time = _parse_time(start, row)
    stop_time = _parse_time(stop, row)
    if stop_time < start_time:
        raise BadTimestamp(row, f"stop_time {stop_time} precedes start_time {start_time}")
    speaker = Speaker.from_text(speaker_text)
    if speaker is None:
        raise UnknownSpeaker(row, speaker_text)
    return Utterance(start_time, stop_time, speaker, text)


_OVERLONG_ROW = "\x00overlong"


def _mark_overlong(fields):
    # stands in for a row with more fields than the header; pandas pads the rest
    return [_OVERLONG_ROW]


def parse_transcript(raw, session_id: str, strict: bool = True) -> Session:
    """
    Parse one transcript table into a Session.

    PARAMETERS

    raw *bytes* or binary file:
        Tab-separated table with columns ``start_time, stop_time, speaker,
        value``.  Extra columns are ignored.
    session_id *str*:
        Identifier for the new Session.
    strict *bool*:
        When True (default), the first bad row raises.  When False, bad rows
        are dropped and listed in ``Session.rejected_rows``, rows with more
        fields than the header among them.  A bad header or text that is not
        UTF-8 always raises TranscriptError.

    Rows are numbered from 1 (first data row).
    """
    try:
        table = pd.read_csv(
            _buffer(raw),
            sep="\t",
            dtype=str,
            keep_default_na=False,
            quoting=csv.QUOTE_NONE,
            encoding="utf-8",
            engine="python",
            on_bad_lines="error" if strict else _mark_overlong,
        )
    except pd.errors.EmptyDataError:
        raise MalformedHeader(f"{session_id}: transcript is empty")
    except pd.errors.ParserError as exc:
        raise TranscriptError(f"{session_id}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise TranscriptError(f"{session_id}: not UTF-8 text, byte {exc.start}: {exc.reason}") from exc

    columns = [str(c).strip().lower() for c in table.columns]
    for column in TRANSCRIPT_COLUMNS:
        if column not in columns:
            raise MalformedHeader(f"{session_id}: header {list(table.columns)} lacks {column!r}")
    table.columns = columns
    overlong = (table.iloc[:, 0] == _OVERLONG_ROW).to_numpy()

    utterances, rejected = [], []
    # short rows come back padded with NaN
    table = table[TRANSCRIPT_COLUMNS].fillna("")
    for row, fields in enumerate(table.itertuples(index=False, name=None), start=1):
        try:
            if overlong[row - 1]:
                raise TranscriptError(f"row {row}: more fields than the header", row=row)
            utterances.append(_parse_row(row, *fields))
        except TranscriptError as exc:
            if strict:
                raise
            logger.warning("%s: dropped %s", session_id, exc)
            rejected.append(RejectedRow(row, str(exc)))
    logger.debug("%s: parsed %d rows, rejected %d", session_id, len(utterances), len(rejected))
    return Session(session_id, tuple(utterances), rejected_rows=tuple(rejected))


def _format_time(value):
    # repr() is the shortest text that parses back to the same float
    return repr(float(value))


def serialize_transcript(session: Session) -> bytes:
    """Write a Session as transcript TSV bytes (inverse of parse_transcript)."""
    lines = ["\t".join(TRANSCRIPT_COLUMNS)]
    for u in session.utterances:
        text = " ".join(u.text.split("\t")).replace("\n", " ")
        fields = [_format_time(u.start_time), _format_time(u.stop_time), _SPEAKER_TEXT[u.speaker], text]
        lines.append("\t".join(fields))
    return ("\n".join(lines) + "\n").encode("utf-8")


def _strip_markers(text, policy):
    changed = True
    while changed:
        changed = False
        for pattern in policy.marker_patterns:
            text, count = pattern.subn(" ", text)
            changed = changed or count > 0
    return text


def _between_alnum(text, i, policy):
    before, after = text[i - 1], text[i + 1]
    if policy.lowercase:
        # neighbours as they read once lowercased ('İ' lowers to 'i' plus a combining dot)
        before, after = before.lower()[-1], after.lower()[0]
    return before.isalnum() and after.isalnum()


def _strip_punctuation(text, policy):
    kept = []
    last = len(text) - 1
    for i, char in enumerate(text):
        if char not in policy.punctuation_set:
            kept.append(char)
        elif char == "'" and policy.keep_contractions and 0 < i < last and _between_alnum(text, i, policy):
            kept.append(char)
    return "".join(kept)


def clean_utterance(text: str, policy: CleaningPolicy = CleaningPolicy()) -> str:
    """
    Clean one utterance's text.

    EXAMPLE::

        >>> clean_utterance("I'm FINE, really. <laughter>")
        "i'm fine really"
    """
    text = _strip_markers(text, policy)
    text = _strip_punctuation(text, policy)
    if policy.lowercase:
        text = text.lower()
    return " ".join(text.split())


def clean_session(session: Session, policy: CleaningPolicy = CleaningPolicy(), stopwords=None) -> Session:
    """
    Clean every utterance; utterances left empty are dropped.

    When ``policy.remove_stopwords`` is set, tokens in ``stopwords`` (a
    :class:`~depscreen.textproc.StopwordSet`) are removed after cleaning.
    """
    if policy.remove_stopwords and stopwords is None:
        raise ValueError("remove_stopwords needs a stop-word set")
    utterances = []
    for u in session.utterances:
        text = clean_utterance(u.text, policy)
        if policy.remove_stopwords:
            text = " ".join(t for t in text.split() if t not in stopwords)
        if text:
            utterances.append(replace(u, text=text))
    return replace(session, utterances=tuple(utterances))


def validate_session(s: Session) -> Verdict:
    """Accept a session only when both speakers still have utterances."""
    speakers = {u.speaker for u in s.utterances}
    if Speaker.BOT not in speakers:
        return Verdict(False, RejectReason.NoBotUtterances)
    if Speaker.PARTICIPANT not in speakers:
        return Verdict(False, RejectReason.NoParticipantUtterances)
    return Verdict(True)


def load_labels(raw) -> LabelTable:
    """
    Read the label CSV (``session_id,phq8_binary[,...]``).

    Extra columns are ignored.  Rows are numbered from 1 (first data row).
    """
    try:
        table = pd.read_csv(_buffer(raw), dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise MissingColumn(LABEL_COLUMNS[0], "labels")
    table.columns = [str(c).strip() for c in table.columns]
    for column in LABEL_COLUMNS:
        if column not in table.columns:
            raise MissingColumn(column, "labels")

    labels = {}
    table = table[LABEL_COLUMNS].fillna("")
    for row, (sid, value) in enumerate(table.itertuples(index=False, name=None), start=1):
        sid, value = sid.strip(), value.strip()
        if value not in ("0", "1"):
            raise NonBinaryLabel(row, value)
        if sid in labels:
            raise DuplicateSession(row, sid)
        labels[sid] = Label(int(value))
    result = LabelTable(labels)
    logger.info("labels: %d sessions, %d positive, %d negative", result.total, result.positives, result.negatives)
    return result


def split_corpus(
    c: Corpus,
    ratio: float = DEFAULT_SPLIT_RATIO,
    seed: int = 0,
    plan: Optional[SplitPlan] = None,
) -> SplitPlan:
    """
    Seeded train/test split of a fully labeled corpus.

    Session ids are sorted, shuffled with ``numpy.random.default_rng(seed)``
    and the first ``ceil(ratio * n)`` go to training.  An explicit ``plan``
    is checked against the corpus and returned unchanged.
    """
    for session in c:
        if session.label is None:
            raise UnlabeledSession(session.session_id)

    if plan is not None:
        ids = set(c.ids)
        unknown = plan.all_ids - ids
        if unknown:
            raise KeyError(f"split plan names sessions not in the corpus: {sorted(unknown)}")
        missing = ids - plan.all_ids
        if missing:
            raise KeyError(f"split plan does not cover sessions: {sorted(missing)}")
        return plan

    return split_ids(c.ids, ratio, seed)


def split_ids(session_ids, ratio: float = DEFAULT_SPLIT_RATIO, seed: int = 0) -> SplitPlan:
    """Seeded split of bare session ids; same result as :func:`split_corpus`."""
    if not 0 < ratio < 1:
        raise ValueError(f"split ratio must be in (0, 1), received {ratio}")
    if int(seed) != seed or seed < 0:
        raise ValueError(f"split seed must be an unsigned integer, received {seed}")

    ids = sorted(session_ids)
    n = len(ids)
    order = np.random.default_rng(int(seed)).permutation(n)
    shuffled = [ids[i] for i in order]
    # tolerance keeps e.g. 0.8 * 185 from rounding up past 148
    n_train = min(n, math.ceil(ratio * n - 1e-9))
    plan = SplitPlan(frozenset(shuffled[:n_train]), frozenset(shuffled[n_train:]), ratio=ratio, seed=int(seed))
    logger.info("split %d sessions: %d train, %d test (seed %d)", n, len(plan.train_ids), len(plan.test_ids), seed)
    return plan


def write_split_plan(plan: SplitPlan, path) -> pathlib.Path:
    """Write ``session_id<TAB>role`` lines, sorted by id."""
    rows = [(sid, "train") for sid in plan.train_ids] + [(sid, "test") for sid in plan.test_ids]
    frame = pd.DataFrame(sorted(rows), columns=["session_id", "role"])
    path = pathlib.Path(path)
    frame.to_csv(path, sep="\t", header=False, index=False, lineterminator="\n")
    return path


def load_split_plan(raw) -> SplitPlan:
    """Read a split plan written by :func:`write_split_plan` (or by hand)."""
    try:
        table = pd.read_csv(
            _buffer(raw),
            sep="\t",
            header=None,
            names=["session_id", "role"],
            dtype=str,
            keep_default_na=False,
            quoting=csv.QUOTE_NONE,
        )
    except pd.errors.EmptyDataError:
        return SplitPlan(frozenset(), frozenset(), ratio=0.0, seed=None)

    roles = {role: set() for role in SPLIT_ROLES}
    seen = set()
    table = table.fillna("")
    for row, (sid, role) in enumerate(table.itertuples(index=False, name=None), start=1):
        sid, role = sid.strip(), role.strip().lower()
        if not role:
            raise MissingColumn("role", f"split plan row {row}")
        if role not in roles:
            raise LabelError(f"row {row}: split role must be 'train' or 'test', received {role!r}", row=row)
        if sid in seen:
            raise DuplicateSession(row, sid)
        seen.add(sid)
        roles[role].add(sid)
    n = len(seen)
    ratio = len(roles["train"]) / n if n else 0.0
    return SplitPlan(frozenset(roles["train"]), frozenset(roles["test"]), ratio=ratio, seed=None)


def session_id_from_path(path) -> str:
    """``300_TRANSCRIPT.tsv`` gives ``300``; other files use their stem."""
    name = pathlib.Path(path).name
    if name.endswith(TRANSCRIPT_SUFFIX):
        return name[: -len(TRANSCRIPT_SUFFIX)]
    return pathlib.Path(path).stem


@dataclass(frozen=True)
class SessionRecord:
    """One line of the ingest inventory."""

    session_id: str
    accepted: bool
    reason: str = ""
    label: Optional[int] = None
    n_utterances: int = 0
    n_rejected_rows: int = 0


@dataclass(frozen=True)
class IngestResult:
    """Accepted, labeled sessions plus the full inventory."""

    corpus: Corpus
    records: Tuple[SessionRecord, ...]

    @property
    def accepted(self):
        return [r for r in self.records if r.accepted]

    @property
    def rejected(self):
        return [r for r in self.records if not r.accepted]

    def reason_counts(self) -> Dict[str, int]:
        counts = {}
        for r in self.rejected:
            counts[r.reason] = counts.get(r.reason, 0) + 1
        return dict(sorted(counts.items()))

    def class_counts(self) -> Dict[int, int]:
        counts = {int(label): 0 for label in Label}
        for session in self.corpus:
            counts[int(session.label)] += 1
        return counts

    def summary(self) -> str:
        """One line, such as ``4 accepted, 1 rejected (NoBotUtterances)``."""
        text = f"{len(self.accepted)} accepted, {len(self.rejected)} rejected"
        if self.rejected:
            text += " (" + ", ".join(f"{k}: {v}" if v > 1 else k for k, v in self.reason_counts().items()) + ")"
        return text

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "session_id": r.session_id,
                "status": "accepted" if r.accepted else "rejected",
                "reason": r.reason,
                "label": "" if r.label is None else int(r.label),
                "utterances": r.n_utterances,
                "rejected_rows": r.n_rejected_rows,
            }
            for r in self.records
        ]
        return pd.DataFrame(rows, columns="session_id status reason label utterances rejected_rows".split())

    def summary_table(self) -> pyRestTable.Table:
        """Counts by outcome and class."""
        table = pyRestTable.Table()
        table.labels = "outcome sessions".split()
        table.addRow(("accepted", len(self.accepted)))
        for reason, count in self.reason_counts().items():
            table.addRow((f"rejected: {reason}", count))
        for label, count in self.class_counts().items():
            table.addRow((f"accepted, {Label(label).name}", count))
        return table


def ingest_directory(
    corpus_dir,
    labels: LabelTable,
    policy: CleaningPolicy = CleaningPolicy(),
    stopwords=None,
    strict: bool = False,
    provenance: Provenance = Provenance.REAL,
) -> IngestResult:
    """
    Parse, clean, validate and label every ``*.tsv`` in ``corpus_dir``.

    Files are visited in sorted name order.  A file that cannot be parsed at
    all is recorded as ``Unparseable``, and a later file whose session id
    was already seen (``300.tsv`` and ``300_TRANSCRIPT.tsv``) as
    ``Duplicate``.  In lenient mode (the default) single bad rows are dropped
    and the session is kept if it still validates.
    """
    corpus_dir = pathlib.Path(corpus_dir)
    sessions, records = [], []
    seen = set()
    for row, path in enumerate(sorted(corpus_dir.glob("*.tsv")), start=1):
        sid = session_id_from_path(path)
        if sid in seen:
            if strict:
                raise DuplicateSession(row, sid)
            logger.warning("%s: %s repeats an ingested session id", sid, path.name)
            records.append(SessionRecord(sid, False, RejectReason.Duplicate.value))
            continue
        seen.add(sid)
        try:
            session = parse_transcript(path.read_bytes(), sid, strict=strict)
        except TranscriptError as exc:
            if strict:
                raise
            logger.warning("%s: unparseable transcript: %s", sid, exc)
            records.append(SessionRecord(sid, False, RejectReason.Unparseable.value))
            continue

        session = clean_session(session, policy, stopwords)
        verdict = validate_session(session)
        label = labels.get(sid)
        n_rejected = len(session.rejected_rows)
        n_utterances = len(session.utterances)
        if not verdict:
            records.append(SessionRecord(sid, False, verdict.reason.value, label, n_utterances, n_rejected))
        elif label is None:
            records.append(SessionRecord(sid, False, RejectReason.Unlabeled.value, None, n_utterances, n_rejected))
        else:
            sessions.append(session.with_label(label))
            records.append(SessionRecord(sid, True, "", int(label), n_utterances, n_rejected))

    result = IngestResult(Corpus(sessions, provenance=provenance), tuple(records))
    logger.info("ingest %s: %s", corpus_dir, result.summary())
    return result
