"""
Exceptions raised by depscreen.

Each one subclasses the closest builtin so callers can catch either.

.. autosummary::

    ~TranscriptError
    ~MalformedHeader
    ~UnknownSpeaker
    ~BadTimestamp
    ~LabelError
    ~MissingColumn
    ~NonBinaryLabel
    ~DuplicateSession
    ~UnlabeledSession
    ~BadSpec
    ~UnknownFeatureKey
    ~ModelError
    ~EmptyTrainingSet
    ~DimensionMismatch
    ~SingleClassTraining
    ~NonConvergenceWarning
    ~EmptyTestSet
    ~ConfigurationError
    ~MissingManifest
    ~NoAcceptedSessions
    ~BadArgs
"""

__all__ = """
    BadArgs
    BadSpec
    BadTimestamp
    ConfigurationError
    DimensionMismatch
    DuplicateSession
    EmptyTestSet
    EmptyTrainingSet
    LabelError
    MalformedHeader
    MissingColumn
    MissingManifest
    ModelError
    NoAcceptedSessions
    NonBinaryLabel
    NonConvergenceWarning
    SingleClassTraining
    TranscriptError
    UnknownFeatureKey
    UnknownSpeaker
    UnlabeledSession
""".split()


class TranscriptError(ValueError):
    """A transcript file could not be parsed."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class MalformedHeader(TranscriptError):
    """The transcript header lacks a required column."""


class UnknownSpeaker(TranscriptError):
    """A row names a speaker other than the bot or the participant."""

    def __init__(self, row, speaker):
        super().__init__(f"row {row}: unknown speaker {speaker!r}", row=row)
        self.speaker = speaker


class BadTimestamp(TranscriptError):
    """A row has a time that is not a non-negative number, or stops before it starts."""

    def __init__(self, row, detail=""):
        super().__init__(f"row {row}: bad timestamp {detail}".rstrip(), row=row)


class LabelError(ValueError):
    """A label (or split plan) table could not be parsed."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class MissingColumn(LabelError):
    """A required column is absent."""

    def __init__(self, column, source="table"):
        super().__init__(f"{source}: missing required column {column!r}")
        self.column = column


class NonBinaryLabel(LabelError):
    """A label is something other than 0 or 1."""

    def __init__(self, row, value):
        super().__init__(f"row {row}: label must be 0 or 1, received {value!r}", row=row)
        self.value = value


class DuplicateSession(LabelError):
    """A session id appears twice."""

    def __init__(self, row, session_id):
        super().__init__(f"row {row}: duplicate session id {session_id!r}", row=row)
        self.session_id = session_id


class UnlabeledSession(KeyError):
    """A session that must carry a label does not."""

    def __init__(self, session_id):
        super().__init__(session_id)
        self.session_id = session_id

    def __str__(self):
        return f"session {self.session_id!r} has no label"


class BadSpec(ValueError):
    """A generator or search description is not usable."""


class UnknownFeatureKey(KeyError):
    """A feature key is not in the registry."""

    def __init__(self, key):
        super().__init__(key)
        self.key = key

    def __str__(self):
        return f"unknown feature key {self.key!r}"


class ModelError(ValueError):
    """A model could not be fitted or applied."""


class EmptyTrainingSet(ModelError):
    """Training data has no rows."""


class DimensionMismatch(ModelError):
    """Array shapes do not agree."""


class SingleClassTraining(ModelError):
    """Training labels hold only one class."""


class NonConvergenceWarning(UserWarning):
    """The SVM solver hit its iteration cap before converging."""

    def __init__(self, message, passes=0):
        super().__init__(message)
        self.passes = passes


class EmptyTestSet(ValueError):
    """Baseline accuracy of an empty label array is undefined."""


class ConfigurationError(ValueError):
    """The run configuration is not valid."""


class MissingManifest(FileNotFoundError):
    """A run directory has no run manifest."""


class BadArgs(ValueError):
    """Arguments outside the domain of a combinatorial function."""


class NoAcceptedSessions(RuntimeError):
    """Ingest kept no session, so nothing downstream can run."""
