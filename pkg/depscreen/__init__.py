"""
:mod:`depscreen` - depression screening from interview transcripts
==================================================================

.. module:: depscreen
   :synopsis:

"""

# flake8: noqa

import logging

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

PROJECT_NAME = "depscreen"  # pyproject.toml::[project]name

try:
    from setuptools_scm import get_version

    __version__ = get_version(root="..", relative_to=__file__)
    del get_version
except (LookupError, ModuleNotFoundError):
    from importlib.metadata import PackageNotFoundError
    from importlib.metadata import version

    try:
        __version__ = version(PROJECT_NAME)
    except PackageNotFoundError:
        __version__ = "0+unknown"
    del version, PackageNotFoundError

# import shortcuts

from .configuration import RunConfig  # noqa: F401, F402, E402
from .corpus import CleaningPolicy  # noqa: F401, F402, E402
from .corpus import Corpus
from .corpus import Session
from .corpus import Utterance
from .corpus import clean_session
from .corpus import ingest_directory
from .corpus import load_labels
from .corpus import parse_transcript
from .corpus import split_corpus
from .exceptions import BadSpec  # noqa: F401, F402, E402
from .exceptions import ConfigurationError
from .exceptions import ModelError
from .exceptions import NonConvergenceWarning
from .exceptions import TranscriptError
from .exceptions import UnknownFeatureKey
from .features import FeatureMatrix  # noqa: F401, F402, E402
from .features import build_matrix
from .features import extract_features
from .models import ModelKind  # noqa: F401, F402, E402
from .models import fit
from .models import load_model
from .models import predict
from .models import save_model
from .search import SearchSpec  # noqa: F401, F402, E402
from .search import baseline_accuracy
from .search import count_subsets
from .search import enumerate_configs
from .search import run_search
from .synthetic import generate_synthetic_corpus  # noqa: F401, F402, E402
from .util import software_versions  # noqa: F401, F402, E402
