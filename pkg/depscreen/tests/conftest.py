"""
Common structures for testing.
"""

import pytest
import yaml

from ..cli import cmd_synth
from ..features import default_registry
from ..textproc import default_lexica
from .tools import INTERVIEW
from .tools import SMALL_POOL
from .tools import small_polarity
from .tools import write_corpus


@pytest.fixture
def lexica():
    """Shipped lexica."""
    return default_lexica()


@pytest.fixture
def registry():
    """Shipped 19-question registry."""
    return default_registry()


@pytest.fixture
def polarity_lex():
    """Tiny polarity lexicon with known scores."""
    return small_polarity()


@pytest.fixture
def fixture_corpus(tmp_path):
    """Five labeled transcripts; session 305 has no interviewer turns."""
    botless = [row for row in INTERVIEW if row[2] == "P"]
    transcripts = {
        "301": INTERVIEW,
        "302": INTERVIEW,
        "303": INTERVIEW,
        "304": INTERVIEW,
        "305": botless,
    }
    labels = {"301": 0, "302": 1, "303": 0, "304": 1, "305": 0}
    return write_corpus(tmp_path, transcripts, labels)


@pytest.fixture
def synthetic_dir(tmp_path):
    """Small synthetic corpus with a strong planted signal, plus its starter config."""
    out = tmp_path / "synthetic"
    cmd_synth(out, n_sessions=60, positive_fraction=0.4, signal_strength=2.0, seed=3)
    return out


@pytest.fixture
def small_config_file(synthetic_dir):
    """Run configuration with one quick forest search over the synthetic corpus."""
    document = {
        "corpus_dir": "transcripts",
        "labels_path": "labels.csv",
        "output_dir": "run",
        "split": {"ratio": 0.8, "seed": 1},
        "feature_pools": {"small": SMALL_POOL},
        "searches": [
            {
                "name": "rf_small",
                "estimator": "forest",
                "pool": "small",
                "subset_size": 2,
                "param_grid": {"n_trees": [5], "max_depth": [3]},
            }
        ],
    }
    path = synthetic_dir / "small.yaml"
    path.write_text(yaml.dump(document))
    return path
