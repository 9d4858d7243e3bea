"""
Read, check and export the run configuration.

A run is described by a single YAML (or JSON) document.  Its structure is
checked by apischema when it is loaded; :meth:`RunConfig.validate` then checks
values and that every referenced path exists.

PUBLIC API

.. autosummary::

    ~RunConfig
    ~starter_config
    ~starter_pools

PRIVATE API

note: settings classes are the sections of the configuration document

.. autosummary::

    ~CleaningSettings
    ~LexiconSettings
    ~SplitSettings
    ~SearchSettings
"""

__all__ = [
    "RunConfig",
    "starter_config",
    "starter_pools",
]

import json
import logging
import pathlib
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from typing import Any
from typing import Dict
from typing import List
from typing import Optional

import yaml
from apischema import ValidationError
from apischema import deserialize
from apischema import serialize

from .corpus import DEFAULT_MARKERS
from .corpus import DEFAULT_PUNCTUATION
from .corpus import DEFAULT_SPLIT_RATIO
from .corpus import CleaningPolicy
from .exceptions import BadSpec
from .exceptions import ConfigurationError
from .exceptions import UnknownFeatureKey
from .features import QUESTION_PREFIX
from .features import SCALAR_KEYS
from .features import feature_keys
from .features import load_registry
from .models import ModelKind
from .search import PRESET_EXPERIMENTS
from .search import SearchSpec
from .textproc import DEFAULT_NEGATION_WINDOW
from .textproc import load_lexica
from .util import check_key
from .util import check_range
from .util import check_type
from .util import dump_json
from .util import json_digest

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_DIR = "run"
EXPORT_FORMATS = "dict json yaml".split()


@dataclass
class CleaningSettings:
    """Text cleaning applied to every utterance."""

    lowercase: bool = True
    punctuation: str = "".join(sorted(DEFAULT_PUNCTUATION))
    markers: List[str] = field(default_factory=lambda: [o + c for o, c in DEFAULT_MARKERS])
    """Each marker pair is written as its two delimiter characters, such as ``"<>"``."""
    keep_contractions: bool = True
    remove_stopwords: bool = False

    def to_policy(self) -> CleaningPolicy:
        return CleaningPolicy(
            lowercase=self.lowercase,
            punctuation_set=frozenset(self.punctuation),
            marker_delimiters=tuple(tuple(m) for m in self.markers),
            keep_contractions=self.keep_contractions,
            remove_stopwords=self.remove_stopwords,
        )

    def validate(self):
        for marker in self.markers:
            if len(marker) != 2:
                raise ValueError(f"cleaning marker must be two characters, received {marker!r}")
        self.to_policy()


@dataclass
class LexiconSettings:
    """Replacement word lists.  Any path left empty uses the shipped file."""

    registry: Optional[str] = None
    polarity: Optional[str] = None
    negators: Optional[str] = None
    pos: Optional[str] = None
    pos_suffixes: Optional[str] = None
    stopwords: Optional[str] = None
    first_person: Optional[str] = None
    negation_window: int = DEFAULT_NEGATION_WINDOW

    @property
    def paths(self) -> Dict[str, str]:
        names = "registry polarity negators pos pos_suffixes stopwords first_person".split()
        return {k: getattr(self, k) for k in names if getattr(self, k) is not None}

    def load_lexica(self):
        return load_lexica(
            polarity_path=self.polarity,
            negators_path=self.negators,
            pos_path=self.pos,
            suffix_path=self.pos_suffixes,
            stopwords_path=self.stopwords,
            first_person_path=self.first_person,
            negation_window=self.negation_window,
        )

    def load_registry(self):
        return load_registry(self.registry)


@dataclass
class SplitSettings:
    """Seeded train/test split, or a stored split plan."""

    ratio: float = DEFAULT_SPLIT_RATIO
    seed: int = 0
    plan: Optional[str] = None

    def validate(self):
        check_range(self.ratio, 0.0, 1.0, "split ratio")
        if self.ratio in (0.0, 1.0):
            raise ValueError(f"split ratio must leave both sides non-empty, received {self.ratio}")
        check_range(self.seed, 0, 2**63 - 1, "split seed")


@dataclass
class SearchSettings:
    """
    One search block.

    ``preset`` names an entry of :data:`~depscreen.search.PRESET_EXPERIMENTS`;
    its estimator, subset size, grid and sample limit fill any field left out.
    The feature pool is either ``feature_pool`` or the name of one of the
    run's ``feature_pools`` given as ``pool``.
    """

    name: str
    estimator: Optional[str] = None
    preset: Optional[str] = None
    pool: Optional[str] = None
    feature_pool: List[str] = field(default_factory=list)
    subset_size: Optional[int] = None
    param_grid: Optional[Dict[str, List[Any]]] = None
    sample_limit: Optional[int] = None
    seed: int = 0

    def to_spec(self, pools: Dict[str, List[str]]) -> SearchSpec:
        """Build the SearchSpec, filling fields from the preset."""
        intro = f"search {self.name!r}"
        estimator, subset_size = self.estimator, self.subset_size
        param_grid, sample_limit = self.param_grid, self.sample_limit
        if self.preset is not None:
            check_key(self.preset, PRESET_EXPERIMENTS, f"{intro} preset")
            shape = PRESET_EXPERIMENTS[self.preset]
            estimator = estimator or shape.estimator.value
            subset_size = subset_size or shape.subset_size
            param_grid = param_grid if param_grid is not None else shape.param_grid
            sample_limit = sample_limit if sample_limit is not None else shape.sample_limit
        if estimator is None or subset_size is None:
            raise ValueError(f"{intro}: needs 'estimator' and 'subset_size' (or a 'preset')")
        if self.pool is not None and self.feature_pool:
            raise ValueError(f"{intro}: give either 'pool' or 'feature_pool', not both")
        if self.pool is not None:
            check_key(self.pool, pools, f"{intro} pool")
            pool = pools[self.pool]
        else:
            pool = self.feature_pool
        return SearchSpec(
            estimator=ModelKind(estimator.upper()),
            feature_pool=tuple(pool),
            subset_size=subset_size,
            param_grid=param_grid or {},
            sample_limit=sample_limit,
            seed=self.seed,
            name=self.name,
        )


@dataclass
class RunConfig:
    """
    Everything one run needs: inputs, cleaning, lexica, split, searches.

    EXAMPLE (YAML)::

        corpus_dir: transcripts
        labels_path: labels.csv
        output_dir: run
        parallelism: 4
        split:
          ratio: 0.8
          seed: 7
        feature_pools:
          pool17: [q_dream_job, q_introvert, ...]
        searches:
          - name: rf
            preset: rf_17x4
            pool: pool17
    """

    corpus_dir: str
    labels_path: str
    searches: List[SearchSettings]
    output_dir: str = DEFAULT_OUTPUT_DIR
    parallelism: int = 1
    cleaning: CleaningSettings = field(default_factory=CleaningSettings)
    lexicon: LexiconSettings = field(default_factory=LexiconSettings)
    split: SplitSettings = field(default_factory=SplitSettings)
    feature_pools: Dict[str, List[str]] = field(default_factory=dict)

    # ---- loading

    @classmethod
    def from_dict(cls, data: dict, base_dir=None) -> "RunConfig":
        """Deserialize, resolve relative paths against ``base_dir``."""
        try:
            config = deserialize(cls, data)
        except ValidationError as exc:
            raise ConfigurationError(f"malformed configuration: {exc}") from exc
        if base_dir is not None:
            config = config.resolved(base_dir)
        return config

    @classmethod
    def from_json(cls, text: str, base_dir=None) -> "RunConfig":
        return cls.from_dict(json.loads(text), base_dir)

    @classmethod
    def from_yaml(cls, text: str, base_dir=None) -> "RunConfig":
        return cls.from_dict(yaml.load(text, Loader=yaml.SafeLoader), base_dir)

    @classmethod
    def restore(cls, data, base_dir=None) -> "RunConfig":
        """
        Read a configuration from a recognized structure (dict, JSON, YAML, file).

        A ``pathlib.Path`` is read from disk and relative paths inside it are
        resolved against its directory.  Text starting with ``{`` is JSON.
        """
        if isinstance(data, pathlib.Path):
            if not data.exists():
                raise ConfigurationError(f"configuration file not found: {data}")
            base_dir = data.parent if base_dir is None else base_dir
            data = data.read_text()

        if isinstance(data, dict):
            return cls.from_dict(data, base_dir)
        if isinstance(data, str):
            try:
                if data.strip().startswith("{"):
                    return cls.from_json(data, base_dir)
                loaded = yaml.load(data, Loader=yaml.SafeLoader)
            except (json.JSONDecodeError, yaml.YAMLError) as exc:
                raise ConfigurationError(f"cannot read configuration: {exc}") from exc
            if not isinstance(loaded, dict):
                raise ConfigurationError(f"configuration must be a mapping, received {type(loaded).__name__}")
            return cls.from_dict(loaded, base_dir)
        raise ConfigurationError(f"Unrecognized configuration structure: {type(data)}")

    def resolved(self, base_dir) -> "RunConfig":
        """Copy with every relative path made relative to ``base_dir``."""
        base = pathlib.Path(base_dir)

        def fix(path):
            if path is None:
                return None
            p = pathlib.Path(path)
            return str(p if p.is_absolute() else base / p)

        lexicon = replace(self.lexicon, **{k: fix(v) for k, v in self.lexicon.paths.items()})
        split = replace(self.split, plan=fix(self.split.plan))
        return replace(
            self,
            corpus_dir=fix(self.corpus_dir),
            labels_path=fix(self.labels_path),
            output_dir=fix(self.output_dir),
            lexicon=lexicon,
            split=split,
        )

    def with_overrides(self, seed=None, output_dir=None, parallelism=None) -> "RunConfig":
        """Apply command-line overrides; ``seed`` replaces the split and every search seed."""
        config = self
        if seed is not None:
            config = replace(
                config,
                split=replace(config.split, seed=seed),
                searches=[replace(s, seed=seed) for s in config.searches],
            )
        if output_dir is not None:
            config = replace(config, output_dir=str(output_dir))
        if parallelism is not None:
            config = replace(config, parallelism=parallelism)
        return config

    # ---- checking

    def validate(self):
        """Raise ConfigurationError when this run cannot start."""
        try:
            self._validate()
        except ConfigurationError:
            raise
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigurationError(str(exc)) from exc

    def _validate(self):
        for name in ("corpus_dir", "labels_path"):
            check_type(getattr(self, name), str, name)
        if not pathlib.Path(self.corpus_dir).is_dir():
            raise ConfigurationError(f"corpus_dir not found: {self.corpus_dir}")
        if not pathlib.Path(self.labels_path).is_file():
            raise ConfigurationError(f"labels_path not found: {self.labels_path}")
        for name, path in self.lexicon.paths.items():
            if not pathlib.Path(path).is_file():
                raise ConfigurationError(f"lexicon {name} not found: {path}")
        if self.split.plan is not None and not pathlib.Path(self.split.plan).is_file():
            raise ConfigurationError(f"split plan not found: {self.split.plan}")
        if int(self.parallelism) != self.parallelism or self.parallelism < 1:
            raise ConfigurationError(f"parallelism must be a positive integer, received {self.parallelism}")
        self.cleaning.validate()
        self.split.validate()
        if len(self.searches) == 0:
            raise ConfigurationError("at least one search is required")
        names = [s.name for s in self.searches]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"search names must be unique, received {names}")

        known = feature_keys(self.lexicon.load_registry())
        for pool_name, pool in self.feature_pools.items():
            for key in pool:
                if key not in known:
                    raise ConfigurationError(f"feature pool {pool_name!r}: unknown feature key {key!r}")
        try:
            for spec in self.search_specs():
                spec.validate(known)
        except (BadSpec, UnknownFeatureKey) as exc:
            raise ConfigurationError(str(exc)) from exc

    def search_specs(self) -> List[SearchSpec]:
        return [s.to_spec(self.feature_pools) for s in self.searches]

    # ---- exporting

    def to_dict(self) -> dict:
        return serialize(RunConfig, self)

    def to_json(self) -> str:
        return dump_json(self.to_dict()).decode()

    def to_yaml(self) -> str:
        return yaml.dump(self.to_dict(), sort_keys=False)

    def export(self, fmt="json"):
        """
        Export configuration in a recognized format (dict, JSON, YAML, file).

        PARAMETERS

        fmt *str* or *pathlib.Path* object:
            One of these: ``None``, ``"dict"``, ``"json"``, ``"yaml"``.  A
            path writes JSON to that file.
        """
        path = None
        if isinstance(fmt, pathlib.Path):
            path = fmt
            fmt = "json"

        fmt = (fmt or "json").lower()
        if fmt == "yml":
            fmt = "yaml"
        if fmt not in EXPORT_FORMATS:
            raise ValueError(f"fmt must be one of {EXPORT_FORMATS}, received {fmt!r}")
        data = getattr(self, f"to_{fmt}")()
        if path is not None:
            path.write_text(data)
        return data

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form."""
        return json_digest(self.to_dict())


def starter_pools(registry=None) -> Dict[str, List[str]]:
    """
    Pools of 17, 19 and 20 features: leading question keys plus every scalar.

    Any other composition can be written into the configuration instead.
    """
    questions = [k for k in feature_keys(registry) if k.startswith(QUESTION_PREFIX)]
    return {f"pool{n}": questions[: n - len(SCALAR_KEYS)] + list(SCALAR_KEYS) for n in (17, 19, 20)}


def starter_config(seed: int = 0, preset: str = "rf_17x4") -> RunConfig:
    """Configuration for a corpus written by ``depscreen synth``, paths relative to it."""
    shape = PRESET_EXPERIMENTS[preset]
    return RunConfig(
        corpus_dir="transcripts",
        labels_path="labels.csv",
        output_dir=DEFAULT_OUTPUT_DIR,
        split=SplitSettings(seed=seed),
        feature_pools=starter_pools(),
        searches=[SearchSettings(name=preset, preset=preset, pool=f"pool{shape.pool_size}", seed=seed)],
    )
