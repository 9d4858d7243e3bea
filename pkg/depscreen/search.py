"""
Exhaustive feature-subset x hyperparameter search.

Configurations are numbered by their position (ordinal) in a fixed stream:
feature subsets in lexicographic order of pool indices, and for each subset
the parameter grid in odometer order (last declared parameter varies
fastest).  Leaderboards sort by accuracy (descending), then ordinal, so the
output never depends on how evaluations were scheduled.

.. autosummary::

    ~SearchSpec
    ~Config
    ~EvalResult
    ~FailedConfig
    ~Leaderboard
    ~ExperimentShape
    ~PRESET_EXPERIMENTS
    ~count_subsets
    ~grid_points
    ~unrank_combination
    ~config_at
    ~enumerate_configs
    ~baseline_accuracy
    ~baseline_table
    ~evaluate_config
    ~run_search
    ~write_leaderboard_csv
    ~read_leaderboard_csv
    ~format_top_table
    ~params_text
    ~experiment_spec
    ~experiment_totals
"""

__all__ = """
    baseline_accuracy
    baseline_table
    Config
    config_at
    count_subsets
    enumerate_configs
    EvalResult
    evaluate_config
    experiment_spec
    experiment_totals
    ExperimentShape
    FailedConfig
    format_top_table
    grid_points
    Leaderboard
    PRESET_EXPERIMENTS
    params_text
    read_leaderboard_csv
    run_search
    SearchSpec
    unrank_combination
    write_leaderboard_csv
""".split()

import itertools
import logging
import math
import pathlib
from dataclasses import dataclass
from dataclasses import field
from typing import Any
from typing import Dict
from typing import Iterator
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
import orjson
import pandas as pd
import pyRestTable
from joblib import Parallel
from joblib import delayed

from .exceptions import BadArgs
from .exceptions import BadSpec
from .exceptions import EmptyTestSet
from .exceptions import ModelError
from .exceptions import UnknownFeatureKey
from .features import FeatureMatrix
from .features import feature_label
from .models import ModelKind
from .models import fit
from .models import make_params
from .models import predict
from .util import json_digest
from .util import progress

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_SIZE = 64
DEFAULT_TOP_K = 10
LEADERBOARD_COLUMNS = "rank ordinal accuracy tp fp tn fn features params".split()
FEATURE_SEPARATOR = ";"


@dataclass(frozen=True)
class SearchSpec:
    """
    One search: an estimator, a feature pool, a subset size and a parameter grid.

    ``param_grid`` keeps its declared key order.  With ``sample_limit``, a
    seeded uniform sample of that many ordinals (sorted) is evaluated instead
    of the whole stream.  ``seed`` drives the sampling and is also the model
    seed unless the grid sets one.
    """

    estimator: ModelKind
    feature_pool: Tuple[str, ...]
    subset_size: int
    param_grid: Dict[str, List[Any]] = field(default_factory=dict)
    sample_limit: Optional[int] = None
    seed: int = 0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "feature_pool", tuple(self.feature_pool))
        object.__setattr__(self, "param_grid", {k: list(v) for k, v in dict(self.param_grid).items()})
        if not self.name:
            object.__setattr__(self, "name", str(getattr(self.estimator, "value", self.estimator)).lower())

    @property
    def grid_size(self):
        return math.prod(len(v) for v in self.param_grid.values())

    @property
    def n_subsets(self):
        return count_subsets(len(self.feature_pool), self.subset_size)

    @property
    def total(self):
        """Length of the full (unsampled) configuration stream."""
        return self.n_subsets * self.grid_size

    @property
    def n_configs(self):
        """Number of configurations actually evaluated."""
        if self.sample_limit is None:
            return self.total
        return min(self.sample_limit, self.total)

    def validate(self, known_keys: Optional[Sequence[str]] = None):
        """Raise BadSpec (or UnknownFeatureKey) if this search cannot run."""
        try:
            kind = ModelKind(self.estimator)
        except ValueError:
            raise BadSpec(f"{self.name}: unknown estimator {self.estimator!r}")
        if not self.feature_pool:
            raise BadSpec(f"{self.name}: empty feature pool")
        if len(set(self.feature_pool)) != len(self.feature_pool):
            raise BadSpec(f"{self.name}: feature pool repeats keys")
        if known_keys is not None:
            for key in self.feature_pool:
                if key not in known_keys:
                    raise UnknownFeatureKey(key)
        if int(self.subset_size) != self.subset_size or not 1 <= self.subset_size <= len(self.feature_pool):
            raise BadSpec(f"{self.name}: subset_size {self.subset_size} not in [1, {len(self.feature_pool)}]")
        for param, values in self.param_grid.items():
            if not values:
                raise BadSpec(f"{self.name}: grid values for {param!r} are empty")
        if self.sample_limit is not None and self.sample_limit < 1:
            raise BadSpec(f"{self.name}: sample_limit must be positive, received {self.sample_limit}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise BadSpec(f"{self.name}: seed must be an unsigned integer, received {self.seed}")
        for point in grid_points(self):
            try:
                make_params(kind, {"seed": self.seed, **point})
            except (ValueError, TypeError, KeyError) as exc:
                raise BadSpec(f"{self.name}: grid point {point}: {exc}") from exc

    def to_document(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "estimator": ModelKind(self.estimator).value,
            "feature_pool": list(self.feature_pool),
            "subset_size": self.subset_size,
            "param_grid": self.param_grid,
            "sample_limit": self.sample_limit,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class Config:
    """One (feature subset, parameter assignment) pair at its stream position."""

    ordinal: int
    estimator: ModelKind
    feature_subset: Tuple[str, ...]
    params: Dict[str, Any]
    seed: int = 0

    def model_params(self):
        return {"seed": self.seed, **self.params}


@dataclass(frozen=True)
class EvalResult:
    """Test-set outcome of one configuration; 1 is the positive class."""

    ordinal: int
    feature_subset: Tuple[str, ...]
    params: Dict[str, Any]
    accuracy: float
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def n_test(self):
        return self.tp + self.fp + self.tn + self.fn

    @property
    def correct(self):
        return self.tp + self.tn


@dataclass(frozen=True)
class FailedConfig:
    ordinal: int
    feature_subset: Tuple[str, ...]
    params: Dict[str, Any]
    error: str


@dataclass(frozen=True)
class Leaderboard:
    """Results sorted by (accuracy desc, ordinal asc), plus failures."""

    results: Tuple[EvalResult, ...]
    spec_digest: str = ""
    failures: Tuple[FailedConfig, ...] = ()
    name: str = ""

    def __post_init__(self):
        ranked = tuple(sorted(self.results, key=lambda r: (-r.accuracy, r.ordinal)))
        object.__setattr__(self, "results", ranked)
        object.__setattr__(self, "failures", tuple(sorted(self.failures, key=lambda f: f.ordinal)))
        ordinals = [r.ordinal for r in ranked]
        if len(set(ordinals)) != len(ordinals):
            raise ValueError(f"{self.name}: leaderboard ordinals are not unique")

    def __len__(self):
        return len(self.results)

    @property
    def best(self) -> Optional[EvalResult]:
        return self.results[0] if self.results else None

    def top(self, k: int) -> Tuple[EvalResult, ...]:
        return self.results[:k]

    def to_frame(self) -> pd.DataFrame:
        rows = [
            (
                rank,
                r.ordinal,
                r.accuracy,
                r.tp,
                r.fp,
                r.tn,
                r.fn,
                FEATURE_SEPARATOR.join(r.feature_subset),
                params_text(r.params),
            )
            for rank, r in enumerate(self.results, start=1)
        ]
        return pd.DataFrame(rows, columns=LEADERBOARD_COLUMNS)


def params_text(params) -> str:
    """Compact JSON of a parameter assignment, keys sorted."""
    return orjson.dumps(params, option=orjson.OPT_SORT_KEYS).decode()


def count_subsets(n: int, k: int) -> int:
    """Exact binomial coefficient C(n, k)."""
    for name, value in (("n", n), ("k", k)):
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise BadArgs(f"{name} must be an integer, received {value!r}")
    if not 0 <= k <= n:
        raise BadArgs(f"need 0 <= k <= n, received n={n}, k={k}")
    return math.comb(int(n), int(k))


def grid_points(spec: SearchSpec) -> List[Dict[str, Any]]:
    """Every grid assignment, odometer order over the declared keys."""
    names = list(spec.param_grid)
    return [dict(zip(names, values)) for values in itertools.product(*spec.param_grid.values())]


def unrank_combination(n: int, k: int, rank: int) -> Tuple[int, ...]:
    """The ``rank``-th k-subset of ``range(n)`` in lexicographic order."""
    total = count_subsets(n, k)
    if not 0 <= rank < total:
        raise BadArgs(f"rank {rank} outside [0, {total})")
    combo, x = [], 0
    for i in range(k):
        while True:
            # subsets whose i-th member is x
            block = math.comb(n - x - 1, k - i - 1)
            if rank < block:
                combo.append(x)
                x += 1
                break
            rank -= block
            x += 1
    return tuple(combo)


def config_at(spec: SearchSpec, ordinal: int, points: Optional[List[Dict[str, Any]]] = None) -> Config:
    """The configuration at position ``ordinal`` of the full stream."""
    points = points if points is not None else grid_points(spec)
    subset_rank, point = divmod(int(ordinal), len(points))
    indices = unrank_combination(len(spec.feature_pool), spec.subset_size, subset_rank)
    subset = tuple(spec.feature_pool[i] for i in indices)
    return Config(int(ordinal), ModelKind(spec.estimator), subset, points[point], spec.seed)


def sampled_ordinals(spec: SearchSpec) -> np.ndarray:
    """Seeded uniform sample of ordinals, without replacement, ascending."""
    rng = np.random.default_rng(spec.seed)
    return np.sort(rng.choice(spec.total, size=spec.n_configs, replace=False))


def enumerate_configs(spec: SearchSpec) -> Iterator[Config]:
    """
    Stream configurations in ordinal order.

    With ``sample_limit`` below the total, only the sampled ordinals are
    emitted; otherwise all of them.
    """
    spec.validate()
    points = grid_points(spec)
    kind = ModelKind(spec.estimator)
    if spec.sample_limit is not None and spec.sample_limit < spec.total:
        for ordinal in sampled_ordinals(spec):
            yield config_at(spec, int(ordinal), points)
        return
    ordinal = 0
    for subset in itertools.combinations(spec.feature_pool, spec.subset_size):
        for point in points:
            yield Config(ordinal, kind, subset, point, spec.seed)
            ordinal += 1


def baseline_accuracy(test_labels, constant: int) -> float:
    """Accuracy of always predicting ``constant``: the share of labels equal to it."""
    labels = np.asarray(test_labels)
    if labels.size == 0:
        raise EmptyTestSet("baseline accuracy needs at least one label")
    if constant not in (0, 1):
        raise ValueError(f"constant must be 0 or 1, received {constant!r}")
    return float(np.count_nonzero(labels == constant) / labels.size)


def baseline_table(test_labels) -> pyRestTable.Table:
    """Both constant baselines, as a table."""
    labels = np.asarray(test_labels)
    table = pyRestTable.Table()
    table.labels = "constant correct total accuracy".split()
    for constant in (0, 1):
        correct = int(np.count_nonzero(labels == constant))
        table.addRow((constant, correct, labels.size, f"{baseline_accuracy(labels, constant):.4f}"))
    return table


def evaluate_config(cfg: Config, train: FeatureMatrix, test: FeatureMatrix) -> EvalResult:
    """
    Fit ``cfg`` on ``train`` and score it on ``test``.

    Model errors propagate with an ``ordinal`` attribute added.
    """
    if len(test) == 0:
        raise EmptyTestSet("test matrix has no rows")
    train_cols = train.column_indices(cfg.feature_subset)
    test_cols = test.column_indices(cfg.feature_subset)
    try:
        X_train = train.values[:, train_cols]
        model = fit(cfg.estimator, X_train, train.labels, cfg.model_params(), cfg.feature_subset)
        predicted = predict(model, test.values[:, test_cols])
    except (ModelError, ValueError, ArithmeticError) as exc:
        exc.ordinal = cfg.ordinal
        raise
    actual = test.labels
    tp = int(np.count_nonzero((predicted == 1) & (actual == 1)))
    fp = int(np.count_nonzero((predicted == 1) & (actual == 0)))
    tn = int(np.count_nonzero((predicted == 0) & (actual == 0)))
    fn = int(np.count_nonzero((predicted == 0) & (actual == 1)))
    accuracy = (tp + tn) / (tp + fp + tn + fn)
    logger.debug("config %d %s %s: %d/%d", cfg.ordinal, cfg.feature_subset, cfg.params, tp + tn, len(actual))
    return EvalResult(cfg.ordinal, cfg.feature_subset, cfg.params, accuracy, tp, fp, tn, fn)


def _evaluate_chunk(configs, train, test):
    outcomes = []
    for cfg in configs:
        try:
            outcomes.append(evaluate_config(cfg, train, test))
        except (ModelError, ValueError, ArithmeticError) as exc:
            logger.warning("config %d failed: %s", cfg.ordinal, exc)
            error = f"{type(exc).__name__}: {exc}"
            outcomes.append(FailedConfig(cfg.ordinal, cfg.feature_subset, cfg.params, error))
    return outcomes


def _chunks(iterable, size):
    iterator = iter(iterable)
    while True:
        chunk = list(itertools.islice(iterator, size))
        if not chunk:
            return
        yield chunk


def run_search(
    spec: SearchSpec,
    train: FeatureMatrix,
    test: FeatureMatrix,
    parallelism: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    show_progress: bool = True,
) -> Leaderboard:
    """
    Evaluate every configuration of ``spec`` and rank the results.

    Chunks of configurations are evaluated by joblib workers; results are put
    back in ordinal order before ranking, so any ``parallelism`` gives the
    same leaderboard.  A configuration that fails is recorded on
    ``Leaderboard.failures`` and the search continues.
    """
    if int(parallelism) != parallelism or parallelism < 1:
        raise ValueError(f"parallelism must be a positive integer, received {parallelism}")
    spec.validate(train.feature_keys)
    for key in spec.feature_pool:
        if key not in test.feature_keys:
            raise UnknownFeatureKey(key)
    if len(test) == 0:
        raise EmptyTestSet(f"{spec.name}: test matrix has no rows")

    logger.info("search %s: %d configurations, parallelism %d", spec.name, spec.n_configs, parallelism)
    outcomes = []
    with progress(spec.n_configs, spec.name, enabled=show_progress) as bar:
        runner = Parallel(n_jobs=int(parallelism), return_as="generator")
        chunks = _chunks(enumerate_configs(spec), chunk_size)
        tasks = (delayed(_evaluate_chunk)(chunk, train, test) for chunk in chunks)
        for chunk in runner(tasks):
            outcomes.extend(chunk)
            bar.update(len(chunk))

    outcomes.sort(key=lambda o: o.ordinal)
    results = [o for o in outcomes if isinstance(o, EvalResult)]
    failures = [o for o in outcomes if isinstance(o, FailedConfig)]
    board = Leaderboard(tuple(results), json_digest(spec.to_document()), tuple(failures), spec.name)
    best = board.best
    logger.info(
        "search %s: %d evaluated, %d failed, best %s",
        spec.name,
        len(results),
        len(failures),
        "n/a" if best is None else f"{best.accuracy:.4f} (ordinal {best.ordinal})",
    )
    return board


def write_leaderboard_csv(board: Leaderboard, path) -> pathlib.Path:
    """CSV with columns ``rank,ordinal,accuracy,tp,fp,tn,fn,features,params``."""
    path = pathlib.Path(path)
    board.to_frame().to_csv(path, index=False, lineterminator="\n")
    return path


def read_leaderboard_csv(path, spec_digest: str = "", name: str = "") -> Leaderboard:
    """Leaderboard from :func:`write_leaderboard_csv` output (no failures)."""
    frame = pd.read_csv(
        path,
        keep_default_na=False,
        float_precision="round_trip",
        dtype={"features": str, "params": str},
    )
    for column in LEADERBOARD_COLUMNS:
        if column not in frame.columns:
            raise KeyError(f"{path}: missing column {column!r}")
    results = [
        EvalResult(
            int(row.ordinal),
            tuple(row.features.split(FEATURE_SEPARATOR)) if row.features else (),
            orjson.loads(row.params),
            float(row.accuracy),
            int(row.tp),
            int(row.fp),
            int(row.tn),
            int(row.fn),
        )
        for row in frame.itertuples(index=False)
    ]
    return Leaderboard(tuple(results), spec_digest, (), name)


def format_top_table(board: Leaderboard, k: int = DEFAULT_TOP_K, registry=None) -> pyRestTable.Table:
    """
    Top ``k`` results as Rank, Features, Parameters and Accuracy columns.

    ``k`` larger than the leaderboard prints every row.
    """
    table = pyRestTable.Table()
    table.labels = "Rank Features Parameters Accuracy".split()
    for rank, r in enumerate(board.top(k), start=1):
        features = ", ".join(feature_label(key, registry) for key in r.feature_subset)
        parameters = ", ".join(f"{name}: {value}" for name, value in r.params.items())
        table.addRow((rank, features, parameters, f"{100 * r.accuracy:.1f}% ({r.correct}/{r.n_test})"))
    return table


@dataclass(frozen=True)
class ExperimentShape:
    """Pool size, subset size and grid of a preset experiment."""

    estimator: ModelKind
    pool_size: int
    subset_size: int
    param_grid: Dict[str, List[Any]]
    sample_limit: Optional[int] = None

    @property
    def total(self):
        grid_size = math.prod(len(v) for v in self.param_grid.values())
        return count_subsets(self.pool_size, self.subset_size) * grid_size


SVM_GAMMAS = [1.0, 0.1, 0.01, 0.001, "auto"]
# fmt: off
PRESET_EXPERIMENTS = {
    "rf_17x4": ExperimentShape(
        ModelKind.FOREST, 17, 4,
        {"n_trees": [100], "max_depth": [12]},
    ),
    "xgb_17x4": ExperimentShape(
        ModelKind.BOOST, 17, 4,
        {"n_estimators": [100, 300, 500], "learning_rate": [0.05], "max_depth": [12], "eval_metric": ["auc"]},
    ),
    "svm_17x4": ExperimentShape(
        ModelKind.SVM, 17, 4,
        {"gamma": SVM_GAMMAS, "kernel": ["rbf", "linear"]},
    ),
    "svm_19x5": ExperimentShape(
        ModelKind.SVM, 19, 5,
        {"gamma": SVM_GAMMAS, "kernel": ["rbf", "linear"]},
    ),
    "svm_20x10": ExperimentShape(
        ModelKind.SVM, 20, 10,
        {"kernel": ["rbf"], "gamma": [1.0, "auto"], "C": [1.0, 5.0, 10.0]},
        sample_limit=30_000,
    ),
}
# fmt: on


def experiment_totals() -> Dict[str, int]:
    """Full configuration count of each preset experiment."""
    return {name: shape.total for name, shape in PRESET_EXPERIMENTS.items()}


def experiment_spec(name: str, feature_pool: Sequence[str], seed: int = 0, **overrides) -> SearchSpec:
    """
    SearchSpec of preset ``name`` over ``feature_pool``.

    The pool must have the preset's size.  Keyword ``overrides`` replace
    SearchSpec fields (for example a smaller ``param_grid`` or ``sample_limit``).
    """
    if name not in PRESET_EXPERIMENTS:
        raise BadSpec(f"unknown experiment {name!r}, expected one of {sorted(PRESET_EXPERIMENTS)}")
    shape = PRESET_EXPERIMENTS[name]
    if len(feature_pool) != shape.pool_size:
        raise BadSpec(
            f"experiment {name} needs a pool of {shape.pool_size} features, received {len(feature_pool)}"
        )
    fields = dict(
        estimator=shape.estimator,
        feature_pool=tuple(feature_pool),
        subset_size=shape.subset_size,
        param_grid={k: list(v) for k, v in shape.param_grid.items()},
        sample_limit=shape.sample_limit,
        seed=seed,
        name=name,
    )
    fields.update(overrides)
    return SearchSpec(**fields)
