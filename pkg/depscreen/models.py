"""
Seed-deterministic binary classifiers: tree, forest, boosting and SVM.

Labels are 0/1 throughout; 1 is the positive (depressed) class.  Every
tie resolves to class 0.

PUBLIC API

.. autosummary::

    ~ModelKind
    ~EvalMetric
    ~TreeParams
    ~ForestParams
    ~BoostParams
    ~SvmParams
    ~FittedModel
    ~fit_tree
    ~fit_forest
    ~fit_boost
    ~fit_svm
    ~fit
    ~make_params
    ~predict
    ~decision_function
    ~kernel_eval
    ~model_document
    ~save_model
    ~load_model
    ~dumps_model
    ~loads_model

A model dump is a JSON document::

    {"format": "depscreen-model", "version": 1, "kind": "FOREST",
     "params": {...}, "feature_keys": [...], "seed": 0,
     "metadata": {...}, "structure": {...}}
"""

__all__ = """
    BoostParams
    decision_function
    dumps_model
    EvalMetric
    fit
    fit_boost
    fit_forest
    fit_svm
    fit_tree
    FittedModel
    ForestParams
    Kernel
    kernel_eval
    load_model
    loads_model
    make_params
    model_document
    ModelKind
    predict
    save_model
    SvmParams
    TreeParams
""".split()

import enum
import logging
import math
import pathlib
from dataclasses import dataclass
from dataclasses import field
from typing import Any
from typing import Dict
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union
from typing import get_args
from typing import get_type_hints

import numpy as np
import orjson
import pandas as pd
from apischema import ValidationError
from apischema import deserialize
from apischema import serialize

from .exceptions import DimensionMismatch
from .exceptions import EmptyTrainingSet
from .exceptions import ModelError
from .exceptions import SingleClassTraining
from .svm import Kernel
from .svm import kernel_eval
from .svm import kernel_matrix
from .svm import smo
from .trees import TreeArrays
from .trees import grow_classifier
from .trees import grow_regressor
from .util import check_range
from .util import check_type
from .util import check_value
from .util import dump_json

logger = logging.getLogger(__name__)

AUTO = "auto"
DUMP_FORMAT = "depscreen-model"
DUMP_VERSION = 1
PROBABILITY_CLIP = 1e-15


class ModelKind(str, enum.Enum):
    TREE = "TREE"
    FOREST = "FOREST"
    BOOST = "BOOST"
    SVM = "SVM"


class EvalMetric(str, enum.Enum):
    AUC = "auc"
    LOGLOSS = "logloss"


def _check_seed(seed):
    check_type(seed, int, "seed")
    check_range(seed, 0, 2**63 - 1, "seed")


@dataclass(frozen=True)
class TreeParams:
    """Single Gini decision tree."""

    max_depth: int = 12
    min_samples_split: int = 2
    seed: int = 0

    def validate(self):
        check_range(self.max_depth, 1, 10_000, "max_depth")
        check_range(self.min_samples_split, 1, 10**9, "min_samples_split")
        _check_seed(self.seed)


@dataclass(frozen=True)
class ForestParams:
    """
    Random forest.

    ``features_per_split`` of None means ``ceil(sqrt(d))``.  ``bootstrap``
    off trains every tree on the full training set.
    """

    n_trees: int = 100
    max_depth: int = 12
    features_per_split: Optional[int] = None
    min_samples_split: int = 2
    seed: int = 0
    bootstrap: bool = True

    def validate(self):
        check_range(self.n_trees, 1, 10**6, "n_trees")
        check_range(self.max_depth, 1, 10_000, "max_depth")
        if self.features_per_split is not None:
            check_range(self.features_per_split, 1, 10**6, "features_per_split")
        check_range(self.min_samples_split, 1, 10**9, "min_samples_split")
        _check_seed(self.seed)


@dataclass(frozen=True)
class BoostParams:
    """Gradient-boosted trees on logistic loss, second-order leaf values."""

    n_estimators: int = 100
    learning_rate: float = 0.3
    max_depth: int = 6
    leaf_regularization: float = 1.0
    min_child_weight: float = 1.0
    eval_metric: EvalMetric = EvalMetric.LOGLOSS
    seed: int = 0

    def validate(self):
        check_range(self.n_estimators, 1, 10**6, "n_estimators")
        check_range(self.learning_rate, 0.0, 1.0, "learning_rate")
        check_range(self.max_depth, 1, 10_000, "max_depth")
        check_range(self.leaf_regularization, 0.0, math.inf, "leaf_regularization")
        check_range(self.min_child_weight, 0.0, math.inf, "min_child_weight")
        _check_seed(self.seed)


@dataclass(frozen=True)
class SvmParams:
    """
    Soft-margin kernel SVM.

    ``gamma`` is a positive number or ``"auto"`` (``1/d`` at fit time; RBF only).
    """

    kernel: Kernel = Kernel.RBF
    gamma: Union[float, str] = AUTO
    C: float = 1.0
    tolerance: float = 1e-3
    max_passes: int = 10
    max_sweeps: int = 1000
    seed: int = 0

    def validate(self):
        if isinstance(self.gamma, str):
            check_value(self.gamma, AUTO, "gamma")
        else:
            check_range(self.gamma, 1e-300, math.inf, "gamma")
        check_range(self.C, 1e-300, math.inf, "C")
        check_range(self.tolerance, 1e-300, math.inf, "tolerance")
        check_range(self.max_passes, 1, 10**6, "max_passes")
        check_range(self.max_sweeps, 1, 10**9, "max_sweeps")
        _check_seed(self.seed)

    def effective_gamma(self, n_features):
        return 1.0 / n_features if self.gamma == AUTO else float(self.gamma)


PARAMS_TYPES = {
    ModelKind.TREE: TreeParams,
    ModelKind.FOREST: ForestParams,
    ModelKind.BOOST: BoostParams,
    ModelKind.SVM: SvmParams,
}


def _promote_integers(cls, values: Dict[str, Any]) -> Dict[str, Any]:
    """Integers given for float-typed fields (YAML writes ``1`` for one) become floats."""
    hints = get_type_hints(cls)
    promoted = {}
    for name, value in values.items():
        wanted = hints.get(name)
        takes_float = wanted is float or float in get_args(wanted)
        if takes_float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        promoted[name] = value
    return promoted


def make_params(kind, values: Dict[str, Any] = None):
    """
    Params of model ``kind`` from a mapping such as one grid point.

    Unknown names raise ValueError, as do values outside their range.
    """
    kind = ModelKind(kind)
    cls = PARAMS_TYPES[kind]
    try:
        params = deserialize(cls, _promote_integers(cls, dict(values or {})), additional_properties=False)
    except ValidationError as exc:
        raise ValueError(f"{kind.value} parameters {values!r}: {exc}") from exc
    params.validate()
    return params


@dataclass(frozen=True)
class FittedModel:
    """
    A trained classifier.

    ``structure`` holds the learned state: ``trees`` (list of
    :class:`~depscreen.trees.TreeArrays`) for TREE and FOREST, plus
    ``base_score`` for BOOST; ``support``, ``coef``, ``intercept`` and
    ``gamma`` for SVM.
    """

    kind: ModelKind
    params: Any
    feature_keys: Tuple[str, ...]
    seed: int
    metadata: Dict[str, Any] = field(default_factory=dict)
    structure: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_features(self):
        return len(self.feature_keys)


def _check_training(X, y, feature_keys):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.size == 0 or len(X) == 0:
        raise EmptyTrainingSet("no training rows")
    if X.ndim != 2:
        raise DimensionMismatch(f"X must be 2-D, received shape {X.shape}")
    if y.ndim != 1 or len(y) != len(X):
        raise DimensionMismatch(f"y of shape {y.shape} does not match {len(X)} rows of X")
    if not np.isin(y, (0, 1)).all():
        raise ModelError(f"labels must be 0 or 1, received {sorted(set(y.tolist()))}")
    if not np.isfinite(X).all():
        raise ModelError("training matrix has non-finite values")
    if feature_keys is None:
        feature_keys = tuple(f"x{i}" for i in range(X.shape[1]))
    if len(feature_keys) != X.shape[1]:
        raise DimensionMismatch(f"{len(feature_keys)} feature keys for {X.shape[1]} columns")
    return X, y.astype(np.int64), tuple(feature_keys)


def _require_both_classes(y, kind):
    if y.min() == y.max():
        raise SingleClassTraining(f"{kind} training needs both classes, received only {int(y[0])}")


def fit_tree(X, y, p: TreeParams = TreeParams(), feature_keys: Optional[Sequence[str]] = None) -> FittedModel:
    """Fit one Gini tree."""
    p.validate()
    X, y, keys = _check_training(X, y, feature_keys)
    tree = grow_classifier(X, y, p.max_depth, p.min_samples_split)
    metadata = {"n_nodes": tree.n_nodes, "depth": tree.depth}
    return FittedModel(ModelKind.TREE, p, keys, p.seed, metadata, {"trees": [tree]})


def fit_forest(
    X,
    y,
    p: ForestParams = ForestParams(),
    feature_keys: Optional[Sequence[str]] = None,
) -> FittedModel:
    """
    Fit a random forest.

    Each tree gets a bootstrap sample (``n`` draws with replacement) and
    ``features_per_split`` candidate features per node, all drawn from one
    generator seeded with ``p.seed``.
    """
    p.validate()
    X, y, keys = _check_training(X, y, feature_keys)
    n, d = X.shape
    k = p.features_per_split or math.ceil(math.sqrt(d))
    if k > d:
        raise ModelError(f"features_per_split={k} exceeds the {d} available features")
    rng = np.random.default_rng(p.seed)
    trees = []
    for _ in range(p.n_trees):
        rows = rng.integers(0, n, size=n) if p.bootstrap else np.arange(n)
        trees.append(grow_classifier(X[rows], y[rows], p.max_depth, p.min_samples_split, k, rng))
    metadata = {"features_per_split": k, "n_nodes": sum(t.n_nodes for t in trees)}
    return FittedModel(ModelKind.FOREST, p, keys, p.seed, metadata, {"trees": trees})


def _sigmoid(f):
    return 1.0 / (1.0 + np.exp(-f))


def _logloss(y, f):
    p = np.clip(_sigmoid(f), PROBABILITY_CLIP, 1 - PROBABILITY_CLIP)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


def _auc(y, f):
    """Rank statistic; tied scores share their average rank."""
    ranks = pd.Series(f).rank(method="average").to_numpy()
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    return float((ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def fit_boost(X, y, p: BoostParams = BoostParams(), feature_keys: Optional[Sequence[str]] = None) -> FittedModel:
    """
    Fit gradient-boosted trees.

    Starts from ``log(pos/neg)``; each round fits a regression tree to the
    logistic-loss gradients ``p - y`` and hessians ``p(1 - p)``.  The
    training log records logloss and ``eval_metric`` after every round.
    """
    p.validate()
    X, y, keys = _check_training(X, y, feature_keys)
    _require_both_classes(y, "boost")
    n_pos = int(y.sum())
    base = math.log(n_pos / (len(y) - n_pos))
    scores = np.full(len(y), base)
    metric = _auc if p.eval_metric == EvalMetric.AUC else _logloss
    trees, logloss, history = [], [], []
    for _ in range(p.n_estimators):
        prob = _sigmoid(scores)
        grad, hess = prob - y, prob * (1.0 - prob)
        tree = grow_regressor(
            X, grad, hess, p.max_depth, p.leaf_regularization, p.min_child_weight, scale=p.learning_rate
        )
        scores = scores + tree.predict_value(X)
        trees.append(tree)
        logloss.append(_logloss(y, scores))
        history.append(metric(y, scores))
    metadata = {
        "eval_metric": EvalMetric(p.eval_metric).value,
        "training_log": history,
        "training_logloss": logloss,
    }
    structure = {"base_score": base, "trees": trees}
    return FittedModel(ModelKind.BOOST, p, keys, p.seed, metadata, structure)


def fit_svm(X, y, p: SvmParams = SvmParams(), feature_keys: Optional[Sequence[str]] = None) -> FittedModel:
    """
    Fit a kernel SVM with SMO.

    Labels are mapped to -1/+1 internally.  Only support vectors (positive
    multipliers) are kept.
    """
    p.validate()
    X, y, keys = _check_training(X, y, feature_keys)
    _require_both_classes(y, "svm")
    gamma = p.effective_gamma(X.shape[1])
    signs = np.where(y == 1, 1.0, -1.0)
    K = kernel_matrix(p.kernel, gamma, X, X)
    result = smo(K, signs, p.C, p.tolerance, p.max_passes, p.max_sweeps, np.random.default_rng(p.seed))
    support = result.alpha > 0
    metadata = {
        "effective_gamma": gamma,
        "n_support": int(support.sum()),
        "sweeps": result.sweeps,
        "passes": result.passes,
        "converged": result.converged,
        "dual_sum": float(np.dot(result.alpha, signs)),
    }
    structure = {
        "kernel": Kernel(p.kernel).value,
        "gamma": gamma,
        "support": X[support],
        "coef": (result.alpha * signs)[support],
        "alpha": result.alpha,
        "intercept": result.intercept,
    }
    return FittedModel(ModelKind.SVM, p, keys, p.seed, metadata, structure)


FITTERS = {
    ModelKind.TREE: fit_tree,
    ModelKind.FOREST: fit_forest,
    ModelKind.BOOST: fit_boost,
    ModelKind.SVM: fit_svm,
}


def fit(kind, X, y, params=None, feature_keys: Optional[Sequence[str]] = None) -> FittedModel:
    """Fit a model of ``kind``; ``params`` may be a params object or a mapping."""
    kind = ModelKind(kind)
    if params is None or isinstance(params, dict):
        params = make_params(kind, params)
    return FITTERS[kind](X, y, params, feature_keys)


def _check_query(m, X):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != m.n_features:
        raise DimensionMismatch(
            f"model expects {m.n_features} columns {list(m.feature_keys)}, received shape {X.shape}"
        )
    return X


def decision_function(m: FittedModel, X) -> np.ndarray:
    """
    Real-valued score per row; class 1 iff the score is positive.

    Trees give the class itself, forests the vote margin, boosting the
    log-odds and the SVM its decision value.
    """
    X = _check_query(m, X)
    trees = m.structure.get("trees", [])
    if m.kind == ModelKind.TREE:
        return trees[0].predict_value(X)
    if m.kind == ModelKind.FOREST:
        votes = np.zeros(len(X))
        for tree in trees:
            votes += tree.predict_value(X)
        return 2.0 * votes - len(trees)
    if m.kind == ModelKind.BOOST:
        scores = np.full(len(X), float(m.structure["base_score"]))
        for tree in trees:
            scores = scores + tree.predict_value(X)
        return scores
    s = m.structure
    K = kernel_matrix(s["kernel"], s["gamma"], X, s["support"]) if len(s["support"]) else np.zeros((len(X), 0))
    return K @ np.asarray(s["coef"], dtype=float) + float(s["intercept"])


def predict(m: FittedModel, X) -> np.ndarray:
    """0/1 class per row of ``X``; a zero score gives class 0."""
    return (decision_function(m, X) > 0).astype(np.int64)


def _structure_document(m):
    document = {}
    for key, value in m.structure.items():
        if key == "trees":
            document[key] = [tree.to_dict() for tree in value]
        elif isinstance(value, np.ndarray):
            document[key] = value.tolist()
        else:
            document[key] = value
    return document


def _structure_from_document(kind, document):
    structure = dict(document)
    if "trees" in structure:
        structure["trees"] = [TreeArrays.from_dict(t) for t in structure["trees"]]
    if kind == ModelKind.SVM:
        for key in ("support", "coef", "alpha"):
            structure[key] = np.asarray(structure[key], dtype=float)
    return structure


def model_document(m: FittedModel) -> Dict[str, Any]:
    """The JSON-ready dump of ``m``."""
    return {
        "format": DUMP_FORMAT,
        "version": DUMP_VERSION,
        "kind": m.kind.value,
        "params": serialize(type(m.params), m.params),
        "feature_keys": list(m.feature_keys),
        "seed": m.seed,
        "metadata": m.metadata,
        "structure": _structure_document(m),
    }


def dumps_model(m: FittedModel) -> bytes:
    return dump_json(model_document(m))


def loads_model(data: bytes) -> FittedModel:
    """Rebuild a model from :func:`dumps_model` output."""
    document = orjson.loads(data)
    check_value(document.get("format"), DUMP_FORMAT, "model dump format")
    check_value(document.get("version"), DUMP_VERSION, "model dump version")
    kind = ModelKind(document["kind"])
    params = make_params(kind, document["params"])
    keys = tuple(document["feature_keys"])
    structure = _structure_from_document(kind, document["structure"])
    if kind == ModelKind.SVM:
        # an empty support list loses its column count
        structure["support"] = structure["support"].reshape(-1, len(keys))
    return FittedModel(kind, params, keys, int(document["seed"]), dict(document["metadata"]), structure)


def save_model(m: FittedModel, path) -> pathlib.Path:
    path = pathlib.Path(path)
    path.write_bytes(dumps_model(m))
    return path


def load_model(path) -> FittedModel:
    return loads_model(pathlib.Path(path).read_bytes())
