from contextlib import nullcontext as does_not_raise

import numpy as np
import pytest
import yaml

from ..exceptions import DimensionMismatch
from ..exceptions import EmptyTrainingSet
from ..exceptions import ModelError
from ..exceptions import SingleClassTraining
from ..models import BoostParams
from ..models import EvalMetric
from ..models import FittedModel
from ..models import ForestParams
from ..models import ModelKind
from ..models import SvmParams
from ..models import TreeParams
from ..models import decision_function
from ..models import dumps_model
from ..models import fit
from ..models import fit_boost
from ..models import fit_forest
from ..models import fit_svm
from ..models import fit_tree
from ..models import load_model
from ..models import loads_model
from ..models import make_params
from ..models import predict
from ..models import save_model
from ..search import baseline_accuracy
from ..svm import Kernel
from ..trees import TreeArrays
from .tools import blobs
from .tools import xor_data

KIND_PARAMS = [
    [ModelKind.TREE, {"max_depth": 3}],
    [ModelKind.FOREST, {"n_trees": 7, "max_depth": 4, "seed": 11}],
    [ModelKind.BOOST, {"n_estimators": 5, "max_depth": 2}],
    [ModelKind.SVM, {"kernel": "rbf", "gamma": 0.5, "seed": 2}],
]


def accuracy(m, X, y):
    return float(np.mean(predict(m, X) == y))


@pytest.mark.parametrize(
    "kind, values, context",
    [
        [ModelKind.TREE, {}, does_not_raise()],
        [ModelKind.FOREST, {"n_trees": 100, "max_depth": 12}, does_not_raise()],
        [ModelKind.BOOST, {"n_estimators": 300, "learning_rate": 0.05, "eval_metric": "auc"}, does_not_raise()],
        [ModelKind.SVM, {"gamma": 1, "kernel": "linear"}, does_not_raise()],
        [ModelKind.SVM, {"gamma": "auto", "C": 5}, does_not_raise()],
        ["SVM", {}, does_not_raise()],
        [ModelKind.FOREST, {"n_tree": 100}, pytest.raises(ValueError)],
        [ModelKind.FOREST, {"n_trees": 0}, pytest.raises(ValueError)],
        [ModelKind.BOOST, {"learning_rate": 1.5}, pytest.raises(ValueError)],
        [ModelKind.BOOST, {"eval_metric": "error"}, pytest.raises(ValueError)],
        [ModelKind.SVM, {"gamma": "scale"}, pytest.raises(ValueError)],
        [ModelKind.SVM, {"gamma": -1.0}, pytest.raises(ValueError)],
        [ModelKind.SVM, {"kernel": "poly"}, pytest.raises(ValueError)],
        [ModelKind.SVM, {"C": 0}, pytest.raises(ValueError)],
        [ModelKind.TREE, {"seed": -1}, pytest.raises(ValueError)],
        ["GLM", {}, pytest.raises(ValueError)],
    ],
)
def test_make_params(kind, values, context):
    with context:
        make_params(kind, values)


def test_make_params_integers_for_floats():
    grid = yaml.safe_load("gamma: [1, auto]\nC: [1, 5, 10]\nkernel: [rbf]\n")
    params = make_params(ModelKind.SVM, {"gamma": grid["gamma"][0], "C": grid["C"][1], "tolerance": 1})
    assert params.gamma == 1.0
    assert isinstance(params.gamma, float)
    assert isinstance(params.C, float)
    assert params.effective_gamma(4) == 1.0
    assert make_params(ModelKind.BOOST, {"learning_rate": 1, "leaf_regularization": 0}).learning_rate == 1.0
    # integer-typed fields stay integers
    assert isinstance(make_params(ModelKind.FOREST, {"n_trees": 3}).n_trees, int)


def test_params_defaults():
    assert ForestParams().n_trees == 100
    assert ForestParams().max_depth == 12
    assert BoostParams().leaf_regularization == 1.0
    assert SvmParams().tolerance == 1e-3
    assert SvmParams().max_passes == 10
    assert make_params(ModelKind.BOOST, {"eval_metric": "auc"}).eval_metric == EvalMetric.AUC


@pytest.mark.parametrize(
    "X, y, exception",
    [
        [np.zeros((0, 2)), np.zeros(0), EmptyTrainingSet],
        [np.zeros((3, 2)), np.array([0, 1]), DimensionMismatch],
        [np.zeros(3), np.array([0, 1, 0]), DimensionMismatch],
        [np.zeros((3, 2)), np.array([0, 1, 2]), ModelError],
        [np.array([[0.0], [np.nan], [1.0]]), np.array([0, 1, 0]), ModelError],
    ],
)
def test_bad_training_data(X, y, exception):
    with pytest.raises(exception):
        fit_tree(X, y)


def test_feature_keys():
    X, y = xor_data()
    m = fit_tree(X, y, feature_keys=["a", "b"])
    assert m.feature_keys == ("a", "b")
    assert m.n_features == 2
    assert fit_tree(X, y).feature_keys == ("x0", "x1")
    with pytest.raises(DimensionMismatch):
        fit_tree(X, y, feature_keys=["a"])
    with pytest.raises(DimensionMismatch):
        predict(m, np.zeros((2, 3)))


def test_tree_training_labels():
    X, y = blobs(10, seed=4)
    m = fit_tree(X, y, TreeParams(max_depth=12))
    np.testing.assert_array_equal(predict(m, X), y)
    assert m.metadata["depth"] <= 12


def test_forest_separable():
    X, y = blobs(20, seed=0)
    m = fit_forest(X, y, ForestParams(n_trees=100, seed=3))
    assert accuracy(m, X, y) == 1.0
    assert len(m.structure["trees"]) == 100
    assert m.metadata["features_per_split"] == 2


def test_forest_of_one_is_a_tree():
    X, y = blobs(15, d=3, separation=1.5, seed=6)
    tree = fit_tree(X, y, TreeParams(max_depth=5))
    forest = fit_forest(X, y, ForestParams(n_trees=1, max_depth=5, features_per_split=3, bootstrap=False))
    assert forest.structure["trees"][0].to_dict() == tree.structure["trees"][0].to_dict()
    query = np.random.default_rng(0).normal(size=(25, 3))
    np.testing.assert_array_equal(predict(forest, query), predict(tree, query))


def test_forest_too_many_features():
    X, y = xor_data()
    with pytest.raises(ModelError):
        fit_forest(X, y, ForestParams(n_trees=2, features_per_split=3))


def test_forest_vote_tie():
    one = TreeArrays([-1], [0.0], [-1], [-1], [1.0])
    zero = TreeArrays([-1], [0.0], [-1], [-1], [0.0])
    m = FittedModel(ModelKind.FOREST, ForestParams(n_trees=2), ("x0",), 0, {}, {"trees": [one, zero]})
    assert decision_function(m, [[0.0]])[0] == 0.0
    assert predict(m, [[0.0]])[0] == 0


def test_boost_separable():
    x = np.linspace(-3.0, 3.0, 30)
    X = x.reshape(-1, 1)
    y = (x > 0.1).astype(int)
    m = fit_boost(X, y, BoostParams(n_estimators=50, learning_rate=0.3))
    assert accuracy(m, X, y) == 1.0
    losses = m.metadata["training_logloss"]
    assert len(losses) == 50
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))
    assert m.metadata["training_log"] == losses


def test_boost_zero_learning_rate():
    X, y = blobs(10, seed=2)
    y = np.array([1] * 3 + [0] * 17)
    m = fit_boost(X, y, BoostParams(n_estimators=10, learning_rate=0.0))
    np.testing.assert_array_equal(predict(m, X), np.zeros(20, dtype=int))
    assert accuracy(m, X, y) == baseline_accuracy(y, 0)
    assert m.structure["base_score"] == pytest.approx(np.log(3 / 17))


def test_boost_preset_grid_point():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(148, 4))
    y = (X[:, 0] + 0.5 * rng.normal(size=148) > 0).astype(int)
    values = {"n_estimators": 300, "learning_rate": 0.05, "max_depth": 12, "eval_metric": "auc"}
    params = make_params(ModelKind.BOOST, values)
    m = fit_boost(X, y, params)
    assert len(m.structure["trees"]) == 300
    assert m.metadata["eval_metric"] == "auc"
    assert all(0.0 <= v <= 1.0 for v in m.metadata["training_log"])


@pytest.mark.parametrize("kind", [ModelKind.BOOST, ModelKind.SVM])
def test_single_class(kind):
    X = np.zeros((4, 2))
    with pytest.raises(SingleClassTraining):
        fit(kind, X, np.ones(4, dtype=int))


def test_svm_linear_separable():
    rng = np.random.default_rng(7)
    X = np.vstack([rng.normal(-2.0, 0.5, size=(15, 2)), rng.normal(2.0, 0.5, size=(15, 2))])
    y = np.array([0] * 15 + [1] * 15)
    m = fit_svm(X, y, SvmParams(kernel=Kernel.LINEAR, C=1.0))
    assert accuracy(m, X, y) == 1.0
    alpha = m.structure["alpha"]
    assert np.all((alpha >= 0) & (alpha <= 1.0))
    assert abs(m.metadata["dual_sum"]) <= 1e-6
    assert m.metadata["n_support"] == len(m.structure["support"])


def test_svm_xor():
    X, y = xor_data()
    linear = fit_svm(X, y, SvmParams(kernel=Kernel.LINEAR))
    assert accuracy(linear, X, y) <= 0.75
    rbf = fit_svm(X, y, SvmParams(kernel=Kernel.RBF, gamma=1.0))
    assert accuracy(rbf, X, y) == 1.0


def test_svm_auto_gamma():
    X, y = blobs(8, d=4, seed=1)
    m = fit(ModelKind.SVM, X, y, {"gamma": "auto"})
    assert m.metadata["effective_gamma"] == 0.25
    assert m.structure["gamma"] == 0.25


@pytest.mark.parametrize("kind, values", KIND_PARAMS)
def test_deterministic(kind, values):
    X, y = blobs(12, d=3, separation=1.0, seed=8)
    query = np.random.default_rng(1).normal(0.5, 1.5, size=(40, 3))
    first = fit(kind, X, y, values)
    second = fit(kind, X, y, values)
    np.testing.assert_array_equal(decision_function(first, query), decision_function(second, query))
    assert dumps_model(first) == dumps_model(second)


@pytest.mark.parametrize("kind, values", KIND_PARAMS)
def test_row_independence(kind, values):
    X, y = blobs(12, d=3, separation=1.0, seed=8)
    query = np.random.default_rng(1).normal(0.5, 1.5, size=(40, 3))
    m = fit(kind, X, y, values)
    order = np.random.default_rng(2).permutation(40)
    np.testing.assert_array_equal(predict(m, query[order]), predict(m, query)[order])


@pytest.mark.parametrize("kind, values", KIND_PARAMS)
def test_save_load(kind, values, tmp_path):
    X, y = blobs(12, d=3, separation=1.0, seed=8)
    query = np.random.default_rng(1).normal(0.5, 1.5, size=(40, 3))
    m = fit(kind, X, y, values, feature_keys=["a", "b", "c"])
    path = save_model(m, tmp_path / "model.json")
    again = load_model(path)
    assert again.kind == m.kind
    assert again.params == m.params
    assert again.feature_keys == ("a", "b", "c")
    np.testing.assert_array_equal(decision_function(again, query), decision_function(m, query))
    assert dumps_model(again) == path.read_bytes()


def test_load_wrong_format():
    with pytest.raises(ValueError):
        loads_model(b'{"format": "something-else", "version": 1}')
