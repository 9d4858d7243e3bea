import itertools
from contextlib import nullcontext as does_not_raise

import numpy as np
import pytest

from ..exceptions import BadArgs
from ..exceptions import BadSpec
from ..exceptions import EmptyTestSet
from ..exceptions import UnknownFeatureKey
from ..features import FeatureMatrix
from ..models import ModelKind
from ..search import LEADERBOARD_COLUMNS
from ..search import PRESET_EXPERIMENTS
from ..search import Config
from ..search import EvalResult
from ..search import Leaderboard
from ..search import SearchSpec
from ..search import baseline_accuracy
from ..search import baseline_table
from ..search import config_at
from ..search import count_subsets
from ..search import enumerate_configs
from ..search import evaluate_config
from ..search import experiment_spec
from ..search import experiment_totals
from ..search import format_top_table
from ..search import grid_points
from ..search import read_leaderboard_csv
from ..search import run_search
from ..search import sampled_ordinals
from ..search import unrank_combination
from ..search import write_leaderboard_csv
from .tools import blobs
from .tools import brute_force_subsets

POOL17 = [f"f{i:02d}" for i in range(17)]


def matrix(X, y, keys=None, prefix="s"):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    keys = keys or [f"f{i:02d}" for i in range(X.shape[1])]
    ids = [f"{prefix}{i:03d}" for i in range(len(X))]
    return FeatureMatrix(tuple(ids), tuple(keys), X, np.asarray(y))


def blob_split(n_per_class=20, d=4, separation=3.0, seed=0):
    """Train on one draw, test on another, columns f00.."""
    X, y = blobs(n_per_class, d, separation, seed)
    Xt, yt = blobs(n_per_class // 2, d, separation, seed + 100)
    return matrix(X, y), matrix(Xt, yt, prefix="t")


def result(ordinal, accuracy, features=("f00",), params=None):
    return EvalResult(ordinal, tuple(features), params or {}, accuracy, 1, 0, 1, 0)


@pytest.mark.parametrize(
    "n, k, total, context",
    [
        [17, 4, 2380, does_not_raise()],
        [19, 5, 11628, does_not_raise()],
        [20, 10, 184756, does_not_raise()],
        [5, 0, 1, does_not_raise()],
        [0, 0, 1, does_not_raise()],
        [np.int64(6), 3, 20, does_not_raise()],
        [4.0, 2, None, pytest.raises(BadArgs)],
        [True, 1, None, pytest.raises(BadArgs)],
        [3, 4, None, pytest.raises(BadArgs)],
        [3, -1, None, pytest.raises(BadArgs)],
        [-2, 0, None, pytest.raises(BadArgs)],
    ],
)
def test_count_subsets(n, k, total, context):
    with context:
        assert count_subsets(n, k) == total


@pytest.mark.parametrize("n, k", [[5, 2], [6, 3], [7, 0], [4, 4], [9, 5]])
def test_unrank_combination(n, k):
    expected = brute_force_subsets(n, k)
    assert [unrank_combination(n, k, r) for r in range(len(expected))] == expected
    with pytest.raises(BadArgs):
        unrank_combination(n, k, len(expected))


def test_grid_points():
    spec = SearchSpec(ModelKind.TREE, ("a",), 1, {"max_depth": [1, 2], "min_samples_split": [2, 4, 6]})
    points = grid_points(spec)
    assert len(points) == spec.grid_size == 6
    # last declared parameter varies fastest
    assert points[0] == {"max_depth": 1, "min_samples_split": 2}
    assert points[1] == {"max_depth": 1, "min_samples_split": 4}
    assert points[3] == {"max_depth": 2, "min_samples_split": 2}
    assert grid_points(SearchSpec(ModelKind.TREE, ("a",), 1)) == [{}]


def test_spec_defaults():
    spec = SearchSpec(ModelKind.TREE, ["a", "b", "c"], 2)
    assert spec.name == "tree"
    assert spec.feature_pool == ("a", "b", "c")
    assert spec.grid_size == 1
    assert spec.total == spec.n_configs == 3
    assert SearchSpec(ModelKind.TREE, ["a", "b", "c"], 2, sample_limit=2).n_configs == 2
    assert SearchSpec(ModelKind.TREE, ["a", "b", "c"], 2, sample_limit=10).n_configs == 3


@pytest.mark.parametrize(
    "kwargs, exception",
    [
        [dict(estimator="GLM"), BadSpec],
        [dict(feature_pool=()), BadSpec],
        [dict(feature_pool=("a", "a", "b")), BadSpec],
        [dict(subset_size=0), BadSpec],
        [dict(subset_size=4), BadSpec],
        [dict(param_grid={"max_depth": []}), BadSpec],
        [dict(param_grid={"max_depth": [0]}), BadSpec],
        [dict(param_grid={"n_trees": [5]}), BadSpec],
        [dict(sample_limit=0), BadSpec],
        [dict(seed=-1), BadSpec],
        [dict(feature_pool=("a", "b", "zz")), UnknownFeatureKey],
    ],
)
def test_spec_validate(kwargs, exception):
    fields = dict(estimator=ModelKind.TREE, feature_pool=("a", "b", "c"), subset_size=2)
    fields.update(kwargs)
    spec = SearchSpec(**fields)
    with pytest.raises(exception):
        spec.validate(known_keys=["a", "b", "c"])


def test_enumerate_order():
    spec = SearchSpec(ModelKind.TREE, ("a", "b", "c"), 2, {"max_depth": [1, 2]})
    configs = list(enumerate_configs(spec))
    assert len(configs) == spec.total == 6
    assert [c.ordinal for c in configs] == list(range(6))
    assert configs[3] == Config(3, ModelKind.TREE, ("a", "c"), {"max_depth": 2}, 0)
    subsets = [c.feature_subset for c in configs[::2]]
    assert subsets == list(itertools.combinations("abc", 2))
    for cfg in configs:
        assert config_at(spec, cfg.ordinal) == cfg


def test_enumerate_length():
    grid = {"max_depth": [2, 4, 8], "min_samples_split": [2, 5]}
    spec = SearchSpec(ModelKind.TREE, tuple(POOL17[:7]), 3, grid)
    assert sum(1 for _ in enumerate_configs(spec)) == count_subsets(7, 3) * 6


def test_sampling():
    spec = experiment_spec("svm_20x10", [f"f{i:02d}" for i in range(20)], seed=4)
    assert spec.total == 1_108_536
    assert spec.n_configs == 30_000
    ordinals = sampled_ordinals(spec)
    assert len(ordinals) == 30_000
    assert len(np.unique(ordinals)) == 30_000
    assert np.all(np.diff(ordinals) > 0)
    assert ordinals.max() < spec.total
    np.testing.assert_array_equal(ordinals, sampled_ordinals(spec))

    small = SearchSpec(ModelKind.TREE, tuple(POOL17[:8]), 3, {"max_depth": [1, 2]}, sample_limit=20, seed=4)
    configs = list(enumerate_configs(small))
    assert [c.ordinal for c in configs] == sampled_ordinals(small).tolist()
    assert all(config_at(small, c.ordinal) == c for c in configs)
    assert configs == list(enumerate_configs(small))


def test_sample_limit_covers_stream():
    spec = SearchSpec(ModelKind.TREE, ("a", "b", "c", "d"), 2, sample_limit=6)
    assert [c.ordinal for c in enumerate_configs(spec)] == list(range(6))


def test_experiment_totals():
    assert experiment_totals() == {
        "rf_17x4": 2380,
        "xgb_17x4": 7140,
        "svm_17x4": 23800,
        "svm_19x5": 116280,
        "svm_20x10": 1108536,
    }
    for name, shape in PRESET_EXPERIMENTS.items():
        spec = experiment_spec(name, [f"k{i}" for i in range(shape.pool_size)])
        assert spec.total == shape.total
        assert spec.name == name
        spec.validate()


def test_experiment_spec_errors():
    with pytest.raises(BadSpec):
        experiment_spec("lasso", POOL17)
    with pytest.raises(BadSpec):
        experiment_spec("rf_17x4", POOL17[:16])
    spec = experiment_spec("rf_17x4", POOL17, param_grid={"n_trees": [3]}, sample_limit=5)
    assert spec.grid_size == 1
    assert spec.n_configs == 5


@pytest.mark.parametrize(
    "labels, constant, expected, context",
    [
        [[0] * 24 + [1] * 13, 0, 24 / 37, does_not_raise()],
        [[0] * 24 + [1] * 13, 1, 13 / 37, does_not_raise()],
        [[1, 1, 1], 1, 1.0, does_not_raise()],
        [[1, 1, 1], 0, 0.0, does_not_raise()],
        [[], 0, None, pytest.raises(EmptyTestSet)],
        [[0, 1], 2, None, pytest.raises(ValueError)],
    ],
)
def test_baseline_accuracy(labels, constant, expected, context):
    with context:
        assert baseline_accuracy(labels, constant) == pytest.approx(expected)


def test_baseline_table():
    text = str(baseline_table([0] * 24 + [1] * 13))
    assert "0.6486" in text
    assert "0.3514" in text


def test_evaluate_config():
    train = matrix([-2.0, -1.0, 1.0, 2.0], [0, 0, 1, 1])
    test = matrix([-1.5, -0.5, 0.5, 1.5, 0.7], [0, 1, 1, 1, 0], prefix="t")
    cfg = Config(0, ModelKind.TREE, ("f00",), {"max_depth": 1})
    outcome = evaluate_config(cfg, train, test)
    assert (outcome.tp, outcome.fp, outcome.tn, outcome.fn) == (2, 1, 1, 1)
    assert outcome.accuracy == pytest.approx(3 / 5)
    assert outcome.correct == 3
    assert outcome.n_test == 5

    empty = FeatureMatrix((), ("f00",), np.zeros((0, 1)), np.zeros(0))
    with pytest.raises(EmptyTestSet):
        evaluate_config(cfg, train, empty)
    with pytest.raises(UnknownFeatureKey):
        evaluate_config(Config(0, ModelKind.TREE, ("f09",), {}), train, test)


def test_accuracy_quantized():
    X, y = blobs(20, d=2, separation=1.0, seed=5)
    rng = np.random.default_rng(5)
    Xt = rng.normal(0.5, 1.2, size=(37, 2))
    yt = np.array([0] * 24 + [1] * 13)
    board = run_search(
        SearchSpec(ModelKind.TREE, ("f00", "f01"), 1, {"max_depth": [1, 3]}),
        matrix(X, y),
        matrix(Xt, yt, prefix="t"),
        show_progress=False,
    )
    for r in board.results:
        assert r.n_test == 37
        assert r.accuracy * 37 == pytest.approx(round(r.accuracy * 37))


def test_leaderboard_ranking():
    board = Leaderboard((result(3, 0.5), result(5, 0.7), result(2, 0.7), result(0, 0.1)))
    assert [r.ordinal for r in board.results] == [2, 5, 3, 0]
    assert board.best.ordinal == 2
    assert len(board) == 4
    assert [r.ordinal for r in board.top(2)] == [2, 5]
    assert len(board.top(99)) == 4
    assert Leaderboard(()).best is None
    with pytest.raises(ValueError):
        Leaderboard((result(1, 0.5), result(1, 0.6)))


def test_leaderboard_csv(tmp_path):
    board = Leaderboard(
        (
            result(4, 31 / 37, ("f00", "f02"), {"max_depth": 3, "gamma": "auto"}),
            result(1, 26 / 37, ("f01",), {"C": 0.1}),
            result(7, 24 / 37, ("f00", "f01"), {}),
        ),
        name="demo",
    )
    path = write_leaderboard_csv(board, tmp_path / "leaderboard_demo.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(LEADERBOARD_COLUMNS)
    assert len(lines) == 4
    assert lines[1].startswith("1,4,")

    again = read_leaderboard_csv(path, name="demo")
    assert again.results == board.results
    write_leaderboard_csv(again, tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_bytes() == path.read_bytes()


def test_format_top_table():
    board = Leaderboard((result(0, 0.5, ("f00", "f01"), {"max_depth": 2}), result(1, 1.0)))
    text = str(format_top_table(board, k=1))
    for label in "Rank Features Parameters Accuracy".split():
        assert label in text
    assert "100.0% (2/2)" in text
    assert "max_depth" not in text
    everything = str(format_top_table(board, k=50))
    assert "f00, f01" in everything
    assert "max_depth: 2" in everything


@pytest.mark.parametrize(
    "tp, tn, cell",
    [
        [10, 21, "83.8% (31/37)"],
        [5, 21, "70.3% (26/37)"],
        [0, 24, "64.9% (24/37)"],
    ],
)
def test_format_top_table_accuracy_cell(tp, tn, cell):
    # 13 positives and 24 negatives in the test set
    r = EvalResult(0, ("f00",), {}, (tp + tn) / 37, tp, 24 - tn, tn, 13 - tp)
    assert r.n_test == 37
    assert cell in str(format_top_table(Leaderboard((r,)), k=1))


def test_run_search_beats_baselines():
    train, test = blob_split(separation=4.0, seed=1)
    spec = SearchSpec(ModelKind.TREE, ("f00", "f01", "f02", "f03"), 2, {"max_depth": [1, 2]})
    board = run_search(spec, train, test, show_progress=False)
    assert len(board) == spec.total == 12
    assert board.failures == ()
    assert board.spec_digest
    best = board.best.accuracy
    assert best > baseline_accuracy(test.labels, 0)
    assert best > baseline_accuracy(test.labels, 1)



def test_degenerate_configs_keep_top_entry():
    train, test = blob_split(separation=3.0, seed=3)
    keys = ("f00", "f01", "f02", "f03")
    grid = {"n_estimators": [5], "max_depth": [2]}
    tuned_spec = SearchSpec(ModelKind.BOOST, keys, 2, {**grid, "learning_rate": [0.3]})
    tuned = run_search(tuned_spec, train, test, show_progress=False)
    spec = SearchSpec(ModelKind.BOOST, keys, 2, {**grid, "learning_rate": [0.3, 0.0]})
    extended = run_search(spec, train, test, show_progress=False)
    assert len(extended) == 2 * len(tuned) == 12
    assert extended.best.feature_subset == tuned.best.feature_subset
    assert extended.best.params == tuned.best.params

    # a boost that learns nothing predicts one class for every session
    constants = [baseline_accuracy(test.labels, 0), baseline_accuracy(test.labels, 1)]
    for r in extended.results:
        if r.params["learning_rate"] == 0.0:
            assert min(abs(r.accuracy - c) for c in constants) < 1e-12
            assert r.accuracy < extended.best.accuracy


@pytest.mark.parametrize(
    "estimator, grid",
    [
        [ModelKind.FOREST, {"n_trees": [5], "max_depth": [2, 4]}],
        [ModelKind.SVM, {"kernel": ["rbf", "linear"], "gamma": [0.1]}],
    ],
)
def test_parallelism_independent(estimator, grid):
    train, test = blob_split(separation=1.5, seed=2)
    spec = SearchSpec(estimator, ("f00", "f01", "f02", "f03"), 2, grid, seed=5)
    serial = run_search(spec, train, test, parallelism=1, show_progress=False)
    parallel = run_search(spec, train, test, parallelism=2, chunk_size=3, show_progress=False)
    assert serial.results == parallel.results
    assert serial.spec_digest == parallel.spec_digest


def test_failures_recorded():
    train = matrix([[0.0], [1.0], [2.0]], [0, 0, 0])
    test = matrix([[0.5], [1.5]], [0, 1], prefix="t")
    board = run_search(SearchSpec(ModelKind.SVM, ("f00",), 1), train, test, show_progress=False)
    assert len(board) == 0
    assert board.best is None
    assert len(board.failures) == 1
    assert board.failures[0].ordinal == 0
    assert "SingleClassTraining" in board.failures[0].error


def test_run_search_arguments():
    train, test = blob_split()
    spec = SearchSpec(ModelKind.TREE, ("f00", "f01"), 1)
    with pytest.raises(ValueError):
        run_search(spec, train, test, parallelism=0, show_progress=False)
    with pytest.raises(UnknownFeatureKey):
        run_search(spec, train, test.select(["f00"]), show_progress=False)
    with pytest.raises(UnknownFeatureKey):
        run_search(SearchSpec(ModelKind.TREE, ("f00", "f99"), 1), train, test, show_progress=False)


def test_forest_preset_sampled():
    train, test = blob_split(n_per_class=15, d=17, separation=1.0, seed=3)
    grid = {"n_trees": [3], "max_depth": [3]}
    spec = experiment_spec("rf_17x4", POOL17, seed=2, param_grid=grid, sample_limit=25)
    board = run_search(spec, train, test, parallelism=2, show_progress=False)
    assert len(board) == 25
    assert {r.ordinal for r in board.results} == set(sampled_ordinals(spec).tolist())
    assert all(len(r.feature_subset) == 4 for r in board.results)


@pytest.mark.slow
def test_forest_preset_full():
    train, test = blob_split(n_per_class=74, d=17, separation=0.8, seed=6)
    spec = experiment_spec("rf_17x4", POOL17, seed=1)
    board = run_search(spec, train, test, parallelism=4, show_progress=False)
    assert len(board) == 2380
    assert sorted(r.ordinal for r in board.results) == list(range(2380))
    assert board.best.accuracy >= max(baseline_accuracy(test.labels, c) for c in (0, 1))
