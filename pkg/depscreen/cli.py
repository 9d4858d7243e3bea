"""
Command-line interface.

::

    depscreen --config run.yaml ingest
    depscreen --config run.yaml --parallelism 8 search
    depscreen --out run report --top-k 5
    depscreen --out synthetic synth --n-sessions 189

Each subcommand has a library counterpart (``cmd_*``) that does the work and
returns its result; the click commands only load the configuration, print and
map failures to exit codes: 0 success, 1 invalid configuration or missing
input, 2 any other failure.

.. autosummary::

    ~cli
    ~main
    ~cmd_ingest
    ~cmd_extract
    ~cmd_search
    ~cmd_report
    ~cmd_synth
    ~run_manifest
    ~SearchOutcome
"""

__all__ = """
    cli
    cmd_extract
    cmd_ingest
    cmd_report
    cmd_search
    cmd_synth
    main
    run_manifest
    SearchOutcome
""".split()

import functools
import logging
import pathlib
import sys
from dataclasses import dataclass
from typing import Dict
from typing import Optional

import click
import numpy as np
import orjson
import pandas as pd
import pyRestTable

from .configuration import RunConfig
from .configuration import starter_config
from .corpus import IngestResult
from .corpus import SplitPlan
from .corpus import ingest_directory
from .corpus import load_labels
from .corpus import load_split_plan
from .corpus import split_ids
from .corpus import write_split_plan
from .exceptions import ConfigurationError
from .exceptions import MissingManifest
from .exceptions import NoAcceptedSessions
from .features import FeatureMatrix
from .features import build_matrix
from .features import default_registry
from .features import load_registry
from .features import read_feature_csv
from .features import write_feature_csv
from .search import Leaderboard
from .search import baseline_accuracy
from .search import baseline_table
from .search import format_top_table
from .search import params_text
from .search import read_leaderboard_csv
from .search import run_search
from .search import write_leaderboard_csv
from .synthetic import generate_synthetic_corpus
from .synthetic import write_synthetic_corpus
from .util import dump_json
from .util import software_versions

logger = logging.getLogger(__name__)

EXIT_INVALID = 1
EXIT_FAILURE = 2

SESSIONS_FILE = "sessions.csv"
FEATURES_FILE = "features.csv"
SPLIT_FILE = "split_plan.tsv"
MANIFEST_FILE = "run_manifest.json"
CONFIG_FILE = "config.yaml"
LEADERBOARD_FILE = "leaderboard_{}.csv"
FAILURES_FILE = "failures_{}.csv"
MANIFEST_FORMAT = "depscreen-run"
MANIFEST_VERSION = 1

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"
LOG_LEVELS = "DEBUG INFO WARNING ERROR".split()


def _output_dir(config: RunConfig) -> pathlib.Path:
    out = pathlib.Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_ingest(config: RunConfig) -> IngestResult:
    """
    Parse, clean and validate the corpus; write ``sessions.csv``.

    Raises :class:`~depscreen.exceptions.NoAcceptedSessions` (after writing
    the inventory) when nothing survives.
    """
    config.validate()
    out = _output_dir(config)
    labels = load_labels(pathlib.Path(config.labels_path).read_bytes())
    lexica = config.lexicon.load_lexica()
    result = ingest_directory(
        config.corpus_dir,
        labels,
        config.cleaning.to_policy(),
        stopwords=lexica.stopwords,
        strict=False,
    )
    result.to_frame().to_csv(out / SESSIONS_FILE, index=False, lineterminator="\n")
    if not result.accepted:
        raise NoAcceptedSessions(f"{config.corpus_dir}: {result.summary()}")
    return result


def cmd_extract(config: RunConfig, ingest: Optional[IngestResult] = None) -> FeatureMatrix:
    """Feature matrix of the accepted sessions; write ``features.csv``."""
    ingest = ingest or cmd_ingest(config)
    matrix = build_matrix(
        ingest.corpus,
        reg=config.lexicon.load_registry(),
        lexica=config.lexicon.load_lexica(),
    )
    write_feature_csv(matrix, _output_dir(config) / FEATURES_FILE)
    return matrix


def _split_plan(config: RunConfig, matrix: FeatureMatrix) -> SplitPlan:
    if config.split.plan is None:
        return split_ids(matrix.session_ids, config.split.ratio, config.split.seed)
    plan = load_split_plan(pathlib.Path(config.split.plan).read_bytes())
    ids = set(matrix.session_ids)
    if plan.all_ids != ids:
        raise ConfigurationError(
            f"split plan {config.split.plan} does not match the sessions:"
            f" missing {sorted(ids - plan.all_ids)}, unknown {sorted(plan.all_ids - ids)}"
        )
    return plan


def _write_failures(board: Leaderboard, path):
    rows = [
        (f.ordinal, ";".join(f.feature_subset), params_text(f.params), f.error)
        for f in board.failures
    ]
    frame = pd.DataFrame(
        rows,
        columns="ordinal features params error".split(),
    )
    frame.to_csv(path, index=False, lineterminator="\n")


def run_manifest(config, matrix, plan, baselines, specs, boards) -> dict:
    """
    Everything needed to repeat a search run: config, digests, seeds, totals.

    Holds no timestamps, so a repeated run writes the same bytes.
    """
    test_ids = sorted(plan.test_ids)
    test_labels = matrix.rows(plan.test_ids).labels
    searches = []
    for spec in specs:
        board = boards[spec.name]
        best = board.best
        searches.append(
            {
                "name": spec.name,
                "estimator": spec.to_document()["estimator"],
                "seed": spec.seed,
                "spec": spec.to_document(),
                "spec_digest": board.spec_digest,
                "total": spec.total,
                "n_configs": spec.n_configs,
                "evaluated": len(board),
                "failed": len(board.failures),
                "leaderboard": LEADERBOARD_FILE.format(spec.name),
                "failures": FAILURES_FILE.format(spec.name) if board.failures else None,
                "best": None
                if best is None
                else {
                    "ordinal": best.ordinal,
                    "accuracy": best.accuracy,
                    "features": list(best.feature_subset),
                    "params": best.params,
                },
            }
        )
    return {
        "format": MANIFEST_FORMAT,
        "version": MANIFEST_VERSION,
        "config": config.to_dict(),
        "config_digest": config.digest(),
        "features": {
            "file": FEATURES_FILE,
            "n_sessions": len(matrix),
            "feature_keys": list(matrix.feature_keys),
        },
        "split": {
            "file": SPLIT_FILE,
            "ratio": plan.ratio,
            "seed": plan.seed,
            "n_train": len(plan.train_ids),
            "n_test": len(test_ids),
            "test_positives": int(test_labels.sum()),
        },
        "baselines": baselines,
        "searches": searches,
        "software": software_versions(),
    }


@dataclass(frozen=True)
class SearchOutcome:
    """Leaderboards of one run with the split and baselines they were scored against."""

    leaderboards: Dict[str, Leaderboard]
    baselines: Dict[str, float]
    plan: SplitPlan
    test_labels: np.ndarray


def cmd_search(
    config: RunConfig,
    matrix: Optional[FeatureMatrix] = None,
    show_progress: bool = False,
) -> "SearchOutcome":
    """
    Split, compute both constant baselines and run every configured search.

    Writes ``split_plan.tsv``, one ``leaderboard_<name>.csv`` per search (as
    soon as that search finishes), ``failures_<name>.csv`` when configurations
    failed, and ``run_manifest.json``.  Without ``matrix``, the features are
    extracted first.
    """
    if matrix is None:
        matrix = cmd_extract(config)
    else:
        config.validate()
    out = _output_dir(config)
    plan = _split_plan(config, matrix)
    write_split_plan(plan, out / SPLIT_FILE)
    train, test = matrix.rows(plan.train_ids), matrix.rows(plan.test_ids)
    baselines = {str(constant): baseline_accuracy(test.labels, constant) for constant in (0, 1)}
    logger.info("constant baselines: %s", baselines)

    specs = config.search_specs()
    boards = {}
    for spec in specs:
        board = run_search(spec, train, test, config.parallelism, show_progress=show_progress)
        write_leaderboard_csv(board, out / LEADERBOARD_FILE.format(spec.name))
        if board.failures:
            _write_failures(board, out / FAILURES_FILE.format(spec.name))
        boards[spec.name] = board

    dump_json(run_manifest(config, matrix, plan, baselines, specs, boards), out / MANIFEST_FILE)
    return SearchOutcome(boards, baselines, plan, test.labels)


def _report_registry(manifest):
    path = manifest.get("config", {}).get("lexicon", {}).get("registry")
    if path and pathlib.Path(path).is_file():
        return load_registry(path)
    return default_registry()


def cmd_report(run_dir, top_k: int = 10) -> str:
    """
    Top-``top_k`` table of every search in ``run_dir``, plus the baselines.

    Accuracies come straight from the leaderboard CSV files.
    """
    run_dir = pathlib.Path(run_dir)
    path = run_dir / MANIFEST_FILE
    if not path.is_file():
        raise MissingManifest(f"no {MANIFEST_FILE} in {run_dir}")
    manifest = orjson.loads(path.read_bytes())
    registry = _report_registry(manifest)

    sections = []
    comparison = pyRestTable.Table()
    comparison.labels = "model configurations accuracy".split()
    for constant, accuracy in sorted(manifest["baselines"].items()):
        comparison.addRow((f"constant {constant}", 1, f"{accuracy:.4f}"))

    for entry in manifest["searches"]:
        board = read_leaderboard_csv(run_dir / entry["leaderboard"], entry["spec_digest"], entry["name"])
        best = board.best
        best_text = "n/a" if best is None else f"{best.accuracy:.4f}"
        comparison.addRow((f"{entry['name']} ({entry['estimator']})", len(board), best_text))
        title = (
            f"{entry['name']} ({entry['estimator']}):"
            f" {len(board)} configurations, {entry['failed']} failed, best accuracy {best_text}"
        )
        sections.append(f"{title}\n\n{format_top_table(board, top_k, registry)}")

    split = manifest["split"]
    header = f"test set: {split['n_test']} sessions ({split['test_positives']} positive)"
    sections.append(f"Comparison with constant baselines\n\n{comparison}")
    return "\n\n".join([header] + sections)


def cmd_synth(
    out_dir,
    n_sessions: int = 189,
    positive_fraction: float = 0.3,
    signal_strength: float = 1.0,
    seed: int = 0,
    n_botless: int = 0,
) -> Dict[str, pathlib.Path]:
    """
    Write a seeded synthetic corpus, its labels and a starter ``config.yaml``.

    Returns the paths written (``"labels"``, ``"config"`` and one per session).
    """
    corpus, labels = generate_synthetic_corpus(n_sessions, positive_fraction, signal_strength, seed, n_botless)
    written = write_synthetic_corpus(corpus, labels, out_dir)
    written["config"] = pathlib.Path(out_dir) / CONFIG_FILE
    written["config"].write_text(starter_config(seed).to_yaml())
    logger.info("synthetic corpus: %d sessions (%d positive) in %s", len(corpus), labels.positives, out_dir)
    return written


# ---- click


@dataclass
class Options:
    """Global options shared by every subcommand."""

    config_path: Optional[pathlib.Path] = None
    out: Optional[pathlib.Path] = None
    parallelism: Optional[int] = None
    seed: Optional[int] = None

    def load_config(self) -> RunConfig:
        if self.config_path is None:
            raise ConfigurationError("this command needs --config")
        config = RunConfig.restore(pathlib.Path(self.config_path))
        config = config.with_overrides(seed=self.seed, output_dir=self.out, parallelism=self.parallelism)
        config.validate()
        return config


def _exit_codes(func):
    """Report failures on stderr and exit 1 (invalid input) or 2 (anything else)."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except click.ClickException:
            raise
        except (ConfigurationError, MissingManifest) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INVALID)
        except Exception as exc:
            logger.debug("command failed", exc_info=True)
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            sys.exit(EXIT_FAILURE)

    return wrapper


@click.group()
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=pathlib.Path),
    help="Run configuration (YAML or JSON).",
)
@click.option("--out", type=click.Path(path_type=pathlib.Path), help="Output directory (overrides the config).")
@click.option("--parallelism", type=int, help="Worker processes for searches.")
@click.option("--seed", type=int, help="Replaces the split seed and every search seed.")
@click.option(
    "--log-level",
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    default="WARNING",
    show_default=True,
)
@click.pass_context
def cli(ctx, config_path, out, parallelism, seed, log_level):
    """Depression screening experiments on interview transcripts."""
    logging.basicConfig(level=log_level.upper(), format=LOG_FORMAT, stream=sys.stderr, force=True)
    ctx.obj = Options(config_path, out, parallelism, seed)


@cli.command()
@click.pass_obj
@_exit_codes
def ingest(options):
    """Parse and validate transcripts; write the session inventory."""
    config = options.load_config()
    try:
        result = cmd_ingest(config)
    except NoAcceptedSessions as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FAILURE)
    click.echo(result.summary())
    click.echo(str(result.summary_table()))


@cli.command()
@click.pass_obj
@_exit_codes
def extract(options):
    """Write the feature matrix of the accepted sessions."""
    config = options.load_config()
    matrix = cmd_extract(config)
    rows, columns = matrix.shape
    click.echo(f"{pathlib.Path(config.output_dir) / FEATURES_FILE}: {rows} sessions x {columns} features")


@cli.command()
@click.option(
    "--features",
    "features_path",
    type=click.Path(exists=True, path_type=pathlib.Path),
    help="Reuse a stored features.csv instead of extracting again.",
)
@click.pass_obj
@_exit_codes
def search(options, features_path):
    """Run every configured search; write leaderboards and the run manifest."""
    config = options.load_config()
    matrix = None if features_path is None else read_feature_csv(features_path)
    outcome = cmd_search(config, matrix, show_progress=sys.stderr.isatty())
    click.echo(str(baseline_table(outcome.test_labels)))
    for name, board in outcome.leaderboards.items():
        best = "n/a" if board.best is None else f"{board.best.accuracy:.4f}"
        click.echo(f"{name}: {len(board)} evaluated, {len(board.failures)} failed, best accuracy {best}")


@cli.command()
@click.option("--top-k", type=click.IntRange(min=1), default=10, show_default=True)
@click.argument("run_dir", required=False, type=click.Path(path_type=pathlib.Path))
@click.pass_obj
@_exit_codes
def report(options, top_k, run_dir):
    """Print the top results of a finished run (RUN_DIR, or --out)."""
    run_dir = run_dir or options.out
    if run_dir is None:
        run_dir = pathlib.Path(options.load_config().output_dir)
    click.echo(cmd_report(run_dir, top_k))


@cli.command()
@click.option("--n-sessions", type=int, default=189, show_default=True)
@click.option("--positive-fraction", type=float, default=0.3, show_default=True)
@click.option("--signal-strength", type=float, default=1.0, show_default=True)
@click.option("--botless", type=int, default=0, show_default=True, help="Sessions written without bot turns.")
@click.pass_obj
@_exit_codes
def synth(options, n_sessions, positive_fraction, signal_strength, botless):
    """Write a synthetic corpus, labels and a starter config into --out."""
    out = options.out or pathlib.Path("synthetic")
    seed = 0 if options.seed is None else options.seed
    written = cmd_synth(out, n_sessions, positive_fraction, signal_strength, seed, botless)
    click.echo(f"{out}: {n_sessions} sessions, labels {written['labels']}, config {written['config']}")


def main():
    """Console script entry point."""
    cli(prog_name="depscreen")
