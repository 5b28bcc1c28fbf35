"""CLI entry point for cm2."""

import functools
import logging
import shutil
import sys
import tempfile
from pathlib import Path
from typing import Callable, Dict, List, Optional

import click

from . import __version__
from .classifier import classify, explain
from .config import Config
from .errors import CM2Error, InputError, TrainingError
from .evaluate import check_thetas, evaluate, penalty_sweep
from .ingest import load_document, load_keywords
from .metrics import write_metrics
from .registry import CoordinateMatrix, build_matrix, load_registry_file, save_registry_file
from .report import confusion_csv, eval_text, format_struct, format_text, per_class_csv, sweep_csv
from .synth import SynthSpec, gen_corpus, load_corpus, write_corpus

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_USAGE = 2
EXIT_TRAINING = 3

INPUT_FORMATS = click.Choice(['auto', 'xml', 'hocr'])

ENV_EXAMPLE = """# cm2 configuration (environment overrides the YAML file)

# Largest distance one keyword may contribute; also the cost of a missing keyword
CM2_MAX_PENALTY=200

# Keyword token matching: same-line tolerance and maximum horizontal gap (px)
CM2_LINE_TOLERANCE=5
CM2_GAP_TOLERANCE=60

# Page that is searched for keywords (1-based)
CM2_PAGE_INDEX=1

# Template registry used by add-template and classify
CM2_REGISTRY_PATH=registry.cm2

# Threads used by evaluate and sweep
CM2_WORKERS=1

# Log level: DEBUG, INFO, WARNING, ERROR
CM2_LOG_LEVEL=INFO

# Prometheus textfile written when a command finishes (optional)
# CM2_METRICS_FILE=/var/lib/node_exporter/textfile/cm2.prom
"""


def setup_logging(log_level: str, log_file: Optional[Path] = None):
    """Setup logging configuration. Logs go to stderr; stdout carries results only."""
    log_format = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

    handlers = [logging.StreamHandler(sys.stderr)]

    if log_file:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        # validate() reports a bad level after logging is up
        level=getattr(logging, log_level.upper(), logging.INFO),
        format=log_format,
        handlers=handlers,
        force=True,
    )


def fail(message: str, code: int = EXIT_USAGE):
    click.echo(f"Error: {message}", err=True)
    sys.exit(code)


def handle_errors(fn: Callable) -> Callable:
    """Map library exceptions to exit codes."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except TrainingError as e:
            fail(str(e), EXIT_TRAINING)
        except (CM2Error, OSError) as e:
            fail(str(e))
    return wrapper


def _with_path(path: Path, loader: Callable, *args, **kwargs):
    """Call ``loader`` and prefix any parse or validation error with ``path``."""
    try:
        return loader(path, *args, **kwargs)
    except CM2Error as e:
        raise InputError(f"{path}: {e}") from e


def _parse_penalties(ctx, param, value: Optional[str]) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        thetas = [int(part) for part in value.split(',') if part.strip()]
        return check_thetas(thetas)
    except (ValueError, InputError) as e:
        raise click.BadParameter(str(e)) from e


def _registry_path(config: Config, registry: Optional[str]) -> Path:
    return Path(registry) if registry else config.registry_path


def _load_matrix(config: Config, registry: Optional[str], corpus) -> CoordinateMatrix:
    """The given registry, otherwise a matrix trained on the corpus templates."""
    if registry:
        return _with_path(Path(registry), load_registry_file)
    return build_matrix(corpus.templates, config.classifier_config())


def _write_outputs(out_dir: Path, files: Dict[str, str]) -> List[Path]:
    """Write every file or none of them."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    try:
        for name, text in files.items():
            path = out_dir / name
            path.write_bytes(text.encode('utf-8'))
            written.append(path)
    except OSError:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    for path in written:
        logger.info(f"Wrote {path}")
    return written


@click.group()
@click.version_option(version=__version__)
@click.option('--config', '-c', type=click.Path(exists=False), help='Config file path')
@click.option('--log-level', '-l', default=None,
              type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'], case_sensitive=False),
              help='Log level (default from config, INFO)')
@click.option('--log-file', type=click.Path(dir_okay=False), help='Also write logs to this file')
@click.option('--metrics-file', type=click.Path(dir_okay=False),
              help='Write Prometheus metrics to this file when the command finishes')
@click.pass_context
def cli(ctx, config, log_level, log_file, metrics_file):
    """cm2 - classify structured documents by keyword positions (one sample per class)."""
    config_path = Path(config) if config else None
    ctx.obj = Config(config_path=config_path)

    setup_logging(log_level or ctx.obj.log_level, Path(log_file) if log_file else None)

    if metrics_file:
        ctx.obj.metrics_file = Path(metrics_file)
    if ctx.obj.metrics_file:
        ctx.call_on_close(lambda: write_metrics(ctx.obj.metrics_file))

    # init must work with a broken config so it can replace it
    if ctx.invoked_subcommand != 'init':
        if not ctx.obj.validate():
            click.echo("Configuration validation failed", err=True)
            click.echo("Run 'cm2 init' to write a default configuration", err=True)
            sys.exit(EXIT_USAGE)


@cli.command()
@click.pass_obj
@handle_errors
def init(config: Config):
    """Write a default configuration file and an example .env file."""
    config.save_yaml_config()

    env_example_path = config.env_path.with_suffix('.example')
    env_example_path.write_text(ENV_EXAMPLE)

    click.echo(f"✅ Created config file: {config.config_path}")
    click.echo(f"✅ Created example env file: {env_example_path}")
    click.echo("\nNext steps:")
    click.echo("1. Register one sample per document class: cm2 add-template --class ID --doc DOC --keywords CSV")
    click.echo("2. Classify documents: cm2 classify --doc DOC")


@cli.command('add-template')
@click.option('--class', 'class_id', required=True, help='Class identifier of the sample')
@click.option('--doc', 'doc_path', required=True, type=click.Path(dir_okay=False), help='Training sample')
@click.option('--keywords', 'keywords_path', required=True, type=click.Path(dir_okay=False),
              help='keyword,value CSV for the class')
@click.option('--registry', type=click.Path(dir_okay=False), help='Registry file (default from config)')
@click.option('--input-format', default='auto', type=INPUT_FORMATS, help='Document format')
@click.pass_obj
@handle_errors
def add_template(config: Config, class_id, doc_path, keywords_path, registry, input_format):
    """Add one class to the registry from a single training sample."""
    if not class_id:
        fail("--class must not be empty")
    registry_path = _registry_path(config, registry)
    cfg = config.classifier_config()

    existing = CoordinateMatrix()
    if registry_path.exists():
        existing = _with_path(registry_path, load_registry_file)
    if class_id in existing:
        fail(f"class {class_id!r} is already registered in {registry_path}")

    doc = _with_path(Path(doc_path), load_document, input_format)
    specs = _with_path(Path(keywords_path), load_keywords, class_id)
    if not specs:
        fail(f"{keywords_path}: no keywords")

    try:
        added = build_matrix([(doc, specs)], cfg)
    except TrainingError as e:
        fail(f"{doc_path}: {e}", EXIT_TRAINING)
    matrix = existing.extend(added)
    save_registry_file(matrix, registry_path)

    click.echo(f"Added {class_id}: {len(added)} keyword(s); {registry_path} now holds "
               f"{matrix.n_classes} class(es), {len(matrix)} row(s)")


@cli.command('classify')
@click.option('--doc', 'doc_path', required=True, type=click.Path(dir_okay=False), help='Document to classify')
@click.option('--registry', type=click.Path(dir_okay=False), help='Registry file (default from config)')
@click.option('--max-penalty', type=click.IntRange(min=1), help='Maximum penalty per keyword')
@click.option('--explain', 'explain_flag', is_flag=True, help='Append the per-keyword distance table')
@click.option('--format', 'output_format', default='text', type=click.Choice(['text', 'struct']),
              help='Output format')
@click.option('--input-format', default='auto', type=INPUT_FORMATS, help='Document format')
@click.pass_obj
@handle_errors
def classify_cmd(config: Config, doc_path, registry, max_penalty, explain_flag, output_format, input_format):
    """Classify one document; exit status 1 when it is rejected."""
    cfg = config.classifier_config(max_penalty=max_penalty)
    matrix = _with_path(_registry_path(config, registry), load_registry_file)
    doc = _with_path(Path(doc_path), load_document, input_format)

    result = classify(matrix, doc, cfg)

    if output_format == 'struct':
        click.echo(format_struct(result), nl=False)
    else:
        click.echo(format_text(result), nl=False)
        if explain_flag:
            click.echo(explain(result), nl=False)

    sys.exit(EXIT_REJECTED if result.rejected else EXIT_OK)


@cli.command('evaluate')
@click.option('--corpus', 'corpus_dir', required=True, type=click.Path(file_okay=False, exists=True),
              help='Corpus directory with manifest.csv')
@click.option('--registry', type=click.Path(dir_okay=False),
              help='Registry file (default: train on the corpus templates)')
@click.option('--max-penalty', type=click.IntRange(min=1), help='Maximum penalty per keyword')
@click.option('--workers', type=click.IntRange(min=1), help='Classification threads')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), help='Directory for report files')
@click.pass_obj
@handle_errors
def evaluate_cmd(config: Config, corpus_dir, registry, max_penalty, workers, out_dir):
    """Evaluate on a labelled corpus and print the F-measure report."""
    cfg = config.classifier_config(max_penalty=max_penalty)
    corpus = _with_path(Path(corpus_dir), load_corpus)
    matrix = _load_matrix(config, registry, corpus)

    report = evaluate(matrix, corpus.test_set, cfg, workers=workers or config.workers)

    text = eval_text(report)
    if out_dir:
        _write_outputs(Path(out_dir), {
            'eval_report.txt': text,
            'eval_per_class.csv': per_class_csv(report),
            'confusion.csv': confusion_csv(report),
        })
    click.echo(text, nl=False)


@cli.command('sweep')
@click.option('--corpus', 'corpus_dir', required=True, type=click.Path(file_okay=False, exists=True),
              help='Corpus directory with manifest.csv')
@click.option('--penalties', required=True, callback=_parse_penalties,
              help='Comma-separated, strictly increasing maximum penalties, e.g. 10,50,100,200')
@click.option('--registry', type=click.Path(dir_okay=False),
              help='Registry file (default: train on the corpus templates)')
@click.option('--workers', type=click.IntRange(min=1), help='Classification threads')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), help='Directory for sweep.csv')
@click.pass_obj
@handle_errors
def sweep_cmd(config: Config, corpus_dir, penalties, registry, workers, out_dir):
    """Evaluate once per maximum penalty and print theta,micro_f,macro_f."""
    cfg = config.classifier_config()
    corpus = _with_path(Path(corpus_dir), load_corpus)
    matrix = _load_matrix(config, registry, corpus)

    reports = penalty_sweep(matrix, corpus.test_set, penalties, cfg, workers=workers or config.workers)

    table = sweep_csv(reports)
    if out_dir:
        _write_outputs(Path(out_dir), {'sweep.csv': table})
    click.echo(table, nl=False)


@cli.command('gen-corpus')
@click.option('--seed', required=True, type=int, help='Random seed (required for reproducibility)')
@click.option('--out', 'out_dir', required=True, type=click.Path(file_okay=False), help='Output directory')
@click.option('--templates', default=SynthSpec.n_templates, show_default=True, type=click.IntRange(min=1))
@click.option('--instances', default=SynthSpec.instances_per_template, show_default=True,
              type=click.IntRange(min=1), help='Test instances per template')
@click.option('--min-keywords', default=SynthSpec.keywords_per_template[0], show_default=True, type=int)
@click.option('--max-keywords', default=SynthSpec.keywords_per_template[1], show_default=True, type=int)
@click.option('--jitter', default=SynthSpec.jitter, show_default=True, type=click.IntRange(min=0))
@click.option('--drop-prob', default=SynthSpec.drop_prob, show_default=True, type=click.FloatRange(0.0, 1.0))
@click.option('--distractors', default=SynthSpec.distractor_words, show_default=True, type=click.IntRange(min=0))
@click.option('--min-separation', default=SynthSpec.min_separation, show_default=True,
              type=click.IntRange(min=1))
@click.option('--keyword-distractors', is_flag=True, help='Let distractor words reuse keyword tokens')
@click.option('--with-hocr', is_flag=True, help='Also write an hOCR twin of every test document')
@handle_errors
def gen_corpus_cmd(seed, out_dir, templates, instances, min_keywords, max_keywords, jitter, drop_prob,
                   distractors, min_separation, keyword_distractors, with_hocr):
    """Generate a synthetic labelled corpus."""
    out = Path(out_dir)
    if out.exists() and any(out.iterdir()):
        fail(f"{out} exists and is not empty")

    spec = SynthSpec(
        n_templates=templates,
        instances_per_template=instances,
        keywords_per_template=(min_keywords, max_keywords),
        jitter=jitter,
        drop_prob=drop_prob,
        distractor_words=distractors,
        min_separation=min_separation,
        seed=seed,
        keyword_distractors=keyword_distractors,
    )
    corpus = gen_corpus(spec)

    # Build the tree next to its destination, then move it into place
    out.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=f".{out.name}.", dir=out.parent))
    try:
        written = write_corpus(corpus, staging, with_hocr=with_hocr)
        if out.exists():
            out.rmdir()
        staging.rename(out)
    except Exception:
        shutil.rmtree(staging, ignore_errors=True)
        raise

    click.echo(f"Wrote {len(written)} file(s) to {out}: {len(corpus.templates)} template(s), "
               f"{len(corpus.test_set)} test document(s)")


if __name__ == '__main__':
    cli()
