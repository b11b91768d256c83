"""
Command-line interface for the pneumonia X-ray toolkit.

Provides CLI commands for:
- Preprocessing image directories
- Generating the synthetic corpus
- Training, evaluating and predicting with checkpoints
- Running the five-row ablation experiment
- Finite-difference gradient checks

Exit codes: 0 success, 1 partial experiment failure, 2 usage or
validation error, 3 numerical divergence.
"""

import functools
import logging
import shutil
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, TextIO

import click
import numpy as np

from .checkpoint import check_compatible, load_checkpoint, save_checkpoint
from .config import get_settings, load_config, setup_logging
from .datagen import generate
from .errors import DivergedError, ParameterError, XrayError
from .experiment import any_failed, format_table, run_experiment
from .manifest import load_manifest_images, prepare_dataset
from .models.core import PreprocessConfig, SyntheticSpec, TrainConfig
from .models.enums import Architecture, HeadKind, PreprocessMode
from .models.metrics import EpochRecord
from .preprocess import (
    SUPPORTED_SUFFIXES,
    compute_channel_averages,
    images_to_batch,
    pipeline_apply,
    read_image,
    write_image
)
from .tensor_core import Rng
from .training import (
    INIT_STREAM,
    SPLIT_STREAM,
    build_model,
    evaluate,
    grad_check,
    predict_probabilities,
    split_dataset,
    train
)

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_VALIDATION = 2
EXIT_DIVERGED = 3

MODE_CHOICES = [mode.value for mode in PreprocessMode]


def handle_errors(command):
    """Map library exceptions to the stable exit codes."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except DivergedError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_DIVERGED)
        except (XrayError, ValueError, OSError) as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_VALIDATION)

    return wrapper


def _parse_mode(ctx, param, value):
    if value is None:
        return None
    try:
        return PreprocessMode.parse(value)
    except ValueError as e:
        raise click.BadParameter(str(e)) from e


def _parse_triple(ctx, param, value):
    try:
        parts = tuple(int(part) for part in value.split(","))
    except ValueError as e:
        raise click.BadParameter(f"expected three comma separated integers, got {value!r}") from e
    if len(parts) != 3:
        raise click.BadParameter(f"expected three comma separated integers, got {value!r}")
    return parts


@click.group()
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose logging')
def cli(verbose):
    """Pneumonia X-ray classification toolkit."""
    settings = get_settings()
    config = replace(settings.logging, level="DEBUG") if verbose else settings.logging
    setup_logging(config)


@cli.command()
@click.option('--in', 'in_dir', required=True, type=click.Path(exists=True, file_okay=False), help='Directory of PPM/PGM images')
@click.option('--out', 'out_dir', required=True, type=click.Path(file_okay=False), help='Output directory')
@click.option('--mode', default=PreprocessMode.CONTRAST_LIGHT.value, callback=_parse_mode, help=f'One of {", ".join(MODE_CHOICES)}')
@click.option('--alpha', default=1.5, type=float, show_default=True, help='Contrast gain')
@click.option('--beta', default=0.0, type=float, show_default=True, help='Contrast offset')
@click.option('--delta', default=40.0, type=float, show_default=True, help='Brightness increment')
@click.option('--denom', 'denominator', default=128.0, type=float, show_default=True, help='Color expansion divisor')
@handle_errors
def preprocess(in_dir: str, out_dir: str, mode: PreprocessMode, alpha: float, beta: float, delta: float, denominator: float):
    """Write enhanced copies of every image in a directory."""
    source = Path(in_dir)
    target = Path(out_dir)
    if target.resolve() == source.resolve():
        raise ParameterError("--out must differ from --in; input files are never overwritten")

    cfg = PreprocessConfig(alpha=alpha, beta=beta, brightness_delta=delta, expansion_denominator=denominator)
    files = sorted(p for p in source.iterdir() if p.is_file() and p.suffix.lower() in SUPPORTED_SUFFIXES)
    images = [read_image(path) for path in files]
    averages = compute_channel_averages(images) if mode.needs_averages and images else None

    target.mkdir(parents=True, exist_ok=True)
    for path, image in zip(files, images):
        if mode == PreprocessMode.RAW:
            shutil.copyfile(path, target / path.name)
        else:
            write_image(target / path.name, pipeline_apply(image, cfg, mode, averages))
        logger.debug(f"{mode.value}: {path.name}")

    click.echo(f"processed {len(files)} images")


@cli.command()
@click.option('--out', 'out_dir', required=True, type=click.Path(file_okay=False), help='Output directory')
@click.option('--n', 'n_images', default=200, type=int, show_default=True, help='Number of images')
@click.option('--size', default=32, type=int, show_default=True, help='Image side in pixels')
@click.option('--positive-fraction', default=0.5, type=float, show_default=True, help='Share of positive images')
@click.option('--seed', default=7, type=int, show_default=True, help='Generator seed')
@handle_errors
def datagen(out_dir: str, n_images: int, size: int, positive_fraction: float, seed: int):
    """Generate the synthetic two-class corpus with manifest.csv."""
    spec = SyntheticSpec(n_images=n_images, image_size=size, positive_fraction=positive_fraction, seed=seed)
    rows = generate(spec, out_dir)
    click.echo(f"generated {len(rows)} images ({spec.n_positive} positive)")


def _emit_epoch(record: EpochRecord, log_handle: Optional[TextIO]) -> None:
    line = record.to_csv()
    click.echo(line)
    if log_handle is not None:
        log_handle.write(line + "\n")
        log_handle.flush()


@cli.command('train')
@click.option('--manifest', required=True, type=click.Path(exists=True, dir_okay=False), help='Manifest CSV')
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), help='key = value config file')
@click.option('--out', 'out_path', required=True, type=click.Path(dir_okay=False), help='Checkpoint to write')
@click.option('--log', 'log_path', type=click.Path(dir_okay=False), help='Also write the epoch CSV here')
@handle_errors
def train_command(manifest: str, config_path: Optional[str], out_path: str, log_path: Optional[str]):
    """Train a model and write an XRNET1 checkpoint."""
    cfg = load_config(config_path)
    rows, images = load_manifest_images(manifest)
    train_idx, test_idx = split_dataset(len(rows), cfg.test_fraction, Rng(cfg.seed).spawn(SPLIT_STREAM))
    dataset, averages = prepare_dataset(rows, images, cfg.preprocess_mode, cfg.preprocess_config(), cfg.image_size)
    train_set, test_set = dataset.subset(train_idx), dataset.subset(test_idx)
    logger.info(f"split {len(rows)} images into {len(train_set)} train / {len(test_set)} test")

    rng = Rng(cfg.seed)
    model = build_model(cfg, rng.spawn(INIT_STREAM))

    log_handle = open(log_path, "w", encoding="utf-8") if log_path else None
    try:
        click.echo(EpochRecord.CSV_HEADER)
        if log_handle is not None:
            log_handle.write(EpochRecord.CSV_HEADER + "\n")
        train(model, train_set, cfg, test_set=test_set, rng=rng,
              on_epoch=lambda record: _emit_epoch(record, log_handle))
    finally:
        if log_handle is not None:
            log_handle.close()

    save_checkpoint(out_path, model, cfg, averages)


@cli.command('eval')
@click.option('--manifest', required=True, type=click.Path(exists=True, dir_okay=False), help='Manifest CSV')
@click.option('--checkpoint', 'checkpoint_path', required=True, type=click.Path(exists=True, dir_okay=False), help='XRNET1 checkpoint')
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), help='Config the checkpoint must match')
@click.option('--threshold', type=float, help='Decision threshold (default: from checkpoint)')
@handle_errors
def eval_command(manifest: str, checkpoint_path: str, config_path: Optional[str], threshold: Optional[float]):
    """Print accuracy, precision, recall and F-score of a checkpoint."""
    checkpoint = load_checkpoint(checkpoint_path)
    cfg = checkpoint.config
    if config_path:
        check_compatible(checkpoint, load_config(config_path))
    if threshold is not None:
        cfg = cfg.with_overrides(threshold=threshold)

    rows, images = load_manifest_images(manifest)
    dataset, _ = prepare_dataset(
        rows, images, cfg.preprocess_mode, cfg.preprocess_config(), cfg.image_size, checkpoint.averages
    )
    metrics = evaluate(checkpoint.model, dataset, cfg.threshold, get_settings().eval_batch_size)

    for key, value in metrics.as_percentages().items():
        click.echo(f"{key}: {value}")
    click.echo(f"tp={metrics.tp} fp={metrics.fp} tn={metrics.tn} fn={metrics.fn}")


@cli.command()
@click.option('--manifest', required=True, type=click.Path(exists=True, dir_okay=False), help='Manifest CSV')
@click.option('--out', 'out_path', required=True, type=click.Path(dir_okay=False), help='Report CSV to write')
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), help='Base key = value config')
@click.option('--jobs', type=int, help='Configurations trained in parallel (default: settings)')
@handle_errors
def experiment(manifest: str, out_path: str, config_path: Optional[str], jobs: Optional[int]):
    """Run the five-row ablation and write the report."""
    cfg = load_config(config_path)
    workers = jobs if jobs is not None else get_settings().experiment_workers
    rows = run_experiment(manifest, cfg, out_path, workers)

    for line in format_table(rows):
        click.echo(line)
    if any_failed(rows):
        sys.exit(EXIT_PARTIAL)


@cli.command()
@click.option('--checkpoint', 'checkpoint_path', required=True, type=click.Path(exists=True, dir_okay=False), help='XRNET1 checkpoint')
@click.argument('images', nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@handle_errors
def predict(checkpoint_path: str, images):
    """Classify images one by one with a stored model."""
    checkpoint = load_checkpoint(checkpoint_path)
    cfg = checkpoint.config
    if cfg.preprocess_mode.needs_averages and checkpoint.averages is None:
        raise ParameterError(f"checkpoint has no channel averages for mode {cfg.preprocess_mode.value!r}")

    enhanced = [
        pipeline_apply(read_image(path), cfg.preprocess_config(), cfg.preprocess_mode, checkpoint.averages)
        for path in images
    ]
    probabilities = predict_probabilities(
        checkpoint.model, images_to_batch(enhanced, cfg.image_size), get_settings().eval_batch_size
    )

    click.echo("path,probability,label")
    for path, p in zip(images, probabilities):
        click.echo(f"{path},{p:.6f},{int(p >= cfg.threshold)}")


@cli.command()
@click.option('--arch', type=click.Choice([a.value for a in Architecture]), default='cnn', show_default=True)
@click.option('--head', type=click.Choice([h.value for h in HeadKind]), default='sigmoid', show_default=True)
@click.option('--size', default=16, type=int, show_default=True, help='Input side in pixels')
@click.option('--filters', default='4,8,8', callback=_parse_triple, show_default=True, help='Filter counts')
@click.option('--hidden', default=16, type=int, show_default=True, help='Hidden dense units')
@click.option('--seed', default=0, type=int, show_default=True)
@click.option('--h', 'step', default=1e-5, type=float, show_default=True, help='Finite-difference step')
@click.option('--tol', default=1e-4, type=float, show_default=True, help='Relative error tolerance')
@click.option('--max-per-parameter', type=int, help='Sample at most this many entries per tensor')
@handle_errors
def gradcheck(arch: str, head: str, size: int, filters, hidden: int, seed: int, step: float, tol: float,
              max_per_parameter: Optional[int]):
    """Check backward passes of a small model against finite differences."""
    cfg = TrainConfig(arch=arch, head=head, image_size=size, conv_filters=filters, hidden_units=hidden, seed=seed)
    rng = Rng(seed)
    model = build_model(cfg, rng.spawn(INIT_STREAM))
    x = rng.spawn(1).random((2, 3, size, size))
    labels = np.array([0.0, 1.0])

    report = grad_check(model, x, labels, h=step, tol=tol, max_per_parameter=max_per_parameter, rng=rng.spawn(2))
    for line in report.lines():
        click.echo(line)
    click.echo(f"checked {report.checked} entries: {'ok' if report.passed else 'FAILED'}")
    if not report.passed:
        sys.exit(EXIT_VALIDATION)


def main():
    """Main entry point for CLI."""
    cli()


if __name__ == '__main__':
    main()
