"""
Ablation experiment harness.

Runs the five fixed (architecture, preprocessing) configurations on one
manifest with a shared seed and a shared train/test split, and writes a CSV
report with one row per configuration in fixed order. A failing row is
recorded and the remaining rows still run.
"""

import asyncio
import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .manifest import load_manifest_images, prepare_dataset
from .models.core import ManifestRow, TrainConfig
from .models.enums import Architecture, PreprocessMode, RunStatus
from .models.metrics import ExperimentRow
from .preprocess import Image
from .tensor_core import Rng
from .training.architectures import build_model
from .training.trainer import INIT_STREAM, SPLIT_STREAM, evaluate, split_dataset, train

logger = logging.getLogger("experiment")

PathLike = Union[str, Path]


@dataclass(frozen=True)
class AblationSpec:
    name: str
    arch: Architecture
    mode: PreprocessMode


ABLATION_ROWS: Tuple[AblationSpec, ...] = (
    AblationSpec("cnn-raw", Architecture.CNN, PreprocessMode.RAW),
    AblationSpec("cnn-expanded", Architecture.CNN, PreprocessMode.EXPANDED),
    AblationSpec("cnn-contrast", Architecture.CNN, PreprocessMode.CONTRAST),
    AblationSpec("cnn-contrast+light", Architecture.CNN, PreprocessMode.CONTRAST_LIGHT),
    AblationSpec("resnet-contrast+light", Architecture.RESNET, PreprocessMode.CONTRAST_LIGHT),
)


class ExperimentRunner:
    """
    Runs ablation rows, optionally in parallel.

    Responsible for:
    - Loading and splitting the corpus once
    - Training and scoring each configuration with its own random streams
    - Turning per-row exceptions into failed report rows
    """

    def __init__(
        self,
        base_config: TrainConfig,
        workers: int = 1,
        rows: Sequence[AblationSpec] = ABLATION_ROWS
    ):
        if workers < 1:
            raise ValueError(f"workers must be at least 1, got {workers}")
        self.base_config = base_config
        self.workers = workers
        self.rows = tuple(rows)
        self.logger = logging.getLogger("experiment")

    def run(self, manifest_path: PathLike) -> List[ExperimentRow]:
        """
        Load the manifest and run every row.

        Returns:
            Report rows in the fixed configuration order
        """
        manifest_rows, images = load_manifest_images(manifest_path)
        train_idx, test_idx = split_dataset(
            len(manifest_rows),
            self.base_config.test_fraction,
            Rng(self.base_config.seed).spawn(SPLIT_STREAM)
        )
        self.logger.info(
            f"running {len(self.rows)} configurations on {len(train_idx)} train / {len(test_idx)} test images "
            f"with {self.workers} worker(s)"
        )
        return asyncio.run(self._run_all(manifest_rows, images, train_idx, test_idx))

    async def _run_all(self, manifest_rows, images, train_idx, test_idx) -> List[ExperimentRow]:
        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            tasks = [
                loop.run_in_executor(
                    executor, self.run_row, index, spec, manifest_rows, images, train_idx, test_idx
                )
                for index, spec in enumerate(self.rows)
            ]
            return list(await asyncio.gather(*tasks))

    def run_row(
        self,
        index: int,
        spec: AblationSpec,
        manifest_rows: Sequence[ManifestRow],
        images: Sequence[Image],
        train_idx: np.ndarray,
        test_idx: np.ndarray
    ) -> ExperimentRow:
        """Train and score one configuration; never raises for row failures."""
        cfg = self.base_config
        try:
            cfg = cfg.with_overrides(arch=spec.arch, preprocess_mode=spec.mode)
            dataset, _ = prepare_dataset(manifest_rows, images, cfg.preprocess_mode, cfg.preprocess_config(), cfg.image_size)
            train_set = dataset.subset(train_idx)
            test_set = dataset.subset(test_idx)

            rng = Rng(cfg.seed).spawn(index + 1)
            model = build_model(cfg, rng.spawn(INIT_STREAM))
            train(model, train_set, cfg, test_set=test_set, rng=rng, run_name=spec.name)

            scored = test_set if len(test_set) else train_set
            if not len(test_set):
                self.logger.warning(f"{spec.name}: empty test split, scoring on the training set")
            metrics = evaluate(model, scored, cfg.threshold)
            self.logger.info(f"{spec.name}: accuracy={metrics.accuracy:.4f} f_score={metrics.f_score:.4f}")
            return ExperimentRow(
                name=spec.name, arch=spec.arch, mode=spec.mode, epochs=cfg.epochs, seed=cfg.seed,
                n_train=len(train_idx), n_test=len(test_idx), status=RunStatus.OK, metrics=metrics
            )
        except Exception as e:
            self.logger.error(f"{spec.name} failed: {type(e).__name__}: {e}")
            return ExperimentRow(
                name=spec.name, arch=spec.arch, mode=spec.mode, epochs=cfg.epochs, seed=cfg.seed,
                n_train=len(train_idx), n_test=len(test_idx), status=RunStatus.FAILED,
                error=f"{type(e).__name__}: {e}"
            )


def write_report(path: PathLike, rows: Sequence[ExperimentRow]) -> None:
    """Write the report CSV: one header line plus one line per row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(ExperimentRow.CSV_HEADER.split(","))
        for row in rows:
            writer.writerow(row.to_csv_fields())


def format_table(rows: Sequence[ExperimentRow]) -> List[str]:
    """Console table with percentages to two decimals."""
    lines = [f"{'name':<24}{'accuracy':>10}{'f_score':>10}  status"]
    for row in rows:
        if row.metrics is not None:
            pct = row.metrics.as_percentages()
            lines.append(f"{row.name:<24}{pct['accuracy']:>10}{pct['f_score']:>10}  {row.status.value}")
        else:
            lines.append(f"{row.name:<24}{'-':>10}{'-':>10}  {row.status.value}: {row.error}")
    return lines


def any_failed(rows: Sequence[ExperimentRow]) -> bool:
    return any(row.status == RunStatus.FAILED for row in rows)


def run_experiment(
    manifest_path: PathLike,
    base_config: TrainConfig,
    report_path: Optional[PathLike] = None,
    workers: int = 1
) -> List[ExperimentRow]:
    """Run the ablation and optionally write the report."""
    rows = ExperimentRunner(base_config, workers).run(manifest_path)
    if report_path is not None:
        write_report(report_path, rows)
    return rows
