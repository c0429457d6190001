"""Ablation suite: the full model and its variants trained over several seeds."""
import asyncio
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np
from tqdm import tqdm

from ..config.run_config import SOURCE_ONLY_OVERRIDES, RunConfig
from ..utils.enum import InferenceMode, VariantName
from ..utils.logger import get_formatted_logger
from ..utils.workers import WorkerPool

logger = get_formatted_logger()

# Trained configurations, keyed by the directory name of their runs.
TRAINED_VARIANTS: dict[str, dict[str, Any]] = {
    "full": {},
    "no_condition_adv": {"NO_CONDITION_ADV": True},
    "no_entropy": {"NO_ENTROPY": True},
    "no_mutual": {"NO_MUTUAL": True},
    "source_only": SOURCE_ONLY_OVERRIDES,
}

# Table rows in order: (row label, trained variant, inference mode it is scored with).
ROWS: tuple[tuple[VariantName, str, InferenceMode], ...] = (
    (VariantName.WithoutConditionAdv, "no_condition_adv", InferenceMode.Ensemble),
    (VariantName.WithoutEntropy, "no_entropy", InferenceMode.Ensemble),
    (VariantName.WithoutMutual, "no_mutual", InferenceMode.Ensemble),
    (VariantName.GuidanceInference, "full", InferenceMode.GuidanceOnly),
    (VariantName.BranchAverageInference, "full", InferenceMode.BranchAverage),
    (VariantName.Full, "full", InferenceMode.Ensemble),
    (VariantName.SourceOnly, "source_only", InferenceMode.GuidanceOnly),
)


def variant_config(cfg: RunConfig, variant: str, seed: int) -> RunConfig:
    if variant not in TRAINED_VARIANTS:
        raise ValueError(f"unknown ablation variant: {variant}")
    return cfg.with_overrides(**TRAINED_VARIANTS[variant], SEED=seed, VERBOSE=False)


def result_path(out_dir: str | Path, variant: str, seed: int) -> Path:
    return Path(out_dir) / "runs" / f"{variant}_seed{seed}.json"


def load_result(path: Path, config_hash: str) -> Optional[dict[str, Any]]:
    """A completed run's result, or None if absent, unreadable or written by another config."""
    try:
        result = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError):
        return None
    if result.get("config_hash") != config_hash:
        return None
    return result


def run_variant(flat_config: dict[str, Any], variant: str, seed: int, path: str) -> dict[str, Any]:
    """Train and evaluate one (variant, seed) pair, then persist its result.

    Runs in a worker process, so it takes and returns plain data.
    """
    # Imported here: the trainer depends on this package
    from ..data.generator import dataset_from_config
    from ..training.trainer import run_training
    from .report import evaluate

    cfg = RunConfig.from_flat(flat_config)
    path = Path(path)
    ds = dataset_from_config(cfg.dataset, tag=cfg.config_hash())
    trained = run_training(cfg, ds, run_dir=path.with_suffix(""))
    report = evaluate(
        trained.model,
        ds,
        cfg.flags.inference_mode,
        config_hash=cfg.config_hash(),
        seed=seed,
        probe_size=cfg.probe_size,
    )
    result = {
        "variant": variant,
        "seed": seed,
        **report.model_dump(mode="json"),
    }
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(result, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    os.replace(tmp, path)
    return result


@dataclass
class AblationRow:
    label: str
    accuracies: list[float]

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies)) if self.accuracies else float("nan")

    @property
    def std(self) -> float:
        """Population standard deviation, so a single seed gives 0."""
        return float(np.std(self.accuracies)) if self.accuracies else float("nan")


@dataclass
class AblationTable:
    config_hash: str
    seeds: list[int]
    rows: list[AblationRow]
    failures: list[str] = field(default_factory=list)
    results: dict[str, list[dict[str, Any]]] = field(default_factory=dict)

    def row(self, label: str | VariantName) -> AblationRow:
        label = label.value if isinstance(label, VariantName) else label
        for row in self.rows:
            if row.label == label:
                return row
        raise KeyError(label)

    def to_tsv(self) -> str:
        lines = ["variant\tmean_accuracy\tstd_accuracy\truns\tconfig_hash"]
        for row in self.rows:
            lines.append(
                f"{row.label}\t{100 * row.mean:.2f}\t{100 * row.std:.2f}\t{len(row.accuracies)}\t{self.config_hash}"
            )
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        width = max(len(row.label) for row in self.rows)
        lines = [
            f"Ablation on {len(self.seeds)} seed(s), config {self.config_hash}",
            f"{'Variant'.ljust(width)}  Accuracy (%)",
        ]
        for row in self.rows:
            lines.append(f"{row.label.ljust(width)}  {100 * row.mean:.2f} ± {100 * row.std:.2f}")
        for failure in self.failures:
            lines.append(f"FAILED: {failure}")
        return "\n".join(lines) + "\n"


def build_table(
    cfg: RunConfig,
    seeds: list[int],
    results: dict[tuple[str, int], dict[str, Any]],
    include_source_only: bool,
    failures: Optional[list[str]] = None,
) -> AblationTable:
    rows = []
    for label, variant, mode in ROWS:
        if variant == "source_only" and not include_source_only:
            continue
        accuracies = [
            results[(variant, seed)]["target_accuracy"][mode.value]
            for seed in seeds
            if (variant, seed) in results
        ]
        rows.append(AblationRow(label=label.value, accuracies=accuracies))
    by_variant: dict[str, list[dict[str, Any]]] = {}
    for (variant, _), result in sorted(results.items()):
        by_variant.setdefault(variant, []).append(result)
    return AblationTable(
        config_hash=cfg.config_hash(),
        seeds=list(seeds),
        rows=rows,
        failures=list(failures or []),
        results=by_variant,
    )


async def run_ablations_async(
    cfg: RunConfig,
    seeds: Iterable[int],
    out_dir: str | Path,
    include_source_only: bool = False,
    max_workers: Optional[int] = None,
    use_processes: Optional[bool] = None,
) -> AblationTable:
    """Train every variant for every seed, skipping runs whose result file is already present.

    A failed run is recorded in ``AblationTable.failures`` and leaves its row short of that
    seed; the other runs still complete.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("run_ablations needs at least one seed")
    variants = [v for v in TRAINED_VARIANTS if include_source_only or v != "source_only"]
    (Path(out_dir) / "runs").mkdir(parents=True, exist_ok=True)

    results: dict[tuple[str, int], dict[str, Any]] = {}
    pending: list[tuple[str, int, RunConfig, Path]] = []
    for variant in variants:
        for seed in seeds:
            run_cfg = variant_config(cfg, variant, seed)
            path = result_path(out_dir, variant, seed)
            cached = load_result(path, run_cfg.config_hash())
            if cached is not None:
                results[(variant, seed)] = cached
            else:
                pending.append((variant, seed, run_cfg, path))
    if results:
        logger.info(f"Resuming ablation: {len(results)} of {len(results) + len(pending)} runs already complete")

    failures: list[str] = []
    async with WorkerPool(max_workers or cfg.max_workers, use_processes) as pool:

        async def job(variant: str, seed: int, run_cfg: RunConfig, path: Path):
            try:
                return variant, seed, await pool.run(run_variant, run_cfg.to_flat(), variant, seed, str(path)), None
            except Exception as exc:
                return variant, seed, None, exc

        tasks = [asyncio.ensure_future(job(*args)) for args in pending]
        for future in tqdm(asyncio.as_completed(tasks), total=len(tasks), desc="Ablation runs", disable=not tasks):
            variant, seed, result, error = await future
            if error is not None:
                message = f"{variant} seed {seed}: {type(error).__name__}: {error}"
                logger.error(f"Ablation run failed: {message}")
                failures.append(message)
            else:
                results[(variant, seed)] = result

    return build_table(cfg, seeds, results, include_source_only, sorted(failures))


def run_ablations(
    cfg: RunConfig,
    seeds: Iterable[int],
    out_dir: str | Path,
    include_source_only: bool = False,
    max_workers: Optional[int] = None,
    use_processes: Optional[bool] = None,
) -> AblationTable:
    return asyncio.run(
        run_ablations_async(cfg, seeds, out_dir, include_source_only, max_workers, use_processes)
    )
