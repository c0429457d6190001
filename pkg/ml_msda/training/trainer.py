import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..autodiff import Tape, backward
from ..config.run_config import SOURCE_ONLY_OVERRIDES, RunConfig
from ..data.dataset import MultiDomainDataset
from ..data.generator import dataset_from_config
from ..data.sampler import DomainSampler, StepBatch
from ..errors import CheckpointError, NumericError, TrainingDivergedError
from ..evaluation.probe import discriminator_accuracy, probe_discriminator
from ..evaluation.report import check_compatible, source_accuracies, target_accuracies
from ..losses.objective import LossBundle, compute_losses
from ..model.checkpoint import load_checkpoint, save_checkpoint
from ..model.network import MlMsdaModel, forward_all, init_model
from ..utils.logger import get_formatted_logger
from ..utils.logging_config import JSONRunHandler, close_run_logging, setup_run_logging
from ..utils.validators import AblationFlags, ArchConfig, HyperParams
from .metrics import MetricsRecord
from .optimizer import MomentumSGD

logger = get_formatted_logger()

LOSS_KEYS = ("l_c", "l_e", "l_adv", "l_m", "total")


@dataclass
class TrainResult:
    model: MlMsdaModel
    metrics: list[MetricsRecord]
    optimizer: MomentumSGD
    run_dir: Optional[Path] = None


def source_only_config(cfg: RunConfig) -> RunConfig:
    return cfg.with_overrides(**SOURCE_ONLY_OVERRIDES)


def resolve_arch(arch: ArchConfig, ds: MultiDomainDataset) -> ArchConfig:
    """The configured architecture with class count, input width and source count from ``ds``."""
    update = {
        "num_classes": ds.num_classes,
        "input_dim": ds.input_dim,
        "num_sources": ds.num_sources,
    }
    changed = {k: v for k, v in update.items() if getattr(arch, k) != v}
    if changed:
        logger.warning(f"Dataset overrides configured architecture: {changed}")
    return arch.model_copy(update=update)


def adv_scale_at(epoch: int, step: int, steps_per_epoch: int, warmup: bool) -> float:
    """Gradient reversal scale: a linear 0 -> 1 ramp over the first epoch when warming up."""
    if warmup and epoch == 0:
        return step / steps_per_epoch
    return 1.0


def train_step(
    model: MlMsdaModel,
    batch: StepBatch,
    hp: HyperParams,
    flags: AblationFlags,
    opt: MomentumSGD,
    adv_scale: float = 1.0,
) -> LossBundle:
    """One forward pass over all subnetworks, one backward pass, one momentum SGD update."""
    hp = hp.effective(flags)
    model.zero_grad()
    try:
        with Tape() as tape:
            outputs = forward_all(model, batch.source_inputs(), batch.target_x, flags, adv_scale)
            bundle = compute_losses(outputs, batch.source_labels(), hp)
        backward(bundle.objective, tape)
    except NumericError as exc:
        raise TrainingDivergedError(
            f"training diverged: {exc}",
            epoch=opt.state.epoch,
            step=opt.state.step,
            components=exc.components,
        ) from exc
    opt.step()
    model.zero_grad()
    return bundle


def _probe_due(cfg: RunConfig, epoch: int) -> bool:
    last = epoch == cfg.optimizer.epochs - 1
    periodic = cfg.probe_interval > 0 and (epoch + 1) % cfg.probe_interval == 0
    return last or periodic


def epoch_record(
    model: MlMsdaModel,
    ds: MultiDomainDataset,
    cfg: RunConfig,
    epoch: int,
    steps: int,
    learning_rate: float,
    losses: dict[str, float],
    seconds: Optional[float] = None,
) -> MetricsRecord:
    per_mode, per_subnetwork = target_accuracies(model, ds)
    return MetricsRecord(
        config_hash=cfg.config_hash(),
        seed=cfg.seed,
        epoch=epoch,
        steps=steps,
        learning_rate=learning_rate,
        source_accuracy=source_accuracies(model, ds),
        target_accuracy=per_mode,
        subnetwork_target_accuracy=per_subnetwork,
        discriminator_accuracy=discriminator_accuracy(model, ds, cfg.probe_size),
        probe_accuracy=(
            probe_discriminator(model, ds, cfg.probe_size, cfg.seed) if _probe_due(cfg, epoch) else None
        ),
        wall_clock_seconds=seconds,
        **losses,
    )


def _restore(model: MlMsdaModel, opt: MomentumSGD, path: str | Path) -> int:
    checkpoint = load_checkpoint(path)
    if checkpoint.model.arch != model.arch:
        raise CheckpointError("checkpoint architecture differs from the model being trained")
    if checkpoint.optimizer is None:
        raise CheckpointError(f"{path} holds no optimizer state to resume from")
    for (_, param), (_, stored) in zip(model.parameters(), checkpoint.model.parameters()):
        param.data = stored.data
    opt.load_state_dict(checkpoint.optimizer)
    return int(checkpoint.optimizer["epoch"])


def train(
    model: MlMsdaModel,
    ds: MultiDomainDataset,
    cfg: RunConfig,
    run_dir: Optional[str | Path] = None,
    resume_from: Optional[str | Path] = None,
) -> TrainResult:
    """Run ``cfg.optimizer.epochs`` epochs, emitting one metrics record per epoch.

    With ``run_dir`` the resolved config, ``metrics.jsonl``, ``timings.jsonl``, ``run.log``,
    periodic checkpoints and ``model.json`` (final weights plus optimizer state) are written
    there. ``resume_from`` continues from such a checkpoint and reproduces the stream an
    uninterrupted run would have written.
    """
    check_compatible(model, ds)
    config_hash = cfg.config_hash()
    epochs = cfg.optimizer.epochs

    opt = MomentumSGD(model.parameters(), cfg.optimizer.momentum, cfg.optimizer.lr_schedule)
    sampler = DomainSampler(
        ds.training_view(),
        cfg.optimizer.batch_size,
        np.random.default_rng(cfg.seed),
        cfg.dataset.equal_domain_sampling,
    )

    start_epoch = 0
    if resume_from is not None:
        start_epoch = _restore(model, opt, resume_from)
        # Replay the sampler so the resumed epochs see the same batches
        for _ in range(start_epoch):
            for _ in sampler.epoch_batches():
                pass

    handler: Optional[JSONRunHandler] = None
    if run_dir is not None:
        run_dir = Path(run_dir)
        _, _, handler = setup_run_logging(run_dir, config_hash, cfg.verbose, append=resume_from is not None)
        cfg.save(run_dir / "config.json")
        handler.log_event("run_started", {"seed": cfg.seed, "epochs": epochs, "start_epoch": start_epoch})

    logger.info(
        f"Training {model.arch.num_sources} branches + guidance for {epochs} epochs "
        f"({sampler.steps_per_epoch} steps/epoch, config {config_hash}, seed {cfg.seed})"
    )

    metrics: list[MetricsRecord] = []
    try:
        for epoch in range(start_epoch, epochs):
            learning_rate = opt.set_epoch(epoch)
            started = time.perf_counter()
            sums = dict.fromkeys(LOSS_KEYS, 0.0)
            steps = 0
            for step, batch in enumerate(sampler.epoch_batches()):
                scale = adv_scale_at(epoch, step, sampler.steps_per_epoch, cfg.optimizer.adv_warmup)
                bundle = train_step(model, batch, cfg.hp, cfg.flags, opt, scale)
                for key, value in bundle.components().items():
                    sums[key] += value
                steps += 1
            seconds = time.perf_counter() - started

            losses = {key: value / steps for key, value in sums.items()}
            record = epoch_record(model, ds, cfg, epoch, steps, learning_rate, losses, seconds)
            metrics.append(record)
            logger.info(
                f"epoch {epoch + 1}/{epochs} lr={learning_rate:g} total={record.total:.4f} "
                f"target[{cfg.flags.inference_mode.value}]="
                f"{record.target_accuracy[cfg.flags.inference_mode.value]:.4f} ({seconds:.1f}s)"
            )

            if handler is not None:
                handler.log_metrics(record.stream_dict())
                handler.log_timing(epoch, seconds)
                if cfg.checkpoint_every and (epoch + 1) % cfg.checkpoint_every == 0:
                    _save(model, opt, run_dir / "checkpoints" / f"epoch_{epoch + 1:03d}.json", cfg, epoch + 1)

        if handler is not None:
            _save(model, opt, run_dir / "model.json", cfg, max(epochs, start_epoch))
            if metrics:
                handler.update_content("final", metrics[-1].stream_dict())
            handler.log_event("run_finished", {"epochs_run": len(metrics)})
    except TrainingDivergedError as exc:
        if handler is not None:
            handler.log_event("run_diverged", {"error": str(exc)})
        raise
    finally:
        if handler is not None:
            close_run_logging()

    return TrainResult(model=model, metrics=metrics, optimizer=opt, run_dir=run_dir)


def _save(model: MlMsdaModel, opt: MomentumSGD, path: Path, cfg: RunConfig, next_epoch: int) -> None:
    state = opt.state_dict()
    state["epoch"] = next_epoch
    save_checkpoint(
        model,
        path,
        metadata={"config_hash": cfg.config_hash(), "seed": cfg.seed, "epoch": next_epoch},
        optimizer=state,
    )


def run_training(
    cfg: RunConfig,
    ds: Optional[MultiDomainDataset] = None,
    run_dir: Optional[str | Path] = None,
    resume_from: Optional[str | Path] = None,
) -> TrainResult:
    """Build the dataset and a fresh model from ``cfg`` (seeded by ``cfg.seed``) and train it."""
    ds = ds if ds is not None else dataset_from_config(cfg.dataset, tag=cfg.config_hash())
    model = init_model(resolve_arch(cfg.arch, ds), cfg.seed, branch_keys=ds.source_keys())
    return train(model, ds, cfg, run_dir=run_dir, resume_from=resume_from)
