"""
Command line interface for ML-MSDA experiments.

Usage:

```shell
python cli.py generate --config ring5 --out outputs/ring5
python cli.py train --config ring5 --seed 0 --out outputs/run0
python cli.py eval --checkpoint outputs/run0/model.json --dataset outputs/ring5/dataset.mlmsda --mode ensemble
python cli.py ablate --config ring5 --seeds 0,1,2 --workers 3
```

Every subcommand reads a JSON/JSON5 config (a path or the name of a bundled config) merged
over the defaults; ``MLMSDA_<KEY>`` environment variables override single keys.
"""
import argparse
import json
import sys
from argparse import RawTextHelpFormatter
from pathlib import Path
from typing import Any, Optional, Sequence

from dotenv import load_dotenv

from ml_msda.config import Config, RunConfig
from ml_msda.data import dataset_from_config, load_dataset, save_dataset
from ml_msda.errors import (
    CheckpointError,
    CompatibilityError,
    ConfigError,
    DatasetFormatError,
    TrainingDivergedError,
)
from ml_msda.evaluation import check_compatible, dump_features, evaluate, run_ablations
from ml_msda.model import load_checkpoint
from ml_msda.training import run_training
from ml_msda.utils.enum import InferenceMode
from ml_msda.utils.logger import get_formatted_logger

logger = get_formatted_logger()

HANDLED_ERRORS = (
    CheckpointError,
    CompatibilityError,
    ConfigError,
    DatasetFormatError,
    TrainingDivergedError,
    OSError,
    ValueError,
)

# =============================================================================
# CLI
# =============================================================================

cli = argparse.ArgumentParser(
    description="Multi-source domain adaptation with mutual learning: generate, train, eval, ablate.",
    formatter_class=RawTextHelpFormatter)

subcommands = cli.add_subparsers(dest="command", required=True)

# =====================================
# Shared args
# =====================================

def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        type=str,
        default=None,
        help="Config file path or bundled config name. Options:\n" + "\n".join(
            f"  {name}" for name in Config.list_available_configs()
        ))
    parser.add_argument(
        "--out",
        type=str,
        default=None,
        help="Output directory (default: OUTPUT_DIR from the config).")


def _seed_list(text: str) -> list[int]:
    try:
        seeds = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers, got '{text}'")
    if not seeds:
        raise argparse.ArgumentTypeError("at least one seed is required")
    return seeds


# =====================================
# Command: generate
# =====================================

generate_cli = subcommands.add_parser(
    "generate", help="Write the configured synthetic benchmark to a dataset file.",
    formatter_class=RawTextHelpFormatter)
_add_config_args(generate_cli)
generate_cli.add_argument("--seed", type=int, default=None, help="Dataset seed (DATA_SEED).")

# =====================================
# Command: train
# =====================================

train_cli = subcommands.add_parser(
    "train", help="Train a model; writes the resolved config, metrics.jsonl and checkpoints.",
    formatter_class=RawTextHelpFormatter)
_add_config_args(train_cli)
train_cli.add_argument("--seed", type=int, default=None, help="Training seed (SEED).")
train_cli.add_argument("--dataset", type=str, default=None, help="Dataset file to train on (DATASET_PATH).")
train_cli.add_argument("--epochs", type=int, default=None, help="Number of epochs (EPOCHS).")
train_cli.add_argument("--checkpoint", type=str, default=None, help="Checkpoint to resume training from.")

# =====================================
# Command: eval
# =====================================

eval_cli = subcommands.add_parser(
    "eval", help="Evaluate a checkpoint; prints the report and writes eval_report.json.",
    formatter_class=RawTextHelpFormatter)
_add_config_args(eval_cli)
eval_cli.add_argument("--checkpoint", type=str, required=True, help="Model checkpoint (model.json).")
eval_cli.add_argument(
    "--dataset", type=str, default=None,
    help="Dataset file; the configured benchmark is generated when omitted.")
eval_cli.add_argument(
    "--mode",
    type=str,
    choices=[mode.value for mode in InferenceMode],
    default=InferenceMode.Ensemble.value,
    help="Inference mode the headline accuracy is reported for.")
eval_cli.add_argument("--seed", type=int, default=None, help="Seed of the alignment probe split.")
eval_cli.add_argument(
    "--features", action="store_true",
    help="Also write per-sample guidance features of the test splits to features.csv.")

# =====================================
# Command: ablate
# =====================================

ablate_cli = subcommands.add_parser(
    "ablate", help="Train the full model and its variants over several seeds.",
    formatter_class=RawTextHelpFormatter)
_add_config_args(ablate_cli)
ablate_cli.add_argument("--seeds", type=_seed_list, default=[0], help="Comma-separated seeds, e.g. 0,1,2.")
ablate_cli.add_argument("--epochs", type=int, default=None, help="Number of epochs (EPOCHS).")
ablate_cli.add_argument("--workers", type=int, default=None, help="Parallel training runs (MAX_WORKERS).")
ablate_cli.add_argument(
    "--source-only", action="store_true", help="Add the Source-only reference row.")

# =============================================================================
# Commands
# =============================================================================

def resolve_config(args: argparse.Namespace, **overrides: Optional[Any]) -> RunConfig:
    values = Config(args.config).values
    values.update({key: value for key, value in overrides.items() if value is not None})
    return RunConfig.from_flat(values)


def cmd_generate(args: argparse.Namespace) -> int:
    cfg = resolve_config(args, DATA_SEED=args.seed).with_overrides(DATASET_PATH=None)
    out = Path(args.out or cfg.output_dir)
    ds = dataset_from_config(cfg.dataset, tag=cfg.config_hash())
    path = save_dataset(ds, out / "dataset.mlmsda")
    manifest = {
        "config_hash": cfg.config_hash(),
        "dataset": cfg.dataset.model_dump(mode="json"),
        "domains": [
            {"name": domain.name, "train": len(domain.train), "test": len(domain.test)}
            for domain in ds.domains
        ],
        "num_classes": ds.num_classes,
        "input_dim": ds.input_dim,
    }
    (out / "dataset_manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"Dataset written to '{path}'")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    cfg = resolve_config(args, SEED=args.seed, EPOCHS=args.epochs, DATASET_PATH=args.dataset)
    run_dir = Path(args.out or Path(cfg.output_dir) / f"train_{cfg.config_hash()}_seed{cfg.seed}")
    result = run_training(cfg, run_dir=run_dir, resume_from=args.checkpoint)
    if result.metrics:
        final = result.metrics[-1]
        mode = cfg.flags.inference_mode.value
        print(f"Final target accuracy ({mode}): {final.target_accuracy[mode]:.4f}")
    print(f"Run written to '{run_dir}'")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    checkpoint = load_checkpoint(args.checkpoint)
    if args.dataset:
        ds = load_dataset(args.dataset)
    else:
        cfg = resolve_config(args)
        ds = dataset_from_config(cfg.dataset, tag=cfg.config_hash())
    check_compatible(checkpoint.model, ds)

    config_hash = str(checkpoint.metadata.get("config_hash", ""))
    seed = args.seed if args.seed is not None else int(checkpoint.metadata.get("seed", 0))
    report = evaluate(checkpoint.model, ds, InferenceMode(args.mode), config_hash=config_hash, seed=seed)

    out = Path(args.out or Path(args.checkpoint).parent)
    out.mkdir(parents=True, exist_ok=True)
    text = report.dumps() + "\n"
    (out / "eval_report.json").write_text(text, encoding="utf-8")
    if args.features:
        dump_features(checkpoint.model, ds, out / "features.csv", config_hash=config_hash)
    sys.stdout.write(text)
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    cfg = resolve_config(args, EPOCHS=args.epochs, MAX_WORKERS=args.workers)
    out = Path(args.out or Path(cfg.output_dir) / f"ablation_{cfg.config_hash()}")
    table = run_ablations(cfg, args.seeds, out, include_source_only=args.source_only)
    (out / "ablation.tsv").write_text(table.to_tsv(), encoding="utf-8")
    (out / "ablation.txt").write_text(table.to_text(), encoding="utf-8")
    print(table.to_text(), end="")
    if table.failures:
        print(f"{len(table.failures)} ablation run(s) failed", file=sys.stderr)
        return 1
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
}

# =============================================================================
# Main
# =============================================================================

def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand; 0 when all requested work completed, 1 on failure, 2 on bad arguments."""
    try:
        args = cli.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except HANDLED_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    load_dotenv()
    sys.exit(main())
