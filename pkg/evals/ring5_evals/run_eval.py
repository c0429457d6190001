import argparse
import json
from pathlib import Path
from typing import Any

import pandas as pd
from dotenv import load_dotenv

from ml_msda.config import Config, RunConfig
from ml_msda.evaluation import run_ablations
from ml_msda.evaluation.ablation import AblationTable
from ml_msda.utils.enum import VariantName

# Full ML-MSDA must beat the source-only baseline by this many accuracy points.
MIN_GAIN = 0.05


def runs_frame(table: AblationTable) -> pd.DataFrame:
    """One row per (variant, seed) run with its accuracies and mean branch probe accuracy."""
    rows: list[dict[str, Any]] = []
    for variant, results in table.results.items():
        for result in results:
            probe = result.get("probe_accuracy") or {}
            branches = [value for name, value in probe.items() if name.startswith("branch")]
            rows.append({
                "variant": variant,
                "seed": result["seed"],
                **{f"acc_{mode}": value for mode, value in result["target_accuracy"].items()},
                "branch_probe": sum(branches) / len(branches) if branches else float("nan"),
            })
    return pd.DataFrame(rows).sort_values(["variant", "seed"]).reset_index(drop=True)


def direction_checks(table: AblationTable, runs: pd.DataFrame) -> dict[str, dict[str, Any]]:
    full = table.row(VariantName.Full).mean
    source_only = table.row(VariantName.SourceOnly).mean
    probes = runs.groupby("variant")["branch_probe"].mean()
    return {
        "beats_source_only": {
            "full": full,
            "source_only": source_only,
            "gain": full - source_only,
            "passed": full - source_only >= MIN_GAIN,
        },
        "full_vs_without_mutual": {
            "full": full,
            "variant": table.row(VariantName.WithoutMutual).mean,
            "passed": full >= table.row(VariantName.WithoutMutual).mean,
        },
        "full_vs_branch_average": {
            "full": full,
            "variant": table.row(VariantName.BranchAverageInference).mean,
            "passed": full >= table.row(VariantName.BranchAverageInference).mean,
        },
        "alignment_probe": {
            "full": float(probes.get("full", float("nan"))),
            "source_only": float(probes.get("source_only", float("nan"))),
            "passed": bool(probes.get("full", 1.0) < probes.get("source_only", 0.0)),
        },
    }


def main(config: str, seeds: list[int], out: str, workers: int, epochs: int | None) -> bool:
    values = Config(config).values
    if epochs is not None:
        values["EPOCHS"] = epochs
    values["MAX_WORKERS"] = workers
    cfg = RunConfig.from_flat(values)
    out_dir = Path(out) / f"ring5_{cfg.config_hash()}"

    print(f"Running ring5 evaluation on seeds {seeds} (config {cfg.config_hash()})...")
    table = run_ablations(cfg, seeds, out_dir, include_source_only=True)
    runs = runs_frame(table)
    checks = direction_checks(table, runs)

    runs.to_csv(out_dir / "runs.csv", index=False)
    (out_dir / "ablation.tsv").write_text(table.to_tsv(), encoding="utf-8")
    (out_dir / "checks.json").write_text(json.dumps(checks, indent=2) + "\n", encoding="utf-8")

    print("\n=== Evaluation Summary ===")
    print(table.to_text(), end="")
    print("\n=== Per-variant means ===")
    print(runs.drop(columns="seed").groupby("variant").agg(["mean", "std"]).round(4).to_string())
    print("\n=== Direction checks ===")
    for name, check in checks.items():
        print(f"{'PASS' if check['passed'] else 'FAIL'}  {name}: "
              + ", ".join(f"{k}={v:.4f}" for k, v in check.items() if k != "passed"))
    if table.failures:
        print(f"\n{len(table.failures)} run(s) failed")
    return not table.failures and all(check["passed"] for check in checks.values())


if __name__ == "__main__":
    load_dotenv()
    parser = argparse.ArgumentParser(description="Run the ring5 adaptation and ablation experiments")
    parser.add_argument("--config", type=str, default="ring5",
                        help="Config file path or bundled config name. Default is ring5.")
    parser.add_argument("--seeds", type=int, default=5,
                        help="Number of seeds, run as 0..n-1. Default is 5.")
    parser.add_argument("--workers", type=int, default=1, help="Parallel training runs.")
    parser.add_argument("--epochs", type=int, default=None, help="Override EPOCHS.")
    parser.add_argument("--out", type=str, default="./outputs/evals", help="Output directory.")
    args = parser.parse_args()

    try:
        passed = main(args.config, list(range(args.seeds)), args.out, args.workers, args.epochs)
    except KeyboardInterrupt:
        print("\nEvaluation interrupted by user")
        raise SystemExit(130)
    raise SystemExit(0 if passed else 1)
