import json
import math

import pytest

import ml_msda.evaluation.ablation as ablation
from ml_msda.evaluation import ROWS, run_ablations, run_ablations_async, variant_config
from ml_msda.evaluation.ablation import build_table, load_result, result_path
from ml_msda.utils.enum import InferenceMode, VariantName

LABELS = [
    "ML-w/o condition-adv",
    "ML-w/o L_E",
    "ML-w/o L_M",
    "ML-guidance-inf",
    "ML-branch-average-inf",
    "ML-MSDA (full)",
]


def fake_results(seeds, variants=("full", "no_condition_adv", "no_entropy", "no_mutual", "source_only")):
    results = {}
    for variant in variants:
        for seed in seeds:
            accuracy = 0.5 + 0.1 * seed
            results[(variant, seed)] = {
                "variant": variant,
                "seed": seed,
                "target_accuracy": {mode.value: accuracy for mode in InferenceMode},
            }
    return results


def test_table_rows_and_labels(smoke_config):
    table = build_table(smoke_config, [0], fake_results([0]), include_source_only=False)
    assert [row.label for row in table.rows] == LABELS
    with_reference = build_table(smoke_config, [0], fake_results([0]), include_source_only=True)
    assert [row.label for row in with_reference.rows] == LABELS + ["Source-only"]


def test_rows_read_their_inference_mode(smoke_config):
    results = fake_results([0])
    results[("full", 0)]["target_accuracy"] = {"ensemble": 0.9, "guidance_only": 0.8, "branch_average": 0.7}
    table = build_table(smoke_config, [0], results, include_source_only=False)
    assert table.row(VariantName.Full).mean == 0.9
    assert table.row(VariantName.GuidanceInference).mean == 0.8
    assert table.row("ML-branch-average-inf").mean == 0.7


def test_single_seed_has_zero_spread(smoke_config):
    table = build_table(smoke_config, [3], fake_results([3]), include_source_only=False)
    assert all(row.std == 0.0 for row in table.rows)


def test_mean_and_population_std(smoke_config):
    table = build_table(smoke_config, [0, 1], fake_results([0, 1]), include_source_only=False)
    row = table.row(VariantName.Full)
    assert row.mean == pytest.approx(0.55)
    assert row.std == pytest.approx(0.05)


def test_table_output_formats(smoke_config):
    table = build_table(smoke_config, [0, 1], fake_results([0, 1]), include_source_only=False, failures=["x"])
    lines = table.to_tsv().splitlines()
    assert lines[0] == "variant\tmean_accuracy\tstd_accuracy\truns\tconfig_hash"
    assert lines[1] == f"ML-w/o condition-adv\t55.00\t5.00\t2\t{smoke_config.config_hash()}"
    text = table.to_text()
    assert "ML-MSDA (full)" in text and "55.00 ± 5.00" in text
    assert text.rstrip().endswith("FAILED: x")


def test_missing_runs_leave_rows_short(smoke_config):
    results = fake_results([0, 1])
    del results[("no_mutual", 1)]
    table = build_table(smoke_config, [0, 1], results, include_source_only=False)
    assert len(table.row(VariantName.WithoutMutual).accuracies) == 1
    assert math.isnan(build_table(smoke_config, [0], {}, include_source_only=False).rows[0].mean)


def test_every_row_names_a_trained_variant():
    assert {variant for _, variant, _ in ROWS} == set(ablation.TRAINED_VARIANTS)


def test_variant_config(smoke_config):
    cfg = variant_config(smoke_config, "no_entropy", 4)
    assert cfg.flags.no_entropy and cfg.seed == 4 and not cfg.verbose
    source_only = variant_config(smoke_config, "source_only", 0)
    assert source_only.hp.lambda_ == 0.0
    with pytest.raises(ValueError):
        variant_config(smoke_config, "no_such_variant", 0)


def test_load_result_checks_the_config_hash(tmp_path):
    path = tmp_path / "full_seed0.json"
    assert load_result(path, "abc") is None
    path.write_text(json.dumps({"config_hash": "abc"}), encoding="utf-8")
    assert load_result(path, "abc") == {"config_hash": "abc"}
    assert load_result(path, "def") is None


@pytest.fixture
def one_epoch(smoke_config):
    return smoke_config.with_overrides(EPOCHS=1)


@pytest.mark.asyncio
async def test_ablation_suite_runs_every_variant(one_epoch, tmp_path):
    table = await run_ablations_async(one_epoch, [0], tmp_path, max_workers=1, use_processes=False)
    assert table.failures == []
    assert [row.label for row in table.rows] == LABELS
    assert all(len(row.accuracies) == 1 for row in table.rows)
    for variant in ("full", "no_condition_adv", "no_entropy", "no_mutual"):
        result = json.loads(result_path(tmp_path, variant, 0).read_text(encoding="utf-8"))
        assert result["config_hash"] == variant_config(one_epoch, variant, 0).config_hash()
        assert (tmp_path / "runs" / f"{variant}_seed0" / "metrics.jsonl").exists()
    assert not result_path(tmp_path, "source_only", 0).exists()
    # Guidance and branch-average rows reuse the full model's runs
    full = table.results["full"][0]["target_accuracy"]
    assert table.row(VariantName.GuidanceInference).accuracies == [full["guidance_only"]]


@pytest.mark.asyncio
async def test_completed_runs_are_not_repeated(one_epoch, tmp_path, monkeypatch):
    first = await run_ablations_async(one_epoch, [0], tmp_path, use_processes=False)

    def refuse(*args):
        raise AssertionError("a completed run was trained again")

    monkeypatch.setattr(ablation, "run_variant", refuse)
    again = await run_ablations_async(one_epoch, [0], tmp_path, use_processes=False)
    assert again.failures == []
    assert again.to_tsv() == first.to_tsv()


def test_failed_runs_are_reported(one_epoch, tmp_path, monkeypatch):
    original = ablation.run_variant

    def flaky(flat_config, variant, seed, path):
        if variant == "no_entropy":
            raise RuntimeError("diverged")
        return original(flat_config, variant, seed, path)

    monkeypatch.setattr(ablation, "run_variant", flaky)
    table = run_ablations(one_epoch, [0], tmp_path, use_processes=False)
    assert table.failures == ["no_entropy seed 0: RuntimeError: diverged"]
    assert table.row(VariantName.WithoutEntropy).accuracies == []
    assert len(table.row(VariantName.Full).accuracies) == 1
    assert not result_path(tmp_path, "no_entropy", 0).exists()


def test_ablations_need_a_seed(one_epoch, tmp_path):
    with pytest.raises(ValueError):
        run_ablations(one_epoch, [], tmp_path)
