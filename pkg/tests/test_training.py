import json

import numpy as np
import pytest

import ml_msda.training.trainer as trainer
from ml_msda.autodiff import Tape, Tensor, backward
from ml_msda.config import Config
from ml_msda.data import DomainSampler, MultiDomainDataset
from ml_msda.errors import CheckpointError, NumericError, TrainingDivergedError
from ml_msda.losses import adversarial_loss_j, adversarial_total
from ml_msda.model import forward_all, init_model, load_checkpoint, save_checkpoint
from ml_msda.training import (
    MomentumSGD,
    adv_scale_at,
    lr_at,
    resolve_arch,
    run_training,
    source_only_config,
    train_step,
)
from ml_msda.utils.enum import InferenceMode
from ml_msda.utils.validators import AblationFlags, HyperParams


def test_learning_rate_schedule():
    assert [lr_at(e) for e in (0, 9, 10, 19, 20, 25)] == [0.01, 0.01, 0.001, 0.001, 0.0001, 0.0001]
    with pytest.raises(ValueError):
        lr_at(-1)


def test_momentum_update_by_hand():
    w = Tensor([1.0], requires_grad=True, name="w")
    opt = MomentumSGD([("w", w)], momentum=0.9)
    for _ in range(2):
        w.grad = np.array([2.0])
        opt.step()
    # v1 = 2, w1 = 0.98; v2 = 0.9 * 2 + 2 = 3.8, w2 = 0.98 - 0.038
    np.testing.assert_allclose(opt.state.velocity["w"], [3.8])
    np.testing.assert_allclose(w.data, [0.942])
    assert opt.state.step == 2
    assert opt.set_epoch(12) == 0.001


def test_optimizer_state_round_trip():
    w = Tensor([1.0, 2.0], requires_grad=True, name="w")
    opt = MomentumSGD([("w", w)])
    w.grad = np.array([1.0, -1.0])
    opt.step()
    other = MomentumSGD([("w", Tensor([0.0, 0.0], requires_grad=True))])
    other.load_state_dict(opt.state_dict())
    np.testing.assert_array_equal(other.state.velocity["w"], opt.state.velocity["w"])
    assert other.state.step == 1
    with pytest.raises(ValueError):
        MomentumSGD([("v", w)]).load_state_dict(opt.state_dict())


def test_adv_scale_warmup():
    assert adv_scale_at(0, 0, 4, warmup=True) == 0.0
    assert adv_scale_at(0, 2, 4, warmup=True) == 0.5
    assert adv_scale_at(1, 0, 4, warmup=True) == 1.0
    assert adv_scale_at(0, 0, 4, warmup=False) == 1.0


def test_source_only_config(smoke_config):
    cfg = source_only_config(smoke_config)
    assert (cfg.hp.alpha, cfg.hp.beta, cfg.hp.lambda_) == (0.0, 0.0, 0.0)
    assert cfg.flags.inference_mode is InferenceMode.GuidanceOnly
    assert cfg.arch == smoke_config.arch


def test_resolve_arch_takes_shape_from_dataset(tiny_arch, tiny_dataset):
    arch = resolve_arch(tiny_arch.model_copy(update={"num_sources": 4, "num_classes": 5}), tiny_dataset)
    assert (arch.num_sources, arch.num_classes, arch.input_dim) == (2, 3, 2)


def parameters_by_name(model):
    return {name: param.data.copy() for name, param in model.parameters()}


def test_zero_weights_leave_discriminators_untouched(tiny_arch, tiny_dataset, rng):
    model = init_model(tiny_arch, 0)
    batch = DomainSampler(tiny_dataset.training_view(), 8, rng).next()
    opt = MomentumSGD(model.parameters())
    before = parameters_by_name(model)
    train_step(model, batch, HyperParams(alpha=0.0, beta=0.0, lambda_=0.0), AblationFlags(), opt)
    after = parameters_by_name(model)
    for name in before:
        if ".discriminator." in name:
            np.testing.assert_array_equal(after[name], before[name])
    assert not np.array_equal(after["trunk.0.weight"], before["trunk.0.weight"])


def adversarial_value(model, batch):
    outputs = forward_all(model, batch.source_inputs(), batch.target_x)
    return adversarial_total([adversarial_loss_j(o.source_domain, o.target_domain) for o in outputs]).item()


@pytest.mark.parametrize("update_discriminators", [True, False])
def test_gradient_reversal_sets_the_direction_of_each_player(tiny_arch, tiny_dataset, update_discriminators):
    model = init_model(tiny_arch, 1)
    batch = DomainSampler(tiny_dataset.training_view(), 8, np.random.default_rng(0)).next()
    start = adversarial_value(model, batch)

    with Tape() as tape:
        outputs = forward_all(model, batch.source_inputs(), batch.target_x)
        loss = -adversarial_total([adversarial_loss_j(o.source_domain, o.target_domain) for o in outputs])
    backward(loss, tape)
    for name, param in model.parameters():
        if param.grad is None or (".discriminator." in name) != update_discriminators:
            continue
        param.data = param.data - 1e-4 * param.grad

    moved = adversarial_value(model, batch)
    # Discriminators climb l_adv; extractors, seeing the reversed gradient, descend it
    if update_discriminators:
        assert moved > start
    else:
        assert moved < start


def test_zero_epochs_write_no_metrics(smoke_config, tmp_path):
    result = run_training(smoke_config.with_overrides(EPOCHS=0), run_dir=tmp_path)
    assert result.metrics == []
    assert (tmp_path / "metrics.jsonl").read_text(encoding="utf-8") == ""
    assert (tmp_path / "model.json").exists()


def test_one_record_per_epoch(smoke_config, tmp_path):
    result = run_training(smoke_config, run_dir=tmp_path)
    lines = (tmp_path / "metrics.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(result.metrics) == len(lines) == 2
    first, last = (json.loads(line) for line in lines)
    assert (first["epoch"], last["epoch"]) == (0, 1)
    assert first["config_hash"] == smoke_config.config_hash()
    assert "wall_clock_seconds" not in first
    assert set(first["target_accuracy"]) == {mode.value for mode in InferenceMode}
    assert set(first["subnetwork_target_accuracy"]) == {"branch1", "branch2", "guidance"}
    # Alignment probes run on the final epoch only by default
    assert first["probe_accuracy"] is None
    assert set(last["probe_accuracy"]) == {"branch1", "branch2", "guidance"}
    assert len((tmp_path / "timings.jsonl").read_text(encoding="utf-8").splitlines()) == 2


def test_identical_runs_write_identical_metrics(smoke_config, tmp_path):
    cfg = smoke_config.with_overrides(EPOCHS=1)
    run_training(cfg, run_dir=tmp_path / "a")
    run_training(cfg, run_dir=tmp_path / "b")
    assert (tmp_path / "a" / "metrics.jsonl").read_bytes() == (tmp_path / "b" / "metrics.jsonl").read_bytes()
    assert (tmp_path / "a" / "model.json").read_bytes() == (tmp_path / "b" / "model.json").read_bytes()


def test_resume_matches_an_uninterrupted_run(smoke_config, tmp_path):
    cfg = smoke_config.with_overrides(CHECKPOINT_EVERY=1)
    run_training(cfg, run_dir=tmp_path / "full")
    checkpoint = tmp_path / "full" / "checkpoints" / "epoch_001.json"
    assert load_checkpoint(checkpoint).optimizer["epoch"] == 1

    resumed = run_training(cfg, run_dir=tmp_path / "resumed", resume_from=checkpoint)
    assert [record.epoch for record in resumed.metrics] == [1]
    full_lines = (tmp_path / "full" / "metrics.jsonl").read_text(encoding="utf-8").splitlines()
    resumed_lines = (tmp_path / "resumed" / "metrics.jsonl").read_text(encoding="utf-8").splitlines()
    assert resumed_lines == full_lines[1:]
    assert (tmp_path / "resumed" / "model.json").read_bytes() == (tmp_path / "full" / "model.json").read_bytes()


def test_resume_needs_optimizer_state(smoke_config, tmp_path):
    init_cfg = smoke_config.with_overrides(EPOCHS=0)
    run_training(init_cfg, run_dir=tmp_path / "init")
    bare = load_checkpoint(tmp_path / "init" / "model.json")
    save_checkpoint(bare.model, tmp_path / "bare.json")
    with pytest.raises(CheckpointError):
        run_training(smoke_config, resume_from=tmp_path / "bare.json")


def test_divergence_is_reported_with_position(smoke_config, tmp_path, monkeypatch):
    def diverge(*args, **kwargs):
        raise NumericError("l_c is nan", components={"l_c": float("nan"), "l_e": 0.5})

    monkeypatch.setattr(trainer, "compute_losses", diverge)
    with pytest.raises(TrainingDivergedError) as info:
        run_training(smoke_config, run_dir=tmp_path)
    assert (info.value.epoch, info.value.step) == (0, 0)
    assert info.value.components["l_e"] == 0.5
    assert "l_c=nan" in str(info.value)
    events = json.loads((tmp_path / "events.json").read_text(encoding="utf-8"))["events"]
    assert [event["type"] for event in events] == ["run_started", "run_diverged"]


@pytest.mark.slow
def test_classification_loss_falls(smoke_config):
    result = run_training(source_only_config(smoke_config.with_overrides(EPOCHS=4)))
    assert result.metrics[-1].l_c < result.metrics[0].l_c


def swapped_sources(ds):
    return MultiDomainDataset(
        num_classes=ds.num_classes,
        input_dim=ds.input_dim,
        sources=ds.sources[::-1],
        target=ds.target,
        tag=ds.tag,
    )


def test_branch_trajectories_follow_their_source_domain(smoke_config, tiny_dataset):
    # No mutual term and no shared trunk: each branch depends on its own source only
    cfg = smoke_config.with_overrides(SHARE_TRUNK=False, NO_MUTUAL=True, EPOCHS=1, BATCH_SIZE=8)
    forward = run_training(cfg, ds=tiny_dataset).model
    reverse = run_training(cfg, ds=swapped_sources(tiny_dataset)).model

    for j, k in ((1, 2), (2, 1)):
        ours, theirs = forward.subnetwork(j), reverse.subnetwork(k)
        layers = zip(
            [*ours.extractor, ours.classifier, *ours.discriminator],
            [*theirs.extractor, theirs.classifier, *theirs.discriminator],
        )
        for a, b in layers:
            np.testing.assert_array_equal(a.weight.data, b.weight.data)
            np.testing.assert_array_equal(a.bias.data, b.bias.data)


def test_branch_init_is_keyed_by_source(tiny_arch):
    separate = tiny_arch.model_copy(update={"share_trunk": False})
    a = init_model(separate, 5, branch_keys=[11, 22])
    b = init_model(separate, 5, branch_keys=[22, 11])
    np.testing.assert_array_equal(a.subnetwork(1).classifier.weight.data, b.subnetwork(2).classifier.weight.data)
    np.testing.assert_array_equal(a.subnetwork(3).classifier.weight.data, b.subnetwork(3).classifier.weight.data)
    with pytest.raises(ValueError):
        init_model(separate, 5, branch_keys=[11])


def mean_target_accuracy(cfg, seeds):
    mode = cfg.flags.inference_mode.value
    return float(np.mean([run_training(cfg.with_overrides(SEED=s)).metrics[-1].target_accuracy[mode] for s in seeds]))


@pytest.mark.slow
def test_adaptation_beats_source_only_on_ring5():
    cfg = Config("ring5").run_config
    seeds = range(5)
    gain = mean_target_accuracy(cfg, seeds) - mean_target_accuracy(source_only_config(cfg), seeds)
    assert gain >= 0.05
