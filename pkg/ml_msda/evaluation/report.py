import json
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from ..errors import CompatibilityError
from ..model.network import MlMsdaModel, subnetwork_name
from ..utils.enum import InferenceMode
from .inference import accuracy, combine, predict_all
from .probe import discriminator_accuracy, probe_discriminator


class EvalReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    config_hash: str
    seed: int
    mode: InferenceMode
    accuracy: float = Field(ge=0.0, le=1.0)
    target_accuracy: dict[str, float]
    subnetwork_target_accuracy: dict[str, float]
    source_accuracy: dict[str, float]
    discriminator_accuracy: dict[str, float]
    probe_accuracy: Optional[dict[str, float]] = None

    def dumps(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True)


def check_compatible(model: MlMsdaModel, ds) -> None:
    """Reject a dataset the model was not built for, before any computation."""
    arch = model.arch
    problems = []
    if arch.num_classes != ds.num_classes:
        problems.append(f"classes: checkpoint K={arch.num_classes}, dataset K={ds.num_classes}")
    if arch.input_dim != ds.input_dim:
        problems.append(f"input width: checkpoint {arch.input_dim}, dataset {ds.input_dim}")
    if arch.num_sources != ds.num_sources:
        problems.append(f"sources: checkpoint N={arch.num_sources}, dataset N={ds.num_sources}")
    if problems:
        raise CompatibilityError("checkpoint and dataset are incompatible: " + "; ".join(problems))


def source_accuracies(model: MlMsdaModel, ds) -> dict[str, float]:
    """Each branch on its own source test split; the guidance network on all of them."""
    results = {}
    correct = total = 0.0
    for j, domain in enumerate(ds.sources, start=1):
        probs = predict_all(model, domain.test.x)
        results[subnetwork_name(j, model.num_sources)] = accuracy(probs[j - 1], domain.test.y)
        correct += accuracy(probs[-1], domain.test.y) * len(domain.test)
        total += len(domain.test)
    results["guidance"] = correct / total
    return results


def target_accuracies(model: MlMsdaModel, ds) -> tuple[dict[str, float], dict[str, float]]:
    """(accuracy per inference mode, accuracy per subnetwork) on the target test split."""
    test = ds.target.test
    if len(test) == 0:
        raise ValueError("target test split is empty")
    probs = predict_all(model, test.x)
    per_mode = {
        mode.value: accuracy(combine(mode, probs[:-1], probs[-1]), test.y) for mode in InferenceMode
    }
    per_subnetwork = {
        subnetwork_name(j, model.num_sources): accuracy(p, test.y)
        for j, p in enumerate(probs, start=1)
    }
    return per_mode, per_subnetwork


def evaluate(
    model: MlMsdaModel,
    ds,
    mode: InferenceMode = InferenceMode.Ensemble,
    config_hash: str = "",
    seed: int = 0,
    probe_size: int = 200,
    with_probe: bool = True,
) -> EvalReport:
    check_compatible(model, ds)
    per_mode, per_subnetwork = target_accuracies(model, ds)
    return EvalReport(
        config_hash=config_hash,
        seed=seed,
        mode=mode,
        accuracy=per_mode[mode.value],
        target_accuracy=per_mode,
        subnetwork_target_accuracy=per_subnetwork,
        source_accuracy=source_accuracies(model, ds),
        discriminator_accuracy=discriminator_accuracy(model, ds, probe_size),
        probe_accuracy=probe_discriminator(model, ds, probe_size, seed) if with_probe else None,
    )
