import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from ..autodiff import Tensor, mul
from ..errors import NumericError
from ..model.network import SubnetworkOutput, subnetwork_name
from ..utils.validators import HyperParams
from .terms import adversarial_loss_j, adversarial_total, cross_entropy, entropy_loss, mutual_loss, one_hot

Scalar = Union[Tensor, float]


@dataclass
class LossBundle:
    """Loss components of one step.

    ``total`` is l_c + alpha l_m + beta l_e + lambda l_adv. ``objective`` is the taped scalar
    that is differentiated: the same sum with the adversarial term entering as -lambda l_adv,
    so the discriminators ascend l_adv while the gradient reversal in front of them makes the
    extractors descend it.
    """

    l_c: float
    l_e: float
    l_adv: float
    l_m: float
    total: float
    objective: Optional[Tensor] = None
    per_subnetwork: dict[str, dict[str, float]] = field(default_factory=dict)

    def components(self) -> dict[str, float]:
        return {
            "l_c": self.l_c,
            "l_e": self.l_e,
            "l_adv": self.l_adv,
            "l_m": self.l_m,
            "total": self.total,
        }


def _value(x: Scalar) -> float:
    return x.item() if isinstance(x, Tensor) else float(x)


def total_objective(l_c: Scalar, l_e: Scalar, l_adv: Scalar, l_m: Scalar, hp: HyperParams) -> LossBundle:
    values = {"l_c": _value(l_c), "l_e": _value(l_e), "l_adv": _value(l_adv), "l_m": _value(l_m)}
    bad = [name for name, value in values.items() if not math.isfinite(value)]
    if bad:
        raise NumericError(f"non-finite loss components: {', '.join(bad)}", components=values)

    total = values["l_c"] + hp.alpha * values["l_m"] + hp.beta * values["l_e"] + hp.lambda_ * values["l_adv"]

    objective = None
    if all(isinstance(x, Tensor) for x in (l_c, l_e, l_adv, l_m)):
        objective = l_c + mul(l_m, hp.alpha) + mul(l_e, hp.beta) - mul(l_adv, hp.lambda_)
    return LossBundle(objective=objective, total=total, **values)


def compute_losses(
    outputs: Sequence[SubnetworkOutput],
    source_labels: Sequence[np.ndarray],
    hp: HyperParams,
) -> LossBundle:
    """Every term of the overall objective for one forward pass over all N+1 subnetworks.

    ``source_labels[j-1]`` holds the class indices of the batch fed to subnetwork j. The
    classification, entropy and adversarial terms average over all N+1 subnetworks, the
    guidance network included; the mutual term couples each branch with the guidance network.
    """
    if len(outputs) < 2 or len(source_labels) != len(outputs):
        raise ValueError("compute_losses needs one label batch per subnetwork and at least one branch")
    num_sources = len(outputs) - 1
    scale = 1.0 / len(outputs)

    ce_terms, entropy_terms, adv_terms = [], [], []
    per_subnetwork: dict[str, dict[str, float]] = {}
    for out, labels in zip(outputs, source_labels):
        ce = cross_entropy(out.source_probs, one_hot(labels, out.source_probs.shape[1]))
        ent = entropy_loss(out.target_probs)
        adv = adversarial_loss_j(out.source_domain, out.target_domain)
        ce_terms.append(ce)
        entropy_terms.append(ent)
        adv_terms.append(adv)
        per_subnetwork[subnetwork_name(out.index, num_sources)] = {
            "l_c": ce.item(),
            "l_e": ent.item(),
            "l_adv": adv.item(),
        }

    l_c = mul(_tensor_sum(ce_terms), scale)
    l_e = mul(_tensor_sum(entropy_terms), scale)
    l_adv = adversarial_total(adv_terms, expected=len(outputs))
    l_m = mutual_loss(
        [out.target_probs for out in outputs[:-1]],
        outputs[-1].target_probs,
        divergence=hp.mutual_divergence,
        freeze_guidance=hp.freeze_guidance,
    )

    bundle = total_objective(l_c, l_e, l_adv, l_m, hp)
    bundle.per_subnetwork = per_subnetwork
    return bundle


def _tensor_sum(terms: list[Tensor]) -> Tensor:
    total = terms[0]
    for term in terms[1:]:
        total = total + term
    return total
