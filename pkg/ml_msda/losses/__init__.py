from ..utils.validators import HyperParams
from .objective import LossBundle, compute_losses, total_objective
from .terms import (
    adversarial_loss_j,
    adversarial_total,
    cross_entropy,
    discriminator_loss,
    entropy_loss,
    kl_divergence,
    kl_rows,
    mutual_loss,
    one_hot,
)

__all__ = [
    "HyperParams",
    "LossBundle",
    "adversarial_loss_j",
    "adversarial_total",
    "compute_losses",
    "cross_entropy",
    "discriminator_loss",
    "entropy_loss",
    "kl_divergence",
    "kl_rows",
    "mutual_loss",
    "one_hot",
    "total_objective",
]
