"""Individual loss terms over prediction and discriminator tensors.

All logarithms of probabilities go through ``clamped_log`` with eps = 1e-7; the probability
tensors themselves are never clamped, so ``0 * log(eps)`` terms vanish exactly.
"""
from typing import Optional, Sequence, Union

import numpy as np

from ..autodiff import (
    LOG_EPS,
    Tensor,
    clamp,
    clamped_log,
    log,
    mean,
    mul,
    stop_gradient,
    sub,
    sum_,
)
from ..errors import DimensionError
from ..utils.enum import MutualDivergence

Labels = Union[Tensor, np.ndarray]


def _check_same_shape(name: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{name}: shapes {a.shape} and {b.shape} differ")


def _one_hot(labels: Labels, shape: tuple[int, ...]) -> Tensor:
    y = labels.data if isinstance(labels, Tensor) else np.asarray(labels, dtype=np.float64)
    if y.shape != shape:
        raise DimensionError(f"cross_entropy: labels {y.shape} do not match predictions {shape}")
    if not (np.all((y == 0.0) | (y == 1.0)) and np.all(y.sum(axis=1) == 1.0)):
        raise ValueError("cross_entropy: every label row must be one-hot")
    return labels if isinstance(labels, Tensor) else Tensor(y)


def one_hot(indices: np.ndarray, num_classes: int) -> np.ndarray:
    indices = np.asarray(indices, dtype=np.int64)
    encoded = np.zeros((indices.shape[0], num_classes))
    encoded[np.arange(indices.shape[0]), indices] = 1.0
    return encoded


def cross_entropy(preds: Tensor, labels: Labels) -> Tensor:
    """-mean_i y_i . log p_i"""
    y = _one_hot(labels, preds.shape)
    return -mean(sum_(mul(y, clamped_log(preds)), axis=1))


def entropy_loss(preds: Tensor) -> Tensor:
    """Mean Shannon entropy of the rows of ``preds``."""
    return -mean(sum_(mul(preds, clamped_log(preds)), axis=1))


def adversarial_loss_j(d_src: Tensor, d_tgt: Tensor, eps: float = LOG_EPS) -> Tensor:
    """mean log D(source) + mean log(1 - D(target)); source is labelled 1, target 0."""
    src = log(clamp(d_src, eps, 1.0 - eps))
    tgt = log(sub(1.0, clamp(d_tgt, eps, 1.0 - eps)))
    return mean(src) + mean(tgt)


def discriminator_loss(d_src: Tensor, d_tgt: Tensor, eps: float = LOG_EPS) -> Tensor:
    """Binary cross-entropy the discriminator minimises: the negated adversarial loss."""
    return -adversarial_loss_j(d_src, d_tgt, eps)


def adversarial_total(per_j: Sequence[Tensor], expected: Optional[int] = None) -> Tensor:
    """Arithmetic mean of the per-subnetwork adversarial losses."""
    if not per_j:
        raise ValueError("adversarial_total needs at least one term")
    if expected is not None and len(per_j) != expected:
        raise ValueError(f"adversarial_total expected {expected} terms, got {len(per_j)}")
    total = per_j[0]
    for term in per_j[1:]:
        total = total + term
    return mul(total, 1.0 / len(per_j))


def kl_rows(p: Tensor, q: Tensor) -> Tensor:
    """Per-row KL(p || q), shape (b,)."""
    _check_same_shape("kl_divergence", p, q)
    return sum_(mul(p, sub(clamped_log(p), clamped_log(q))), axis=-1)


def kl_divergence(p: Tensor, q: Tensor) -> Tensor:
    """KL(p || q), averaged over rows when given a batch."""
    rows = kl_rows(p, q)
    return mean(rows) if rows.ndim else rows


def mutual_loss(
    branch_preds: Sequence[Tensor],
    guidance_preds: Tensor,
    divergence: MutualDivergence = MutualDivergence.JensenShannon,
    freeze_guidance: bool = False,
) -> Tensor:
    """Consistency between every branch and the guidance network on the same target rows.

    ``js`` averages KL(branch || guidance) + KL(guidance || branch) over 2 N n_t;
    ``kl`` keeps only the first direction, averaged over N n_t. Branches are never compared
    with each other.
    """
    if not branch_preds:
        raise ValueError("mutual_loss needs at least one branch")
    guidance = stop_gradient(guidance_preds) if freeze_guidance else guidance_preds
    num_branches, num_rows = len(branch_preds), guidance.shape[0]

    total: Optional[Tensor] = None
    for branch in branch_preds:
        _check_same_shape("mutual_loss", branch, guidance)
        term = sum_(kl_rows(branch, guidance))
        if divergence is MutualDivergence.JensenShannon:
            term = term + sum_(kl_rows(guidance, branch))
        total = term if total is None else total + term

    pairs = 2 if divergence is MutualDivergence.JensenShannon else 1
    return mul(total, 1.0 / (pairs * num_branches * num_rows))
