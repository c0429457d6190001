from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from ..autodiff import Tensor
from ..errors import DimensionError
from ..model.network import MlMsdaModel, classify, extract
from ..utils.enum import InferenceMode

Probs = Union[np.ndarray, Tensor]


def _array(probs: Probs) -> np.ndarray:
    return np.asarray(probs.data if isinstance(probs, Tensor) else probs, dtype=np.float64)


@dataclass(frozen=True)
class EnsemblePrediction:
    """Half the guidance prediction plus half the mean branch prediction, per sample."""

    probs: np.ndarray
    branch_probs: tuple[np.ndarray, ...]
    guidance_probs: np.ndarray

    @property
    def classes(self) -> np.ndarray:
        return predict_classes(self.probs)


def predict_classes(probs: Probs) -> np.ndarray:
    """Row-wise argmax; ties go to the lowest class index."""
    return np.argmax(_array(probs), axis=1)


def accuracy(probs: Probs, labels: np.ndarray) -> float:
    labels = np.asarray(labels)
    probs = _array(probs)
    if probs.shape[0] == 0:
        raise ValueError("accuracy of an empty set")
    if labels.shape != (probs.shape[0],):
        raise DimensionError(f"labels {labels.shape} do not match predictions {probs.shape}")
    return float(np.mean(predict_classes(probs) == labels))


def ensemble_predict(branch_preds: Sequence[Probs], guidance_pred: Probs) -> EnsemblePrediction:
    if not branch_preds:
        raise ValueError("ensemble_predict needs at least one branch")
    guidance = _array(guidance_pred)
    branches = tuple(_array(p) for p in branch_preds)
    for branch in branches:
        if branch.shape != guidance.shape:
            raise DimensionError(f"branch predictions {branch.shape} vs guidance {guidance.shape}")
    branch_mean = np.mean(np.stack(branches), axis=0)
    return EnsemblePrediction(
        probs=0.5 * (guidance + branch_mean),
        branch_probs=branches,
        guidance_probs=guidance,
    )


def combine(mode: InferenceMode, branch_preds: Sequence[Probs], guidance_pred: Probs) -> np.ndarray:
    if mode is InferenceMode.GuidanceOnly:
        return _array(guidance_pred)
    if mode is InferenceMode.BranchAverage:
        return np.mean(np.stack([_array(p) for p in branch_preds]), axis=0)
    return ensemble_predict(branch_preds, guidance_pred).probs


def predict_all(model: MlMsdaModel, x: np.ndarray) -> list[np.ndarray]:
    """Class probabilities of every subnetwork on ``x``, indexed 0..N (guidance last)."""
    return [
        classify(model, j, extract(model, j, x)).data
        for j in range(1, model.arch.num_subnetworks + 1)
    ]


def predict(model: MlMsdaModel, x: np.ndarray, mode: InferenceMode = InferenceMode.Ensemble) -> np.ndarray:
    probs = predict_all(model, x)
    return combine(mode, probs[:-1], probs[-1])
