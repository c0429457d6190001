"""Linear probes: how separable two feature sets are, and how well a classifier transfers."""
from typing import Iterable, Optional, Sequence

import numpy as np

from ..autodiff import Tape, Tensor, backward, matmul, softmax_rows
from ..data.generator import generate_domain
from ..losses.terms import cross_entropy, one_hot
from ..model.network import MlMsdaModel, classify, condition, discriminate, extract, subnetwork_name
from ..utils.validators import DomainSpec
from .inference import accuracy

# Train/test splits averaged per alignment score; one 30% split of a few hundred rows is too noisy.
ALIGNMENT_SPLITS = 5


class LinearProbe:
    """Multinomial logistic regression on standardised features, fit by full-batch descent."""

    def __init__(self, num_classes: int, steps: int = 300, learning_rate: float = 0.5):
        self.num_classes = num_classes
        self.steps = steps
        self.learning_rate = learning_rate
        self.weight: Optional[Tensor] = None
        self.bias: Optional[Tensor] = None

    def _standardise(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.scale

    def fit(self, x: np.ndarray, y: np.ndarray) -> "LinearProbe":
        self.mean = x.mean(axis=0)
        scale = x.std(axis=0)
        self.scale = np.where(scale > 1e-12, scale, 1.0)
        inputs = Tensor(self._standardise(x))
        targets = Tensor(one_hot(y, self.num_classes))

        self.weight = Tensor(np.zeros((x.shape[1], self.num_classes)), requires_grad=True)
        self.bias = Tensor(np.zeros(self.num_classes), requires_grad=True)
        for _ in range(self.steps):
            with Tape() as tape:
                loss = cross_entropy(softmax_rows(matmul(inputs, self.weight) + self.bias), targets)
            backward(loss, tape)
            for param in (self.weight, self.bias):
                param.data = param.data - self.learning_rate * param.grad
                param.zero_grad()
        return self

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        if self.weight is None:
            raise RuntimeError("probe has not been fit")
        logits = self._standardise(x) @ self.weight.data + self.bias.data
        return softmax_rows(Tensor(logits)).data

    def score(self, x: np.ndarray, y: np.ndarray) -> float:
        return accuracy(self.predict_proba(x), y)


def split_indices(count: int, rng: np.random.Generator, train_fraction: float = 0.7):
    order = rng.permutation(count)
    cut = int(round(train_fraction * count))
    return order[:cut], order[cut:]


def separability(
    positives: np.ndarray,
    negatives: np.ndarray,
    seed: int = 0,
    train_fraction: float = 0.7,
    splits: int = 1,
) -> float:
    """Held-out accuracy of a probe telling ``positives`` (label 1) from ``negatives`` (label 0).

    With ``splits`` > 1 the score is the mean over that many random splits, seeded
    ``seed``, ``seed + 1``, ...
    """
    x = np.concatenate([positives, negatives], axis=0)
    y = np.concatenate([np.ones(len(positives), dtype=np.int64), np.zeros(len(negatives), dtype=np.int64)])
    if splits < 1:
        raise ValueError(f"splits must be >= 1, got {splits}")
    scores = []
    for offset in range(splits):
        train, test = split_indices(len(x), np.random.default_rng(seed + offset), train_fraction)
        if len(positives) < 2 or len(negatives) < 2 or len(train) == 0 or len(test) == 0:
            raise ValueError(f"insufficient samples for a probe: {len(positives)} vs {len(negatives)}")
        probe = LinearProbe(num_classes=2).fit(x[train], y[train])
        scores.append(probe.score(x[test], y[test]))
    return float(np.mean(scores))


def _spread(x: np.ndarray, count: int) -> np.ndarray:
    """``count`` rows taken at even spacing so every class of a round-robin split is present."""
    index = np.linspace(0, len(x) - 1, num=min(count, len(x))).round().astype(int)
    return x[index]


def probe_pairs(model: MlMsdaModel, ds, probe_size: int) -> list[tuple[int, np.ndarray, np.ndarray]]:
    """(subnetwork index, source test inputs, target test inputs), balanced in size."""
    half = max(2, probe_size // 2)
    target = _spread(ds.target.test.x, half)
    combined = np.concatenate([d.test.x for d in ds.sources], axis=0)
    pairs = []
    for j in range(1, model.arch.num_subnetworks + 1):
        source = ds.sources[j - 1].test.x if j <= model.num_sources else combined
        source = _spread(source, half)
        count = min(len(source), len(target))
        pairs.append((j, source[:count], target[:count]))
    return pairs


def probe_discriminator(
    model: MlMsdaModel, ds, probe_size: int = 200, seed: int = 0, splits: int = ALIGNMENT_SPLITS
) -> dict[str, float]:
    """Per-subnetwork accuracy of a fresh linear probe separating source from target features.

    0.5 means the extractor maps both domains onto indistinguishable features. Each score is
    averaged over ``splits`` train/test splits of the same balanced sample.
    """
    results = {}
    for j, source, target in probe_pairs(model, ds, probe_size):
        results[subnetwork_name(j, model.num_sources)] = separability(
            extract(model, j, source).data, extract(model, j, target).data, seed=seed, splits=splits
        )
    return results


def discriminator_accuracy(model: MlMsdaModel, ds, probe_size: int = 200) -> dict[str, float]:
    """Accuracy of each trained D_j on a balanced held-out batch (source 1, target 0)."""
    arch = model.arch
    results = {}
    for j, source, target in probe_pairs(model, ds, probe_size):
        outputs = []
        for x in (source, target):
            features = extract(model, j, x)
            probs = classify(model, j, features)
            conditioned = condition(features, probs, arch.detach_preds, arch.conditioning)
            outputs.append(discriminate(model, j, conditioned, adv_scale=1.0).data[:, 0])
        correct = np.concatenate([outputs[0] > 0.5, outputs[1] <= 0.5])
        results[subnetwork_name(j, model.num_sources)] = float(correct.mean())
    return results


def domain_shift_probe(
    source_rotation: float,
    target_rotations: Sequence[float],
    seeds: Iterable[int],
    num_classes: int = 3,
    noise_sigma: float = 0.25,
    size: int = 500,
) -> dict[float, float]:
    """Mean accuracy, over seeds, of a class probe fit on one ring domain and scored on others."""
    seeds = list(seeds)
    results = {}
    for rotation in target_rotations:
        scores = []
        for seed in seeds:
            spec = dict(noise_sigma=noise_sigma, num_classes=num_classes, train_size=size, test_size=size)
            source = generate_domain(DomainSpec(rotation_deg=source_rotation, seed=2 * seed, **spec), "source")
            target = generate_domain(DomainSpec(rotation_deg=rotation, seed=2 * seed + 1, **spec), "target")
            probe = LinearProbe(num_classes=num_classes).fit(source.train.x, source.train.y)
            scores.append(probe.score(target.test.x, target.test.y))
        results[float(rotation)] = float(np.mean(scores))
    return results
