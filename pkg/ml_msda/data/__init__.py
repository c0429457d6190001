from ..utils.validators import DatasetConfig, DomainSpec
from .dataset import Domain, DomainSplit, LabeledSample, MultiDomainDataset, TrainingView
from .generator import class_means, dataset_from_config, generate_domain, generate_ring_domains, layout_phase
from .sampler import CyclicStream, DomainSampler, StepBatch, sampler_next
from .storage import FORMAT_VERSION, MAGIC, dumps_dataset, load_dataset, loads_dataset, save_dataset

__all__ = [
    "CyclicStream",
    "DatasetConfig",
    "Domain",
    "DomainSampler",
    "DomainSpec",
    "DomainSplit",
    "FORMAT_VERSION",
    "LabeledSample",
    "MAGIC",
    "MultiDomainDataset",
    "StepBatch",
    "TrainingView",
    "class_means",
    "dataset_from_config",
    "dumps_dataset",
    "generate_domain",
    "generate_ring_domains",
    "layout_phase",
    "load_dataset",
    "loads_dataset",
    "sampler_next",
    "save_dataset",
]
