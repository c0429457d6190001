from enum import Enum


class InferenceMode(Enum):
    """How target predictions are combined at inference time."""
    Ensemble = "ensemble"
    GuidanceOnly = "guidance_only"
    BranchAverage = "branch_average"


class ConditioningMode(Enum):
    """What a domain discriminator sees besides the extracted feature."""
    Multilinear = "multilinear"
    Concat = "concat"
    Unconditioned = "none"


class MutualDivergence(Enum):
    """Divergence used by the mutual-learning term."""
    JensenShannon = "js"
    KullbackLeibler = "kl"


class VariantName(Enum):
    """Ablation rows, in table order."""
    WithoutConditionAdv = "ML-w/o condition-adv"
    WithoutEntropy = "ML-w/o L_E"
    WithoutMutual = "ML-w/o L_M"
    GuidanceInference = "ML-guidance-inf"
    BranchAverageInference = "ML-branch-average-inf"
    Full = "ML-MSDA (full)"
    SourceOnly = "Source-only"


class Benchmark(Enum):
    """Synthetic dataset families the generator can build."""
    Ring5 = "ring5"
