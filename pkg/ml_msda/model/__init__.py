from ..utils.validators import ArchConfig
from .checkpoint import (
    Checkpoint,
    dumps_checkpoint,
    load_checkpoint,
    loads_checkpoint,
    save_checkpoint,
)
from .layers import Linear
from .network import (
    MlMsdaModel,
    Subnetwork,
    SubnetworkOutput,
    classify,
    condition,
    discriminate,
    extract,
    forward_all,
    init_model,
    subnetwork_name,
)

__all__ = [
    "ArchConfig",
    "Checkpoint",
    "Linear",
    "MlMsdaModel",
    "Subnetwork",
    "SubnetworkOutput",
    "classify",
    "condition",
    "discriminate",
    "dumps_checkpoint",
    "extract",
    "forward_all",
    "init_model",
    "load_checkpoint",
    "loads_checkpoint",
    "save_checkpoint",
    "subnetwork_name",
]
