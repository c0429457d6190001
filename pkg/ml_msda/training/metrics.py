from typing import Any, Optional

from pydantic import BaseModel, ConfigDict


class MetricsRecord(BaseModel):
    """One epoch of a training run.

    Loss components are means over the epoch's steps. ``wall_clock_seconds`` is kept out of
    the metrics stream so identical runs produce identical streams.
    """

    model_config = ConfigDict(frozen=True)

    config_hash: str
    seed: int
    epoch: int
    steps: int
    learning_rate: float
    l_c: float
    l_e: float
    l_adv: float
    l_m: float
    total: float
    source_accuracy: dict[str, float]
    target_accuracy: dict[str, float]
    subnetwork_target_accuracy: dict[str, float]
    discriminator_accuracy: dict[str, float]
    probe_accuracy: Optional[dict[str, float]] = None
    wall_clock_seconds: Optional[float] = None

    def stream_dict(self) -> dict[str, Any]:
        return self.model_dump(mode="json", exclude={"wall_clock_seconds"})
