from typing import List, Union

from typing_extensions import TypedDict


class BaseConfig(TypedDict):
    # Dataset
    BENCHMARK: str
    DATASET_PATH: Union[str, None]
    NUM_CLASSES: int
    SOURCE_ROTATIONS: List[float]
    TARGET_ROTATION: float
    TRANSLATIONS: List[List[float]]
    NOISE_SIGMA: float
    TRAIN_SIZE: int
    TEST_SIZE: int
    DATA_SEED: int
    EQUAL_DOMAIN_SAMPLING: bool
    # Architecture
    INPUT_DIM: int
    TRUNK_LAYERS: List[int]
    PRIVATE_LAYERS: List[int]
    FEATURE_DIM: int
    DISCRIMINATOR_LAYERS: List[int]
    SHARE_TRUNK: bool
    CONDITIONING: str
    DETACH_PREDS: bool
    # Objective
    ALPHA: float
    BETA: float
    LAMBDA: float
    MUTUAL_DIVERGENCE: str
    FREEZE_GUIDANCE: bool
    # Ablation
    NO_CONDITION_ADV: bool
    NO_ENTROPY: bool
    NO_MUTUAL: bool
    INFERENCE_MODE: str
    # Optimisation
    EPOCHS: int
    BATCH_SIZE: int
    MOMENTUM: float
    LR_SCHEDULE: List[List[float]]
    ADV_WARMUP: bool
    # Evaluation
    PROBE_INTERVAL: int
    PROBE_SIZE: int
    # Run
    SEED: int
    OUTPUT_DIR: str
    CHECKPOINT_EVERY: int
    MAX_WORKERS: int
    VERBOSE: bool
