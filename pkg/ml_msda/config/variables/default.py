from .base import BaseConfig

DEFAULT_CONFIG: BaseConfig = {
    # Dataset: the "ring5" benchmark. Four sources at 0/20/40/60 degrees, target at 80 degrees,
    # K=3 Gaussian classes on the unit circle, 500 train / 200 test samples per domain.
    "BENCHMARK": "ring5",
    "DATASET_PATH": None,  # Load this file instead of generating the benchmark.
    "NUM_CLASSES": 3,
    "SOURCE_ROTATIONS": [0.0, 20.0, 40.0, 60.0],
    "TARGET_ROTATION": 80.0,
    "TRANSLATIONS": [],  # One [x, y] per domain (sources, then target); empty means no shift.
    "NOISE_SIGMA": 0.25,
    "TRAIN_SIZE": 500,
    "TEST_SIZE": 200,
    "DATA_SEED": 0,
    "EQUAL_DOMAIN_SAMPLING": False,  # Combined-source batches proportional to domain size when False.
    # Architecture: fully connected stand-in for "three conv layers and two fc layers".
    # The first few extractor layers are shared by all subnetworks when SHARE_TRUNK is set.
    "INPUT_DIM": 2,
    "TRUNK_LAYERS": [32],
    "PRIVATE_LAYERS": [32],
    "FEATURE_DIM": 16,
    "DISCRIMINATOR_LAYERS": [32],
    "SHARE_TRUNK": True,
    "CONDITIONING": "multilinear",  # multilinear | concat | none
    "DETACH_PREDS": True,  # Predictions enter the conditioning map without gradient.
    # Objective: "trade-off hyperparameters (lambda, alpha, beta) as (5, 5, 0.5)".
    "ALPHA": 5.0,  # Weight of the mutual-learning loss L_M.
    "BETA": 0.5,  # Weight of the target entropy loss L_E.
    "LAMBDA": 5.0,  # Weight of the adversarial loss L_adv.
    "MUTUAL_DIVERGENCE": "js",  # js (symmetric) | kl (branch -> guidance only)
    "FREEZE_GUIDANCE": False,
    # Ablation switches. All off is the full method.
    "NO_CONDITION_ADV": False,
    "NO_ENTROPY": False,
    "NO_MUTUAL": False,
    "INFERENCE_MODE": "ensemble",  # ensemble | guidance_only | branch_average
    # Optimisation: SGD, "learning rate is set as 0.01 for the first 10 epochs", 0.001 until
    # epoch 20, then 0.0001. One epoch is one pass over all samples of the combined sources.
    "EPOCHS": 30,
    "BATCH_SIZE": 64,  # 256 at full digit scale.
    "MOMENTUM": 0.9,
    "LR_SCHEDULE": [[0, 0.01], [10, 0.001], [20, 0.0001]],
    "ADV_WARMUP": False,  # Ramp the reversal scale from 0 to 1 over the first epoch.
    # Evaluation
    "PROBE_INTERVAL": 0,  # Linear-probe alignment every N epochs; 0 means final epoch only.
    "PROBE_SIZE": 200,
    # Run
    "SEED": 0,
    "OUTPUT_DIR": "./outputs",
    "CHECKPOINT_EVERY": 0,  # Save a checkpoint every N epochs; 0 saves only the final model.
    "MAX_WORKERS": 1,
    "VERBOSE": True,
}
