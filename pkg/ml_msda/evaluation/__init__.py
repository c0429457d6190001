from .ablation import (
    ROWS,
    TRAINED_VARIANTS,
    AblationRow,
    AblationTable,
    run_ablations,
    run_ablations_async,
    run_variant,
    variant_config,
)
from .features import dump_features, feature_columns
from .inference import EnsemblePrediction, accuracy, combine, ensemble_predict, predict, predict_all, predict_classes
from .probe import LinearProbe, discriminator_accuracy, domain_shift_probe, probe_discriminator, separability
from .report import EvalReport, check_compatible, evaluate, source_accuracies, target_accuracies

__all__ = [
    "ROWS",
    "TRAINED_VARIANTS",
    "AblationRow",
    "AblationTable",
    "EnsemblePrediction",
    "EvalReport",
    "LinearProbe",
    "accuracy",
    "check_compatible",
    "combine",
    "discriminator_accuracy",
    "domain_shift_probe",
    "dump_features",
    "ensemble_predict",
    "evaluate",
    "feature_columns",
    "predict",
    "predict_all",
    "predict_classes",
    "probe_discriminator",
    "run_ablations",
    "run_ablations_async",
    "run_variant",
    "separability",
    "source_accuracies",
    "target_accuracies",
    "variant_config",
]
