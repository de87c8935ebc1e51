from .corpus import DEFAULT_PROFILE, MINIMAL_PROFILE, TABLE1_COUNTS, LayoutProfile, class_counts, generate_corpus
from .evaluate import ClassScore, EvalReport, evaluate
from .experiment import ExperimentConfig, ExperimentResult, run_fusion_experiment
from .noise import NoiseModel, apply_noise, confusion_from_spec, corrupt, corrupt_exact

__all__ = [
    "DEFAULT_PROFILE", "MINIMAL_PROFILE", "TABLE1_COUNTS", "LayoutProfile", "class_counts", "generate_corpus",
    "ClassScore", "EvalReport", "evaluate",
    "ExperimentConfig", "ExperimentResult", "run_fusion_experiment",
    "NoiseModel", "apply_noise", "confusion_from_spec", "corrupt", "corrupt_exact",
]
