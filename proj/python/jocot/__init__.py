"""Trinity-network noisy-label learning: two teacher modules and a consensus-trained student."""

from ._core import (
    ArgumentError,
    ConfigError,
    UndefinedMetricError,
    __version__,
    build_noise_matrix,
    consensus,
    inject_noise,
    jocor_per_sample_loss,
    per_sample_ce,
    remember_rate,
    run_experiment,
    small_loss_select,
    symmetric_kl,
    synthesize_csv,
)

__all__ = [
    "ArgumentError",
    "ConfigError",
    "UndefinedMetricError",
    "__version__",
    "build_noise_matrix",
    "consensus",
    "inject_noise",
    "jocor_per_sample_loss",
    "per_sample_ce",
    "remember_rate",
    "run_experiment",
    "small_loss_select",
    "symmetric_kl",
    "synthesize_csv",
]
