"""colabel: training classifiers under noisy labels.

Two networks cross-correct each other's labels with their low-entropy
predictions, next to seven classic baselines, synthetic noise injectors and a
deterministic metrics harness. Hot numeric kernels run on an optional compiled
extension with a pure-numpy fallback (see `colabel.kernels.BACKEND`).
"""

__version__ = "0.1.0"

from .rng import SeededRng
from .data import (
    IdxFormatError,
    LabeledDataset,
    TrainView,
    gen_gaussian_blobs,
    gen_rings,
    load_idx,
    train_test_split,
)
from .noise import (
    NoiseSpec,
    build_transition,
    confusion_matrix,
    default_asymmetric_pairs,
    inject_noise,
    row_normalize,
)
from .selection import (
    BatchPartition,
    EntropyGapStats,
    GammaPolicy,
    entropy_gap_stats,
    estimate_gamma,
    partition_by_entropy,
)
from .net import (
    AdamState,
    ForwardCache,
    Gradients,
    MlpNetwork,
    adam_step,
    backward,
    forward,
    init_network,
)
from .metrics import EpochMetrics, read_metrics_csv, summarize, supervision_precision
from .train.clc import ClcConfig, LossBreakdown, clc_batch_loss, train_clc, train_slc
from .train.baselines import (
    BaselineConfig,
    train_bootstrap,
    train_codistillation,
    train_coteaching,
    train_decouple,
    train_forward,
    train_self_paced,
    train_standard,
)
from .config import ConfigError, ExperimentConfig, load_config
from .harness import DatasetError, OutputError, run_experiment, sweep

__all__ = [
    "__version__",
    "SeededRng",
    "IdxFormatError",
    "LabeledDataset",
    "TrainView",
    "gen_gaussian_blobs",
    "gen_rings",
    "load_idx",
    "train_test_split",
    "NoiseSpec",
    "build_transition",
    "confusion_matrix",
    "default_asymmetric_pairs",
    "inject_noise",
    "row_normalize",
    "BatchPartition",
    "EntropyGapStats",
    "GammaPolicy",
    "entropy_gap_stats",
    "estimate_gamma",
    "partition_by_entropy",
    "AdamState",
    "ForwardCache",
    "Gradients",
    "MlpNetwork",
    "adam_step",
    "backward",
    "forward",
    "init_network",
    "EpochMetrics",
    "read_metrics_csv",
    "summarize",
    "supervision_precision",
    "ClcConfig",
    "LossBreakdown",
    "clc_batch_loss",
    "train_clc",
    "train_slc",
    "BaselineConfig",
    "train_bootstrap",
    "train_codistillation",
    "train_coteaching",
    "train_decouple",
    "train_forward",
    "train_self_paced",
    "train_standard",
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "DatasetError",
    "OutputError",
    "run_experiment",
    "sweep",
]
