"""Block SPD representations of multimodal signal segments, Riemannian
tangent-space features and an LSTM classifier, with subject-independent
evaluation tooling."""

__version__ = "0.1.0"

from .exceptions import DataError, NumericalError, SpdFusionError
from .harness import PipelineConfig, evaluate, plan_folds, run_ablation, run_fold
from .manifold import TangentSpace, geodesic_distance, geometric_mean, tangent_map, tangent_unmap, vec, unvec
from .seqnet import LSTMClassifier, TrainConfig
from .spdrep import BlockSPD, SpdConfig, segment_to_spd

__all__ = [
    "BlockSPD", "DataError", "LSTMClassifier", "NumericalError", "PipelineConfig", "SpdConfig",
    "SpdFusionError", "TangentSpace", "TrainConfig", "evaluate", "geodesic_distance", "geometric_mean",
    "plan_folds", "run_ablation", "run_fold", "segment_to_spd", "tangent_map", "tangent_unmap", "unvec", "vec",
]
