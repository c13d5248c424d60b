"""Self-supervised node representation learning driven by listwise
ranking over ordered augmented graph views, on a small from-scratch
reverse-mode tensor engine."""

from .augment import ViewSpec, drop_edge, feature_mask, make_views
from .autodiff import Tensor, backward, grad_check, parameter, tensor
from .encoders import encode, init_gat_params, init_gcn_params
from .evaluation import (MetricsReport, Split, linear_probe, make_split,
                         similarity_diagnostics)
from .graphs import Graph, SbmSpec, build_graph, generate_sbm, load_graph
from .losses import (SimilarityConfig, c2f_loss, coarse_loss, fine_loss,
                     info_nce, judgment_matrices, listnet_ce, score_matrix)
from .training import (Adam, NegativeBank, TrainConfig, default_config,
                       pretrain, sample_negatives, train_step)

__version__ = "0.1.0"

__all__ = [
    "ViewSpec", "drop_edge", "feature_mask", "make_views",
    "Tensor", "backward", "grad_check", "parameter", "tensor",
    "encode", "init_gat_params", "init_gcn_params",
    "MetricsReport", "Split", "linear_probe", "make_split",
    "similarity_diagnostics",
    "Graph", "SbmSpec", "build_graph", "generate_sbm", "load_graph",
    "SimilarityConfig", "c2f_loss", "coarse_loss", "fine_loss", "info_nce",
    "judgment_matrices", "listnet_ce", "score_matrix",
    "Adam", "NegativeBank", "TrainConfig", "default_config", "pretrain",
    "sample_negatives", "train_step",
]
