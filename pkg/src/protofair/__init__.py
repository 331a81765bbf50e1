"""Prototype-based matrix factorization with popularity-bias mitigation.

Two mechanisms on top of ProtoMF: k-filtering of prototype similarities and
a regularizer that spreads prototypes apart. Includes data preparation,
leave-one-out evaluation with group fairness metrics, and prototype
explanations.
"""

from .data import (
    CountrySpec, GroupAssignment, InteractionTable, RawInteraction, SplitDataset, SynthSpec,
    assign_groups, build_table, generate_synthetic, load_interactions, load_item_metadata,
    split_leave_one_out,
)
from .errors import ConfigError, DataError, NumericalError, ProtofairError
from .evaluation import EvalReport, evaluate, rank_candidates
from .explain import explain_item, export_embedding_projection, nearest_prototypes, prototype_exemplars
from .model import (
    MatrixFactorization, PrototypeModel, affinity, init_model, k_filter, load_checkpoint,
    save_checkpoint, score_all_items, shifted_cosine, transform,
)
from .training import LossBreakdown, TrainConfig, distributing_reg, train

__all__ = [
    "CountrySpec",
    "GroupAssignment",
    "InteractionTable",
    "RawInteraction",
    "SplitDataset",
    "SynthSpec",
    "assign_groups",
    "build_table",
    "generate_synthetic",
    "load_interactions",
    "load_item_metadata",
    "split_leave_one_out",
    "ConfigError",
    "DataError",
    "NumericalError",
    "ProtofairError",
    "EvalReport",
    "evaluate",
    "rank_candidates",
    "explain_item",
    "export_embedding_projection",
    "nearest_prototypes",
    "prototype_exemplars",
    "MatrixFactorization",
    "PrototypeModel",
    "affinity",
    "init_model",
    "k_filter",
    "load_checkpoint",
    "save_checkpoint",
    "score_all_items",
    "shifted_cosine",
    "transform",
    "LossBreakdown",
    "TrainConfig",
    "distributing_reg",
    "train",
]

__version__ = "0.1.0"
