"""Histogram gradient boosting with shared-structure multi-output trees."""

from .binning import BinMapper, build_bin_mapper
from .config import TrainConfig
from .exact import best_split_exact, grow_tree_exact
from .model import Model, fit, predict
from .objectives import GradHess, Objective, SquaredError
from .tree import (
    NodeHistogram,
    Tree,
    find_default_direction,
    grow_tree,
    leaf_weight,
    node_histogram,
    split_gain,
)

__all__ = [
    "BinMapper",
    "GradHess",
    "Model",
    "NodeHistogram",
    "Objective",
    "SquaredError",
    "TrainConfig",
    "Tree",
    "best_split_exact",
    "build_bin_mapper",
    "find_default_direction",
    "fit",
    "grow_tree",
    "grow_tree_exact",
    "leaf_weight",
    "node_histogram",
    "predict",
    "split_gain",
]
