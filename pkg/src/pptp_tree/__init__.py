"""Exact quadratic-time solver for the probabilistic profitable tour problem on trees."""

from .envelope import Description, Record, cumulative_set, evaluate, leaf_description, truncate_rebase
from .instance import (
    GeneratorParams,
    InstanceError,
    Node,
    TreeInstance,
    generate_instance,
    load_instance,
    parse_instance,
    serialize_instance,
)
from .merge import ThresholdQuery, entry_threshold, merge, virtual_bonus
from .solver import Solution, solve, solve_tree

__all__ = [
    "Description",
    "GeneratorParams",
    "InstanceError",
    "Node",
    "Record",
    "Solution",
    "ThresholdQuery",
    "TreeInstance",
    "cumulative_set",
    "entry_threshold",
    "evaluate",
    "generate_instance",
    "leaf_description",
    "load_instance",
    "merge",
    "parse_instance",
    "serialize_instance",
    "solve",
    "solve_tree",
    "truncate_rebase",
    "virtual_bonus",
]
