"""Exact solver: bottom-up tree characteristic function and optimal set extraction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import oracle
from .envelope import Description, cumulative_set, leaf_description, truncate_rebase
from .instance import TreeInstance
from .merge import MergeStats, merge


@dataclass(frozen=True)
class Solution:
    selected: tuple[int, ...]
    expected_profit: float
    expected_revenue: float
    expected_cost: float
    envelope: Description | None = None


def solve_tree(
    instance: TreeInstance,
    subtree_root: int | None = None,
    on_node: Callable[[int, Description], None] | None = None,
    stats: MergeStats | None = None,
) -> Description:
    """Description of the characteristic function of the subtree at ``subtree_root``.

    The result lives on [0, dist(subtree_root)]. Children are folded in their
    stored order; ``on_node`` (if given) sees every finished sub-tree description.
    Iterative, so arbitrarily deep paths are fine.
    """
    top = instance.root if subtree_root is None else subtree_root
    if top not in instance:
        raise KeyError(f"unknown node id {top!r}")
    done: dict[int, Description] = {}
    # reverse preorder visits every descendant before its ancestor
    for v in reversed(instance.subtree(top)):
        node = instance.node(v)
        d = node.dist
        desc = leaf_description(node, d)
        for c in instance.children[v]:
            desc = merge(desc, truncate_rebase(done.pop(c), d), stats=stats, validate=False)
        if on_node is not None:
            on_node(v, desc)
        done[v] = desc
    return done[top]


def solve(instance: TreeInstance, keep_envelope: bool = False) -> Solution:
    """Maximal optimal commitment set at zero bonus and its expected figures."""
    desc = solve_tree(instance)
    first = desc.records[0]
    # the root sits at distance 0, so this is q_0 itself
    profit = first.q - instance.node(instance.root).dist * first.slope
    selected = tuple(sorted(cumulative_set(desc, 0)))
    return Solution(
        selected=selected,
        expected_profit=profit,
        expected_revenue=oracle.expected_revenue(instance, selected),
        expected_cost=oracle.expected_cost(instance, selected),
        envelope=desc if keep_envelope else None,
    )
