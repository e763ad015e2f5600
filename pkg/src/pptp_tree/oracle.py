"""Independent ground truth for the solver.

Closed-form expectations are computed edge by edge: an edge is paid for
exactly when some committed node below it requests service. This shares no
code path with the envelope machinery. Also here: exhaustive subset search,
exact outcome enumeration and a seeded Monte Carlo simulator.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .instance import TreeInstance

MAX_BRUTE_FORCE = 25


class OracleError(ValueError):
    pass


class TooLargeError(OracleError):
    pass


@dataclass(frozen=True)
class Outcome:
    requesting: frozenset[int]


def _as_set(instance: TreeInstance, S: Iterable[int]) -> frozenset[int]:
    s = frozenset(int(v) for v in S)
    for v in s:
        if v not in instance:
            raise OracleError(f"unknown node id {v}")
        if not instance.node(v).is_customer:
            raise OracleError(f"node {v} is a junction and cannot be selected")
    return s


def prob_any(instance: TreeInstance, S: Iterable[int]) -> float:
    s = _as_set(instance, S)
    none = 1.0
    for v in s:
        none *= 1.0 - instance.node(v).prob
    return 1.0 - none


def expected_revenue(instance: TreeInstance, S: Iterable[int]) -> float:
    return math.fsum(instance.node(v).prize * instance.node(v).prob for v in _as_set(instance, S))


def _subtree_stats(instance: TreeInstance, s: frozenset[int]):
    """Per node: probability nobody in S below requests, and |S below|."""
    none = [1.0] * instance.n
    count = [0] * instance.n
    for node in reversed(instance.nodes):
        v = node.id
        if v in s:
            none[v] *= 1.0 - node.prob
            count[v] += 1
        if node.parent is not None:
            none[node.parent] *= none[v]
            count[node.parent] += count[v]
    return none, count


def anchor_limit(instance: TreeInstance, S: Iterable[int]) -> float:
    """Largest admissible bonus for S: distance of the deepest node whose subtree holds S."""
    s = _as_set(instance, S)
    if not s:
        return math.inf
    _, count = _subtree_stats(instance, s)
    return max(node.dist for node in instance.nodes if count[node.id] == len(s))


def expected_cost(instance: TreeInstance, S: Iterable[int], x: float = 0.0) -> float:
    """Expected discounted tour cost of committing to S with bonus ``x``."""
    s = _as_set(instance, S)
    if not s:
        return 0.0
    none, count = _subtree_stats(instance, s)
    limit = max(node.dist for node in instance.nodes if count[node.id] == len(s))
    tol = 1e-12 * max(1.0, limit)
    if x < 0 or x > limit + tol:
        raise OracleError(f"bonus {x} outside [0, {limit}] for this set")
    total = math.fsum(node.edge_cost * (1.0 - none[node.id]) for node in instance.nodes if count[node.id])
    return total - x * (1.0 - none[instance.root])


def expected_profit(instance: TreeInstance, S: Iterable[int], x: float = 0.0) -> float:
    return expected_revenue(instance, S) - expected_cost(instance, S, x)


def recursive_expected_cost(instance: TreeInstance, S: Iterable[int], anchor: int, x: float) -> float:
    """Expected discounted cost by the literal sub-tree recursion, anchored at ``anchor``.

    Cost from a sub-tree root A is (d_A - x) P(S) plus, for each child sub-tree,
    the same quantity anchored at the child with bonus d_A. Test-scale only.
    """
    s = _as_set(instance, S)
    inside = set(instance.subtree(anchor))
    if not s <= inside:
        raise OracleError(f"set is not contained in the subtree of {anchor}")

    def rec(a: int, bonus: float) -> float:
        d_a = instance.node(a).dist
        total = (d_a - bonus) * prob_any(instance, s & set(instance.subtree(a)))
        for c in instance.children[a]:
            part = s & set(instance.subtree(c))
            if part:
                total += rec(c, d_a)
        return total

    return rec(anchor, x)


# -- exhaustive search ----------------------------------------------------------

@dataclass(frozen=True)
class SubsetLines:
    """Set profit lines of every subset of the customers under an anchor node.

    Subset ``m`` holds ``customers[b]`` iff bit b of m is set; its line is
    ``at_anchor[m] - (d_anchor - x) * slopes[m]``.
    """

    customers: tuple[int, ...]
    d_anchor: float
    slopes: np.ndarray
    at_anchor: np.ndarray

    def values(self, x: float) -> np.ndarray:
        return self.at_anchor - (self.d_anchor - x) * self.slopes

    def subset(self, mask: int) -> frozenset[int]:
        return frozenset(c for b, c in enumerate(self.customers) if mask >> b & 1)


def subset_lines(instance: TreeInstance, anchor: int | None = None, limit: int = MAX_BRUTE_FORCE) -> SubsetLines:
    a = instance.root if anchor is None else anchor
    members = instance.subtree(a)
    custs = tuple(v for v in members if instance.node(v).is_customer)
    k = len(custs)
    if k > limit:
        raise TooLargeError(f"{k} customers exceed the brute-force guard of {limit}")
    bit = {v: b for b, v in enumerate(custs)}
    # doubling builds per-mask products/sums in O(2^k)
    none = np.ones(1)
    rev = np.zeros(1)
    for v in custs:
        node = instance.node(v)
        none = np.concatenate((none, none * (1.0 - node.prob)))
        rev = np.concatenate((rev, rev + node.prize * node.prob))
    below = [0] * instance.n
    for node in reversed(instance.nodes):
        v = node.id
        if v in bit:
            below[v] |= 1 << bit[v]
        if node.parent is not None:
            below[node.parent] |= below[v]
    masks = np.arange(1 << k, dtype=np.int64)
    cost = np.zeros(1 << k)
    for node in instance.nodes:
        if node.edge_cost and below[node.id]:
            cost += node.edge_cost * (1.0 - none[masks & below[node.id]])
    d_a = instance.node(a).dist
    slopes = 1.0 - none
    # cost was accumulated from the depot; re-anchor it at bonus d_a
    at_anchor = rev - (cost - d_a * slopes)
    return SubsetLines(custs, d_a, slopes, at_anchor)


@dataclass(frozen=True)
class BruteForceResult:
    best_profit: float
    maximal_optimal_set: frozenset[int]
    all_optima: list[frozenset[int]]


def optimal_sets_at(lines: SubsetLines, x: float, rel_tol: float = 1e-11) -> BruteForceResult:
    vals = lines.values(x)
    best = float(vals.max())
    tol = rel_tol * max(1.0, float(np.abs(lines.at_anchor).max()), float(np.abs(vals).max()))
    hits = np.flatnonzero(vals >= best - tol)
    optima = [lines.subset(int(m)) for m in hits]
    union = frozenset().union(*optima)
    return BruteForceResult(best, union, optima)


def brute_force_solve(instance: TreeInstance, limit: int = MAX_BRUTE_FORCE) -> BruteForceResult:
    """Exhaustive maximum of expected profit at zero bonus over all customer subsets."""
    return optimal_sets_at(subset_lines(instance, limit=limit), 0.0)


# -- outcomes ----------------------------------------------------------------

def realized_cost(instance: TreeInstance, S: Iterable[int], outcome: Outcome) -> float:
    """Round-trip cost of the union of root paths to the requesting committed nodes."""
    paid: set[int] = set()
    total = 0.0
    for v in set(S) & outcome.requesting:
        while v is not None and v not in paid:
            paid.add(v)
            node = instance.node(v)
            total += node.edge_cost
            v = node.parent
    return total


def enumerated_expected_profit(instance: TreeInstance, S: Iterable[int], limit: int = 16) -> float:
    """Expected profit at zero bonus as an explicit sum over all request outcomes of S."""
    s = sorted(_as_set(instance, S))
    if len(s) > limit:
        raise TooLargeError(f"{len(s)} committed nodes exceed the enumeration guard of {limit}")
    terms = []
    for bits in itertools.product((0, 1), repeat=len(s)):
        omega = frozenset(v for v, b in zip(s, bits) if b)
        p = 1.0
        for v, b in zip(s, bits):
            pv = instance.node(v).prob
            p *= pv if b else 1.0 - pv
        revenue = sum(instance.node(v).prize for v in omega)
        terms.append(p * (revenue - realized_cost(instance, s, Outcome(omega))))
    return math.fsum(terms)


# -- Monte Carlo --------------------------------------------------------------

@dataclass(frozen=True)
class SimulationResult:
    samples: int
    mean_profit: float
    std_error: float
    mean_cost: float
    mean_revenue: float


def customer_streams(instance: TreeInstance, seed: int) -> dict[int, np.random.Generator]:
    """One PCG64 stream per customer, spawned from ``seed`` in preorder.

    A customer's draws therefore do not depend on which other nodes are committed
    or on how the samples are chunked.
    """
    custs = instance.customers
    children = np.random.SeedSequence(seed & (2**64 - 1)).spawn(len(custs))
    return {v: np.random.Generator(np.random.PCG64(ss)) for v, ss in zip(custs, children)}


def simulate(
    instance: TreeInstance,
    S: Iterable[int],
    samples: int,
    seed: int,
    chunk_size: int = 100_000,
) -> SimulationResult:
    """Sample daily request outcomes and average the realized profit of committing to S."""
    if samples < 1:
        raise OracleError("samples must be >= 1")
    s = _as_set(instance, S)
    if not s:
        return SimulationResult(samples, 0.0, 0.0, 0.0, 0.0)
    streams = customer_streams(instance, seed)
    # only nodes on a root path of S can ever be paid for
    relevant: set[int] = set()
    for v in s:
        while v is not None and v not in relevant:
            relevant.add(v)
            v = instance.node(v).parent
    order = [node for node in reversed(instance.nodes) if node.id in relevant]

    n_tot, mean_p, m2_p = 0, 0.0, 0.0
    sum_cost, sum_rev = 0.0, 0.0
    done = 0
    while done < samples:
        m = min(chunk_size, samples - done)
        req = {v: streams[v].random(m) < instance.node(v).prob for v in sorted(s)}
        active: dict[int, np.ndarray] = {}
        cost = np.zeros(m)
        revenue = np.zeros(m)
        for node in order:
            v = node.id
            act = active.pop(v, None)
            if v in req:
                revenue += node.prize * req[v]
                act = req[v] if act is None else act | req[v]
            if act is None:
                continue
            cost += node.edge_cost * act
            if node.parent is not None:
                prev = active.get(node.parent)
                active[node.parent] = act if prev is None else prev | act
        profit = revenue - cost
        # Chan's parallel update of the running mean / second moment
        c_mean = float(profit.mean())
        c_m2 = float(((profit - c_mean) ** 2).sum())
        delta = c_mean - mean_p
        tot = n_tot + m
        mean_p += delta * m / tot
        m2_p += c_m2 + delta * delta * n_tot * m / tot
        n_tot = tot
        sum_cost += float(cost.sum())
        sum_rev += float(revenue.sum())
        done += m
    se = math.sqrt(m2_p / (samples - 1) / samples) if samples > 1 else 0.0
    return SimulationResult(samples, mean_p, se, sum_cost / samples, sum_rev / samples)

