"""Tree instances: validation, JSON (de)serialization and seeded generation.

A node is either a customer (prize > 0, request probability in (0, 1]) or a
junction of the road network that can never be selected. Edge costs are
round-trip costs of the edge to the parent; the depot is node 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

CUSTOMER = "customer"
JUNCTION = "junction"
ROUND_TRIP = "round_trip"
ONE_WAY = "one_way"


class InstanceError(ValueError):
    """Raised when instance data violates the format or a tree invariant."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True, slots=True)
class Node:
    id: int
    parent: int | None
    edge_cost: float
    kind: str
    prize: float | None = None
    prob: float | None = None
    dist: float = 0.0

    @property
    def is_customer(self) -> bool:
        return self.kind == CUSTOMER


@dataclass(frozen=True)
class TreeInstance:
    """Immutable rooted tree. ``nodes`` is in preorder; look nodes up by id with ``node``."""

    name: str
    nodes: tuple[Node, ...]
    children: tuple[tuple[int, ...], ...]
    _pos: tuple[int, ...] = field(repr=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def root(self) -> int:
        return self.nodes[0].id

    def node(self, node_id: int) -> Node:
        return self.nodes[self._pos[node_id]]

    def __contains__(self, node_id: object) -> bool:
        return isinstance(node_id, (int, np.integer)) and 0 <= node_id < len(self.nodes)

    @property
    def customers(self) -> tuple[int, ...]:
        return tuple(v.id for v in self.nodes if v.is_customer)

    def subtree(self, node_id: int) -> list[int]:
        """Ids of the subtree rooted at ``node_id``, in preorder."""
        out, stack = [], [node_id]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(reversed(self.children[v]))
        return out


def _check_real(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def check_instance_data(data: Mapping[str, Any]) -> list[str]:
    """Return every violation found in decoded instance JSON (empty list if valid)."""
    problems: list[str] = []
    raw = data.get("nodes") if isinstance(data, Mapping) else None
    if not isinstance(raw, list) or not raw:
        return ["malformed: 'nodes' must be a non-empty list"]
    conv = data.get("cost_convention", ROUND_TRIP)
    if conv not in (ROUND_TRIP, ONE_WAY):
        problems.append(f"malformed: unknown cost_convention {conv!r}")

    ids: dict[int, Mapping[str, Any]] = {}
    for k, rec in enumerate(raw):
        if not isinstance(rec, Mapping) or not isinstance(rec.get("id"), int) or isinstance(rec.get("id"), bool):
            problems.append(f"malformed: node entry #{k} has no integer id")
            continue
        nid = rec["id"]
        if nid in ids:
            problems.append(f"node {nid}: duplicate id")
            continue
        ids[nid] = rec
    n = len(raw)
    for nid in ids:
        if not 0 <= nid < n:
            problems.append(f"node {nid}: id outside dense range [0, {n})")

    roots = [nid for nid, rec in ids.items() if rec.get("parent") is None]
    if not roots:
        problems.append("missing root: no node with parent null")
    elif len(roots) > 1:
        problems.append(f"multiple roots: {sorted(roots)}")
    elif roots[0] != 0:
        problems.append(f"node {roots[0]}: root must have id 0")

    for nid, rec in ids.items():
        parent = rec.get("parent")
        if parent is not None and (not isinstance(parent, int) or parent not in ids):
            problems.append(f"node {nid}: unknown parent {parent!r}")
        cost = rec.get("edge_cost")
        if not _check_real(cost):
            problems.append(f"node {nid}: edge_cost must be a finite real")
        elif cost < 0:
            problems.append(f"node {nid}: negative edge cost {cost}")
        elif parent is None and cost != 0:
            problems.append(f"node {nid}: root edge_cost must be 0")
        kind = rec.get("kind")
        if kind == CUSTOMER:
            prize, prob = rec.get("prize"), rec.get("prob")
            if not _check_real(prize) or prize <= 0:
                problems.append(f"node {nid}: prize must be > 0 (got {prize!r})")
            if not _check_real(prob) or not 0 < prob <= 1:
                problems.append(f"node {nid}: prob outside (0,1] (got {prob!r})")
        elif kind == JUNCTION:
            if rec.get("prize") is not None or rec.get("prob") is not None:
                problems.append(f"node {nid}: junction must not carry prize/prob")
        else:
            problems.append(f"node {nid}: unknown kind {kind!r}")

    # every node must reach the root by parent links
    if len(roots) == 1:
        grounded = {roots[0]}
        for nid in ids:
            path: list[int] = []
            on_path: set[int] = set()
            v = nid
            while v in ids and v not in grounded and v not in on_path:
                path.append(v)
                on_path.add(v)
                p = ids[v].get("parent")
                v = p if isinstance(p, int) and not isinstance(p, bool) else None
            if v in on_path:
                problems.append(f"node {v}: cycle in parent links")
            # marks dead ends and cycles too, so each chain is reported once
            grounded.update(path)
    return problems


def build_instance(data: Mapping[str, Any], cost_convention: str | None = None) -> TreeInstance:
    """Validate decoded JSON and build a preorder-canonical TreeInstance.

    ``cost_convention`` overrides the file's own field; ``one_way`` doubles every
    edge cost on ingest.
    """
    problems = check_instance_data(data)
    conv = cost_convention or data.get("cost_convention", ROUND_TRIP)
    if conv not in (ROUND_TRIP, ONE_WAY):
        problems.append(f"unknown cost convention {conv!r}")
    if problems:
        raise InstanceError(problems)
    scale = 2.0 if conv == ONE_WAY else 1.0
    recs = {r["id"]: r for r in data["nodes"]}
    n = len(recs)
    kids: list[list[int]] = [[] for _ in range(n)]
    for nid in sorted(recs):
        p = recs[nid]["parent"]
        if p is not None:
            kids[p].append(nid)
    return _assemble(
        str(data.get("name", "")),
        n,
        parents=[recs[i]["parent"] for i in range(n)],
        costs=[float(recs[i]["edge_cost"]) * scale for i in range(n)],
        kinds=[recs[i]["kind"] for i in range(n)],
        prizes=[recs[i].get("prize") for i in range(n)],
        probs=[recs[i].get("prob") for i in range(n)],
        kids=kids,
    )


def _assemble(name, n, parents, costs, kinds, prizes, probs, kids) -> TreeInstance:
    order, stack = [], [0]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(reversed(kids[v]))
    dist = [0.0] * n
    nodes = []
    for v in order:
        p = parents[v]
        if p is not None:
            dist[v] = dist[p] + costs[v]
        cust = kinds[v] == CUSTOMER
        nodes.append(Node(
            id=v,
            parent=p,
            edge_cost=costs[v],
            kind=kinds[v],
            prize=float(prizes[v]) if cust else None,
            prob=float(probs[v]) if cust else None,
            dist=dist[v],
        ))
    pos = [0] * n
    for k, v in enumerate(order):
        pos[v] = k
    return TreeInstance(name, tuple(nodes), tuple(tuple(c) for c in kids), tuple(pos))


def parse_instance(text: str, cost_convention: str | None = None) -> TreeInstance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError([f"malformed JSON: {exc}"]) from None
    if not isinstance(data, dict):
        raise InstanceError(["malformed: top level must be a JSON object"])
    return build_instance(data, cost_convention)


def load_instance(path, cost_convention: str | None = None) -> TreeInstance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read(), cost_convention)


def instance_to_dict(inst: TreeInstance) -> dict[str, Any]:
    nodes = []
    for v in inst.nodes:
        rec: dict[str, Any] = {"id": v.id, "parent": v.parent, "edge_cost": v.edge_cost, "kind": v.kind}
        if v.is_customer:
            rec["prize"] = v.prize
            rec["prob"] = v.prob
        nodes.append(rec)
    return {"name": inst.name, "cost_convention": ROUND_TRIP, "nodes": nodes}


def serialize_instance(inst: TreeInstance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1)


# -- generation ---------------------------------------------------------------

SHAPES = ("random", "caterpillar", "balanced", "path", "star")


@dataclass(frozen=True)
class GeneratorParams:
    """Knobs for ``generate_instance``. Ranges are closed [lo, hi] and sampled uniformly."""

    max_children: int = 3
    edge_cost_range: tuple[float, float] = (1.0, 10.0)
    prize_range: tuple[float, float] = (1.0, 20.0)
    prob_range: tuple[float, float] = (0.05, 1.0)
    junction_fraction: float = 0.2
    shape: str = "random"

    def validate(self) -> None:
        bad = []
        if self.max_children < 1:
            bad.append("max_children must be >= 1")
        lo, hi = self.edge_cost_range
        if not 0 <= lo <= hi:
            bad.append("edge_cost_range must satisfy 0 <= lo <= hi")
        lo, hi = self.prize_range
        if not 0 < lo <= hi:
            bad.append("prize_range must satisfy 0 < lo <= hi")
        lo, hi = self.prob_range
        if not 0 < lo <= hi <= 1:
            bad.append("prob_range must satisfy 0 < lo <= hi <= 1")
        if not 0 <= self.junction_fraction <= 1:
            bad.append("junction_fraction must lie in [0, 1]")
        if self.shape not in SHAPES:
            bad.append(f"shape must be one of {SHAPES}")
        if bad:
            raise ValueError("; ".join(bad))


def _shape_parents(n: int, params: GeneratorParams, rng: np.random.Generator) -> list[int | None]:
    parents: list[int | None] = [None] * n
    if params.shape == "path":
        for v in range(1, n):
            parents[v] = v - 1
    elif params.shape == "star":
        for v in range(1, n):
            parents[v] = 0
    elif params.shape == "balanced":
        k = params.max_children
        for v in range(1, n):
            parents[v] = (v - 1) // k
    elif params.shape == "caterpillar":
        # spine on even ids, one leg hanging from each spine node
        for v in range(1, n):
            parents[v] = v - 2 if v % 2 == 0 else v - 1
    else:
        open_slots = [0]
        nkids = [0] * n
        for v in range(1, n):
            k = int(rng.integers(len(open_slots)))
            p = open_slots[k]
            parents[v] = p
            nkids[p] += 1
            if nkids[p] >= params.max_children:
                open_slots[k] = open_slots[-1]
                open_slots.pop()
            open_slots.append(v)
    return parents


def generate_instance(n: int, seed: int, params: GeneratorParams | None = None, name: str | None = None) -> TreeInstance:
    """Random instance with a junction root; deterministic in (n, seed, params)."""
    params = params or GeneratorParams()
    if n < 1:
        raise ValueError("n must be >= 1")
    params.validate()
    rng = np.random.default_rng(np.random.SeedSequence(seed & (2**64 - 1)))
    parents = _shape_parents(n, params, rng)
    n_junctions = int(round(params.junction_fraction * (n - 1)))
    junctions = set((rng.permutation(n - 1)[:n_junctions] + 1).tolist()) | {0}
    costs = [0.0] + rng.uniform(*params.edge_cost_range, size=n - 1).tolist()
    prizes = rng.uniform(*params.prize_range, size=n).tolist()
    probs = rng.uniform(*params.prob_range, size=n).tolist()
    kinds = [JUNCTION if v in junctions else CUSTOMER for v in range(n)]
    kids: list[list[int]] = [[] for _ in range(n)]
    for v in range(1, n):
        kids[parents[v]].append(v)
    # relabel to preorder so ids follow the canonical iteration order
    order, stack = [], [0]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(reversed(kids[v]))
    new = {old: k for k, old in enumerate(order)}
    data = {
        "name": name or f"gen-{params.shape}-n{n}-s{seed}",
        "nodes": [
            {
                "id": new[v],
                "parent": None if parents[v] is None else new[parents[v]],
                "edge_cost": costs[v],
                "kind": kinds[v],
                **({"prize": prizes[v], "prob": probs[v]} if kinds[v] == CUSTOMER else {}),
            }
            for v in order
        ],
    }
    return build_instance(data)


def instance_from_parents(
    parents: Sequence[int | None],
    edge_costs: Sequence[float],
    prizes: Sequence[float | None],
    probs: Sequence[float | None],
    name: str = "",
) -> TreeInstance:
    """Convenience builder; a node with ``prize is None`` is a junction."""
    nodes = []
    for v, (p, c, pr, pb) in enumerate(zip(parents, edge_costs, prizes, probs)):
        rec: dict[str, Any] = {"id": v, "parent": p, "edge_cost": c, "kind": JUNCTION if pr is None else CUSTOMER}
        if pr is not None:
            rec["prize"], rec["prob"] = pr, pb
        nodes.append(rec)
    return build_instance({"name": name, "nodes": nodes})


def structurally_equal(a: TreeInstance, b: TreeInstance) -> bool:
    return a.name == b.name and a.nodes == b.nodes and a.children == b.children
