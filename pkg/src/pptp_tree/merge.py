"""Merging the descriptions of two disjoint groups of sub-trees.

The merged chain of optimal sets is grown one step at a time from pairs
(B_i, C_j) of the input chains. Which side advances is decided by comparing
entry thresholds, and an upper envelope of the candidate lines is maintained
on a stack, so a merge costs O(n_B + n_C).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .envelope import Description, Record, break_tol

#: slopes closer than this are treated as equal in the intersection step
SLOPE_TOL = 1e-12


class MergeError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class ThresholdQuery:
    entering_x_min: float
    committed_slope: float
    d_ref: float


def virtual_bonus(x: float, committed_slope: float, d_ref: float) -> float:
    """Bonus seen by a disjoint group once a set with ``committed_slope`` is committed."""
    return d_ref - (d_ref - x) * (1.0 - committed_slope)


def entry_threshold(query: ThresholdQuery) -> float:
    """Least bonus at which the entering record becomes optimal given the committed set.

    Returns ``-inf`` when the committed set requests service with certainty.
    """
    rest = 1.0 - query.committed_slope
    if rest <= 0.0:
        return -math.inf
    return query.d_ref - (query.d_ref - query.entering_x_min) / rest


def _threshold(x_min: float, slope: float, d: float) -> float:
    rest = 1.0 - slope
    if rest <= 0.0:
        return -math.inf
    return d - (d - x_min) / rest


@dataclass
class MergeStats:
    pushes: int = 0
    pops: int = 0


def merge(
    desc_b: Description,
    desc_c: Description,
    stats: MergeStats | None = None,
    validate: bool = True,
) -> Description:
    """Description of the union group of two disjoint groups anchored at the same root.

    ``validate=False`` skips the overlap check; callers that build groups from
    distinct sub-trees know they are disjoint.
    """
    d = desc_b.d_ref
    if abs(d - desc_c.d_ref) > break_tol(max(d, desc_c.d_ref)):
        raise MergeError(f"mismatched d_ref: {desc_b.d_ref} vs {desc_c.d_ref}")
    if validate:
        check_disjoint(desc_b, desc_c)
    rb, rc = desc_b.records, desc_c.records
    nb, nc = len(rb) - 1, len(rc) - 1
    xb = [r.x_min for r in rb]
    xc = [r.x_min for r in rc]
    pb = [r.slope for r in rb]
    pc = [r.slope for r in rc]
    qb = [r.q for r in rb]
    qc = [r.q for r in rc]
    tol = break_tol(d)

    # stack entries: [x_min, slope, q, i, j]
    stack = [[0.0, 1.0 - (1.0 - pb[0]) * (1.0 - pc[0]), qb[0] + qc[0], 0, 0]]
    pushes, pops = 1, 0
    i = j = 0
    while i < nb or j < nc:
        if i == nb:
            j += 1
        elif j == nc:
            i += 1
        elif _threshold(xb[i + 1], pc[j], d) <= _threshold(xc[j + 1], pb[i], d):
            i += 1
        else:
            j += 1
        slope = 1.0 - (1.0 - pb[i]) * (1.0 - pc[j])
        q = qb[i] + qc[j]
        while True:
            top = stack[-1]
            ds = slope - top[1]
            if ds < SLOPE_TOL:
                # supersets never lose at d_ref, so an equal slope means domination
                x = -math.inf
            else:
                x = d - (q - top[2]) / ds
            if x <= top[0] + tol:
                stack.pop()
                pops += 1
                if stack:
                    continue
                x = 0.0
            break
        stack.append([min(max(x, 0.0), d), slope, q, i, j])
        pushes += 1

    if stats is not None:
        stats.pushes += pushes
        stats.pops += pops

    records = []
    pi = pj = -1
    for k, (x_min, slope, q, i, j) in enumerate(stack):
        delta = [v for r in rb[pi + 1:i + 1] for v in r.delta_set]
        delta.extend(v for r in rc[pj + 1:j + 1] for v in r.delta_set)
        x_max = stack[k + 1][0] if k + 1 < len(stack) else d
        records.append(Record(tuple(delta), x_min, x_max, slope, q))
        pi, pj = i, j
    return Description(d, tuple(records))


def check_disjoint(desc_b: Description, desc_c: Description) -> None:
    shared = desc_b.covered & desc_c.covered
    if shared:
        raise MergeError(f"overlapping node sets: {sorted(shared)}")
