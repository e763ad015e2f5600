"""Characteristic functions as ordered record sequences.

A description covers the bonus domain [0, d_ref]. Record i is the set profit
line of the maximal optimal set S_i on [x_min, x_max): its slope is the
probability that some node of S_i requests service and ``q`` is its expected
profit at bonus d_ref, so the line reads ``q - (d_ref - x) * slope``. Sets are
nested, so each record only stores the nodes it adds to its predecessor.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Iterable

from .instance import Node

#: relative tolerance for breakpoint comparisons, multiplied by max(1, d_ref)
BREAK_TOL = 1e-12


def break_tol(d_ref: float) -> float:
    return BREAK_TOL * max(1.0, d_ref)


@dataclass(frozen=True, slots=True)
class Record:
    delta_set: tuple[int, ...]
    x_min: float
    x_max: float
    slope: float
    q: float

    def value_at(self, x: float, d_ref: float) -> float:
        return self.q - (d_ref - x) * self.slope


@dataclass(frozen=True)
class Description:
    d_ref: float
    records: tuple[Record, ...]

    def __len__(self) -> int:
        return len(self.records)

    @property
    def covered(self) -> frozenset[int]:
        """All nodes appearing in some record (the last cumulative set)."""
        return frozenset(v for r in self.records for v in r.delta_set)

    def cumulative_sets(self) -> list[frozenset[int]]:
        out, acc = [], set()
        for r in self.records:
            acc.update(r.delta_set)
            out.append(frozenset(acc))
        return out


def empty_description(d_ref: float) -> Description:
    return Description(d_ref, (Record((), 0.0, d_ref, 0.0, 0.0),))


def cumulative_set(desc: Description, i: int) -> frozenset[int]:
    if not 0 <= i < len(desc.records):
        raise IndexError(f"record index {i} out of range [0, {len(desc.records)})")
    return frozenset(v for r in desc.records[: i + 1] for v in r.delta_set)


def locate(desc: Description, x: float) -> int:
    """Index of the record whose domain holds ``x``; the right one at a shared endpoint."""
    if not 0.0 <= x <= desc.d_ref:
        raise ValueError(f"bonus {x} outside [0, {desc.d_ref}]")
    starts = [r.x_min for r in desc.records]
    return max(0, bisect.bisect_right(starts, x) - 1)


def evaluate(desc: Description, x: float) -> tuple[float, frozenset[int]]:
    i = locate(desc, x)
    return desc.records[i].value_at(x, desc.d_ref), cumulative_set(desc, i)


def leaf_description(v: Node, d_ref: float | None = None) -> Description:
    """Description of a single node anchored at its own distance.

    Junctions never enter; a customer enters once the bonus reaches
    ``d_ref - prize`` (right away when the prize covers the whole distance).
    """
    d = v.dist if d_ref is None else d_ref
    if not v.is_customer:
        return empty_description(d)
    p, pi = v.prize, v.prob
    if p >= d:
        return Description(d, (Record((v.id,), 0.0, d, pi, p * pi),))
    brk = d - p
    return Description(d, (
        Record((), 0.0, brk, 0.0, 0.0),
        Record((v.id,), brk, d, pi, p * pi),
    ))


def truncate_rebase(desc: Description, new_d_ref: float) -> Description:
    """Restrict to [0, new_d_ref] and re-anchor every ``q`` at the new reference.

    Records entering after ``new_d_ref`` are dropped; a record entering exactly
    at it survives as a single-point final record.
    """
    old = desc.d_ref
    if new_d_ref < 0 or new_d_ref > old:
        raise ValueError(f"cannot truncate description on [0, {old}] to [0, {new_d_ref}]")
    if new_d_ref == old:
        return desc
    tol = break_tol(old)
    shift = old - new_d_ref
    kept = []
    for k, r in enumerate(desc.records):
        if k > 0 and r.x_min > new_d_ref + tol:
            break
        kept.append(r)
    out = [Record(r.delta_set, r.x_min, r.x_max, r.slope, r.q - shift * r.slope) for r in kept[:-1]]
    last = kept[-1]
    out.append(Record(last.delta_set, min(last.x_min, new_d_ref), new_d_ref, last.slope, last.q - shift * last.slope))
    return Description(new_d_ref, tuple(out))


def check_description(desc: Description, tol: float = 1e-9) -> list[str]:
    """Structural violations of a description (empty when well formed)."""
    recs = desc.records
    bad = []
    if not recs:
        return ["no records"]
    if recs[0].x_min != 0.0:
        bad.append(f"first record starts at {recs[0].x_min}, not 0")
    if abs(recs[-1].x_max - desc.d_ref) > tol:
        bad.append(f"last record ends at {recs[-1].x_max}, not d_ref={desc.d_ref}")
    seen: set[int] = set()
    for k, r in enumerate(recs):
        if r.x_max < r.x_min - tol:
            bad.append(f"record {k}: x_max < x_min")
        if r.x_max - r.x_min <= 0 and k < len(recs) - 1 and desc.d_ref > 0:
            bad.append(f"record {k}: empty interior piece")
        if k > 0:
            if abs(recs[k - 1].x_max - r.x_min) > tol:
                bad.append(f"record {k}: gap between pieces")
            if not r.delta_set:
                bad.append(f"record {k}: set not strictly larger than predecessor")
            if not r.slope > recs[k - 1].slope:
                bad.append(f"record {k}: slope not strictly increasing")
            # continuity at the shared breakpoint
            left = recs[k - 1].value_at(r.x_min, desc.d_ref)
            right = r.value_at(r.x_min, desc.d_ref)
            if abs(left - right) > tol * max(1.0, abs(left)):
                bad.append(f"record {k}: discontinuity {left} vs {right} at x={r.x_min}")
        if seen.intersection(r.delta_set):
            bad.append(f"record {k}: node repeated across deltas")
        seen.update(r.delta_set)
        if not 0.0 <= r.slope <= 1.0:
            bad.append(f"record {k}: slope {r.slope} outside [0, 1]")
    if len(recs) > len(seen) + 1:
        bad.append(f"{len(recs)} pieces exceed covered nodes + 1 = {len(seen) + 1}")
    return bad


# -- TSV export ---------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.12g}"


def envelope_to_tsv(desc: Description) -> str:
    lines = [f"d_ref={_fmt(desc.d_ref)}"]
    for r in desc.records:
        ids = ",".join(str(v) for v in sorted(r.delta_set))
        lines.append("\t".join((_fmt(r.x_min), _fmt(r.x_max), _fmt(r.slope), _fmt(r.q), ids)))
    return "\n".join(lines) + "\n"


def envelope_from_tsv(text: str | Iterable[str]) -> Description:
    lines = text.splitlines() if isinstance(text, str) else list(text)
    head = lines[0].strip()
    if not head.startswith("d_ref="):
        raise ValueError("envelope TSV must start with a 'd_ref=<value>' header")
    records = []
    for line in lines[1:]:
        if not line.strip():
            continue
        cols = line.rstrip("\n").split("\t")
        if len(cols) != 5:
            raise ValueError(f"expected 5 tab-separated columns, got {len(cols)}: {line!r}")
        ids = tuple(int(t) for t in cols[4].split(",") if t)
        records.append(Record(ids, float(cols[0]), float(cols[1]), float(cols[2]), float(cols[3])))
    return Description(float(head[len("d_ref="):]), tuple(records))


def description_to_json(desc: Description) -> dict:
    return {
        "d_ref": desc.d_ref,
        "records": [
            {"x_min": r.x_min, "x_max": r.x_max, "slope": r.slope, "q": r.q, "added": sorted(r.delta_set)}
            for r in desc.records
        ],
    }
