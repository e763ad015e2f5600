import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import small_trees, tie_heavy_instance
from pptp_tree import oracle
from pptp_tree.envelope import (
    Description,
    Record,
    check_description,
    cumulative_set,
    empty_description,
    envelope_from_tsv,
    envelope_to_tsv,
    evaluate,
    leaf_description,
    truncate_rebase,
)
from pptp_tree.instance import Node
from pptp_tree.solver import solve_tree


def customer(prize, prob, dist, vid=1):
    return Node(id=vid, parent=0, edge_cost=dist, kind="customer", prize=prize, prob=prob, dist=dist)


def all_descriptions(inst):
    out = {}
    solve_tree(inst, on_node=lambda v, d: out.__setitem__(v, d))
    return out


def test_cumulative_set():
    assert cumulative_set(empty_description(3.0), 0) == frozenset()
    desc = Description(5.0, (Record((1,), 0, 2, 0.5, 1.0), Record((2,), 2, 5, 0.75, 2.0)))
    assert cumulative_set(desc, 0) == {1}
    assert cumulative_set(desc, 1) == {1, 2}
    with pytest.raises(IndexError):
        cumulative_set(desc, 2)


def test_evaluate_empty():
    desc = empty_description(7.0)
    for x in (0.0, 3.5, 7.0):
        assert evaluate(desc, x) == (0.0, frozenset())


def test_evaluate_leaf():
    desc = leaf_description(customer(6, 0.5, 4))
    assert evaluate(desc, 4.0) == (3.0, {1})
    assert evaluate(desc, 0.0) == (1.0, {1})
    with pytest.raises(ValueError):
        evaluate(desc, 4.5)
    with pytest.raises(ValueError):
        evaluate(desc, -0.1)


def test_evaluate_prefers_right_record_at_breakpoint():
    desc = leaf_description(customer(2, 0.5, 4))
    assert evaluate(desc, 2.0) == (0.0, {1})
    assert evaluate(desc, 1.999)[1] == frozenset()


def test_leaf_prize_covers_distance():
    assert leaf_description(customer(6, 0.5, 4)).records == (Record((1,), 0.0, 4.0, 0.5, 3.0),)


def test_leaf_prize_below_distance():
    assert leaf_description(customer(2, 0.5, 4)).records == (
        Record((), 0.0, 2.0, 0.0, 0.0),
        Record((1,), 2.0, 4.0, 0.5, 1.0),
    )


def test_leaf_junction():
    node = Node(id=3, parent=0, edge_cost=4, kind="junction", dist=4.0)
    assert leaf_description(node).records == (Record((), 0.0, 4.0, 0.0, 0.0),)


def test_leaf_at_depot_distance_zero():
    desc = leaf_description(customer(1, 0.3, 0.0))
    assert desc.records == (Record((1,), 0.0, 0.0, 0.3, 0.3),)


def test_truncate_identity():
    desc = leaf_description(customer(2, 0.5, 4))
    assert truncate_rebase(desc, 4.0) == desc


def test_truncate_rebases_q():
    desc = truncate_rebase(leaf_description(customer(2, 0.5, 4)), 3.0)
    assert desc.d_ref == 3.0
    assert desc.records == (Record((), 0.0, 2.0, 0.0, 0.0), Record((1,), 2.0, 3.0, 0.5, 0.5))


def test_truncate_drops_late_entries():
    desc = truncate_rebase(leaf_description(customer(2, 0.5, 4)), 1.0)
    assert desc.records == (Record((), 0.0, 1.0, 0.0, 0.0),)


def test_truncate_keeps_entry_at_new_reference():
    # customer enters exactly at bonus 2: single-point final record
    desc = truncate_rebase(leaf_description(customer(2, 0.5, 4)), 2.0)
    assert desc.records == (Record((), 0.0, 2.0, 0.0, 0.0), Record((1,), 2.0, 2.0, 0.5, 0.0))
    assert not check_description(desc)
    assert evaluate(desc, 2.0) == (0.0, {1})


def test_truncate_errors():
    desc = leaf_description(customer(2, 0.5, 4))
    with pytest.raises(ValueError):
        truncate_rebase(desc, 5.0)
    with pytest.raises(ValueError):
        truncate_rebase(desc, -1.0)


def test_tsv_round_trip():
    desc = Description(5.0, (Record((), 0, 2, 0, 0), Record((3, 1), 2, 5, 0.75, 2.0)))
    text = envelope_to_tsv(desc)
    assert text.splitlines()[0] == "d_ref=5"
    assert text.splitlines()[2] == "2\t5\t0.75\t2\t1,3"
    back = envelope_from_tsv(text)
    assert back.d_ref == 5.0
    assert [cumulative_set(back, i) for i in range(2)] == [frozenset(), {1, 3}]
    with pytest.raises(ValueError):
        envelope_from_tsv("x_min\tx_max\n")


def _own_line_max(desc, x):
    return max(r.q - (desc.d_ref - x) * r.slope for r in desc.records)


@settings(max_examples=40, deadline=None)
@given(small_trees())
def test_envelope_is_max_of_its_lines(inst):
    for desc in all_descriptions(inst).values():
        assert not check_description(desc)
        for x in np.linspace(0.0, desc.d_ref, 1000):
            val, _ = evaluate(desc, float(x))
            assert val == pytest.approx(_own_line_max(desc, x), rel=1e-12, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(small_trees())
def test_slopes_and_q_rederived_from_sets(inst):
    for desc in all_descriptions(inst).values():
        for i, rec in enumerate(desc.records):
            S = cumulative_set(desc, i)
            assert rec.slope == pytest.approx(oracle.prob_any(inst, S), abs=1e-12)
            assert rec.q == pytest.approx(oracle.expected_profit(inst, S, desc.d_ref), rel=1e-9, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(small_trees(), st.floats(0.0, 1.0))
def test_truncation_preserves_values(inst, frac):
    for desc in all_descriptions(inst).values():
        new_d = desc.d_ref * frac
        cut = truncate_rebase(desc, new_d)
        assert not check_description(cut)
        for x in np.linspace(0.0, new_d, 50):
            assert evaluate(cut, float(x))[0] == pytest.approx(evaluate(desc, float(x))[0], rel=1e-9, abs=1e-9)


def _check_against_brute_force(inst):
    for v, desc in all_descriptions(inst).items():
        lines = oracle.subset_lines(inst, v)
        cuts = {r.x_min for r in desc.records}
        for x in np.linspace(0.0, desc.d_ref, 60):
            x = float(x)
            val, S = evaluate(desc, x)
            best = oracle.optimal_sets_at(lines, x)
            assert val == pytest.approx(best.best_profit, rel=1e-9, abs=1e-9)
            if min(abs(x - c) for c in cuts) > 1e-9:
                assert S == best.maximal_optimal_set
            else:
                assert S in best.all_optima


@settings(max_examples=40, deadline=None)
@given(small_trees())
def test_every_subtree_envelope_matches_brute_force(inst):
    _check_against_brute_force(inst)


@pytest.mark.parametrize("seed", range(40))
def test_tie_heavy_envelopes_match_brute_force(seed):
    _check_against_brute_force(tie_heavy_instance(seed))
