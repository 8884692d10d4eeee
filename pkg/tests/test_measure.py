import random

import pytest

from ctlf.engines import sat_bruteforce, sat_general
from ctlf.formula import af, ag, ax, ef, ex, land, lnot, prop, temporal_depth
from ctlf.kripke import BudgetError, model_check
from ctlf.measure import (
    count_sequences, min_model_extent, min_model_size, successor_sequences,
)
from ctlf.parser import parse_formula

from helpers import random_formula

p = prop("p")
q = prop("q")


def test_sequences_are_serial_and_generable():
    for k in (1, 2, 3):
        for succ in successor_sequences(k):
            assert all(mask for mask in succ)
            reached = {0}
            frontier = [0]
            while frontier:
                w = frontier.pop()
                for u in range(k):
                    if succ[w] >> u & 1 and u not in reached:
                        reached.add(u)
                        frontier.append(u)
            assert reached == set(range(k))


def test_sequence_counts_stable():
    assert count_sequences(1) == 1
    assert count_sequences(2) == 6
    assert count_sequences(3) == 154


def test_min_model_size_examples():
    # a root with a self-loop may witness its own EX p, so 2 worlds suffice
    r = min_model_size(parse_formula("EX p & EX !p"), 4)
    assert r.minimum == 2
    assert model_check(r.witness, parse_formula("EX p & EX !p"))
    assert min_model_size(p, 2).minimum == 1


def test_min_model_size_unsat_up_to_bound():
    r = min_model_size(parse_formula("p & !p"), 3)
    assert r.minimum is None
    assert not r.exhaustive


def test_min_model_extent_examples():
    r = min_model_extent(land(p, ex(lnot(p))), 3)
    assert r.minimum == 1
    f = parse_formula("p & q & AX(p & !q) & EF(!p & q)")
    r2 = min_model_extent(f, 4)
    assert r2.minimum == 2
    r3 = min_model_extent(ag(p), 2)
    assert r3.minimum == 0


def test_budget_refusal():
    with pytest.raises(BudgetError):
        min_model_size(parse_formula("p & !p"), 4, space_ceiling=100)
    with pytest.raises(BudgetError):
        min_model_size(parse_formula("a & b & c & d & e"), 2)


def test_size_bounds_extent():
    rng = random.Random(31)
    for _ in range(30):
        f = random_formula(rng, ["p", "q"], ["AX", "AG"], 7)
        rs = min_model_size(f, 3)
        if rs.minimum is None:
            continue
        re = min_model_extent(f, 3)
        assert re.minimum is not None
        assert re.minimum <= rs.minimum - 1 or rs.minimum == 1 and re.minimum == 0


def test_agreement_with_engines():
    rng = random.Random(37)
    for _ in range(60):
        f = random_formula(rng, ["p", "q"], ["AX", "AF", "AG", "AU"], 8)
        rs = min_model_size(f, 3)
        rg = sat_general(f)
        rb = sat_bruteforce(f, 3)
        if rs.minimum is not None:
            assert rg.status == "sat"
            assert rb.status == "sat" and rb.witness.size == rs.minimum
        else:
            assert rb.status == "unsat"


def test_flat_ax_extent_bound():
    # flat {AX} formulas admit witnesses of extent <= 1
    rng = random.Random(41)
    found = 0
    while found < 20:
        f = random_formula(rng, ["p", "q", "r"], ["AX"], 10, depth=1)
        if temporal_depth(f) != 1:
            continue
        r = min_model_extent(f, 3, prop_cap=3, stop_at=1)
        if r.minimum is None:
            continue
        assert r.minimum <= 1
        found += 1
