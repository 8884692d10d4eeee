"""Acceptance suite: one test per criterion, each printing a PASS line with
its measured numbers.  Tolerances are pinned here, not configurable."""

import itertools
import random
import time

import pytest

from ctlf.clones import ag_translate, clone_generates, s1_transform, short_representation
from ctlf.engines import (
    SatBudget, dispatch, furl_ag_model, sat_ax_bounded, sat_balloon,
    sat_bruteforce, sat_flat, sat_general, shrink_flat_model,
)
from ctlf.formula import (
    Apply, Base, Prop, Quant, STD, TT_AND, TT_NIMPL, TT_NOT, TT_OR,
    formula_size, land, lnot, lor, operators_of, prop, propositions, quant,
    subformulas, temporal_depth,
)
from ctlf.kripke import extent, make_model, model_check, tree_unravel
from ctlf.measure import (
    check_frame, enumerate_frames, _formula_order, min_model_extent,
    min_model_size,
)
from ctlf.parser import render_formula
from ctlf.reductions import (
    ATM_VARIANT_BASE, FAMILY_BASES, Qbf, encode_atm, generate_family,
    parse_atm, qbf_eval, reduce_qbf_af, reduce_qbf_ag, simulate_atm,
)

from helpers import enumerate_formulas, random_formula

NIMPL_BASE = Base([TT_NIMPL])


def report(n, detail):
    print(f"\nACCEPTANCE {n}: PASS ({detail})")


def checked(engine, f, base=STD, budget=None):
    """Run an engine and enforce criterion 1 on the result."""
    r = engine(f, base, budget) if budget else engine(f, base)
    assert r.status in ("sat", "unsat"), (render_formula(f), r.reason)
    if r.status == "sat":
        assert r.witness is not None
        assert model_check(r.witness, f, base), render_formula(f)
    return r


# -- corpora -------------------------------------------------------------------

def _sample(rng, pairs, count, sizes=(7, 8)):
    out = []
    while len(out) < count:
        f = random_formula(rng, ["p", "q"], pairs, rng.choice(sizes))
        out.append(f)
    return out


@pytest.fixture(scope="module")
def corpora():
    rng = random.Random(20260808)
    ax = enumerate_formulas(["p", "q"], ["AX"], 6) + _sample(rng, ["AX"], 200)
    balloon = (enumerate_formulas(["p", "q"], ["AF", "AX"], 6)
               + _sample(rng, ["AF", "AX"], 200))
    all_pairs = ["AX", "AF", "AG", "AU", "AR"]
    flat = [f for f in enumerate_formulas(["p", "q"], all_pairs, 6)
            if temporal_depth(f) <= 1]
    flat += [f for f in _sample(rng, all_pairs, 400)
             if temporal_depth(f) <= 1][:200]
    return {"ax": ax, "balloon": balloon, "flat": flat}


def test_criterion_2_oracle_equivalence(corpora):
    t0 = time.time()
    disagreements = 0
    sat_seen = []
    unsat_seen = []

    def note(f, verdict):
        (sat_seen if verdict == "sat" else unsat_seen).append(f)

    for f in corpora["ax"]:
        ra, rg = checked(sat_ax_bounded, f), checked(sat_general, f)
        disagreements += ra.status != rg.status
        note(f, rg.status)
    for f in corpora["balloon"]:
        rb, rg = checked(sat_balloon, f), checked(sat_general, f)
        disagreements += rb.status != rg.status
        note(f, rg.status)
    for f in corpora["flat"]:
        rf, rg = checked(sat_flat, f), checked(sat_general, f)
        disagreements += rf.status != rg.status
        note(f, rg.status)
    assert disagreements == 0

    # brute-force leg: every sat verdict must be reproducible within 5 worlds;
    # every unsat verdict is refuted exhaustively over the 3-world catalog
    # (the full 5-world catalog is beyond desk scale; see the decisions ledger)
    sat_seen = list(dict.fromkeys(sat_seen))
    unsat_seen = list(dict.fromkeys(unsat_seen))
    for f in sat_seen:
        rb = sat_bruteforce(f, 5)
        assert rb.status == "sat", render_formula(f)
    catalog = {}
    for f in unsat_seen:
        props = tuple(sorted(propositions(f)))
        if props not in catalog:
            catalog[props] = [
                frame for k in (1, 2, 3)
                for frame in enumerate_frames(list(props), k)]
        order = _formula_order(f)
        assert not any(check_frame(fr, order, f, STD) for fr in catalog[props]), \
            render_formula(f)
    elapsed = time.time() - t0
    assert elapsed <= 600
    report(2, f"{len(corpora['ax']) + len(corpora['balloon']) + len(corpora['flat'])} "
              f"formulas, {len(sat_seen)} sat / {len(unsat_seen)} unsat distinct, "
              f"0 disagreements, {elapsed:.0f}s")


def _matrices(variables, max_size):
    by = {1: [prop(v) for v in variables]}
    for s in range(2, max_size + 1):
        out = [lnot(g) for g in by.get(s - 1, [])]
        for a_size in range(1, s - 3):
            for a in by.get(a_size, []):
                for b in by.get(s - 3 - a_size, []):
                    out.append(land(a, b))
                    out.append(lor(a, b))
        by[s] = list(dict.fromkeys(out))
    return [g for s in range(1, max_size + 1) for g in by.get(s, [])]


def test_criterion_3_tqbf_round_trip():
    t0 = time.time()
    af_count = ag_count = 0
    for nvars, reducer, tag in ((2, reduce_qbf_af, "af"), (3, reduce_qbf_ag, "ag")):
        for n in range(1, nvars + 1):
            variables = [f"x{i}" for i in range(1, n + 1)]
            mats = _matrices(variables, 6)
            for prefix in itertools.product("AE", repeat=n):
                for mat in mats:
                    q = Qbf(tuple(zip(prefix, variables)), mat)
                    f = reducer(q)
                    r = checked(sat_general, f)
                    assert (r.status == "sat") == qbf_eval(q), (
                        tag, prefix, render_formula(mat))
                    if tag == "af":
                        af_count += 1
                    else:
                        ag_count += 1
    elapsed = time.time() - t0
    assert elapsed <= 600
    report(3, f"{af_count} AF + {ag_count} AG instances, 100% agreement, "
              f"{elapsed:.0f}s")


def test_criterion_4_flat_model_bounds():
    rng = random.Random(44)
    cbase = STD.closure_base()
    done = 0
    t0 = time.time()
    specs = [("AX",), ("AG",), ("AX", "AG"), ("AX", "AF", "AG", "AU", "AR")]
    while done < 50:
        pairs = list(specs[done % len(specs)])
        f = random_formula(rng, ["p", "q", "r"], pairs, 12, depth=1)
        if temporal_depth(f) > 1:
            continue
        r = sat_flat(f)
        if r.status != "sat":
            continue
        assert model_check(r.witness, f)
        ops = operators_of(f)
        ext = extent(r.witness)
        if ops <= {"AX"} or ops <= {"AG"}:
            assert ext <= 1, render_formula(f)
        elif ops <= {"AX", "AG"}:
            assert ext <= 2, render_formula(f)
        # size bound 1 + m*(k+2) from the realized skeleton assignment
        atoms = [g for g in subformulas(f)
                 if isinstance(g, Quant)
                 and not any(g in subformulas(h) and g != h
                             for h in subformulas(f) if isinstance(h, Quant))]
        from ctlf.kripke import truth_sets
        sets = truth_sets(r.witness, f)
        m = k = 0
        for atom in atoms:
            true_here = bool(sets[atom] & (1 << r.witness.root))
            existential = (atom.quantifier == "E") == true_here
            if existential:
                m += 1
            else:
                k += 1
        assert r.witness.size <= 1 + max(m, 1) * (k + 2), render_formula(f)
        done += 1
    report(4, f"50 satisfiable flat formulas, extent/size bounds hold, "
              f"{time.time() - t0:.0f}s")


def test_criterion_5_fixed_instance_floors():
    t0 = time.time()
    # flat_axag(m=2): the enumeration-derived minimum is 2, meeting the
    # paper's floor m (the root may serve as one of the EX witnesses)
    f1 = generate_family("flat_axag", m=2)
    r1 = min_model_size(f1, 3, prop_cap=6)
    assert r1.minimum == 2
    assert r1.minimum >= 2

    # flat_af(m=2): no model within 3 worlds (exhaustive), witness exists
    f2 = generate_family("flat_af", m=2)
    r2 = min_model_size(f2, 3, prop_cap=3)
    assert r2.minimum is None
    w2 = checked(sat_flat, f2)
    assert w2.witness.size >= 4

    # extent floors from the flat {AX, AG} lower-bound instances
    p, q = prop("p"), prop("q")
    e1 = min_model_extent(land(p, quant("E", "X", (lnot(p),))), 3)
    assert e1.minimum == 1
    e2 = min_model_extent(land(p, quant("E", "F", (lnot(p),))), 3)
    assert e2.minimum == 1
    f3 = land(land(land(p, q), quant("A", "X", (land(p, lnot(q)),))),
              quant("E", "F", (land(lnot(p), q),)))
    e3 = min_model_extent(f3, 4)
    assert e3.minimum == 2
    report(5, f"floors: flat_axag(2)->2, flat_af(2) refuted at 3, "
              f"extents 1/1/2, {time.time() - t0:.0f}s")


def test_criterion_6_counter_growth():
    t0 = time.time()
    for n in (1, 2):
        f = generate_family("counter_agax", n=n)
        r = checked(sat_general, f)
        ext = extent(r.witness, world_cap=max(20, r.witness.size))
        assert ext >= 2 ** (n + 1) - 1, (n, ext)
    assert time.time() - t0 <= 300
    report(6, f"counter extents >= 3 and >= 7, {time.time() - t0:.0f}s")


def test_criterion_7_ax_family_floor():
    t0 = time.time()
    f = generate_family("ax", m=2, k=2)
    refute = min_model_size(f, 3, prop_cap=2)
    assert refute.minimum is None
    r = checked(sat_ax_bounded, f)
    assert r.witness.size >= 4
    assert time.time() - t0 <= 300
    report(7, f"phi(2,2) refuted at 3 worlds, witness of size "
              f"{r.witness.size} exists, {time.time() - t0:.0f}s")


def test_criterion_8_clone_pipeline():
    t0 = time.time()
    rng = random.Random(88)
    budget = SatBudget(closure_quant_cap=96)
    done = 0
    while done < 200:
        f = random_formula(rng, ["p", "q", "r"], ["AX", "AF", "AG", "AU", "AR"],
                           rng.randint(4, 10), depth=2)
        if formula_size(f) > 10:
            continue
        base_verdict = checked(sat_general, f).status
        s1 = s1_transform(f, NIMPL_BASE)
        s1_verdict = sat_general(s1, NIMPL_BASE, budget).status
        ag = ag_translate(f)
        ag_verdict = sat_general(ag, STD, budget).status
        assert s1_verdict == base_verdict, render_formula(f)
        assert ag_verdict == base_verdict, render_formula(f)
        done += 1
    assert clone_generates(NIMPL_BASE, TT_AND)
    rep = short_representation(Base([TT_NOT, TT_OR]), TT_AND)
    assert render_formula(rep) == "!(!x | !y)"
    report(8, f"200 formulas, s1/ag translations preserve verdicts, "
              f"{time.time() - t0:.0f}s")


def _positive_ag_formula(rng):
    def pos(depth):
        roll = rng.random()
        if depth == 0 or roll < 0.3:
            base = prop(rng.choice(["p", "q"]))
            return base if rng.random() < 0.7 else lnot(base)
        if roll < 0.5:
            return land(pos(depth - 1), pos(depth - 1))
        if roll < 0.65:
            return lor(pos(depth - 1), pos(depth - 1))
        if roll < 0.85:
            return quant("E", "F", (pos(depth - 1),))
        return quant("A", "G", (pos(depth - 1),))

    return pos(3)


def test_criterion_9_constructive_shrinking():
    t0 = time.time()
    rng = random.Random(99)

    furl_done = 0
    while furl_done < 30:
        f = _positive_ag_formula(rng)
        if not operators_of(f) <= {"AG"} or temporal_depth(f) == 0:
            continue
        r = sat_general(f)
        if r.status != "sat":
            continue
        oversized = tree_unravel(r.witness, 3)
        out = furl_ag_model(oversized, f)
        ef_subs = sum(1 for g in subformulas(f)
                      if isinstance(g, Quant) and (g.quantifier, g.op) == ("E", "F"))
        assert model_check(out, f)
        assert extent(out, world_cap=max(20, out.size)) <= max(ef_subs, 0), \
            render_formula(f)
        furl_done += 1

    shrink_done = 0
    while shrink_done < 30:
        f = random_formula(rng, ["p", "q"], ["AX", "AF", "AG", "AU", "AR"], 10,
                           depth=1)
        if temporal_depth(f) != 1:
            continue
        r = sat_flat(f)
        if r.status != "sat":
            continue
        padded = _pad_branches(r.witness)
        assert model_check(padded, f)
        out = shrink_flat_model(padded, f)
        assert model_check(out, f)
        assert out.size <= padded.size
        shrink_done += 1
    report(9, f"30 furl + 30 shrink constructions verified, "
              f"{time.time() - t0:.0f}s")


def _pad_branches(model):
    """Rebuild each branch with every world duplicated (stuttering preserves
    flat truths, including the X step at position 1)."""
    from ctlf.engines import _branches_of
    s = model.structure
    branches = _branches_of(model)
    labels = [s.world_labels(model.root)]
    edges = []
    for chain in branches:
        seq = [s.world_labels(w) for w in chain] or [s.world_labels(model.root)]
        prev = 0
        for val in seq:
            for _ in range(2):
                idx = len(labels)
                labels.append(val)
                edges.append((prev, idx))
                prev = idx
        edges.append((prev, prev))
    if not branches:
        edges.append((0, 0))
    return make_model(labels, sorted(set(edges)), 0)


ATM_ACCEPT = """
state qa exists
state qr exists
init qa
accept qa
reject qr
blank u
space 1
trans qa a -> qa a S
trans qa u -> qa u S
trans qr a -> qr a S
trans qr u -> qr u S
"""

ATM_BRANCH = """
state q0 exists
state qa exists
state qr exists
init q0
accept qa
reject qr
blank u
space 1
trans q0 a -> qa a S
trans q0 b -> qr b S
trans q0 u -> qr u S
"""


def test_criterion_10_atm_encoding():
    t0 = time.time()
    budget_template = dict(closure_quant_cap=128, node_cap=400_000)
    cases = []
    accept = parse_atm(ATM_ACCEPT)
    reject = parse_atm(ATM_ACCEPT.replace("init qa", "init qr"))
    branch = parse_atm(ATM_BRANCH)
    cases.append((accept, "a"))
    cases.append((reject, "a"))
    cases.append((branch, "a"))
    cases.append((branch, "b"))
    total = 0
    for machine, word in cases:
        expected = simulate_atm(machine, word)
        for variant in ("ag_ax", "ag_af", "au", "ar"):
            f = encode_atm(machine, word, variant)
            r = sat_general(f, ATM_VARIANT_BASE[variant],
                            SatBudget(**budget_template))
            assert r.status == ("sat" if expected else "unsat"), (variant, word)
            if r.status == "sat":
                assert model_check(r.witness, f, ATM_VARIANT_BASE[variant])
            total += 1
    elapsed = time.time() - t0
    assert elapsed <= 600
    report(10, f"{total} machine/variant verdicts match direct simulation, "
               f"{elapsed:.0f}s")


def test_criterion_1_engine_soundness(corpora):
    # Witness validation is asserted inside checked() everywhere above and
    # inside every engine; this re-checks a dispatcher sample end to end.
    rng = random.Random(11)
    violations = 0
    for _ in range(300):
        f = random_formula(rng, ["p", "q"], ["AX", "AF", "AG", "AU", "AR"], 9)
        r = dispatch(f)
        if r.status == "sat" and not model_check(r.witness, f):
            violations += 1
    assert violations == 0
    report(1, "0 witness violations across 300 dispatched formulas "
              "(plus every sat verdict in criteria 2-10)")
