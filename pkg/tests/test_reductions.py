import itertools

import pytest

from ctlf.engines import sat_general, SatBudget
from ctlf.formula import (
    Quant, closure, formula_size, fragment, in_fragment, land, lnot, lor,
    prop, propositions, subformulas, temporal_depth,
)
from ctlf.kripke import extent
from ctlf.parser import parse_formula, render_formula
from ctlf.reductions import (
    ATM_VARIANT_BASE, FAMILY_BASES, Qbf, ReductionError, encode_atm,
    generate_family, parse_atm, parse_qbf, qbf_eval, qbf_proof_tree,
    reduce_qbf_af, reduce_qbf_ag, simulate_atm, validate_proof_tree,
)

ACCEPT_MACHINE = """
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

REJECT_MACHINE = ACCEPT_MACHINE.replace("init qa", "init qr")

BRANCH_MACHINE = """
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


# -- QBF ----------------------------------------------------------------------

def test_parse_qbf():
    q = parse_qbf("A x E y : (x <-> y)")
    assert q.prefix == (("A", "x"), ("E", "y"))
    parse_qbf("E x : (x & !x)")  # parses; evaluation is separate
    with pytest.raises(ReductionError, match="free"):
        parse_qbf("A x : y")
    with pytest.raises(ReductionError, match="duplicate"):
        parse_qbf("A x E x : x")


def test_qbf_eval():
    assert qbf_eval(parse_qbf("A x E y : (x <-> y)"))
    assert not qbf_eval(parse_qbf("E x : (x & !x)"))
    assert qbf_eval(parse_qbf("A x : (x | !x)"))


def test_qbf_proof_tree():
    q = parse_qbf("A x E y : (x <-> y)")
    tree = qbf_proof_tree(q)
    assert tree is not None
    assert validate_proof_tree(tree, q) == []
    # two universal children, one existential child each
    root_children = [v for (u, v) in tree.edges if tree.nodes[u] == ()]
    assert len(root_children) == 2

    t2 = qbf_proof_tree(parse_qbf("E x : x"))
    assert len(t2.nodes) == 2 and t2.nodes[1] == (("x", True),)
    assert qbf_proof_tree(parse_qbf("A x : x")) is None


def test_proof_tree_exists_iff_true():
    for text in ["A x : x", "E x : x", "A x E y : (x <-> y)",
                 "E x A y : (x | y)", "A x A y : (x | !y)"]:
        q = parse_qbf(text)
        tree = qbf_proof_tree(q)
        assert (tree is not None) == qbf_eval(q)
        if tree is not None:
            assert validate_proof_tree(tree, q) == []


# -- the two reductions --------------------------------------------------------

def test_reduce_qbf_af_examples():
    sat = sat_general(reduce_qbf_af(parse_qbf("E x : x")))
    assert sat.status == "sat"
    unsat = sat_general(reduce_qbf_af(parse_qbf("A x : x")))
    assert unsat.status == "unsat"
    taut = sat_general(reduce_qbf_af(parse_qbf("A x : (x | !x)")))
    assert taut.status == "sat"
    assert extent(taut.witness, world_cap=taut.witness.size) >= 2


def test_reduce_qbf_af_fragment():
    f = reduce_qbf_af(parse_qbf("A x E y : (x & y | !x)"))
    assert temporal_depth(f) == 2
    assert in_fragment(f, fragment({"AF"}, depth_bound=2))


def test_reduce_qbf_ag_examples():
    assert sat_general(reduce_qbf_ag(parse_qbf("E x : x"))).status == "sat"
    assert sat_general(reduce_qbf_ag(parse_qbf("A x : x"))).status == "unsat"
    assert sat_general(reduce_qbf_ag(parse_qbf("A x E y : (x <-> y)"))).status == "sat"


def test_reduce_qbf_ag_fragment():
    f = reduce_qbf_ag(parse_qbf("A x E y : (x <-> y)"))
    assert temporal_depth(f) == 2
    assert in_fragment(f, fragment({"AG"}, depth_bound=2))


def test_reduction_size_linear():
    # measure the constant once, then assert it across a small corpus
    sizes = []
    for text in ["E x : x", "A x : !x", "A x E y : (x <-> y)",
                 "E x A y : ((x | y) & !x)"]:
        q = parse_qbf(text)
        qsize = formula_size(q.matrix) + 2 * len(q.prefix)
        sizes.append((formula_size(reduce_qbf_af(q)) / qsize,
                      formula_size(reduce_qbf_ag(q)) / qsize))
    cap_af = max(s for s, _ in sizes)
    cap_ag = max(s for _, s in sizes)
    assert cap_af <= 50 and cap_ag <= 12


def test_reduction_round_trip_small():
    # one-variable instances, both reductions, against qbf_eval
    vars1 = ["x1"]
    mats = ["x1", "!x1", "x1 & x1", "x1 | !x1", "x1 & !x1"]
    for quantifier in "AE":
        for mat in mats:
            q = parse_qbf(f"{quantifier} x1 : {mat}")
            expected = qbf_eval(q)
            raf = sat_general(reduce_qbf_af(q))
            rag = sat_general(reduce_qbf_ag(q))
            assert raf.status == ("sat" if expected else "unsat"), (quantifier, mat)
            assert rag.status == ("sat" if expected else "unsat"), (quantifier, mat)


# -- ATM ----------------------------------------------------------------------

def test_parse_and_simulate_atm():
    m = parse_atm(BRANCH_MACHINE)
    assert m.input_alphabet == ["a", "b"]
    assert simulate_atm(m, "a") is True
    assert simulate_atm(m, "b") is False
    assert simulate_atm(parse_atm(ACCEPT_MACHINE), "a") is True
    assert simulate_atm(parse_atm(REJECT_MACHINE), "a") is False


def test_parse_atm_errors():
    with pytest.raises(ReductionError):
        parse_atm("state q exists\n")
    with pytest.raises(ReductionError, match="delta"):
        parse_atm("state q0 exists\nstate qa exists\nstate qr exists\n"
                  "init q0\naccept qa\nreject qr\nblank u\nspace 1\n")


def test_encode_atm_fragments():
    m = parse_atm(BRANCH_MACHINE)
    for variant, ops in (("ag_ax", {"AG", "AX"}), ("ag_af", {"AG", "AF"}),
                         ("au", {"AU"}), ("ar", {"AR", "AU"})):
        f = encode_atm(m, "a", variant)
        check = in_fragment(f, fragment(frozenset(ops),
                                        base=ATM_VARIANT_BASE[variant],
                                        depth_bound=2))
        assert check, (variant, check.reason)


def test_encode_atm_rejects_bad_input():
    m = parse_atm(BRANCH_MACHINE)
    with pytest.raises(ReductionError):
        encode_atm(m, "z", "ag_ax")
    with pytest.raises(ReductionError):
        encode_atm(m, "a", "nope")


def test_encode_atm_trivial_machines_all_variants():
    for text, expect in ((ACCEPT_MACHINE, True), (REJECT_MACHINE, False)):
        m = parse_atm(text)
        assert simulate_atm(m, "a") is expect
        for variant in ("ag_ax", "ag_af", "au", "ar"):
            f = encode_atm(m, "a", variant)
            r = sat_general(f, base=ATM_VARIANT_BASE[variant],
                            budget=SatBudget(closure_quant_cap=100))
            assert r.status == ("sat" if expect else "unsat"), (variant, expect)


def test_encode_atm_branch_machine_fast_variants():
    m = parse_atm(BRANCH_MACHINE)
    for inp, expect in (("a", True), ("b", False)):
        for variant in ("ag_ax", "ar"):
            f = encode_atm(m, inp, variant)
            r = sat_general(f, base=ATM_VARIANT_BASE[variant],
                            budget=SatBudget(closure_quant_cap=100))
            assert r.status == ("sat" if expect else "unsat"), (variant, inp)


# -- formula families -----------------------------------------------------------

def test_family_ax():
    f = generate_family("ax", m=2, k=2)
    assert temporal_depth(f) == 2
    assert in_fragment(f, fragment({"AX"}))
    r = sat_general(f)
    assert r.status == "sat"


def test_family_counter_agax():
    for n in (1, 2):
        f = generate_family("counter_agax", n=n)
        assert in_fragment(f, fragment({"AG", "AX"}, depth_bound=2))
        r = sat_general(f)
        assert r.status == "sat"
        assert extent(r.witness, world_cap=r.witness.size) >= 2 ** (n + 1) - 1


def test_family_counter_ar():
    f = generate_family("counter_ar", n=1)
    assert in_fragment(f, fragment({"AR", "AU"},
                                   base=FAMILY_BASES["counter_ar"], depth_bound=2))
    r = sat_general(f, base=FAMILY_BASES["counter_ar"])
    assert r.status == "sat"
    assert extent(r.witness, world_cap=r.witness.size) >= 3


def test_flat_families_are_flat_and_sat():
    for kind in ("flat_axag", "flat_agaf", "flat_au", "flat_ar", "flat_af",
                 "existential"):
        f = generate_family(kind, m=2)
        assert temporal_depth(f) == 1, kind
        base = FAMILY_BASES[kind]
        r = sat_general(f, base=base, budget=SatBudget(closure_quant_cap=64))
        assert r.status == "sat", kind


def test_family_flat_axag_shape():
    f = generate_family("flat_axag", m=2)
    rendered = render_formula(f)
    assert "EX p1" in rendered and "EX p2" in rendered and "AX" in rendered


def test_family_existential_shape():
    f = generate_family("existential", m=2)
    efs = [g for g in subformulas(f) if isinstance(g, Quant)]
    assert len(efs) == 3
    assert all(g.quantifier == "E" and g.op == "F" for g in efs)


def test_family_unknown_kind():
    with pytest.raises(ReductionError):
        generate_family("nope", m=1)


def test_families_deterministic():
    a = render_formula(generate_family("flat_agaf", m=3))
    b = render_formula(generate_family("flat_agaf", m=3))
    assert a == b
