import pytest

from ctlf.clones import (
    CloneError, ag_translate, base_translate, clone_generates, clone_slice,
    is_monotone, is_one_separating, is_pseudo_monotone, remove_top,
    represent_function, s1_transform, short_representation,
)
from ctlf.formula import (
    Base, STD, TT_AND, TT_BOT, TT_IMP, TT_NIMPL, TT_NOT, TT_OR, TT_TOP,
    TT_XOR, TruthTable, af, ag, apply_fn, ax, ef, eg, ex, fragment,
    in_fragment, land, lnot, lor, prop, subformulas, temporal_depth,
)
from ctlf.parser import parse_formula, render_formula

p = prop("p")
q = prop("q")

NIMPL_BASE = Base([TT_NIMPL])


def test_is_monotone():
    assert is_monotone(TT_AND)
    assert not is_monotone(TT_IMP)
    assert not is_monotone(TT_NOT)


def test_is_one_separating():
    assert is_one_separating(TT_NIMPL)
    assert not is_one_separating(TT_OR)
    assert is_one_separating(TT_AND)


def test_clone_slice_monotone_base_has_only_identity():
    s = clone_slice(Base([TT_AND, TT_OR]), 1)
    assert len(s.derivations) == 1
    assert TruthTable("id", 1, (0, 1)) in s


def test_clone_slice_nimpl_contains_and():
    assert TT_AND in clone_slice(NIMPL_BASE, 2)


def test_clone_slice_complete_base():
    s = clone_slice(Base([TT_AND, TT_NOT]), 2)
    assert len(s.derivations) == 16


def test_clone_generates():
    assert clone_generates(NIMPL_BASE, TT_AND)
    assert not clone_generates(Base([TT_AND, TT_OR]), TT_NOT)
    assert clone_generates(Base([TT_AND, TT_NOT]), TT_XOR)


def test_clone_slice_cap():
    with pytest.raises(CloneError):
        clone_slice(STD, 4)


def test_clone_slice_monotone_in_base():
    small = clone_slice(Base([TT_AND]), 2)
    big = clone_slice(Base([TT_AND, TT_OR]), 2)
    assert set(small.derivations) <= set(big.derivations)


def test_s1_slice_closure_property():
    # every member of the clone of a 1-separating function is 1-separating
    # or a projection
    for k in (1, 2, 3):
        for table in clone_slice(NIMPL_BASE, k).tables:
            is_proj = any(
                table.outputs == tuple(vec[i] for vec in table.input_vectors())
                for i in range(k))
            assert is_proj or is_one_separating(table)


def test_represent_function_nimpl_and():
    rep = represent_function(NIMPL_BASE, TT_AND)
    # witness evaluates to conjunction on every input
    from helpers import eval_propositional
    for x in (False, True):
        for y in (False, True):
            got = eval_propositional(rep, {"x": x, "y": y}, NIMPL_BASE)
            assert got == (x and y)


def test_short_representation_examples():
    rep = short_representation(Base([TT_NOT, TT_OR]), TT_AND)
    assert render_formula(rep) == "!(!x | !y)"
    assert short_representation(STD, TT_XOR) is None
    rep_and = short_representation(Base([TT_AND]), TT_AND)
    assert render_formula(rep_and) == "(x & y)"


def test_base_translate_examples():
    target = Base([TT_NOT, TT_OR])
    out = base_translate(land(p, q), target)
    assert render_formula(out) == "!(!p | !q)"
    unchanged = base_translate(ag(p), target)
    assert unchanged == ag(p)
    with pytest.raises(CloneError):
        base_translate(land(p, q), Base([TT_AND, TT_OR]))


def test_is_pseudo_monotone_examples():
    assert is_pseudo_monotone(ag(land(ex(lnot(p)), lnot(q))))
    assert not is_pseudo_monotone(ag(land(lnot(ax(p)), lnot(q))))
    assert not is_pseudo_monotone(lnot(ef(lor(ax(p), q))))


def test_remove_top_examples():
    base = STD.with_tables(TT_TOP)
    top = apply_fn("top", ())
    out = remove_top(ag(top), base, "t")
    t = prop("t")
    assert out == land(ag(land(t, t)), t)

    with pytest.raises(CloneError, match="pseudo-monotone"):
        remove_top(land(ex(top), lnot(ax(top))), base, "t")

    assert remove_top(p, base, "t") == land(p, t)


def test_remove_top_output_has_no_top():
    base = STD.with_tables(TT_TOP)
    out = remove_top(ag(land(apply_fn("top", ()), p)), base, "t")
    for g in subformulas(out):
        assert not (hasattr(g, "func") and g.func == "top")


def test_remove_top_rejects_used_fresh_prop():
    base = STD.with_tables(TT_TOP)
    with pytest.raises(CloneError, match="fresh"):
        remove_top(p, base, "p")


def test_s1_transform_structure():
    out = s1_transform(land(p, lnot(q)), NIMPL_BASE)
    check = in_fragment(out, fragment({"AX", "AF", "AG", "AU", "AR"}, base=NIMPL_BASE))
    assert check, check.reason
    out2 = s1_transform(af(p), NIMPL_BASE)
    assert in_fragment(out2, fragment({"AF"}, base=NIMPL_BASE))


def test_s1_transform_requires_s1():
    with pytest.raises(CloneError, match="negated implication"):
        s1_transform(p, Base([TT_AND, TT_OR]))


def test_ag_translate_single_prop():
    out = ag_translate(p)
    # shape: x_p ∧ AG(x_p <-> p)
    assert temporal_depth(out) == 1
    assert in_fragment(out, fragment({"AG"}))
    rendered = render_formula(out)
    assert rendered.count("x__") >= 2


def test_ag_translate_depth_bound():
    f = af(af(p))
    out = ag_translate(f)
    assert temporal_depth(out) == 2
    assert in_fragment(out, fragment({"AF", "AG"}, depth_bound=2))


def test_ag_translate_deterministic():
    f = land(af(p), eg(lor(p, q)))
    assert render_formula(ag_translate(f)) == render_formula(ag_translate(f))


def test_ag_translate_constants():
    base = STD.with_tables(TT_TOP, TT_BOT)
    f = land(p, apply_fn("top", ()))
    out = ag_translate(f, base=base)
    assert in_fragment(out, fragment({"AG"}))
