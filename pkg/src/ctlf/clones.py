"""Boolean-clone computations and the four formula-to-formula translations
between bases and operator sets.

Clone slices are computed exactly as fixpoints of composition starting from
the projections, with derivation templates kept so that member functions can
be turned back into formulas over the base.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional

from .formula import (
    Apply, Base, Formula, FormulaError, Prop, Quant, STD, TT_AND, TT_NOT,
    TT_OR, TT_TOP, TruthTable, apply_fn, iff, land, lnot, prop, propositions,
    quant, sort_key, strip_tags, subformulas, substitute, temporal_depth,
    to_nnf,
)
from .parser import render_formula


class CloneError(FormulaError):
    pass


ARG_NAMES = ("x", "y", "z", "x4", "x5", "x6")


def is_monotone(f: TruthTable) -> bool:
    """Flipping any single input bit 0 -> 1 never flips the output 1 -> 0."""
    for vec in f.input_vectors():
        val = f.evaluate(vec)
        for i in range(f.arity):
            if vec[i] == 0:
                flipped = vec[:i] + (1,) + vec[i + 1:]
                if val == 1 and f.evaluate(flipped) == 0:
                    return False
    return True


def is_one_separating(f: TruthTable) -> bool:
    """Some argument is one whenever the function value is one."""
    ones = [vec for vec in f.input_vectors() if f.evaluate(vec) == 1]
    return any(all(vec[i] == 1 for vec in ones) for i in range(f.arity))


# ---------------------------------------------------------------------------
# Clone slices

@dataclass
class CloneSlice:
    """The exact arity-k slice of the clone generated by a base, with a
    derivation template (a formula over argument propositions) per member."""

    arity: int
    derivations: dict[tuple[int, ...], Formula]

    def __contains__(self, f: TruthTable) -> bool:
        return f.arity == self.arity and f.outputs in self.derivations

    @property
    def tables(self) -> frozenset[TruthTable]:
        return frozenset(
            TruthTable("fn_" + "".join(map(str, out)), self.arity, out)
            for out in self.derivations)

    def derivation(self, f: TruthTable) -> Formula:
        if f not in self:
            raise CloneError(f"{f.name} is not in the clone slice")
        return self.derivations[f.outputs]


def clone_slice(base: Base, arity: int, arity_cap: int = 3) -> CloneSlice:
    if arity > arity_cap:
        raise CloneError(f"arity {arity} above cap {arity_cap}")
    if arity < 0:
        raise CloneError("arity must be >= 0")
    size = 2 ** arity
    derivations: dict[tuple[int, ...], Formula] = {}
    for i in range(arity):
        outputs = tuple(vec[i] for vec in _vectors(arity))
        derivations.setdefault(outputs, prop(ARG_NAMES[i]))
    tables = sorted(base, key=lambda t: t.name)
    frontier = list(derivations)
    while True:
        added: list[tuple[int, ...]] = []
        current = sorted(derivations)
        for t in tables:
            if t.arity == 0:
                out = tuple(t.outputs[0] for _ in range(size))
                if out not in derivations:
                    derivations[out] = apply_fn(t.name, ())
                    added.append(out)
                continue
            for combo in _tuples(current, t.arity):
                out = tuple(
                    t.evaluate([derived_bits[j] for derived_bits in combo])
                    for j in range(size))
                if out not in derivations:
                    derivations[out] = apply_fn(
                        t.name, tuple(derivations[c] for c in combo))
                    added.append(out)
        if not added:
            return CloneSlice(arity, derivations)


def _vectors(arity: int):
    for idx in range(2 ** arity):
        yield tuple((idx >> (arity - 1 - i)) & 1 for i in range(arity))


def _tuples(items, n):
    if n == 0:
        yield ()
        return
    for rest in _tuples(items, n - 1):
        for item in items:
            yield rest + (item,)


def clone_generates(base: Base, f: TruthTable, arity_cap: int = 3) -> bool:
    return f in clone_slice(base, f.arity, arity_cap)


def represent_function(base: Base, f: TruthTable, arity_cap: int = 3) -> Formula:
    """A formula over base with f's truth table; arguments may repeat."""
    slice_ = clone_slice(base, f.arity, arity_cap)
    return slice_.derivation(f)


# ---------------------------------------------------------------------------
# Short representations (read-once, argument order preserved)

def short_representation(base: Base, f: TruthTable,
                         budget: int = 2000) -> Optional[Formula]:
    """A read-once expression over base with f's table: every argument occurs
    exactly once, in order; constants may repeat.  Iterative deepening on the
    node count up to a candidate budget; None when exhausted."""
    names = ARG_NAMES[:f.arity]
    size = 2 ** f.arity
    target = f.outputs
    var_masks = {
        names[i]: tuple(vec[i] for vec in _vectors(f.arity))
        for i in range(f.arity)
    }
    tables = sorted(base, key=lambda t: t.name)
    memo: dict[tuple, list] = {}

    def gen(segment: tuple[str, ...], nodes: int):
        """All (expr, outputs) whose variable leaves are exactly `segment` in
        order, using at most `nodes` function applications."""
        key = (segment, nodes)
        if key in memo:
            return memo[key]
        out = []
        if len(segment) == 1:
            out.append((prop(segment[0]), var_masks[segment[0]]))
        for t in tables:
            if nodes < 1:
                break
            if t.arity == 0:
                if not segment:
                    out.append((apply_fn(t.name, ()),
                                tuple(t.outputs[0] for _ in range(size))))
                continue
            for split in _splits(segment, t.arity):
                for children in _child_combos(split, nodes - 1):
                    exprs, outs = zip(*children)
                    combined = tuple(
                        t.evaluate([o[j] for o in outs]) for j in range(size))
                    out.append((apply_fn(t.name, exprs), combined))
        memo[key] = out
        return out

    def _child_combos(split, nodes_left):
        if not split:
            yield ()
            return
        head, *tail = split
        for n_head in range(nodes_left + 1):
            for first in gen(head, n_head):
                used = _node_count(first[0])
                if used != n_head:
                    continue
                for rest in _child_combos(tail, nodes_left - used):
                    yield (first,) + tuple(rest)

    max_nodes_cap = 8
    tested = 0
    for max_nodes in range(0, max_nodes_cap + 1):
        candidates = [(expr, outs) for expr, outs in gen(tuple(names), max_nodes)
                      if _node_count(expr) == max_nodes]
        tested += len(candidates)
        matches = [expr for expr, outs in candidates if outs == target]
        if matches:
            return min(matches, key=render_formula)
        if tested > budget:
            return None
    return None


def _splits(segment: tuple[str, ...], parts: int):
    if parts == 1:
        yield (segment,)
        return
    for i in range(len(segment) + 1):
        for rest in _splits(segment[i:], parts - 1):
            yield (segment[:i],) + rest


def _node_count(f: Formula) -> int:
    if isinstance(f, Prop):
        return 0
    return 1 + sum(_node_count(a) for a in f.args)


# ---------------------------------------------------------------------------
# Base translation (Lemma-style: symbol-wise replacement of the standard
# connectives by their short representations over the target base)

def base_translate(f: Formula, target: Base, budget: int = 2000) -> Formula:
    for g in subformulas(f):
        if isinstance(g, Apply) and g.func not in ("and", "or", "not"):
            raise CloneError("base_translate input must be over the standard base")
    reps = {}
    for name, table in (("and", TT_AND), ("or", TT_OR), ("not", TT_NOT)):
        if not clone_generates(target, table):
            raise CloneError(f"target base cannot express {name}")
        rep = short_representation(target, table, budget)
        if rep is None:
            raise CloneError(f"no short representation of {name} within budget")
        reps[name] = rep

    def walk(g: Formula) -> Formula:
        if isinstance(g, Prop):
            return g
        if isinstance(g, Quant):
            return quant(g.quantifier, g.op, tuple(walk(a) for a in g.args), tag=g.tag)
        if g.func == "not":
            return substitute(reps["not"], {"x": walk(g.args[0])})
        return substitute(reps[g.func], {"x": walk(g.args[0]), "y": walk(g.args[1])})

    return walk(f)


# ---------------------------------------------------------------------------
# Pseudo-monotonicity and top removal

def _boolean_skeleton(f: Formula) -> tuple[list[Formula], "dict"]:
    """Decompose into a Boolean combination of non-Boolean atoms (propositions
    and quantified formulas)."""
    atoms: list[Formula] = []

    def collect(g: Formula):
        if isinstance(g, Apply):
            for a in g.args:
                collect(a)
        elif g not in atoms:
            atoms.append(g)

    collect(f)
    return atoms, None


def _skeleton_eval(f: Formula, values: dict[Formula, int], base: Base) -> int:
    if not isinstance(f, Apply):
        return values[f]
    table = base.closure_base()[f.func]
    return table.evaluate([_skeleton_eval(a, values, base) for a in f.args])


def is_pseudo_monotone(f: Formula, base: Base = STD) -> bool:
    """f and every temporal argument are Boolean combinations of non-Boolean
    formulas, monotone in every argument of nonzero temporal depth."""
    combos = [f]
    for g in subformulas(f):
        if isinstance(g, Quant):
            combos.extend(g.args)
    for combo in combos:
        atoms, _ = _boolean_skeleton(combo)
        temporal = [a for a in atoms if temporal_depth(a) > 0]
        if not temporal:
            continue
        if len(atoms) > 16:
            raise CloneError("skeleton too wide for monotonicity check")
        for bits in range(2 ** len(atoms)):
            values = {a: (bits >> i) & 1 for i, a in enumerate(atoms)}
            val = _skeleton_eval(combo, values, base)
            for a in temporal:
                if values[a] == 0:
                    flipped = dict(values)
                    flipped[a] = 1
                    if val == 1 and _skeleton_eval(combo, flipped, base) == 0:
                        return False
    return True


def _is_top(g: Formula) -> bool:
    return isinstance(g, Apply) and not g.args and g.func == "top"


def _top_tables(base: Base) -> list[str]:
    return [t.name for t in base if t.arity == 0 and t.outputs == (1,)]


def remove_top(f: Formula, base: Base, fresh: Optional[str] = None) -> Formula:
    """Replace the constant truth by a fresh proposition, guarding every
    temporal argument with an and; requires pseudo-monotonicity."""
    top_names = set(_top_tables(base))
    stripped = base.without_top()
    if not clone_generates(stripped, TT_AND):
        raise CloneError("base without top cannot express conjunction")
    if not is_pseudo_monotone(f, base):
        raise CloneError("formula is not pseudo-monotone")
    if fresh is None:
        fresh = _fresh_prop(f, "t")
    elif fresh in propositions(f):
        raise CloneError(f"fresh proposition {fresh!r} occurs in the formula")
    t = prop(fresh)
    and_rep = represent_function(stripped, TT_AND)

    def conj2(a: Formula, b: Formula) -> Formula:
        return substitute(and_rep, {"x": a, "y": b})

    def walk(g: Formula) -> Formula:
        if isinstance(g, Prop):
            return g
        if isinstance(g, Apply):
            if not g.args and g.func in top_names:
                return t
            return apply_fn(g.func, tuple(walk(a) for a in g.args))
        return quant(g.quantifier, g.op,
                     tuple(conj2(walk(a), t) for a in g.args), tag=g.tag)

    return conj2(walk(f), t)


def _fresh_prop(f: Formula, stem: str) -> str:
    used = propositions(f)
    if stem not in used:
        return stem
    i = 0
    while f"{stem}{i}" in used:
        i += 1
    return f"{stem}{i}"


# ---------------------------------------------------------------------------
# The S1 pipeline and the AG translation

def s1_transform(f: Formula, target: Base, budget: int = 2000) -> Formula:
    """NNF, then translate into target + top, then remove top.  Requires the
    negated implication to be expressible in the target (S1 inside the clone)."""
    from .formula import TT_NIMPL
    if not clone_generates(target, TT_NIMPL):
        raise CloneError("target base does not generate the negated implication")
    nnf = to_nnf(f)
    extended = target.with_tables(TT_TOP)
    translated = base_translate(nnf, extended, budget)
    return remove_top(translated, extended)


def marker_name(alpha: Formula) -> str:
    digest = hashlib.md5(render_formula(alpha).encode()).hexdigest()[:8]
    return f"x__{digest}"


def ag_translate(f: Formula, operators=None, base: Base = STD) -> Formula:
    """Frame-equivalent formula x_f ∧ AG ξ over the standard base with one
    fresh marker proposition per subformula; temporal depth ≤ 2."""
    f = strip_tags(f)
    markers = {alpha: prop(marker_name(alpha)) for alpha in subformulas(f)}
    cbase = base.closure_base()
    conjuncts: list[Formula] = []
    for alpha in sorted(subformulas(f), key=sort_key):
        x = markers[alpha]
        if isinstance(alpha, Prop):
            conjuncts.append(iff(x, alpha))
        elif isinstance(alpha, Quant):
            args = tuple(markers[a] for a in alpha.args)
            conjuncts.append(iff(x, quant(alpha.quantifier, alpha.op, args)))
        else:
            table = cbase[alpha.func]
            if not table.arity:
                conjuncts.append(x if table.outputs[0] else lnot(x))
                continue
            clauses = []
            for vec in table.input_vectors():
                if table.evaluate(vec) != 1:
                    continue
                lits = [markers[arg] if bit else lnot(markers[arg])
                        for arg, bit in zip(alpha.args, vec)]
                clause = lits[0]
                for lit in lits[1:]:
                    clause = land(clause, lit)
                clauses.append(clause)
            if not clauses:
                conjuncts.append(lnot(x))
            else:
                rhs = clauses[0]
                for clause in clauses[1:]:
                    rhs = apply_fn("or", (rhs, clause))
                conjuncts.append(iff(x, rhs))
    body = conjuncts[0]
    for c in conjuncts[1:]:
        body = land(body, c)
    return land(markers[f], quant("A", "G", (body,)))
