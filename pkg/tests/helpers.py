"""Shared generators and oracles for the test suite."""

from __future__ import annotations

import itertools
import random

from ctlf.formula import (
    Base, Formula, Prop, STD, apply_fn, formula_size, land, lnot, lor,
    prop, quant,
)

# Universal pair name -> the quantified constructors it admits.
PAIR_MEMBERS = {
    "AX": (("A", "X"), ("E", "X")),
    "AF": (("A", "F"), ("E", "G")),
    "AG": (("A", "G"), ("E", "F")),
    "AU": (("A", "U"), ("E", "R")),
    "AR": (("A", "R"), ("E", "U")),
}


def random_formula(rng: random.Random, props: list[str], pairs: list[str],
                   size: int, depth: int | None = None) -> Formula:
    """A random formula of roughly the requested symbol size."""
    if size <= 1 or (depth is not None and depth == 0 and size <= 1):
        return prop(rng.choice(props))
    choices = ["not", "and", "or", "atom"]
    if depth is None or depth > 0:
        choices += ["quant"] * 2
    kind = rng.choice(choices)
    if kind == "atom":
        return prop(rng.choice(props))
    if kind == "not":
        return lnot(random_formula(rng, props, pairs, size - 1, depth))
    if kind in ("and", "or"):
        left = random_formula(rng, props, pairs, (size - 3) // 2 + 1, depth)
        right = random_formula(rng, props, pairs, (size - 3) // 2 + 1, depth)
        return land(left, right) if kind == "and" else lor(left, right)
    q, o = rng.choice(PAIR_MEMBERS[rng.choice(pairs)])
    sub = None if depth is None else depth - 1
    if o in ("U", "R"):
        left = random_formula(rng, props, pairs, (size - 3) // 2 + 1, sub)
        right = random_formula(rng, props, pairs, (size - 3) // 2 + 1, sub)
        return quant(q, o, (left, right))
    return quant(q, o, (random_formula(rng, props, pairs, size - 1, sub),))


def enumerate_formulas(props: list[str], pairs: list[str], max_size: int):
    """All formulas over the given propositions and operator pairs, by
    symbol size (parentheses counted), deduplicated structurally."""
    by_size: dict[int, list[Formula]] = {1: [prop(p) for p in props]}
    unary_ops = [(q, o) for pr in pairs for (q, o) in PAIR_MEMBERS[pr] if o not in ("U", "R")]
    binary_ops = [(q, o) for pr in pairs for (q, o) in PAIR_MEMBERS[pr] if o in ("U", "R")]
    for s in range(2, max_size + 1):
        bucket: list[Formula] = []
        for g in by_size.get(s - 1, ()):
            bucket.append(lnot(g))
            for q, o in unary_ops:
                bucket.append(quant(q, o, (g,)))
        for a_size in range(1, s - 3):
            b_size = s - 3 - a_size
            for a in by_size.get(a_size, ()):
                for b in by_size.get(b_size, ()):
                    bucket.append(land(a, b))
                    bucket.append(lor(a, b))
                    for q, o in binary_ops:
                        bucket.append(quant(q, o, (a, b)))
        by_size[s] = list(dict.fromkeys(bucket))
    out = []
    for s in range(1, max_size + 1):
        out.extend(by_size.get(s, ()))
    assert all(formula_size(g) <= max_size for g in out)
    return out


def truth_assignments(props):
    props = sorted(props)
    for bits in itertools.product((False, True), repeat=len(props)):
        yield dict(zip(props, bits))


def eval_propositional(f: Formula, assignment: dict[str, bool], base: Base = STD) -> bool:
    if isinstance(f, Prop):
        return assignment[f.name]
    table = base[f.func]
    bits = [1 if eval_propositional(a, assignment, base) else 0 for a in f.args]
    return bool(table.evaluate(bits))


# ---------------------------------------------------------------------------
# Independent path-semantics oracle for model checking (lasso enumeration).

from ctlf.formula import Apply, Quant  # noqa: E402
from ctlf.kripke import RootedModel, make_model  # noqa: E402


def _lassos_from(structure, start, max_len):
    """All ultimately periodic paths (stem, cycle) from start, walk length
    bounded by max_len nodes."""
    out = []
    seen = set()
    stack = [(start,)]
    while stack:
        walk = stack.pop()
        last = walk[-1]
        for j in range(len(walk) - 1):
            if walk[j] == last:
                stem, cycle = walk[:j], walk[j:-1]
                if cycle and (stem, cycle) not in seen:
                    seen.add((stem, cycle))
                    out.append((stem, cycle))
        if len(walk) < max_len:
            for u in structure.successors(last):
                stack.append(walk + (u,))
    return out


def oracle_model_check(m: RootedModel, f, base=STD, world=None):
    """Path-semantics truth via exhaustive lasso enumeration; usable only on
    tiny structures."""
    s = m.structure
    max_len = 2 * s.n + 1
    memo = {}
    lasso_cache = {}

    def lassos(w):
        if w not in lasso_cache:
            lasso_cache[w] = _lassos_from(s, w, max_len)
        return lasso_cache[w]

    def state(w, g):
        key = (w, g)
        if key in memo:
            return memo[key]
        if isinstance(g, Apply):
            table = base.closure_base()[g.func]
            bits = [1 if state(w, a) else 0 for a in g.args]
            res = bool(table.evaluate(bits))
        elif isinstance(g, Quant):
            if g.quantifier == "A":
                res = all(path_truth(st, cy, g) for (st, cy) in lassos(w))
            else:
                res = any(path_truth(st, cy, g) for (st, cy) in lassos(w))
        else:
            res = bool(s.prop_mask(g.name) & (1 << w))
        memo[key] = res
        return res

    def path_truth(stem, cycle, g):
        def pos(i):
            if i < len(stem):
                return stem[i]
            return cycle[(i - len(stem)) % len(cycle)]

        window = len(stem) + len(cycle)
        if g.op == "X":
            return state(pos(1), g.args[0])
        if g.op == "F":
            return any(state(pos(i), g.args[0]) for i in range(window))
        if g.op == "G":
            return all(state(pos(i), g.args[0]) for i in range(window))
        a, b = g.args
        if g.op == "U":
            for i in range(window):
                if state(pos(i), b):
                    return True
                if not state(pos(i), a):
                    return False
            return False
        # R: b must hold up to and including the first a-position
        for i in range(window):
            if not state(pos(i), b):
                return False
            if state(pos(i), a):
                return True
        return True

    return state(m.root if world is None else world, f)


def random_serial_model(rng, num_worlds, props):
    labels = [[p for p in props if rng.random() < 0.5] for _ in range(num_worlds)]
    edges = set()
    for w in range(num_worlds):
        k = rng.randint(1, num_worlds)
        targets = rng.sample(range(num_worlds), k)
        for t in targets:
            edges.add((w, t))
    # ensure reachability from 0 by a spine
    for w in range(1, num_worlds):
        edges.add((rng.randrange(w), w))
    return make_model(labels, sorted(edges), 0)
