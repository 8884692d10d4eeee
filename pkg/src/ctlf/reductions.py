"""QBF parsing/evaluation, proof trees, the TQBF-to-CTL reductions, the
alternating-TM encodings for the EXP-hard operator sets, and the generators
for the lower-bound formula families.

All fresh propositions follow deterministic naming schemes so generated
formulas are byte-stable across runs.  QBF variables are renamed positionally
to x1..xn so they can never collide with the auxiliary propositions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .formula import (
    Apply, Base, Formula, FormulaError, Prop, Quant, STD, TT_BOT, TT_TOP,
    apply_fn, conj, disj, iff, implies, land, lnot, lor, prop,
    propositions, quant, subformulas,
)
from .parser import parse_formula


class ReductionError(FormulaError):
    pass


# ---------------------------------------------------------------------------
# Quantified Boolean formulas

@dataclass(frozen=True)
class Qbf:
    """A closed prenex QBF: quantifier prefix plus a propositional matrix."""

    prefix: tuple[tuple[str, str], ...]      # (quantifier 'A'|'E', variable)
    matrix: Formula

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for _, v in self.prefix)


def parse_qbf(text: str) -> Qbf:
    """Prenex syntax: `(A|E) var ... : matrix`."""
    if ":" not in text:
        raise ReductionError("missing ':' between prefix and matrix")
    head, matrix_text = text.split(":", 1)
    tokens = head.split()
    prefix: list[tuple[str, str]] = []
    i = 0
    while i < len(tokens):
        q = tokens[i]
        if q not in ("A", "E"):
            raise ReductionError(f"expected quantifier A or E, found {q!r}")
        if i + 1 >= len(tokens):
            raise ReductionError(f"quantifier {q} lacks a variable")
        var = tokens[i + 1]
        if not re.fullmatch(r"[a-z][a-z0-9_]*", var):
            raise ReductionError(f"bad variable name {var!r}")
        if var in (v for _, v in prefix):
            raise ReductionError(f"duplicate variable {var!r}")
        prefix.append((q, var))
        i += 2
    matrix = parse_formula(matrix_text.strip(), STD)
    free = propositions(matrix) - {v for _, v in prefix}
    if free:
        raise ReductionError(f"free variable(s): {sorted(free)}")
    return Qbf(tuple(prefix), matrix)


def _eval_matrix(f: Formula, assignment: dict[str, bool]) -> bool:
    if isinstance(f, Prop):
        return assignment[f.name]
    if f.func == "not":
        return not _eval_matrix(f.args[0], assignment)
    if f.func == "and":
        return _eval_matrix(f.args[0], assignment) and _eval_matrix(f.args[1], assignment)
    if f.func == "or":
        return _eval_matrix(f.args[0], assignment) or _eval_matrix(f.args[1], assignment)
    raise ReductionError(f"matrix is not over the standard base: {f.func}")


def qbf_eval(q: Qbf) -> bool:
    def rec(i: int, assignment: dict[str, bool]) -> bool:
        if i == len(q.prefix):
            return _eval_matrix(q.matrix, assignment)
        quantifier, var = q.prefix[i]
        results = (rec(i + 1, {**assignment, var: b}) for b in (False, True))
        return all(results) if quantifier == "A" else any(results)

    return rec(0, {})


@dataclass
class ProofTree:
    """Tree of partial assignments: both children at every universal level,
    at least one at every existential level, matrix true at the leaves."""

    nodes: list[tuple[tuple[str, bool], ...]] = field(default_factory=list)
    edges: list[tuple[int, int]] = field(default_factory=list)


def qbf_proof_tree(q: Qbf) -> Optional[ProofTree]:
    tree = ProofTree()

    def add(assignment: tuple) -> int:
        tree.nodes.append(assignment)
        return len(tree.nodes) - 1

    def rec(i: int, assignment: tuple) -> Optional[int]:
        idx = add(assignment)
        if i == len(q.prefix):
            values = {var: val for var, val in assignment}
            return idx if _eval_matrix(q.matrix, values) else None
        quantifier, var = q.prefix[i]
        children = []
        for b in (False, True):
            child = rec(i + 1, assignment + ((var, b),))
            if child is not None:
                children.append(child)
                tree.edges.append((idx, child))
                if quantifier == "E":
                    return idx
            elif quantifier == "A":
                return None
        if quantifier == "A":
            return idx
        return None  # existential with no viable child

    tree.nodes = []
    tree.edges = []
    root = rec(0, ())
    if root is None:
        return None
    # crop nodes that ended up childless on failed existential probes
    keep = {root}
    changed = True
    while changed:
        changed = False
        for (u, v) in tree.edges:
            if u in keep and v not in keep:
                keep.add(v)
                changed = True
    remap = {old: new for new, old in enumerate(sorted(keep))}
    tree.edges = [(remap[u], remap[v]) for (u, v) in tree.edges
                  if u in keep and v in keep]
    tree.nodes = [tree.nodes[old] for old in sorted(keep)]
    return tree


def validate_proof_tree(tree: ProofTree, q: Qbf) -> list[str]:
    problems = []
    children: dict[int, list[int]] = {i: [] for i in range(len(tree.nodes))}
    for (u, v) in tree.edges:
        children[u].append(v)
    roots = [i for i, a in enumerate(tree.nodes) if not a]
    if len(roots) != 1:
        problems.append("exactly one empty-assignment root required")
        return problems
    for i, assignment in enumerate(tree.nodes):
        depth = len(assignment)
        if depth < len(q.prefix):
            quantifier, var = q.prefix[depth]
            vals = set()
            for c in children[i]:
                ca = tree.nodes[c]
                if ca[:depth] != assignment or len(ca) != depth + 1 or ca[depth][0] != var:
                    problems.append(f"node {c} is not a one-variable extension of {i}")
                    continue
                vals.add(ca[depth][1])
            if quantifier == "A" and vals != {False, True}:
                problems.append(f"universal node {i} lacks both extensions")
            if quantifier == "E" and not vals:
                problems.append(f"existential node {i} lacks an extension")
        else:
            values = {var: val for var, val in assignment}
            if not _eval_matrix(q.matrix, values):
                problems.append(f"leaf {i} falsifies the matrix")
    return problems


# ---------------------------------------------------------------------------
# TQBF -> B2(AF)

def _renamed(q: Qbf) -> Qbf:
    mapping = {var: f"x{i + 1}" for i, (_, var) in enumerate(q.prefix)}

    def rename(g: Formula) -> Formula:
        if isinstance(g, Prop):
            return prop(mapping[g.name])
        return apply_fn(g.func, tuple(rename(a) for a in g.args))

    return Qbf(tuple((quantifier, mapping[v]) for quantifier, v in q.prefix),
               rename(q.matrix))


def reduce_qbf_af(q: Qbf) -> Formula:
    """The long-path encoding of a proof tree: satisfiable over {AF, EG}
    exactly when the QBF is true."""
    q = _renamed(q)
    n = len(q.prefix)

    def s(i):
        return prop(f"s{i}")

    def b(i):
        return prop(f"b{i}")

    def af_(g):
        return quant("A", "F", (g,))

    def eg_(g):
        return quant("E", "G", (g,))

    e = prop("e")
    parts = [q.matrix, implies(e, b(1))]
    for i in range(1, n + 1):
        quantifier = q.prefix[i - 1][0]
        t, tp = prop(f"t{i}"), prop(f"tp{i}")
        fq, fp = prop(f"f{i}"), prop(f"fp{i}")
        x = prop(q.prefix[i - 1][1])
        nb = lnot(b(i))
        if quantifier == "A":
            alpha = conj([
                implies(s(i), af_(land(t, nb))),
                implies(t, land(s(i + 1), af_(land(tp, nb)))),
                implies(tp, land(b(i + 1), af_(land(fq, nb)))),
                implies(fq, land(s(i + 1), af_(land(fp, nb)))),
                implies(fp, b(i + 1)),
            ])
        else:
            alpha = conj([
                implies(s(i), af_(land(lor(t, fq), nb))),
                implies(t, land(s(i + 1), af_(land(tp, nb)))),
                implies(tp, b(i + 1)),
                implies(fq, land(s(i + 1), af_(land(fp, nb)))),
                implies(fp, b(i + 1)),
            ])
        beta = implies(b(i), eg_(b(i)))
        gamma = land(implies(af_(tp), x), implies(af_(fp), lnot(x)))
        parts.extend([alpha, beta, gamma])
    return conj([s(1), af_(e), eg_(conj(parts))])


# ---------------------------------------------------------------------------
# TQBF -> B2(AG)

def reduce_qbf_ag(q: Qbf) -> Formula:
    q = _renamed(q)
    n = len(q.prefix)

    def y(i):
        return prop(f"y{i}")

    def z(i):
        return prop(f"z{i}")

    parts = [implies(lor(y(n), z(n)), q.matrix)]
    for i in range(1, n + 1):
        quantifier = q.prefix[i - 1][0]
        x = prop(q.prefix[i - 1][1])
        ef_y = quant("E", "F", (y(i),))
        ef_z = quant("E", "F", (z(i),))
        combine = land if quantifier == "A" else lor
        parts.append(conj([
            implies(lor(y(i - 1), z(i - 1)), combine(ef_y, ef_z)),
            implies(y(i), quant("A", "G", (x,))),
            implies(z(i), quant("A", "G", (lnot(x),))),
        ]))
    return land(y(0), quant("A", "G", (conj(parts),)))


# ---------------------------------------------------------------------------
# Alternating Turing machines

@dataclass
class ATMSpec:
    states: dict[str, str]                    # name -> 'exists' | 'forall'
    init: str
    accept: str
    reject: str
    blank: str
    space: int
    delta: dict[tuple[str, str], list[tuple[str, str, int]]]

    @property
    def tape_alphabet(self) -> list[str]:
        symbols = {self.blank}
        for (q, a), outs in self.delta.items():
            symbols.add(a)
            symbols.update(a2 for (_, a2, _) in outs)
        return sorted(symbols)

    @property
    def input_alphabet(self) -> list[str]:
        return sorted(set(self.tape_alphabet) - {self.blank})

    def validate(self):
        for name in (self.init, self.accept, self.reject):
            if name not in self.states:
                raise ReductionError(f"state {name!r} not declared")
        if self.accept == self.reject:
            raise ReductionError("accepting and rejecting states must differ")
        for q in self.states:
            if q in (self.accept, self.reject):
                continue
            for a in self.tape_alphabet:
                if not self.delta.get((q, a)):
                    raise ReductionError(f"delta({q},{a}) is empty")


_MOVES = {"L": -1, "S": 0, "R": 1}


def parse_atm(text: str) -> ATMSpec:
    states: dict[str, str] = {}
    init = accept = reject = blank = None
    space = None
    delta: dict[tuple[str, str], list[tuple[str, str, int]]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "state" and len(parts) == 3 and parts[2] in ("exists", "forall"):
            states[parts[1]] = parts[2]
        elif kind == "accept" and len(parts) == 2:
            accept = parts[1]
        elif kind == "reject" and len(parts) == 2:
            reject = parts[1]
        elif kind == "init" and len(parts) == 2:
            init = parts[1]
        elif kind == "blank" and len(parts) == 2:
            blank = parts[1]
        elif kind == "space" and len(parts) == 2:
            space = int(parts[1])
        elif kind == "trans" and len(parts) == 7 and parts[3] == "->":
            q, a, q2, a2, move = parts[1], parts[2], parts[4], parts[5], parts[6]
            if move not in _MOVES:
                raise ReductionError(f"line {lineno}: bad move {move!r}")
            delta.setdefault((q, a), []).append((q2, a2, _MOVES[move]))
        else:
            raise ReductionError(f"line {lineno}: cannot parse {line!r}")
    if None in (init, accept, reject, blank, space):
        raise ReductionError("missing init/accept/reject/blank/space directive")
    spec = ATMSpec(states, init, accept, reject, blank, space, delta)
    # halting states may omit transitions; complete them with self-loops
    for q in (accept, reject):
        for a in spec.tape_alphabet:
            spec.delta.setdefault((q, a), []).append((q, a, 0))
    spec.validate()
    return spec


def simulate_atm(m: ATMSpec, input_word: str, max_configs: int = 100) -> bool:
    """Direct acceptance recursion with memoization on configurations."""
    for ch in input_word:
        if ch not in m.input_alphabet:
            raise ReductionError(f"input symbol {ch!r} not in the input alphabet")
    tape = list(input_word) + [m.blank] * (m.space - len(input_word))
    if len(tape) > m.space:
        raise ReductionError("input longer than the space bound")
    memo: dict[tuple, bool] = {}
    seen = 0

    def accepts(q: str, pos: int, tape_t: tuple) -> bool:
        nonlocal seen
        key = (q, pos, tape_t)
        if key in memo:
            return memo[key]
        seen += 1
        if seen > max_configs:
            raise ReductionError("configuration budget exhausted")
        if q == m.reject:
            memo[key] = False
            return False
        if q == m.accept:
            memo[key] = True
            return True
        memo[key] = False  # cycles cannot accept (w.l.o.g. all paths halt)
        results = []
        for (q2, a2, move) in m.delta[(q, tape_t[pos - 1])]:
            npos = pos + move
            if not 1 <= npos <= m.space:
                continue
            ntape = list(tape_t)
            ntape[pos - 1] = a2
            results.append(accepts(q2, npos, tuple(ntape)))
        out = any(results) if m.states[q] == "exists" else bool(results) and all(results)
        memo[key] = out
        return out

    return accepts(m.init, 1, tuple(tape))


# -- the four encodings -------------------------------------------------------

def _sq(q: str) -> Formula:
    return prop(f"s_{q}")


def _pp(i: int) -> Formula:
    return prop(f"p{i}")


def _tt(i: int, a: str) -> Formula:
    return prop(f"t{i}_{a}")


def _exactly_one(options: list[Formula], all_of: list[Formula]) -> Formula:
    clauses = []
    for g in options:
        others = [lnot(h) for h in all_of if h != g]
        clauses.append(conj([g] + others) if others else g)
    return disj(clauses)


def encode_atm(m: ATMSpec, input_word: str, variant: str) -> Formula:
    """Formula satisfiable iff the machine accepts the input; the variant
    selects the operator set: ag_ax, ag_af, au or ar."""
    if variant not in ("ag_ax", "ag_af", "au", "ar"):
        raise ReductionError(f"unknown variant {variant!r}")
    m.validate()
    for ch in input_word:
        if ch not in m.input_alphabet:
            raise ReductionError(f"input symbol {ch!r} not in the input alphabet")
    if len(input_word) > m.space:
        raise ReductionError("input longer than the space bound")
    gamma = m.tape_alphabet
    positions = list(range(1, m.space + 1))
    states = sorted(m.states)
    halting = {m.accept, m.reject}

    phi_init = conj(
        [_sq(m.init), _pp(1)]
        + [_tt(i, input_word[i - 1]) for i in positions if i <= len(input_word)]
        + [_tt(i, m.blank) for i in positions if i > len(input_word)])

    state_props = [_sq(q) for q in states]
    pos_props = [_pp(i) for i in positions]
    phi_conf = conj(
        [_exactly_one(state_props, state_props),
         _exactly_one(pos_props, pos_props)]
        + [_exactly_one([_tt(i, a) for a in gamma], [_tt(i, a) for a in gamma])
           for i in positions])

    def phi_next(q2: str, i: int, i2: int, a2: str) -> Formula:
        if variant in ("ag_ax", "au"):
            head = quant("E", "X", (conj([_sq(q2), _pp(i2), _tt(i, a2)]),))
            keeps = []
            for j in positions:
                if j == i:
                    continue
                for a in gamma:
                    keeps.append(land(
                        implies(_tt(j, a), quant("A", "X", (_tt(j, a),))),
                        implies(lnot(_tt(j, a)), quant("A", "X", (lnot(_tt(j, a)),)))))
            return conj([head] + keeps)
        if variant == "ag_af":
            mk = prop(f"mk_{q2}_{i}_{i2}_{a2}")
            keeps = [prop(f"km{j}_{a}") for j in positions if j != i for a in gamma]
            body = conj(keeps + [implies(mk, conj([_sq(q2), _pp(i2), _tt(i, a2)]))])
            return land(quant("E", "G", (body,)), quant("A", "F", (mk,)))
        # ar
        parts = []
        for qq in states:
            for a in gamma:
                here = conj([_sq(qq), _pp(i), _tt(i, a)])
                target = conj([_sq(q2), _pp(i2), _tt(i, a2)])
                parts.append(implies(here, quant("E", "U", (here, target))))
                for j in positions:
                    if j == i:
                        continue
                    for c in gamma:
                        parts.append(implies(
                            _tt(j, c),
                            quant("A", "R", (lnot(here), _tt(j, c)))))
        return conj(parts)

    delta_parts: list[Formula] = []
    for q in states:
        if q in halting:
            continue
        for a in gamma:
            for i in positions:
                nexts = []
                for (q2, a2, move) in m.delta[(q, a)]:
                    i2 = i + move
                    if not 1 <= i2 <= m.space:
                        continue
                    nexts.append(phi_next(q2, i, i2, a2))
                if not nexts:
                    raise ReductionError(
                        f"all transitions from ({q},{a}) at position {i} leave the tape")
                here = conj([_sq(q), _pp(i), _tt(i, a)])
                combine = disj if m.states[q] == "exists" else conj
                delta_parts.append(implies(here, combine(nexts)))
    phi_delta = lor(_sq(m.accept),
                    conj([lnot(_sq(m.reject))] + delta_parts))

    def ag_(g):
        return quant("A", "G", (g,))

    phi = conj([phi_init, ag_(phi_conf), ag_(phi_delta)])
    if variant == "ag_ax":
        return phi
    if variant == "ag_af":
        b = prop("b")
        links = []
        for j in positions:
            for a in gamma:

                def keep_dir(first, second):
                    return implies(
                        quant("A", "F", (land(first, _tt(j, a)),)),
                        land(_tt(j, a),
                             quant("A", "F", (land(second, _tt(j, a)),))))

                links.append(iff(prop(f"km{j}_{a}"),
                                 land(keep_dir(b, lnot(b)), keep_dir(lnot(b), b))))
        return land(phi, ag_(conj(links)))
    if variant == "au":
        return _rewrite_au(encode_atm(m, input_word, "ag_af"))
    # ar: rebuild over A[bot R .]
    bot = apply_fn("bot", ())

    def agr(g):
        return quant("A", "R", (bot, g))

    return conj([phi_init, agr(phi_conf), agr(phi_delta)])


def _rewrite_au(f: Formula) -> Formula:
    """AG psi -> A[psi U h]; AF marker -> A[!h U (!h & marker)];
    other AF psi -> A[top U psi]; EG psi -> !A[top U !psi].

    The root is additionally forced un-halted: without that, labeling h in
    the initial world discharges every replaced AG vacuously.
    """
    h = prop("h")
    top = apply_fn("top", ())

    def walk(g: Formula) -> Formula:
        if isinstance(g, Prop):
            return g
        if isinstance(g, Apply):
            return apply_fn(g.func, tuple(walk(a) for a in g.args))
        if (g.quantifier, g.op) == ("A", "G"):
            return quant("A", "U", (walk(g.args[0]), h))
        if (g.quantifier, g.op) == ("A", "F"):
            arg = g.args[0]
            if isinstance(arg, Prop) and arg.name.startswith("mk_"):
                return quant("A", "U", (lnot(h), land(lnot(h), arg)))
            return quant("A", "U", (top, walk(arg)))
        if (g.quantifier, g.op) == ("E", "G"):
            return lnot(quant("A", "U", (top, lnot(walk(g.args[0])))))
        if (g.quantifier, g.op) in (("E", "X"), ("A", "X")):
            raise ReductionError("unexpected X operator in the AF/AG encoding")
        return quant(g.quantifier, g.op, tuple(walk(a) for a in g.args))

    return land(walk(f), lnot(h))


ATM_VARIANT_BASE = {
    "ag_ax": STD,
    "ag_af": STD,
    "au": STD.with_tables(TT_TOP),
    "ar": STD.with_tables(TT_BOT),
}

ATM_VARIANT_OPERATORS = {
    "ag_ax": {"AG", "AX"},
    "ag_af": {"AG", "AF"},
    "au": {"AU"},
    "ar": {"AR", "AU"},
}


# ---------------------------------------------------------------------------
# Formula families

def _bits_of(value: int, width: int) -> list[int]:
    return [(value >> (width - 1 - t)) & 1 for t in range(width)]


def _binary_vector(stem: str, value: int, width: int) -> Formula:
    lits = []
    for t, bit in enumerate(_bits_of(value, width), start=1):
        p = prop(f"{stem}{t}")
        lits.append(p if bit else lnot(p))
    return conj(lits)


def _sigma(stem: str, m: int) -> Formula:
    """At most one of stem1..stem_m true, via carry propositions."""
    def p(i):
        return prop(f"{stem}{i}")

    def lt(i):
        return prop(f"{stem}lt{i}")

    def gt(i):
        return prop(f"{stem}gt{i}")

    parts = [implies(p(i), land(lt(i), gt(i))) for i in range(1, m + 1)]
    parts += [implies(lt(i), land(lt(i - 1), lnot(p(i - 1))))
              for i in range(2, m + 1)]
    parts += [implies(gt(i), land(gt(i + 1), lnot(p(i + 1))))
              for i in range(1, m)]
    return conj(parts)


def _family_ax(m: int, k: int) -> Formula:
    width = max(1, (m - 1).bit_length())

    def psi(i: int) -> Formula:
        parts = [quant("E", "X", (_binary_vector(f"p{i}_", j, width),))
                 for j in range(m)]
        for s in range(1, i):
            for t in range(1, width + 1):
                pst = prop(f"p{s}_{t}")
                parts.append(land(
                    implies(pst, quant("A", "X", (pst,))),
                    implies(lnot(pst), quant("A", "X", (lnot(pst),)))))
        return conj(parts)

    out = psi(k)
    for i in range(k - 1, 0, -1):
        out = land(psi(i), quant("A", "X", (out,)))
    return out


def _family_counter(n: int, release: bool) -> Formula:
    def p(i):
        return prop(f"p{i}")

    def c(i):
        return prop(f"c{i}")

    def r(i):
        return prop(f"r{i}")

    def st(i):
        return prop(f"st{i}")

    def sg(i):
        return prop(f"sg{i}")

    alpha = [iff(p(0), c(0))]
    alpha += [iff(land(p(i), c(i - 1)), c(i)) for i in range(1, n + 1)]
    alpha += [implies(r(0), lnot(p(0)))]
    alpha += [implies(r(i), land(lnot(p(i)), r(i - 1))) for i in range(1, n + 1)]
    # store chain covering every bit (the top bit included)
    alpha += [implies(sg(i), land(st(i), sg(i + 1))) for i in range(1, n)]
    if n >= 1:
        alpha.append(implies(sg(n), st(n)))

    if not release:
        beta = [implies(st(i), land(implies(p(i), quant("A", "X", (p(i),))),
                                    implies(lnot(p(i)),
                                            quant("A", "X", (lnot(p(i)),)))))
                for i in range(1, n + 1)]
        gamma = []
        for i in range(1, n + 1):
            step = quant("A", "X", (land(p(i), r(i - 1)),))
            rhs = land(step, sg(i + 1)) if i < n else step
            gamma.append(implies(land(c(i - 1), lnot(p(i))), rhs))
        gamma.append(implies(lnot(p(0)),
                             land(quant("A", "X", (p(0),)), sg(1))))
        body = conj(alpha + beta + gamma)
        return land(quant("A", "G", (body,)),
                    conj([lnot(p(i)) for i in range(0, n + 1)]))

    # AR variant: AG via A[bot R .], AX via E[. U .], beta via A[. R .]
    def keep(i, guard):
        return land(
            implies(p(i), quant("A", "R", (guard, p(i)))),
            implies(lnot(p(i)), quant("A", "R", (guard, lnot(p(i))))))

    beta = [implies(st(i), land(implies(p(0), keep(i, lnot(p(0)))),
                                implies(lnot(p(0)), keep(i, p(0)))))
            for i in range(1, n + 1)]
    gamma = []
    for i in range(1, n + 1):
        step = quant("E", "U", (p(0), land(p(i), r(i - 1))))
        rhs = land(step, sg(i + 1)) if i < n else step
        gamma.append(implies(land(c(i - 1), lnot(p(i))), rhs))
    gamma.append(implies(lnot(p(0)),
                         land(quant("E", "U", (lnot(p(0)), p(0))), sg(1))))
    body = conj(alpha + beta + gamma)
    bot = apply_fn("bot", ())
    return land(quant("A", "R", (bot, body)),
                conj([lnot(p(i)) for i in range(0, n + 1)]))


def _family_flat_axag(m: int) -> Formula:
    return land(quant("A", "X", (_sigma("p", m),)),
                conj([quant("E", "X", (prop(f"p{i}"),))
                      for i in range(1, m + 1)]))


def _family_flat_agaf(m: int) -> Formula:
    r = prop("r")
    parts = [quant("A", "G", (land(_sigma("p", m), _sigma("q", m)),))]
    parts += [quant("E", "G", (lor(r, prop(f"p{i}")),)) for i in range(1, m + 1)]
    parts += [quant("A", "F", (land(prop(f"q{j}"), lnot(r)),))
              for j in range(1, m + 1)]
    return conj(parts)


def _family_flat_au(m: int) -> Formula:
    r = prop("r")
    sigma = _sigma("p", m)
    qm = prop(f"q{m}")
    parts = [quant("A", "U", (sigma, land(sigma, qm)))]
    parts += [quant("E", "R", (qm, lor(prop(f"p{i}"), r)))
              for i in range(1, m + 1)]
    parts += [quant("A", "U", (lnot(prop(f"q{i + 1}")),
                               land(lnot(r), prop(f"q{i}"))))
              for i in range(1, m)]
    return conj(parts)


def _family_flat_ar(m: int) -> Formula:
    r = prop("r")
    bot = apply_fn("bot", ())
    parts = [quant("A", "R", (bot, _sigma("p", m)))]
    parts += [quant("E", "U", (lor(prop(f"p{i}"), r), prop(f"q{m}")))
              for i in range(1, m + 1)]
    parts += [quant("A", "R", (land(prop(f"q{i}"), lnot(r)),
                               lnot(prop(f"q{i + 1}"))))
              for i in range(1, m + 1)]
    return conj(parts)


def _family_flat_af(m: int) -> Formula:
    width = max(1, (m - 1).bit_length())
    r = prop("r")
    parts = [quant("A", "F", (land(_binary_vector("u", i, width), lnot(r)),))
             for i in range(m)]
    parts += [quant("E", "G", (lor(r, _binary_vector("v", i, width)),))
              for i in range(m)]
    return conj(parts)


def _family_existential(m: int) -> Formula:
    width = max(1, (m + 1).bit_length())
    return conj([quant("E", "F", (_binary_vector("u", i, width),))
                 for i in range(1, m + 2)])


FAMILY_BASES = {
    "ax": STD,
    "counter_agax": STD,
    "counter_ar": STD.with_tables(TT_BOT),
    "flat_axag": STD,
    "flat_agaf": STD,
    "flat_au": STD,
    "flat_ar": STD.with_tables(TT_BOT),
    "flat_af": STD,
    "existential": STD,
}


def generate_family(kind: str, m: int = 1, k: int = 1, n: int = 1) -> Formula:
    """Emit one of the lower-bound formula families."""
    if kind == "ax":
        if m < 1 or k < 1:
            raise ReductionError("ax family needs m >= 1 and k >= 1")
        return _family_ax(m, k)
    if kind == "counter_agax":
        if n < 1:
            raise ReductionError("counter family needs n >= 1")
        return _family_counter(n, release=False)
    if kind == "counter_ar":
        if n < 1:
            raise ReductionError("counter family needs n >= 1")
        return _family_counter(n, release=True)
    if m < 1:
        raise ReductionError("flat families need m >= 1")
    if kind == "flat_axag":
        return _family_flat_axag(m)
    if kind == "flat_agaf":
        return _family_flat_agaf(m)
    if kind == "flat_au":
        return _family_flat_au(m)
    if kind == "flat_ar":
        return _family_flat_ar(m)
    if kind == "flat_af":
        return _family_flat_af(m)
    if kind == "existential":
        return _family_existential(m)
    raise ReductionError(f"unknown family kind {kind!r}")
