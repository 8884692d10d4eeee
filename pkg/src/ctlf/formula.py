"""CTL formula ASTs over arbitrary Boolean bases, plus syntactic analyses.

Formulas are immutable and hash-consed: constructing the same shape twice
yields the same object, so closure fixpoints and tableau engines can compare
formulas cheaply.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

PROP_PATTERN = r"[a-z][a-z0-9_]*"

PATH_QUANTIFIERS = ("A", "E")
UNARY_OPS = ("X", "F", "G")
BINARY_OPS = ("U", "R")
TEMPORAL_OPS = UNARY_OPS + BINARY_OPS

DUAL_QUANTIFIER = {"A": "E", "E": "A"}
DUAL_OP = {"X": "X", "F": "G", "G": "F", "U": "R", "R": "U"}


class FormulaError(ValueError):
    """Raised for malformed formulas or fragment violations."""


# ---------------------------------------------------------------------------
# Truth tables and bases

@dataclass(frozen=True)
class TruthTable:
    """A Boolean function given by name, arity and its 2^arity output bits.

    Outputs are indexed by the input tuple (b1, ..., bn) read as a binary
    number with b1 most significant.
    """

    name: str
    arity: int
    outputs: tuple[int, ...]

    def __post_init__(self):
        if self.arity < 0:
            raise FormulaError(f"negative arity for {self.name}")
        if len(self.outputs) != 2 ** self.arity:
            raise FormulaError(
                f"{self.name}: expected {2 ** self.arity} output bits, got {len(self.outputs)}")
        if any(b not in (0, 1) for b in self.outputs):
            raise FormulaError(f"{self.name}: outputs must be 0/1 bits")

    def evaluate(self, bits: Iterable[int]) -> int:
        idx = 0
        n = 0
        for b in bits:
            idx = (idx << 1) | (1 if b else 0)
            n += 1
        if n != self.arity:
            raise FormulaError(f"{self.name}: expected {self.arity} arguments, got {n}")
        return self.outputs[idx]

    def input_vectors(self) -> Iterator[tuple[int, ...]]:
        for idx in range(2 ** self.arity):
            yield tuple((idx >> (self.arity - 1 - i)) & 1 for i in range(self.arity))


TT_AND = TruthTable("and", 2, (0, 0, 0, 1))
TT_OR = TruthTable("or", 2, (0, 1, 1, 1))
TT_NOT = TruthTable("not", 1, (1, 0))
TT_TOP = TruthTable("top", 0, (1,))
TT_BOT = TruthTable("bot", 0, (0,))
TT_IMP = TruthTable("imp", 2, (1, 1, 0, 1))
TT_XOR = TruthTable("xor", 2, (0, 1, 1, 0))
TT_NIMPL = TruthTable("nimpl", 2, (0, 0, 1, 0))


class Base:
    """A named finite set of truth tables; function names are unique."""

    def __init__(self, tables: Iterable[TruthTable]):
        self.tables: dict[str, TruthTable] = {}
        for t in tables:
            if t.name in self.tables:
                raise FormulaError(f"duplicate function name {t.name} in base")
            self.tables[t.name] = t

    def __contains__(self, name: str) -> bool:
        return name in self.tables

    def __getitem__(self, name: str) -> TruthTable:
        try:
            return self.tables[name]
        except KeyError:
            raise FormulaError(f"unknown function name {name!r}") from None

    def __iter__(self) -> Iterator[TruthTable]:
        return iter(self.tables.values())

    def with_tables(self, *extra: TruthTable) -> "Base":
        merged = dict(self.tables)
        for t in extra:
            if t.name in merged and merged[t.name] != t:
                raise FormulaError(f"conflicting table for {t.name}")
            merged[t.name] = t
        return Base(merged.values())

    def without_top(self) -> "Base":
        """Drop every arity-0 function whose output is 1."""
        return Base(t for t in self if not (t.arity == 0 and t.outputs == (1,)))

    def closure_base(self) -> "Base":
        """The base extended with negation; closures live over base + {not}."""
        if "not" in self.tables and self.tables["not"] == TT_NOT:
            return self
        return self.with_tables(TT_NOT)


STD = Base([TT_AND, TT_OR, TT_NOT])


# ---------------------------------------------------------------------------
# Formula AST

_intern: dict[tuple, "Formula"] = {}


@dataclass(frozen=True)
class Formula:
    _hash: int = field(init=False, repr=False, compare=False, default=0)
    _seq: int = field(init=False, repr=False, compare=False, default=0)

    def key(self) -> tuple:
        raise NotImplementedError

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, eq=False)
class Prop(Formula):
    name: str

    def key(self):
        return ("p", self.name)

    def __eq__(self, other):
        return self is other or (isinstance(other, Prop) and self.name == other.name)

    __hash__ = Formula.__hash__


@dataclass(frozen=True, eq=False)
class Apply(Formula):
    func: str
    args: tuple[Formula, ...]

    def key(self):
        return ("f", self.func, self.args)

    def __eq__(self, other):
        return self is other or (
            isinstance(other, Apply) and self.func == other.func and self.args == other.args)

    __hash__ = Formula.__hash__


@dataclass(frozen=True, eq=False)
class Quant(Formula):
    """A path quantifier applied to a temporal operator.

    ``tag`` is a hidden occurrence marker used by unique-occurrence
    normalization; it participates in equality but never in rendering.
    """

    quantifier: str
    op: str
    args: tuple[Formula, ...]
    tag: int = 0

    def key(self):
        return ("q", self.quantifier, self.op, self.args, self.tag)

    def __eq__(self, other):
        return self is other or (
            isinstance(other, Quant)
            and self.quantifier == other.quantifier
            and self.op == other.op
            and self.tag == other.tag
            and self.args == other.args)

    __hash__ = Formula.__hash__


def _mk(node: Formula) -> Formula:
    k = node.key()
    cached = _intern.get(k)
    if cached is not None:
        return cached
    object.__setattr__(node, "_hash", hash(k))
    object.__setattr__(node, "_seq", len(_intern))
    _intern[k] = node
    return node


def seq_key(f: Formula) -> int:
    """Cheap total order on interned formulas.  Deterministic for a fixed
    program input (creation order), unlike sort_key not stable across
    differently-ordered runs; used only for engine-internal iteration."""
    return f._seq


def prop(name: str) -> Prop:
    import re
    if not re.fullmatch(PROP_PATTERN, name):
        raise FormulaError(f"bad proposition name {name!r}")
    return _mk(Prop(name))


def apply_fn(func: str, args: Iterable[Formula]) -> Apply:
    return _mk(Apply(func, tuple(args)))


def quant(quantifier: str, op: str, args: Iterable[Formula], tag: int = 0) -> Quant:
    args = tuple(args)
    if quantifier not in PATH_QUANTIFIERS or op not in TEMPORAL_OPS:
        raise FormulaError(f"bad temporal operator {quantifier}{op}")
    want = 2 if op in BINARY_OPS else 1
    if len(args) != want:
        raise FormulaError(f"{quantifier}{op} takes {want} argument(s), got {len(args)}")
    return _mk(Quant(quantifier, op, args, tag))


# Shorthand constructors used throughout the package and the tests.

def land(a: Formula, b: Formula) -> Formula:
    return apply_fn("and", (a, b))


def lor(a: Formula, b: Formula) -> Formula:
    return apply_fn("or", (a, b))


def lnot(a: Formula) -> Formula:
    return apply_fn("not", (a,))


def conj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        raise FormulaError("empty conjunction")
    out = parts[0]
    for p in parts[1:]:
        out = land(out, p)
    return out


def disj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        raise FormulaError("empty disjunction")
    out = parts[0]
    for p in parts[1:]:
        out = lor(out, p)
    return out


def implies(a: Formula, b: Formula) -> Formula:
    return lor(lnot(a), b)


def iff(a: Formula, b: Formula) -> Formula:
    return land(lor(lnot(a), b), lor(lnot(b), a))


def ax(a):
    return quant("A", "X", (a,))


def ex(a):
    return quant("E", "X", (a,))


def af(a):
    return quant("A", "F", (a,))


def ef(a):
    return quant("E", "F", (a,))


def ag(a):
    return quant("A", "G", (a,))


def eg(a):
    return quant("E", "G", (a,))


def au(a, b):
    return quant("A", "U", (a, b))


def eu(a, b):
    return quant("E", "U", (a, b))


def ar(a, b):
    return quant("A", "R", (a, b))


def er(a, b):
    return quant("E", "R", (a, b))


# ---------------------------------------------------------------------------
# Syntactic analyses

def temporal_depth(f: Formula) -> int:
    if isinstance(f, Prop):
        return 0
    if isinstance(f, Apply):
        return max((temporal_depth(a) for a in f.args), default=0)
    return 1 + max(temporal_depth(a) for a in f.args)


def subformulas(f: Formula) -> frozenset[Formula]:
    out: set[Formula] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in out:
            continue
        out.add(g)
        if not isinstance(g, Prop):
            stack.extend(g.args)
    return frozenset(out)


def propositions(f: Formula) -> frozenset[str]:
    return frozenset(g.name for g in subformulas(f) if isinstance(g, Prop))


def prop_occurrences(f: Formula) -> int:
    if isinstance(f, Prop):
        return 1
    return sum(prop_occurrences(a) for a in f.args)


def formula_size(f: Formula) -> int:
    """Symbol count: operators, connectives, propositions and parentheses."""
    if isinstance(f, Prop):
        return 1
    if isinstance(f, Apply):
        inner = sum(formula_size(a) for a in f.args)
        if f.func == "not":
            return 1 + inner
        if f.func in ("and", "or"):
            return 3 + inner
        if not f.args:
            return 1
        # name, two parentheses, argument separators
        return 1 + 2 + (len(f.args) - 1) + inner
    inner = sum(formula_size(a) for a in f.args)
    if f.op in BINARY_OPS:
        return 1 + 2 + inner
    return 1 + inner


_negate_cache: dict[Formula, Formula] = {}
_dual_cache: dict[Formula, "Quant"] = {}


def negate_syntactic(f: Formula) -> Formula:
    """Strip a top-level negation if present, else wrap one."""
    out = _negate_cache.get(f)
    if out is None:
        if isinstance(f, Apply) and f.func == "not":
            out = f.args[0]
        else:
            out = lnot(f)
        _negate_cache[f] = out
    return out


def dual_quant(f: Quant) -> Quant:
    """The dual operator applied to syntactically negated arguments."""
    out = _dual_cache.get(f)
    if out is None:
        out = quant(
            DUAL_QUANTIFIER[f.quantifier],
            DUAL_OP[f.op],
            tuple(negate_syntactic(a) for a in f.args),
            tag=f.tag,
        )
        _dual_cache[f] = out
    return out


def closure(f: Formula) -> frozenset[Formula]:
    """Smallest set containing f, closed under decomposition, duals and ~."""
    out: set[Formula] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in out:
            continue
        out.add(g)
        stack.append(negate_syntactic(g))
        if isinstance(g, Quant):
            stack.extend(g.args)
            stack.append(dual_quant(g))
        elif isinstance(g, Apply):
            stack.extend(g.args)
    return frozenset(out)


def closure_temporal_pairs(f: Formula) -> int:
    """Number of ~-pairs of quantified members in closure(f)."""
    quants = {g for g in closure(f) if isinstance(g, Quant)}
    return len(quants)


def to_nnf(f: Formula) -> Formula:
    """Push negations to propositions; input must be over the standard base."""
    for g in subformulas(f):
        if isinstance(g, Apply) and g.func not in ("and", "or", "not"):
            raise FormulaError(f"to_nnf requires the standard base, found {g.func!r}")
    return _nnf(f, False)


def _nnf(f: Formula, negated: bool) -> Formula:
    if isinstance(f, Prop):
        return lnot(f) if negated else f
    if isinstance(f, Apply):
        if f.func == "not":
            return _nnf(f.args[0], not negated)
        if f.func == "and":
            op = lor if negated else land
        else:
            op = land if negated else lor
        return op(_nnf(f.args[0], negated), _nnf(f.args[1], negated))
    if negated:
        return quant(DUAL_QUANTIFIER[f.quantifier], DUAL_OP[f.op],
                     tuple(_nnf(a, True) for a in f.args), tag=f.tag)
    return quant(f.quantifier, f.op,
                 tuple(_nnf(a, False) for a in f.args), tag=f.tag)


# ---------------------------------------------------------------------------
# Fragments

# Canonical (universal) name of the operator pair each quantified node
# belongs to: an E-node belongs to the pair named by its dual.
def operator_pair(f: Quant) -> str:
    if f.quantifier == "A":
        return "A" + f.op
    return "A" + DUAL_OP[f.op]


@dataclass(frozen=True)
class FragmentSpec:
    """An operator fragment: a base, a set of universal operator pairs, and
    an optional temporal depth bound."""

    base: Base
    operators: frozenset[str]
    depth_bound: Optional[int] = None

    def __post_init__(self):
        bad = set(self.operators) - {"AX", "AF", "AG", "AU", "AR"}
        if bad:
            raise FormulaError(f"unknown operator pair(s): {sorted(bad)}")
        if self.depth_bound is not None and self.depth_bound < 0:
            raise FormulaError("depth_bound must be >= 0")


def fragment(operators: Iterable[str], base: Base = STD,
             depth_bound: Optional[int] = None) -> FragmentSpec:
    return FragmentSpec(base, frozenset(operators), depth_bound)


@dataclass(frozen=True)
class FragmentCheck:
    ok: bool
    reason: Optional[str] = None

    def __bool__(self):
        return self.ok


def in_fragment(f: Formula, spec: FragmentSpec) -> FragmentCheck:
    """True iff f uses only spec.base functions, listed operators (or their
    duals), and respects the depth bound. Reports the first violation."""
    for g in sorted(subformulas(f), key=sort_key):
        if isinstance(g, Apply) and g.func not in spec.base:
            return FragmentCheck(False, f"function {g.func!r} not in base")
        if isinstance(g, Quant) and operator_pair(g) not in spec.operators:
            return FragmentCheck(
                False, f"operator {g.quantifier}{g.op} not admitted by {sorted(spec.operators)}")
    if spec.depth_bound is not None:
        d = temporal_depth(f)
        if d > spec.depth_bound:
            return FragmentCheck(False, f"temporal depth {d} exceeds bound {spec.depth_bound}")
    return FragmentCheck(True)


def operators_of(f: Formula) -> frozenset[str]:
    """Universal pair names of all quantified subformulas."""
    return frozenset(operator_pair(g) for g in subformulas(f) if isinstance(g, Quant))


# ---------------------------------------------------------------------------
# Occurrence normalization and helpers

def normalize_occurrences(f: Formula) -> Formula:
    """Tag every quantified subformula occurrence uniquely (left-to-right),
    so that distinct occurrences never share closure members beyond depth 0."""
    counter = [0]

    def walk(g: Formula) -> Formula:
        if isinstance(g, Prop):
            return g
        if isinstance(g, Apply):
            return apply_fn(g.func, tuple(walk(a) for a in g.args))
        counter[0] += 1
        return quant(g.quantifier, g.op, tuple(walk(a) for a in g.args), tag=counter[0])

    return walk(f)


def strip_tags(f: Formula) -> Formula:
    if isinstance(f, Prop):
        return f
    if isinstance(f, Apply):
        return apply_fn(f.func, tuple(strip_tags(a) for a in f.args))
    return quant(f.quantifier, f.op, tuple(strip_tags(a) for a in f.args), tag=0)


def substitute(template: Formula, mapping: dict[str, Formula]) -> Formula:
    """Replace propositions by formulas (used for representation templates)."""
    if isinstance(template, Prop):
        return mapping.get(template.name, template)
    if isinstance(template, Apply):
        return apply_fn(template.func, tuple(substitute(a, mapping) for a in template.args))
    return quant(template.quantifier, template.op,
                 tuple(substitute(a, mapping) for a in template.args), tag=template.tag)


def sort_key(f: Formula) -> tuple:
    """A stable total order on formulas; used wherever iteration order leaks
    into output."""
    if isinstance(f, Prop):
        return (0, f.name)
    if isinstance(f, Apply):
        return (1, f.func, tuple(sort_key(a) for a in f.args))
    return (2, f.quantifier, f.op, f.tag, tuple(sort_key(a) for a in f.args))
