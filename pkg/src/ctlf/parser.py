"""Recursive-descent parser and canonical renderer for the formula grammar.

Grammar (ASCII):
    atom    : prop | fname '(' formula (',' formula)* ')' | fname
    unary   : '!' unary | ('AX'|'EX'|'AF'|'EF'|'AG'|'EG') unary
            | ('A'|'E') '[' formula ('U'|'R') formula ']' | atom | '(' formula ')'
    conj    : unary ('&' unary)*
    disj    : conj ('|' conj)*
    formula : disj (('->'|'<->') formula)?

'&', '|', '->' and '<->' are sugar over the standard connectives and are
expanded at parse time.  The renderer emits a canonical form that re-parses
to a structurally identical AST.
"""

from __future__ import annotations

import re

from .formula import (
    Apply, Base, Formula, FormulaError, Prop, Quant, TruthTable,
    apply_fn, iff, implies, land, lnot, lor, prop, quant,
)


class ParseError(FormulaError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<quantop>A[XFG]|E[XFG])
  | (?P<quant>[AE]\[)
  | (?P<ident>[a-z][a-z0-9_]*)
  | (?P<iff><->)
  | (?P<imp>->)
  | (?P<sym>[!&|(),\[\]UR])
""", re.VERBOSE)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, base: Base):
        self.tokens = _tokenize(text)
        self.base = base
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.next()
        if text != value:
            raise ParseError(f"expected {value!r}, found {text!r}", pos)

    def parse(self) -> Formula:
        f = self.formula()
        kind, text, pos = self.peek()
        if kind != "eof":
            raise ParseError(f"trailing input {text!r}", pos)
        return f

    def formula(self) -> Formula:
        left = self.disjunction()
        kind, text, pos = self.peek()
        if kind == "imp":
            self.next()
            return implies(left, self.formula())
        if kind == "iff":
            self.next()
            return iff(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek()[1] == "|":
            self.next()
            f = lor(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.peek()[1] == "&":
            self.next()
            f = land(f, self.unary())
        return f

    def unary(self) -> Formula:
        kind, text, pos = self.peek()
        if text == "!":
            self.next()
            return lnot(self.unary())
        if kind == "quantop":
            self.next()
            return quant(text[0], text[1], (self.unary(),))
        if kind == "quant":
            self.next()
            left = self.formula()
            okind, otext, opos = self.next()
            if otext not in ("U", "R"):
                raise ParseError(f"expected U or R, found {otext!r}", opos)
            right = self.formula()
            self.expect("]")
            return quant(text[0], otext, (left, right))
        if text == "(":
            self.next()
            f = self.formula()
            self.expect(")")
            return f
        if kind == "ident":
            return self.atom()
        raise ParseError(f"expected a formula, found {text!r}", pos)

    def atom(self) -> Formula:
        kind, name, pos = self.next()
        if self.peek()[1] == "(":
            if name not in self.base:
                raise ParseError(f"unknown function {name!r}", pos)
            table = self.base[name]
            self.next()
            args = [self.formula()]
            while self.peek()[1] == ",":
                self.next()
                args.append(self.formula())
            self.expect(")")
            if len(args) != table.arity:
                raise ParseError(
                    f"{name} expects {table.arity} argument(s), got {len(args)}", pos)
            return apply_fn(name, args)
        if name in self.base:
            table = self.base[name]
            if table.arity != 0:
                raise ParseError(
                    f"{name} expects {table.arity} argument(s), got 0", pos)
            return apply_fn(name, ())
        return prop(name)


def parse_formula(text: str, base: Base | None = None) -> Formula:
    return _Parser(text, base if base is not None else _default_base()).parse()


def _default_base() -> Base:
    from .formula import STD
    return STD


def render_formula(f: Formula) -> str:
    """Canonical form; parse_formula(render_formula(f)) == f (up to tags)."""
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, Apply):
        if f.func == "not":
            return "!" + _wrap_unary(f.args[0])
        if f.func == "and":
            return f"({render_formula(f.args[0])} & {render_formula(f.args[1])})"
        if f.func == "or":
            return f"({render_formula(f.args[0])} | {render_formula(f.args[1])})"
        if not f.args:
            return f.func
        return f.func + "(" + ", ".join(render_formula(a) for a in f.args) + ")"
    assert isinstance(f, Quant)
    if f.op in ("U", "R"):
        return (f"{f.quantifier}[{render_formula(f.args[0])} "
                f"{f.op} {render_formula(f.args[1])}]")
    return f"{f.quantifier}{f.op} {_wrap_unary(f.args[0])}"


def _wrap_unary(f: Formula) -> str:
    # Quantified arguments of a prefix operator need parentheses only when
    # they would swallow a following infix operator; parenthesizing them
    # always keeps the rendering canonical and unambiguous.
    text = render_formula(f)
    if isinstance(f, Quant) and f.op not in ("U", "R"):
        return "(" + text + ")"
    return text


# ---------------------------------------------------------------------------
# Base files: one function per line, `name arity bits`

def parse_base(text: str) -> Base:
    tables = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise FormulaError(f"base line {lineno}: expected 'name arity bits'")
        name, arity_s, bits = parts
        if not re.fullmatch(r"[a-z][a-z0-9_]*", name):
            raise FormulaError(f"base line {lineno}: bad function name {name!r}")
        try:
            arity = int(arity_s)
        except ValueError:
            raise FormulaError(f"base line {lineno}: bad arity {arity_s!r}") from None
        if not re.fullmatch(r"[01]+", bits):
            raise FormulaError(f"base line {lineno}: bad bits {bits!r}")
        tables.append(TruthTable(name, arity, tuple(int(b) for b in bits)))
    return Base(tables)


def render_base(base: Base) -> str:
    lines = []
    for t in sorted(base, key=lambda t: t.name):
        lines.append(f"{t.name} {t.arity} {''.join(str(b) for b in t.outputs)}")
    return "\n".join(lines) + "\n"


def load_base(path: str) -> Base:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_base(fh.read())
