"""Kripke structures, rooted models, CTL model checking, size/extent metrics,
tree unraveling and quasi-model validation/conversion.

World sets are manipulated as bitmasks throughout; world i corresponds to
bit 1 << i.  Structures are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .formula import (
    Apply, Base, Formula, FormulaError, Prop, Quant, STD, closure,
    negate_syntactic, propositions, sort_key, subformulas,
)


class KripkeError(ValueError):
    """Raised for invalid structures or unchecked preconditions."""


class BudgetError(RuntimeError):
    """Raised when a desk-scale search cap would be exceeded."""


class KripkeStructure:
    """A finite directed graph with a per-world proposition valuation."""

    def __init__(self, num_worlds: int, edges: Iterable[tuple[int, int]],
                 valuation: Mapping[str, Iterable[int]],
                 names: Optional[Iterable[str]] = None):
        self.n = num_worlds
        edge_set = set()
        for (u, v) in edges:
            if not (0 <= u < num_worlds and 0 <= v < num_worlds):
                raise KripkeError(f"edge ({u},{v}) out of range")
            edge_set.add((u, v))
        self.edges: frozenset[tuple[int, int]] = frozenset(edge_set)
        self.valuation: dict[str, int] = {}
        for name, worlds in valuation.items():
            mask = 0
            for w in worlds:
                if not 0 <= w < num_worlds:
                    raise KripkeError(f"valuation of {name!r} mentions world {w}")
                mask |= 1 << w
            self.valuation[name] = mask
        self.names: tuple[str, ...] = tuple(names) if names is not None else \
            tuple(f"w{i}" for i in range(num_worlds))
        if len(self.names) != num_worlds:
            raise KripkeError("need one name per world")
        self.succ: tuple[int, ...] = tuple(0 for _ in range(num_worlds))
        succ = [0] * num_worlds
        pred = [0] * num_worlds
        for (u, v) in self.edges:
            succ[u] |= 1 << v
            pred[v] |= 1 << u
        self.succ = tuple(succ)
        self.pred = tuple(pred)

    def successors(self, w: int) -> list[int]:
        return _bits(self.succ[w])

    def prop_mask(self, name: str) -> int:
        return self.valuation.get(name, 0)

    def world_labels(self, w: int) -> list[str]:
        return sorted(p for p, mask in self.valuation.items() if mask & (1 << w))


def _bits(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


@dataclass(frozen=True)
class Diagnostics:
    non_serial: tuple[int, ...]
    unreachable: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not self.non_serial and not self.unreachable

    def describe(self, names: tuple[str, ...]) -> str:
        parts = []
        if self.non_serial:
            parts.append("non-serial: " + ", ".join(names[w] for w in self.non_serial))
        if self.unreachable:
            parts.append("unreachable: " + ", ".join(names[w] for w in self.unreachable))
        return "; ".join(parts) if parts else "ok"


class RootedModel:
    """A Kripke structure with a distinguished root world."""

    def __init__(self, structure: KripkeStructure, root: int):
        if not 0 <= root < structure.n:
            raise KripkeError(f"root {root} out of range")
        self.structure = structure
        self.root = root
        self._diag: Optional[Diagnostics] = None

    @property
    def size(self) -> int:
        return self.structure.n

    def validate(self) -> Diagnostics:
        if self._diag is None:
            s = self.structure
            non_serial = tuple(w for w in range(s.n) if not s.succ[w])
            reach = reachable_mask(s, self.root)
            unreachable = tuple(w for w in range(s.n) if not reach & (1 << w))
            self._diag = Diagnostics(non_serial, unreachable)
        return self._diag

    @property
    def validated(self) -> bool:
        return self.validate().ok

    def require_valid(self):
        diag = self.validate()
        if not diag.ok:
            raise KripkeError("invalid model: " + diag.describe(self.structure.names))


def reachable_mask(s: KripkeStructure, start: int) -> int:
    seen = 1 << start
    frontier = seen
    while frontier:
        nxt = 0
        for w in _bits(frontier):
            nxt |= s.succ[w]
        frontier = nxt & ~seen
        seen |= nxt
    return seen


def validate_structure(m: RootedModel) -> Diagnostics:
    return m.validate()


def complete_serial(m: RootedModel) -> RootedModel:
    """Add a self-loop to every successor-free world; idempotent."""
    s = m.structure
    if s.n == 0:
        raise KripkeError("empty structure")
    extra = [(w, w) for w in range(s.n) if not s.succ[w]]
    if not extra:
        return m
    fixed = KripkeStructure(
        s.n, list(s.edges) + extra,
        {p: _bits(mask) for p, mask in s.valuation.items()}, s.names)
    return RootedModel(fixed, m.root)


# ---------------------------------------------------------------------------
# Extent

def extent(m: RootedModel, world_cap: int = 20) -> int:
    """Greatest n such that some path visits n + 1 distinct worlds.

    Depth-first search over (world, visited-set) states; exponential in the
    worst case, so refuses structures above world_cap.
    """
    m.require_valid()
    s = m.structure
    if s.n > world_cap:
        raise BudgetError(f"extent search refuses structures over {world_cap} worlds")
    reach_from: list[int] = [reachable_mask(s, w) for w in range(s.n)]
    best = 1

    def dfs(w: int, visited: int, count: int):
        nonlocal best
        if count > best:
            best = count
        # bound: even absorbing everything reachable cannot beat best
        if count + bin(reach_from[w] & ~visited).count("1") <= best:
            return
        todo = s.succ[w] & ~visited
        for u in _bits(todo):
            dfs(u, visited | (1 << u), count + 1)

    dfs(m.root, 1 << m.root, 1)
    return best - 1


# ---------------------------------------------------------------------------
# Model checking

def truth_sets(m: RootedModel, f: Formula, base: Base = STD) -> dict[Formula, int]:
    """Bottom-up labeling: bitmask of worlds satisfying each subformula."""
    m.require_valid()
    s = m.structure
    full = (1 << s.n) - 1
    sets: dict[Formula, int] = {}
    order = sorted(subformulas(f), key=lambda g: (_height(g), sort_key(g)))
    for g in order:
        sets[g] = _truth_set(g, s, sets, base, full)
    return sets


def _height(f: Formula) -> int:
    if isinstance(f, Prop):
        return 0
    return 1 + max((_height(a) for a in f.args), default=0)


def _pre_exists(s: KripkeStructure, target: int) -> int:
    mask = 0
    for w in range(s.n):
        if s.succ[w] & target:
            mask |= 1 << w
    return mask


def _pre_all(s: KripkeStructure, target: int) -> int:
    mask = 0
    for w in range(s.n):
        if s.succ[w] and not (s.succ[w] & ~target):
            mask |= 1 << w
    return mask


def _lfp(seed: int, step) -> int:
    cur = seed
    while True:
        nxt = cur | step(cur)
        if nxt == cur:
            return cur
        cur = nxt


def _gfp(seed: int, step) -> int:
    cur = seed
    while True:
        nxt = cur & step(cur)
        if nxt == cur:
            return cur
        cur = nxt


def _truth_set(g: Formula, s: KripkeStructure, sets: dict[Formula, int],
               base: Base, full: int) -> int:
    if isinstance(g, Prop):
        return s.prop_mask(g.name)
    if isinstance(g, Apply):
        if g.func == "and":
            return sets[g.args[0]] & sets[g.args[1]]
        if g.func == "or":
            return sets[g.args[0]] | sets[g.args[1]]
        if g.func == "not":
            return full & ~sets[g.args[0]]
        table = base.closure_base()[g.func]
        arg_masks = [sets[a] for a in g.args]
        mask = 0
        for w in range(s.n):
            bits = [(am >> w) & 1 for am in arg_masks]
            if table.evaluate(bits):
                mask |= 1 << w
        return mask
    a = sets[g.args[0]]
    b = sets[g.args[1]] if len(g.args) == 2 else 0
    e = g.quantifier == "E"
    if g.op == "X":
        return _pre_exists(s, a) if e else _pre_all(s, a)
    if g.op == "F":
        pre = _pre_exists if e else _pre_all
        return _lfp(a, lambda cur: pre(s, cur))
    if g.op == "G":
        pre = _pre_exists if e else _pre_all
        return _gfp(a, lambda cur: pre(s, cur))
    if g.op == "U":
        pre = _pre_exists if e else _pre_all
        return _lfp(b, lambda cur: a & pre(s, cur))
    # R: greatest fixpoint of  b ∧ (a ∨ pre(cur))
    pre = _pre_exists if e else _pre_all
    return _gfp(b, lambda cur: b & (a | pre(s, cur)))


def model_check(m: RootedModel, f: Formula, base: Base = STD,
                world: Optional[int] = None) -> bool:
    sets = truth_sets(m, f, base)
    w = m.root if world is None else world
    return bool(sets[f] & (1 << w))


# ---------------------------------------------------------------------------
# Tree unraveling

def tree_unravel(m: RootedModel, depth: int) -> RootedModel:
    """Depth-bounded unraveling; leaves at the cutoff get self-loops."""
    m.require_valid()
    if depth < 0:
        raise KripkeError("depth must be >= 0")
    s = m.structure
    paths: list[tuple[int, ...]] = [(m.root,)]
    index: dict[tuple[int, ...], int] = {(m.root,): 0}
    edges: list[tuple[int, int]] = []
    frontier = [(m.root,)]
    for _ in range(depth):
        nxt = []
        for path in frontier:
            for u in s.successors(path[-1]):
                child = path + (u,)
                index[child] = len(paths)
                paths.append(child)
                edges.append((index[path], index[child]))
                nxt.append(child)
        frontier = nxt
    for path in frontier:
        edges.append((index[path], index[path]))
    valuation = {
        p: [index[path] for path in paths if s.prop_mask(p) & (1 << path[-1])]
        for p in s.valuation
    }
    names = tuple(".".join(s.names[w] for w in path) for path in paths)
    return RootedModel(KripkeStructure(len(paths), edges, valuation, names), 0)


# ---------------------------------------------------------------------------
# Quasi-models

@dataclass
class QuasiModel:
    """A Kripke frame plus an extended labeling from closure formulas to
    world sets (necessitation, not truth)."""

    n: int
    edges: frozenset[tuple[int, int]]
    labeling: dict[Formula, int] = field(default_factory=dict)
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.names:
            self.names = tuple(f"w{i}" for i in range(self.n))
        succ = [0] * self.n
        for (u, v) in self.edges:
            succ[u] |= 1 << v
        self.succ = tuple(succ)

    def label_mask(self, f: Formula) -> int:
        return self.labeling.get(f, 0)


def quasi_from_model(m: RootedModel, f: Formula, base: Base = STD) -> QuasiModel:
    """The truth labeling of closure(f); requires m to satisfy f."""
    m.require_valid()
    cl = closure(f)
    sets: dict[Formula, int] = {}
    s = m.structure
    full = (1 << s.n) - 1
    for g in sorted(cl, key=lambda g: (_height(g), sort_key(g))):
        sets[g] = _truth_set(g, s, sets, base, full)
    if not sets[f] & (1 << m.root):
        raise KripkeError("model does not satisfy the formula at the root")
    return QuasiModel(s.n, s.edges, sets, s.names)


def model_from_quasi(q: QuasiModel, f: Formula, base: Base = STD) -> RootedModel:
    """Read a rooted model off a quasi-model; root is any world labeling f."""
    problems = quasi_check(q, f, base=base)
    if problems:
        raise KripkeError("quasi-model check failed: " + problems[0])
    target = q.label_mask(f)
    root = _bits(target)[0]
    valuation = {}
    for g, mask in q.labeling.items():
        if isinstance(g, Prop):
            valuation[g.name] = _bits(mask)
    model = RootedModel(KripkeStructure(q.n, q.edges, valuation, q.names), root)
    # restrict to the reachable part so the result validates R-generable
    reach = reachable_mask(model.structure, root)
    if reach != (1 << q.n) - 1:
        model = restrict_to(model, reach)
    return model


def restrict_to(m: RootedModel, mask: int) -> RootedModel:
    worlds = _bits(mask)
    remap = {w: i for i, w in enumerate(worlds)}
    s = m.structure
    edges = [(remap[u], remap[v]) for (u, v) in s.edges if u in remap and v in remap]
    valuation = {p: [remap[w] for w in _bits(vm) if w in remap]
                 for p, vm in s.valuation.items()}
    names = tuple(s.names[w] for w in worlds)
    return RootedModel(KripkeStructure(len(worlds), edges, valuation, names), remap[m.root])


def quasi_check(q: QuasiModel, f: Formula, with_q7: bool = False,
                base: Base = STD) -> list[str]:
    """Verify Q1-Q6 (and optionally Q7); returns a list of violations."""
    cl = closure(f)
    problems: list[str] = []
    cbase = base.closure_base()
    n = q.n

    for w in range(n):
        if not q.succ[w]:
            problems.append(f"world {q.names[w]} has no successor (seriality)")
    if problems:
        return problems

    def L(g: Formula) -> int:
        return q.label_mask(g)

    # Q1: truth-table witness vectors
    for g in sorted(cl, key=sort_key):
        if not isinstance(g, Apply):
            continue
        table = cbase[g.func]
        for (want, holder) in ((1, g), (0, negate_syntactic(g))):
            if holder not in cl and want == 0:
                continue
            mask = L(holder) if want == 0 else L(g)
            for w in _bits(mask):
                ok = False
                for vec in table.input_vectors():
                    if table.evaluate(vec) != want:
                        continue
                    if all((L(arg) if bit else L(negate_syntactic(arg))) & (1 << w)
                           for arg, bit in zip(g.args, vec)):
                        ok = True
                        break
                if not ok:
                    problems.append(
                        f"Q1: no witness vector for {'~' if want == 0 else ''}"
                        f"{g.func}-formula at {q.names[w]}")

    # Q2: disjointness
    for g in sorted(cl, key=sort_key):
        bad = L(g) & L(negate_syntactic(g))
        for w in _bits(bad):
            problems.append(f"Q2: both a formula and its negation at {q.names[w]}")

    # Q3/Q4: negation pushing through quantifiers
    from .formula import dual_quant
    for g in sorted(cl, key=sort_key):
        if isinstance(g, Apply) and g.func == "not" and isinstance(g.args[0], Quant):
            inner = g.args[0]
            dual = dual_quant(inner)
            missing = L(g) & ~L(dual)
            for w in _bits(missing):
                problems.append(f"Q3/Q4: negated operator not pushed at {q.names[w]}")

    # Q5: path conditions, via fixpoints over the labeling on the finite frame
    frame = KripkeStructure(n, q.edges, {}, q.names)
    for g in sorted(cl, key=sort_key):
        if not isinstance(g, Quant):
            continue
        a = L(g.args[0])
        b = L(g.args[1]) if len(g.args) == 2 else 0
        e = g.quantifier == "E"
        pre = _pre_exists if e else _pre_all
        if g.op == "X":
            sat_mask = pre(frame, a)
        elif g.op == "F":
            sat_mask = _lfp(a, lambda cur: pre(frame, cur))
        elif g.op == "G":
            sat_mask = _gfp(a, lambda cur: pre(frame, cur))
        elif g.op == "U":
            sat_mask = _lfp(b, lambda cur: a & pre(frame, cur))
        else:
            sat_mask = _gfp(b, lambda cur: b & (a | pre(frame, cur)))
        for w in _bits(L(g) & ~sat_mask):
            problems.append(f"Q5: path condition for labeled operator fails at {q.names[w]}")

    # Q6: the target formula is labeled somewhere
    if not L(f):
        problems.append("Q6: target formula labeled nowhere")

    if with_q7:
        for g in sorted(cl, key=sort_key):
            if isinstance(g, Quant) and g.quantifier == "A" and g.op == "F":
                psi = g.args[0]
                pending = L(g) & ~L(psi)
                for w in _bits(pending):
                    for u in _bits(q.succ[w]):
                        if not (L(psi) | L(g)) & (1 << u):
                            problems.append(
                                f"Q7: AF fixpoint fails at {q.names[w]} -> {q.names[u]}")
                    for sub in closure(psi):
                        from .formula import temporal_depth
                        if temporal_depth(sub) > 0 and L(sub) & (1 << w):
                            problems.append(
                                f"Q7: pending AF labels a temporal subformula at {q.names[w]}")
    return problems


# ---------------------------------------------------------------------------
# Structure files and DOT export

def parse_structure(text: str) -> RootedModel:
    worlds: dict[str, int] = {}
    labels: dict[str, list[str]] = {}
    edges: list[tuple[str, str]] = []
    root: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "world":
            if len(parts) < 2:
                raise KripkeError(f"line {lineno}: world needs a name")
            name = parts[1]
            if name in worlds:
                raise KripkeError(f"line {lineno}: duplicate world {name!r}")
            worlds[name] = len(worlds)
            labels[name] = parts[2:]
        elif parts[0] == "edge":
            if len(parts) != 3:
                raise KripkeError(f"line {lineno}: edge needs two names")
            edges.append((parts[1], parts[2]))
        elif parts[0] == "root":
            if len(parts) != 2 or root is not None:
                raise KripkeError(f"line {lineno}: exactly one root line required")
            root = parts[1]
        else:
            raise KripkeError(f"line {lineno}: unknown directive {parts[0]!r}")
    if root is None:
        raise KripkeError("missing root line")
    for (u, v) in edges:
        for name in (u, v):
            if name not in worlds:
                raise KripkeError(f"edge mentions unknown world {name!r}")
    if root not in worlds:
        raise KripkeError(f"root mentions unknown world {root!r}")
    valuation: dict[str, list[int]] = {}
    for name, props in labels.items():
        for p in props:
            valuation.setdefault(p, []).append(worlds[name])
    structure = KripkeStructure(
        len(worlds), [(worlds[u], worlds[v]) for (u, v) in edges],
        valuation, tuple(worlds))
    return RootedModel(structure, worlds[root])


def render_structure(m: RootedModel) -> str:
    s = m.structure
    lines = []
    for w in range(s.n):
        props = " ".join(s.world_labels(w))
        lines.append(f"world {s.names[w]}" + (f" {props}" if props else ""))
    for (u, v) in sorted(s.edges):
        lines.append(f"edge {s.names[u]} {s.names[v]}")
    lines.append(f"root {s.names[m.root]}")
    return "\n".join(lines) + "\n"


def to_dot(m: RootedModel) -> str:
    s = m.structure
    lines = ["digraph model {", "  rankdir=LR;"]
    for w in range(s.n):
        props = ",".join(s.world_labels(w))
        shape = "doublecircle" if w == m.root else "circle"
        lines.append(f'  n{w} [label="{s.names[w]}\\n{props}" shape={shape}];')
    for (u, v) in sorted(s.edges):
        lines.append(f"  n{u} -> n{v};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_structure(path: str) -> RootedModel:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_structure(fh.read())


def make_model(world_labels: list[list[str]], edges: list[tuple[int, int]],
               root: int = 0, names: Optional[list[str]] = None) -> RootedModel:
    """Convenience constructor used heavily in tests and engines."""
    valuation: dict[str, list[int]] = {}
    for w, props in enumerate(world_labels):
        for p in props:
            valuation.setdefault(p, []).append(w)
    return RootedModel(
        KripkeStructure(len(world_labels), edges, valuation, names), root)
