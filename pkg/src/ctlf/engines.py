"""Satisfiability engines: the generic tableau, the fragment engines for flat
CTL, bounded AX and the {AF, AX} balloon procedure, the brute-force model
enumeration oracle, and the constructive model-shrinking procedures.

The generic engine builds quasi-model states lazily: a state is a saturated,
locally consistent label set; successors are saturations of the forced set
plus one seed per existential obligation.  States are pruned until every
obligation keeps an alive candidate and every eventuality stays fulfillable,
then a witness model is read off with round-robin eventuality scheduling.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .formula import (
    Apply, Base, Formula, FormulaError, Prop, Quant, STD, apply_fn, closure,
    dual_quant, formula_size, negate_syntactic, normalize_occurrences,
    operators_of, propositions, prop, quant, seq_key, sort_key, strip_tags,
    subformulas, temporal_depth,
)
from .kripke import RootedModel, extent, make_model, model_check, truth_sets
from . import measure as _measure


class EngineError(FormulaError):
    pass


class BudgetExceeded(RuntimeError):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass
class SatBudget:
    """Resource limits shared by the engines."""

    closure_quant_cap: int = 48        # quantified closure members (with duals)
    node_cap: int = 200_000            # tableau states / search steps
    millis_cap: Optional[int] = None
    balloon_path_cap: Optional[int] = None
    brute_space_ceiling: int = _measure.DEFAULT_SPACE_CEILING

    def start_clock(self):
        self._t0 = time.monotonic()

    def check_clock(self):
        if self.millis_cap is not None:
            if (time.monotonic() - self._t0) * 1000 > self.millis_cap:
                raise BudgetExceeded("time budget exhausted")


@dataclass
class SatResult:
    status: str                          # sat | unsat | unknown
    witness: Optional[RootedModel] = None
    engine: str = ""
    nodes: int = 0
    millis: int = 0
    exhaustive: Optional[bool] = None
    reason: Optional[str] = None

    @property
    def is_sat(self) -> bool:
        return self.status == "sat"


def _finish(result: SatResult, f: Formula, base: Base, t0: float) -> SatResult:
    result.millis = int((time.monotonic() - t0) * 1000)
    if result.status == "sat":
        assert result.witness is not None
        if not model_check(result.witness, f, base):
            raise EngineError(
                f"internal error: {result.engine} produced a bad witness")
    return result


# ---------------------------------------------------------------------------
# Saturation: minimal locally consistent label sets

def _implicants(table, want: int) -> list[tuple[Optional[int], ...]]:
    """Minimal partial assignments forcing the table's output to `want`.

    Entries are 1/0/None per argument; None means unconstrained.
    """
    n = table.arity
    partials = []
    for assignment in _ternary(n):
        vals = set()
        for vec in table.input_vectors():
            if all(a is None or a == b for a, b in zip(assignment, vec)):
                vals.add(table.evaluate(vec))
        if vals == {want}:
            partials.append(assignment)
    minimal = []
    for cand in partials:
        dominated = False
        for other in partials:
            if other is not cand and _weaker(other, cand):
                dominated = True
                break
        if not dominated:
            minimal.append(cand)
    return minimal


def _weaker(a, b) -> bool:
    """a constrains strictly fewer positions than b and agrees where set."""
    strict = False
    for x, y in zip(a, b):
        if x is None and y is not None:
            strict = True
        elif x is not None and x != y:
            return False
    return strict


def _ternary(n: int):
    if n == 0:
        yield ()
        return
    for rest in _ternary(n - 1):
        for v in (None, 0, 1):
            yield rest + (v,)


def three_valued(members, g: Formula, cbase: Base,
                 closed: bool = True,
                 memo: Optional[dict] = None) -> Optional[bool]:
    """Kleene truth of g under a label set.

    Quantified formulas are true when labeled and false when their dual is
    labeled, else unknown.  With closed=True an absent proposition counts as
    false (the extraction valuation is exactly the labeled propositions);
    with closed=False it counts as unknown, which is monotone under label
    additions and therefore safe to rely on during saturation.
    """
    if memo is None:
        memo = {}
    elif g in memo:
        return memo[g]
    if isinstance(g, Prop):
        if g in members:
            out = True
        elif closed:
            out = False
        else:
            out = False if apply_fn("not", (g,)) in members else None
        memo[g] = out
        return out
    if isinstance(g, Quant):
        if g in members:
            out = True
        elif dual_quant(g) in members:
            out = False
        else:
            out = None
        memo[g] = out
        return out
    vals = [three_valued(members, a, cbase, closed, memo) for a in g.args]
    table = cbase[g.func]
    unknown = [i for i, v in enumerate(vals) if v is None]
    results = set()
    for bits in range(1 << len(unknown)):
        vec = [1 if v else 0 for v in vals]
        for j, i in enumerate(unknown):
            vec[i] = (bits >> j) & 1
        results.add(table.evaluate(vec))
        if len(results) == 2:
            memo[g] = None
            return None
    out = bool(results.pop())
    memo[g] = out
    return out



class Saturator:
    """Computes all saturated consistent supersets of a seed label set."""

    def __init__(self, base: Base, budget: SatBudget):
        self.cbase = base.closure_base()
        self.budget = budget
        self._implicant_cache: dict[tuple[str, int], list] = {}
        self._cache: dict[frozenset, tuple[frozenset, ...]] = {}
        self._open_memo: dict = {}
        self._closed_memo: dict = {}
        self._support: dict[Formula, frozenset] = {}
        self.branches = 0

    def implicants(self, func: str, want: int):
        key = (func, want)
        if key not in self._implicant_cache:
            self._implicant_cache[key] = _implicants(self.cbase[func], want)
        return self._implicant_cache[key]

    def saturate(self, seed: Iterable[Formula]) -> tuple[frozenset, ...]:
        seed_set = frozenset(seed)
        if seed_set in self._cache:
            return self._cache[seed_set]
        seen: set[frozenset] = set()
        self._expand(set(seed_set), set(), seen)
        out = tuple(sorted(seen, key=lambda s: tuple(sorted(map(seq_key, s)))))
        self._cache[seed_set] = out
        return out

    def _expand(self, current: set, processed: set, seen):
        """Unit-propagate forced requirements, then branch on the first
        genuinely undetermined member.  Open-world-definite members need no
        witness commitment: their truth is stable under label additions."""
        self.branches += 1
        if self.branches > self.budget.node_cap * 4:
            raise BudgetExceeded("saturation branch budget exhausted")
        self._open_memo = {}
        self._closed_memo = {}
        while True:
            branch_member = None
            branch_options = None
            progress = False
            for g in sorted(current - processed, key=seq_key):
                if negate_syntactic(g) in current:
                    return  # Q2 violation
                step = self._process(g, current)
                if step is None:
                    return  # locally unsatisfiable member
                status, forced, options = step
                if forced:
                    new = [r for r in forced if r not in current]
                    if new:
                        current.update(new)
                        progress = True
                        for r in new:
                            self._invalidate(r)
                if status == "done":
                    processed.add(g)
                elif status == "branch" and branch_member is None and not progress:
                    branch_member, branch_options = g, options
            if progress:
                continue
            if branch_member is None:
                # everything left deferred: satisfied by the final labels
                seen.add(frozenset(current))
                return
            processed.add(branch_member)
            for opt in branch_options:
                nxt = set(current)
                nxt.update(opt)
                self._expand(nxt, set(processed), seen)
            return

    def support(self, g: Formula) -> frozenset:
        """Atoms (propositions and quantified formulas plus their duals) a
        truth evaluation of g depends on."""
        hit = self._support.get(g)
        if hit is None:
            if isinstance(g, Prop):
                hit = frozenset([g])
            elif isinstance(g, Quant):
                hit = frozenset([g, dual_quant(g)])
            else:
                hit = frozenset().union(*(self.support(a) for a in g.args))
            self._support[g] = hit
        return hit

    def _invalidate(self, added: Formula):
        """Drop memo entries whose support intersects the added member."""
        if isinstance(added, Prop):
            changed = {added}
        elif isinstance(added, Quant):
            changed = {added, dual_quant(added)}
        elif added.func == "not" and isinstance(added.args[0], Prop):
            changed = {added.args[0]}
        else:
            return
        for memo in (self._open_memo, self._closed_memo):
            for g in [g for g in memo if self.support(g) & changed]:
                del memo[g]

    def _settle(self, current, g: Formula) -> str:
        """true_perm/false_perm: definite under every completion of the label
        set (open-world Kleene, stable under additions); true_tent: true under
        the closed-world extraction of the current labels; open: undecided."""
        open_tv = three_valued(current, g, self.cbase, closed=False,
                               memo=self._open_memo)
        if open_tv is True:
            return "true_perm"
        if open_tv is False:
            return "false_perm"
        if three_valued(current, g, self.cbase, closed=True,
                        memo=self._closed_memo) is True:
            return "true_tent"
        return "open"

    def _process(self, g: Formula, current: set):
        """One propagation step for a member: returns a (status, forced,
        options) triple with status in done/defer/branch, or None when the
        member is locally unsatisfiable.

        done is permanent; defer means the member is satisfied by the current
        closed-world reading and must be re-checked after additions; branch
        lists the member's viable witness options.
        """
        def witness(options, whole):
            s = self._settle(current, whole)
            if s == "true_perm":
                return ("done", (), ())
            if s == "false_perm":
                return None
            if s == "true_tent":
                return ("defer", (), ())
            viable = [opt for opt in options
                      if not any(self._settle(current, r) == "false_perm"
                                 for r in opt)]
            if not viable:
                return None
            if len(viable) == 1:
                return ("done", viable[0], ())
            return ("branch", (), viable)

        if isinstance(g, Prop):
            return ("done", (), ())
        if isinstance(g, Apply):
            if g.func == "not":
                inner = g.args[0]
                if isinstance(inner, Prop):
                    return ("done", (), ())
                if isinstance(inner, Quant):
                    return witness([(dual_quant(inner),)], g)
                if inner.func == "not":
                    return witness([(inner.args[0],)], g)
                return witness(self._apply_options(inner, want=0), g)
            return witness(self._apply_options(g, want=1), g)
        a = g.args[0]
        b = g.args[1] if len(g.args) == 2 else None
        if g.op == "X":
            return ("done", (), ())
        if g.op == "G":
            s = self._settle(current, a)
            if s == "true_perm":
                return ("done", (), ())
            if s == "false_perm":
                return None
            if s == "true_tent":
                return ("defer", (), ())
            return ("done", (a,), ())
        if g.op == "F":
            # fulfill now or stay pending; pending is fine when the target is
            # settled false (the obligation simply propagates)
            s = self._settle(current, a)
            if s in ("true_perm", "false_perm"):
                return ("done", (), ())
            if s == "true_tent":
                return ("defer", (), ())
            return ("branch", (), [(a,), ()])
        if g.op == "U":
            sb = self._settle(current, b)
            if sb == "true_perm":
                return ("done", (), ())
            if sb == "true_tent":
                return ("defer", (), ())
            sa = self._settle(current, a)
            if sb == "false_perm":
                if sa == "false_perm":
                    return None
                return ("done", () if sa == "true_perm" else (a,), ())
            if sa == "false_perm":
                return ("done", (b,), ())
            return ("branch", (), [(b,), (a,)])
        # R: the second argument must hold now; the first decides the release
        sb = self._settle(current, b)
        if sb == "false_perm":
            return None
        if sb == "open":
            return ("defer", (b,), ())
        sa = self._settle(current, a)
        if sa in ("true_perm", "false_perm"):
            return ("done" if sb == "true_perm" else "defer", (), ())
        if sb == "true_perm":
            if sa == "true_tent":
                return ("defer", (), ())
            return ("branch", (), [(a,), ()])
        # b only tentatively true: both choices pin b down explicitly, and
        # staying pending commits the release trigger away (given b, the
        # world is unreleased exactly when the trigger is false)
        return ("branch", (), [(a, b), (negate_syntactic(a), b)])

    def _apply_options(self, g: Apply, want: int) -> list[tuple[Formula, ...]]:
        options = []
        for implicant in self.implicants(g.func, want):
            req = []
            for arg, bit in zip(g.args, implicant):
                if bit == 1:
                    req.append(arg)
                elif bit == 0:
                    req.append(negate_syntactic(arg))
            options.append(tuple(req))
        return options


# ---------------------------------------------------------------------------
# The generic tableau (sat_general)

def _is_quant(g, quantifier, op):
    return isinstance(g, Quant) and g.quantifier == quantifier and g.op == op


def _discharge(e: Quant) -> Formula:
    """The formula whose membership discharges a pending eventuality."""
    return e.args[0] if e.op == "F" else e.args[1]




@dataclass
class _Node:
    idx: int
    members: frozenset
    universal: frozenset = field(default_factory=frozenset)
    obligations: list = field(default_factory=list)   # (kind, seed, eventuality)
    candidates: list = field(default_factory=list)    # list[list[int]] per obligation
    alive: bool = True
    discharge_cache: dict = field(default_factory=dict)


class _Tableau:
    def __init__(self, f: Formula, base: Base, budget: SatBudget):
        self.f = f
        self.base = base
        self.cbase = base.closure_base()
        self.budget = budget
        self.sat = Saturator(base, budget)
        self.nodes: list[_Node] = []
        self.index: dict[tuple, int] = {}
        self.expanded: set[int] = set()
        self._roots = None
        self._frontier: list[int] = []
        self.optimistic = False

    def _key(self, members: frozenset) -> tuple:
        """Nodes are identified by their propositional and quantified members;
        Boolean-combination members are saturation scaffolding."""
        props = frozenset(g for g in members if isinstance(g, Prop))
        quants = frozenset(g for g in members if isinstance(g, Quant))
        return (props, quants)

    def node_for(self, members: frozenset) -> int:
        key = self._key(members)
        if key in self.index:
            return self.index[key]
        if len(self.nodes) >= self.budget.node_cap:
            raise BudgetExceeded("tableau node budget exhausted")
        node = _Node(len(self.nodes), members)
        self.index[key] = node.idx
        self.nodes.append(node)
        return node.idx

    def discharged(self, node: _Node, g: Formula) -> bool:
        """A pending obligation is discharged once its target formula is
        semantically entailed by the labels."""
        hit = node.discharge_cache.get(g)
        if hit is None:
            hit = three_valued(node.members, g, self.cbase,
                               memo=node.discharge_cache.setdefault(
                                   "_memo", {})) is True
            node.discharge_cache[g] = hit
        return hit

    def roots(self) -> list[int]:
        if self._roots is None:
            self._roots = [self.node_for(s) for s in self.sat.saturate([self.f])]
            self._frontier = [((0, r), r) for r in self._roots]
        return self._roots

    def expand(self, limit: int) -> bool:
        """Expand up to `limit` total nodes, lightest obligations first, so
        chain-closing worlds appear early; returns True when the reachable
        graph is fully expanded."""
        import heapq
        self.roots()
        queue = self._frontier
        heapq.heapify(queue)
        while queue:
            self.budget.check_clock()
            _, idx = heapq.heappop(queue)
            if idx in self.expanded:
                continue
            if len(self.expanded) >= limit:
                heapq.heappush(queue, (_, idx))
                self._frontier = queue
                return False
            self.expanded.add(idx)
            node = self.nodes[idx]
            self._wire(node)
            for cands in node.candidates:
                for c in cands:
                    if c not in self.expanded:
                        weight = sum(1 for g in self.nodes[c].members
                                     if isinstance(g, Quant))
                        heapq.heappush(queue, ((weight, c), c))
        self._frontier = []
        return True

    def _wire(self, node: _Node):
        H = node.members
        universal: set[Formula] = set()
        obligations: list[tuple[str, frozenset, Optional[Quant]]] = []
        for g in sorted(H, key=seq_key):
            if not isinstance(g, Quant):
                continue
            a = g.args[0]
            b = g.args[1] if len(g.args) == 2 else None
            if g.quantifier == "A":
                if g.op == "X":
                    universal.add(a)
                elif g.op == "G":
                    universal.add(g)
                elif g.op == "F":
                    if not self.discharged(node, a):
                        universal.add(g)
                elif g.op == "U":
                    if not self.discharged(node, b):
                        universal.add(g)
                else:  # R
                    if not self.discharged(node, a):
                        universal.add(g)
            else:
                if g.op == "X":
                    obligations.append(("x", frozenset([a]), None))
                elif g.op == "G":
                    obligations.append(("g", frozenset([g]), None))
                elif g.op == "F":
                    if not self.discharged(node, a):
                        obligations.append(("f", frozenset([g]), g))
                elif g.op == "U":
                    if not self.discharged(node, b):
                        obligations.append(("u", frozenset([g]), g))
                else:  # R
                    if not self.discharged(node, a):
                        obligations.append(("r", frozenset([g]), None))
        if not obligations:
            obligations.append(("d", frozenset(), None))
        node.universal = frozenset(universal)
        node.obligations = obligations
        node.candidates = []
        for (_, seed, _) in obligations:
            sets = self.sat.saturate(node.universal | seed)
            node.candidates.append([self.node_for(s) for s in sets])

    # -- pruning ------------------------------------------------------------

    def pending_a(self, node: _Node) -> list[Quant]:
        out = []
        for g in node.members:
            if isinstance(g, Quant) and g.quantifier == "A" and g.op in ("F", "U"):
                if not self.discharged(node, _discharge(g)):
                    out.append(g)
        return sorted(out, key=seq_key)

    def prune(self, optimistic: bool = False):
        """Recompute aliveness.  Pessimistically, unexpanded nodes are dead
        (an alive root then yields a genuine witness); optimistically they are
        alive and fulfill everything (a dead root is then a genuine unsat)."""
        self.optimistic = optimistic
        for node in self.nodes:
            node.alive = optimistic or node.idx in self.expanded
        changed = True
        while changed:
            self.budget.check_clock()
            changed = False
            # 1. every obligation needs an alive candidate
            for node in self.nodes:
                if not node.alive or node.idx not in self.expanded:
                    continue
                for cands in node.candidates:
                    if not any(self.nodes[c].alive for c in cands):
                        node.alive = False
                        changed = True
                        break
            # 2. existential eventualities must be fulfillable
            for e_kind in ("f", "u"):
                for e in self._eventualities("E", e_kind):
                    fulfill = self._fulfill_e(e)
                    for node in self.nodes:
                        if (node.alive and node.idx in self.expanded
                                and e in node.members
                                and not self.discharged(node, _discharge(e))
                                and node.idx not in fulfill):
                            node.alive = False
                            changed = True
            # 3. universal eventualities must be fulfillable
            for e in self._eventualities("A", "f") + self._eventualities("A", "u"):
                fulfill = self._fulfill_a(e)
                for node in self.nodes:
                    if (node.alive and node.idx in self.expanded
                            and e in node.members
                            and not self.discharged(node, _discharge(e))
                            and node.idx not in fulfill):
                        node.alive = False
                        changed = True

    def _eventualities(self, quantifier: str, op_kind: str) -> list[Quant]:
        ops = {"f": "F", "u": "U"}
        seen = set()
        for node in self.nodes:
            if not node.alive or node.idx not in self.expanded:
                continue
            for g in node.members:
                if _is_quant(g, quantifier, ops[op_kind]):
                    seen.add(g)
        return sorted(seen, key=seq_key)

    def _ob_index(self, node: _Node, e: Quant) -> Optional[int]:
        for i, (_, _, ev) in enumerate(node.obligations):
            if ev == e:
                return i
        return None

    def _fulfill_e(self, e: Quant) -> set[int]:
        done: set[int] = set()
        relevant = []
        for node in self.nodes:
            if not node.alive or e not in node.members:
                continue
            if self.discharged(node, _discharge(e)):
                done.add(node.idx)
            elif node.idx in self.expanded:
                relevant.append(node)
        changed = True
        while changed:
            changed = False
            for node in relevant:
                if node.idx in done:
                    continue
                i = self._ob_index(node, e)
                if i is None:
                    continue
                for c in node.candidates[i]:
                    cn = self.nodes[c]
                    if cn.alive and (c in done
                                     or self.discharged(cn, _discharge(e))
                                     or (self.optimistic
                                         and c not in self.expanded)):
                        done.add(node.idx)
                        changed = True
                        break
        return done

    def _fulfill_a(self, e: Quant) -> set[int]:
        done: set[int] = set()
        relevant = []
        for node in self.nodes:
            if not node.alive or e not in node.members:
                continue
            if self.discharged(node, _discharge(e)):
                done.add(node.idx)
            elif node.idx in self.expanded:
                relevant.append(node)
        changed = True
        while changed:
            changed = False
            for node in relevant:
                if node.idx in done:
                    continue
                ok = True
                for cands in node.candidates:
                    if not any(
                        self.nodes[c].alive
                        and (self.discharged(self.nodes[c], _discharge(e))
                             or c in done
                             or (self.optimistic and c not in self.expanded))
                        for c in cands
                    ):
                        ok = False
                        break
                if ok:
                    done.add(node.idx)
                    changed = True
        return done

    # -- witness extraction ---------------------------------------------------

    def extract(self, root: int) -> RootedModel:
        evs = self._all_eventualities()
        rank_e = {e: self._rank_e(e) for e in evs if e.quantifier == "E"}
        rank_a = {e: self._rank_a(e) for e in evs if e.quantifier == "A"}
        k = max(1, len(evs))

        def pending_in(node: _Node) -> list[int]:
            return [i for i, e in enumerate(evs)
                    if e in node.members
                    and not self.discharged(node, _discharge(e))]

        def pick(cands: list[int], need_progress: Optional[Quant],
                 rank: Optional[dict]) -> int:
            best = None
            for c in sorted(cands):
                cn = self.nodes[c]
                if not cn.alive:
                    continue
                if need_progress is not None:
                    if (not self.discharged(cn, _discharge(need_progress))
                            and rank.get(c, 10 ** 9) >= rank[curr_idx]):
                        continue
                best = c
                break
            if best is None:
                raise EngineError("internal error: no viable successor during extraction")
            return best

        worlds: dict[tuple[int, int], int] = {}
        order: list[tuple[int, int]] = []
        edges: list[tuple[int, int]] = []

        def world_id(state: tuple[int, int]) -> int:
            if state not in worlds:
                worlds[state] = len(order)
                order.append(state)
            return worlds[state]

        stack = [(root, 0)]
        world_id((root, 0))
        seen = set()
        while stack:
            state = stack.pop()
            if state in seen:
                continue
            seen.add(state)
            idx, focus = state
            node = self.nodes[idx]
            curr_idx = idx
            pend = pending_in(node)
            fe = None
            fe_i = focus
            if pend:
                for step in range(k):
                    cand_i = (focus + step) % k
                    if cand_i in pend:
                        fe_i = cand_i
                        fe = evs[cand_i]
                        break
            for ob_i, (kind, _, ev) in enumerate(node.obligations):
                cands = node.candidates[ob_i]
                if fe is not None and fe.quantifier == "A":
                    succ = pick(cands, fe, rank_a[fe])
                elif fe is not None and ev == fe:
                    succ = pick(cands, fe, rank_e[fe])
                else:
                    succ = pick(cands, None, None)
                succ_node = self.nodes[succ]
                if fe is None:
                    nf = focus
                elif fe.quantifier == "A" or ev == fe:
                    still = (fe in succ_node.members
                             and not self.discharged(succ_node, _discharge(fe)))
                    nf = fe_i if still else (fe_i + 1) % k
                else:
                    nf = (fe_i + 1) % k
                target = (succ, nf)
                edges.append((world_id(state), world_id(target)))
                if target not in seen:
                    stack.append(target)

        labels = []
        for (idx, _) in order:
            members = self.nodes[idx].members
            labels.append(sorted(g.name for g in members if isinstance(g, Prop)))
        return make_model(labels, sorted(set(edges)), 0)

    def _all_eventualities(self) -> list[Quant]:
        out = set()
        for node in self.nodes:
            if not node.alive:
                continue
            for g in node.members:
                if isinstance(g, Quant) and (
                        g.op == "F" or (g.op == "U")):
                    out.add(g)
        return sorted(out, key=seq_key)

    def _rank_e(self, e: Quant) -> dict[int, int]:
        rank: dict[int, int] = {}
        for node in self.nodes:
            if (node.alive and e in node.members
                    and self.discharged(node, _discharge(e))):
                rank[node.idx] = 0
        changed = True
        while changed:
            changed = False
            for node in self.nodes:
                if not node.alive or node.idx in rank or e not in node.members:
                    continue
                i = self._ob_index(node, e)
                if i is None:
                    continue
                best = None
                for c in node.candidates[i]:
                    cn = self.nodes[c]
                    if not cn.alive:
                        continue
                    if self.discharged(cn, _discharge(e)):
                        best = 0 if best is None else min(best, 0)
                    elif c in rank:
                        best = rank[c] if best is None else min(best, rank[c])
                if best is not None:
                    rank[node.idx] = best + 1
                    changed = True
        return rank

    def _rank_a(self, e: Quant) -> dict[int, int]:
        rank: dict[int, int] = {}
        for node in self.nodes:
            if (node.alive and e in node.members
                    and self.discharged(node, _discharge(e))):
                rank[node.idx] = 0
        changed = True
        while changed:
            changed = False
            for node in self.nodes:
                if not node.alive or node.idx in rank or e not in node.members:
                    continue
                worst = 0
                ok = True
                for cands in node.candidates:
                    best = None
                    for c in cands:
                        cn = self.nodes[c]
                        if not cn.alive:
                            continue
                        if self.discharged(cn, _discharge(e)):
                            best = 0
                            break
                        if c in rank:
                            best = rank[c] if best is None else min(best, rank[c])
                    if best is None:
                        ok = False
                        break
                    worst = max(worst, best)
                if ok:
                    rank[node.idx] = worst + 1
                    changed = True
        return rank


def sat_general(f: Formula, base: Base = STD,
                budget: Optional[SatBudget] = None) -> SatResult:
    """Quasi-model tableau for full CTL over any base."""
    budget = budget or SatBudget()
    budget.start_clock()
    t0 = time.monotonic()
    cl = closure(f)
    quant_members = sum(1 for g in cl if isinstance(g, Quant))
    if quant_members > budget.closure_quant_cap:
        return SatResult("unknown", engine="general",
                         reason=f"closure has {quant_members} quantified members "
                                f"(cap {budget.closure_quant_cap})")
    tableau = _Tableau(f, base, budget)
    limit = 256
    try:
        while True:
            complete = tableau.expand(limit)
            roots = tableau.roots()
            tableau.prune(optimistic=False)
            alive_roots = [r for r in roots if tableau.nodes[r].alive]
            if alive_roots:
                witness = tableau.extract(min(alive_roots))
                return _finish(SatResult("sat", witness=witness, engine="general",
                                         nodes=len(tableau.nodes)), f, base, t0)
            if complete:
                return _finish(SatResult("unsat", engine="general",
                                         nodes=len(tableau.nodes)), f, base, t0)
            tableau.prune(optimistic=True)
            if not any(tableau.nodes[r].alive for r in roots):
                return _finish(SatResult("unsat", engine="general",
                                         nodes=len(tableau.nodes)), f, base, t0)
            if limit >= budget.node_cap:
                return SatResult("unknown", engine="general",
                                 nodes=len(tableau.nodes),
                                 reason="tableau node budget exhausted")
            limit = min(limit * 4, budget.node_cap)
    except BudgetExceeded as exc:
        return SatResult("unknown", engine="general", nodes=len(tableau.nodes),
                         reason=exc.reason)


# ---------------------------------------------------------------------------
# Flat CTL (temporal depth <= 1)

def _skeleton_atoms(f: Formula) -> list[Formula]:
    atoms: list[Formula] = []

    def collect(g: Formula):
        if isinstance(g, Apply):
            for a in g.args:
                collect(a)
        elif g not in atoms:
            atoms.append(g)

    collect(f)
    return atoms


def _eval_skeleton(f: Formula, values: dict[Formula, int], cbase: Base) -> int:
    if not isinstance(f, Apply):
        return values[f]
    table = cbase[f.func]
    return table.evaluate([_eval_skeleton(a, values, cbase) for a in f.args])


_DUAL_OP = {"X": "X", "F": "G", "G": "F", "U": "R", "R": "U"}


@dataclass(frozen=True)
class _PathFormula:
    """A path formula with propositional arguments (for flat targets)."""
    op: str
    args: tuple[Formula, ...]

    def dual(self) -> "_PathFormula":
        return _PathFormula(_DUAL_OP[self.op],
                            tuple(negate_syntactic(a) for a in self.args))


def _eval_prop(g: Formula, valuation: frozenset, cbase: Base) -> int:
    if isinstance(g, Prop):
        return 1 if g.name in valuation else 0
    table = cbase[g.func]
    return table.evaluate([_eval_prop(a, valuation, cbase) for a in g.args])


def _lasso_satisfies(seq: list[frozenset], pf: _PathFormula, cbase: Base) -> bool:
    """Truth of a path formula on seq[0] .. seq[-1] followed by a self-loop on
    the final valuation."""
    window = len(seq)

    def val(i, g):
        return _eval_prop(g, seq[min(i, window - 1)], cbase)

    if pf.op == "X":
        return bool(val(1, pf.args[0]))
    if pf.op == "F":
        return any(val(i, pf.args[0]) for i in range(window))
    if pf.op == "G":
        return all(val(i, pf.args[0]) for i in range(window))
    a, b = pf.args
    if pf.op == "U":
        for i in range(window):
            if val(i, b):
                return True
            if not val(i, a):
                return False
        return False
    for i in range(window):
        if not val(i, b):
            return False
        if val(i, a):
            return True
    return True


def sat_flat(f: Formula, base: Base = STD,
             budget: Optional[SatBudget] = None) -> SatResult:
    """Root-plus-disjoint-lollipop-branch search for temporal depth <= 1."""
    budget = budget or SatBudget()
    budget.start_clock()
    t0 = time.monotonic()
    if temporal_depth(f) > 1:
        raise EngineError("sat_flat requires temporal depth <= 1")
    cbase = base.closure_base()
    atoms = _skeleton_atoms(f)
    quant_atoms = [a for a in atoms if isinstance(a, Quant)]
    prop_names = sorted(propositions(f))
    if len(atoms) > 16:
        return SatResult("unknown", engine="flat", reason="skeleton too wide")

    assignments = []
    for bits in range(1 << len(atoms)):
        values = {a: (bits >> i) & 1 for i, a in enumerate(atoms)}
        if _eval_skeleton(f, values, cbase) != 1:
            continue
        e_count = sum(
            1 for a in quant_atoms
            if (values[a] and a.quantifier == "E")
            or (not values[a] and a.quantifier == "A"))
        assignments.append((e_count, bits, values))
    assignments.sort(key=lambda t: (t[0], t[1]))

    nodes = 0
    for _, _, values in assignments:
        e_list: list[_PathFormula] = []
        a_list: list[_PathFormula] = []
        for atom in quant_atoms:
            pf = _PathFormula(atom.op, atom.args)
            if values[atom]:
                (e_list if atom.quantifier == "E" else a_list).append(pf)
            else:
                (a_list if atom.quantifier == "E" else e_list).append(pf.dual())
        k = len(a_list)
        for root_val in _consistent_valuations(atoms, values, prop_names, cbase):
            nodes += 1
            branches = _find_branches(root_val, e_list, a_list, k, prop_names,
                                      cbase)
            if branches is None:
                continue
            model = _assemble_flat(root_val, branches, prop_names)
            if model_check(model, f, base):
                return _finish(SatResult("sat", witness=model, engine="flat",
                                         nodes=nodes), f, base, t0)
    return _finish(SatResult("unsat", engine="flat", nodes=nodes), f, base, t0)


def _consistent_valuations(atoms, values, prop_names, cbase):
    fixed = {a.name: values[a] for a in atoms if isinstance(a, Prop)}
    free = [p for p in prop_names if p not in fixed]
    for bits in range(1 << len(free)):
        val = {p: fixed[p] for p in fixed}
        for i, p in enumerate(free):
            val[p] = (bits >> i) & 1
        yield frozenset(p for p, b in val.items() if b)


def _find_branches(root_val: frozenset, e_list, a_list, k, prop_names, cbase):
    """One lollipop branch per E-formula (or a single default branch), each
    satisfying its E-formula and every A-formula, length <= k + 2 past the
    root."""
    targets = e_list if e_list else [None]
    branches = []
    for target in targets:
        pfs = list(a_list) + ([target] if target is not None else [])
        found = None
        max_len = k + 2

        def dfs(seq: list[frozenset], want_len: int):
            nonlocal found
            if found is not None:
                return
            if len(seq) - 1 == want_len:
                if all(_lasso_satisfies(seq, pf, cbase) for pf in pfs):
                    found = list(seq)
                return
            for bits in range(1 << len(prop_names)):
                nxt = frozenset(p for i, p in enumerate(prop_names)
                                if (bits >> i) & 1)
                seq.append(nxt)
                dfs(seq, want_len)
                seq.pop()
                if found is not None:
                    return

        # shortest branches first, so witnesses stay near-minimal
        for want_len in range(max_len + 1):
            dfs([root_val], want_len)
            if found is not None:
                break
        if found is None:
            return None
        branches.append(found)
    return branches


def _assemble_flat(root_val: frozenset, branches: list[list[frozenset]],
                   prop_names) -> RootedModel:
    labels: list[list[str]] = [sorted(root_val)]
    edges: list[tuple[int, int]] = []
    for seq in branches:
        if len(seq) == 1:
            edges.append((0, 0))
            continue
        prev = 0
        for val in seq[1:]:
            idx = len(labels)
            labels.append(sorted(val))
            edges.append((prev, idx))
            prev = idx
        edges.append((prev, prev))
    if not branches:
        edges.append((0, 0))
    return make_model(labels, sorted(set(edges)), 0)


# ---------------------------------------------------------------------------
# Bounded AX

def sat_ax_bounded(f: Formula, base: Base = STD,
                   budget: Optional[SatBudget] = None) -> SatResult:
    """Backtracking over tree-shaped candidates for the {AX} fragment."""
    budget = budget or SatBudget()
    budget.start_clock()
    t0 = time.monotonic()
    if not operators_of(f) <= {"AX"}:
        raise EngineError("sat_ax_bounded requires operators within {AX}")
    cbase = base.closure_base()
    prop_names = sorted(propositions(f))
    depth = temporal_depth(f)
    nodes = 0
    memo: dict[tuple, Optional[tuple]] = {}

    def self_loop_value(g: Formula, val: frozenset) -> int:
        if isinstance(g, Prop):
            return 1 if g.name in val else 0
        if isinstance(g, Apply):
            table = cbase[g.func]
            return table.evaluate([self_loop_value(a, val) for a in g.args])
        return self_loop_value(g.args[0], val)

    def solve(req: frozenset, d: int) -> Optional[tuple]:
        """Returns (labels, edges, root) for a tree fragment or None."""
        nonlocal nodes
        key = (req, d)
        if key in memo:
            return memo[key]
        nodes += 1
        if nodes > budget.node_cap:
            raise BudgetExceeded("ax search budget exhausted")
        # self-loop closure first: yields the smallest fragments
        for bits in range(1 << len(prop_names)):
            val = frozenset(p for i, p in enumerate(prop_names) if (bits >> i) & 1)
            if all(self_loop_value(g, val) for g in req):
                result = ([sorted(val)], [(0, 0)], 0)
                memo[key] = result
                return result
        if d <= 0:
            memo[key] = None
            return None
        atoms: list[Formula] = []
        for g in req:
            for a in _skeleton_atoms(g):
                if a not in atoms:
                    atoms.append(a)
        quant_atoms = [a for a in atoms if isinstance(a, Quant)]
        for bits in range(1 << len(atoms)):
            values = {a: (bits >> i) & 1 for i, a in enumerate(atoms)}
            if not all(_eval_skeleton(g, values, cbase) for g in req):
                continue
            a_next: list[Formula] = []
            e_next: list[Formula] = []
            for atom in quant_atoms:
                arg = atom.args[0]
                if atom.quantifier == "A":
                    if values[atom]:
                        a_next.append(arg)
                    else:
                        e_next.append(negate_syntactic(arg))
                else:
                    if values[atom]:
                        e_next.append(arg)
                    else:
                        a_next.append(negate_syntactic(arg))
            val = frozenset(a.name for a in atoms
                            if isinstance(a, Prop) and values[a])
            child_reqs = ([frozenset([e] + a_next) for e in e_next]
                          or ([frozenset(a_next)] if a_next else []))
            if not child_reqs:
                continue  # covered by the self-loop attempt
            fragments = []
            for child in child_reqs:
                sub = solve(child, d - 1)
                if sub is None:
                    break
                fragments.append(sub)
            else:
                labels = [sorted(val)]
                edges: list[tuple[int, int]] = []
                for sub_labels, sub_edges, sub_root in fragments:
                    offset = len(labels)
                    labels.extend(sub_labels)
                    edges.extend((u + offset, v + offset) for u, v in sub_edges)
                    edges.append((0, sub_root + offset))
                result = (labels, edges, 0)
                memo[key] = result
                return result
        memo[key] = None
        return None

    try:
        out = solve(frozenset([f]), depth)
    except BudgetExceeded as exc:
        return SatResult("unknown", engine="ax", nodes=nodes, reason=exc.reason)
    if out is None:
        return _finish(SatResult("unsat", engine="ax", nodes=nodes), f, base, t0)
    labels, edges, root = out
    model = make_model(labels, sorted(set(edges)), root)
    return _finish(SatResult("sat", witness=model, engine="ax", nodes=nodes),
                   f, base, t0)


# ---------------------------------------------------------------------------
# The balloon procedure for {AF, AX}

@dataclass
class _PathPlan:
    """An accepted balloon path: world labels, the cycle-start index, and the
    sub-balloon plans spawned per step."""
    labels: list[frozenset]
    cycle_start: int
    subs: list[list["_PathPlan"]]


class _BalloonSearch:
    def __init__(self, f: Formula, base: Base, budget: SatBudget):
        self.base = base
        self.budget = budget
        self.sat = Saturator(base, budget)
        self.cl = closure(f)
        self.cap = budget.balloon_path_cap or min(2 ** len(self.cl), 4096)
        self.level0 = len(self.cl)
        self.memo_success: dict[tuple, tuple[int, _PathPlan]] = {}
        self.memo_fail: dict[tuple, int] = {}
        self._arg_cl_cache: dict[Quant, frozenset] = {}
        self.cap_hit = False
        self.steps = 0

    def run(self, f: Formula) -> Optional[_PathPlan]:
        return self.search(frozenset(), frozenset(), frozenset([f]), self.level0)

    def search(self, G: frozenset, f_root: frozenset, x_root: frozenset,
               level: int) -> Optional[_PathPlan]:
        key = (G, f_root, x_root)
        hit = self.memo_success.get(key)
        if hit is not None and level >= hit[0]:
            return hit[1]
        failed_at = self.memo_fail.get(key)
        if failed_at is not None and level <= failed_at:
            return None
        if level <= 0:
            return None
        plan = self._step(0, x_root, f_root, G, None, None, None, [], [],
                          frozenset(), level)
        if plan is not None:
            prev = self.memo_success.get(key)
            if prev is None or level < prev[0]:
                self.memo_success[key] = (level, plan)
        else:
            prev = self.memo_fail.get(key)
            if prev is None or level > prev:
                self.memo_fail[key] = level
        return plan

    def _discharged(self, L: frozenset, e: Quant) -> bool:
        return three_valued(L, _discharge(e), self.sat.cbase) is True

    def _q7_ok(self, L: frozenset, F: frozenset) -> bool:
        """Q7: pending eventualities propagate or discharge, and a pending
        AF labels no temporal member of its argument's closure."""
        for e in F:
            if e not in L and not self._discharged(L, e):
                return False
        for g in L:
            if _is_quant(g, "A", "F") and not self._discharged(L, g):
                for member in self._arg_closure(g):
                    if member in L:
                        return False
        return True

    def _arg_closure(self, e: Quant) -> frozenset:
        if e not in self._arg_cl_cache:
            self._arg_cl_cache[e] = frozenset(
                m for m in closure(e.args[0]) if temporal_depth(m) > 0)
        return self._arg_cl_cache[e]

    def _candidates(self, X: frozenset, G: frozenset, F: frozenset,
                    l_star: Optional[frozenset]):
        seen = []
        if (l_star is not None and X <= l_star and G <= l_star
                and self._q7_ok(l_star, F)):
            seen.append(l_star)
        pending = sorted(F, key=seq_key)
        for bits in range(1 << len(pending)):
            # per pending eventuality: fulfill now, or keep it labeled
            extra = [_discharge(e) if (bits >> i) & 1 else e
                     for i, e in enumerate(pending)]
            for cand in self.sat.saturate(X | G | frozenset(extra)):
                if cand not in seen and self._q7_ok(cand, F):
                    seen.append(cand)
        return seen

    def _step(self, i, X, F, G, t, l_star, f_star, labels, subs, visited,
              level) -> Optional[_PathPlan]:
        self.budget.check_clock()
        self.steps += 1
        if self.steps > self.budget.node_cap:
            raise BudgetExceeded("balloon search budget exhausted")
        if i >= self.cap:
            self.cap_hit = True
            return None
        for L in self._candidates(X, G, F, l_star):
            if not (X <= L and G <= L):
                continue
            f2 = F | frozenset(g for g in L if _is_quant(g, "A", "F"))
            f2 = frozenset(e for e in f2 if not self._discharged(L, e))
            if f_star is not None:
                fs2 = frozenset(e for e in f_star if not self._discharged(L, e))
            else:
                fs2 = None
            if (l_star is not None and L == l_star and not fs2 and i > t):
                return _PathPlan(list(labels), t, list(subs))
            for mark in ((False, True) if l_star is None else (False,)):
                t2 = i if mark else t
                ls2 = L if mark else l_star
                fs3 = f2 if mark else fs2
                state = (L, f2, ls2, fs3)
                if state in visited:
                    continue
                x_next = frozenset(g.args[0] for g in L if _is_quant(g, "A", "X"))
                step_subs = []
                ok = True
                for g in sorted(L, key=seq_key):
                    if _is_quant(g, "E", "G"):
                        sub = self.search(frozenset([g.args[0]]), f2, x_next,
                                          level - 1)
                    elif _is_quant(g, "E", "X"):
                        sub = self.search(frozenset(), f2,
                                          x_next | frozenset([g.args[0]]),
                                          level - 1)
                    else:
                        continue
                    if sub is None:
                        ok = False
                        break
                    step_subs.append(sub)
                if not ok:
                    continue
                plan = self._step(i + 1, x_next, f2, G, t2, ls2, fs3,
                                  labels + [L], subs + [step_subs],
                                  visited | {state}, level)
                if plan is not None:
                    return plan
        return None


def _plan_to_model(plan: _PathPlan, prop_names: list[str]) -> RootedModel:
    labels: list[list[str]] = []
    edges: list[tuple[int, int]] = []

    def emit(p: _PathPlan) -> int:
        start = len(labels)
        for j, members in enumerate(p.labels):
            labels.append(sorted(g.name for g in members if isinstance(g, Prop)))
        for j in range(len(p.labels) - 1):
            edges.append((start + j, start + j + 1))
        edges.append((start + len(p.labels) - 1, start + p.cycle_start))
        for j, sub_plans in enumerate(p.subs):
            for sub in sub_plans:
                sub_start = emit(sub)
                edges.append((start + j, sub_start))
        return start

    emit(plan)
    return make_model(labels, sorted(set(edges)), 0)


def sat_balloon(f: Formula, base: Base = STD,
                budget: Optional[SatBudget] = None) -> SatResult:
    """Deterministic realization of the balloon-path search for B(C, {AF, AX})."""
    budget = budget or SatBudget()
    budget.start_clock()
    t0 = time.monotonic()
    if not operators_of(f) <= {"AF", "AX"}:
        raise EngineError("sat_balloon requires operators within {AF, AX}")
    g = normalize_occurrences(f)
    search = _BalloonSearch(g, base, budget)
    quant_members = sum(1 for m in search.cl if isinstance(m, Quant))
    if quant_members > budget.closure_quant_cap:
        return SatResult("unknown", engine="balloon",
                         reason=f"closure has {quant_members} quantified members")
    try:
        plan = search.run(g)
    except BudgetExceeded as exc:
        return SatResult("unknown", engine="balloon", nodes=search.steps,
                         reason=exc.reason)
    if plan is None:
        if search.cap_hit:
            return SatResult("unknown", engine="balloon", nodes=search.steps,
                             reason="cycle-length cap exhausted")
        return _finish(SatResult("unsat", engine="balloon", nodes=search.steps),
                       f, base, t0)
    model = _plan_to_model(plan, sorted(propositions(f)))
    return _finish(SatResult("sat", witness=model, engine="balloon",
                             nodes=search.steps), f, base, t0)


# ---------------------------------------------------------------------------
# Brute force over canonically enumerated structures

def sat_bruteforce(f: Formula, max_worlds: int, base: Base = STD,
                   budget: Optional[SatBudget] = None) -> SatResult:
    """Enumerates serial rooted structures up to max_worlds over f's
    propositions; unsat results carry exhaustive=False unless the bound
    provably suffices (the Hintikka state count)."""
    budget = budget or SatBudget()
    budget.start_clock()
    t0 = time.monotonic()
    if max_worlds < 1:
        raise EngineError("max_worlds must be >= 1")
    props = sorted(propositions(f))
    order = _measure._formula_order(f)
    checked = 0
    for k in range(1, max_worlds + 1):
        if _measure.estimate_raw_space(len(props), k) > budget.brute_space_ceiling:
            raise EngineError(
                f"raw state space at {k} worlds exceeds the configured budget")
        for frame in _measure.enumerate_frames(props, k):
            checked += 1
            budget.check_clock()
            if _measure.check_frame(frame, order, f, base):
                model = _measure.frame_to_model(frame, props)
                return _finish(SatResult("sat", witness=model, engine="brute",
                                         nodes=checked, exhaustive=True),
                               f, base, t0)
    pairs = len(closure(f)) // 2
    sufficient = max_worlds >= 2 ** pairs
    return SatResult("unsat", engine="brute", nodes=checked,
                     exhaustive=sufficient,
                     millis=int((time.monotonic() - t0) * 1000))


# ---------------------------------------------------------------------------
# Merge partition (existential flat CTL upper bound machinery)

@dataclass
class MergeResult:
    blocks: tuple[tuple[Formula, ...], ...]
    m: int
    total_occurrences: int
    bound_ok: bool


def _prop_satisfiable(fs: Iterable[Formula], base: Base) -> bool:
    fs = list(fs)
    names = sorted(set().union(*[propositions(g) for g in fs]))
    if len(names) > 20:
        raise EngineError("too many propositions for truth-table search")
    cbase = base.closure_base()
    for bits in range(1 << len(names)):
        val = frozenset(p for i, p in enumerate(names) if (bits >> i) & 1)
        if all(_eval_prop(g, val, cbase) for g in fs):
            return True
    return False


def merge_partition(formulas: list[Formula], base: Base = STD) -> MergeResult:
    """Greedy coarsening into blocks with satisfiable conjunctions such that
    no two blocks can be merged."""
    from .formula import prop_occurrences
    for g in formulas:
        if temporal_depth(g) != 0:
            raise EngineError("merge_partition expects propositional formulas")
        if not _prop_satisfiable([g], base):
            raise EngineError("an input formula is unsatisfiable")
    blocks: list[list[Formula]] = [[g] for g in formulas]
    merged = True
    while merged:
        merged = False
        for i in range(len(blocks)):
            for j in range(i + 1, len(blocks)):
                if _prop_satisfiable(blocks[i] + blocks[j], base):
                    blocks[i] = blocks[i] + blocks[j]
                    del blocks[j]
                    merged = True
                    break
            if merged:
                break
    m = len(blocks)
    total = sum(prop_occurrences(g) for g in formulas)
    log_m = max(0, (m - 1).bit_length()) if m else 0
    return MergeResult(tuple(tuple(b) for b in blocks), m, total,
                       m * log_m <= total)


# ---------------------------------------------------------------------------
# Constructive shrinking: flat branches

def _branches_of(m: RootedModel) -> list[list[int]]:
    """Decompose a root-plus-branches model into chains; a root self-loop
    counts as a degenerate branch.  Raises if the model is not in that shape."""
    s = m.structure
    root = m.root
    branches = []
    for first in sorted(s.successors(root)):
        if first == root:
            branches.append([])
            continue
        chain = [first]
        seen = {root, first}
        while True:
            succs = s.successors(chain[-1])
            if len(succs) != 1:
                raise EngineError("not in root-plus-branches form (branching world)")
            nxt = succs[0]
            if nxt == chain[-1]:
                break
            if nxt in seen:
                raise EngineError("not in root-plus-branches form (cycle)")
            seen.add(nxt)
            chain.append(nxt)
        branches.append(chain)
    return branches


def _path_first_index(seq: list[frozenset], g: Formula, cbase: Base) -> Optional[int]:
    for i, val in enumerate(seq):
        if _eval_prop(g, val, cbase):
            return i
    return None


def shrink_flat_model(m: RootedModel, f: Formula, base: Base = STD) -> RootedModel:
    """Keep only the marked worlds of each branch: the first two, the first
    fulfillment point of each universal U/R/F conjunct, and the witness point
    of the branch's existential formula."""
    if temporal_depth(f) > 1:
        raise EngineError("shrink_flat_model expects a flat formula")
    if not model_check(m, f, base):
        raise EngineError("model does not satisfy the formula")
    cbase = base.closure_base()
    s = m.structure
    props = sorted(s.valuation)

    def val_of(w: int) -> frozenset:
        return frozenset(p for p in props if s.prop_mask(p) >> w & 1)

    atoms = _skeleton_atoms(f)
    quant_atoms = [a for a in atoms if isinstance(a, Quant)]
    sets = truth_sets(m, f, base)
    e_list: list[_PathFormula] = []
    a_list: list[_PathFormula] = []
    for atom in quant_atoms:
        pf = _PathFormula(atom.op, atom.args)
        if sets[atom] & (1 << m.root):
            (e_list if atom.quantifier == "E" else a_list).append(pf)
        else:
            (a_list if atom.quantifier == "E" else e_list).append(pf.dual())
    k = len(a_list)

    branches = _branches_of(m)
    branch_vals = [[val_of(m.root)] + [val_of(w) for w in chain]
                   for chain in branches]
    hosts: dict[int, list[_PathFormula]] = {i: [] for i in range(len(branches))}
    for pf in e_list:
        for i, seq in enumerate(branch_vals):
            if _lasso_satisfies(seq, pf, cbase):
                hosts[i].append(pf)
                break
        else:
            raise EngineError("an existential conjunct has no witnessing branch")

    kept_branches = []
    for i, chain in enumerate(branches):
        if not hosts[i] and e_list:
            continue  # branch hosts nothing; other branches cover the Es
        seq = branch_vals[i]
        marks = {0}
        if len(seq) > 1:
            marks.add(1)
        for pf in a_list + hosts[i]:
            if pf.op in ("F", "U"):
                target = pf.args[-1]
                j = _path_first_index(seq, target, cbase)
                if j is not None:
                    marks.add(min(j, len(seq) - 1))
            elif pf.op == "R":
                releaser = pf.args[0]
                j = _path_first_index(seq, releaser, cbase)
                if j is not None:
                    marks.add(min(j, len(seq) - 1))
            elif pf.op == "X":
                if len(seq) > 1:
                    marks.add(1)
        positions = sorted(x for x in marks if x > 0)
        assert len(positions) <= k + 2, "marking exceeded the k+2 bound"
        kept_branches.append([seq[j] for j in positions])

    labels: list[list[str]] = [sorted(val_of(m.root))]
    edges: list[tuple[int, int]] = []
    for seq in kept_branches:
        prev = 0
        for val in seq:
            idx = len(labels)
            labels.append(sorted(val))
            edges.append((prev, idx))
            prev = idx
        edges.append((prev, prev))
    if not kept_branches:
        edges.append((0, 0))
    out = make_model(labels, sorted(set(edges)), 0)
    if not model_check(out, f, base):
        raise EngineError("internal error: shrinking broke the formula")
    return out


# ---------------------------------------------------------------------------
# Constructive furling: AG fragment

def furl_ag_model(m: RootedModel, f: Formula, base: Base = STD) -> RootedModel:
    """Greedy re-wiring toward AG-maximal EF-witnesses followed by furling of
    justification-repeating paths.

    Justification edges are created only for EF-formulas the truth of f (or
    of a globally required AG-argument) actually needs, so for formulas whose
    AG/EF subformulas occur positively the output extent is bounded by the
    number of EF-subformulas; in general it is bounded by the EF-members of
    the closure.
    """
    if not operators_of(f) <= {"AG"}:
        raise EngineError("furl_ag_model requires operators within {AG}")
    if not model_check(m, f, base):
        raise EngineError("model does not satisfy the formula")
    cl = closure(f)
    s = m.structure
    full = (1 << s.n) - 1
    from .kripke import _height, _truth_set, reachable_mask
    cbase = base.closure_base()
    label: dict[Formula, int] = {}
    for g in sorted(cl, key=lambda g: (_height(g), sort_key(g))):
        label[g] = _truth_set(g, s, label, base, full)
    reach = [reachable_mask(s, w) for w in range(s.n)]
    ag_members = sorted((g for g in cl if _is_quant(g, "A", "G")), key=sort_key)

    def true_at(w: int, g: Formula) -> bool:
        return bool(label[g] >> w & 1)

    def gset(w: int) -> frozenset:
        return frozenset(g for g in ag_members if true_at(w, g))

    implicant_cache: dict[tuple[str, int], list] = {}

    def implicants_for(func: str, want: int):
        key = (func, want)
        if key not in implicant_cache:
            implicant_cache[key] = _implicants(cbase[func], want)
        return implicant_cache[key]

    def require_apply(w: int, g: Apply, want: int, out: set):
        """Recurse into a minimal implicant consistent with the world's
        actual truths, so false disjuncts impose no requirements."""
        for implicant in implicants_for(g.func, want):
            if all(bit is None or bit == true_at(w, arg)
                   for arg, bit in zip(g.args, implicant)):
                for arg, bit in zip(g.args, implicant):
                    if bit == 1:
                        collect_pending(w, arg, out)
                    elif bit == 0:
                        collect_pending(w, negate_syntactic(arg), out)
                return
        raise EngineError("internal error: no implicant matches the truths")

    def collect_pending(w: int, g: Formula, out: set):
        """EF-members required pending for g (true at w) to stay true."""
        assert true_at(w, g)
        if isinstance(g, Prop):
            return
        if isinstance(g, Apply):
            if g.func == "not":
                inner = g.args[0]
                if isinstance(inner, Prop):
                    return
                if isinstance(inner, Quant):
                    collect_pending(w, dual_quant(inner), out)
                    return
                if inner.func == "not":
                    collect_pending(w, inner.args[0], out)
                    return
                require_apply(w, inner, 0, out)
                return
            require_apply(w, g, 1, out)
            return
        if g.op == "G":
            return  # handled via the G-set machinery
        # EF xi: fulfilled locally or pending
        xi = g.args[0]
        if true_at(w, xi):
            collect_pending(w, xi, out)
        else:
            out.add(g)

    def pending_of(w: int, required: list[Formula]) -> list[Quant]:
        out: set = set()
        for g in required:
            collect_pending(w, g, out)
        for ag in gset(w):
            collect_pending(w, ag.args[0], out)
        return sorted(out, key=seq_key)

    def witness_for(w: int, e: Quant) -> int:
        cands = [u for u in range(s.n)
                 if true_at(u, e.args[0]) and (reach[w] >> u & 1)]
        if not cands:
            raise EngineError("internal error: no EF witness candidate")
        best_g = max(len(gset(u)) for u in cands)
        return min(u for u in cands if len(gset(u)) == best_g)

    props = sorted(s.valuation)
    labels: list[list[str]] = []
    edges: list[tuple[int, int]] = []

    def emit(w: int) -> int:
        idx = len(labels)
        labels.append([p for p in props if s.prop_mask(p) >> w & 1])
        return idx

    root_idx = emit(m.root)

    def build(w: int, idx: int, required: list[Formula], ancestors):
        pend = pending_of(w, required)
        if not pend:
            edges.append((idx, idx))
            return
        for e in pend:
            back = next((a_idx for a_idx, j in ancestors if j == e), None)
            if back is not None:
                edges.append((idx, back))
                continue
            u = witness_for(w, e)
            child = emit(u)
            edges.append((idx, child))
            build(u, child, [e.args[0]], ancestors + [(child, e)])

    build(m.root, root_idx, [f], [])
    out = make_model(labels, sorted(set(edges)), root_idx)
    if not model_check(out, f, base):
        raise EngineError("internal error: furling broke the formula")
    return out


# ---------------------------------------------------------------------------
# Dispatch

def dispatch(f: Formula, base: Base = STD,
             budget: Optional[SatBudget] = None) -> SatResult:
    """Route to the most specific engine for the formula's fragment."""
    ops = operators_of(f)
    if temporal_depth(f) <= 1:
        return sat_flat(f, base, budget)
    if ops <= {"AX"}:
        return sat_ax_bounded(f, base, budget)
    if ops <= {"AF", "AX"}:
        return sat_balloon(f, base, budget)
    return sat_general(f, base, budget)
