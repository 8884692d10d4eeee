"""Brute-force minimal-model size and extent computation.

Models are enumerated canonically: worlds are numbered in first-seen order
scanning successor sets of worlds 0, 1, ... ascending, which yields every
isomorphism class of serial, root-generated structures at least once while
pruning the raw space hard.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional

from .formula import Base, Formula, STD, propositions, sort_key, subformulas
from .kripke import (
    BudgetError, KripkeStructure, RootedModel, _height, _truth_set, extent,
    make_model,
)


@dataclass
class MeasureResult:
    minimum: Optional[int]
    bound: int
    witness: Optional[RootedModel]
    exhaustive: bool
    structures_checked: int = 0


class _Frame:
    """Duck-typed stand-in for KripkeStructure during enumeration."""

    __slots__ = ("n", "succ", "valuation")

    def __init__(self, n, succ, valuation):
        self.n = n
        self.succ = succ
        self.valuation = valuation

    def prop_mask(self, name):
        return self.valuation.get(name, 0)


def successor_sequences(k: int) -> Iterator[tuple[int, ...]]:
    """All canonical successor-set sequences for k worlds: every world has a
    nonempty successor set, and world j is first referenced before world j+1
    and by some world < j."""

    def rec(i: int, next_new: int, chosen: list[int]):
        if i == k:
            if next_new == k:
                yield tuple(chosen)
            return
        for m in range(0, k - next_new + 1):
            new_mask = ((1 << m) - 1) << next_new
            nn = next_new + m
            if i + 1 < k and nn < i + 2:
                continue
            for old_mask in range(1 << next_new):
                mask = new_mask | old_mask
                if not mask:
                    continue
                yield from rec(i + 1, nn, chosen + [mask])

    yield from rec(0, 1, [])


def count_sequences(k: int) -> int:
    return sum(1 for _ in successor_sequences(k))


def enumerate_frames(props: list[str], k: int) -> Iterator[_Frame]:
    """Canonical serial root-generated structures over the given propositions."""
    p = len(props)
    for succ in successor_sequences(k):
        for labels in itertools.product(range(1 << p), repeat=k):
            valuation = {}
            for pi, name in enumerate(props):
                mask = 0
                for w in range(k):
                    if labels[w] >> pi & 1:
                        mask |= 1 << w
                valuation[name] = mask
            yield _Frame(k, succ, valuation)


def frame_to_model(frame: _Frame, props: list[str]) -> RootedModel:
    labels = [[p for p in props if frame.prop_mask(p) >> w & 1]
              for w in range(frame.n)]
    edges = [(w, u) for w in range(frame.n)
             for u in range(frame.n) if frame.succ[w] >> u & 1]
    return make_model(labels, edges, 0)


def check_frame(frame: _Frame, order: list[Formula], f: Formula, base: Base) -> bool:
    sets: dict[Formula, int] = {}
    full = (1 << frame.n) - 1
    for g in order:
        sets[g] = _truth_set(g, frame, sets, base, full)
    return bool(sets[f] & 1)


def _formula_order(f: Formula) -> list[Formula]:
    return sorted(subformulas(f), key=lambda g: (_height(g), sort_key(g)))


def estimate_raw_space(num_props: int, k: int) -> int:
    return (2 ** num_props) ** k * 2 ** (k * k)


DEFAULT_SPACE_CEILING = 10 ** 9


def _props_for(f: Formula, prop_cap: int) -> list[str]:
    props = sorted(propositions(f))
    if len(props) > prop_cap:
        raise BudgetError(
            f"{len(props)} propositions exceed the enumeration cap {prop_cap}")
    return props


def min_model_size(f: Formula, cap: int, base: Base = STD,
                   space_ceiling: int = DEFAULT_SPACE_CEILING,
                   prop_cap: int = 4) -> MeasureResult:
    """Smallest world count <= cap admitting a serial rooted model of f."""
    if cap < 1:
        raise BudgetError("cap must be >= 1")
    props = _props_for(f, prop_cap)
    order = _formula_order(f)
    checked = 0
    for k in range(1, cap + 1):
        if estimate_raw_space(len(props), k) > space_ceiling:
            raise BudgetError(
                f"raw search space at {k} worlds exceeds ceiling {space_ceiling}")
        for frame in enumerate_frames(props, k):
            checked += 1
            if check_frame(frame, order, f, base):
                return MeasureResult(k, cap, frame_to_model(frame, props), True, checked)
    return MeasureResult(None, cap, None, False, checked)


def min_model_extent(f: Formula, cap_worlds: int, base: Base = STD,
                     space_ceiling: int = DEFAULT_SPACE_CEILING,
                     prop_cap: int = 4,
                     stop_at: Optional[int] = None) -> MeasureResult:
    """Minimum extent over all models with <= cap_worlds worlds.

    Enumerates by increasing size; within the searched range the reported
    minimum is exact, and it is an upper bound on the unrestricted minimum.
    When stop_at is given the search returns as soon as a model with extent
    <= stop_at is found (the result is then only an upper bound).
    """
    if cap_worlds < 1:
        raise BudgetError("cap must be >= 1")
    props = _props_for(f, prop_cap)
    order = _formula_order(f)
    floor = 0 if stop_at is None else stop_at
    best: Optional[int] = None
    witness: Optional[RootedModel] = None
    checked = 0
    for k in range(1, cap_worlds + 1):
        if estimate_raw_space(len(props), k) > space_ceiling:
            raise BudgetError(
                f"raw search space at {k} worlds exceeds ceiling {space_ceiling}")
        for frame in enumerate_frames(props, k):
            checked += 1
            if check_frame(frame, order, f, base):
                model = frame_to_model(frame, props)
                e = extent(model)
                if best is None or e < best:
                    best, witness = e, model
                    if best <= floor:
                        break
        if best is not None and best <= floor:
            break
    if best is None:
        return MeasureResult(None, cap_worlds, None, False, checked)
    return MeasureResult(best, cap_worlds, witness, stop_at is None, checked)
