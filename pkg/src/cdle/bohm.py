"""Bounded Böhm-tree comparison.

Decides separability (hence beta-eta inequivalence) of closed pure
terms by expanding both head-normal-form trees to a given depth and
looking for a node where the head variable or the eta-adjusted arity
differs.  A negative answer is *not* a proof of equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .erasure import PApp, PLam, PRef, PureTerm, open_at
from .reduction import Fuel, FuelExhausted, whnf_cbn

DEFAULT_DEPTH = 8
DEFAULT_NODE_FUEL = 10_000


@dataclass(frozen=True)
class BohmResult:
    separable: bool
    depth: int = 0        # depth of the first separating node
    exhausted: bool = False  # some node hit the per-node fuel bound

    def __bool__(self) -> bool:
        return self.separable


def _level_ref(lvl: int) -> PRef:
    return PRef(f"!bohm{lvl}")


def _hnf_node(t: PureTerm, defs, node_fuel: int, lvl: int):
    """Head-normalize one tree node.

    Returns (binder_count, head_name, args) with binders opened as
    shared level references, or None when fuel ran out (divergent or
    too expensive; such nodes compare as unknown)."""
    fuel = Fuel(node_fuel)
    binders = 0
    try:
        t = whnf_cbn(t, defs, fuel)
        while isinstance(t, PLam):
            t = open_at(t.body, _level_ref(lvl + binders))
            binders += 1
            t = whnf_cbn(t, defs, fuel)
    except FuelExhausted:
        return None
    args = []
    while isinstance(t, PApp):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    assert isinstance(t, PRef), f"open head in Böhm node: {t!r}"
    return binders, t.name, args


def bohm_separable(t1: PureTerm, t2: PureTerm, depth: int = DEFAULT_DEPTH,
                   fuel: int = DEFAULT_NODE_FUEL, defs=None) -> BohmResult:
    """Are `t1` and `t2` separably different within the given depth?

    Both terms must be closed (global references that `defs` can
    unfold are fine).  `fuel` bounds the work per tree node."""
    return _compare(t1, t2, depth, fuel, defs, lvl=0, at=0)


def _compare(t1, t2, depth, node_fuel, defs, lvl, at) -> BohmResult:
    n1 = _hnf_node(t1, defs, node_fuel, lvl)
    n2 = _hnf_node(t2, defs, node_fuel, lvl)
    if n1 is None or n2 is None:
        return BohmResult(False, at, exhausted=True)
    k1, h1, a1 = n1
    k2, h2, a2 = n2
    # eta-align: pad the shallower binder prefix with applied binders
    k = max(k1, k2)
    a1 = a1 + [_level_ref(lvl + i) for i in range(k1, k)]
    a2 = a2 + [_level_ref(lvl + i) for i in range(k2, k)]
    if h1 != h2:
        return BohmResult(True, at)
    if len(a1) != len(a2):
        return BohmResult(True, at)
    if depth == 0:
        return BohmResult(False, at)
    exhausted = False
    for c1, c2 in zip(a1, a2):
        r = _compare(c1, c2, depth - 1, node_fuel, defs, lvl + k, at + 1)
        if r.separable:
            return r
        exhausted = exhausted or r.exhausted
    return BohmResult(False, at, exhausted=exhausted)
