"""Untyped reduction engines: call-by-name weak head reduction,
fuel-bounded beta-eta normalization, beta-eta equality, and a
step-counting evaluator.

All engines work on locally nameless pure terms and unfold global
definition references lazily when they reach head position.  Fuel
bounds the number of beta contractions; exhaustion raises
`FuelExhausted` carrying the partially reduced term, so callers can
distinguish "ran out" from "unequal".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .erasure import (PApp, PLam, PRef, PVar, PureTerm, alpha_eq_pure, close,
                      free_vars, fresh_ref, open_at)

DEFAULT_FUEL = 1_000_000

DefEnv = Mapping[str, PureTerm]


class FuelExhausted(Exception):
    """Reduction ran out of fuel; `partial` holds the term so far."""

    def __init__(self, partial: Optional[PureTerm] = None):
        super().__init__("reduction fuel exhausted")
        self.partial = partial


@dataclass
class Fuel:
    remaining: int = DEFAULT_FUEL
    steps: int = 0

    def tick(self, at: Optional[PureTerm] = None):
        if self.remaining <= 0:
            raise FuelExhausted(at)
        self.remaining -= 1
        self.steps += 1


@dataclass(frozen=True)
class EvalTrace:
    steps: int
    result: PureTerm
    strategy: str  # 'cbn-whnf' | 'cbn-full' | 'cbv'


def whnf_cbn(t: PureTerm, defs: Optional[DefEnv] = None,
             fuel: Optional[Fuel] = None) -> PureTerm:
    """Reduce to weak head normal form under call-by-name.

    Definition references are unfolded (at no step cost) whenever they
    reach head position, including with an empty argument spine."""
    if fuel is None:
        fuel = Fuel()
    spine = []
    while True:
        match t:
            case PApp(f, a):
                spine.append(a)
                t = f
            case PLam(b, _) if spine:
                fuel.tick(t)
                t = open_at(b, spine.pop())
            case PRef(n) if defs is not None and n in defs:
                t = defs[n]
            case _:
                break
    while spine:
        t = PApp(t, spine.pop())
    return t


def _nf(t: PureTerm, defs: Optional[DefEnv], fuel: Fuel) -> PureTerm:
    t = whnf_cbn(t, defs, fuel)
    match t:
        case PLam(b, hint):
            ref = fresh_ref(hint)
            nb = _nf(open_at(b, ref), defs, fuel)
            # eta: λx. f x → f when x is not free in f
            if isinstance(nb, PApp) and nb.arg == ref \
                    and ref.name not in free_vars(nb.fn):
                return nb.fn
            return PLam(close(nb, ref.name), hint)
        case PApp(_, _):
            # stuck application: head is a variable or opaque reference
            spine = []
            while isinstance(t, PApp):
                spine.append(t.arg)
                t = t.fn
            for a in reversed(spine):
                t = PApp(t, _nf(a, defs, fuel))
            return t
        case _:
            return t


def normalize_beta_eta(t: PureTerm, defs: Optional[DefEnv] = None,
                       fuel: Optional[Fuel] = None) -> PureTerm:
    """Full normal-order beta normalization with maximal eta contraction."""
    if fuel is None:
        fuel = Fuel()
    return _nf(t, defs, fuel)


def beta_eta_equal(t1: PureTerm, t2: PureTerm, defs: Optional[DefEnv] = None,
                   fuel: Optional[Fuel] = None) -> bool:
    """Beta-eta equivalence via normalize-and-compare.

    Alpha-equal inputs short-circuit without reduction.  Fuel
    exhaustion raises rather than answering `False`."""
    if alpha_eq_pure(t1, t2):
        return True
    if fuel is None:
        fuel = Fuel()
    return alpha_eq_pure(_nf(t1, defs, fuel), _nf(t2, defs, fuel))


def _cbv(t: PureTerm, defs: Optional[DefEnv], fuel: Fuel) -> PureTerm:
    match t:
        case PApp(f, a):
            vf = _cbv(f, defs, fuel)
            va = _cbv(a, defs, fuel)
            if isinstance(vf, PLam):
                fuel.tick(t)
                return _cbv(open_at(vf.body, va), defs, fuel)
            return PApp(vf, va)
        case PRef(n) if defs is not None and n in defs:
            return _cbv(defs[n], defs, fuel)
        case _:
            return t


STRATEGIES = ("cbn-whnf", "cbn-full", "cbv")


def eval_count_steps(t: PureTerm, defs: Optional[DefEnv] = None,
                     strategy: str = "cbn-whnf",
                     fuel: Optional[Fuel] = None) -> EvalTrace:
    """Evaluate under the given strategy, counting beta contractions."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if fuel is None:
        fuel = Fuel()
    start = fuel.steps
    if strategy == "cbn-whnf":
        r = whnf_cbn(t, defs, fuel)
    elif strategy == "cbn-full":
        r = _nf(t, defs, fuel)
    else:
        r = _cbv(t, defs, fuel)
    return EvalTrace(steps=fuel.steps - start, result=r, strategy=strategy)
