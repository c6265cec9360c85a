"""Classifier convertibility.

Kinds convert by pure congruence.  Types are first reduced to weak
head normal form under call-by-name (unfolding transparent definition
references and contracting type-level beta redexes), then compared
structurally; term subexpressions and equality-type sides are compared
by beta-eta equivalence of their erasures.

Bound variables on the two sides are matched through shared levels
rather than substitution; when term subexpressions are compared, those
levels are injected as canonical free names.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import syntax as S
from .erasure import erase, rename_refs
from .reduction import Fuel, beta_eta_equal


@dataclass
class GlobalEnv:
    """Transparent global definitions, as conversion sees them."""
    type_bodies: dict = field(default_factory=dict)   # sym -> Type
    erased_terms: dict = field(default_factory=dict)  # sym -> PureTerm


def type_whnf(ty: S.Type, glob: GlobalEnv, fuel: Optional[Fuel] = None) -> S.Type:
    """Head-reduce a type constructor: unfold definition references and
    contract `(λ x: T. B) t` and `(λ X: κ. B) ·S` in head position."""
    if fuel is None:
        fuel = Fuel()
    while True:
        if isinstance(ty, S.TGlob):
            body = glob.type_bodies.get(ty.sym)
            if body is None:
                return ty
            ty = body
            continue
        if isinstance(ty, S.TyAppTm):
            fw = type_whnf(ty.fn, glob, fuel)
            if isinstance(fw, S.TyLamTm):
                fuel.tick()
                ty = S.subst(fw.body, fw.var, ty.arg)
                continue
            return ty if fw is ty.fn else S.TyAppTm(fw, ty.arg, span=ty.span)
        if isinstance(ty, S.TyAppTy):
            fw = type_whnf(ty.fn, glob, fuel)
            if isinstance(fw, S.TyLamTy):
                fuel.tick()
                ty = S.subst(fw.body, fw.var, ty.arg)
                continue
            return ty if fw is ty.fn else S.TyAppTy(fw, ty.arg, span=ty.span)
        return ty


def convert_classifiers(c1: S.Classifier, c2: S.Classifier, glob: GlobalEnv,
                        fuel: Optional[Fuel] = None) -> bool:
    """Decide `c1 ≅ c2`.  Both arguments must be of the same sort."""
    if S.is_kind(c1) != S.is_kind(c2):
        return False
    if fuel is None:
        fuel = Fuel()
    return _conv(c1, c2, glob, fuel, {}, {}, 0)


def _lvl_name(lvl: int) -> str:
    return f"!conv{lvl}"


def _conv(c1, c2, glob, fuel, env1, env2, lvl) -> bool:
    if S.is_kind(c1):
        return _conv_kind(c1, c2, glob, fuel, env1, env2, lvl)
    w1 = type_whnf(c1, glob, fuel)
    w2 = type_whnf(c2, glob, fuel)
    return _conv_type(w1, w2, glob, fuel, env1, env2, lvl)


def _conv_kind(k1, k2, glob, fuel, env1, env2, lvl) -> bool:
    if type(k1) is not type(k2):
        return False
    match k1:
        case S.Star():
            return True
        case S.KPiTm(x, dom, cod):
            if not _conv(dom, k2.dom, glob, fuel, env1, env2, lvl):
                return False
            e1, e2 = _extend(env1, x, env2, k2.var, lvl)
            return _conv(cod, k2.cod, glob, fuel, e1, e2, lvl + 1)
        case S.KPiTy(x, dom, cod):
            if not _conv(dom, k2.dom, glob, fuel, env1, env2, lvl):
                return False
            e1, e2 = _extend(env1, x, env2, k2.var, lvl)
            return _conv(cod, k2.cod, glob, fuel, e1, e2, lvl + 1)
    raise AssertionError(k1)


def _extend(env1, x1, env2, x2, lvl):
    e1 = dict(env1)
    e2 = dict(env2)
    e1[x1] = lvl
    e2[x2] = lvl
    return e1, e2


def _erased_equal(t1: S.Term, t2: S.Term, glob, fuel, env1, env2) -> bool:
    p1 = rename_refs(erase(t1), {n: _lvl_name(l) for n, l in env1.items()})
    p2 = rename_refs(erase(t2), {n: _lvl_name(l) for n, l in env2.items()})
    return beta_eta_equal(p1, p2, glob.erased_terms, fuel)


def _conv_type(t1, t2, glob, fuel, env1, env2, lvl) -> bool:
    """Compare head-stable types."""
    if type(t1) is not type(t2):
        return False
    match t1:
        case S.TVar(n1):
            l1, l2 = env1.get(n1), env2.get(t2.name)
            if l1 is None and l2 is None:
                return n1 == t2.name
            return l1 == l2
        case S.TGlob(sym):
            # only opaque references survive whnf
            return sym == t2.sym
        case S.Eq(a, b):
            return _erased_equal(a, t2.lhs, glob, fuel, env1, env2) and \
                _erased_equal(b, t2.rhs, glob, fuel, env1, env2)
        case S.TyAppTm(fn, arg):
            if not _conv_type(fn, t2.fn, glob, fuel, env1, env2, lvl):
                return False
            return _erased_equal(arg, t2.arg, glob, fuel, env1, env2)
        case S.TyAppTy(fn, arg):
            if not _conv_type(fn, t2.fn, glob, fuel, env1, env2, lvl):
                return False
            return _conv(arg, t2.arg, glob, fuel, env1, env2, lvl)
        case S.AllTy(x, kind, body):
            if not _conv(kind, t2.kind, glob, fuel, env1, env2, lvl):
                return False
            e1, e2 = _extend(env1, x, env2, t2.var, lvl)
            return _conv(body, t2.body, glob, fuel, e1, e2, lvl + 1)
        case S.AllTm(x, dom, body) | S.Pi(x, dom, body) | S.TyLamTm(x, dom, body):
            if not _conv(dom, t2.dom, glob, fuel, env1, env2, lvl):
                return False
            e1, e2 = _extend(env1, x, env2, t2.var, lvl)
            return _conv(body, t2.body, glob, fuel, e1, e2, lvl + 1)
        case S.TyLamTy(x, kind, body):
            if not _conv(kind, t2.kind, glob, fuel, env1, env2, lvl):
                return False
            e1, e2 = _extend(env1, x, env2, t2.var, lvl)
            return _conv(body, t2.body, glob, fuel, e1, e2, lvl + 1)
        case S.Isect(x, fst, snd):
            if not _conv(fst, t2.fst, glob, fuel, env1, env2, lvl):
                return False
            e1, e2 = _extend(env1, x, env2, t2.var, lvl)
            return _conv(snd, t2.snd, glob, fuel, e1, e2, lvl + 1)
    raise AssertionError(f"convert: unexpected head {t1!r}")
