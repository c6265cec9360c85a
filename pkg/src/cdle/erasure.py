"""Erasure of annotated terms to pure untyped lambda terms.

Pure terms use a locally nameless representation: bound variables are
de Bruijn indices (`PVar`), free variables and global definition
references are names (`PRef`).  Structural equality on locally closed
terms is exactly alpha-equivalence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Union

from . import syntax as S


@dataclass(frozen=True)
class PVar:
    idx: int


@dataclass(frozen=True)
class PRef:
    name: str


@dataclass(frozen=True)
class PLam:
    body: "PureTerm"
    hint: str = field(default="x", compare=False, repr=False)


@dataclass(frozen=True)
class PApp:
    fn: "PureTerm"
    arg: "PureTerm"


PureTerm = Union[PVar, PRef, PLam, PApp]

P_ID = PLam(PVar(0))

_fresh = itertools.count()


def fresh_ref(base: str = "v") -> PRef:
    return PRef(f"!{base}{next(_fresh)}")


# ---------------------------------------------------------------------------
# Core operations
# ---------------------------------------------------------------------------

def open_at(body: PureTerm, repl: PureTerm, depth: int = 0) -> PureTerm:
    """Replace the bound variable at binding depth `depth` with `repl`.

    `repl` must be locally closed, so no shifting is needed."""
    match body:
        case PVar(k):
            return repl if k == depth else body
        case PRef(_):
            return body
        case PLam(b, hint):
            return PLam(open_at(b, repl, depth + 1), hint)
        case PApp(f, a):
            return PApp(open_at(f, repl, depth), open_at(a, repl, depth))
    raise AssertionError(body)


def close(t: PureTerm, name: str, depth: int = 0) -> PureTerm:
    """Abstract the free name `name` as the variable at depth `depth`."""
    match t:
        case PVar(_):
            return t
        case PRef(n):
            return PVar(depth) if n == name else t
        case PLam(b, hint):
            return PLam(close(b, name, depth + 1), hint)
        case PApp(f, a):
            return PApp(close(f, name, depth), close(a, name, depth))
    raise AssertionError(t)


def subst_ref(t: PureTerm, name: str, repl: PureTerm) -> PureTerm:
    """Replace the free name `name` with a locally closed term."""
    match t:
        case PVar(_):
            return t
        case PRef(n):
            return repl if n == name else t
        case PLam(b, hint):
            return PLam(subst_ref(b, name, repl), hint)
        case PApp(f, a):
            return PApp(subst_ref(f, name, repl), subst_ref(a, name, repl))
    raise AssertionError(t)


def rename_refs(t: PureTerm, mapping: dict) -> PureTerm:
    if not mapping:
        return t
    match t:
        case PVar(_):
            return t
        case PRef(n):
            return PRef(mapping[n]) if n in mapping else t
        case PLam(b, hint):
            return PLam(rename_refs(b, mapping), hint)
        case PApp(f, a):
            return PApp(rename_refs(f, mapping), rename_refs(a, mapping))
    raise AssertionError(t)


def free_vars(t: PureTerm) -> set:
    """Free names of a pure term (global references included)."""
    out = set()
    stack = [t]
    while stack:
        n = stack.pop()
        match n:
            case PRef(name):
                out.add(name)
            case PLam(b, _):
                stack.append(b)
            case PApp(f, a):
                stack.append(f)
                stack.append(a)
    return out


def is_closed(t: PureTerm, defs=None) -> bool:
    """Closed up to references that resolve in `defs` (if given)."""
    fv = free_vars(t)
    if defs is None:
        return not fv
    return all(n in defs for n in fv)


def alpha_eq_pure(a: PureTerm, b: PureTerm) -> bool:
    return a == b


def node_count(t: PureTerm) -> int:
    """AST size: variables, abstractions, applications count 1 each."""
    match t:
        case PVar(_) | PRef(_):
            return 1
        case PLam(b, _):
            return 1 + node_count(b)
        case PApp(f, a):
            return 1 + node_count(f) + node_count(a)
    raise AssertionError(t)


def print_pure(t: PureTerm, names: Optional[list] = None, as_arg: bool = False) -> str:
    if names is None:
        names = []
    match t:
        case PVar(k):
            return names[k] if k < len(names) else f"#{k}"
        case PRef(n):
            return n
        case PLam(b, hint):
            base = hint.split("'")[0] or "x"
            name = base
            i = 0
            while name in names or name in free_vars(t):
                i += 1
                name = f"{base}'{i}"
            s = f"λ {name}. {print_pure(b, [name] + names)}"
            return f"({s})" if as_arg else s
        case PApp(f, a):
            s = f"{print_pure(f, names, as_arg=isinstance(f, PLam))} {print_pure(a, names, as_arg=True)}"
            return f"({s})" if as_arg else s
    raise AssertionError(t)


# ---------------------------------------------------------------------------
# Erasure
# ---------------------------------------------------------------------------

def erase(t: S.Term, bound: Optional[list] = None) -> PureTerm:
    """Erase an annotated term to its untyped computational content.

    The `bound` list holds enclosing relevant binder names, innermost
    first; names bound by erased abstractions never appear in it, so
    their occurrences come out as free references (which is what the
    implicit-product side condition inspects)."""
    if bound is None:
        bound = []
    match t:
        case S.Var(name):
            if name in bound:
                return PVar(bound.index(name))
            return PRef(name)
        case S.Glob(sym):
            return PRef(sym)
        case S.Lam(var, _, body):
            return PLam(erase(body, [var] + bound), hint=var)
        case S.ILam(_, body):
            return erase(body, bound)
        case S.App(fn, arg):
            return PApp(erase(fn, bound), erase(arg, bound))
        case S.IApp(fn, _):
            return erase(fn, bound)
        case S.TyApp(fn, _):
            return erase(fn, bound)
        case S.Both(fst, _):
            return erase(fst, bound)
        case S.Proj(tm, _):
            return erase(tm, bound)
        case S.Refl(payload):
            return erase(payload, bound)
        case S.Rewrite(_, _, _, body):
            return erase(body, bound)
        case S.Retype(_, _, wit):
            return erase(wit, bound)
        case S.Absurd(_):
            return P_ID
        case S.Flip(tm):
            return erase(tm, bound)
        case S.Ascribe(_, tm):
            return erase(tm, bound)
        case S.LetTm(var, _, val, body):
            return PApp(PLam(erase(body, [var] + bound), hint=var),
                        erase(val, bound))
    raise AssertionError(f"erase: {t!r}")


def embed(t: PureTerm, names: Optional[list] = None) -> S.Term:
    """Embed a pure term back into the annotated language."""
    if names is None:
        names = []
    match t:
        case PVar(k):
            return S.Var(names[k])
        case PRef(n):
            return S.Var(n)
        case PLam(b, hint):
            base = hint.split("'")[0] or "x"
            name = base
            i = 0
            while name in names:
                i += 1
                name = f"{base}'{i}"
            return S.Lam(name, None, embed(b, [name] + names))
        case PApp(f, a):
            return S.App(embed(f, names), embed(a, names))
    raise AssertionError(t)
