"""Bidirectional type checking: kind well-formedness, kinding of type
constructors, and term synthesis/checking.

Rules follow the checker conventions of the kernel theory exactly:
lambda abstractions, erased abstractions, intersection introductions
and the equality-proof constructs are checking-only; `χ` turns a
checkable term into a synthesizing one.  Conversion premises that run
out of fuel surface as errors with rule `conversion-fuel`, never as
plain inequality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import syntax as S
from .bohm import DEFAULT_DEPTH, DEFAULT_NODE_FUEL, bohm_separable
from .conversion import GlobalEnv, convert_classifiers, type_whnf
from .erasure import erase, free_vars, is_closed
from .reduction import DEFAULT_FUEL, Fuel, FuelExhausted, beta_eta_equal


class TypeCheckError(Exception):
    def __init__(self, rule: str, msg: str, span: Optional[S.Span] = None,
                 judgment: str = "check", expected: Optional[str] = None,
                 found: Optional[str] = None, path: str = ""):
        loc = f"{path}:{span.line}:{span.col}: " if span and path else ""
        super().__init__(f"{loc}[{rule}] {msg}")
        self.rule = rule
        self.msg = msg
        self.span = span
        self.judgment = judgment
        self.expected = expected
        self.found = found
        self.path = path

    def to_json(self) -> dict:
        return {
            "file": self.path,
            "span": [self.span.lo, self.span.hi] if self.span else None,
            "line": self.span.line if self.span else None,
            "rule": self.rule,
            "judgment": self.judgment,
            "message": self.msg,
            "expected": self.expected,
            "found": self.found,
        }


@dataclass(frozen=True)
class CtxEntry:
    sort: str  # 'term' | 'type'
    cls: S.Classifier


class Context:
    """Telescope of variable declarations; lookup sees the innermost."""

    def __init__(self, vars: Optional[dict] = None):
        self.vars = vars or {}

    def bind_term(self, name: str, ty: S.Type) -> "Context":
        v = dict(self.vars)
        v[name] = CtxEntry("term", ty)
        return Context(v)

    def bind_type(self, name: str, kind: S.Kind) -> "Context":
        v = dict(self.vars)
        v[name] = CtxEntry("type", kind)
        return Context(v)

    def lookup(self, name: str) -> Optional[CtxEntry]:
        return self.vars.get(name)

    def dom(self) -> set:
        return set(self.vars)


# the one equation δ accepts without running the separator
CANONICAL_ABSURD = S.Eq(
    S.Lam("x", None, S.Lam("y", None, S.Var("x"))),
    S.Lam("x", None, S.Lam("y", None, S.Var("y"))))


def _show(c: S.Classifier) -> str:
    return S.print_classifier(c)


class Checker:
    """Holds the global environment and tunable budgets."""

    def __init__(self, glob: Optional[GlobalEnv] = None,
                 sigs: Optional[dict] = None,
                 fuel_limit: int = DEFAULT_FUEL,
                 bohm_depth: int = DEFAULT_DEPTH):
        self.glob = glob or GlobalEnv()
        self.sigs = sigs if sigs is not None else {}  # sym -> (sort, Classifier)
        self.fuel_limit = fuel_limit
        self.bohm_depth = bohm_depth
        self.path = ""

    # -- helpers -------------------------------------------------------------

    def err(self, rule, msg, span=None, judgment="check", expected=None, found=None):
        return TypeCheckError(rule, msg, span=span, judgment=judgment,
                              expected=expected, found=found, path=self.path)

    def whnf(self, ty: S.Type) -> S.Type:
        try:
            return type_whnf(ty, self.glob, Fuel(self.fuel_limit))
        except FuelExhausted:
            raise self.err("conversion-fuel", "conversion fuel exhausted "
                           f"while head-reducing {_show(ty)}")

    def conv(self, c1: S.Classifier, c2: S.Classifier, rule: str,
             span=None, judgment="check") -> None:
        try:
            ok = convert_classifiers(c1, c2, self.glob, Fuel(self.fuel_limit))
        except FuelExhausted:
            raise self.err("conversion-fuel",
                           f"conversion fuel exhausted comparing "
                           f"{_show(c1)} with {_show(c2)}", span=span)
        if not ok:
            raise self.err(rule, "classifiers are not convertible",
                           span=span, judgment=judgment,
                           expected=_show(c2), found=_show(c1))

    def erased_eq(self, t1: S.Term, t2: S.Term, rule: str, span=None) -> None:
        try:
            ok = beta_eta_equal(erase(t1), erase(t2), self.glob.erased_terms,
                                Fuel(self.fuel_limit))
        except FuelExhausted:
            raise self.err("conversion-fuel",
                           "conversion fuel exhausted comparing erasures",
                           span=span)
        if not ok:
            raise self.err(rule, "erasures are not beta-eta-equal", span=span,
                           expected=S.print_term(t2), found=S.print_term(t1))

    def scope_check(self, t: S.Term, ctx: Context, rule: str, span=None) -> None:
        extra = S.free_names(t) - ctx.dom()
        if extra:
            raise self.err(rule, f"undeclared free variables: "
                           f"{', '.join(sorted(extra))}", span=span)

    # -- kinds ----------------------------------------------------------------

    def check_kind_wf(self, ctx: Context, k: S.Kind) -> None:
        match k:
            case S.Star():
                return
            case S.KPiTm(x, dom, cod):
                self.check_type_is_star(ctx, dom, "kind-pi")
                self.check_kind_wf(ctx.bind_term(x, dom), cod)
            case S.KPiTy(x, dom, cod):
                self.check_kind_wf(ctx, dom)
                self.check_kind_wf(ctx.bind_type(x, dom), cod)
            case _:
                raise self.err("kind-wf", f"not a kind: {k!r}")

    def check_type_is_star(self, ctx: Context, ty: S.Type, rule: str) -> None:
        k = self.synth_kind_of_type(ctx, ty)
        if not isinstance(k, S.Star):
            raise self.err(rule, f"{_show(ty)} must be a type of kind ★",
                           span=ty.span, expected="★", found=_show(k))

    # -- kinding --------------------------------------------------------------

    def synth_kind_of_type(self, ctx: Context, ty: S.Type) -> S.Kind:
        match ty:
            case S.TVar(name):
                e = ctx.lookup(name)
                if e is None:
                    raise self.err("type-var", f"unbound type variable {name!r}",
                                   span=ty.span, judgment="kinding")
                if e.sort != "type":
                    raise self.err("type-var", f"{name!r} is a term variable, "
                                   "used as a type", span=ty.span, judgment="kinding")
                return e.cls
            case S.TGlob(sym):
                sort, cls = self.sigs[sym]
                if sort != "type":
                    raise self.err("type-var", f"{sym} is not a type definition",
                                   span=ty.span)
                return cls
            case S.AllTy(x, kind, body):
                self.check_kind_wf(ctx, kind)
                self.check_type_is_star(ctx.bind_type(x, kind), body, "all-type")
                return S.Star()
            case S.AllTm(x, dom, body):
                self.check_type_is_star(ctx, dom, "all-term")
                self.check_type_is_star(ctx.bind_term(x, dom), body, "all-term")
                return S.Star()
            case S.Pi(x, dom, body):
                self.check_type_is_star(ctx, dom, "pi")
                self.check_type_is_star(ctx.bind_term(x, dom), body, "pi")
                return S.Star()
            case S.Isect(x, fst, snd):
                self.check_type_is_star(ctx, fst, "iota")
                self.check_type_is_star(ctx.bind_term(x, fst), snd, "iota")
                return S.Star()
            case S.TyLamTm(x, dom, body):
                self.check_type_is_star(ctx, dom, "type-lambda")
                k = self.synth_kind_of_type(ctx.bind_term(x, dom), body)
                return S.KPiTm(x, dom, k)
            case S.TyLamTy(x, kind, body):
                self.check_kind_wf(ctx, kind)
                k = self.synth_kind_of_type(ctx.bind_type(x, kind), body)
                return S.KPiTy(x, kind, k)
            case S.TyAppTm(fn, arg):
                kf = self.synth_kind_of_type(ctx, fn)
                if not isinstance(kf, S.KPiTm):
                    raise self.err("kind-app", "type constructor applied to a "
                                   "term does not have a term-domain kind",
                                   span=ty.span, found=_show(kf))
                self.check_term(ctx, arg, kf.dom)
                return S.subst(kf.cod, kf.var, arg)
            case S.TyAppTy(fn, arg):
                kf = self.synth_kind_of_type(ctx, fn)
                if not isinstance(kf, S.KPiTy):
                    raise self.err("kind-app", "type constructor applied to a "
                                   "type does not have a type-domain kind",
                                   span=ty.span, found=_show(kf))
                ka = self.synth_kind_of_type(ctx, arg)
                self.conv(ka, kf.dom, "kind-app", span=ty.span, judgment="kinding")
                return S.subst(kf.cod, kf.var, arg)
            case S.Eq(lhs, rhs):
                self.scope_check(lhs, ctx, "eq-kind", span=ty.span)
                self.scope_check(rhs, ctx, "eq-kind", span=ty.span)
                return S.Star()
        raise self.err("kinding", f"not a type: {ty!r}")

    # -- term synthesis ---------------------------------------------------------

    def synth_term(self, ctx: Context, t: S.Term) -> S.Type:
        match t:
            case S.Var(name):
                e = ctx.lookup(name)
                if e is None:
                    raise self.err("var", f"unbound variable {name!r}",
                                   span=t.span, judgment="synth")
                if e.sort != "term":
                    raise self.err("var", f"{name!r} is a type variable, used "
                                   "as a term", span=t.span, judgment="synth")
                return e.cls
            case S.Glob(sym):
                sort, cls = self.sigs[sym]
                if sort != "term":
                    raise self.err("var", f"{sym} is not a term definition",
                                   span=t.span)
                return cls
            case S.App(fn, arg):
                tf = self.whnf(self.synth_term(ctx, fn))
                if not isinstance(tf, S.Pi):
                    raise self.err("app", "application head is not a function",
                                   span=t.span, judgment="synth", found=_show(tf))
                self.check_term(ctx, arg, tf.dom)
                return S.subst(tf.body, tf.var, arg)
            case S.IApp(fn, arg):
                tf = self.whnf(self.synth_term(ctx, fn))
                if not isinstance(tf, S.AllTm):
                    raise self.err("erased-app", "erased application head does "
                                   "not have an implicit product type",
                                   span=t.span, judgment="synth", found=_show(tf))
                self.check_term(ctx, arg, tf.dom)
                return S.subst(tf.body, tf.var, arg)
            case S.TyApp(fn, ty):
                tf = self.whnf(self.synth_term(ctx, fn))
                if not isinstance(tf, S.AllTy):
                    raise self.err("type-app", "type application head does not "
                                   "quantify over types", span=t.span,
                                   judgment="synth", found=_show(tf))
                ka = self.synth_kind_of_type(ctx, ty)
                self.conv(ka, tf.kind, "type-app", span=t.span, judgment="synth")
                return S.subst(tf.body, tf.var, ty)
            case S.Proj(tm, idx):
                ti = self.whnf(self.synth_term(ctx, tm))
                if not isinstance(ti, S.Isect):
                    raise self.err("proj", "projection from a non-intersection",
                                   span=t.span, judgment="synth", found=_show(ti))
                if idx == 1:
                    return ti.fst
                return S.subst(ti.snd, ti.var, S.Proj(tm, 1))
            case S.Flip(tm):
                te = self.whnf(self.synth_term(ctx, tm))
                if not isinstance(te, S.Eq):
                    raise self.err("symmetry", "`ς` needs an equality proof",
                                   span=t.span, judgment="synth", found=_show(te))
                return S.Eq(te.rhs, te.lhs)
            case S.Ascribe(ty, tm):
                self.check_type_is_star(ctx, ty, "ascription")
                self.check_term(ctx, tm, ty)
                return ty
            case S.Retype(eq, tm, wit):
                ty = self.synth_term(ctx, tm)
                self.scope_check(wit, ctx, "phi", span=t.span)
                self.check_term(ctx, eq, S.Eq(tm, wit))
                return ty
            case S.Lam() | S.ILam() | S.Both() | S.Refl() | S.Rewrite() | \
                    S.Absurd() | S.LetTm():
                raise self.err("annotation-required",
                               f"{type(t).__name__} cannot synthesize a type; "
                               "annotate it (use χ)", span=t.span, judgment="synth")
        raise self.err("synth", f"cannot synthesize {t!r}")

    # -- term checking ----------------------------------------------------------

    def check_term(self, ctx: Context, t: S.Term, ty: S.Type) -> None:
        match t:
            case S.Lam(x, ann, body):
                w = self.whnf(ty)
                if not isinstance(w, S.Pi):
                    raise self.err("lambda", "abstraction checked against a "
                                   "non-function type", span=t.span,
                                   expected=_show(w))
                if ann is not None:
                    self.check_type_is_star(ctx, ann, "lambda")
                    self.conv(ann, w.dom, "lambda", span=t.span)
                x2, body2, cod = self._open_binder(ctx, x, body, w.var, w.body)
                self.check_term(ctx.bind_term(x2, w.dom), body2, cod)
            case S.ILam(x, body):
                w = self.whnf(ty)
                if isinstance(w, S.AllTy):
                    x2, body2, cod = self._open_binder(ctx, x, body, w.var,
                                                       w.body, sort="type")
                    self.check_term(ctx.bind_type(x2, w.kind), body2, cod)
                elif isinstance(w, S.AllTm):
                    x2, body2, cod = self._open_binder(ctx, x, body, w.var, w.body)
                    self.check_term(ctx.bind_term(x2, w.dom), body2, cod)
                    if x2 in free_vars(erase(body2)):
                        raise self.err("erased-lambda",
                                       f"erased variable {x2!r} occurs in the "
                                       "erasure of the body", span=t.span)
                else:
                    raise self.err("erased-lambda", "erased abstraction checked "
                                   "against a non-quantifier type", span=t.span,
                                   expected=_show(w))
            case S.Both(t1, t2):
                w = self.whnf(ty)
                if not isinstance(w, S.Isect):
                    raise self.err("intersection", "intersection introduction "
                                   "checked against a non-intersection type",
                                   span=t.span, expected=_show(w))
                self.check_term(ctx, t1, w.fst)
                self.check_term(ctx, t2, S.subst(w.snd, w.var, t1))
                self.erased_eq(t1, t2, "intersection", span=t.span)
            case S.Refl(payload):
                w = self.whnf(ty)
                if not isinstance(w, S.Eq):
                    raise self.err("beta", "`β` checked against a non-equality "
                                   "type", span=t.span, expected=_show(w))
                self.scope_check(payload, ctx, "beta", span=t.span)
                self.erased_eq(w.lhs, w.rhs, "beta", span=t.span)
            case S.Rewrite(eq, x, guide, body):
                te = self.whnf(self.synth_term(ctx, eq))
                if not isinstance(te, S.Eq):
                    raise self.err("rewrite", "`ρ` needs an equality proof",
                                   span=t.span, found=_show(te))
                after = S.subst(guide, x, te.rhs)
                self.check_type_is_star(ctx, after, "rewrite")
                self.check_term(ctx, body, after)
                before = S.subst(guide, x, te.lhs)
                self.conv(before, ty, "rewrite", span=t.span)
            case S.Retype(eq, tm, wit):
                self.check_term(ctx, tm, ty)
                self.scope_check(wit, ctx, "phi", span=t.span)
                self.check_term(ctx, eq, S.Eq(tm, wit))
            case S.Absurd(eq):
                self._check_absurd(ctx, t, eq)
            case S.LetTm(x, lty, val, body):
                self.check_type_is_star(ctx, lty, "let")
                self.check_term(ctx, val, lty)
                x2, body2 = x, body
                if x in S.free_names(ty):
                    x2 = S.fresh_name(x, S.free_names(ty) | ctx.dom())
                    body2 = S.rename_bound(body, x, x2)
                self.check_term(ctx.bind_term(x2, lty), body2, ty)
            case _:
                found = self.synth_term(ctx, t)
                self.conv(found, ty, "mode-switch", span=t.span)

    def _open_binder(self, ctx: Context, x: str, body: S.Term,
                     bound: str, cod: S.Type, sort: str = "term"):
        """Bring the checked type's codomain into the body's scope,
        renaming our binder when it would capture a name free in the
        codomain."""
        if bound == x:
            return x, body, cod
        cod_free = S.free_names(cod)
        if x in cod_free:
            x2 = S.fresh_name(x, cod_free | S.free_names(body) | ctx.dom())
            body = S.rename_bound(body, x, x2)
            x = x2
        if bound in cod_free:
            repl = S.TVar(x) if sort == "type" else S.Var(x)
            cod = S.subst(cod, bound, repl)
        return x, body, cod

    def _check_absurd(self, ctx: Context, t: S.Term, eq: S.Term) -> None:
        te = self.synth_term(ctx, eq)
        try:
            if convert_classifiers(te, CANONICAL_ABSURD, self.glob,
                                   Fuel(self.fuel_limit)):
                return
        except FuelExhausted:
            raise self.err("conversion-fuel", "conversion fuel exhausted in δ",
                           span=t.span)
        w = self.whnf(te)
        if isinstance(w, S.Eq):
            e1, e2 = erase(w.lhs), erase(w.rhs)
            if is_closed(e1, self.glob.erased_terms) and \
                    is_closed(e2, self.glob.erased_terms):
                r = bohm_separable(e1, e2, depth=self.bohm_depth,
                                   fuel=DEFAULT_NODE_FUEL,
                                   defs=self.glob.erased_terms)
                if r.separable:
                    return
        raise self.err("delta", "`δ` needs a proof of an absurd equation",
                       span=t.span, found=_show(te))
