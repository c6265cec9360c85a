"""Module elaboration: name resolution, parametrized imports, lifting.

Every definition is stored *lifted*: its classifier and body are
closed over the defining module's parameter telescope, and references
to earlier definitions of the same module are applied back to those
parameters.  An import then simply binds local names to application
spines `g ·A1 -a2 …`:

  * fully applied imports consume the whole telescope,
  * an unapplied import of a parametrized module leaves the lifted
    quantifiers in place (uses must apply explicitly),
  * partial application consumes a telescope prefix.

`as X` prefixes every binding with `X.`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import syntax as S
from .conversion import GlobalEnv
from .erasure import erase, free_vars
from .reduction import DEFAULT_FUEL
from .typecheck import Checker, Context, TypeCheckError
from .bohm import DEFAULT_DEPTH


class ElabError(Exception):
    def __init__(self, msg: str, path: str = "", span: Optional[S.Span] = None):
        loc = f"{path}:{span.line}:{span.col}: " if span else (f"{path}: " if path else "")
        super().__init__(f"{loc}{msg}")
        self.msg = msg
        self.path = path
        self.span = span


@dataclass
class Param:
    name: str
    cls: S.Classifier
    erased: bool
    sort: str  # 'term' | 'type'


@dataclass
class Export:
    sym: str
    name: str
    sort: str
    cls: S.Classifier  # lifted over the module's parameters
    body: S.Node       # lifted likewise


@dataclass
class ElabModule:
    path: str
    params: list
    exports: dict = field(default_factory=dict)
    imports: list = field(default_factory=list)
    beta_proofs: list = field(default_factory=list)  # defs whose body is bare β


def _is_beta_proof(body: S.Term) -> bool:
    """A definition proved by `β` alone, under erased quantifiers."""
    while isinstance(body, S.ILam):
        body = body.body
    return isinstance(body, S.Refl)


# ---------------------------------------------------------------------------
# Name resolution
# ---------------------------------------------------------------------------

def resolve(node: S.Node, bound: set, binds: dict, where: str) -> S.Node:
    """Replace free references to module-level bindings by their
    resolved expressions; lexically bound names stay variables."""
    if node is None:
        return None
    cls = type(node)
    if cls is S.Var:
        if node.name in bound:
            return node
        b = binds.get(node.name)
        if b is None:
            raise ElabError(f"unbound name {node.name!r}", where, node.span)
        if b[0] != "term":
            raise ElabError(f"{node.name!r} is a type, used as a term",
                            where, node.span)
        return b[1]
    if cls is S.TVar:
        if node.name in bound:
            return node
        b = binds.get(node.name)
        if b is None:
            raise ElabError(f"unbound name {node.name!r}", where, node.span)
        if b[0] != "type":
            raise ElabError(f"{node.name!r} is a term, used as a type",
                            where, node.span)
        return b[1]
    if cls in (S.Glob, S.TGlob, S.Star):
        return node
    if cls in S._BINDS:
        var_f, open_fs, closed_fs = S._BINDS[cls]
        kw = {f: resolve(getattr(node, f), bound, binds, where) for f in open_fs}
        inner = bound | {getattr(node, var_f)}
        kw.update({f: resolve(getattr(node, f), inner, binds, where)
                   for f in closed_fs})
        kw[var_f] = getattr(node, var_f)
        return S._rebuild(node, kw)
    kw = {f: resolve(getattr(node, f), bound, binds, where)
          for f in S._CHILD_FIELDS[cls]}
    return S._rebuild(node, kw)


# ---------------------------------------------------------------------------
# Lifting and application spines
# ---------------------------------------------------------------------------

def lift_def(params: list, sort: str, cls: S.Classifier, body: S.Node):
    """Close a checked definition over the module parameter telescope."""
    for p in reversed(params):
        if sort == "type":
            if p.sort == "type":
                cls = S.KPiTy(p.name, p.cls, cls)
                body = S.TyLamTy(p.name, p.cls, body)
            else:
                cls = S.KPiTm(p.name, p.cls, cls)
                body = S.TyLamTm(p.name, p.cls, body)
        else:
            if p.sort == "type":
                cls = S.AllTy(p.name, p.cls, cls)
                body = S.ILam(p.name, body)
            elif p.erased:
                cls = S.AllTm(p.name, p.cls, cls)
                body = S.ILam(p.name, body)
            else:
                cls = S.Pi(p.name, p.cls, cls)
                body = S.Lam(p.name, p.cls, body)
    return cls, body


def spine(sort: str, sym: str, params: list, args: Optional[list] = None) -> S.Node:
    """Apply a lifted global back to parameter variables (inside its
    own module) or to import arguments (prefix, possibly partial)."""
    if args is None:
        args = [(("type", S.TVar(p.name)) if p.sort == "type" else
                 ("erased" if p.erased else "term", S.Var(p.name)))
                for p in params]
    e: S.Node = S.TGlob(sym) if sort == "type" else S.Glob(sym)
    for kind, a in args:
        if sort == "type":
            e = S.TyAppTy(e, a) if kind == "type" else S.TyAppTm(e, a)
        else:
            if kind == "type":
                e = S.TyApp(e, a)
            elif kind == "erased":
                e = S.IApp(e, a)
            else:
                e = S.App(e, a)
    return e


# ---------------------------------------------------------------------------
# The module environment
# ---------------------------------------------------------------------------

class ModuleEnv:
    """Loads, elaborates and caches modules from the search roots."""

    def __init__(self, roots: Optional[list] = None,
                 fuel_limit: int = DEFAULT_FUEL,
                 bohm_depth: int = DEFAULT_DEPTH):
        self.roots = [Path(r) for r in (roots or ["."])]
        self.checker = Checker(GlobalEnv(), {}, fuel_limit, bohm_depth)
        self.modules: dict = {}
        self._loading: list = []
        # sym -> Export, for CLI lookups
        self.globals: dict = {}

    # -- loading ---------------------------------------------------------------

    def find_source(self, path: str) -> Path:
        for root in self.roots:
            cand = root / f"{path}.ced"
            if cand.is_file():
                return cand
        raise ElabError(f"module {path!r} not found under roots "
                        f"{[str(r) for r in self.roots]}")

    def load(self, path: str) -> ElabModule:
        if path in self.modules:
            return self.modules[path]
        if path in self._loading:
            cyc = " -> ".join(self._loading + [path])
            raise ElabError(f"import cycle: {cyc}")
        src_file = self.find_source(path)
        surface = S.parse_module(src_file.read_text(encoding="utf-8"), path)
        self._loading.append(path)
        try:
            mod, errors = self.elaborate_module(surface, str(src_file))
            if errors:
                raise errors[0]
        finally:
            self._loading.pop()
        self.modules[path] = mod
        return mod

    def load_source(self, source: str, path: str) -> ElabModule:
        """Elaborate from text (used by tests); errors raise."""
        surface = S.parse_module(source, path)
        self._loading.append(path)
        try:
            mod, errors = self.elaborate_module(surface, path)
            if errors:
                raise errors[0]
        finally:
            self._loading.pop()
        self.modules[path] = mod
        return mod

    # -- elaboration -------------------------------------------------------------

    def elaborate_module(self, surface: S.SurfaceModule, src_name: str):
        """Check a parsed module; returns (module, per-definition errors)."""
        checker = self.checker
        checker.path = src_name
        ctx = Context()
        bound: set = set()
        binds: dict = {}
        mod = ElabModule(surface.path, [])
        errors: list = []

        for imp in surface.pre_imports:
            self._do_import(imp, ctx, bound, binds, mod, src_name)

        for (name, cls_s, erased) in surface.params:
            cls = resolve(cls_s, bound, binds, src_name)
            if S.is_kind(cls):
                checker.check_kind_wf(ctx, cls)
                ctx = ctx.bind_type(name, cls)
                mod.params.append(Param(name, cls, erased, "type"))
            else:
                checker.check_type_is_star(ctx, cls, "module-param")
                ctx = ctx.bind_term(name, cls)
                mod.params.append(Param(name, cls, erased, "term"))
            bound.add(name)

        for item in surface.items:
            checker.path = src_name
            if isinstance(item, S.ImportDirective):
                self._do_import(item, ctx, bound, binds, mod, src_name)
                continue
            try:
                self._do_def(item, ctx, bound, binds, mod, src_name)
            except (TypeCheckError, ElabError) as e:
                errors.append(e)
        return mod, errors

    def _do_import(self, imp: S.ImportDirective, ctx, bound, binds, mod, src_name):
        checker = self.checker
        target = self.load(imp.path)
        checker.path = src_name
        mod.imports.append(imp.path)
        if len(imp.args) > len(target.params):
            raise ElabError(f"module {imp.path!r} takes {len(target.params)} "
                            f"argument(s), {len(imp.args)} given",
                            src_name, imp.span)
        inst: dict = {}
        checked_args = []
        for given, p in zip(imp.args, target.params):
            kind, raw = given
            want = "type" if p.sort == "type" else ("erased" if p.erased else "term")
            if kind != want:
                raise ElabError(
                    f"module argument for {p.name!r} must be "
                    f"{'a type' if want == 'type' else ('erased' if want == 'erased' else 'relevant')}",
                    src_name, imp.span)
            arg = resolve(raw, bound, binds, src_name)
            pcls = p.cls
            for k, v in inst.items():
                pcls = S.subst(pcls, k, v)
            if p.sort == "type":
                ka = checker.synth_kind_of_type(ctx, arg)
                checker.conv(ka, pcls, "module-arg", span=imp.span,
                             judgment="kinding")
            else:
                checker.check_term(ctx, arg, pcls)
            inst[p.name] = arg
            checked_args.append((kind, arg))
        prefix = f"{imp.alias}." if imp.alias else ""
        for e in target.exports.values():
            binds[prefix + e.name] = (e.sort,
                                      spine(e.sort, e.sym, target.params,
                                            checked_args))

    def _do_def(self, item: S.DefItem, ctx, bound, binds, mod, src_name):
        checker = self.checker
        cls = resolve(item.cls, bound, binds, src_name)
        body = resolve(item.body, bound, binds, src_name)
        if item.body_is_type:
            checker.check_kind_wf(ctx, cls)
            k = checker.synth_kind_of_type(ctx, body)
            checker.conv(k, cls, "definition", span=item.span, judgment="kinding")
            sort = "type"
        else:
            checker.check_type_is_star(ctx, cls, "definition")
            checker.check_term(ctx, body, cls)
            sort = "term"
            ebody = erase(body)
            for p in mod.params:
                if p.sort == "term" and p.erased and p.name in free_vars(ebody):
                    raise checker.err(
                        "erased-param",
                        f"erased module parameter {p.name!r} occurs in the "
                        f"erasure of {item.name!r}", span=item.span)
        if item.name == "_":
            return
        sym = f"{mod.path}::{item.name}"
        lcls, lbody = lift_def(mod.params, sort, cls, body)
        checker.sigs[sym] = (sort, lcls)
        if sort == "type":
            checker.glob.type_bodies[sym] = lbody
        else:
            checker.glob.erased_terms[sym] = erase(lbody)
        exp = Export(sym, item.name, sort, lcls, lbody)
        mod.exports[item.name] = exp
        self.globals[sym] = exp
        if not item.body_is_type and _is_beta_proof(item.body):
            mod.beta_proofs.append(item.name)
        binds[item.name] = (sort, spine(sort, sym, mod.params))

    # -- CLI-facing lookups -------------------------------------------------------

    def lookup(self, addr: str) -> Export:
        """Resolve `module-path::name` to its lifted export."""
        if "::" not in addr:
            raise ElabError(f"bad definition address {addr!r} "
                            "(use module-path::name)")
        mpath, name = addr.split("::", 1)
        mod = self.load(mpath)
        if name not in mod.exports:
            raise ElabError(f"module {mpath!r} has no definition {name!r}")
        return mod.exports[name]

    def module_path_for_file(self, file: str) -> str:
        p = Path(file).resolve()
        for root in self.roots:
            try:
                rel = p.relative_to(root.resolve())
            except ValueError:
                continue
            return str(rel.with_suffix("")).replace("\\", "/")
        return p.stem
