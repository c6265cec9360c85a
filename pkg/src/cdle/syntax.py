"""Surface syntax for `.ced` modules: lexer, parser, core AST, printer.

The same AST serves as the kernel's core language; name resolution
(modsys) replaces references to module-level definitions with `Glob`
nodes but leaves the shape of terms and classifiers untouched.

Unicode forms are authoritative; every symbol has one ASCII alias
(see ALIASES).  Line comments start with `--`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union


class ParseError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0, path: str = "<input>"):
        super().__init__(f"{path}:{line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col
        self.path = path


# ---------------------------------------------------------------------------
# Spans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Span:
    lo: int
    hi: int
    line: int
    col: int


def _span_field():
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Glob:
    """Reference to an elaborated global definition (term level)."""
    sym: str
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Lam:
    """Relevant term abstraction; the domain annotation is optional."""
    var: str
    ann: Optional["Type"]
    body: "Term"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class ILam:
    """Erased abstraction; binds a term or a type variable (which one
    is determined by the classifier it is checked against)."""
    var: str
    body: "Term"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class IApp:
    """Erased term application `t -t'`."""
    fn: "Term"
    arg: "Term"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class TyApp:
    """Type application `t ·T`."""
    fn: "Term"
    ty: "Type"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Both:
    """Intersection introduction `[ t1 , t2 ]`."""
    fst: "Term"
    snd: "Term"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Proj:
    tm: "Term"
    idx: int  # 1 or 2
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Refl:
    """`β{t}`; a bare `β` carries the default payload `λ x. x`."""
    payload: "Term"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Rewrite:
    """`ρ eq @x.T - body`."""
    eq: "Term"
    var: str
    guide: "Type"
    body: "Term"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Retype:
    """`φ eq - tm { wit }`: has the type of `tm`, erases to `wit`."""
    eq: "Term"
    tm: "Term"
    wit: "Term"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Absurd:
    """`δ - t`: anything follows from an absurd equation."""
    eq: "Term"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Flip:
    """`ς t`: symmetry of equality."""
    tm: "Term"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Ascribe:
    """`χ T - t`: type ascription."""
    ty: "Type"
    tm: "Term"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class LetTm:
    """`[x ◂ T = t1] - t2`."""
    var: str
    ty: "Type"
    val: "Term"
    body: "Term"
    span: Optional[Span] = _span_field()


Term = Union[Var, Glob, Lam, ILam, App, IApp, TyApp, Both, Proj, Refl,
             Rewrite, Retype, Absurd, Flip, Ascribe, LetTm]


# ---------------------------------------------------------------------------
# Classifiers: kinds and type constructors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Star:
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class KPiTm:
    """Kind `Π x: T. κ` (type-level functions over terms)."""
    var: str
    dom: "Type"
    cod: "Kind"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class KPiTy:
    """Kind `Π X: κ'. κ` (type-level functions over types)."""
    var: str
    dom: "Kind"
    cod: "Kind"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class TVar:
    name: str
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class TGlob:
    """Reference to an elaborated global definition (type level)."""
    sym: str
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class AllTy:
    """`∀ X: κ. T` — quantification over type constructors."""
    var: str
    kind: "Kind"
    body: "Type"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class AllTm:
    """`∀ x: T. T'` — implicit product over terms."""
    var: str
    dom: "Type"
    body: "Type"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Pi:
    var: str
    dom: "Type"
    body: "Type"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class TyLamTm:
    """Type-level `λ x: T. T'`."""
    var: str
    dom: "Type"
    body: "Type"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class TyLamTy:
    """Type-level `λ X: κ. T`."""
    var: str
    kind: "Kind"
    body: "Type"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class TyAppTm:
    """`T t` — a type constructor applied to a term."""
    fn: "Type"
    arg: "Term"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class TyAppTy:
    """`T1 ·T2` — a type constructor applied to a type."""
    fn: "Type"
    arg: "Type"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Isect:
    """Dependent intersection `ι x: T. T'`."""
    var: str
    fst: "Type"
    snd: "Type"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Eq:
    """Untyped equality `{ t1 ≃ t2 }`."""
    lhs: "Term"
    rhs: "Term"
    span: Optional[Span] = _span_field()


Kind = Union[Star, KPiTm, KPiTy]
Type = Union[TVar, TGlob, AllTy, AllTm, Pi, TyLamTm, TyLamTy, TyAppTm,
             TyAppTy, Isect, Eq]
Classifier = Union[Kind, Type]
Node = Union[Term, Classifier]

KIND_NODES = (Star, KPiTm, KPiTy)


def is_kind(c: Node) -> bool:
    return isinstance(c, KIND_NODES)


# ---------------------------------------------------------------------------
# Module-level surface structures
# ---------------------------------------------------------------------------

@dataclass
class ImportDirective:
    path: str
    alias: Optional[str]
    # each argument is ('type', Type) | ('term', Term) | ('erased', Term)
    args: list
    span: Optional[Span] = None


@dataclass
class DefItem:
    name: str  # "_" for anonymous
    cls: Classifier
    body: Node
    body_is_type: bool
    span: Optional[Span] = None


@dataclass
class SurfaceModule:
    path: str
    pre_imports: list
    params: list  # (name, Classifier, erased: bool)
    items: list   # ImportDirective | DefItem, in source order


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

# Unicode symbol <-> ASCII alias table.  `·` uses `%` because `@` already
# marks rewrite guides.
ALIASES = {
    "*": "★", "Pi": "Π", "All": "∀", "lam": "λ", "Lam": "Λ", "iota": "ι",
    "%": "·", "->": "➔", "=>": "➾", "<|": "◂", "~=": "≃",
    "beta": "β", "rho": "ρ", "phi": "φ", "delta": "δ",
    "sigma-sym": "ς", "chi": "χ",
}

_UNICODE_SYMS = set("★Π∀λΛιβρφδςχ·➔➾◂≃")
_KEYWORDS = {"module", "import", "as"}
_PUNCT = set("(){}[],=-@/.:")


def _ident_start(ch: str) -> bool:
    return ch.isascii() and (ch.isalpha() or ch == "_")


def _ident_char(ch: str) -> bool:
    return ch.isascii() and (ch.isalnum() or ch in "_'-")


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident' | 'sym' | 'kw' | 'proj' | 'eof'
    text: str
    span: Span


def tokenize(source: str, path: str = "<input>") -> list:
    toks = []
    i, line, bol = 0, 1, 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            bol = i
            continue
        if ch.isspace():
            i += 1
            continue
        if source.startswith("--", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        col = i - bol + 1
        lo = i
        if _ident_start(ch):
            j = i + 1
            while j < n and _ident_char(source[j]):
                j += 1
            # one level of qualification: `alias.ident`
            if j + 1 < n and source[j] == "." and _ident_start(source[j + 1]):
                j += 2
                while j < n and _ident_char(source[j]):
                    j += 1
            text = source[i:j]
            sp = Span(lo, j, line, col)
            if text in _KEYWORDS:
                toks.append(Token("kw", text, sp))
            elif text in ALIASES:
                toks.append(Token("sym", ALIASES[text], sp))
            else:
                toks.append(Token("ident", text, sp))
            i = j
            continue
        if ch == ".":
            if i + 1 < n and source[i + 1] in "12" and \
                    not (i + 2 < n and _ident_char(source[i + 2])):
                toks.append(Token("proj", source[i + 1], Span(lo, i + 2, line, col)))
                i += 2
            else:
                toks.append(Token("sym", ".", Span(lo, i + 1, line, col)))
                i += 1
            continue
        two = source[i:i + 2]
        if two in ("->", "=>", "<|", "~="):
            toks.append(Token("sym", ALIASES[two], Span(lo, i + 2, line, col)))
            i += 2
            continue
        if ch in _UNICODE_SYMS:
            toks.append(Token("sym", ch, Span(lo, i + 1, line, col)))
            i += 1
            continue
        if ch in ("%", "*"):
            toks.append(Token("sym", ALIASES[ch] if ch == "*" else "·",
                              Span(lo, i + 1, line, col)))
            i += 1
            continue
        if ch in _PUNCT:
            toks.append(Token("sym", ch, Span(lo, i + 1, line, col)))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col, path)
    toks.append(Token("eof", "", Span(n, n, line, n - bol + 1)))
    return toks


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_LAMBDA_LIKE = set("λΛρφδςχ")  # constructs that extend to the end of a term


class _Parser:
    def __init__(self, source: str, path: str = "<input>"):
        self.toks = tokenize(source, path)
        self.pos = 0
        self.path = path

    # -- token helpers ------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at_sym(self, *texts: str) -> bool:
        t = self.peek()
        return t.kind == "sym" and t.text in texts

    def expect_sym(self, text: str) -> Token:
        t = self.peek()
        if not (t.kind == "sym" and t.text == text):
            self.fail(f"expected {text!r}, found {t.text!r}")
        return self.next()

    def expect_ident(self) -> Token:
        t = self.peek()
        if t.kind != "ident":
            self.fail(f"expected identifier, found {t.text!r}")
        return self.next()

    def fail(self, msg: str):
        t = self.peek()
        raise ParseError(msg, t.span.line, t.span.col, self.path)

    # -- classifiers ---------------------------------------------------------

    def parse_classifier(self) -> Classifier:
        c = self.parse_cls_app()
        if self.at_sym("➔", "➾"):
            arrow = self.next().text
            cod = self.parse_classifier()
            return self.mk_arrow(arrow, c, cod)
        return c

    def mk_arrow(self, arrow: str, dom: Classifier, cod: Classifier) -> Classifier:
        if arrow == "➔":
            if is_kind(cod):
                if is_kind(dom):
                    return KPiTy("_", dom, cod)
                return KPiTm("_", dom, cod)
            if is_kind(dom):
                self.fail("a function type cannot have a kind as domain")
            return Pi("_", dom, cod)
        if is_kind(dom) or is_kind(cod):
            self.fail("`➾` connects types, not kinds")
        return AllTm("_", dom, cod)

    def parse_cls_binder(self) -> Classifier:
        quant = self.next().text
        name = self.parse_binder_name()
        self.expect_colon()
        dom = self.parse_classifier()
        self.expect_sym(".")
        cod = self.parse_classifier()
        if quant == "Π":
            if is_kind(cod):
                return KPiTy(name, dom, cod) if is_kind(dom) else KPiTm(name, dom, cod)
            if is_kind(dom):
                self.fail("a dependent function type cannot bind a type variable")
            return Pi(name, dom, cod)
        if quant == "∀":
            if is_kind(cod):
                self.fail("`∀` forms types, not kinds")
            return AllTy(name, dom, cod) if is_kind(dom) else AllTm(name, dom, cod)
        if quant == "ι":
            if is_kind(dom) or is_kind(cod):
                self.fail("`ι` connects types, not kinds")
            return Isect(name, dom, cod)
        # λ at the type level
        if is_kind(cod):
            self.fail("a type-level abstraction cannot produce a kind")
        return TyLamTy(name, dom, cod) if is_kind(dom) else TyLamTm(name, dom, cod)

    def expect_colon(self):
        t = self.peek()
        if not (t.kind == "sym" and t.text == ":"):
            self.fail(f"expected ':', found {t.text!r}")
        self.next()

    def parse_cls_app(self) -> Classifier:
        head = self.parse_cls_atom()
        while True:
            t = self.peek()
            if t.kind == "sym" and t.text == "·":
                self.next()
                arg = self.parse_cls_atom()
                if is_kind(arg):
                    self.fail("type application argument cannot be a kind")
                head = TyAppTy(head, arg, span=t.span)
            elif t.kind == "ident" or (t.kind == "sym" and t.text in ("(", "β")):
                arg = self.parse_term_atom()
                head = TyAppTm(head, arg, span=t.span)
            else:
                return head

    def parse_cls_atom(self) -> Classifier:
        t = self.peek()
        if t.kind == "sym":
            if t.text == "★":
                self.next()
                return Star(span=t.span)
            if t.text in "Π∀ιλ":
                return self.parse_cls_binder()
            if t.text == "(":
                self.next()
                c = self.parse_classifier()
                self.expect_sym(")")
                return c
            if t.text == "{":
                self.next()
                lhs = self.parse_term()
                self.expect_sym("≃")
                rhs = self.parse_term()
                self.expect_sym("}")
                return Eq(lhs, rhs, span=t.span)
        if t.kind == "ident":
            self.next()
            return TVar(t.text, span=t.span)
        self.fail(f"expected a type or kind, found {t.text!r}")

    # -- terms ---------------------------------------------------------------

    def parse_binder_name(self) -> str:
        t = self.peek()
        if t.kind == "ident":
            self.next()
            return t.text
        self.fail(f"expected a binder name, found {t.text!r}")

    def parse_term(self) -> Term:
        t = self.peek()
        if t.kind == "sym" and t.text in _LAMBDA_LIKE:
            return self.parse_term_construct()
        return self.parse_app_chain()

    def parse_term_construct(self) -> Term:
        t = self.next()
        tag = t.text
        if tag == "λ":
            name = self.parse_binder_name()
            ann = None
            if self.peek().kind == "sym" and self.peek().text == ":":
                self.next()
                ann = self.parse_classifier()
                if is_kind(ann):
                    self.fail("a term abstraction cannot bind a type variable")
            self.expect_sym(".")
            return Lam(name, ann, self.parse_term(), span=t.span)
        if tag == "Λ":
            name = self.parse_binder_name()
            self.expect_sym(".")
            return ILam(name, self.parse_term(), span=t.span)
        if tag == "ρ":
            eq = self.parse_app_chain()
            self.expect_sym("@")
            var = self.parse_binder_name()
            self.expect_sym(".")
            guide = self.parse_cls_atom()
            if is_kind(guide):
                self.fail("a rewrite guide must be a type")
            self.expect_sym("-")
            body = self.parse_term()
            return Rewrite(eq, var, guide, body, span=t.span)
        if tag == "φ":
            eq = self.parse_app_chain(allow_minus=False)
            self.expect_sym("-")
            tm = self.parse_app_chain(allow_minus=False)
            self.expect_sym("{")
            wit = self.parse_term()
            self.expect_sym("}")
            return Retype(eq, tm, wit, span=t.span)
        if tag == "δ":
            self.expect_sym("-")
            return Absurd(self.parse_term(), span=t.span)
        if tag == "ς":
            return Flip(self.parse_app_chain(), span=t.span)
        if tag == "χ":
            ty = self.parse_classifier()
            if is_kind(ty):
                self.fail("`χ` ascribes a type, not a kind")
            self.expect_sym("-")
            return Ascribe(ty, self.parse_term(), span=t.span)
        self.fail(f"unexpected {tag!r}")

    def _at_atom_start(self) -> bool:
        t = self.peek()
        return t.kind == "ident" or (t.kind == "sym" and t.text in ("(", "β", "["))

    def parse_app_chain(self, allow_minus: bool = True) -> Term:
        head = self.parse_term_atom()
        while True:
            t = self.peek()
            if t.kind == "sym" and t.text == "·":
                self.next()
                arg = self.parse_cls_atom()
                if is_kind(arg):
                    self.fail("type application argument cannot be a kind")
                head = TyApp(head, arg, span=t.span)
            elif allow_minus and t.kind == "sym" and t.text == "-":
                self.next()
                head = IApp(head, self.parse_term_atom(), span=t.span)
            elif self._at_atom_start():
                head = App(head, self.parse_term_atom(), span=t.span)
            elif t.kind == "sym" and t.text in _LAMBDA_LIKE:
                # a trailing abstraction is the final argument
                head = App(head, self.parse_term_construct(), span=t.span)
            else:
                return head

    def parse_term_atom(self) -> Term:
        t = self.peek()
        if t.kind == "sym" and t.text in _LAMBDA_LIKE:
            return self.parse_term_construct()
        tm = self.parse_term_primary()
        while self.peek().kind == "proj":
            p = self.next()
            tm = Proj(tm, int(p.text), span=p.span)
        return tm

    def parse_term_primary(self) -> Term:
        t = self.peek()
        if t.kind == "ident":
            self.next()
            return Var(t.text, span=t.span)
        if t.kind == "sym" and t.text == "(":
            self.next()
            tm = self.parse_term()
            self.expect_sym(")")
            return tm
        if t.kind == "sym" and t.text == "β":
            self.next()
            if self.at_sym("{"):
                self.next()
                payload = self.parse_term()
                self.expect_sym("}")
            else:
                payload = Lam("x", None, Var("x"))
            return Refl(payload, span=t.span)
        if t.kind == "sym" and t.text == "[":
            self.next()
            if self.peek().kind == "ident" and self.peek(1).kind == "sym" \
                    and self.peek(1).text == "◂":
                name = self.parse_binder_name()
                self.expect_sym("◂")
                ty = self.parse_classifier()
                if is_kind(ty):
                    self.fail("a local definition needs a type, not a kind")
                self.expect_sym("=")
                val = self.parse_term()
                self.expect_sym("]")
                self.expect_sym("-")
                body = self.parse_term()
                return LetTm(name, ty, val, body, span=t.span)
            fst = self.parse_term()
            self.expect_sym(",")
            snd = self.parse_term()
            self.expect_sym("]")
            return Both(fst, snd, span=t.span)
        self.fail(f"expected a term, found {t.text!r}")

    # -- modules -------------------------------------------------------------

    def parse_import(self) -> ImportDirective:
        kw = self.next()  # 'import'
        path = self.parse_module_path()
        alias = None
        if self.peek().kind == "kw" and self.peek().text == "as":
            self.next()
            alias = self.expect_ident().text
        args = []
        while not self.at_sym("."):
            if self.at_sym("·"):
                self.next()
                ty = self.parse_cls_atom()
                if is_kind(ty):
                    self.fail("module arguments cannot be kinds")
                args.append(("type", ty))
            elif self.at_sym("-"):
                self.next()
                args.append(("erased", self.parse_term_atom()))
            else:
                args.append(("term", self.parse_term_atom()))
        self.expect_sym(".")
        return ImportDirective(path, alias, args, span=kw.span)

    def parse_module_path(self) -> str:
        parts = [self.expect_ident().text]
        while self.at_sym("/"):
            self.next()
            parts.append(self.expect_ident().text)
        return "/".join(parts)

    def parse_module(self, declared_path: Optional[str] = None) -> SurfaceModule:
        pre = []
        while self.peek().kind == "kw" and self.peek().text == "import":
            pre.append(self.parse_import())
        t = self.peek()
        if not (t.kind == "kw" and t.text == "module"):
            self.fail("expected a module header")
        self.next()
        path = self.parse_module_path()
        if declared_path is not None and path != declared_path:
            raise ParseError(
                f"module header {path!r} does not match its file path {declared_path!r}",
                t.span.line, t.span.col, self.path)
        params = []
        while self.at_sym("(", "{"):
            open_tok = self.next()
            erased = open_tok.text == "{"
            name = self.parse_binder_name()
            self.expect_colon()
            cls = self.parse_classifier()
            self.expect_sym(")" if not erased else "}")
            params.append((name, cls, erased))
        self.expect_sym(".")
        items = []
        seen = set()
        while self.peek().kind != "eof":
            t = self.peek()
            if t.kind == "kw" and t.text == "import":
                items.append(self.parse_import())
                continue
            name_tok = self.expect_ident()
            name = name_tok.text
            if name != "_":
                if name in seen:
                    raise ParseError(f"duplicate definition name {name!r}",
                                     name_tok.span.line, name_tok.span.col, self.path)
                seen.add(name)
            self.expect_sym("◂")
            cls = self.parse_classifier()
            self.expect_sym("=")
            if is_kind(cls):
                body = self.parse_classifier()
                body_is_type = True
            else:
                body = self.parse_term()
                body_is_type = False
            self.expect_sym(".")
            items.append(DefItem(name, cls, body, body_is_type, span=name_tok.span))
        return SurfaceModule(path, pre, params, items)


def parse_module(source: str, path: Optional[str] = None) -> SurfaceModule:
    p = _Parser(source, path or "<input>")
    return p.parse_module(declared_path=path)


def parse_term(source: str) -> Term:
    p = _Parser(source)
    tm = p.parse_term()
    if p.peek().kind != "eof":
        p.fail("trailing input after term")
    return tm


def parse_classifier(source: str) -> Classifier:
    p = _Parser(source)
    c = p.parse_classifier()
    if p.peek().kind != "eof":
        p.fail("trailing input after classifier")
    return c


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

_DEFAULT_PAYLOAD = Lam("x", None, Var("x"))


def _glob_name(sym: str) -> str:
    return sym.rsplit("::", 1)[-1]


def print_term(t: Term, as_arg: bool = False) -> str:
    match t:
        case Var(name):
            return name
        case Glob(sym):
            return _glob_name(sym)
        case Refl(payload):
            if payload == _DEFAULT_PAYLOAD:
                return "β"
            return f"β{{ {print_term(payload)} }}"
        case Proj(tm, idx):
            return f"{print_term(tm, as_arg=True)}.{idx}"
        case Both(fst, snd):
            return f"[ {print_term(fst)} , {print_term(snd)} ]"
        case App(fn, arg):
            s = f"{print_term(fn, as_arg=_head_needs_parens(fn))} {print_term(arg, as_arg=True)}"
        case IApp(fn, arg):
            s = f"{print_term(fn, as_arg=_head_needs_parens(fn))} -{print_term(arg, as_arg=True)}"
        case TyApp(fn, ty):
            s = f"{print_term(fn, as_arg=_head_needs_parens(fn))} ·{print_classifier(ty, as_arg=True)}"
        case Lam(var, ann, body):
            a = f": {print_classifier(ann)}" if ann is not None else ""
            s = f"λ {var}{a}. {print_term(body)}"
        case ILam(var, body):
            s = f"Λ {var}. {print_term(body)}"
        case Rewrite(eq, var, guide, body):
            g = print_classifier(guide)
            if not isinstance(guide, Eq):
                g = f"({g})"
            s = f"ρ {print_term(eq, as_arg=_head_needs_parens(eq))} @{var}.{g} - {print_term(body)}"
        case Retype(eq, tm, wit):
            s = (f"φ {print_term(eq, as_arg=True)} - {print_term(tm, as_arg=True)}"
                 f" {{ {print_term(wit)} }}")
        case Absurd(eq):
            s = f"δ - {print_term(eq)}"
        case Flip(tm):
            s = f"ς {print_term(tm, as_arg=True)}"
        case Ascribe(ty, tm):
            s = f"χ {print_classifier(ty)} - {print_term(tm)}"
        case LetTm(var, ty, val, body):
            s = (f"[{var} ◂ {print_classifier(ty)} = {print_term(val)}]"
                 f" - {print_term(body)}")
        case _:
            raise AssertionError(f"print_term: {t!r}")
    return f"({s})" if as_arg else s


def _head_needs_parens(t: Term) -> bool:
    return isinstance(t, (Lam, ILam, Rewrite, Retype, Absurd, Flip, Ascribe, LetTm))


def print_classifier(c: Classifier, as_arg: bool = False) -> str:
    match c:
        case Star():
            return "★"
        case TVar(name):
            return name
        case TGlob(sym):
            return _glob_name(sym)
        case Eq(lhs, rhs):
            return f"{{ {print_term(lhs)} ≃ {print_term(rhs)} }}"
        case KPiTm(var, dom, cod):
            s = _print_binder("Π", var, dom, cod, "➔")
        case KPiTy(var, dom, cod):
            s = _print_binder("Π", var, dom, cod, "➔")
        case AllTy(var, kind, body):
            s = f"∀ {var}: {print_classifier(kind, as_arg=True)}. {print_classifier(body)}"
        case AllTm(var, dom, body):
            s = _print_binder("∀", var, dom, body, "➾")
        case Pi(var, dom, body):
            s = _print_binder("Π", var, dom, body, "➔")
        case TyLamTm(var, dom, body):
            s = f"λ {var}: {print_classifier(dom, as_arg=True)}. {print_classifier(body)}"
        case TyLamTy(var, kind, body):
            s = f"λ {var}: {print_classifier(kind, as_arg=True)}. {print_classifier(body)}"
        case TyAppTm(fn, arg):
            s = f"{print_classifier(fn, as_arg=_ty_head_needs_parens(fn))} {print_term(arg, as_arg=True)}"
        case TyAppTy(fn, arg):
            s = f"{print_classifier(fn, as_arg=_ty_head_needs_parens(fn))} ·{print_classifier(arg, as_arg=True)}"
        case Isect(var, fst, snd):
            s = f"ι {var}: {print_classifier(fst, as_arg=True)}. {print_classifier(snd)}"
        case _:
            raise AssertionError(f"print_classifier: {c!r}")
    return f"({s})" if as_arg else s


def _ty_head_needs_parens(c: Classifier) -> bool:
    return isinstance(c, (AllTy, AllTm, Pi, TyLamTm, TyLamTy, Isect, KPiTm, KPiTy))


def _print_binder(quant: str, var: str, dom: Classifier, cod: Classifier,
                  arrow: str) -> str:
    dom_s = print_classifier(dom, as_arg=_arrow_dom_needs_parens(dom))
    if var == "_" or var not in free_names(cod):
        return f"{dom_s} {arrow} {print_classifier(cod)}"
    return f"{quant} {var}: {print_classifier(dom, as_arg=True)}. {print_classifier(cod)}"


def _arrow_dom_needs_parens(c: Classifier) -> bool:
    # arrows associate right, so a compound domain needs parentheses
    return isinstance(c, (AllTy, AllTm, Pi, TyLamTm, TyLamTy, Isect,
                          KPiTm, KPiTy))


def print_module(m: SurfaceModule) -> str:
    out = []
    for imp in m.pre_imports:
        out.append(_print_import(imp))
    header = f"module {m.path}"
    for name, cls, erased in m.params:
        br = "{}" if erased else "()"
        header += f" {br[0]}{name}: {print_classifier(cls)}{br[1]}"
    out.append(header + " .")
    for item in m.items:
        if isinstance(item, ImportDirective):
            out.append(_print_import(item))
        else:
            body = (print_classifier(item.body) if item.body_is_type
                    else print_term(item.body))
            out.append(f"{item.name} ◂ {print_classifier(item.cls)} = {body} .")
    return "\n".join(out) + "\n"


def _print_import(imp: ImportDirective) -> str:
    s = f"import {imp.path}"
    if imp.alias:
        s += f" as {imp.alias}"
    for kind, node in imp.args:
        if kind == "type":
            s += f" ·{print_classifier(node, as_arg=True)}"
        elif kind == "erased":
            s += f" -{print_term(node, as_arg=True)}"
        else:
            s += f" {print_term(node, as_arg=True)}"
    return s + " ."


# ---------------------------------------------------------------------------
# Free names, substitution, alpha-equivalence
# ---------------------------------------------------------------------------

_BINDS = {
    Lam: ("var", ("ann",), ("body",)),
    ILam: ("var", (), ("body",)),
    LetTm: ("var", ("ty", "val"), ("body",)),
    Rewrite: ("var", ("eq", "body"), ("guide",)),
    KPiTm: ("var", ("dom",), ("cod",)),
    KPiTy: ("var", ("dom",), ("cod",)),
    AllTy: ("var", ("kind",), ("body",)),
    AllTm: ("var", ("dom",), ("body",)),
    Pi: ("var", ("dom",), ("body",)),
    TyLamTm: ("var", ("dom",), ("body",)),
    TyLamTy: ("var", ("kind",), ("body",)),
    Isect: ("var", ("fst",), ("snd",)),
}

_CHILD_FIELDS = {
    Var: (), Glob: (), TVar: (), TGlob: (), Star: (),
    App: ("fn", "arg"), IApp: ("fn", "arg"), TyApp: ("fn", "ty"),
    Both: ("fst", "snd"), Proj: ("tm",), Refl: ("payload",),
    Retype: ("eq", "tm", "wit"), Absurd: ("eq",), Flip: ("tm",),
    Ascribe: ("ty", "tm"),
    TyAppTm: ("fn", "arg"), TyAppTy: ("fn", "arg"), Eq: ("lhs", "rhs"),
}

_fresh_counter = itertools.count()


def fresh_name(base: str, avoid) -> str:
    base = base.split("'")[0] or "x"
    cand = f"{base}'{next(_fresh_counter)}"
    while cand in avoid:
        cand = f"{base}'{next(_fresh_counter)}"
    return cand


def free_names(node: Optional[Node], acc: Optional[set] = None,
               bound: Optional[frozenset] = None) -> set:
    """All free variable names of a term or classifier (one namespace)."""
    if acc is None:
        acc = set()
    if bound is None:
        bound = frozenset()
    if node is None:
        return acc
    cls = type(node)
    if cls in (Var, TVar):
        if node.name not in bound:
            acc.add(node.name)
        return acc
    if cls in _BINDS:
        var_f, open_fs, closed_fs = _BINDS[cls]
        v = getattr(node, var_f)
        for f in open_fs:
            free_names(getattr(node, f), acc, bound)
        inner = bound | {v}
        for f in closed_fs:
            free_names(getattr(node, f), acc, inner)
        return acc
    for f in _CHILD_FIELDS[cls]:
        free_names(getattr(node, f), acc, bound)
    return acc


def rename_bound(node: Node, old: str, new: str) -> Node:
    """Rename free occurrences of `old` (either sort) to `new`."""
    if node is None:
        return None
    cls = type(node)
    if cls is Var:
        return Var(new, span=node.span) if node.name == old else node
    if cls is TVar:
        return TVar(new, span=node.span) if node.name == old else node
    if cls in _BINDS:
        var_f, open_fs, closed_fs = _BINDS[cls]
        kw = {f: rename_bound(getattr(node, f), old, new) for f in open_fs}
        if getattr(node, var_f) == old:
            kw.update({f: getattr(node, f) for f in closed_fs})
        else:
            kw.update({f: rename_bound(getattr(node, f), old, new) for f in closed_fs})
        kw[var_f] = getattr(node, var_f)
        return _rebuild(node, kw)
    kw = {f: rename_bound(getattr(node, f), old, new) for f in _CHILD_FIELDS[cls]}
    return _rebuild(node, kw)


def _rebuild(node: Node, updates: dict) -> Node:
    cls = type(node)
    fields = {f: getattr(node, f) for f in node.__dataclass_fields__ if f != "span"}
    fields.update(updates)
    return cls(**fields, span=node.span)


def subst(node: Node, name: str, repl: Node) -> Node:
    """Capture-avoiding substitution of `repl` for the free variable
    `name`.  `repl` being a Term replaces `Var` occurrences, a Type
    replaces `TVar` occurrences; binders of either sort shadow."""
    repl_free = free_names(repl)
    repl_is_type = type(repl) in (TVar, TGlob, AllTy, AllTm, Pi, TyLamTm,
                                  TyLamTy, TyAppTm, TyAppTy, Isect, Eq,
                                  Star, KPiTm, KPiTy)
    return _subst(node, name, repl, repl_free, repl_is_type)


def _subst(node, name, repl, repl_free, repl_is_type):
    if node is None:
        return None
    cls = type(node)
    if cls is Var:
        if node.name == name and not repl_is_type:
            return repl
        return node
    if cls is TVar:
        if node.name == name and repl_is_type:
            return repl
        return node
    if cls in _BINDS:
        var_f, open_fs, closed_fs = _BINDS[cls]
        v = getattr(node, var_f)
        kw = {f: _subst(getattr(node, f), name, repl, repl_free, repl_is_type)
              for f in open_fs}
        if v == name:
            kw.update({f: getattr(node, f) for f in closed_fs})
            kw[var_f] = v
        elif v in repl_free and v != "_":
            avoid = repl_free | free_names(node)
            v2 = fresh_name(v, avoid)
            kw.update({f: _subst(rename_bound(getattr(node, f), v, v2),
                                 name, repl, repl_free, repl_is_type)
                       for f in closed_fs})
            kw[var_f] = v2
        else:
            kw.update({f: _subst(getattr(node, f), name, repl, repl_free, repl_is_type)
                       for f in closed_fs})
            kw[var_f] = v
        return _rebuild(node, kw)
    kw = {f: _subst(getattr(node, f), name, repl, repl_free, repl_is_type)
          for f in _CHILD_FIELDS[cls]}
    return _rebuild(node, kw)


def alpha_eq(a: Optional[Node], b: Optional[Node],
             env_a: Optional[dict] = None, env_b: Optional[dict] = None,
             depth: int = 0) -> bool:
    """Alpha-equivalence of terms or classifiers.

    Bound variables are matched positionally; `Refl` payloads count
    (two `β{..}` terms differ if their payloads do)."""
    if env_a is None:
        env_a, env_b = {}, {}
    if a is None or b is None:
        return a is b
    ca, cb = type(a), type(b)
    if ca is not cb:
        return False
    if ca is Var or ca is TVar:
        la, lb = env_a.get(a.name), env_b.get(b.name)
        if la is None and lb is None:
            return a.name == b.name
        return la == lb
    if ca in (Glob, TGlob):
        return a.sym == b.sym
    if ca is Star:
        return True
    if ca in _BINDS:
        var_f, open_fs, closed_fs = _BINDS[ca]
        for f in open_fs:
            if not alpha_eq(getattr(a, f), getattr(b, f), env_a, env_b, depth):
                return False
        ea = dict(env_a)
        eb = dict(env_b)
        ea[getattr(a, var_f)] = depth
        eb[getattr(b, var_f)] = depth
        for f in closed_fs:
            if not alpha_eq(getattr(a, f), getattr(b, f), ea, eb, depth + 1):
                return False
        return True
    if ca is Proj and a.idx != b.idx:
        return False
    for f in _CHILD_FIELDS[ca]:
        if not alpha_eq(getattr(a, f), getattr(b, f), env_a, env_b, depth):
            return False
    return True
