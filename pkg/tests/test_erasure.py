"""Erasure clauses and free-variable computation."""

import random

from cdle import syntax as S
from cdle.erasure import (P_ID, PApp, PLam, PRef, PVar, embed, erase,
                          free_vars, print_pure, subst_ref)


def er(src):
    return erase(S.parse_term(src))


def test_erased_abstractions_drop():
    assert er("Λ N. Λ X. λ z. λ s. z") == PLam(PLam(PVar(1)))
    assert print_pure(er("Λ N. Λ X. λ z. λ s. z")) == "λ z. λ s. z"


def test_local_definition_erases_to_application():
    assert er("[x ◂ T = a] - b x") == PApp(PLam(PApp(PRef("b"), PVar(0))),
                                           PRef("a"))


def test_absurd_erases_to_identity():
    assert er("δ - p") == P_ID


def test_remaining_clauses():
    assert er("[ t , t' ]") == PRef("t")
    assert er("β{ t }") == PRef("t")
    assert er("ρ e @x.{ a ≃ x } - t'") == PRef("t'")
    assert er("φ e - t' { t'' }") == PRef("t''")
    assert er("t.1") == PRef("t") == er("t.2")
    assert er("t ·T") == PRef("t")
    assert er("t -t'") == PRef("t")
    assert er("χ T - t") == PRef("t") == er("ς t")


def test_free_vars():
    assert free_vars(er("λ x. x")) == set()
    assert free_vars(er("λ z. λ s. s n")) == {"n"}
    assert free_vars(er("x y x")) == {"x", "y"}


def test_embedding_then_erasing_is_identity():
    for src in ["λ x. x", "λ z. λ s. s n", "x y x", "λ f. f (λ u. f u u)"]:
        p = er(src)
        assert erase(embed(p)) == p


# -- property: erasure commutes with substitution ---------------------------

NAMES = ["a", "b", "c", "d"]


def random_term(rng, depth, scope):
    choices = ["var"] if scope else []
    if depth > 0:
        choices += ["lam", "ilam", "app", "tyapp", "refl", "proj", "flip"]
    else:
        choices += ["var"]
    match rng.choice(choices or ["lam"]):
        case "var":
            return S.Var(rng.choice(scope))
        case "lam":
            v = rng.choice(NAMES)
            return S.Lam(v, None, random_term(rng, depth - 1, scope + [v]))
        case "ilam":
            v = rng.choice(NAMES)
            return S.ILam(v, random_term(rng, depth - 1, scope + [v]))
        case "app":
            return S.App(random_term(rng, depth - 1, scope),
                         random_term(rng, depth - 1, scope))
        case "tyapp":
            return S.TyApp(random_term(rng, depth - 1, scope), S.TVar("T"))
        case "refl":
            return S.Refl(random_term(rng, depth - 1, scope))
        case "proj":
            return S.Proj(random_term(rng, depth - 1, scope), rng.choice([1, 2]))
        case "flip":
            return S.Flip(random_term(rng, depth - 1, scope))


def _erasure_coherent(t):
    """No erased binder's variable survives into the erasure — the
    discipline the implicit-product side condition enforces."""
    return free_vars(erase(t)) <= S.free_names(t)


def test_erasure_substitution_commutation():
    rng = random.Random(43)
    checked = 0
    while checked < 300:
        t = random_term(rng, 4, ["x", "y"])
        s = random_term(rng, 3, ["y"])
        if not (_erasure_coherent(t) and _erasure_coherent(s)):
            continue
        checked += 1
        lhs = erase(S.subst(t, "x", s))
        rhs = subst_ref(erase(t), "x", erase(s))
        assert lhs == rhs, (S.print_term(t), S.print_term(s))
