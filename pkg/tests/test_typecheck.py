"""Bidirectional checker unit tests on hand-built contexts."""

import pytest

from cdle import syntax as S
from cdle.conversion import GlobalEnv
from cdle.erasure import erase
from cdle.typecheck import Checker, Context, TypeCheckError


def ty(src):
    return S.parse_classifier(src)


def tm(src):
    return S.parse_term(src)


def make_checker():
    g = GlobalEnv()
    g.type_bodies["m::Top"] = ty("{ λ x. x ≃ λ x. x }")
    sigs = {"m::Top": ("type", ty("★"))}
    ch = Checker(g, sigs)
    return ch


def test_kind_formation():
    ch = make_checker()
    ctx = Context()
    ch.check_kind_wf(ctx, ty("★"))
    ch.check_kind_wf(ctx, ty("Π X: ★. ★"))
    ctx2 = ctx.bind_type("T", ty("★"))
    ch.check_kind_wf(ctx2, ty("Π x: T. ★"))
    with pytest.raises(TypeCheckError):
        # the domain is a type-level function, not a type of kind ★
        ch.check_kind_wf(ctx2, ty("Π x: (λ X: ★. X). ★"))


def test_equality_types_kind_without_typing_their_sides():
    ch = make_checker()
    # neither side is typable, yet the formation succeeds
    k = ch.synth_kind_of_type(Context(), ty("{ λ x. x ≃ λ x. x x }"))
    assert isinstance(k, S.Star)


def test_equality_types_need_scoped_sides():
    ch = make_checker()
    ctx = Context().bind_term("x", S.TGlob("m::Top"))
    with pytest.raises(TypeCheckError) as e:
        ch.synth_kind_of_type(ctx, ty("{ x ≃ y }"))
    assert e.value.rule == "eq-kind"


def test_variable_synthesis_and_unbound():
    ch = make_checker()
    ctx = Context().bind_term("n", ty("∀ X: ★. X"))
    assert S.alpha_eq(ch.synth_term(ctx, tm("n")), ty("∀ X: ★. X"))
    with pytest.raises(TypeCheckError) as e:
        ch.synth_term(Context(), tm("x"))
    assert e.value.rule == "var"


def test_symmetry_swaps_sides():
    ch = make_checker()
    ctx = (Context().bind_term("a", S.TGlob("m::Top"))
           .bind_term("b", S.TGlob("m::Top"))
           .bind_term("e", ty("{ a ≃ b }")))
    got = ch.synth_term(ctx, tm("ς e"))
    assert S.alpha_eq(got, ty("{ b ≃ a }"))


def test_beta_checks_reflexive_equations_only():
    ch = make_checker()
    ch.check_term(Context(), tm("β"), ty("{ λ x. x ≃ λ y. y }"))
    with pytest.raises(TypeCheckError) as e:
        ch.check_term(Context(), tm("β"), ty("{ λ x. λ y. x ≃ λ x. λ y. y }"))
    assert e.value.rule == "beta"


def test_beta_payload_must_be_scoped():
    ch = make_checker()
    with pytest.raises(TypeCheckError) as e:
        ch.check_term(Context(), tm("β{ q }"), ty("{ λ x. x ≃ λ x. x }"))
    assert e.value.rule == "beta"


def test_erased_argument_may_not_compute():
    ch = make_checker()
    ctx = Context().bind_type("T", ty("★"))
    with pytest.raises(TypeCheckError) as e:
        ch.check_term(ctx, tm("Λ x. x"), ty("∀ x: T. T"))
    assert e.value.rule == "erased-lambda"
    # the type-quantifier form is fine
    ch.check_term(Context(), tm("Λ X. λ x. x"), ty("∀ X: ★. X ➔ X"))


def test_lambda_against_non_function_fails():
    ch = make_checker()
    with pytest.raises(TypeCheckError) as e:
        ch.check_term(Context(), tm("λ x. x"), S.TGlob("m::Top"))
    assert e.value.rule == "lambda"


def test_self_application_is_rejected():
    ch = make_checker()
    top = S.TGlob("m::Top")
    with pytest.raises(TypeCheckError) as e:
        ch.check_term(Context(), tm("λ x. x x"), S.Pi("_", top, top))
    assert e.value.rule == "app"


def test_intersection_needs_equal_erasures():
    ch = make_checker()
    ctx = Context().bind_type("T", ty("★")).bind_term("a", ty("T"))
    isect = ty("ι x: { λ u. u ≃ λ u. u }. { λ v. v ≃ λ v. v }")
    ch.check_term(ctx, tm("[ β{ a } , β{ a } ]"), isect)
    with pytest.raises(TypeCheckError) as e:
        ch.check_term(ctx, tm("[ β{ a } , β{ λ q. a } ]"), isect)
    assert e.value.rule == "intersection"


def test_checking_is_erasure_stable():
    ch = make_checker()
    t = tm("Λ X. λ x. x")
    before = erase(t)
    ch.check_term(Context(), t, ty("∀ X: ★. X ➔ X"))
    assert erase(t) == before


def test_rewrite_example():
    # from { suc m ≃ suc n } conclude { m ≃ n } by rewriting under pred
    ch = make_checker()
    g = ch.glob
    g.erased_terms["m::suc"] = erase(tm("λ n. λ z. λ s. s n"))
    g.erased_terms["m::pred"] = erase(tm("λ n. n (λ z. λ s. z) (λ p. p)"))
    nat = ty("∀ X: ★. X ➔ X")  # stand-in; the rule never inspects it
    ch.sigs["m::suc"] = ("term", S.Pi("_", nat, nat))
    ch.sigs["m::pred"] = ("term", S.Pi("_", nat, nat))
    ctx = (Context().bind_term("m", nat).bind_term("n", nat)
           .bind_term("e", S.Eq(S.App(S.Glob("m::suc"), S.Var("m")),
                                S.App(S.Glob("m::suc"), S.Var("n")))))
    pred, suc = S.Glob("m::pred"), S.Glob("m::suc")
    # ρ e @x.{ pred x ≃ pred (suc n) } - β ⇐ { m ≃ n }
    guide = S.Eq(S.App(pred, S.Var("x")),
                 S.App(pred, S.App(suc, S.Var("n"))))
    rho = S.Rewrite(tm("e"), "x", guide, tm("β"))
    ch.check_term(ctx, rho, S.Eq(S.Var("m"), S.Var("n")))


def test_rewrite_with_wrong_guide_fails():
    ch = make_checker()
    ctx = (Context().bind_term("a", S.TGlob("m::Top"))
           .bind_term("b", S.TGlob("m::Top"))
           .bind_term("e", ty("{ a ≃ b }")))
    bad = S.Rewrite(tm("e"), "x", ty("{ x ≃ x }"), tm("β"))
    with pytest.raises(TypeCheckError) as e:
        ch.check_term(ctx, bad, ty("{ b ≃ a }"))
    assert e.value.rule == "rewrite"


def test_phi_takes_the_witness_erasure():
    ch = make_checker()
    top = S.TGlob("m::Top")
    ctx = (Context().bind_term("t", top)
           .bind_term("w", top)
           .bind_term("e", ty("{ t ≃ w }")))
    t = tm("φ e - t { w }")
    ch.check_term(ctx, t, top)
    assert erase(t) == erase(tm("w"))
    got = ch.synth_term(ctx, t)
    assert S.alpha_eq(got, top)


def test_delta_on_the_canonical_equation():
    ch = make_checker()
    ctx = Context().bind_term("p", ty("{ λ x. λ y. x ≃ λ x. λ y. y }"))
    ch.check_term(ctx, tm("δ - p"), ty("∀ X: ★. X"))


def test_delta_on_separable_closed_equation():
    ch = make_checker()
    ctx = Context().bind_term("p", ty("{ λ x. λ y. y x ≃ λ x. λ y. y }"))
    ch.check_term(ctx, tm("δ - p"), ty("∀ X: ★. X"))


def test_delta_rejects_true_equations():
    ch = make_checker()
    ctx = Context().bind_term("p", ty("{ λ x. x ≃ λ x. x }"))
    with pytest.raises(TypeCheckError) as e:
        ch.check_term(ctx, tm("δ - p"), ty("∀ X: ★. X"))
    assert e.value.rule == "delta"


def test_delta_rejects_open_equations():
    ch = make_checker()
    top = S.TGlob("m::Top")
    ctx = (Context().bind_term("a", top).bind_term("b", top)
           .bind_term("p", ty("{ a ≃ b }")))
    with pytest.raises(TypeCheckError):
        ch.check_term(ctx, tm("δ - p"), ty("∀ X: ★. X"))


def test_local_definition_checks_in_order():
    ch = make_checker()
    top = S.TGlob("m::Top")
    ctx = Context().bind_term("t", top)
    let = S.LetTm("u", top, tm("t"), tm("u"))
    ch.check_term(ctx, let, top)


def test_annotation_required_for_synthesis_of_checking_constructs():
    ch = make_checker()
    with pytest.raises(TypeCheckError) as e:
        ch.synth_term(Context(), tm("λ x. x"))
    assert e.value.rule == "annotation-required"


def test_ascription_synthesizes():
    ch = make_checker()
    got = ch.synth_term(Context(), S.Ascribe(ty("∀ X: ★. X ➔ X"),
                                             tm("Λ X. λ x. x")))
    assert S.alpha_eq(got, ty("∀ X: ★. X ➔ X"))
