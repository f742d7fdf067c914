import itertools

import pytest

from subfol.words import Alphabet, Word, is_subword, words_up_to
from subfol.formulas import (
    Concat,
    Constant,
    FreshNames,
    Not,
    Variable,
    cnt_eq,
    eq,
    eval_qf,
    exists,
    land,
    lor,
    sub,
)
from subfol.checker import (
    BConst,
    BCnt,
    BLen,
    BProd,
    BSum,
    CheckResult,
    SynthesisError,
    WitnessEnumeration,
    WitnessPlan,
    check_sigma1_bounded,
    check_with_plan,
    enumerate_words,
    parse_bound,
)

AB = Alphabet("ab")
ABC = Alphabet("abc")
AB_SHARP = Alphabet("ab#")


def c(text, alphabet=AB):
    return Constant(Word(text, alphabet))


def v(name):
    return Variable(name)


class TestEnumerateWords:
    def test_two_letters_len1(self):
        got = [w.text for w in enumerate_words(AB, 1)]
        assert got == ["", "a", "b"]

    def test_two_letters_len2(self):
        got = [w.text for w in enumerate_words(AB, 2)]
        assert got == ["", "a", "b", "aa", "ab", "ba", "bb"]

    def test_count_three_letters(self):
        assert len(list(enumerate_words(ABC, 3))) == 40

    def test_respects_alphabet_order(self):
        weird = Alphabet("ba")
        got = [w.text for w in enumerate_words(weird, 1)]
        assert got == ["", "b", "a"]


class TestBounds:
    def test_eval(self):
        rho = {"w": Word("ab#ab", AB_SHARP)}
        assert BLen("w").eval(rho) == 5
        assert BCnt("w", "#").eval(rho) == 1
        assert BSum(BConst(2), BProd(BConst(3), BLen("w"))).eval(rho) == 17

    def test_parse_roundtrip(self):
        for text in ["12", "len(w)", "cnt(w,#)", "2*len(x)+1", "len(x)*len(y)", "3*(len(x)+2)"]:
            b = parse_bound(text)
            assert parse_bound(b.text()).text() == b.text()

    def test_parse_eval(self):
        rho = {"x": Word("aab", AB)}
        assert parse_bound("2*len(x)+1").eval(rho) == 7
        assert parse_bound("cnt(x,a)*cnt(x,a)").eval(rho) == 4


class TestBoundedSearch:
    def test_simple_positive(self):
        # exists x: x <= v and a <= x   on v = ba
        f = exists(["x"], land(sub(v("x"), Variable("w")), sub(c("a"), v("x"))))
        r = check_sigma1_bounded(f, {"w": Word("ba", AB)}, bounds=2, complete=True)
        assert r.is_true
        assert r.witness["x"].text == "a"

    def test_square_negative_complete(self):
        # exists x: xx = aba  is false (odd length)
        f = exists(["x"], eq(Concat(v("x"), v("x")), c("aba")))
        r = check_sigma1_bounded(f, {}, bounds=3, complete=True)
        assert r.is_false

    def test_square_positive(self):
        f = exists(["x"], eq(Concat(v("x"), v("x")), c("abab")))
        r = check_sigma1_bounded(f, {}, bounds=4, complete=True)
        assert r.is_true and r.witness["x"].text == "ab"

    def test_intro_example_derived(self):
        # exists x: (not a<=x or not b<=x) and not x<=u and x<=w
        f = exists(
            ["x"],
            land(
                lor(Not(sub(c("a"), v("x"))), Not(sub(c("b"), v("x")))),
                Not(sub(v("x"), v("u"))),
                sub(v("x"), v("w")),
            ),
        )
        rho = {"u": Word("ab", AB), "w": Word("abb", AB)}
        r = check_sigma1_bounded(f, rho, bounds=3, complete=True)
        assert r.is_true
        assert r.witness["x"].text == "bb"

    def test_unknown_without_complete(self):
        f = exists(["x"], eq(Concat(v("x"), v("x")), c("aba")))
        r = check_sigma1_bounded(f, {}, bounds=3)
        assert r.is_unknown

    def test_search_matches_naive_enumeration(self):
        # first witness in length-lex order, innermost fastest
        f = exists(
            ["x", "y"],
            land(sub(v("x"), v("w")), sub(v("y"), v("x")), cnt_eq(v("y"), "a", v("w"), "b")),
        )
        for wtext in ["ab", "ba", "bb", "abab"]:
            rho = {"w": Word(wtext, AB)}
            r = check_sigma1_bounded(f, rho, bounds=4, complete=True)
            naive = None
            univ = list(words_up_to(AB, 4))
            for x in univ:
                if naive:
                    break
                for y in univ:
                    env = {"w": rho["w"], "x": x, "y": y}
                    if (
                        is_subword(x, rho["w"])
                        and is_subword(y, x)
                        and y.text.count("a") == wtext.count("b")
                    ):
                        naive = {"x": x, "y": y}
                        break
            assert r.is_true == (naive is not None)
            if naive:
                assert {k: w.text for k, w in r.witness.items()} == {
                    k: w.text for k, w in naive.items()
                }

    def test_commutation_driver(self):
        # exists u: u (ab#) = (ab#) u and |u|_# = |w|_#  -> u in (ab#)^*
        f = exists(
            ["u"],
            land(
                eq(Concat(v("u"), c("ab#", AB_SHARP)), Concat(c("ab#", AB_SHARP), v("u"))),
                cnt_eq(v("u"), "#", v("w"), "#"),
            ),
        )
        rho = {"w": Word("a#b#", AB_SHARP)}
        r = check_sigma1_bounded(f, rho, bounds=30, complete=True)
        assert r.is_true and r.witness["u"].text == "ab#ab#"

    def test_deterministic_witness(self):
        f = exists(["x", "y"], land(sub(v("x"), v("w")), sub(v("y"), v("w"))))
        rho = {"w": Word("abab", AB)}
        r1 = check_sigma1_bounded(f, rho, bounds=4, complete=True)
        r2 = check_sigma1_bounded(f, rho, bounds=4, complete=True)
        assert {k: w.text for k, w in r1.witness.items()} == {
            k: w.text for k, w in r2.witness.items()
        }

    def test_rechecking_witness_succeeds(self):
        from subfol.checker import sigma1_parts

        f = exists(
            ["x", "y"],
            land(sub(v("x"), v("w")), eq(v("y"), Concat(v("x"), v("x")))),
        )
        rho = {"w": Word("ab", AB)}
        r = check_sigma1_bounded(f, rho, bounds=4, complete=True)
        assert r.is_true
        _, matrix = sigma1_parts(f)
        assert eval_qf(matrix, {**rho, **r.witness})

    def test_non_sigma1_rejected(self):
        from subfol.checker import NotSigma1Error
        from subfol.formulas import forall

        with pytest.raises(NotSigma1Error):
            check_sigma1_bounded(forall(["x"], sub(v("x"), v("x"))), {})

    def test_quantifier_free_input(self):
        r = check_sigma1_bounded(sub(c("a"), c("ab")), {})
        assert r.is_true
        r = check_sigma1_bounded(sub(c("b"), c("a")), {})
        assert r.is_false


class TestPlans:
    def _star_like_plan(self):
        # exists u: u(ab#) = (ab#)u  and |u|_# = |w|_#, with synth u = (ab#)^n
        fresh = FreshNames()
        cword = Word("ab#", AB_SHARP)
        f = exists(
            ["u"],
            land(
                eq(Concat(v("u"), Constant(cword)), Concat(Constant(cword), v("u"))),
                cnt_eq(v("u"), "#", v("w"), "#"),
            ),
        )

        def synth(rho, cert):
            n = rho["w"].text.count("#")
            return {"u": Word("ab#" * n, AB_SHARP)}

        def enum(rho):
            return WitnessEnumeration([synth(rho, None)], complete=True)

        return WitnessPlan(
            formula=f,
            synth=synth,
            bounds={"u": parse_bound("3*cnt(w,#)")},
            complete=True,
            enumerate=enum,
        )

    def test_plan_positive(self):
        plan = self._star_like_plan()
        rho = {"w": Word("a#ab#", AB_SHARP)}
        assert check_with_plan(plan, rho) is True
        r = check_sigma1_bounded(plan.formula, rho, plan=plan)
        assert r.is_true

    def test_plan_negative_complete(self):
        plan = self._star_like_plan()
        rho = {"w": Word("b#a", AB_SHARP)}  # embeds fail? count = 1, u = ab#
        # u = ab#: matrix: commutation ok, counts 1 == 1 -> actually true
        assert check_with_plan(plan, rho) is True

    def test_plan_missing_free_var(self):
        plan = self._star_like_plan()
        with pytest.raises(SynthesisError):
            check_with_plan(plan, {})

    def test_plan_agreement_with_generic_search(self):
        plan = self._star_like_plan()
        for w in words_up_to(AB_SHARP, 4):
            rho = {"w": w}
            via_plan = check_sigma1_bounded(plan.formula, rho, plan=plan)
            generic = check_sigma1_bounded(
                plan.formula, rho, bounds={"u": 3 * w.text.count("#")}, complete=True
            )
            assert via_plan.status == generic.status, w

    def test_enumeration_incomplete_gives_unknown(self):
        plan = self._star_like_plan()
        plan.complete = False
        rho = {"w": Word("#a", AB_SHARP)}

        def enum(rho_):
            return WitnessEnumeration([{"u": Word("", AB_SHARP)}], complete=False)

        plan.enumerate = enum
        r = check_sigma1_bounded(plan.formula, rho, plan=plan)
        assert r.is_unknown


class TestCheckResult:
    def test_no_implicit_bool(self):
        with pytest.raises(TypeError):
            bool(CheckResult("true"))
