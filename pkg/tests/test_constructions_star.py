import itertools

import pytest

from subfol.words import Alphabet, Word, is_subword, words_of_length, words_up_to
from subfol.formulas import classify_fragment
from subfol.checker import check_sigma1_bounded, check_with_plan
from subfol.constructions.sets import (
    FixedLengthSet,
    SetRepresentationError,
    build_p_u,
    member_via_representation,
    represent_set,
)
from subfol.constructions.star import star_closure_formula, star_formula

from oracles import set_star_oracle, star_sets_oracle, words_upto

AB = Alphabet("ab")
ABC = Alphabet("abc")
AB_SHARP = Alphabet("ab#")


class TestBlockerWords:
    def test_paper_two_letter_example(self):
        p = build_p_u(Word("ab", AB), AB)
        assert p.text == "bbaaa"
        assert not is_subword(Word("ab", AB), p)
        for v in ["", "a", "b", "aa", "bb", "ba"]:
            assert is_subword(Word(v, AB), p)

    def test_single_letter(self):
        p = build_p_u(Word("a", AB), AB)
        assert p.text == "bb"
        assert not is_subword(Word("a", AB), p)
        assert is_subword(Word("", AB), p)
        assert is_subword(Word("b", AB), p)

    def test_length_formula(self):
        for alphabet in (AB, ABC):
            for u in words_up_to(alphabet, 3):
                if len(u) == 0:
                    continue
                p = build_p_u(u, alphabet)
                assert len(p) == (2 * len(alphabet) - 1) * len(u) - 1

    def test_blocking_laws_exhaustive(self):
        # u never embeds, every other word of length <= |u| does
        for alphabet in (AB, ABC):
            for u in words_up_to(alphabet, 3):
                if len(u) == 0:
                    continue
                p = build_p_u(u, alphabet)
                assert not is_subword(u, p), (u, p)
                for v in words_up_to(alphabet, len(u)):
                    if v != u:
                        assert is_subword(v, p), (u, v, p)

    def test_epsilon_rejected(self):
        with pytest.raises(SetRepresentationError):
            build_p_u(Word("", AB), AB)


class TestRepresentSet:
    def test_epsilon_set(self):
        x = FixedLengthSet.epsilon(AB)
        assert [p.text for p in represent_set(x)] == [""]

    def test_all_two_letter_subsets(self):
        words2 = [w.text for w in words_of_length(AB, 2)]
        for r in range(1, 5):
            for members in itertools.combinations(words2, r):
                x = FixedLengthSet.of(AB, members)
                blockers = represent_set(x)
                for w in words_up_to(AB, 4):
                    want = w.text in x.members
                    assert member_via_representation(w, x, blockers) == want, (members, w)

    def test_three_letter_random_subsets(self):
        import random

        rng = random.Random(7)
        words2 = [w.text for w in words_of_length(ABC, 2)]
        for _ in range(10):
            r = rng.randrange(1, len(words2) + 1)
            members = rng.sample(words2, r)
            x = FixedLengthSet.of(ABC, members)
            blockers = represent_set(x)
            for w in words_up_to(ABC, 4):
                assert member_via_representation(w, x, blockers) == (w.text in x.members)

    def test_full_length_one(self):
        x = FixedLengthSet.full(AB, 1)
        blockers = represent_set(x)
        for w in words_up_to(AB, 3):
            assert member_via_representation(w, x, blockers) == (len(w) == 1)

    def test_empty_rejected(self):
        with pytest.raises(SetRepresentationError):
            FixedLengthSet.of(AB, [])


def plan_check(cr, *values):
    rho = cr.assignment(*values)
    return check_sigma1_bounded(cr.formula, rho, plan=cr.plan)


class TestStarFormula:
    def test_is_sigma1(self):
        cr = star_formula(FixedLengthSet.of(AB, ["ab", "ba"]), FixedLengthSet.epsilon(AB))
        assert classify_fragment(cr.formula) == (1, "Sigma")

    def test_two_marker_normal_form(self):
        cr = star_formula(FixedLengthSet.of(AB, ["ab", "ba"]), FixedLengthSet.epsilon(AB))
        assert plan_check(cr, Word("ab##ba##", AB_SHARP)).is_true
        # single-marker blocks are not in the two-marker language
        assert plan_check(cr, Word("ab#ba#", AB_SHARP)).is_false

    def test_marked_star_paper_example(self):
        from subfol.constructions.star import marked_star_formula

        cr = marked_star_formula(FixedLengthSet.of(AB, ["ab", "ba"]))
        r = plan_check(cr, Word("ab#ba#", AB_SHARP))
        assert r.is_true
        # the block count is the number of markers
        blocks = {w.text.count("#") for w in r.witness.values() if "#" in w.text}
        assert blocks == {2}
        assert plan_check(cr, Word("ab#b#", AB_SHARP)).is_false
        assert plan_check(cr, Word("ababa#", AB_SHARP)).is_false

    def test_epsilon_in_language(self):
        cr = star_formula(FixedLengthSet.of(AB, ["ab", "ba"]), FixedLengthSet.epsilon(AB))
        assert plan_check(cr, Word("", AB_SHARP)).is_true

    def test_rejects_bad_block(self):
        cr = star_formula(FixedLengthSet.of(AB, ["ab", "ba"]), FixedLengthSet.epsilon(AB))
        assert plan_check(cr, Word("aa##ba##", AB_SHARP)).is_false

    @pytest.mark.parametrize(
        "xs,ys",
        [
            (["ab", "ba"], [""]),
            (["a"], ["b"]),
            (["ab"], ["ab"]),
            (["aa", "ab"], ["b"]),
        ],
    )
    def test_against_oracle(self, xs, ys):
        x = FixedLengthSet.of(AB, xs)
        y = FixedLengthSet.of(AB, ys)
        cr = star_formula(x, y)
        sep = cr.plan.params["sep"]
        for w in words_upto("ab#", 6):
            want = star_sets_oracle(w, set(xs), set(ys), x.length, y.length, sep)
            got = plan_check(cr, Word(w, AB_SHARP))
            assert got.status == ("true" if want else "false"), (w, xs, ys)

    def test_same_blocker_branch(self):
        # X = Y makes some (p, q) pairs idental, exercising the p == q branch
        x = FixedLengthSet.of(AB, ["ab"])
        cr = star_formula(x, x)
        for w in words_upto("ab#", 6):
            want = star_sets_oracle(w, {"ab"}, {"ab"}, 2, 2, "#")
            assert plan_check(cr, Word(w, AB_SHARP)).is_true == want, w

    def test_plan_vs_generic_search_small(self):
        x = FixedLengthSet.of(AB, ["a"])
        y = FixedLengthSet.epsilon(AB)
        cr = star_formula(x, y)
        for w in words_upto("ab#", 4):
            rho = cr.assignment(Word(w, AB_SHARP))
            via_plan = check_sigma1_bounded(cr.formula, rho, plan=cr.plan)
            generic = check_sigma1_bounded(
                cr.formula, rho, bounds=cr.plan.bounds, complete=True
            )
            assert via_plan.status == generic.status, w

    def test_unique_block_count(self):
        # any satisfying assignment pins |u|_# = |w|_# for every pair word
        x = FixedLengthSet.of(AB, ["ab", "ba"])
        cr = star_formula(x, FixedLengthSet.epsilon(AB))
        rho = cr.assignment(Word("ab##ba##", AB_SHARP))
        r = check_sigma1_bounded(cr.formula, rho, plan=cr.plan)
        assert r.is_true
        for name, w in r.witness.items():
            if w.text.count("#"):
                assert w.text.count("#") == 4

    def test_checks_with_plan_entry(self):
        cr = star_formula(FixedLengthSet.of(AB, ["ab", "ba"]), FixedLengthSet.epsilon(AB))
        assert check_with_plan(cr.plan, cr.assignment(Word("ba#ab#", AB_SHARP)))
        assert not check_with_plan(cr.plan, cr.assignment(Word("bb#ab#", AB_SHARP)))


class TestStarClosure:
    def test_against_oracle(self):
        for xs in (["ab", "ba"], ["a"], ["aa"], ["ab", "aa", "ba", "bb"]):
            x = FixedLengthSet.of(AB, xs)
            cr = star_closure_formula(x)
            for w in words_upto("ab", 6):
                want = set_star_oracle(w, set(xs), x.length)
                got = plan_check(cr, Word(w, AB_SHARP))
                assert got.status == ("true" if want else "false"), (w, xs)

    def test_epsilon_closure(self):
        cr = star_closure_formula(FixedLengthSet.epsilon(AB))
        assert plan_check(cr, Word("", AB_SHARP)).is_true
        assert plan_check(cr, Word("a", AB_SHARP)).is_false

    def test_sigma1(self):
        cr = star_closure_formula(FixedLengthSet.of(AB, ["ab"]))
        assert classify_fragment(cr.formula) == (1, "Sigma")
