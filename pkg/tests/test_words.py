import itertools

import pytest
from hypothesis import given, strategies as st

from subfol.words import (
    Alphabet,
    AlphabetError,
    Morphism,
    Word,
    all_subwords,
    apply_morphism,
    count_letter,
    is_primitive,
    is_subword,
    project,
    words_up_to,
)

from oracles import is_subword_oracle, primitive_oracle, project_oracle, words_upto

AB = Alphabet("ab")
AB_SHARP = Alphabet("ab#")
ABC = Alphabet("abc")


def w(text, alphabet=AB):
    return Word(text, alphabet)


class TestAlphabet:
    def test_order_is_construction_order(self):
        a = Alphabet("ba#")
        assert a.symbols == ("b", "a", "#")
        assert a.index("#") == 2

    def test_rejects_duplicates_and_empty(self):
        with pytest.raises(AlphabetError):
            Alphabet("aa")
        with pytest.raises(AlphabetError):
            Alphabet("")

    def test_rejects_bad_symbols(self):
        with pytest.raises(AlphabetError):
            Alphabet("aB")

    def test_word_outside_alphabet(self):
        with pytest.raises(AlphabetError):
            Word("abc", AB)


class TestSubword:
    def test_paper_example(self):
        assert is_subword(w("ab"), w("bab"))
        assert is_subword(w("ab"), w("aba"))

    def test_epsilon_embeds_everywhere(self):
        for v in words_up_to(AB, 4):
            assert is_subword(w(""), v)

    def test_longer_never_embeds(self):
        assert not is_subword(w("aba"), w("ab"))

    def test_alphabet_mismatch(self):
        with pytest.raises(AlphabetError):
            is_subword(Word("a", AB), Word("a", ABC))

    def test_against_bruteforce_oracle(self):
        for v in words_upto("ab", 7):
            subs = None
            for u in words_upto("ab", len(v)):
                got = is_subword(w(u), w(v))
                assert got == is_subword_oracle(u, v), (u, v)

    def test_partial_order_on_small_words(self):
        univ = [w(t) for t in words_upto("ab", 6)]
        for u in univ:
            assert is_subword(u, u)
        for u, v in itertools.product(univ, repeat=2):
            if is_subword(u, v) and is_subword(v, u):
                assert u == v
            if len(u) == len(v) and is_subword(u, v):
                assert u == v

    @given(st.text(alphabet="ab", max_size=6), st.text(alphabet="ab", max_size=6))
    def test_prepend_append_congruence(self, ut, vt):
        u, v = w(ut), w(vt)
        base = is_subword(u, v)
        for c in "ab":
            cw = w(c)
            assert is_subword(cw + u, cw + v) == base
            assert is_subword(u + cw, v + cw) == base

    def test_transitive_sample(self):
        univ = [w(t) for t in words_upto("ab", 4)]
        for u, v, x in itertools.product(univ, repeat=3):
            if is_subword(u, v) and is_subword(v, x):
                assert is_subword(u, x)


class TestProject:
    def test_deletes_outside(self):
        assert project(Word("ab#ba#", AB_SHARP), "a#").text == "a#a#"

    def test_identity_on_full_alphabet(self):
        for v in words_up_to(AB_SHARP, 4):
            assert project(v, "ab#") == v

    def test_single_letter(self):
        assert project(Word("a#", AB_SHARP), "b#").text == "#"

    def test_not_subset(self):
        with pytest.raises(AlphabetError):
            project(w("ab"), "ac")

    def test_projection_embeds_and_counts(self):
        for v in words_up_to(AB_SHARP, 5):
            for keep in ("a", "b#", "ab"):
                p = project(v, keep)
                assert is_subword(p, v)
                assert p.text == project_oracle(v.text, set(keep))
                for b in keep:
                    assert count_letter(p, b) == count_letter(v, b)


class TestCount:
    def test_examples(self):
        assert count_letter(Word("ab#ba#", AB_SHARP), "#") == 2
        assert count_letter(w("abab"), "a") == 2

    def test_full_alphabet_is_length(self):
        for v in words_up_to(AB, 5):
            assert count_letter(v, "ab") == len(v)


class TestPrimitive:
    def test_examples(self):
        assert is_primitive(w("ab"))
        assert not is_primitive(w("abab"))
        assert not is_primitive(w(""))

    def test_against_occurrence_oracle(self):
        for t in words_upto("ab", 8):
            assert is_primitive(w(t)) == primitive_oracle(t), t


class TestMorphism:
    def test_gamma_example(self):
        gamma = Morphism.from_pairs(AB_SHARP, AB, {"a": "a", "b": "b", "#": "abab"})
        assert apply_morphism(gamma, Word("a#", AB_SHARP)).text == "aabab"

    def test_epsilon(self):
        m = Morphism.identity(AB)
        assert apply_morphism(m, w("")).text == ""

    def test_erasing(self):
        m = Morphism.erasing(AB)
        for v in words_up_to(AB, 4):
            assert apply_morphism(m, v).text == ""

    def test_distributes_over_concat(self):
        m = Morphism.from_pairs(AB, AB, {"a": "ab", "b": ""})
        for u, v in itertools.product(words_up_to(AB, 3), repeat=2):
            assert apply_morphism(m, u + v).text == (apply_morphism(m, u) + apply_morphism(m, v)).text

    def test_missing_image_rejected(self):
        with pytest.raises(AlphabetError):
            Morphism(AB, AB, {"a": w("a")})


class TestEnumeration:
    def test_all_subwords_matches_bruteforce(self):
        from oracles import subsequences

        for t in words_upto("ab", 7):
            assert {x.text for x in all_subwords(w(t))} == subsequences(t)

    def test_words_up_to_count(self):
        assert len(list(words_up_to(ABC, 3))) == 40
