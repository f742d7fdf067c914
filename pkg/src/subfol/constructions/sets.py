"""Representation of fixed-length word sets by subword-blocking words.

A nonempty X of length-l words over A equals the set of words of length
>= l embedding into every member of a finite blocker set P.  The blocker
for a word u is built from the alphabet permutation word: it contains every
word of length <= |u| except u itself, and not u.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from ..words import Alphabet, Word, words_of_length


class SetRepresentationError(ValueError):
    pass


@dataclass(frozen=True)
class FixedLengthSet:
    alphabet: Alphabet
    length: int
    members: frozenset

    def __post_init__(self):
        for m in self.members:
            if len(m) != self.length:
                raise SetRepresentationError(
                    f"member {m!r} has length {len(m)}, set is uniform {self.length}"
                )
            if not self.alphabet.has_subset(set(m)):
                raise SetRepresentationError(f"member {m!r} not over {self.alphabet}")

    @staticmethod
    def of(alphabet: Alphabet, members: Iterable[str]) -> "FixedLengthSet":
        ms = frozenset(members)
        if not ms:
            raise SetRepresentationError("empty fixed-length set")
        length = len(next(iter(ms)))
        return FixedLengthSet(alphabet, length, ms)

    @staticmethod
    def full(alphabet: Alphabet, length: int) -> "FixedLengthSet":
        return FixedLengthSet(
            alphabet, length, frozenset(w.text for w in words_of_length(alphabet, length))
        )

    @staticmethod
    def epsilon(alphabet: Alphabet) -> "FixedLengthSet":
        return FixedLengthSet(alphabet, 0, frozenset({""}))

    def sorted_members(self) -> list[str]:
        idx = self.alphabet.index
        return sorted(self.members, key=lambda t: tuple(idx(c) for c in t))


def build_p_u(u: Word, alphabet: Alphabet) -> Word:
    """The blocker word for u: every v of length <= |u| other than u embeds
    into it, u itself does not."""
    if len(u) == 0:
        raise SetRepresentationError("blocker words are defined for nonempty u only")
    perm = alphabet.permutation_word().text
    pieces = []
    letters = list(u.text)
    for i, a in enumerate(letters):
        gap = perm.replace(a, "")
        pieces.append(gap)
        pieces.append(gap)
        if i < len(letters) - 1:
            pieces.append(a)
    return Word("".join(pieces), alphabet)


MAX_ENUMERATED = 1 << 17


def represent_set(x: FixedLengthSet) -> list[Word]:
    """Blocker set P with X = A^{>= l} intersect (p down-closures).

    For l = 0 the set is {epsilon} = A^{>=0} intersect {epsilon}-closure,
    represented by P = [epsilon].
    """
    if not x.members:
        raise SetRepresentationError("cannot represent the empty set")
    a = x.alphabet
    if x.length == 0:
        return [a.epsilon()]
    if len(a) ** (x.length + 1) > MAX_ENUMERATED:
        raise SetRepresentationError(
            f"representation would enumerate {len(a)}^{x.length + 1} words"
        )
    idx = a.index
    complement = sorted(
        (w.text for w in words_of_length(a, x.length) if w.text not in x.members),
        key=lambda t: tuple(idx(c) for c in t),
    )
    longer = sorted(
        (w.text for w in words_of_length(a, x.length + 1)),
        key=lambda t: tuple(idx(c) for c in t),
    )
    return [build_p_u(Word(t, a), a) for t in complement + longer]


def member_via_representation(w: Word, x: FixedLengthSet, blockers: list[Word]) -> bool:
    """Membership through the representation, used as a cross-check."""
    from ..words import embeds

    return len(w) >= x.length and all(embeds(w.text, p.text) for p in blockers)
