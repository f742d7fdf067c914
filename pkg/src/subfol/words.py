"""Words over a fixed finite alphabet and the scattered-subword order.

Symbols are single ASCII characters from ``a``-``z`` plus ``#``.  An
:class:`Alphabet` fixes a total order on its symbols at construction time;
every downstream choice that needs "some order" (enumeration, permutation
words, auxiliary-symbol allocation) uses that order, so compiled output is
deterministic.

All values are immutable and all operations are pure functions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

SYMBOL_POOL = "abcdefghijklmnopqrstuvwxyz#"


class AlphabetError(ValueError):
    """Symbol outside the alphabet, or mismatched alphabets."""


@dataclass(frozen=True)
class Alphabet:
    """An ordered, duplicate-free, nonempty set of single-character symbols."""

    symbols: tuple[str, ...]

    def __init__(self, symbols: Iterable[str]):
        syms = tuple(symbols)
        if not syms:
            raise AlphabetError("alphabet must be nonempty")
        if len(set(syms)) != len(syms):
            raise AlphabetError(f"duplicate symbols in alphabet: {''.join(syms)}")
        for s in syms:
            if len(s) != 1 or s not in SYMBOL_POOL:
                raise AlphabetError(f"bad symbol {s!r}: must be one of [a-z#]")
        object.__setattr__(self, "symbols", syms)

    def __contains__(self, sym: str) -> bool:
        return sym in self.symbols

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return "".join(self.symbols)

    def index(self, sym: str) -> int:
        try:
            return self.symbols.index(sym)
        except ValueError:
            raise AlphabetError(f"symbol {sym!r} not in alphabet {self}") from None

    def has_subset(self, syms: Iterable[str]) -> bool:
        return all(s in self.symbols for s in syms)

    def require_subset(self, syms: Iterable[str]) -> tuple[str, ...]:
        """Return `syms` filtered into alphabet order, or raise if not a subset."""
        want = set(syms)
        missing = want - set(self.symbols)
        if missing:
            raise AlphabetError(f"{sorted(missing)} not a subset of alphabet {self}")
        return tuple(s for s in self.symbols if s in want)

    def word(self, text: str = "") -> "Word":
        return Word(text, self)

    def epsilon(self) -> "Word":
        return Word("", self)

    def permutation_word(self) -> "Word":
        """All symbols once, in alphabet order."""
        return Word("".join(self.symbols), self)

    def extend(self, extra: Iterable[str]) -> "Alphabet":
        """This alphabet plus `extra` symbols appended in pool order."""
        new = [s for s in SYMBOL_POOL if s in extra and s not in self.symbols]
        return Alphabet(self.symbols + tuple(new))


@dataclass(frozen=True)
class Word:
    """A finite symbol sequence over a fixed alphabet.  Empty is fine."""

    text: str
    alphabet: Alphabet = field(compare=False)

    def __post_init__(self):
        bad = set(self.text) - set(self.alphabet.symbols)
        if bad:
            raise AlphabetError(
                f"word {self.text!r} uses symbols {sorted(bad)} outside alphabet {self.alphabet}"
            )

    def __len__(self) -> int:
        return len(self.text)

    def __iter__(self) -> Iterator[str]:
        return iter(self.text)

    def __str__(self) -> str:
        return self.text if self.text else "()"

    def __add__(self, other: "Word") -> "Word":
        if other.alphabet != self.alphabet:
            raise AlphabetError("concatenation across different alphabets")
        return Word(self.text + other.text, self.alphabet)

    def __mul__(self, n: int) -> "Word":
        return Word(self.text * n, self.alphabet)

    def over(self, alphabet: Alphabet) -> "Word":
        """The same symbol sequence viewed over a (super-)alphabet."""
        return Word(self.text, alphabet)

    def lenlex_key(self) -> tuple:
        idx = self.alphabet.index
        return (len(self.text), tuple(idx(s) for s in self.text))


# Word equality ignores the alphabet and compares symbol sequences; the
# alphabet field is validation metadata.  Mixing alphabets in one relation is
# still an error wherever the operations below say so.


def is_subword(u: Word, v: Word) -> bool:
    """Scattered-subword test: does u embed into v order-preservingly?

    Greedy left-to-right matching; linear in |v|.
    """
    if u.alphabet != v.alphabet:
        raise AlphabetError(f"is_subword across alphabets {u.alphabet} vs {v.alphabet}")
    it = iter(v.text)
    return all(c in it for c in u.text)


def embeds(u: str, v: str) -> bool:
    """`is_subword` on raw strings, for callers that juggle alphabets."""
    it = iter(v)
    return all(c in it for c in u)


def project(w: Word, onto: Iterable[str]) -> Word:
    """Delete every symbol of w outside `onto`, keeping order.

    The result is returned over w's own alphabet so it can keep participating
    in relations over the ambient alphabet.
    """
    keep = set(w.alphabet.require_subset(onto))
    return Word("".join(s for s in w.text if s in keep), w.alphabet)


def count_letter(w: Word, letters: Iterable[str]) -> int:
    """Number of positions of w carrying a symbol from `letters`."""
    want = set(w.alphabet.require_subset(letters))
    return sum(1 for s in w.text if s in want)


def is_primitive(p: Word) -> bool:
    """True iff p is nonempty and not a power of any strictly shorter word.

    Checks p against its length-d prefix for every proper divisor d of |p|.
    """
    n = len(p)
    if n == 0:
        return False
    for d in range(1, n):
        if n % d == 0 and p.text == p.text[:d] * (n // d):
            return False
    return True


@dataclass(frozen=True)
class Morphism:
    """A word morphism, given by its values on the domain's symbols."""

    domain: Alphabet
    codomain: Alphabet
    image: Mapping[str, Word]

    def __post_init__(self):
        missing = set(self.domain.symbols) - set(self.image)
        if missing:
            raise AlphabetError(f"morphism lacks images for {sorted(missing)}")
        for s, w in self.image.items():
            if s not in self.domain:
                raise AlphabetError(f"morphism image for {s!r} outside domain")
            if not self.codomain.has_subset(set(w.text)):
                raise AlphabetError(f"image of {s!r} not over codomain {self.codomain}")

    def __call__(self, w: Word) -> Word:
        return apply_morphism(self, w)

    def then(self, after: "Morphism") -> "Morphism":
        """Composition: first self, then `after`."""
        return Morphism(
            self.domain,
            after.codomain,
            {s: after(self.image[s].over(after.domain)) for s in self.domain},
        )

    @staticmethod
    def identity(alphabet: Alphabet) -> "Morphism":
        return Morphism(alphabet, alphabet, {s: Word(s, alphabet) for s in alphabet})

    @staticmethod
    def erasing(domain: Alphabet, codomain: Alphabet | None = None) -> "Morphism":
        cod = codomain if codomain is not None else domain
        return Morphism(domain, cod, {s: cod.epsilon() for s in domain})

    @staticmethod
    def from_pairs(domain: Alphabet, codomain: Alphabet, pairs: Mapping[str, str]) -> "Morphism":
        return Morphism(domain, codomain, {s: Word(t, codomain) for s, t in pairs.items()})


def apply_morphism(m: Morphism, w: Word) -> Word:
    """Image of w under m; distributes over concatenation by construction."""
    if not m.domain.has_subset(set(w.text)):
        raise AlphabetError(f"word {w.text!r} not over morphism domain {m.domain}")
    return Word("".join(m.image[s].text for s in w.text), m.codomain)


def words_of_length(alphabet: Alphabet, length: int) -> Iterator[Word]:
    """All words of exactly `length`, in lexicographic (alphabet) order."""
    for tup in itertools.product(alphabet.symbols, repeat=length):
        yield Word("".join(tup), alphabet)


def words_up_to(alphabet: Alphabet, max_len: int) -> Iterator[Word]:
    """All words of length <= max_len in length-lexicographic order."""
    for n in range(max_len + 1):
        yield from words_of_length(alphabet, n)


def all_subwords(v: Word) -> set[Word]:
    """The downward closure of v (every scattered subword, deduplicated)."""
    seen = {""}
    for s in v.text:
        seen |= {u + s for u in seen}
    return {Word(t, v.alphabet) for t in seen}
