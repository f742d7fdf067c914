"""Brute-force oracles, independent of the code paths they check.

Everything here prefers enumeration and direct parsing over cleverness; the
point is to disagree with the library whenever the library is wrong.
"""

from __future__ import annotations

import itertools

from subfol.words import Alphabet, Word


def subsequences(text: str) -> set[str]:
    """All scattered subsequences of `text`, by explicit index subsets."""
    out = set()
    n = len(text)
    for r in range(n + 1):
        for idxs in itertools.combinations(range(n), r):
            out.add("".join(text[i] for i in idxs))
    return out


def is_subword_oracle(u: str, v: str) -> bool:
    return u in subsequences(v)


def project_oracle(text: str, keep: set[str]) -> str:
    return "".join(c for c in text if c in keep)


def primitive_oracle(text: str) -> bool:
    if not text:
        return False
    # p primitive iff p occurs in pp only at offsets 0 and |p|
    return (text + text).find(text, 1) == len(text)


def star_sets_oracle(w: str, xs: set[str], ys: set[str], k: int, el: int, sep: str) -> bool:
    """Membership of w in (X sep Y sep)* by direct factorization."""
    pos = 0
    while pos < len(w):
        if w[pos : pos + k] not in xs or len(w[pos : pos + k]) != k:
            return False
        pos += k
        if pos >= len(w) or w[pos] != sep:
            return False
        pos += 1
        if w[pos : pos + el] not in ys or len(w[pos : pos + el]) != el:
            return False
        pos += el
        if pos >= len(w) or w[pos] != sep:
            return False
        pos += 1
    return True


def set_star_oracle(w: str, blocks: set[str], block_len: int) -> bool:
    """Membership of w in X* for X a set of equal-length blocks."""
    if block_len == 0:
        return w == ""
    if len(w) % block_len:
        return False
    return all(w[i : i + block_len] in blocks for i in range(0, len(w), block_len))


def blockwise_oracle(x: str, y: str, pairs: set[tuple[str, str]], k: int, el: int) -> bool:
    """(x, y) in T* for T a set of (k, el)-blocks, with k, el >= 1."""
    if len(x) % k or len(y) % el or len(x) // k != len(y) // el:
        return False
    n = len(x) // k
    return all((x[i * k : (i + 1) * k], y[i * el : (i + 1) * el]) in pairs for i in range(n))


def replacement_oracle(u: str) -> bool:
    """u in {ab, #}*"""
    import re

    return re.fullmatch(r"(ab|#)*", u) is not None


def token_star_oracle(u: str, tokens: tuple[str, ...]) -> bool:
    """u in tokens* by greedy-with-backtrack parsing."""
    memo = {len(u): True}

    def ok(i: int) -> bool:
        if i in memo:
            return memo[i]
        memo[i] = any(u.startswith(t, i) and len(t) > 0 and ok(i + len(t)) for t in tokens)
        return memo[i]

    return ok(0)


def generator_oracle(w: str) -> bool:
    """w in {a^n b^n : n >= 0}* by greedy block parsing."""
    i = 0
    while i < len(w):
        j = i
        while j < len(w) and w[j] == "a":
            j += 1
        n = j - i
        if n == 0:
            return False
        if w[j : j + n] != "b" * n:
            return False
        i = j + n
    return True


def generator_sharp_oracle(w: str) -> bool:
    """w in {a^n b^n # : n >= 0}*"""
    if w == "":
        return True
    if not w.endswith("#"):
        return False
    for seg in w[:-1].split("#"):
        n2 = len(seg)
        if n2 % 2:
            return False
        h = n2 // 2
        if seg != "a" * h + "b" * h:
            return False
    return True


def k_language_oracle(w: str) -> bool:
    """w in (a* b* #)*"""
    import re

    return re.fullmatch(r"(a*b*#)*", w) is not None


def words_upto(alphabet: str, n: int) -> list[str]:
    out = []
    for L in range(n + 1):
        for tup in itertools.product(alphabet, repeat=L):
            out.append("".join(tup))
    return out


def encode_oracle(u: str, alphabet: str) -> tuple[str, ...]:
    """Binary-projection encoding: for each two-symbol subset {x, y} of the
    alphabet (x before y), keep only x/y and rename x -> a, y -> b."""
    comps = []
    syms = list(alphabet)
    for i in range(len(syms)):
        for j in range(i + 1, len(syms)):
            x, y = syms[i], syms[j]
            comps.append("".join("a" if c == x else "b" for c in u if c in (x, y)))
    return tuple(comps)
