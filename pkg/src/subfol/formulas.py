"""Formula ASTs over (A*, subword order, constants) with extended atoms.

The signature has three atoms: the subword order ``sub``, word equality
``eq``, and per-letter count comparison ``cnt=`` (|t1|_a = |t2|_b).  Terms
are constants, variables, and binary concatenation.  Concatenation terms and
count atoms are primitives of the signature here; they are not expanded into
the pure order.

Quantifier-free evaluation, capture-avoiding substitution, prenex fragment
classification, and a handful of small macro compilers (projection, linear
count equations, prefix/suffix) live here, together with a parenthesized
text format whose parser and printer round-trip byte-identically on printer
output.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .words import Alphabet, Word

SYMBOL_POOL_ALPHABET = "abcdefghijklmnopqrstuvwxyz#"

Assignment = dict  # variable name -> Word


class FormulaError(ValueError):
    pass


class UnboundVariableError(FormulaError):
    pass


class NotQuantifierFreeError(FormulaError):
    pass


class NotPrenexError(FormulaError):
    pass


class ParseError(FormulaError):
    """Formula text rejected; carries a character position."""

    def __init__(self, msg: str, pos: int):
        super().__init__(f"at {pos}: {msg}")
        self.pos = pos


# ---------------------------------------------------------------- terms

@dataclass(frozen=True)
class Constant:
    word: Word


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Concat:
    left: "Term"
    right: "Term"


Term = Union[Constant, Variable, Concat]


def cat(*terms: Term) -> Term:
    """Right-nested concatenation of one or more terms."""
    if not terms:
        raise FormulaError("cat needs at least one term")
    out = terms[-1]
    for t in reversed(terms[:-1]):
        out = Concat(t, out)
    return out


def term_vars(t: Term) -> set[str]:
    if isinstance(t, Variable):
        return {t.name}
    if isinstance(t, Concat):
        return term_vars(t.left) | term_vars(t.right)
    return set()


def term_flatten(t: Term) -> list[Term]:
    """Leaves of a Concat tree, left to right (Constants and Variables)."""
    if isinstance(t, Concat):
        return term_flatten(t.left) + term_flatten(t.right)
    return [t]


def eval_term(t: Term, rho: Mapping[str, Word]) -> Word:
    text = _eval_text(t, rho)
    alpha = _widest_alphabet(t, rho)
    if alpha.has_subset(set(text)):
        return Word(text, alpha)
    syms: set[str] = set()
    for leaf in term_flatten(t):
        w = leaf.word if isinstance(leaf, Constant) else rho[leaf.name]
        syms.update(w.alphabet.symbols)
    return Word(text, Alphabet([s for s in SYMBOL_POOL_ALPHABET if s in syms]))


def _widest_alphabet(t: Term, rho: Mapping[str, Word]) -> Alphabet:
    best: Alphabet | None = None
    for leaf in term_flatten(t):
        if isinstance(leaf, Constant):
            a = leaf.word.alphabet
        else:
            try:
                a = rho[leaf.name].alphabet
            except KeyError:
                raise UnboundVariableError(f"variable {leaf.name!r} unbound") from None
        if best is None or len(a.symbols) > len(best.symbols):
            best = a
    assert best is not None
    return best


def _eval_text(t: Term, rho: Mapping[str, Word]) -> str:
    """Term value as a raw string; concatenation needs no common alphabet,
    letting constants over a subalphabet mix with ambient-alphabet words."""
    if isinstance(t, Constant):
        return t.word.text
    if isinstance(t, Variable):
        try:
            return rho[t.name].text
        except KeyError:
            raise UnboundVariableError(f"variable {t.name!r} unbound") from None
    return _eval_text(t.left, rho) + _eval_text(t.right, rho)


# ---------------------------------------------------------------- atoms

@dataclass(frozen=True)
class Subword:
    t1: Term
    t2: Term


@dataclass(frozen=True)
class Equal:
    t1: Term
    t2: Term


@dataclass(frozen=True)
class CountEq:
    """|t1|_a = |t2|_b."""

    t1: Term
    a: str
    t2: Term
    b: str


Atom = Union[Subword, Equal, CountEq]


def atom_vars(a: Atom) -> set[str]:
    return term_vars(a.t1) | term_vars(a.t2)


# ------------------------------------------------------------- formulas

@dataclass(frozen=True)
class AtomF:
    atom: Atom


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Exists:
    vars: tuple[str, ...]
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    vars: tuple[str, ...]
    body: "Formula"


Formula = Union[AtomF, Not, And, Or, Exists, Forall]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class FreshNames:
    """Monotone fresh-name source, one per compilation session."""

    def __init__(self, start: int = 0):
        self._n = start

    def fresh(self) -> str:
        name = f"_g{self._n}"
        self._n += 1
        return name

    def fresh_many(self, k: int) -> list[str]:
        return [self.fresh() for _ in range(k)]


def sub(t1: Term, t2: Term) -> Formula:
    return AtomF(Subword(t1, t2))


def eq(t1: Term, t2: Term) -> Formula:
    return AtomF(Equal(t1, t2))


def cnt_eq(t1: Term, a: str, t2: Term, b: str) -> Formula:
    return AtomF(CountEq(t1, a, t2, b))


def land(*parts: Formula) -> Formula:
    """Conjunction, flattening nested Ands and dropping duplicates' nesting."""
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        raise FormulaError("empty conjunction")
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def lor(*parts: Formula) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, Or):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        raise FormulaError("empty disjunction")
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def exists(names: Sequence[str], body: Formula, fresh: FreshNames | None = None) -> Formula:
    """Existential closure; renames the new binders if they shadow binders
    already present in `body` (unique-names-per-path invariant)."""
    return _quantify(Exists, names, body, fresh)


def forall(names: Sequence[str], body: Formula, fresh: FreshNames | None = None) -> Formula:
    return _quantify(Forall, names, body, fresh)


def _quantify(ctor, names, body, fresh):
    names = tuple(names)
    if not names:
        return body
    for n in names:
        if not _IDENT.match(n):
            raise FormulaError(f"bad variable name {n!r}")
    if len(set(names)) != len(names):
        raise FormulaError(f"repeated variable in quantifier block: {names}")
    inner = bound_vars(body)
    clash = [n for n in names if n in inner]
    if clash:
        if fresh is None:
            fresh = FreshNames(_max_gen_index(body) + 1)
        ren = {n: fresh.fresh() for n in clash}
        body = substitute(body, {n: Variable(v) for n, v in ren.items()})
        names = tuple(ren.get(n, n) for n in names)
    return ctor(names, body)


def _max_gen_index(f: Formula) -> int:
    worst = -1
    for name in bound_vars(f) | free_vars(f):
        m = re.fullmatch(r"_g(\d+)", name)
        if m:
            worst = max(worst, int(m.group(1)))
    return worst


def free_vars(f: Formula) -> set[str]:
    if isinstance(f, AtomF):
        return atom_vars(f.atom)
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (And, Or)):
        out: set[str] = set()
        for p in f.parts:
            out |= free_vars(p)
        return out
    return free_vars(f.body) - set(f.vars)


def bound_vars(f: Formula) -> set[str]:
    if isinstance(f, AtomF):
        return set()
    if isinstance(f, Not):
        return bound_vars(f.body)
    if isinstance(f, (And, Or)):
        out: set[str] = set()
        for p in f.parts:
            out |= bound_vars(p)
        return out
    return set(f.vars) | bound_vars(f.body)


def formula_atoms(f: Formula) -> Iterator[Atom]:
    if isinstance(f, AtomF):
        yield f.atom
    elif isinstance(f, Not):
        yield from formula_atoms(f.body)
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            yield from formula_atoms(p)
    else:
        yield from formula_atoms(f.body)


# --------------------------------------------------------- substitution

def substitute(f: Formula, sigma: Mapping[str, Term]) -> Formula:
    """Simultaneous capture-avoiding substitution on free occurrences."""
    if not sigma:
        return f
    return _subst(f, dict(sigma), FreshNames(_max_gen_index(f) + 1))


def _subst_term(t: Term, sigma: Mapping[str, Term]) -> Term:
    if isinstance(t, Variable):
        return sigma.get(t.name, t)
    if isinstance(t, Concat):
        return Concat(_subst_term(t.left, sigma), _subst_term(t.right, sigma))
    return t


def _subst_atom(a: Atom, sigma: Mapping[str, Term]) -> Atom:
    if isinstance(a, Subword):
        return Subword(_subst_term(a.t1, sigma), _subst_term(a.t2, sigma))
    if isinstance(a, Equal):
        return Equal(_subst_term(a.t1, sigma), _subst_term(a.t2, sigma))
    return CountEq(_subst_term(a.t1, sigma), a.a, _subst_term(a.t2, sigma), a.b)


def _subst(f: Formula, sigma: dict[str, Term], fresh: FreshNames) -> Formula:
    if isinstance(f, AtomF):
        return AtomF(_subst_atom(f.atom, sigma))
    if isinstance(f, Not):
        return Not(_subst(f.body, sigma, fresh))
    if isinstance(f, And):
        return And(tuple(_subst(p, sigma, fresh) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(_subst(p, sigma, fresh) for p in f.parts))
    live = {k: v for k, v in sigma.items() if k not in f.vars}
    live = {k: v for k, v in live.items() if k in free_vars(f.body)}
    if not live:
        return f
    captured = set()
    for t in live.values():
        captured |= term_vars(t)
    names = list(f.vars)
    ren: dict[str, Term] = {}
    for i, n in enumerate(names):
        if n in captured:
            nn = fresh.fresh()
            ren[n] = Variable(nn)
            names[i] = nn
    body = _subst(f.body, ren, fresh) if ren else f.body
    body = _subst(body, live, fresh)
    ctor = Exists if isinstance(f, Exists) else Forall
    return ctor(tuple(names), body)


# ---------------------------------------------------------- evaluation

def eval_qf(f: Formula, rho: Mapping[str, Word]) -> bool:
    """Standard boolean semantics of a quantifier-free formula."""
    if isinstance(f, AtomF):
        return eval_atom(f.atom, rho)
    if isinstance(f, Not):
        return not eval_qf(f.body, rho)
    if isinstance(f, And):
        return all(eval_qf(p, rho) for p in f.parts)
    if isinstance(f, Or):
        return any(eval_qf(p, rho) for p in f.parts)
    raise NotQuantifierFreeError(f"quantifier in quantifier-free evaluation: {type(f).__name__}")


def eval_atom(a: Atom, rho: Mapping[str, Word]) -> bool:
    from .words import embeds

    if isinstance(a, Subword):
        return embeds(_eval_text(a.t1, rho), _eval_text(a.t2, rho))
    if isinstance(a, Equal):
        return _eval_text(a.t1, rho) == _eval_text(a.t2, rho)
    return _eval_text(a.t1, rho).count(a.a) == _eval_text(a.t2, rho).count(a.b)


# ------------------------------------------------- fragment classification

def split_prenex(f: Formula) -> tuple[list[tuple[str, tuple[str, ...]]], Formula]:
    """Quantifier blocks (kind, vars) of a prenex formula plus its matrix.

    Raises NotPrenexError if a quantifier occurs below a connective.
    """
    blocks: list[tuple[str, tuple[str, ...]]] = []
    g = f
    while isinstance(g, (Exists, Forall)):
        kind = "E" if isinstance(g, Exists) else "A"
        if blocks and blocks[-1][0] == kind:
            blocks[-1] = (kind, blocks[-1][1] + g.vars)
        else:
            blocks.append((kind, g.vars))
        g = g.body
    for sub_f in _walk(g):
        if isinstance(sub_f, (Exists, Forall)):
            raise NotPrenexError("quantifier below a connective: formula is not prenex")
    return blocks, g


def _walk(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Not):
        yield from _walk(f.body)
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            yield from _walk(p)
    elif isinstance(f, (Exists, Forall)):
        yield from _walk(f.body)


def classify_fragment(f: Formula) -> tuple[int, str]:
    """Minimal (level, kind) with kind in Sigma/Pi/QuantifierFree.

    Level i counts quantifier blocks of a prenex formula; a quantifier-free
    formula reports (0, "QuantifierFree").
    """
    blocks, _ = split_prenex(f)
    if not blocks:
        return (0, "QuantifierFree")
    return (len(blocks), "Sigma" if blocks[0][0] == "E" else "Pi")


def prenex_exists(f: Formula) -> tuple[tuple[str, ...], Formula]:
    """Hoist all existential quantifiers of a Sigma_1-shaped formula.

    And/Or commute with the existential block because all binders are
    pairwise distinct along paths (construction invariant).  A Forall or a
    quantifier under Not is an error.
    """
    if isinstance(f, (AtomF,)):
        return (), f
    if isinstance(f, Not):
        for g in _walk(f.body):
            if isinstance(g, (Exists, Forall)):
                raise NotPrenexError("quantifier under negation is not Sigma_1")
        return (), f
    if isinstance(f, Forall):
        raise NotPrenexError("universal quantifier is not Sigma_1")
    if isinstance(f, Exists):
        inner, matrix = prenex_exists(f.body)
        return f.vars + inner, matrix
    parts_vars: list[str] = []
    parts_matrix: list[Formula] = []
    for p in f.parts:
        v, m = prenex_exists(p)
        parts_vars.extend(v)
        parts_matrix.append(m)
    seen = set()
    for v in parts_vars:
        if v in seen:
            raise NotPrenexError(f"binder {v!r} reused across branches; cannot hoist")
        seen.add(v)
    ctor = And if isinstance(f, And) else Or
    return tuple(parts_vars), ctor(tuple(parts_matrix))


def to_prenex_sigma1(f: Formula) -> Formula:
    names, matrix = prenex_exists(f)
    if not names:
        return matrix
    return Exists(names, matrix)


# ------------------------------------------------------ macro compilers

def projection_atom(v: Term, u: Term, onto: Iterable[str], alphabet: Alphabet) -> Formula:
    """Quantifier-free formula asserting v = projection of u onto `onto`:
    v embeds in u, per-letter counts agree on `onto`, and no other letter
    occurs in v."""
    keep = alphabet.require_subset(onto)
    parts: list[Formula] = [sub(v, u)]
    for b in keep:
        parts.append(cnt_eq(v, b, u, b))
    for a in alphabet:
        if a not in keep:
            parts.append(Not(sub(Constant(Word(a, alphabet)), v)))
    return land(*parts)


CountSide = Sequence[tuple[int, Term, str]]


def linear_count_formula(
    lhs: CountSide,
    rhs: CountSide,
    alphabet: Alphabet,
    fresh: FreshNames | None = None,
) -> Formula:
    """Sigma_1 formula for  sum c_i |t_i|_{a_i}  =  sum d_j |s_j|_{b_j}.

    A coefficient c becomes a c-fold concatenation.  Summands over several
    distinct letters are funnelled into one counting letter through fresh
    existential variables z with |z|_pivot = |t|_letter.
    """
    formula, _aux, _synth = _linear_count(lhs, rhs, alphabet, fresh or FreshNames())
    return formula


def _linear_count(lhs: CountSide, rhs: CountSide, alphabet: Alphabet, fresh: FreshNames):
    """Shared core: returns (formula, aux var list, synth fn)."""
    aux: list[str] = []
    conjuncts: list[Formula] = []
    synth_specs: list[tuple[str, str, Term, str]] = []  # (var, pivot, term, letter)

    def side_term(side: CountSide) -> tuple[Term, str]:
        for c, _t, a in side:
            if c < 0:
                raise FormulaError("linear count coefficients must be >= 0")
            if a not in alphabet:
                raise FormulaError(f"count letter {a!r} outside alphabet")
        live = [(c, t, a) for c, t, a in side if c > 0]
        if not live:
            return Constant(alphabet.epsilon()), alphabet.symbols[0]
        pivot = live[0][2]
        pieces: list[Term] = []
        for c, t, a in live:
            if a == pivot:
                payload = t
            else:
                z = fresh.fresh()
                aux.append(z)
                conjuncts.append(cnt_eq(Variable(z), pivot, t, a))
                synth_specs.append((z, pivot, t, a))
                payload = Variable(z)
            pieces.extend([payload] * c)
        return cat(*pieces), pivot

    lt, lp = side_term(lhs)
    rt, rp = side_term(rhs)
    conjuncts.append(cnt_eq(lt, lp, rt, rp))
    matrix = land(*conjuncts)
    formula = exists(aux, matrix) if aux else matrix

    def synth(env: Mapping[str, Word]) -> dict[str, Word]:
        out: dict[str, Word] = {}
        scope = {**env}
        for z, pivot, t, a in synth_specs:
            n = eval_term(t, scope).text.count(a)
            out[z] = Word(pivot * n, alphabet)
            scope[z] = out[z]
        return out

    return formula, aux, synth


def prefix_formula(u: Term, w: Term, fresh: FreshNames | None = None) -> Formula:
    """u is a prefix of w:  exists v. w = u v."""
    fresh = fresh or FreshNames()
    v = fresh.fresh()
    return Exists((v,), eq(w, Concat(u, Variable(v))))


def suffix_formula(u: Term, w: Term, fresh: FreshNames | None = None) -> Formula:
    """u is a suffix of w:  exists v. w = v u."""
    fresh = fresh or FreshNames()
    v = fresh.fresh()
    return Exists((v,), eq(w, Concat(Variable(v), u)))


# ------------------------------------------------------------ statistics

@dataclass(frozen=True)
class FormulaStats:
    quantifiers: int
    atoms: int
    constant_length: int

    def lines(self) -> list[str]:
        return [
            f"quantifiers={self.quantifiers}",
            f"atoms={self.atoms}",
            f"constant_length={self.constant_length}",
        ]


def formula_stats(f: Formula) -> FormulaStats:
    quant = 0
    atoms = 0
    const_len = 0

    def term_consts(t: Term) -> int:
        if isinstance(t, Constant):
            return len(t.word)
        if isinstance(t, Concat):
            return term_consts(t.left) + term_consts(t.right)
        return 0

    for g in _walk(f):
        if isinstance(g, (Exists, Forall)):
            quant += len(g.vars)
        elif isinstance(g, AtomF):
            atoms += 1
            const_len += term_consts(g.atom.t1) + term_consts(g.atom.t2)
    return FormulaStats(quant, atoms, const_len)


# ------------------------------------------------------------ text format
#
# (sub t t) (eq t t) (cnt= t a t b) (not f) (and f ...) (or f ...)
# (exists (x y) f) (forall (x) f); terms: "word" constants with "()" for
# the empty word, bare identifiers for variables, (cat t t).

def print_term(t: Term) -> str:
    if isinstance(t, Constant):
        return f'"{t.word.text}"' if t.word.text else '"()"'
    if isinstance(t, Variable):
        return t.name
    return f"(cat {print_term(t.left)} {print_term(t.right)})"


def print_formula(f: Formula) -> str:
    if isinstance(f, AtomF):
        a = f.atom
        if isinstance(a, Subword):
            return f"(sub {print_term(a.t1)} {print_term(a.t2)})"
        if isinstance(a, Equal):
            return f"(eq {print_term(a.t1)} {print_term(a.t2)})"
        return f"(cnt= {print_term(a.t1)} {a.a} {print_term(a.t2)} {a.b})"
    if isinstance(f, Not):
        return f"(not {print_formula(f.body)})"
    if isinstance(f, And):
        return "(and " + " ".join(print_formula(p) for p in f.parts) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(print_formula(p) for p in f.parts) + ")"
    head = "exists" if isinstance(f, Exists) else "forall"
    return f"({head} (" + " ".join(f.vars) + f") {print_formula(f.body)})"


_TOKEN = re.compile(r'\s*(?:(\()|(\))|("(?:[^"\\]|\\.)*")|([^()\s"]+))')


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            break
        if m.group(1):
            out.append(("open", "(", m.start(1)))
        elif m.group(2):
            out.append(("close", ")", m.start(2)))
        elif m.group(3):
            out.append(("str", m.group(3), m.start(3)))
        else:
            out.append(("tok", m.group(4), m.start(4)))
        pos = m.end()
    rest = text[pos:].strip()
    if rest:
        raise ParseError(f"unexpected character {rest[0]!r}", pos)
    return out


def used_symbols(f: Formula) -> set[str]:
    """Every symbol occurring in a constant or as a count letter of f."""
    syms: set[str] = set()

    def term(t: Term):
        if isinstance(t, Constant):
            syms.update(t.word.text)
        elif isinstance(t, Concat):
            term(t.left)
            term(t.right)

    for a in formula_atoms(f):
        term(a.t1)
        term(a.t2)
        if isinstance(a, CountEq):
            syms.add(a.a)
            syms.add(a.b)
    return syms


def infer_alphabet(f: Formula) -> Alphabet:
    """Alphabet spanned by f's constants and count letters, in pool order.
    Prefer passing the ambient alphabet explicitly; inference cannot see
    symbols that only witnesses would use."""
    from .words import SYMBOL_POOL

    syms = used_symbols(f) or {"a"}
    return Alphabet([s for s in SYMBOL_POOL if s in syms])


class _Parser:
    def __init__(self, tokens: list[tuple[str, str, int]], alphabet: Alphabet, strict: bool = True):
        self.toks = tokens
        self.i = 0
        self.alphabet = alphabet
        self.strict = strict

    def peek(self):
        if self.i >= len(self.toks):
            raise ParseError("unexpected end of input", self.toks[-1][2] if self.toks else 0)
        return self.toks[self.i]

    def next(self):
        t = self.peek()
        self.i += 1
        return t

    def expect(self, kind: str):
        k, v, p = self.next()
        if k != kind:
            raise ParseError(f"expected {kind}, got {v!r}", p)
        return v, p

    def parse_term(self) -> Term:
        kind, val, pos = self.next()
        if kind == "str":
            body = val[1:-1]
            if body == "()":
                return Constant(self.alphabet.epsilon())
            return Constant(Word(body, self.alphabet))
        if kind == "tok":
            self._check_var(val, pos)
            return Variable(val)
        if kind == "open":
            k2, v2, p2 = self.next()
            if k2 != "tok" or v2 != "cat":
                raise ParseError(f"expected cat in term, got {v2!r}", p2)
            left = self.parse_term()
            right = self.parse_term()
            self.expect("close")
            return Concat(left, right)
        raise ParseError(f"unexpected {val!r} in term", pos)

    def _check_var(self, name: str, pos: int):
        if not _IDENT.match(name):
            raise ParseError(f"bad variable name {name!r}", pos)
        if self.strict and len(name) == 1 and name in self.alphabet:
            raise ParseError(f"variable {name!r} collides with an alphabet symbol", pos)

    def parse_letter(self) -> str:
        kind, val, pos = self.next()
        ok = kind == "tok" and len(val) == 1 and (val in self.alphabet or not self.strict)
        if not ok:
            raise ParseError(f"expected an alphabet letter, got {val!r}", pos)
        return val

    def parse_formula(self) -> Formula:
        kind, val, pos = self.next()
        if kind != "open":
            raise ParseError(f"expected '(', got {val!r}", pos)
        k2, head, p2 = self.next()
        if k2 != "tok":
            raise ParseError(f"expected operator, got {head!r}", p2)
        if head == "sub":
            t1, t2 = self.parse_term(), self.parse_term()
            self.expect("close")
            return AtomF(Subword(t1, t2))
        if head == "eq":
            t1, t2 = self.parse_term(), self.parse_term()
            self.expect("close")
            return AtomF(Equal(t1, t2))
        if head == "cnt=":
            t1 = self.parse_term()
            a = self.parse_letter()
            t2 = self.parse_term()
            b = self.parse_letter()
            self.expect("close")
            return AtomF(CountEq(t1, a, t2, b))
        if head == "not":
            body = self.parse_formula()
            self.expect("close")
            return Not(body)
        if head in ("and", "or"):
            parts = []
            while self.peek()[0] != "close":
                parts.append(self.parse_formula())
            self.next()
            if not parts:
                raise ParseError(f"empty {head}", p2)
            return And(tuple(parts)) if head == "and" else Or(tuple(parts))
        if head in ("exists", "forall"):
            self.expect("open")
            names = []
            while self.peek()[0] == "tok":
                k3, v3, p3 = self.next()
                self._check_var(v3, p3)
                names.append(v3)
            self.expect("close")
            if not names:
                raise ParseError(f"empty quantifier block", p2)
            body = self.parse_formula()
            self.expect("close")
            ctor = exists if head == "exists" else forall
            return ctor(names, body)
        raise ParseError(f"unknown operator {head!r}", p2)


def _rebuild_constants(f: Formula, alphabet: Alphabet) -> Formula:
    def term(t: Term) -> Term:
        if isinstance(t, Constant):
            return Constant(Word(t.word.text, alphabet))
        if isinstance(t, Concat):
            return Concat(term(t.left), term(t.right))
        return t

    def atom(a: Atom) -> Atom:
        if isinstance(a, Subword):
            return Subword(term(a.t1), term(a.t2))
        if isinstance(a, Equal):
            return Equal(term(a.t1), term(a.t2))
        return CountEq(term(a.t1), a.a, term(a.t2), a.b)

    def go(g: Formula) -> Formula:
        if isinstance(g, AtomF):
            return AtomF(atom(g.atom))
        if isinstance(g, Not):
            return Not(go(g.body))
        if isinstance(g, And):
            return And(tuple(go(p) for p in g.parts))
        if isinstance(g, Or):
            return Or(tuple(go(p) for p in g.parts))
        ctor = Exists if isinstance(g, Exists) else Forall
        return ctor(g.vars, go(g.body))

    return go(f)


def parse_formula(text: str, alphabet: Alphabet | None = None) -> Formula:
    toks = _tokenize(text)
    if not toks:
        raise ParseError("empty input", 0)
    if alphabet is None:
        lenient = _Parser(toks, Alphabet(SYMBOL_POOL_ALPHABET), strict=False)
        draft = lenient.parse_formula()
        if lenient.i != len(toks):
            raise ParseError(f"trailing input {toks[lenient.i][1]!r}", toks[lenient.i][2])
        return _rebuild_constants(draft, infer_alphabet(draft))
    p = _Parser(toks, alphabet)
    f = p.parse_formula()
    if p.i != len(toks):
        raise ParseError(f"trailing input {toks[p.i][1]!r}", toks[p.i][2])
    return f
