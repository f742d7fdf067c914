"""Deciding compiled Sigma_1 formulas on concrete tuples.

Three routes, in decreasing strength:

* :func:`check_with_plan` -- run the plan's witness synthesizer and evaluate
  the matrix once.  Fast, verdict is only meaningful for positives.
* :func:`check_sigma1_bounded` with a plan -- iterate the plan's complete
  witness enumeration; with `plan.complete` a fruitless exhaustion proves
  falsity.
* :func:`check_sigma1_bounded` without a plan -- generic nested search over
  the existential prefix within length bounds, length-lexicographic, the
  innermost variable varying fastest.

Truth of Sigma_1 formulas over this structure is undecidable in general, so
`Unknown` is a first-class outcome whenever bounds are not known complete.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Optional, Union

from .words import Alphabet, Word, words_up_to
from .formulas import (
    Formula,
    FormulaError,
    eval_qf,
    free_vars,
    split_prenex,
)


class SynthesisError(ValueError):
    """Witness synthesis failed (e.g. an invalid certificate).

    Distinct from the matrix merely evaluating to false."""


class NotSigma1Error(FormulaError):
    pass


# ------------------------------------------------------------- bounds
#
# bound := n | len(x) | cnt(x,a) | bound+bound | nat*bound | bound*bound
# (the last production is an artifact extension; some construction bounds
# are quadratic in the free variables' lengths).

class Bound:
    def eval(self, rho: Mapping[str, Word]) -> int:
        raise NotImplementedError

    def text(self) -> str:
        raise NotImplementedError

    def __repr__(self):
        return f"Bound({self.text()})"


@dataclass(frozen=True, repr=False)
class BConst(Bound):
    n: int

    def eval(self, rho):
        return self.n

    def text(self):
        return str(self.n)


@dataclass(frozen=True, repr=False)
class BLen(Bound):
    var: str

    def eval(self, rho):
        if self.var not in rho:
            raise SynthesisError(f"bound refers to unassigned variable {self.var!r}")
        return len(rho[self.var])

    def text(self):
        return f"len({self.var})"


@dataclass(frozen=True, repr=False)
class BCnt(Bound):
    var: str
    sym: str

    def eval(self, rho):
        if self.var not in rho:
            raise SynthesisError(f"bound refers to unassigned variable {self.var!r}")
        return rho[self.var].text.count(self.sym)

    def text(self):
        return f"cnt({self.var},{self.sym})"


@dataclass(frozen=True, repr=False)
class BSum(Bound):
    left: Bound
    right: Bound

    def eval(self, rho):
        return self.left.eval(rho) + self.right.eval(rho)

    def text(self):
        return f"{self.left.text()}+{self.right.text()}"


@dataclass(frozen=True, repr=False)
class BProd(Bound):
    left: Bound
    right: Bound

    def eval(self, rho):
        return self.left.eval(rho) * self.right.eval(rho)

    def text(self):
        def wrap(b: Bound) -> str:
            t = b.text()
            return f"({t})" if "+" in t else t

        return f"{wrap(self.left)}*{wrap(self.right)}"


def bc(n: int) -> Bound:
    return BConst(n)


def blen(var: str) -> Bound:
    return BLen(var)


def bcnt(var: str, sym: str) -> Bound:
    return BCnt(var, sym)


_BOUND_TOKEN = re.compile(r"\s*(\d+|len|cnt|[+*(),]|[A-Za-z_][A-Za-z0-9_]*|#)")


def parse_bound(text: str) -> Bound:
    toks: list[str] = []
    pos = 0
    while pos < len(text):
        m = _BOUND_TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad bound expression at {pos}: {text!r}")
        toks.append(m.group(1))
        pos = m.end()

    i = 0

    def peek():
        return toks[i] if i < len(toks) else None

    def take(expected=None):
        nonlocal i
        if i >= len(toks):
            raise ValueError(f"bound expression ended early: {text!r}")
        t = toks[i]
        if expected is not None and t != expected:
            raise ValueError(f"expected {expected!r} in bound, got {t!r}")
        i += 1
        return t

    def atom() -> Bound:
        t = take()
        if t == "(":
            b = expr()
            take(")")
            return b
        if t.isdigit():
            return BConst(int(t))
        if t == "len":
            take("(")
            v = take()
            take(")")
            return BLen(v)
        if t == "cnt":
            take("(")
            v = take()
            take(",")
            s = take()
            take(")")
            return BCnt(v, s)
        raise ValueError(f"unexpected {t!r} in bound {text!r}")

    def product() -> Bound:
        b = atom()
        while peek() == "*":
            take()
            b = BProd(b, atom())
        return b

    def expr() -> Bound:
        b = product()
        while peek() == "+":
            take()
            b = BSum(b, product())
        return b

    out = expr()
    if i != len(toks):
        raise ValueError(f"trailing tokens in bound {text!r}")
    return out


BoundsArg = Union[int, Mapping[str, Union[int, Bound]], None]


def _bound_for(bounds: BoundsArg, var: str, rho: Mapping[str, Word], default: int) -> int:
    if bounds is None:
        return default
    if isinstance(bounds, int):
        return bounds
    b = bounds.get(var)
    if b is None:
        return default
    if isinstance(b, int):
        return b
    return b.eval(rho)


DEFAULT_UNIFORM_BOUND = 12


# ------------------------------------------------------------ certificates

@dataclass(frozen=True)
class TransducerRun:
    """An accepting run given as the sequence of transition indices."""

    transitions: tuple[int, ...]


@dataclass(frozen=True)
class MachineRun:
    """An accepting machine run given as its instruction word."""

    instruction_word: str


Certificate = Optional[Union[TransducerRun, MachineRun]]


# ------------------------------------------------------------ plans

class WitnessEnumeration:
    """Iterable of candidate witness assignments plus a completeness flag.

    `complete` is only meaningful after the iterable is exhausted: True
    means every possible witness (within the plan's bounds) was produced.
    """

    def __init__(self, it: Iterable[dict], complete: bool = True):
        self._it = iter(it)
        self.complete = complete

    def __iter__(self):
        return self._it


@dataclass
class WitnessPlan:
    """Per-formula certificate synthesizer plus completeness metadata.

    synth(rho, cert) must return an assignment of the whole existential
    prefix whose merge with rho satisfies the matrix whenever rho is in the
    relation and the certificate (if any) is valid.  enumerate(rho) yields
    candidate witness assignments; if it reports itself complete and none
    satisfies the matrix, the formula is false at rho.
    """

    formula: Formula
    synth: Callable[[Mapping[str, Word], Certificate], dict]
    bounds: dict[str, Bound] = field(default_factory=dict)
    complete: bool = False
    enumerate: Optional[Callable[[Mapping[str, Word]], WitnessEnumeration]] = None
    procedure: str = "adhoc"
    params: dict = field(default_factory=dict)

    def bound_texts(self) -> dict[str, str]:
        return {v: b.text() for v, b in self.bounds.items()}


# ------------------------------------------------------------ results

@dataclass
class CheckResult:
    status: str  # "true" | "false" | "unknown"
    witness: Optional[dict] = None
    bound_used: Optional[dict] = None
    note: str = ""

    @property
    def is_true(self) -> bool:
        return self.status == "true"

    @property
    def is_false(self) -> bool:
        return self.status == "false"

    @property
    def is_unknown(self) -> bool:
        return self.status == "unknown"

    def __bool__(self):
        raise TypeError("CheckResult has three outcomes; test .status explicitly")


# ------------------------------------------------------------ operations

def enumerate_words(alphabet: Alphabet, max_len: int) -> Iterator[Word]:
    """All words of length <= max_len, length-lexicographic in the
    alphabet's fixed symbol order."""
    if max_len < 0:
        raise ValueError("max_len must be >= 0")
    return words_up_to(alphabet, max_len)


def sigma1_parts(f: Formula) -> tuple[tuple[str, ...], Formula]:
    """Existential prefix and matrix of a prenex Sigma_1 formula."""
    blocks, matrix = split_prenex(f)
    if len(blocks) > 1 or (blocks and blocks[0][0] != "E"):
        raise NotSigma1Error("formula is not prenex Sigma_1")
    return (blocks[0][1] if blocks else ()), matrix


def check_with_plan(plan: WitnessPlan, rho: Mapping[str, Word], cert: Certificate = None) -> bool:
    """Synthesize the plan's witness for rho and evaluate the matrix.

    Raises SynthesisError for invalid certificates; a False return always
    means the synthesized assignment fails the matrix.
    """
    exist, matrix = sigma1_parts(plan.formula)
    missing = free_vars(plan.formula) - set(exist) - set(rho)
    if missing:
        raise SynthesisError(f"assignment misses free variables {sorted(missing)}")
    witness = plan.synth(rho, cert)
    env = {**rho, **witness}
    lacking = [v for v in exist if v not in env]
    if lacking:
        raise SynthesisError(f"plan synthesized no value for {lacking}")
    return eval_qf(matrix, env)


def check_sigma1_bounded(
    f: Formula,
    rho: Mapping[str, Word],
    bounds: BoundsArg = None,
    complete: bool = False,
    plan: Optional[WitnessPlan] = None,
    alphabet: Optional[Alphabet] = None,
    memo: Optional[dict] = None,
) -> CheckResult:
    """Bounded-complete decision of a prenex Sigma_1 formula at rho.

    With a plan, iterates the plan's witness enumeration (complete by
    construction when the plan says so).  Without one, runs a nested
    length-lex search over the existential prefix within `bounds` (uniform
    int, or per-variable ints/Bound expressions; default 12).  False is only
    reported when the exhausted enumeration or bounds are flagged complete;
    otherwise exhaustion yields Unknown.
    """
    exist, matrix = sigma1_parts(f)
    missing = free_vars(f) - set(exist) - set(rho)
    if missing:
        raise FormulaError(f"assignment misses free variables {sorted(missing)}")

    if not exist:
        ok = eval_qf(matrix, dict(rho))
        return CheckResult("true" if ok else "false", witness={} if ok else None)

    if plan is not None and plan.enumerate is not None:
        return _check_via_enumeration(plan, exist, matrix, rho, memo)

    from ._search import bounded_search

    effective: BoundsArg = bounds
    if effective is None and plan is not None and plan.bounds:
        effective = plan.bounds
    specs: dict[str, Union[int, Bound]] = {}
    for v in exist:
        if effective is None:
            specs[v] = DEFAULT_UNIFORM_BOUND
        elif isinstance(effective, int):
            specs[v] = effective
        else:
            specs[v] = effective.get(v, DEFAULT_UNIFORM_BOUND)
    is_complete = complete or (plan.complete if plan is not None else False)
    if alphabet is None:
        alphabet = _ambient_alphabet(f, rho)
    witness, exhausted = bounded_search(exist, matrix, dict(rho), specs, alphabet)
    used = {v: (s if isinstance(s, int) else s.text()) for v, s in specs.items()}
    if witness is not None:
        return CheckResult("true", witness=witness, bound_used=used)
    if exhausted and is_complete:
        return CheckResult("false", bound_used=used, note="bounds exhausted with complete flag")
    return CheckResult("unknown", bound_used=used)


def _check_via_enumeration(plan, exist, matrix, rho, memo) -> CheckResult:
    enum = plan.enumerate(rho)
    groups = None
    if memo is not None:
        groups = _matrix_groups(plan, exist, matrix)
    for cand in enum:
        env = {**rho, **cand}
        if any(v not in env for v in exist):
            continue
        if groups is None:
            ok = eval_qf(matrix, env)
        else:
            ok = _eval_grouped(groups, env, memo)
        if ok:
            return CheckResult("true", witness={v: env[v] for v in exist})
    if enum.complete and plan.complete:
        return CheckResult("false", note="witness enumeration exhausted, plan complete")
    return CheckResult("unknown", note="witness enumeration exhausted, bounds incomplete")


# Conjunct grouping: split a top-level And by connected components of shared
# existential variables so group evaluations can be memoized across checks
# of many related tuples (`memo` maps (group id, relevant values) -> bool).

def _matrix_groups(plan, exist, matrix):
    cache_key = "_groups"
    cached = plan.params.get(cache_key)
    if cached is not None:
        return cached
    from .formulas import And, free_vars as fv

    parts = list(matrix.parts) if isinstance(matrix, And) else [matrix]
    exist_set = set(exist)
    parent = list(range(len(parts)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        parent[find(i)] = find(j)

    owner: dict[str, int] = {}
    part_vars = []
    for i, p in enumerate(parts):
        vs = fv(p)
        part_vars.append(vs)
        for v in vs & exist_set:
            if v in owner:
                union(i, owner[v])
            else:
                owner[v] = i
    grouped: dict[int, list[int]] = {}
    for i in range(len(parts)):
        grouped.setdefault(find(i), []).append(i)
    groups = []
    for members in grouped.values():
        vs = set()
        for i in members:
            vs |= part_vars[i]
        groups.append((tuple(sorted(vs)), [parts[i] for i in members]))
    plan.params[cache_key] = groups
    return groups


def _eval_grouped(groups, env, memo) -> bool:
    for gid, (vs, parts) in enumerate(groups):
        key = (gid, tuple(env[v].text for v in vs if v in env))
        hit = memo.get(key)
        if hit is None:
            hit = all(eval_qf(p, env) for p in parts)
            memo[key] = hit
        if not hit:
            return False
    return True


def _ambient_alphabet(f: Formula, rho: Mapping[str, Word]) -> Alphabet:
    """Union of the assignment's and the formula constants' alphabets.

    Constants carry their declared alphabet, so a formula built over an
    ambient alphabet keeps that ambient visible here even when the constant
    texts use fewer symbols."""
    from .formulas import Constant, formula_atoms, term_flatten
    from .words import SYMBOL_POOL

    syms: set[str] = set()
    for a in formula_atoms(f):
        for t in (a.t1, a.t2):
            for leaf in term_flatten(t):
                if isinstance(leaf, Constant):
                    syms |= set(leaf.word.alphabet.symbols)
        if hasattr(a, "a"):
            syms.add(a.a)
            syms.add(a.b)
    for w in rho.values():
        syms |= set(w.alphabet.symbols)
    if not syms:
        syms = {"a"}
    return Alphabet([s for s in SYMBOL_POOL if s in syms])
