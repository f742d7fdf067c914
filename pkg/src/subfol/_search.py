"""Generic nested witness search for prenex Sigma_1 matrices.

Naive length-lexicographic enumeration of every existential variable is
hopeless even at desk scale, so the search drives each variable from the
atoms that mention it: equalities over concatenations anchor exact segments,
commutation equations enumerate powers of the primitive root, count atoms
pin letter multiplicities, and subword atoms against a closed word restrict
candidates to its (constrained) downward closure.  Candidate sets are always
supersets of the values the driving atom permits within the length bound, so
the search stays complete; the full matrix is still what accepts a witness.

The witness returned is the first satisfying tuple in length-lexicographic
order with the innermost variable varying fastest, which coincides with what
the naive nested enumeration would return.
"""

from __future__ import annotations

import itertools
from typing import Mapping, Optional, Union

from .words import Alphabet, Word, embeds
from .formulas import (
    And,
    AtomF,
    Concat,
    Constant,
    CountEq,
    Equal,
    Exists,
    Forall,
    Formula,
    Not,
    NotQuantifierFreeError,
    Or,
    Subword,
    Term,
    Variable,
    eval_term,
    _eval_text,
    term_flatten,
    term_vars,
)

CANDIDATE_CAP = 200_000


class _Lit:
    __slots__ = ("atom", "neg", "vars", "unassigned", "state", "parent")

    def __init__(self, atom, neg, vars):
        self.atom = atom
        self.neg = neg
        self.vars = vars
        self.unassigned = 0
        self.state = 0
        self.parent = None


class _Gate:
    __slots__ = ("kind", "children", "parent", "n_true", "n_false", "state")

    def __init__(self, kind, children):
        self.kind = kind
        self.children = children
        self.parent = None
        self.n_true = 0
        self.n_false = 0
        self.state = 0


def _nnf(f: Formula, neg: bool):
    if isinstance(f, AtomF):
        return _Lit(f.atom, neg, frozenset(term_vars(f.atom.t1) | term_vars(f.atom.t2)))
    if isinstance(f, Not):
        return _nnf(f.body, not neg)
    if isinstance(f, And):
        return _Gate("or" if neg else "and", [_nnf(p, neg) for p in f.parts])
    if isinstance(f, Or):
        return _Gate("and" if neg else "or", [_nnf(p, neg) for p in f.parts])
    raise NotQuantifierFreeError("quantifier inside a Sigma_1 matrix")


def _eval_lit(lit: _Lit, env) -> bool:
    a = lit.atom
    if isinstance(a, Subword):
        val = embeds(_eval_text(a.t1, env), _eval_text(a.t2, env))
    elif isinstance(a, Equal):
        val = _eval_text(a.t1, env) == _eval_text(a.t2, env)
    else:
        val = _eval_text(a.t1, env).count(a.a) == _eval_text(a.t2, env).count(a.b)
    return val != lit.neg


class _Engine:
    def __init__(self, exist, matrix, rho, specs, alphabet: Alphabet):
        self.alphabet = alphabet
        self.env: dict[str, Word] = dict(rho)
        self.exist = list(exist)
        self.specs = specs
        self.incomplete = False
        root = _nnf(matrix, False)
        if isinstance(root, _Lit):
            root = _Gate("and", [root])
        self.root = root
        self.lits: list[_Lit] = []
        self.lits_by_var: dict[str, list[_Lit]] = {v: [] for v in exist}
        self._wire(root, None)
        self.trail: list = []
        for lit in self.lits:
            lit.unassigned = sum(1 for v in lit.vars if v not in self.env)
            if lit.unassigned == 0:
                self._set_lit(lit, 1 if _eval_lit(lit, self.env) else -1)

    def _wire(self, node, parent):
        node.parent = parent
        if isinstance(node, _Lit):
            self.lits.append(node)
            for v in node.vars:
                if v in self.lits_by_var:
                    self.lits_by_var[v].append(node)
        else:
            for c in node.children:
                self._wire(c, node)

    # -------------------------------------------------- propagation

    def _set_lit(self, lit: _Lit, val: int):
        self.trail.append(("lit", lit))
        lit.state = val
        self._bump(lit.parent, val)

    def _bump(self, gate: Optional[_Gate], child_val: int):
        while gate is not None:
            if child_val == 1:
                gate.n_true += 1
                self.trail.append(("true", gate))
            else:
                gate.n_false += 1
                self.trail.append(("false", gate))
            if gate.state != 0:
                return
            if gate.kind == "and":
                new = -1 if gate.n_false else (1 if gate.n_true == len(gate.children) else 0)
            else:
                new = 1 if gate.n_true else (-1 if gate.n_false == len(gate.children) else 0)
            if new == 0:
                return
            self.trail.append(("state", gate))
            gate.state = new
            child_val = new
            gate = gate.parent

    def _assign(self, x: str, w: Word):
        self.env[x] = w
        self.trail.append(("env", x))
        for lit in self.lits_by_var[x]:
            lit.unassigned -= 1
            self.trail.append(("unassigned", lit))
            if lit.unassigned == 0 and lit.state == 0:
                self._set_lit(lit, 1 if _eval_lit(lit, self.env) else -1)

    def _undo(self, mark: int):
        while len(self.trail) > mark:
            kind, obj = self.trail.pop()
            if kind == "lit":
                obj.state = 0
            elif kind == "true":
                obj.n_true -= 1
            elif kind == "false":
                obj.n_false -= 1
            elif kind == "state":
                obj.state = 0
            elif kind == "unassigned":
                obj.unassigned += 1
            else:
                del self.env[obj]

    # -------------------------------------------------- drivers

    def _required_now(self, lit: _Lit) -> bool:
        node = lit
        gate = lit.parent
        while gate is not None:
            if gate.state != 0:
                return False
            if gate.kind == "or" and gate.n_false != len(gate.children) - 1:
                return False
            node = gate
            gate = gate.parent
        return True

    def _closed(self, t: Term, skip: str) -> bool:
        return all(v in self.env for v in term_vars(t) if v != skip)

    def candidates(self, x: str, bound: int) -> list[Word]:
        env = self.env
        pins: dict[str, int] = {}
        uppers: list[str] = []
        lowers: list[str] = []
        not_contains: list[str] = []
        forbidden: set[str] = set()
        exact: Optional[list[str]] = None
        anchored: Optional[list[str]] = None
        commut: Optional[list[str]] = None
        unsat = False

        def closed_leaves(leaves) -> Optional[str]:
            out = []
            for leaf in leaves:
                if isinstance(leaf, Constant):
                    out.append(leaf.word.text)
                elif isinstance(leaf, Variable) and leaf.name in env:
                    out.append(env[leaf.name].text)
                else:
                    return None
            return "".join(out)

        for lit in self.lits_by_var[x]:
            if lit.state != 0 or not self._required_now(lit):
                continue
            if any(v != x and v not in env for v in lit.vars):
                continue
            a = lit.atom
            if not lit.neg and isinstance(a, Equal):
                got = self._from_equal(a, x, bound)
                if got is None:
                    continue
                kind, vals = got
                if kind == "exact":
                    exact = vals if exact is None else [v for v in exact if v in set(vals)]
                elif kind == "anchored":
                    if anchored is None or len(vals) < len(anchored):
                        anchored = vals
                else:
                    if commut is None or len(vals) < len(commut):
                        commut = vals
            elif not lit.neg and isinstance(a, CountEq):
                pin = self._from_count(a, x)
                if pin == "unsat":
                    unsat = True
                    break
                if pin is not None:
                    s, n = pin
                    if s in pins and pins[s] != n:
                        unsat = True
                        break
                    pins[s] = n
            elif isinstance(a, Subword):
                f1, f2 = term_flatten(a.t1), term_flatten(a.t2)
                if not lit.neg:
                    if any(isinstance(l, Variable) and l.name == x for l in f1):
                        w2 = closed_leaves(f2)
                        if w2 is not None and not any(
                            isinstance(l, Variable) and l.name == x for l in f2
                        ):
                            uppers.append(w2)
                    elif f2 == [Variable(x)]:
                        w1 = closed_leaves(f1)
                        if w1 is not None:
                            lowers.append(w1)
                else:
                    if f2 == [Variable(x)]:
                        w1 = closed_leaves(f1)
                        if w1 is not None:
                            if len(w1) == 1:
                                forbidden.add(w1)
                            else:
                                not_contains.append(w1)

        if unsat:
            return []

        allowed = [s for s in self.alphabet.symbols if s not in forbidden]
        source: Optional[list[str]] = None
        if exact is not None:
            source = exact
        elif commut is not None and anchored is not None:
            source = commut if len(commut) <= len(anchored) else anchored
        elif commut is not None:
            source = commut
        elif anchored is not None:
            source = anchored
        elif uppers:
            W = min(uppers, key=len)
            source = self._subwords_of(W, bound, pins, forbidden)
        elif pins:
            source = self._pinned_words(pins, allowed, bound)
        else:
            source = self._all_words(allowed, bound)
        if source is None:
            self.incomplete = True
            source = self._all_words(allowed, min(bound, 3)) or []

        idx = {s: i for i, s in enumerate(self.alphabet.symbols)}
        out = []
        seen = set()
        for txt in source:
            if txt in seen:
                continue
            seen.add(txt)
            if len(txt) > bound:
                continue
            if any(c not in idx for c in txt):
                continue
            if forbidden and any(c in forbidden for c in txt):
                continue
            if pins and any(txt.count(s) != n for s, n in pins.items()):
                continue
            if uppers and not all(embeds(txt, W) for W in uppers):
                continue
            if lowers and not all(embeds(u, txt) for u in lowers):
                continue
            if not_contains and any(embeds(u, txt) for u in not_contains):
                continue
            out.append(txt)
        out.sort(key=lambda t: (len(t), tuple(idx[c] for c in t)))
        return [Word(t, self.alphabet) for t in out]

    def _from_equal(self, a: Equal, x: str, bound: int):
        env = self.env
        f1, f2 = term_flatten(a.t1), term_flatten(a.t2)

        def is_x(leaf):
            return isinstance(leaf, Variable) and leaf.name == x

        def closed_text(leaves):
            out = []
            for leaf in leaves:
                if isinstance(leaf, Constant):
                    out.append(leaf.word.text)
                elif isinstance(leaf, Variable) and leaf.name in env:
                    out.append(env[leaf.name].text)
                else:
                    return None
            return "".join(out)

        n1, n2 = sum(map(is_x, f1)), sum(map(is_x, f2))
        # one side closed, x on the other
        for side, other, nx in ((f1, f2, n2), (f2, f1, n1)):
            if any(is_x(l) for l in side):
                continue
            W = closed_text(side)
            if W is None:
                continue
            k = sum(map(is_x, other))
            if k == 0:
                return None
            closed_len = 0
            pieces = []
            ok = True
            for leaf in other:
                if is_x(leaf):
                    pieces.append(None)
                else:
                    t = closed_text([leaf])
                    if t is None:
                        ok = False
                        break
                    pieces.append(t)
                    closed_len += len(t)
            if ok:
                rem = len(W) - closed_len
                if rem < 0 or rem % k:
                    return ("exact", [])
                lx = rem // k
                off = 0
                cand = None
                good = True
                for p in pieces:
                    if p is None:
                        seg = W[off : off + lx]
                        if cand is None:
                            cand = seg
                        elif cand != seg:
                            good = False
                            break
                        off += lx
                    else:
                        if W[off : off + len(p)] != p:
                            good = False
                            break
                        off += len(p)
                return ("exact", [cand] if good and cand is not None else [])
            # prefix/suffix anchored: x once, closed prefix before it
            if k == 1:
                i = next(j for j, l in enumerate(other) if is_x(l))
                pre = closed_text(other[:i])
                post = closed_text(other[i + 1 :])
                if pre is not None and post is not None:
                    if len(pre) + len(post) > len(W):
                        return ("exact", [])
                    seg = W[len(pre) : len(W) - len(post)]
                    if W.startswith(pre) and (not post or W.endswith(post)):
                        return ("exact", [seg])
                    return ("exact", [])
                if pre is not None:
                    if not W.startswith(pre):
                        return ("exact", [])
                    base = W[len(pre) :]
                    return ("anchored", [base[:j] for j in range(len(base) + 1)])
                if post is not None:
                    if post and not W.endswith(post):
                        return ("exact", [])
                    base = W[: len(W) - len(post)]
                    return ("anchored", [base[j:] for j in range(len(base) + 1)])
            return None
        # commutation-shaped: x first on one side, last on the other
        if n1 == 1 and n2 == 1:
            for first, last in ((f1, f2), (f2, f1)):
                if is_x(first[0]) and is_x(last[-1]):
                    cA = closed_text(first[1:])
                    cB = closed_text(last[:-1])
                    if cA is None or cB is None or len(cA) != len(cB):
                        continue
                    if not cA:
                        return None
                    reps = cB * (bound // max(1, len(cB)) + 2)
                    cands = []
                    for L in range(bound + 1):
                        t = reps[:L]
                        if t + cA == cB + t:
                            cands.append(t)
                    return ("commut", cands)
        return None

    def _from_count(self, a: CountEq, x: str):
        env = self.env

        def side_info(t: Term, sym: str):
            k = 0
            base = 0
            for leaf in term_flatten(t):
                if isinstance(leaf, Variable) and leaf.name == x:
                    k += 1
                elif isinstance(leaf, Constant):
                    base += leaf.word.text.count(sym)
                elif isinstance(leaf, Variable) and leaf.name in env:
                    base += env[leaf.name].text.count(sym)
                else:
                    return None
            return k, base

        s1 = side_info(a.t1, a.a)
        s2 = side_info(a.t2, a.b)
        if s1 is None or s2 is None:
            return None
        (k1, b1), (k2, b2) = s1, s2
        # usable only when x counts on exactly one side:  k |x|_s = rhs
        if k1 and not k2:
            k, s, rhs = k1, a.a, b2 - b1
        elif k2 and not k1:
            k, s, rhs = k2, a.b, b1 - b2
        else:
            return None
        if rhs < 0 or rhs % k:
            return "unsat"
        return (s, rhs // k)

    def _subwords_of(self, W: str, bound: int, pins, forbidden) -> Optional[list[str]]:
        seen = {""}
        for c in W:
            if c in forbidden:
                continue
            new = set()
            for u in seen:
                if len(u) >= bound:
                    continue
                t = u + c
                if pins.get(c) is not None and t.count(c) > pins[c]:
                    continue
                new.add(t)
            seen |= new
            if len(seen) > CANDIDATE_CAP:
                return None
        return list(seen)

    def _pinned_words(self, pins, allowed, bound) -> Optional[list[str]]:
        total = sum(pins.values())
        if total > bound:
            return []
        free = [s for s in allowed if s not in pins]
        out: list[str] = []
        for L in range(total, bound + 1):
            n_free = L - total
            if not free and n_free > 0:
                continue
            budget = dict(pins)
            word = []

            def rec(slots_free):
                if len(out) > CANDIDATE_CAP:
                    return False
                if len(word) == L:
                    out.append("".join(word))
                    return True
                for s in allowed:
                    if s in budget:
                        if budget[s] == 0:
                            continue
                        budget[s] -= 1
                        word.append(s)
                        ok = rec(slots_free)
                        word.pop()
                        budget[s] += 1
                    else:
                        if slots_free == 0:
                            continue
                        word.append(s)
                        ok = rec(slots_free - 1)
                        word.pop()
                    if not ok:
                        return False
                return True

            if not rec(n_free):
                return None
        return out

    def _all_words(self, allowed, bound) -> Optional[list[str]]:
        est = sum(len(allowed) ** L for L in range(bound + 1)) if allowed else 1
        if est > CANDIDATE_CAP:
            return None
        out = []
        for L in range(bound + 1):
            for tup in itertools.product(allowed, repeat=L):
                out.append("".join(tup))
        return out

    # -------------------------------------------------- search

    def run(self) -> tuple[Optional[dict], bool]:
        if self.root.state == -1:
            return None, True
        found = self._dfs(0)
        if found is not None:
            return found, True
        return None, not self.incomplete

    def _dfs(self, i: int) -> Optional[dict]:
        if i == len(self.exist):
            if self.root.state == 1:
                return {v: self.env[v] for v in self.exist}
            return None
        x = self.exist[i]
        spec = self.specs[x]
        if isinstance(spec, int):
            bound = spec
        else:
            try:
                bound = spec.eval(self.env)
            except Exception:
                bound = 12
                self.incomplete = True
        for w in self.candidates(x, bound):
            mark = len(self.trail)
            self._assign(x, w)
            if self.root.state != -1:
                got = self._dfs(i + 1)
                if got is not None:
                    return got
            self._undo(mark)
        return None


def bounded_search(
    exist,
    matrix,
    rho: Mapping[str, Word],
    specs,
    alphabet: Alphabet,
) -> tuple[Optional[dict], bool]:
    """Returns (witness or None, exhausted-completely)."""
    eng = _Engine(exist, matrix, dict(rho), specs, alphabet)
    return eng.run()
