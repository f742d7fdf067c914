"""k-ary finite-state transducers: simulation, composition, products.

Transitions carry one label per track, each a single symbol or the empty
string for epsilon.  Regular languages are 1-ary transducers; there is no
separate automaton type.  State names are structured tags (tuples built from
the source construction) so products stay debuggable; the text format maps
them to q0, q1, ... on output.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterable, Optional, Sequence

from .words import Alphabet, Morphism, Word

EPS = ""

State = Hashable
Label = tuple[str, ...]
Transition = tuple[State, Label, State]


class TransducerError(ValueError):
    pass


@dataclass(frozen=True)
class Transducer:
    arity: int
    alphabet: Alphabet
    states: tuple[State, ...]
    initial: State
    finals: frozenset
    transitions: tuple[Transition, ...]

    def __post_init__(self):
        if self.arity < 1:
            raise TransducerError("arity must be >= 1")
        st = set(self.states)
        if self.initial not in st:
            raise TransducerError(f"initial state {self.initial!r} not a state")
        if not set(self.finals) <= st:
            raise TransducerError("final states must be states")
        for q, labels, q2 in self.transitions:
            if q not in st or q2 not in st:
                raise TransducerError(f"transition endpoint outside states: {(q, labels, q2)}")
            if len(labels) != self.arity:
                raise TransducerError(f"label arity mismatch in {(q, labels, q2)}")
            for x in labels:
                if x != EPS and x not in self.alphabet:
                    raise TransducerError(f"label symbol {x!r} outside alphabet")

    def out_edges(self, q: State) -> list[tuple[int, Transition]]:
        return [(i, t) for i, t in enumerate(self.transitions) if t[0] == q]

    def has_all_epsilon_cycle(self) -> bool:
        """Cycle through transitions labelled epsilon on every track."""
        adj: dict[State, list[State]] = {}
        for q, labels, q2 in self.transitions:
            if all(x == EPS for x in labels):
                adj.setdefault(q, []).append(q2)
        color: dict[State, int] = {}

        def dfs(q) -> bool:
            color[q] = 1
            for r in adj.get(q, ()):
                st = color.get(r, 0)
                if st == 1:
                    return True
                if st == 0 and dfs(r):
                    return True
            color[q] = 2
            return False

        return any(color.get(q, 0) == 0 and dfs(q) for q in adj)


@dataclass(frozen=True)
class Run:
    """An accepting (or partial) run: states visited and transitions taken."""

    states: tuple[State, ...]
    transitions: tuple[int, ...]  # indices into the transducer's transition list

    def labels(self, t: Transducer) -> list[Label]:
        return [t.transitions[i][1] for i in self.transitions]

    def tracks(self, t: Transducer) -> tuple[Word, ...]:
        texts = ["" for _ in range(t.arity)]
        for i in self.transitions:
            for k, x in enumerate(t.transitions[i][1]):
                texts[k] += x
        return tuple(Word(s, t.alphabet) for s in texts)


def simulate(t: Transducer, words: Sequence[Word]) -> Optional[Run]:
    """Find an accepting run whose per-track output equals `words`.

    Breadth-first product-graph reachability over (state, positions);
    revisited configurations are cut, which also handles epsilon cycles.
    Returns None when no accepting run exists.
    """
    if len(words) != t.arity:
        raise TransducerError(f"expected {t.arity} words, got {len(words)}")
    texts = [w.text for w in words]
    start = (t.initial, (0,) * t.arity)
    target = tuple(len(s) for s in texts)
    parents: dict = {start: None}
    queue = deque([start])
    while queue:
        cfg = queue.popleft()
        q, pos = cfg
        if q in t.finals and pos == target:
            steps = []
            cur = cfg
            while parents[cur] is not None:
                prev, idx = parents[cur]
                steps.append(idx)
                cur = prev
            steps.reverse()
            states = [t.initial]
            for i in steps:
                states.append(t.transitions[i][2])
            return Run(tuple(states), tuple(steps))
        for i, (src, labels, dst) in enumerate(t.transitions):
            if src != q:
                continue
            npos = []
            ok = True
            for k, x in enumerate(labels):
                p = pos[k]
                if x == EPS:
                    npos.append(p)
                elif p < len(texts[k]) and texts[k][p] == x:
                    npos.append(p + 1)
                else:
                    ok = False
                    break
            if not ok:
                continue
            ncfg = (dst, tuple(npos))
            if ncfg not in parents:
                parents[ncfg] = (cfg, i)
                queue.append(ncfg)
    return None


def recognizes(t: Transducer, words: Sequence[Word]) -> bool:
    return simulate(t, words) is not None


def trim(t: Transducer) -> Transducer:
    """Keep only states reachable from the initial state and co-reachable
    from a final state; preserves the recognized relation."""
    fwd = {t.initial}
    changed = True
    while changed:
        changed = False
        for q, _l, q2 in t.transitions:
            if q in fwd and q2 not in fwd:
                fwd.add(q2)
                changed = True
    back = set(f for f in t.finals if f in fwd)
    changed = True
    while changed:
        changed = False
        for q, _l, q2 in t.transitions:
            if q2 in back and q in fwd and q not in back:
                back.add(q)
                changed = True
    if t.initial not in back:
        # empty relation; keep a lone initial state
        return Transducer(t.arity, t.alphabet, (t.initial,), t.initial, frozenset(), ())
    states = tuple(q for q in t.states if q in back)
    trans = tuple(tr for tr in t.transitions if tr[0] in back and tr[2] in back)
    return Transducer(t.arity, t.alphabet, states, t.initial, frozenset(t.finals & back), trans)


def compose(s: Transducer, t: Transducer) -> Transducer:
    """Relational composition s o t = {(u, w) | exists v: (u,v) in t, (v,w) in s}.

    Both must be binary; t's output track is synchronized with s's input
    track by a product construction, epsilon moves advancing one side.
    """
    if s.arity != 2 or t.arity != 2:
        raise TransducerError("compose needs binary transducers")
    if not _track_symbols(t, 1) <= set(s.alphabet.symbols):
        raise TransducerError("middle alphabets incompatible")
    alphabet = t.alphabet.extend(s.alphabet.symbols)
    states = [(qt, qs) for qt in t.states for qs in s.states]
    trans: list[Transition] = []
    for qt, (x, m), qt2 in t.transitions:
        if m == EPS:
            for qs in s.states:
                trans.append((("c", qt, qs), (x, EPS), ("c", qt2, qs)))
        else:
            for qs, (m2, y), qs2 in s.transitions:
                if m2 == m:
                    trans.append((("c", qt, qs), (x, y), ("c", qt2, qs2)))
    for qs, (m2, y), qs2 in s.transitions:
        if m2 == EPS:
            for qt in t.states:
                trans.append((("c", qt, qs), (EPS, y), ("c", qt, qs2)))
    tagged = tuple(("c", qt, qs) for qt, qs in states)
    finals = frozenset(("c", qt, qs) for qt in t.finals for qs in s.finals)
    out = Transducer(2, alphabet, tagged, ("c", t.initial, s.initial), finals, tuple(trans))
    return trim(out)


def _track_symbols(t: Transducer, track: int) -> set[str]:
    return {labels[track] for _q, labels, _q2 in t.transitions if labels[track] != EPS}


def morphism_transducer(m: Morphism) -> Transducer:
    """Single-loop transducer recognizing {(w, m(w)) : w over m's domain}.

    Images longer than one letter expand into chains of fresh states.
    """
    alphabet = m.domain.extend(m.codomain.symbols)
    home = ("m", "q")
    states: list[State] = [home]
    trans: list[Transition] = []
    for s in m.domain:
        img = m.image[s].text
        if len(img) <= 1:
            trans.append((home, (s, img if img else EPS), home))
        else:
            prev = home
            for i, csym in enumerate(img):
                nxt = home if i == len(img) - 1 else ("m", s, i)
                if nxt != home:
                    states.append(nxt)
                trans.append((prev, (s if i == 0 else EPS, csym), nxt))
                prev = nxt
    return Transducer(2, alphabet, tuple(states), home, frozenset({home}), tuple(trans))


def inv_morphism_restrict(m: Morphism, r: Transducer) -> Transducer:
    """Transducer for {(m(y), y) : y accepted by the unary transducer r}.

    Applying it to a language L yields m^{-1}(L) restricted to r's language:
    the first track outputs m(y) while the state follows r on y.
    """
    if r.arity != 1:
        raise TransducerError("restriction language must be a 1-ary transducer")
    alphabet = m.codomain.extend(m.domain.symbols).extend(r.alphabet.symbols)
    states: list[State] = [("i", q) for q in r.states]
    trans: list[Transition] = []
    for ti, (q, (y,), q2) in enumerate(r.transitions):
        if y == EPS:
            trans.append((("i", q), (EPS, EPS), ("i", q2)))
            continue
        img = m.image[y].text
        if len(img) == 0:
            trans.append((("i", q), (EPS, y), ("i", q2)))
        elif len(img) == 1:
            trans.append((("i", q), (img, y), ("i", q2)))
        else:
            prev = ("i", q)
            for i, csym in enumerate(img):
                nxt = ("i", q2) if i == len(img) - 1 else ("i", q, ti, i)
                if i != len(img) - 1:
                    states.append(nxt)
                trans.append((prev, (csym, y if i == 0 else EPS), nxt))
                prev = nxt
    return Transducer(
        2,
        alphabet,
        tuple(states),
        ("i", r.initial),
        frozenset(("i", q) for q in r.finals),
        tuple(trans),
    )


def guess_product(
    guessed: Alphabet,
    outputs: Sequence[Morphism],
    taps: Sequence[Transducer],
) -> Transducer:
    """(k+2)-ary transducer guessing a word w over `guessed` letter by
    letter: tracks 1..k emit the morphism images of w, tracks k+1 and k+2
    emit words u, v with (u, w) in taps[0] and (v, w) in taps[1].

    Taps must be binary with their second track over `guessed`.
    """
    if len(taps) != 2:
        raise TransducerError("need exactly two taps")
    for tap in taps:
        if tap.arity != 2:
            raise TransducerError("taps must be binary")
        if not _track_symbols(tap, 1) <= set(guessed.symbols):
            raise TransducerError("tap second track not over the guessed alphabet")
    k = len(outputs)
    arity = k + 2
    syms: set[str] = set()
    for m in outputs:
        syms |= set(m.codomain.symbols)
    for tap in taps:
        syms |= _track_symbols(tap, 0)
    if not syms:
        syms = {"a"}
    from .words import SYMBOL_POOL

    alphabet = Alphabet([s for s in SYMBOL_POOL if s in syms])

    t1, t2 = taps
    states: list[State] = []
    trans: list[Transition] = []

    def pair(q1, q2) -> State:
        return ("g", q1, q2)

    for q1 in t1.states:
        for q2 in t2.states:
            states.append(pair(q1, q2))

    def emit_chain(src: State, dst: State, tracks: list[str], tag) -> None:
        """Transitions from src to dst spelling tracks[i] on track i."""
        length = max((len(s) for s in tracks), default=0)
        if length == 0:
            trans.append((src, tuple(EPS for _ in range(arity)), dst))
            return
        prev = src
        for i in range(length):
            labels = tuple(s[i] if i < len(s) else EPS for s in tracks)
            nxt = dst if i == length - 1 else ("gc", tag, i)
            if nxt != dst:
                states.append(nxt)
            trans.append((prev, labels, nxt))
            prev = nxt

    tagn = 0
    # tap-alone moves (second track epsilon)
    for ti, (q, (x, c), q2) in enumerate(t1.transitions):
        if c == EPS:
            for qo in t2.states:
                labels = [EPS] * k + [x, EPS]
                trans.append((pair(q, qo), tuple(labels), pair(q2, qo)))
    for ti, (q, (x, c), q2) in enumerate(t2.transitions):
        if c == EPS:
            for qo in t1.states:
                labels = [EPS] * k + [EPS, x]
                trans.append((pair(qo, q), tuple(labels), pair(qo, q2)))
    # synchronized guesses of one letter c
    for i1, (q1, (x1, c1), r1) in enumerate(t1.transitions):
        if c1 == EPS:
            continue
        for i2, (q2, (x2, c2), r2) in enumerate(t2.transitions):
            if c2 != c1:
                continue
            tracks = [m.image[c1].text for m in outputs] + [x1, x2]
            emit_chain(pair(q1, q2), pair(r1, r2), tracks, (i1, i2, tagn))
            tagn += 1

    out = Transducer(
        arity,
        alphabet,
        tuple(states),
        pair(t1.initial, t2.initial),
        frozenset(pair(f1, f2) for f1 in t1.finals for f2 in t2.finals),
        tuple(trans),
    )
    return trim(out)


def regular_language(alphabet: Alphabet, name: str) -> Transducer:
    """A few stock unary languages used by the pipeline."""
    if name == "a*b*#_star":
        # (a* b* #)*: S at block boundaries, A inside a-part, B inside b-part
        S, A, B = ("r", "S"), ("r", "A"), ("r", "B")
        trans = [
            (S, ("a",), A),
            (S, ("b",), B),
            (S, ("#",), S),
            (A, ("a",), A),
            (A, ("b",), B),
            (A, ("#",), S),
            (B, ("b",), B),
            (B, ("#",), S),
        ]
        return Transducer(1, alphabet, (S, A, B), S, frozenset({S}), tuple(trans))
    raise TransducerError(f"unknown stock language {name!r}")


# ------------------------------------------------------------ text format
#
# arity k / alphabet ab# / states q0 q1 ... / init q0 / final q1 ... /
# trans q x1 ... xk q'   with '-' for epsilon; '#'-comments at line start.

def write_transducer(t: Transducer) -> str:
    names = {q: f"q{i}" for i, q in enumerate(t.states)}
    lines = [
        f"arity {t.arity}",
        f"alphabet {t.alphabet}",
        "states " + " ".join(names[q] for q in t.states),
        f"init {names[t.initial]}",
        "final" + ("" if not t.finals else " " + " ".join(names[q] for q in t.states if q in t.finals)),
    ]
    for q, labels, q2 in t.transitions:
        lab = " ".join(x if x != EPS else "-" for x in labels)
        lines.append(f"trans {names[q]} {lab} {names[q2]}")
    return "\n".join(lines) + "\n"


def read_transducer(text: str) -> Transducer:
    arity = None
    alphabet = None
    states: list[str] = []
    initial = None
    finals: list[str] = []
    trans: list[Transition] = []
    for ln, raw in enumerate(text.splitlines(), 1):
        if raw.startswith("#") or not raw.strip():
            continue
        parts = raw.split()
        head = parts[0]
        if head == "arity":
            arity = int(parts[1])
        elif head == "alphabet":
            alphabet = Alphabet(parts[1])
        elif head == "states":
            states = parts[1:]
        elif head == "init":
            initial = parts[1]
        elif head == "final":
            finals = parts[1:]
        elif head == "trans":
            if arity is None:
                raise TransducerError(f"line {ln}: trans before arity")
            if len(parts) != 3 + arity:
                raise TransducerError(f"line {ln}: expected 'trans q {arity} labels q2'")
            labels = tuple(EPS if x == "-" else x for x in parts[2:-1])
            trans.append((parts[1], labels, parts[-1]))
        else:
            raise TransducerError(f"line {ln}: unknown directive {head!r}")
    if arity is None or alphabet is None or initial is None or not states:
        raise TransducerError("incomplete transducer file")
    return Transducer(arity, alphabet, tuple(states), initial, frozenset(finals), tuple(trans))
