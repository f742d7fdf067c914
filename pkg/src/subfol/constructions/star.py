"""Kleene stars of fixed-length sets: (X # Y #)* and X*.

The emitted formula follows the blocker representation: a letter-count
equation fixes the block count from the separator count, and for every
blocker pair (p, q) an existential word u ranges over (p#q#)* (expressed by
a commutation equation) with w embedded in u and separator counts equal.
Every witness is forced: u must be exactly (p#q#)^n with n = |w|_#/2, so
the plan's single synthesized candidate makes bounded checking complete.
"""

from __future__ import annotations

from typing import Mapping, Optional

from ..words import Alphabet, Word
from ..formulas import (
    Concat,
    Constant,
    Not,
    Term,
    Variable,
    cnt_eq,
    eq,
    eval_term,
    sub,
)
from ..checker import BCnt, BConst, BLen, BProd, BSum, Bound
from .base import CompilationContext, CompiledRelation, CompileError, Sigma1Builder
from .sets import FixedLengthSet, represent_set


def _term_bound_len(t: Term) -> Optional[Bound]:
    if isinstance(t, Variable):
        return BLen(t.name)
    if isinstance(t, Constant):
        return BConst(len(t.word))
    left = _term_bound_len(t.left)
    right = _term_bound_len(t.right)
    if left is None or right is None:
        return None
    return BSum(left, right)


def _term_bound_cnt(t: Term, sym: str) -> Bound:
    if isinstance(t, Variable):
        return BCnt(t.name, sym)
    if isinstance(t, Constant):
        return BConst(t.word.text.count(sym))
    return BSum(_term_bound_cnt(t.left, sym), _term_bound_cnt(t.right, sym))


def emit_count_equation(
    builder: Sigma1Builder,
    lhs,
    rhs,
) -> None:
    """Linear letter-count equation, with aux variables joining the builder."""
    from ..formulas import Exists, _linear_count

    formula, aux, synth = _linear_count(lhs, rhs, builder.ctx.alphabet, builder.ctx.names)
    matrix = formula.body if isinstance(formula, Exists) else formula
    # aux z variables carry |z|_pivot = |t|_a; bound by the counted term
    specs = _count_aux_specs(lhs, rhs)
    for name, (t, a) in zip(aux, specs):
        builder.vars.append(name)
        builder.bounds[name] = _term_bound_cnt(t, a)
    builder.add(matrix)

    def run(env: dict, cert) -> dict:
        return synth(env)

    if aux:
        builder.step(run)


def _count_aux_specs(lhs, rhs):
    """Mirror _linear_count's fresh-variable introduction order."""
    out = []
    for side in (lhs, rhs):
        live = [(c, t, a) for c, t, a in side if c > 0]
        if not live:
            continue
        pivot = live[0][2]
        for c, t, a in live:
            if a != pivot:
                out.append((t, a))
    return out


def emit_star_sets(
    builder: Sigma1Builder,
    x: FixedLengthSet,
    y: FixedLengthSet,
    w_term: Term,
    sep: str,
) -> None:
    """Conjuncts stating  w in (X sep Y sep)*  for fixed-length X, Y."""
    ctx = builder.ctx
    base = x.alphabet
    if sep in base:
        raise CompileError(f"separator {sep!r} must lie outside the base alphabet {base}")
    if y.alphabet != base:
        raise CompileError("X and Y must share one base alphabet")
    k, el = x.length, y.length
    blockers_x = represent_set(x)
    blockers_y = represent_set(y)

    # (k + l) |w|_sep = 2 |w|_A
    emit_count_equation(
        builder,
        [(k + el, w_term, sep)],
        [(2, w_term, s) for s in base],
    )

    pair_vars: list[tuple[str, str, str, Optional[str]]] = []
    w_len_bound = _term_bound_len(w_term)
    for p in blockers_x:
        for q in blockers_y:
            block = p.text + sep + q.text + sep
            u = builder.exist(
                BProd(BConst(len(block)), _term_bound_cnt(w_term, sep))
            )
            uv = Variable(u)
            if p.text != q.text:
                c = ctx.constant(block)
                builder.add(eq(Concat(uv, c), Concat(c, uv)))
                aux = None
            else:
                half = ctx.constant(p.text + sep)
                builder.add(eq(Concat(uv, half), Concat(half, uv)))
                v2 = builder.exist(_term_bound_cnt(w_term, sep))
                builder.add(cnt_eq(uv, sep, Concat(Variable(v2), Variable(v2)), sep))
                aux = v2
            builder.add(sub(w_term, uv))
            builder.add(cnt_eq(uv, sep, w_term, sep))
            pair_vars.append((u, p.text, q.text, aux))

    def synth(env: dict, cert) -> dict:
        w_val = eval_term(w_term, env).text
        n = w_val.count(sep) // 2
        out = {}
        for u, p, q, aux in pair_vars:
            out[u] = Word((p + sep + q + sep) * n, ctx.alphabet)
            if aux is not None:
                out[aux] = Word(sep * n, ctx.alphabet)
        return out

    builder.step(synth)


def emit_star_closure(
    builder: Sigma1Builder,
    x: FixedLengthSet,
    target: Term,
    sep: str,
) -> None:
    """Conjuncts stating  target in X*  via projection from (X sep sep)*."""
    ctx = builder.ctx
    if x.length == 0:
        builder.add(eq(target, ctx.epsilon()))
        return
    tlen = _term_bound_len(target) or BConst(0)
    wt = builder.exist(BProd(BConst(3), tlen))
    k = x.length

    def make_interleaving(env: dict) -> Word:
        val = eval_term(target, env).text
        if len(val) % k:
            return ctx.alphabet.epsilon()
        blocks = [val[i : i + k] for i in range(0, len(val), k)]
        return Word((sep + sep).join(blocks) + (sep + sep if blocks else ""), ctx.alphabet)

    builder.word_step(wt, make_interleaving)
    emit_star_sets(builder, x, FixedLengthSet.epsilon(x.alphabet), Variable(wt), sep)
    from ..formulas import projection_atom

    builder.add(projection_atom(target, Variable(wt), x.alphabet.symbols, ctx.alphabet))


def star_formula(
    x: FixedLengthSet,
    y: FixedLengthSet,
    ambient: Optional[Alphabet] = None,
) -> CompiledRelation:
    """Compiled unary relation  w in (X # Y #)*  over an ambient alphabet
    containing a separator symbol outside the base alphabet."""
    base = x.alphabet
    ambient = ambient or base.extend("#" if "#" not in base else _spare(base))
    ctx = CompilationContext(ambient)
    ctx.reserve(*base.symbols)
    sep = ctx.fresh_symbol()
    builder = Sigma1Builder(ctx)
    emit_star_sets(builder, x, y, Variable("w"), sep)
    return builder.compiled(
        ["w"],
        complete=True,
        procedure="star",
        params={
            "x": sorted(x.members),
            "y": sorted(y.members),
            "base": str(base),
            "ambient": str(ambient),
            "sep": sep,
        },
    )


def emit_marked_star(
    builder: Sigma1Builder,
    x: FixedLengthSet,
    w_term: Term,
    sep: str,
) -> None:
    """Conjuncts stating  w in (X sep)*  (single-marker block form).

    Same technique as the two-marker normal form: |w|_sep counts blocks,
    |w|_A = k n, and w embeds into (p sep)^n for every blocker p.
    """
    ctx = builder.ctx
    base = x.alphabet
    if sep in base:
        raise CompileError(f"separator {sep!r} must lie outside the base alphabet {base}")
    k = x.length
    blockers = represent_set(x)

    emit_count_equation(
        builder,
        [(k, w_term, sep)],
        [(1, w_term, s) for s in base],
    )

    pair_vars: list[tuple[str, str]] = []
    for p in blockers:
        block = p.text + sep
        u = builder.exist(BProd(BConst(len(block)), _term_bound_cnt(w_term, sep)))
        uv = Variable(u)
        c = ctx.constant(block)
        builder.add(eq(Concat(uv, c), Concat(c, uv)))
        builder.add(sub(w_term, uv))
        builder.add(cnt_eq(uv, sep, w_term, sep))
        pair_vars.append((u, p.text))

    def synth(env: dict, cert) -> dict:
        n = eval_term(w_term, env).text.count(sep)
        return {u: Word((p + sep) * n, ctx.alphabet) for u, p in pair_vars}

    builder.step(synth)


def marked_star_formula(
    x: FixedLengthSet,
    ambient: Optional[Alphabet] = None,
) -> CompiledRelation:
    """Compiled unary relation  w in (X #)*,  the single-marker block star
    matching the worked two-letter example (each block one x then one #)."""
    base = x.alphabet
    ambient = ambient or base.extend("#" if "#" not in base else _spare(base))
    ctx = CompilationContext(ambient)
    ctx.reserve(*base.symbols)
    sep = ctx.fresh_symbol()
    builder = Sigma1Builder(ctx)
    emit_marked_star(builder, x, Variable("w"), sep)
    return builder.compiled(
        ["w"],
        complete=True,
        procedure="marked_star",
        params={
            "x": sorted(x.members),
            "base": str(base),
            "ambient": str(ambient),
            "sep": sep,
        },
    )


def star_closure_formula(
    x: FixedLengthSet,
    ambient: Optional[Alphabet] = None,
) -> CompiledRelation:
    """Compiled unary relation  w in X*  (projection of the marked star)."""
    base = x.alphabet
    ambient = ambient or base.extend("#" if "#" not in base else _spare(base))
    ctx = CompilationContext(ambient)
    ctx.reserve(*base.symbols)
    sep = ctx.fresh_symbol()
    builder = Sigma1Builder(ctx)
    emit_star_closure(builder, x, Variable("w"), sep)
    return builder.compiled(
        ["w"],
        complete=True,
        procedure="star_closure",
        params={
            "x": sorted(x.members),
            "base": str(base),
            "ambient": str(ambient),
            "sep": sep,
        },
    )


def _spare(base: Alphabet) -> str:
    from ..words import SYMBOL_POOL

    for s in SYMBOL_POOL:
        if s not in base:
            return s
    raise CompileError("no spare symbol in the pool")
