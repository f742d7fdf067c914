"""Shared machinery for the lemma compilers.

Each compiler assembles a prenex Sigma_1 formula through a
:class:`Sigma1Builder`: existential variables are declared in search-friendly
order, quantifier-free conjuncts accumulate into the matrix, and witness
synthesis is recorded as a list of steps, each computing some variables'
values from the values already known.  The finished product is a
:class:`CompiledRelation` whose plan can synthesize, enumerate, and bound
witnesses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence

from ..words import Alphabet, AlphabetError, Word
from ..formulas import (
    And,
    Constant,
    Exists,
    Formula,
    FormulaStats,
    FreshNames,
    Term,
    Variable,
    eval_term,
    formula_stats,
    land,
)
from ..checker import (
    Bound,
    BConst,
    Certificate,
    WitnessEnumeration,
    WitnessPlan,
)


class CompileError(ValueError):
    pass


@dataclass
class CompilationContext:
    """Ambient alphabet plus fresh-name and reserved-symbol bookkeeping."""

    alphabet: Alphabet
    names: FreshNames = field(default_factory=FreshNames)
    reserved: set = field(default_factory=set)

    def reserve(self, *syms: str) -> None:
        self.reserved.update(syms)

    def fresh_symbol(self) -> str:
        """Least ambient symbol not otherwise in use."""
        for s in self.alphabet:
            if s not in self.reserved:
                self.reserved.add(s)
                return s
        raise CompileError(f"no spare symbol left in ambient alphabet {self.alphabet}")

    def constant(self, text: str) -> Constant:
        return Constant(Word(text, self.alphabet))

    def epsilon(self) -> Constant:
        return Constant(self.alphabet.epsilon())


SynthStep = Callable[[dict, Certificate], dict]


class Sigma1Builder:
    def __init__(self, ctx: CompilationContext):
        self.ctx = ctx
        self.vars: list[str] = []
        self.bounds: dict[str, Bound] = {}
        self.conjuncts: list[Formula] = []
        self.steps: list[SynthStep] = []
        self.kernel: Optional[Callable[[Mapping[str, Word]], WitnessEnumeration]] = None

    def exist(self, bound: Optional[Bound | int] = None) -> str:
        name = self.ctx.names.fresh()
        self.vars.append(name)
        if bound is not None:
            self.bounds[name] = BConst(bound) if isinstance(bound, int) else bound
        return name

    def add(self, *formulas: Formula) -> None:
        self.conjuncts.extend(formulas)

    def step(self, fn: SynthStep) -> None:
        self.steps.append(fn)

    def word_step(self, var: str, fn: Callable[[dict], Word]) -> None:
        """Single-variable step; the callable sees the env built so far."""

        def run(env: dict, cert: Certificate) -> dict:
            return {var: fn(env)}

        self.step(run)

    def set_kernel(self, fn: Callable[[Mapping[str, Word]], WitnessEnumeration]) -> None:
        if self.kernel is not None:
            raise CompileError("kernel enumeration already set")
        self.kernel = fn

    # ------------------------------------------------------------ finish

    def _run_steps(self, env: dict, cert: Certificate) -> dict:
        for fn in self.steps:
            new = fn(env, cert)
            for k, v in new.items():
                if k not in env:
                    env[k] = v
        return env

    def compiled(
        self,
        free_vars: Sequence[str],
        complete: bool,
        procedure: str,
        params: Optional[dict] = None,
    ) -> "CompiledRelation":
        matrix = land(*self.conjuncts)
        formula = Exists(tuple(self.vars), matrix) if self.vars else matrix
        exist_vars = list(self.vars)
        steps_runner = self._run_steps
        kernel = self.kernel
        epsilon = self.ctx.alphabet.epsilon()

        def synth(rho: Mapping[str, Word], cert: Certificate = None) -> dict:
            env = steps_runner(dict(rho), cert)
            return {v: env.get(v, epsilon) for v in exist_vars}

        def enumerate_witnesses(rho: Mapping[str, Word]) -> WitnessEnumeration:
            if kernel is None:
                return WitnessEnumeration(iter([synth(rho, None)]), complete=True)
            seeds = kernel(rho)
            out = WitnessEnumeration(iter(()), complete=True)

            def gen() -> Iterator[dict]:
                for seed in seeds:
                    env = steps_runner({**rho, **seed}, None)
                    yield {v: env.get(v, epsilon) for v in exist_vars}
                out.complete = seeds.complete

            out._it = gen()
            return out

        plan = WitnessPlan(
            formula=formula,
            synth=synth,
            bounds=dict(self.bounds),
            complete=complete,
            enumerate=enumerate_witnesses,
            procedure=procedure,
            params=dict(params or {}),
        )
        return CompiledRelation(
            formula=formula,
            plan=plan,
            free_vars=tuple(free_vars),
            alphabet=self.ctx.alphabet,
            stats=formula_stats(formula),
        )


@dataclass
class CompiledRelation:
    """A prenex Sigma_1 formula, its witness plan, and bookkeeping."""

    formula: Formula
    plan: WitnessPlan
    free_vars: tuple[str, ...]
    alphabet: Alphabet
    stats: FormulaStats

    def assignment(self, *values: Word) -> dict:
        if len(values) != len(self.free_vars):
            raise CompileError(
                f"relation is {len(self.free_vars)}-ary, got {len(values)} words"
            )
        return {v: w.over(self.alphabet) for v, w in zip(self.free_vars, values)}

    def stats_lines(self) -> list[str]:
        return self.stats.lines()


def only_letters(term: Term, allowed: Iterable[str], ctx: CompilationContext) -> list[Formula]:
    """Conjuncts forbidding every ambient symbol outside `allowed` in term."""
    from ..formulas import Not, sub

    keep = set(allowed)
    out = []
    for s in ctx.alphabet:
        if s not in keep:
            out.append(Not(sub(ctx.constant(s), term)))
    return out
