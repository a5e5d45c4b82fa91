from __future__ import annotations

import logging
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass
from itertools import combinations

from raagtree.models.automorphism import Automorphism, Sym1Generator, Whitehead2
from raagtree.models.tree import LabeledTree
from raagtree.services import raag_aut

logger = logging.getLogger(__name__)

Factor = tuple[Automorphism, int]

SCHEMAS = ("R1", "R2", "R3", "R4", "R5", "R6'", "R7'", "R9", "R10")
# Schemas whose abelianized rows are identically zero.
ZERO_ROW_SCHEMAS = frozenset({"R3", "R9"})


@dataclass(frozen=True)
class RelatorInstance:
    """One relation lhs = rhs, each side a product of (automorphism, exponent) factors.

    Products read left to right with the rightmost factor applied first.
    """

    schema: str
    lhs: tuple[Factor, ...]
    rhs: tuple[Factor, ...] = ()
    zero_row: bool = False

    def holds(self, t: LabeledTree) -> bool:
        return raag_aut.aut_equal(t, _product(t, self.lhs), _product(t, self.rhs))


def _product(t: LabeledTree, factors: Sequence[Factor]) -> Automorphism:
    auts = [aut if exponent > 0 else raag_aut.inverse(aut) for aut, exponent in factors]
    if not auts:
        return raag_aut.identity(t)
    return raag_aut.compose(t, *auts)


def full_letter_set(t: LabeledTree) -> frozenset[int]:
    return frozenset(x for v in t.nodes for x in (v, -v))


def inner_conjugation(t: LabeledTree, a: int) -> Whitehead2:
    """(L - a^-1, a): conjugation of every generator by a."""
    return Whitehead2(A=full_letter_set(t) - {-a}, a=a)


@dataclass
class RelatorContext:
    """Everything the schema generators need for one tree."""

    tree: LabeledTree
    canonical: list[Whitehead2]
    pairs: list[Whitehead2]
    sym1: list[Sym1Generator]
    pairwise: bool

    def valid(self, A: frozenset[int], a: int) -> bool:
        if a not in A or -a in A:
            return False
        return raag_aut.is_valid_type2(self.tree, A, a)


def r1_instances(ctx: RelatorContext) -> Iterator[RelatorInstance]:
    # (A, a)(A - a u a^-1, a^-1) = 1
    for aut in ctx.canonical:
        yield RelatorInstance("R1", ((aut, 1), (raag_aut.inverse(aut), 1)))


def r2_instances(ctx: RelatorContext) -> Iterator[RelatorInstance]:
    by_letter: dict[int, list[Whitehead2]] = {}
    for aut in ctx.canonical:
        by_letter.setdefault(aut.a, []).append(aut)
    for a, group in by_letter.items():
        for first, second in combinations(group, 2):
            if first.A & second.A == {a}:
                union = Whitehead2(A=first.A | second.A, a=a)
                yield RelatorInstance("R2", ((first, 1), (second, 1)), ((union, 1),))


def r3_instances(ctx: RelatorContext) -> Iterator[RelatorInstance]:
    """(B, b)(A, a)(B, b)^-1 = (A, a); abelianizes to zero."""
    t = ctx.tree
    for first in ctx.canonical:
        for second in ctx.canonical:
            a, b = first.a, second.a
            A, B = first.A, second.A
            if a in B or -a in B or b in A or -b in A:
                continue
            if A & B and not t.adjacent(abs(a), abs(b)):
                continue
            yield RelatorInstance("R3", ((second, 1), (first, 1), (second, -1)), ((first, 1),), zero_row=True)


def r4_instances(ctx: RelatorContext) -> Iterator[RelatorInstance]:
    """(B, b)(A, a)(B, b)^-1 = (A, a)(B - b u a, a) with A = {a, b^-1} as witness."""
    t = ctx.tree
    letters = sorted(full_letter_set(t))
    for pair in ctx.pairs:
        b = pair.a
        for a in letters:
            if abs(a) == abs(b) or a in pair.A or -a in pair.A:
                continue
            if not t.leq(abs(b), abs(a)):
                continue
            moved = (pair.A - {b}) | {a}
            if not ctx.valid(moved, a):
                continue
            witness = Whitehead2(A=frozenset({a, -b}), a=a)
            target = Whitehead2(A=moved, a=a)
            yield RelatorInstance("R4", ((pair, 1), (witness, 1), (pair, -1)), ((witness, 1), (target, 1)))


def r5_instances(ctx: RelatorContext) -> Iterator[RelatorInstance]:
    """(A - a u a^-1, b)(A, a) = (A - b u b^-1, a) sigma_{a,b} for b in A, b^-1 not in A, b ~ a."""
    t = ctx.tree
    for pair in ctx.pairs:
        a = pair.a
        for b in sorted(pair.A):
            if abs(b) == abs(a) or -b in pair.A or not t.sim(abs(a), abs(b)):
                continue
            left_set = (pair.A - {a}) | {-a}
            right_set = (pair.A - {b}) | {-b}
            if not (ctx.valid(left_set, b) and ctx.valid(right_set, a)):
                logger.debug("r5_instance_skipped", extra={"a": a, "b": b})
                continue
            sigma = raag_aut.sigma_ab(t, a, b)
            yield RelatorInstance(
                "R5",
                ((Whitehead2(A=left_set, a=b), 1), (pair, 1)),
                ((Whitehead2(A=right_set, a=a), 1), (sigma, 1)),
            )


def r6_instances(ctx: RelatorContext) -> Iterator[RelatorInstance]:
    """sigma (A, a) sigma^-1 = (sigma(A), sigma(a)) for each Sym1 generator."""
    for gen in ctx.sym1:
        for aut in ctx.canonical:
            image = raag_aut.conjugate_by(gen.element, aut)
            yield RelatorInstance("R6'", ((gen.element, 1), (aut, 1), (gen.element, -1)), ((image, 1),))


def _power(factors: Sequence[Factor], k: int) -> tuple[Factor, ...]:
    return tuple(factors) * k


def r7_instances(ctx: RelatorContext) -> Iterator[RelatorInstance]:
    """Coxeter presentation of the signed permutations of each ~-class, plus commutators across classes."""
    classes: dict[tuple[int, ...], list[Sym1Generator]] = {}
    for gen in ctx.sym1:
        classes.setdefault(gen.members, []).append(gen)
    for gens in classes.values():
        flip, swaps = gens[0], gens[1:]
        for gen in gens:
            yield RelatorInstance("R7'", ((gen.element, 1), (gen.element, 1)))
        for i, left in enumerate(swaps):
            for j in range(i + 1, len(swaps)):
                right = swaps[j]
                order = 3 if j == i + 1 else 2
                yield RelatorInstance("R7'", _power(((left.element, 1), (right.element, 1)), order))
        for i, swap in enumerate(swaps):
            order = 4 if i == 0 else 2
            yield RelatorInstance("R7'", _power(((flip.element, 1), (swap.element, 1)), order))
    groups = list(classes.values())
    for i, first in enumerate(groups):
        for second in groups[i + 1 :]:
            for g in first:
                for h in second:
                    factors = ((g.element, 1), (h.element, 1), (g.element, -1), (h.element, -1))
                    yield RelatorInstance("R7'", factors, zero_row=True)


def r9_instances(ctx: RelatorContext) -> Iterator[RelatorInstance]:
    """(A, a) c_b (A, a)^-1 = c_b when b, b^-1 are not in A; abelianizes to zero."""
    t = ctx.tree
    for b in sorted(full_letter_set(t)):
        conj = inner_conjugation(t, b)
        for aut in ctx.canonical:
            if b in aut.A or -b in aut.A:
                continue
            yield RelatorInstance("R9", ((aut, 1), (conj, 1), (aut, -1)), ((conj, 1),), zero_row=True)


def r10_instances(ctx: RelatorContext) -> Iterator[RelatorInstance]:
    """(A, a) c_b (A, a)^-1 = c_a c_b with witness A = {a, b}, which needs |b| <= |a|."""
    t = ctx.tree
    letters = sorted(full_letter_set(t))
    for a in letters:
        for b in letters:
            if abs(b) == abs(a) or not t.leq(abs(b), abs(a)):
                continue
            witness = Whitehead2(A=frozenset({a, b}), a=a)
            conj_b = inner_conjugation(t, b)
            yield RelatorInstance(
                "R10",
                ((witness, 1), (conj_b, 1), (witness, -1)),
                ((inner_conjugation(t, a), 1), (conj_b, 1)),
            )


SCHEMA_GENERATORS: dict[str, Callable[[RelatorContext], Iterator[RelatorInstance]]] = {
    "R1": r1_instances,
    "R2": r2_instances,
    "R3": r3_instances,
    "R4": r4_instances,
    "R5": r5_instances,
    "R6'": r6_instances,
    "R7'": r7_instances,
    "R9": r9_instances,
    "R10": r10_instances,
}


def zero_row_count(ctx: RelatorContext, schema: str) -> int:
    """Instance count of a zero-row schema without building the instances."""
    return sum(1 for _ in SCHEMA_GENERATORS[schema](ctx))


def build_context(t: LabeledTree, *, budget: int | None = None, pairwise_limit: int | None = None) -> RelatorContext:
    canonical = raag_aut.enumerate_type2(t, canonical=True, budget=budget)
    pairs = raag_aut.enumerate_type2(t, canonical=False, budget=budget)
    sym1 = raag_aut.sym1_generators(t)
    pairwise = pairwise_limit is not None and len(canonical) + len(sym1) <= pairwise_limit
    return RelatorContext(tree=t, canonical=canonical, pairs=pairs, sym1=sym1, pairwise=pairwise)
