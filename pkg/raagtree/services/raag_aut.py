from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from itertools import product
from typing import Any

from raagtree.core.config import get_settings
from raagtree.core.errors import MalformedPair, RaagTreeError, TooLarge, TooSmall
from raagtree.models.automorphism import (
    AutMap,
    Automorphism,
    Letter,
    Sym1Element,
    Sym1Generator,
    Whitehead1,
    Whitehead2,
    Word,
    format_letter,
    invert_word,
    letter_key,
)
from raagtree.models.tree import LabeledTree
from raagtree.services.tree_core import DEEP_THRESHOLD, leaf_distances

logger = logging.getLogger(__name__)


def commutes(t: LabeledTree, x: Letter, y: Letter) -> bool:
    u, v = abs(x), abs(y)
    return u == v or t.adjacent(u, v)


def _check_letters(t: LabeledTree, word: Iterable[Letter]) -> None:
    for x in word:
        if x == 0:
            raise MalformedPair("0 is not a letter")
        t.check_node(abs(x))


def reduce_word(t: LabeledTree, word: Iterable[Letter]) -> list[Letter]:
    """Cancel every x ... x^-1 whose middle commutes with x; the result has minimal length."""
    reduced: list[Letter] = []
    for c in word:
        for j in range(len(reduced) - 1, -1, -1):
            x = reduced[j]
            if x == -c:
                del reduced[j]
                break
            if not commutes(t, x, c):
                reduced.append(c)
                break
        else:
            reduced.append(c)
    return reduced


def normal_form(t: LabeledTree, word: Iterable[Letter]) -> Word:
    """Shortlex-least word representing the same element of the right-angled Artin group."""
    letters = list(word)
    _check_letters(t, letters)
    remaining = reduce_word(t, letters)
    out: list[Letter] = []
    while remaining:
        best_index = -1
        for i, x in enumerate(remaining):
            if best_index >= 0 and letter_key(x) >= letter_key(remaining[best_index]):
                continue
            if all(commutes(t, y, x) for y in remaining[:i]):
                best_index = i
        out.append(remaining.pop(best_index))
    return tuple(out)


def _expand(aut: Automorphism, word: Iterable[Letter]) -> list[Letter]:
    out: list[Letter] = []
    for c in word:
        out.extend(aut.image(c))
    return out


def apply(t: LabeledTree, aut: Automorphism, word: Iterable[Letter]) -> Word:
    return normal_form(t, _expand(aut, word))


def generator_images(t: LabeledTree, aut: Automorphism) -> tuple[Word, ...]:
    return ((),) + tuple(apply(t, aut, (v,)) for v in t.nodes)


def compose(t: LabeledTree, *auts: Automorphism) -> AutMap:
    """Product of automorphisms; the rightmost is applied first."""
    images: list[Word] = [()]
    for v in t.nodes:
        word: Word = (v,)
        for aut in reversed(auts):
            word = apply(t, aut, word)
        images.append(word)
    return AutMap(tuple(images))


def identity(t: LabeledTree) -> AutMap:
    return AutMap(((),) + tuple((v,) for v in t.nodes))


def inverse(aut: Automorphism) -> Automorphism:
    if isinstance(aut, Whitehead2):
        return Whitehead2(A=(aut.A - {aut.a}) | {-aut.a}, a=-aut.a)
    if isinstance(aut, Sym1Element):
        return Sym1Element(aut.inverse().images)
    if isinstance(aut, Whitehead1):
        return aut.inverse()
    raise TypeError("inverse is only available for Whitehead automorphisms")


def aut_equal(t: LabeledTree, f: Automorphism, g: Automorphism) -> bool:
    return all(apply(t, f, (v,)) == apply(t, g, (v,)) for v in t.nodes)


def is_identity(t: LabeledTree, aut: Automorphism) -> bool:
    return all(apply(t, aut, (v,)) == (v,) for v in t.nodes)


def commutator_relations_hold(t: LabeledTree, aut: Automorphism) -> bool:
    """Images of [v, w] for every edge vw reduce to the empty word."""
    for v, w in t.edge_list():
        if apply(t, aut, (v, w, -v, -w)):
            return False
    return True


def is_valid_type2(t: LabeledTree, A: Iterable[Letter], a: Letter) -> bool:
    A = frozenset(A)
    if a not in A or -a in A:
        raise MalformedPair(f"(A, {format_letter(a)}) needs a in A and a^-1 not in A")
    _check_letters(t, A)
    u = abs(a)
    link = set(t.lk(u))
    doubled = {abs(x) for x in A if x > 0 and -x in A and abs(x) not in link}
    for component in t.components_outside_star(u):
        hit = doubled.intersection(component)
        if hit and len(hit) != len(component):
            return False
        doubled.difference_update(component)
    if doubled:
        return False
    return all(t.leq(abs(x), u) for x in A if -x not in A)


def whitehead2(t: LabeledTree, A: Iterable[Letter], a: Letter) -> Whitehead2:
    A = frozenset(A)
    if not is_valid_type2(t, A, a):
        raise MalformedPair(f"({sorted(A)}, {format_letter(a)}) fails the Whitehead validity conditions")
    return Whitehead2(A=A, a=a)


def whitehead1(t: LabeledTree, images: Sequence[Letter]) -> Whitehead1:
    """Signed permutation of the generators; its underlying permutation must be a graph automorphism."""
    aut = Whitehead1(tuple(images))
    if not is_graph_automorphism(t, aut):
        raise MalformedPair(f"{list(aut.images[1:])} does not preserve adjacency in the tree")
    return aut


def canonical(t: LabeledTree, A: Iterable[Letter], a: Letter) -> Whitehead2:
    """Drops letter pairs over lk(a); those commute with a and are fixed."""
    link = set(t.lk(abs(a)))
    A = frozenset(A)
    kept = frozenset(x for x in A if not (abs(x) in link and -x in A))
    return Whitehead2(A=kept, a=a)


def canonical_form(t: LabeledTree, aut: Whitehead2) -> Whitehead2:
    return canonical(t, aut.A, aut.a)


def _letters(t: LabeledTree) -> list[Letter]:
    return [x for v in t.nodes for x in (v, -v)]


def _type2_options(t: LabeledTree, a: Letter, canonical_only: bool) -> list[list[frozenset[Letter]]]:
    u = abs(a)
    options: list[list[frozenset[Letter]]] = []
    for component in t.components_outside_star(u):
        pair = frozenset(component) | frozenset(-v for v in component)
        choice = [frozenset(), pair]
        if len(component) == 1 and t.leq(component[0], u):
            v = component[0]
            choice += [frozenset({v}), frozenset({-v})]
        options.append(choice)
    for v in t.lk(u):
        choice = [frozenset()]
        if not canonical_only:
            choice.append(frozenset({v, -v}))
        if t.leq(v, u):
            choice += [frozenset({v}), frozenset({-v})]
        options.append(choice)
    return options


def type2_count(t: LabeledTree, *, canonical: bool = True) -> int:
    """Upper bound on the number of pairs ``enumerate_type2`` will visit."""
    return sum(math.prod(len(c) for c in _type2_options(t, a, canonical)) for a in _letters(t))


def enumerate_type2(t: LabeledTree, *, canonical: bool = True, budget: int | None = None) -> list[Whitehead2]:
    """Every valid type (2) pair, sorted.

    With ``canonical`` the result holds one pair per distinct non-identity automorphism;
    otherwise every pair passing the validity conditions is listed.
    """
    if t.n < 2:
        raise TooSmall("type (2) Whitehead automorphisms need at least two nodes")
    limit = budget if budget is not None else get_settings().generator_budget
    visits = type2_count(t, canonical=canonical)
    if visits > limit:
        raise TooLarge(f"{visits} type (2) pairs exceed the generator budget of {limit}")

    found: list[Whitehead2] = []
    seen: set[tuple[Word, ...]] = set()
    for a in _letters(t):
        for parts in product(*_type2_options(t, a, canonical)):
            A = frozenset({a}).union(*parts)
            aut = Whitehead2(A=A, a=a)
            if canonical:
                if aut.is_identity:
                    continue
                signature = generator_images(t, aut)
                if signature in seen:
                    continue
                seen.add(signature)
            found.append(aut)
    found.sort(key=Whitehead2.sort_key)
    logger.debug("type2_enumerated", extra={"n": t.n, "count": len(found), "canonical": canonical})
    return found


def transvection(t: LabeledTree, b: Letter, a: Letter) -> Whitehead2:
    """tau_{ba} = ({a, b}, a): b goes to b a. Requires |b| <= |a|."""
    return whitehead2(t, {a, b}, a)


def partial_conjugation(t: LabeledTree, component: Sequence[int], a: Letter) -> Whitehead2:
    """c_{Y,a} = (Y u Y^-1 u {a}, a): every v in Y goes to a^-1 v a."""
    return whitehead2(t, {a, *component, *(-v for v in component)}, a)


def inversion(t: LabeledTree, v: int) -> Whitehead1:
    t.check_node(v)
    images = list(range(t.n + 1))
    images[v] = -v
    return whitehead1(t, images)


def named_generators(t: LabeledTree) -> dict[str, list[Automorphism]]:
    if t.n < 2:
        raise TooSmall("named generators need at least two nodes")
    transvections: list[Automorphism] = []
    conjugations: list[Automorphism] = []
    for a in _letters(t):
        u = abs(a)
        for b in _letters(t):
            if abs(b) != u and t.leq(abs(b), u):
                transvections.append(transvection(t, b, a))
        for component in t.components_outside_star(u):
            conjugations.append(partial_conjugation(t, component, a))
    return {
        "transvections": transvections,
        "partial_conjugations": conjugations,
        "inversions": [inversion(t, v) for v in t.nodes if len(t.class_of(v)) > 1],
    }


def is_graph_automorphism(t: LabeledTree, aut: Whitehead1) -> bool:
    if aut.n != t.n:
        return False
    return all(t.adjacent(abs(aut.images[u]), abs(aut.images[v])) for u, v in t.edges)


def is_sym1(t: LabeledTree, aut: Whitehead1) -> bool:
    if not is_graph_automorphism(t, aut):
        return False
    for v in t.nodes:
        members = t.class_of(v)
        if len(members) == 1 and aut.images[v] != v:
            return False
        if abs(aut.images[v]) not in members:
            return False
    return True


def sym1_element(t: LabeledTree, images: Sequence[Letter]) -> Sym1Element:
    element = Sym1Element(tuple(images))
    if not is_sym1(t, element):
        raise MalformedPair("signed permutation does not preserve the ~-classes")
    return element


def _swap(n: int, u: int, v: int) -> Sym1Element:
    images = list(range(n + 1))
    images[u], images[v] = v, u
    return Sym1Element(tuple(images))


def _invert(n: int, v: int) -> Sym1Element:
    images = list(range(n + 1))
    images[v] = -v
    return Sym1Element(tuple(images))


def sym1_class_generators(t: LabeledTree, members: tuple[int, ...]) -> list[Sym1Generator]:
    gens = [Sym1Generator(kind="t", members=members, index=0, element=_invert(t.n, members[0]))]
    for i in range(1, len(members)):
        gens.append(
            Sym1Generator(kind="s", members=members, index=i, element=_swap(t.n, members[i - 1], members[i]))
        )
    return gens


def sym1_generators(t: LabeledTree) -> list[Sym1Generator]:
    """Per ~-class (c_1 < ... < c_k) with k >= 2: the inversion t of c_1 and the adjacent swaps s_1 .. s_{k-1}.

    Thin nodes are fixed, so singleton classes contribute nothing.
    """
    gens: list[Sym1Generator] = []
    for members in t.equivalence_classes:
        if len(members) == 1:
            continue
        gens.extend(sym1_class_generators(t, members))
    return gens


def sym1_word(t: LabeledTree, sigma: Whitehead1) -> list[Sym1Generator]:
    """Generators h_1 .. h_m with sigma = h_1 h_2 ... h_m (rightmost applied first)."""
    if not is_sym1(t, sigma):
        raise MalformedPair("not an element of the class-preserving signed permutations")
    word: list[Sym1Generator] = []
    rho = {v: sigma.images[v] for v in t.nodes}

    def push(gen: Sym1Generator) -> None:
        for v in rho:
            rho[v] = gen.element.letter(rho[v])
        word.append(gen)

    for members in t.equivalence_classes:
        if len(members) == 1:
            continue
        gens = sym1_class_generators(t, members)
        flip, swaps = gens[0], gens[1:]
        position = {c: i for i, c in enumerate(members)}
        for v in members:
            if rho[v] < 0:
                q = position[-rho[v]]
                path = [swaps[i] for i in range(q - 1, -1, -1)]
                for gen in path + [flip] + path[::-1]:
                    push(gen)
        while True:
            source = {rho[v]: position[v] for v in members}
            for j in range(len(members) - 1):
                if source[members[j]] > source[members[j + 1]]:
                    push(swaps[j])
                    break
            else:
                break
    return word


def sigma_ab(t: LabeledTree, a: Letter, b: Letter) -> Sym1Element:
    """Sends a to b^-1 and b to a; requires |a| ~ |b| with |a| != |b|."""
    u, v = abs(a), abs(b)
    if u == v or not t.sim(u, v):
        raise MalformedPair(f"{format_letter(a)} and {format_letter(b)} are not distinct ~-equivalent letters")
    images = list(range(t.n + 1))
    images[u] = -b if a > 0 else b
    images[v] = a if b > 0 else -a
    return Sym1Element(tuple(images))


def conjugate_by(sigma: Whitehead1, aut: Whitehead2) -> Whitehead2:
    """sigma (A, a) sigma^-1 = (sigma(A), sigma(a))."""
    return Whitehead2(A=frozenset(sigma.letter(x) for x in aut.A), a=sigma.letter(aut.a))


def omega(t: LabeledTree) -> list[tuple[int, tuple[int, ...]]]:
    """Deep partial conjugations (a, Y) with a positive; their count equals upsilon."""
    if t.n < 2:
        return []
    dist = leaf_distances(t)
    return [
        (a, component)
        for a in t.nodes
        if dist[a] >= DEEP_THRESHOLD
        for component in t.components_outside_star(a)
    ]


def phi(t: LabeledTree, aut: Automorphism, index: Sequence[tuple[int, tuple[int, ...]]] | None = None) -> list[int]:
    """Image of a generator in Z^Omega."""
    index = omega(t) if index is None else index
    vector = [0] * len(index)
    if isinstance(aut, Whitehead1):
        return vector
    if not isinstance(aut, Whitehead2):
        raise TypeError("phi is defined on Whitehead generators only")
    u = abs(aut.a)
    if not any(a == u for a, _ in index):
        return vector
    singles = [x for x in aut.A if -x not in aut.A and x != aut.a]
    if singles:
        raise RaagTreeError(f"deep letter {format_letter(aut.a)} admits no dominated letters, found {singles}")
    sign = 1 if aut.a > 0 else -1
    for position, (a, component) in enumerate(index):
        if a == u and all(v in aut.A and -v in aut.A for v in component):
            vector[position] = sign
    return vector


def phi_matrix(t: LabeledTree, generators: Sequence[Automorphism]) -> list[list[int]]:
    index = omega(t)
    return [phi(t, aut, index) for aut in generators]


def to_json(aut: Automorphism) -> dict[str, Any]:
    if isinstance(aut, Whitehead2):
        return {
            "a": format_letter(aut.a),
            "A": [format_letter(x) for x in sorted(aut.A, key=letter_key)],
        }
    if isinstance(aut, Whitehead1):
        return {"permutation": {str(v): format_letter(aut.images[v]) for v in range(1, len(aut.images))}}
    return {"images": {str(v): [format_letter(x) for x in aut.images[v]] for v in range(1, len(aut.images))}}


def word_to_json(word: Word) -> list[str]:
    return [format_letter(x) for x in word]


__all__ = [
    "apply",
    "aut_equal",
    "canonical",
    "commutator_relations_hold",
    "compose",
    "enumerate_type2",
    "inverse",
    "invert_word",
    "is_valid_type2",
    "named_generators",
    "normal_form",
    "omega",
    "phi",
    "phi_matrix",
    "sigma_ab",
    "sym1_generators",
    "sym1_word",
    "to_json",
    "whitehead1",
]
