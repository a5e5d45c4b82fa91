from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from raagtree.core.errors import MalformedPair

# A letter is a nonzero int: +v is the generator v, -v its inverse.
Letter = int
Word = tuple[int, ...]


def format_letter(x: Letter) -> str:
    return f"+{x}" if x > 0 else str(x)


def invert_word(word: Word) -> Word:
    return tuple(-x for x in reversed(word))


def letter_key(x: Letter) -> tuple[int, int]:
    """Total order on letters: by vertex, then + before -."""
    return (abs(x), 0 if x > 0 else 1)


@dataclass(frozen=True)
class Whitehead2:
    """Type (2) Whitehead automorphism (A, a).

    Sends a letter c with c, c^-1 not in A to itself, c in A only to c a, c^-1 in A only to
    a^-1 c, and both to a^-1 c a. The letters a and a^-1 are fixed.
    """

    A: frozenset[Letter]
    a: Letter

    def __post_init__(self) -> None:
        if self.a == 0 or 0 in self.A:
            raise MalformedPair("0 is not a letter")
        if self.a not in self.A:
            raise MalformedPair(f"acting letter {format_letter(self.a)} is not in A")
        if -self.a in self.A:
            raise MalformedPair(f"A contains both {format_letter(self.a)} and its inverse")

    def image(self, c: Letter) -> Word:
        a = self.a
        if abs(c) == abs(a):
            return (c,)
        inside, inverse_inside = c in self.A, -c in self.A
        if inside and inverse_inside:
            return (-a, c, a)
        if inside:
            return (c, a)
        if inverse_inside:
            return (-a, c)
        return (c,)

    @property
    def is_identity(self) -> bool:
        return self.A == frozenset({self.a})

    def sort_key(self) -> tuple:
        return (letter_key(self.a), tuple(sorted(letter_key(x) for x in self.A)))


@dataclass(frozen=True)
class Whitehead1:
    """Type (1) Whitehead automorphism: a signed permutation of the generators.

    ``images[v]`` is the letter that +v is sent to; slot 0 is unused.
    """

    images: tuple[Letter, ...]

    def __post_init__(self) -> None:
        targets = sorted(abs(x) for x in self.images[1:])
        if targets != list(range(1, len(self.images))):
            raise MalformedPair("images must be a signed permutation of the generators")

    @property
    def n(self) -> int:
        return len(self.images) - 1

    @classmethod
    def identity(cls, n: int) -> Whitehead1:
        return cls(tuple(range(n + 1)))

    def letter(self, c: Letter) -> Letter:
        image = self.images[abs(c)]
        return image if c > 0 else -image

    def image(self, c: Letter) -> Word:
        return (self.letter(c),)

    def compose(self, inner: Whitehead1) -> Whitehead1:
        """self after inner."""
        return Whitehead1((0,) + tuple(self.letter(inner.images[v]) for v in range(1, len(self.images))))

    def inverse(self) -> Whitehead1:
        images = [0] * len(self.images)
        for v in range(1, len(self.images)):
            target = self.images[v]
            images[abs(target)] = v if target > 0 else -v
        return Whitehead1(tuple(images))

    @property
    def is_identity(self) -> bool:
        return all(self.images[v] == v for v in range(1, len(self.images)))


@dataclass(frozen=True)
class AutMap:
    """An automorphism given by the images of the positive generators; ``images[0]`` is unused."""

    images: tuple[Word, ...]

    @property
    def n(self) -> int:
        return len(self.images) - 1

    def image(self, c: Letter) -> Word:
        word = self.images[abs(c)]
        return word if c > 0 else invert_word(word)


Automorphism = Union[Whitehead2, Whitehead1, AutMap]


@dataclass(frozen=True)
class Sym1Element(Whitehead1):
    """A signed permutation preserving every ~-class and fixing every thin node."""


@dataclass(frozen=True)
class Sym1Generator:
    """Coxeter generator of the signed permutations of one ~-class.

    ``kind`` is "t" for the inversion of the least member or "s" for the swap of members
    ``index`` and ``index + 1`` (1-based positions in ``members``).
    """

    kind: str
    members: tuple[int, ...]
    index: int
    element: Sym1Element

    @property
    def name(self) -> str:
        if self.kind == "t":
            return f"t[{self.members[0]}]"
        return f"s[{self.members[self.index - 1]},{self.members[self.index]}]"
