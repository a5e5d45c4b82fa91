from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

from raagtree.core.errors import BadLabel


@dataclass(frozen=True, eq=False)
class LabeledTree:
    """An unrooted tree on nodes 1..n.

    ``adjacency`` is indexed by node label; slot 0 is an empty placeholder so that
    ``adjacency[v]`` reads naturally. Instances are built through
    ``raagtree.services.tree_core`` which validates the edge set.
    """

    n: int
    edges: frozenset[tuple[int, int]]
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledTree):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    @property
    def nodes(self) -> range:
        return range(1, self.n + 1)

    def check_node(self, v: int) -> int:
        if not isinstance(v, int) or not 1 <= v <= self.n:
            raise BadLabel(f"node {v!r} is not in 1..{self.n}")
        return v

    def lk(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def st(self, v: int) -> frozenset[int]:
        return self._stars[v]

    def deg(self, v: int) -> int:
        return len(self.adjacency[v])

    def is_leaf(self, v: int) -> bool:
        return len(self.adjacency[v]) == 1

    def adjacent(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    @cached_property
    def _stars(self) -> tuple[frozenset[int], ...]:
        return (frozenset(),) + tuple(frozenset(self.adjacency[v]) | {v} for v in self.nodes)

    @cached_property
    def leaves(self) -> tuple[int, ...]:
        return tuple(v for v in self.nodes if len(self.adjacency[v]) == 1)

    def distances_from(self, source: int) -> tuple[int, ...]:
        """BFS distances from ``source``; index 0 is unused and set to -1."""
        dist = [-1] * (self.n + 1)
        dist[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for w in self.adjacency[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return tuple(dist)

    def distance(self, u: int, v: int) -> int:
        return self.distances_from(u)[v]

    def components_outside_star(self, v: int) -> tuple[tuple[int, ...], ...]:
        """Connected components of T minus st(v), each sorted, listed in order of least element."""
        return self._outside_components[v]

    @cached_property
    def _outside_components(self) -> tuple[tuple[tuple[int, ...], ...], ...]:
        table: list[tuple[tuple[int, ...], ...]] = [()]
        for v in self.nodes:
            star = self.st(v)
            seen: set[int] = set(star)
            found: list[tuple[int, ...]] = []
            for start in self.nodes:
                if start in seen:
                    continue
                seen.add(start)
                part = [start]
                queue = deque([start])
                while queue:
                    u = queue.popleft()
                    for w in self.adjacency[u]:
                        if w not in seen:
                            seen.add(w)
                            part.append(w)
                            queue.append(w)
                found.append(tuple(sorted(part)))
            table.append(tuple(sorted(found)))
        return tuple(table)

    def leq(self, v: int, w: int) -> bool:
        return set(self.adjacency[v]) <= self.st(w)

    def sim(self, v: int, w: int) -> bool:
        return self.leq(v, w) and self.leq(w, v)

    @cached_property
    def equivalence_classes(self) -> tuple[tuple[int, ...], ...]:
        """The classes of the relation ~, sorted internally and by least element."""
        assigned: dict[int, int] = {}
        classes: list[list[int]] = []
        for v in self.nodes:
            if v in assigned:
                continue
            members = [v] + [w for w in self.nodes if w > v and w not in assigned and self.sim(v, w)]
            for w in members:
                assigned[w] = len(classes)
            classes.append(members)
        return tuple(tuple(c) for c in classes)

    def class_of(self, v: int) -> tuple[int, ...]:
        for members in self.equivalence_classes:
            if v in members:
                return members
        raise BadLabel(f"node {v!r} is not in 1..{self.n}")

    def relabel(self, permutation: dict[int, int] | tuple[int, ...]) -> LabeledTree:
        """Image of the tree under a bijection of labels (mapping or 1-indexed tuple with slot 0 unused)."""
        image = permutation if isinstance(permutation, dict) else dict(enumerate(permutation))
        edges = [(image[u], image[v]) for u, v in self.edges]
        return build_tree(self.n, edges)

    def edge_list(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def build_tree(n: int, edges: list[tuple[int, int]] | tuple[tuple[int, int], ...]) -> LabeledTree:
    """Assemble a tree from a trusted edge list (no validation)."""
    neighbours: list[list[int]] = [[] for _ in range(n + 1)]
    normalized: set[tuple[int, int]] = set()
    for u, v in edges:
        neighbours[u].append(v)
        neighbours[v].append(u)
        normalized.add((u, v) if u < v else (v, u))
    return LabeledTree(
        n=n,
        edges=frozenset(normalized),
        adjacency=tuple(tuple(sorted(row)) for row in neighbours),
    )


@dataclass(frozen=True)
class PruferCode:
    n: int
    code: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise BadLabel(f"node count must be at least 1, got {self.n}")
        expected = max(self.n - 2, 0)
        if len(self.code) != expected:
            raise BadLabel(f"Prufer code for n={self.n} must have length {expected}, got {len(self.code)}")
        for symbol in self.code:
            if not 1 <= symbol <= self.n:
                raise BadLabel(f"Prufer symbol {symbol} is not in 1..{self.n}")


@dataclass(frozen=True)
class BoundaryProfile:
    """Distance of every node to the leaf set, plus the deep set and the invariant upsilon.

    ``distances[v - 1]`` is the distance of node v to the nearest leaf.
    """

    distances: tuple[int, ...]
    deep: tuple[int, ...]
    shallow: bool
    upsilon: int

    def of(self, v: int) -> int:
        return self.distances[v - 1]


@dataclass(frozen=True)
class RootedTree:
    tree: LabeledTree
    root: int

    def __post_init__(self) -> None:
        self.tree.check_node(self.root)

    @property
    def n(self) -> int:
        return self.tree.n
