from __future__ import annotations

import heapq
import logging
import re
from collections import deque
from collections.abc import Iterable, Sequence

from raagtree.core.errors import BadLabel, NotATree, TooSmall
from raagtree.models.tree import BoundaryProfile, LabeledTree, PruferCode, build_tree

logger = logging.getLogger(__name__)

DEEP_THRESHOLD = 3


def from_edges(n: int, edges: Iterable[Sequence[int]]) -> LabeledTree:
    if not isinstance(n, int) or n < 1:
        raise BadLabel(f"node count must be a positive integer, got {n!r}")
    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for raw in edges:
        if len(raw) != 2:
            raise NotATree(f"edge {tuple(raw)!r} does not have two endpoints")
        u, v = int(raw[0]), int(raw[1])
        for label in (u, v):
            if not 1 <= label <= n:
                raise BadLabel(f"edge endpoint {label} is not in 1..{n}")
        if u == v:
            raise NotATree(f"self-loop at node {u}")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise NotATree(f"duplicate edge {key}")
        seen.add(key)
        pairs.append(key)
    if len(pairs) != n - 1:
        raise NotATree(f"a tree on {n} nodes has {n - 1} edges, got {len(pairs)}")
    tree = build_tree(n, pairs)
    if -1 in tree.distances_from(1)[1:]:
        raise NotATree("edge set is disconnected")
    return tree


def decode_edges(n: int, code: Sequence[int]) -> list[tuple[int, int]]:
    """Edges of the tree with Prufer code ``code``, joining the smallest remaining leaf each step."""
    if n == 1:
        return []
    degree = [1] * (n + 1)
    for symbol in code:
        degree[symbol] += 1
    leaves = [v for v in range(1, n + 1) if degree[v] == 1]
    heapq.heapify(leaves)
    edges: list[tuple[int, int]] = []
    for symbol in code:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, symbol))
        degree[symbol] -= 1
        if degree[symbol] == 1:
            heapq.heappush(leaves, symbol)
    edges.append((heapq.heappop(leaves), heapq.heappop(leaves)))
    return edges


def prufer_decode(code: PruferCode) -> LabeledTree:
    return build_tree(code.n, decode_edges(code.n, code.code))


def prufer_encode(t: LabeledTree) -> PruferCode:
    n = t.n
    degree = [len(row) for row in t.adjacency]
    removed = [False] * (n + 1)
    leaves = [v for v in t.nodes if degree[v] == 1]
    heapq.heapify(leaves)
    code: list[int] = []
    for _ in range(max(n - 2, 0)):
        leaf = heapq.heappop(leaves)
        removed[leaf] = True
        parent = next(w for w in t.adjacency[leaf] if not removed[w])
        code.append(parent)
        degree[parent] -= 1
        if degree[parent] == 1:
            heapq.heappush(leaves, parent)
    return PruferCode(n=n, code=tuple(code))


def leaf_distances(t: LabeledTree) -> list[int]:
    """Multi-source BFS from every leaf; slot 0 unused."""
    dist = [-1] * (t.n + 1)
    queue: deque[int] = deque()
    for v in t.leaves:
        dist[v] = 0
        queue.append(v)
    while queue:
        u = queue.popleft()
        for w in t.adjacency[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def second_generation_size(t: LabeledTree, v: int) -> int:
    return sum(len(t.adjacency[w]) - 1 for w in t.adjacency[v])


def boundary_profile(t: LabeledTree) -> BoundaryProfile:
    if t.n < 2:
        raise TooSmall("the boundary of a single-node tree is undefined")
    dist = leaf_distances(t)
    deep = tuple(v for v in t.nodes if dist[v] >= DEEP_THRESHOLD)
    upsilon = sum(second_generation_size(t, v) for v in deep)
    return BoundaryProfile(
        distances=tuple(dist[1:]),
        deep=deep,
        shallow=not deep,
        upsilon=upsilon,
    )


def leq(t: LabeledTree, v: int, w: int) -> bool:
    t.check_node(v)
    t.check_node(w)
    return t.leq(v, w)


def sim(t: LabeledTree, v: int, w: int) -> bool:
    t.check_node(v)
    t.check_node(w)
    return t.sim(v, w)


def is_thin(t: LabeledTree, v: int) -> bool:
    t.check_node(v)
    return len(t.class_of(v)) == 1


def leq_tree_characterization(t: LabeledTree, v: int, w: int) -> bool:
    """v <= w iff v is a leaf within distance two of w; v <= v holds by reflexivity."""
    if t.n < 3:
        raise TooSmall("the leaf criterion for <= needs at least three nodes")
    t.check_node(v)
    t.check_node(w)
    if v == w:
        return True
    return t.is_leaf(v) and t.distance(v, w) <= 2


def sim_tree_characterization(t: LabeledTree, v: int, w: int) -> bool:
    if t.n < 3:
        raise TooSmall("the leaf criterion for ~ needs at least three nodes")
    t.check_node(v)
    t.check_node(w)
    if v == w:
        return True
    return t.is_leaf(v) and t.is_leaf(w) and t.adjacency[v][0] == t.adjacency[w][0]


def in_vanishing_class(t: LabeledTree) -> bool:
    """Every node is a leaf or has at least three leaf neighbours."""
    for v in t.nodes:
        if t.is_leaf(v):
            continue
        if sum(1 for w in t.adjacency[v] if t.is_leaf(w)) < 3:
            return False
    return True


def centers(t: LabeledTree) -> tuple[int, ...]:
    degree = [len(row) for row in t.adjacency]
    remaining = t.n
    layer = [v for v in t.nodes if degree[v] <= 1]
    while remaining > 2:
        remaining -= len(layer)
        following: list[int] = []
        for leaf in layer:
            for w in t.adjacency[leaf]:
                degree[w] -= 1
                if degree[w] == 1:
                    following.append(w)
        layer = following
    return tuple(sorted(layer))


def _rooted_code(t: LabeledTree, root: int) -> str:
    parent = {root: 0}
    order = [root]
    for u in order:
        for w in t.adjacency[u]:
            if w != parent[u]:
                parent[w] = u
                order.append(w)
    codes: dict[int, str] = {}
    for u in reversed(order):
        children = sorted(codes[w] for w in t.adjacency[u] if w != parent[u])
        codes[u] = "(" + "".join(children) + ")"
    return codes[root]


def canonical_form(t: LabeledTree) -> str:
    """Label-free encoding: equal strings iff the trees are isomorphic."""
    return min(_rooted_code(t, c) for c in centers(t))


def path(n: int) -> LabeledTree:
    return from_edges(n, [(i, i + 1) for i in range(1, n)])


def star(n: int) -> LabeledTree:
    """Star with centre 1 and leaves 2..n."""
    return from_edges(n, [(1, i) for i in range(2, n + 1)])


def double_star(k: int) -> LabeledTree:
    """Centres 1 and 2 joined by an edge, each carrying k leaves."""
    edges = [(1, 2)]
    edges += [(1, 3 + i) for i in range(k)]
    edges += [(2, 3 + k + i) for i in range(k)]
    return from_edges(2 + 2 * k, edges)


_PRUFER_LINE = re.compile(r"^\s*prufer\s*:(?P<body>.*)$", re.IGNORECASE)


def parse_tree_text(text: str) -> LabeledTree:
    """Parse the edge-list format ("n" then "u v" lines) or a single "prufer: c1 ... c_{n-2}" line."""
    lines = [line.strip() for line in text.splitlines()]
    lines = [line for line in lines if line and not line.startswith("#")]
    if not lines:
        raise NotATree("empty tree description")
    match = _PRUFER_LINE.match(lines[0])
    if match:
        try:
            symbols = tuple(int(token) for token in match.group("body").split())
        except ValueError as exc:
            raise BadLabel(f"non-integer Prufer symbol in {lines[0]!r}") from exc
        return prufer_decode(PruferCode(n=len(symbols) + 2, code=symbols))
    try:
        n = int(lines[0])
        edges = [tuple(int(token) for token in line.split()) for line in lines[1:]]
    except ValueError as exc:
        raise BadLabel(f"tree file must contain integers only: {exc}") from exc
    return from_edges(n, edges)
