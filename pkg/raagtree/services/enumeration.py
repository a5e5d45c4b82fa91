from __future__ import annotations

import logging
import math
from collections import deque
from collections.abc import Iterator
from fractions import Fraction

import numpy as np

from raagtree.core.config import get_settings
from raagtree.core.errors import DivByZero, TooLarge, TooSmall
from raagtree.core.metrics import TREES_ENUMERATED, TREES_SAMPLED
from raagtree.models.stats import (
    MAX_TRACKED_DEPTH,
    Mode,
    Moments,
    RootedCounts,
    SampleTally,
    Statistic,
    TreeTally,
)
from raagtree.models.tree import LabeledTree, PruferCode, RootedTree, build_tree
from raagtree.schemas.reports import BridgeReport, StatReport
from raagtree.services.tree_core import (
    DEEP_THRESHOLD,
    decode_edges,
    in_vanishing_class,
    leaf_distances,
    prufer_decode,
    second_generation_size,
)
from raagtree.services.worker import PartitionRunner, split_range

logger = logging.getLogger(__name__)

Z_95 = 1.959963984540054
SAMPLE_BATCH = 4096


def _check_budget(n: int, budget: int | None) -> int:
    limit = budget if budget is not None else get_settings().enumeration_max_nodes
    if n > limit:
        raise TooLarge(f"exhaustive enumeration at n={n} exceeds the budget of {limit} nodes")
    return limit


def code_count(n: int) -> int:
    return n ** (n - 2) if n >= 2 else 1


def iter_codes(n: int, start: int = 0, stop: int | None = None) -> Iterator[tuple[int, ...]]:
    """Prufer codes in lexicographic order, restricted to the index range [start, stop).

    ``start`` is decoded as a base-n offset, so a partition never walks the codes before it.
    """
    length = max(n - 2, 0)
    stop = code_count(n) if stop is None else min(stop, code_count(n))
    if start >= stop:
        return
    digits = [0] * length
    rest = start
    for i in range(length - 1, -1, -1):
        rest, digits[i] = divmod(rest, n)
    for _ in range(start, stop):
        yield tuple(d + 1 for d in digits)
        for i in range(length - 1, -1, -1):
            digits[i] += 1
            if digits[i] < n:
                break
            digits[i] = 0


def enumerate_unrooted(n: int, *, budget: int | None = None) -> Iterator[LabeledTree]:
    if n < 1:
        raise TooSmall("trees need at least one node")
    _check_budget(n, budget)
    for code in iter_codes(n):
        yield build_tree(n, decode_edges(n, code))


def enumerate_rooted(n: int, *, budget: int | None = None) -> Iterator[RootedTree]:
    for tree in enumerate_unrooted(n, budget=budget):
        for root in tree.nodes:
            yield RootedTree(tree=tree, root=root)


def root_boundary_distance(rt: RootedTree) -> int:
    """Distance from the root to the nearest childless node, edges oriented away from the root."""
    t, root = rt.tree, rt.root
    dist = t.distances_from(root)
    best = math.inf
    for v in t.nodes:
        childless = all(dist[w] < dist[v] for w in t.adjacency[v])
        if childless:
            best = min(best, dist[v])
    return int(best)


def second_generation_count(rt: RootedTree) -> int:
    dist = rt.tree.distances_from(rt.root)
    return sum(1 for v in rt.tree.nodes if dist[v] == 2)


def height(rt: RootedTree) -> int:
    return max(rt.tree.distances_from(rt.root)[1:])


def _rooted_boundaries(t: LabeledTree, unrooted: list[int]) -> list[int]:
    """Childless-boundary distance of every root, reusing the leaf distances for non-leaf roots."""
    rooted = list(unrooted)
    if t.n == 1:
        rooted[1] = 0
        return rooted
    for r in t.leaves:
        seen = {r}
        queue: deque[tuple[int, int]] = deque([(r, 0)])
        while queue:
            u, d = queue.popleft()
            if u != r and len(t.adjacency[u]) == 1:
                rooted[r] = d
                break
            for w in t.adjacency[u]:
                if w not in seen:
                    seen.add(w)
                    queue.append((w, d + 1))
    return rooted


def tally_tree(t: LabeledTree, tally: TreeTally, *, heights: bool = False) -> None:
    tally.trees += 1
    tally.rooted_total += t.n
    if t.n == 1:
        tally.shallow_trees += 1
        tally.vanishing_trees += 1
        tally.boundary_at_least[0] += 1
        for k in range(MAX_TRACKED_DEPTH + 1):
            tally.height_at_most[k] += 1
        return

    unrooted = leaf_distances(t)
    deep = [v for v in t.nodes if unrooted[v] >= DEEP_THRESHOLD]
    tally.deep_total += len(deep)
    tally.upsilon_total += sum(second_generation_size(t, v) for v in deep)
    tally.shallow_trees += not deep
    tally.vanishing_trees += in_vanishing_class(t)

    rooted = _rooted_boundaries(t, unrooted)
    for r in t.nodes:
        d = rooted[r]
        for k in range(min(d, MAX_TRACKED_DEPTH) + 1):
            tally.boundary_at_least[k] += 1
        if d >= DEEP_THRESHOLD:
            generation = second_generation_size(t, r)
            tally.rooted_deep += 1
            tally.rooted_y += generation
            if len(t.adjacency[r]) > 1:
                tally.rooted_deep_nonleaf += 1
                tally.rooted_y_nonleaf += generation
        if heights:
            h = max(t.distances_from(r)[1:])
            for k in range(h, MAX_TRACKED_DEPTH + 1):
                tally.height_at_most[k] += 1


def _tally_partition(n: int, start: int, stop: int, heights: bool) -> TreeTally:
    tally = TreeTally()
    for code in iter_codes(n, start, stop):
        tally_tree(build_tree(n, decode_edges(n, code)), tally, heights=heights)
    return tally


def exhaustive_tally(
    n: int,
    *,
    heights: bool = False,
    workers: int | None = None,
    budget: int | None = None,
) -> TreeTally:
    if n < 1:
        raise TooSmall("trees need at least one node")
    _check_budget(n, budget)
    runner = PartitionRunner(workers)
    total = code_count(n)
    partitions = [(n, start, stop, heights) for start, stop in split_range(total, runner.workers * 4)]
    tally = runner.fold(_tally_partition, partitions, TreeTally.merge, TreeTally())
    TREES_ENUMERATED.labels(kind="unrooted").inc(tally.trees)
    logger.info(
        "exhaustive_tally_done",
        extra={"n": n, "trees": tally.trees, "partitions": len(partitions), "heights": heights},
    )
    return tally


def rooted_counts(n: int, *, workers: int | None = None, budget: int | None = None) -> RootedCounts:
    tally = exhaustive_tally(n, heights=True, workers=workers, budget=budget)
    return RootedCounts(
        n=n,
        total=tally.rooted_total,
        boundary_at_least=tuple(tally.boundary_at_least),
        height_at_most=tuple(tally.height_at_most),
    )


def _rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, chunk]))


def sample_chunks(samples: int) -> list[tuple[int, int]]:
    """(chunk index, draw count) pairs; fixed by the sample count alone, never by the worker count."""
    return [(index, min(SAMPLE_BATCH, samples - start)) for index, start in enumerate(range(0, samples, SAMPLE_BATCH))]


def _draw_chunk(n: int, seed: int, chunk: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    rng = _rng(seed, chunk)
    codes = rng.integers(1, n + 1, size=(count, max(n - 2, 0)))
    roots = rng.integers(1, n + 1, size=count)
    return codes, roots


def sample_uniform(n: int, seed: int, count: int) -> Iterator[LabeledTree]:
    """Uniform labeled trees from uniform Prufer codes; chunk i draws from SeedSequence([seed, i])."""
    if n < 2:
        raise TooSmall("sampling needs at least two nodes")
    for chunk, size in sample_chunks(count):
        codes, _ = _draw_chunk(n, seed, chunk, size)
        for row in codes:
            yield prufer_decode(PruferCode(n=n, code=tuple(int(x) for x in row)))


def _sample_partition(n: int, seed: int, chunks: tuple[tuple[int, int], ...]) -> SampleTally:
    tally = SampleTally()
    for chunk, size in chunks:
        codes, roots = _draw_chunk(n, seed, chunk, size)
        for row, root in zip(codes, roots):
            t = build_tree(n, decode_edges(n, [int(x) for x in row]))
            unrooted = leaf_distances(t)
            deep = [v for v in t.nodes if unrooted[v] >= DEEP_THRESHOLD]
            tally.deep.add(len(deep))
            tally.upsilon.add(sum(second_generation_size(t, v) for v in deep))
            tally.shallow.add(int(not deep))
            tally.vanishing.add(int(in_vanishing_class(t)))

            r = int(root)
            d = unrooted[r] if len(t.adjacency[r]) > 1 else _rooted_boundaries(t, unrooted)[r]
            is_deep = d >= DEEP_THRESHOLD
            generation = second_generation_size(t, r) if is_deep else 0
            tally.root_deep.add(int(is_deep))
            tally.y.add(generation)
            if is_deep:
                tally.n_given_deep.add(generation)
    return tally


def montecarlo_tally(n: int, seed: int, samples: int, *, workers: int | None = None) -> SampleTally:
    """Moments over ``samples`` draws; integer sums make the result independent of the worker count."""
    if n < 2:
        raise TooSmall("sampling needs at least two nodes")
    runner = PartitionRunner(workers)
    chunks = sample_chunks(samples)
    partitions = [(n, seed, tuple(chunks[start:stop])) for start, stop in split_range(len(chunks), runner.workers)]
    tally = runner.fold(_sample_partition, partitions, SampleTally.merge, SampleTally())
    TREES_SAMPLED.inc(samples)
    logger.info("montecarlo_tally_done", extra={"n": n, "seed": seed, "samples": samples, "chunks": len(chunks)})
    return tally


def exhaustive_value(statistic: Statistic, n: int, tally: TreeTally) -> Fraction:
    trees, rooted = tally.trees, tally.rooted_total
    if statistic is Statistic.DEEP_FRACTION:
        return Fraction(tally.deep_total, n * trees)
    if statistic is Statistic.UPSILON_PER_NODE:
        return Fraction(tally.upsilon_total, n * trees)
    if statistic is Statistic.SHALLOW_FRACTION:
        return Fraction(tally.shallow_trees, trees)
    if statistic is Statistic.VANISHING_CLASS_FRACTION:
        return Fraction(tally.vanishing_trees, trees)
    if statistic is Statistic.PROB_ROOT_DEEP:
        return Fraction(tally.rooted_deep, rooted)
    if statistic is Statistic.MEAN_Y:
        return Fraction(tally.rooted_y, rooted)
    if tally.rooted_deep == 0:
        raise DivByZero(f"no rooted tree on {n} nodes has a deep root")
    return Fraction(tally.rooted_y, tally.rooted_deep)


def _interval(moments: Moments, scale: float) -> tuple[float, float, float]:
    if moments.count == 0:
        raise DivByZero("no samples contributed to this statistic")
    mean = moments.total / moments.count
    if moments.count > 1:
        variance = (moments.total_sq - moments.count * mean * mean) / (moments.count - 1)
    else:
        variance = 0.0
    stderr = math.sqrt(max(variance, 0.0) / moments.count)
    return mean * scale, stderr * scale, Z_95 * stderr * scale


def montecarlo_report(statistic: Statistic, n: int, tally: SampleTally, *, seed: int, workers: int) -> StatReport:
    moments = tally.moments_for(statistic)
    mean, stderr, half_width = _interval(moments, 1.0 / n if statistic.per_node else 1.0)
    return StatReport(
        statistic=statistic,
        n=n,
        mode=Mode.MONTECARLO,
        value=mean,
        stderr=stderr,
        ci95=(mean - half_width, mean + half_width),
        samples=moments.count,
        seed=seed,
        workers=workers,
    )


def estimate(
    statistic: Statistic | str,
    n: int,
    mode: Mode | str,
    *,
    budget: int | None = None,
    seed: int | None = None,
    samples: int = 10_000,
    workers: int | None = None,
) -> StatReport:
    statistic = Statistic(statistic)
    mode = Mode(mode)
    if n < 2:
        raise TooSmall("tree statistics need at least two nodes")

    if mode is Mode.EXHAUSTIVE:
        tally = exhaustive_tally(n, workers=workers, budget=budget)
        return StatReport(
            statistic=statistic,
            n=n,
            mode=mode,
            value=exhaustive_value(statistic, n, tally),
            samples=tally.rooted_total if statistic.rooted else tally.trees,
        )

    if mode is Mode.MONTECARLO:
        seed = get_settings().default_seed if seed is None else seed
        runner_workers = workers or get_settings().effective_workers
        tally = montecarlo_tally(n, seed, samples, workers=runner_workers)
        return montecarlo_report(statistic, n, tally, seed=seed, workers=runner_workers)

    from raagtree.services import series_engine

    return series_engine.exact_report(statistic, n)


def bridge_report(n: int, *, workers: int | None = None, budget: int | None = None) -> BridgeReport:
    tally = exhaustive_tally(n, workers=workers, budget=budget)
    return BridgeReport(
        n=n,
        unrooted_deep_total=tally.deep_total,
        rooted_deep_total=tally.rooted_deep,
        rooted_deep_nonleaf_root=tally.rooted_deep_nonleaf,
        leaf_root_surplus=tally.rooted_deep - tally.rooted_deep_nonleaf,
        upsilon_total=tally.upsilon_total,
        rooted_y_total=tally.rooted_y,
        rooted_y_nonleaf_root=tally.rooted_y_nonleaf,
        leaf_root_y_surplus=tally.rooted_y - tally.rooted_y_nonleaf,
    )


def rooted_unrooted_bridge_check(n: int, *, workers: int | None = None, budget: int | None = None) -> bool:
    report = bridge_report(n, workers=workers, budget=budget)
    if not report.holds:
        logger.warning("bridge_identity_failed", extra=report.as_record())
    return report.holds
