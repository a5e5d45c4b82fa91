from __future__ import annotations

import heapq
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from sympy import QQ, ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import invariant_factors

from raagtree.core.config import get_settings
from raagtree.core.errors import RaagTreeError, TooLarge, TooSmall
from raagtree.core.metrics import RELATOR_FAILURES, RELATOR_INSTANCES
from raagtree.models.automorphism import Automorphism, Whitehead1, Whitehead2, Word
from raagtree.models.tree import LabeledTree
from raagtree.schemas.reports import H1Result, TheoremAReport, VanishingItem, VanishingReport
from raagtree.services import raag_aut
from raagtree.services.relators import (
    SCHEMAS,
    SCHEMA_GENERATORS,
    ZERO_ROW_SCHEMAS,
    RelatorContext,
    RelatorInstance,
    build_context,
    zero_row_count,
)
from raagtree.services.storage import write_matrix_triplets
from raagtree.services.tree_core import boundary_profile

logger = logging.getLogger(__name__)

SparseRow = dict[int, int]


def _row_key(row: SparseRow) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(row.items()))


@dataclass(frozen=True)
class AbelianizedMatrix:
    """Relator rows over the generator columns; entries are exponent sums."""

    rows: tuple[SparseRow, ...]
    ncols: int

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def dense(self) -> list[list[int]]:
        table = [[0] * self.ncols for _ in self.rows]
        for i, row in enumerate(self.rows):
            for column, value in row.items():
                table[i][column] = value
        return table


@dataclass
class Presentation:
    """Generators (canonical type (2) forms, then Sym1 Coxeter generators) and abelianized relators."""

    tree: LabeledTree
    generators: list[Automorphism]
    names: list[str]
    rows: list[SparseRow] = field(default_factory=list)
    relators: list[RelatorInstance] = field(default_factory=list)
    schema_counts: dict[str, int] = field(default_factory=dict)
    failures: list[dict[str, object]] = field(default_factory=list)
    type2_count: int = 0
    _signatures: dict[tuple[Word, ...], int] = field(default_factory=dict, repr=False)
    _sym1_columns: dict[tuple[int, ...], int] = field(default_factory=dict, repr=False)
    _cache: dict[Whitehead2, int | None] = field(default_factory=dict, repr=False)

    @property
    def verified(self) -> bool:
        return not self.failures

    @property
    def matrix(self) -> AbelianizedMatrix:
        return AbelianizedMatrix(rows=tuple(self.rows), ncols=len(self.generators))

    def column_of(self, aut: Whitehead2) -> int | None:
        """Generator column of a type (2) automorphism; None for the identity."""
        if aut in self._cache:
            return self._cache[aut]
        signature = raag_aut.generator_images(self.tree, aut)
        if all(signature[v] == (v,) for v in self.tree.nodes):
            column = None
        elif signature in self._signatures:
            column = self._signatures[signature]
        else:
            raise RaagTreeError(f"{raag_aut.to_json(aut)} is not among the presentation generators")
        self._cache[aut] = column
        return column

    def sym1_columns(self, aut: Whitehead1) -> list[int]:
        if aut.images in self._sym1_columns:
            return [self._sym1_columns[aut.images]]
        return [self._sym1_columns[gen.element.images] for gen in raag_aut.sym1_word(self.tree, aut)]

    def abelianize(self, instance: RelatorInstance) -> SparseRow:
        row: SparseRow = {}

        def add(column: int | None, amount: int) -> None:
            if column is None:
                return
            value = row.get(column, 0) + amount
            if value:
                row[column] = value
            else:
                row.pop(column, None)

        for side, sign in ((instance.lhs, 1), (instance.rhs, -1)):
            for aut, exponent in side:
                if isinstance(aut, Whitehead2):
                    add(self.column_of(aut), sign * exponent)
                elif isinstance(aut, Whitehead1):
                    for column in self.sym1_columns(aut):
                        add(column, sign * exponent)
                else:
                    raise TypeError("relator factors are Whitehead automorphisms")
        return row

    def columns_for(self, auts: Iterable[Whitehead2]) -> list[int]:
        columns = []
        for aut in auts:
            column = self.column_of(aut)
            if column is None:
                raise RaagTreeError(f"{raag_aut.to_json(aut)} is trivial")
            columns.append(column)
        return columns


def _new_presentation(t: LabeledTree, ctx: RelatorContext) -> Presentation:
    generators: list[Automorphism] = list(ctx.canonical)
    names = [_name(aut) for aut in ctx.canonical]
    presentation = Presentation(tree=t, generators=generators, names=names, type2_count=len(ctx.canonical))
    for column, aut in enumerate(ctx.canonical):
        presentation._signatures[raag_aut.generator_images(t, aut)] = column
    for gen in ctx.sym1:
        presentation._sym1_columns[gen.element.images] = len(generators)
        generators.append(gen.element)
        names.append(gen.name)
    return presentation


def _name(aut: Whitehead2) -> str:
    payload = raag_aut.to_json(aut)
    return f"({','.join(payload['A'])};{payload['a']})"


def build_presentation(
    t: LabeledTree,
    *,
    max_nodes: int | None = None,
    generator_budget: int | None = None,
    verify: bool | None = None,
    pairwise_limit: int | None = None,
) -> Presentation:
    settings = get_settings()
    limit = max_nodes if max_nodes is not None else settings.presentation_max_nodes
    if t.n < 2:
        raise TooSmall("a presentation needs at least two nodes")
    if t.n > limit:
        raise TooLarge(f"presentation at n={t.n} exceeds the budget of {limit} nodes")
    verify = settings.verify_relators if verify is None else verify
    pairwise_limit = settings.pair_enumeration_limit if pairwise_limit is None else pairwise_limit

    ctx = build_context(t, budget=generator_budget, pairwise_limit=pairwise_limit)
    presentation = _new_presentation(t, ctx)
    logger.info(
        "presentation_generators",
        extra={
            "n": t.n,
            "type2": len(ctx.canonical),
            "type2_pairs": len(ctx.pairs),
            "sym1": len(ctx.sym1),
            "pairwise": ctx.pairwise,
        },
    )

    seen: set[tuple[tuple[int, int], ...]] = set()
    for schema in SCHEMAS:
        if schema in ZERO_ROW_SCHEMAS and not ctx.pairwise:
            presentation.schema_counts[schema] = zero_row_count(ctx, schema)
            continue
        count = 0
        for instance in SCHEMA_GENERATORS[schema](ctx):
            count += 1
            RELATOR_INSTANCES.labels(schema=schema).inc()
            check = verify and (not instance.zero_row or ctx.pairwise)
            if check and not instance.holds(t):
                RELATOR_FAILURES.labels(schema=schema).inc()
                failure = {
                    "schema": schema,
                    "lhs": [raag_aut.to_json(aut) | {"exponent": e} for aut, e in instance.lhs],
                    "rhs": [raag_aut.to_json(aut) | {"exponent": e} for aut, e in instance.rhs],
                }
                presentation.failures.append(failure)
                logger.warning("relator_check_failed", extra={"n": t.n, "schema": schema})
                continue
            if ctx.pairwise:
                presentation.relators.append(instance)
            if instance.zero_row:
                continue
            row = presentation.abelianize(instance)
            if not row:
                continue
            key = _row_key(row)
            if key not in seen:
                seen.add(key)
                presentation.rows.append(row)
        presentation.schema_counts[schema] = count

    logger.info(
        "presentation_built",
        extra={
            "n": t.n,
            "generators": len(presentation.generators),
            "rows": len(presentation.rows),
            "instances": sum(presentation.schema_counts.values()),
            "failures": len(presentation.failures),
        },
    )
    return presentation


class UnitPivotLattice:
    """Integer row lattice reduced by exact eliminations on +-1 pivots.

    Each pivot row has zeros in the pivot columns created before it, so the pivot block is
    unimodular and Z^G / L is Z^(G - pivots) / (remainder lattice). Pivots are applied in
    creation order, which keeps elimination finite.
    """

    def __init__(self, ncols: int) -> None:
        self.ncols = ncols
        self.pivot_rows: list[SparseRow] = []
        self.pivot_columns: list[int] = []
        self._pivot_of: dict[int, int] = {}
        self.remainder: list[SparseRow] = []

    def reduce(self, row: SparseRow) -> SparseRow:
        row = dict(row)
        heap = [self._pivot_of[c] for c in row if c in self._pivot_of]
        heapq.heapify(heap)
        while heap:
            index = heapq.heappop(heap)
            column = self.pivot_columns[index]
            factor = row.get(column, 0)
            if not factor:
                continue
            pivot = self.pivot_rows[index]
            factor *= pivot[column]
            for c, value in pivot.items():
                updated = row.get(c, 0) - factor * value
                if updated:
                    if c not in row and c in self._pivot_of:
                        heapq.heappush(heap, self._pivot_of[c])
                    row[c] = updated
                else:
                    row.pop(c, None)
        return row

    def add(self, row: SparseRow) -> bool:
        """Adds a row; returns True if it became a new pivot."""
        reduced = self.reduce(row)
        if not reduced:
            return False
        units = [c for c, v in reduced.items() if v in (1, -1)]
        if units:
            column = min(units)
            self._pivot_of[column] = len(self.pivot_rows)
            self.pivot_rows.append(reduced)
            self.pivot_columns.append(column)
            return True
        self.remainder.append(reduced)
        return False

    def extend(self, rows: Iterable[SparseRow]) -> None:
        for row in sorted(rows, key=len):
            self.add(row)
        self._settle()

    def _settle(self) -> None:
        while True:
            pending, self.remainder = self.remainder, []
            created = False
            for row in sorted(pending, key=len):
                created = self.add(row) or created
            if not created:
                break
        self.remainder = [r for r in (self.reduce(row) for row in self.remainder) if r]

    @property
    def free_columns(self) -> list[int]:
        pivots = set(self.pivot_columns)
        return [c for c in range(self.ncols) if c not in pivots]

    def _dense(self, rows: Sequence[SparseRow], columns: Sequence[int]) -> DomainMatrix:
        position = {c: i for i, c in enumerate(columns)}
        dense = [[ZZ(0)] * len(columns) for _ in rows]
        for i, row in enumerate(rows):
            for c, v in row.items():
                dense[i][position[c]] = ZZ(v)
        return DomainMatrix(dense, (len(rows), len(columns)), ZZ)

    def remainder_rank(self, extra: Sequence[SparseRow] = ()) -> int:
        rows = list(self.remainder) + [r for r in (self.reduce(e) for e in extra) if r]
        if not rows:
            return 0
        return self._dense(rows, self.free_columns).convert_to(QQ).rank()

    def rank(self) -> int:
        return len(self.pivot_rows) + self.remainder_rank()

    def torsion(self) -> list[int]:
        if not self.remainder:
            return []
        factors = invariant_factors(self._dense(self.remainder, self.free_columns))
        return sorted(int(abs(d)) for d in factors if abs(int(d)) > 1)

    def in_rational_span(self, vector: SparseRow) -> bool:
        return self.remainder_rank([vector]) == self.remainder_rank()


def rational_rank(rows: Sequence[SparseRow]) -> int:
    """Fraction-free sparse elimination; each row is kept primitive to bound growth."""
    pivots: dict[int, SparseRow] = {}
    rank = 0
    for original in rows:
        row = dict(original)
        while row:
            column = min(row)
            pivot = pivots.get(column)
            if pivot is None:
                pivots[column] = row
                rank += 1
                break
            a, b = pivot[column], row[column]
            combined: SparseRow = {}
            for c in set(row) | set(pivot):
                value = a * row.get(c, 0) - b * pivot.get(c, 0)
                if value:
                    combined[c] = value
            if combined:
                g = math.gcd(*combined.values())
                combined = {c: v // g for c, v in combined.items()}
            row = combined
    return rank


def lattice_for(presentation: Presentation) -> UnitPivotLattice:
    lattice = UnitPivotLattice(len(presentation.generators))
    lattice.extend(presentation.rows)
    return lattice


def _h1(presentation: Presentation, lattice: UnitPivotLattice) -> H1Result:
    if not presentation.verified:
        raise RaagTreeError(f"{len(presentation.failures)} relator instances failed the automorphism check")
    rank = lattice.rank()
    result = H1Result(
        b1=len(presentation.generators) - rank,
        torsion=lattice.torsion(),
        generators=len(presentation.generators),
        relators=sum(presentation.schema_counts.values()),
        rows=len(presentation.rows),
        rank=rank,
        schema_counts=dict(presentation.schema_counts),
    )
    logger.info("betti_computed", extra={"n": presentation.tree.n, "b1": result.b1, "rank": rank})
    return result


def betti_one(t: LabeledTree, *, presentation: Presentation | None = None, **options) -> H1Result:
    presentation = presentation or build_presentation(t, **options)
    return _h1(presentation, lattice_for(presentation))


def phi_kills_relators(presentation: Presentation) -> bool:
    t = presentation.tree
    images = raag_aut.phi_matrix(t, presentation.generators)
    width = len(raag_aut.omega(t))
    for row in presentation.rows:
        total = [0] * width
        for column, coefficient in row.items():
            for k, value in enumerate(images[column]):
                total[k] += coefficient * value
        if any(total):
            return False
    return True


def omega_generators(t: LabeledTree) -> list[Whitehead2]:
    return [raag_aut.partial_conjugation(t, component, a) for a, component in raag_aut.omega(t)]


def theorem_a_report(t: LabeledTree, *, presentation: Presentation | None = None, **options) -> TheoremAReport:
    presentation = presentation or build_presentation(t, **options)
    lattice = lattice_for(presentation)
    result = _h1(presentation, lattice)
    upsilon = boundary_profile(t).upsilon
    columns = presentation.columns_for(omega_generators(t))
    units = [{c: 1} for c in columns]
    omega_rank = lattice.remainder_rank(units) - lattice.remainder_rank()
    return TheoremAReport(
        n=t.n,
        upsilon=upsilon,
        b1=result.b1,
        omega_size=len(columns),
        omega_rank=omega_rank,
        phi_kills_relators=phi_kills_relators(presentation),
    )


def check_theorem_A(t: LabeledTree, **options) -> bool:
    report = theorem_a_report(t, **options)
    if not report.holds:
        logger.warning("theorem_a_failed", extra=report.model_dump())
    return report.holds


def _common_neighbour(t: LabeledTree, *nodes: int) -> bool:
    shared = set(t.lk(nodes[0]))
    for v in nodes[1:]:
        shared &= set(t.lk(v))
    return bool(shared)


def vanishing_elements(t: LabeledTree) -> list[tuple[str, Whitehead2]]:
    """Transvections and partial conjugations the leaf-pair arguments force to zero in H1."""
    items: list[tuple[str, Whitehead2]] = []
    leaves = set(t.leaves)
    for a in t.nodes:
        for d in t.nodes:
            if d == a or not t.leq(d, a):
                continue
            shared_leaf = a in leaves and d in leaves and any(
                b not in (a, d) and _common_neighbour(t, a, b, d) for b in leaves
            )
            adjacent_leaf = t.adjacent(a, d) and any(b != d and t.adjacent(a, b) for b in leaves)
            if shared_leaf:
                items.append(("transvection-shared-neighbour", raag_aut.transvection(t, d, a)))
            elif adjacent_leaf:
                items.append(("transvection-adjacent-leaf", raag_aut.transvection(t, d, a)))
    for a in sorted(leaves):
        if any(b != a and _common_neighbour(t, a, b) for b in leaves):
            for component in t.components_outside_star(a):
                items.append(("partial-conjugation-leaf", raag_aut.partial_conjugation(t, component, a)))
    return items


def vanishing_report(t: LabeledTree, *, presentation: Presentation | None = None, **options) -> VanishingReport:
    presentation = presentation or build_presentation(t, **options)
    lattice = lattice_for(presentation)
    items = []
    for case, aut in vanishing_elements(t):
        column = presentation.column_of(aut)
        vanishes = column is None or lattice.in_rational_span({column: 1})
        items.append(VanishingItem(case=case, generator=raag_aut.to_json(aut), vanishes=vanishes))
    return VanishingReport(n=t.n, items=items)


def check_vanishing_lemma(t: LabeledTree, **options) -> bool:
    return vanishing_report(t, **options).holds


def write_matrix(presentation: Presentation, path: Path) -> Path:
    matrix = presentation.matrix
    return write_matrix_triplets(path, matrix.rows, matrix.ncols)


__all__ = [
    "AbelianizedMatrix",
    "Presentation",
    "UnitPivotLattice",
    "betti_one",
    "build_presentation",
    "check_theorem_A",
    "check_vanishing_lemma",
    "rational_rank",
    "theorem_a_report",
    "vanishing_report",
]
