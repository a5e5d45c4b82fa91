from __future__ import annotations

import logging
import math
import time
from collections.abc import Callable, Iterator
from fractions import Fraction

from raagtree.core.config import get_settings
from raagtree.models.series import TruncatedSeries
from raagtree.models.stats import Mode, Statistic
from raagtree.models.tree import LabeledTree
from raagtree.schemas.reports import SuiteResult
from raagtree.services import enumeration, homology, series_engine
from raagtree.services.tree_core import canonical_form, in_vanishing_class

logger = logging.getLogger(__name__)

SUITES = ("series", "enumeration", "relators", "homology", "montecarlo")
SERIES_CHECKED = (Statistic.PROB_ROOT_DEEP, Statistic.MEAN_Y, Statistic.DEEP_FRACTION, Statistic.UPSILON_PER_NODE)
MONTECARLO_REPETITIONS = 100
MONTECARLO_SAMPLES = 100_000
MONTECARLO_MIN_COVERAGE = 0.9
# smallest tree size with a deep node; below it every interval is the point 0
MONTECARLO_FIRST_N = 7


def distinct_trees(n: int) -> Iterator[LabeledTree]:
    """One labeled representative per unlabeled tree on n nodes, first in Prufer order."""
    seen: set[str] = set()
    for tree in enumeration.enumerate_unrooted(n):
        key = canonical_form(tree)
        if key not in seen:
            seen.add(key)
            yield tree


class VerificationService:
    """Runs the acceptance suites; each reports metrics, failures and a pass flag."""

    def __init__(
        self,
        *,
        max_n: int | None = None,
        workers: int | None = None,
        seed: int | None = None,
        repetitions: int = MONTECARLO_REPETITIONS,
        samples: int = MONTECARLO_SAMPLES,
        min_coverage: float = MONTECARLO_MIN_COVERAGE,
    ) -> None:
        self.settings = get_settings()
        self.max_n = max_n
        self.workers = workers
        self.seed = self.settings.default_seed if seed is None else seed
        self.repetitions = repetitions
        self.samples = samples
        self.min_coverage = min_coverage

    def run(self, suite: str) -> list[SuiteResult]:
        if suite == "all":
            return self.verify_all()
        handler: Callable[[], SuiteResult] = getattr(self, f"verify_{suite}")
        return [self._timed(suite, handler)]

    def verify_all(self) -> list[SuiteResult]:
        return [self._timed(name, getattr(self, f"verify_{name}")) for name in SUITES]

    def _timed(self, name: str, handler: Callable[[], SuiteResult]) -> SuiteResult:
        started = time.perf_counter()
        result = handler()
        logger.info(
            "suite_done",
            extra={
                "suite": name,
                "passed": result.passed,
                "failures": len(result.failures),
                "seconds": round(time.perf_counter() - started, 3),
            },
        )
        return result

    def verify_series(self, order: int = 20, closed_order: int = 60, lagrange_max: int = 30) -> SuiteResult:
        failures: list[dict] = []
        stirling = series_engine.stirling_identity_results(order)
        failures += [{"check": "stirling", "identity": name} for name, ok in stirling.items() if not ok]

        z = TruncatedSeries.z(lagrange_max)
        exp_series = z.exp()
        T = series_engine.cayley_T(lagrange_max)
        lagrange_checked = 0
        for k in range(1, lagrange_max + 1):
            power = T.power(k)
            g = z.power(k)
            for n in range(k, lagrange_max + 1):
                expected = Fraction(k * n ** (n - k), n * math.factorial(n - k))
                via_lagrange = series_engine.lagrange_coef(g, exp_series, n)
                lagrange_checked += 1
                if via_lagrange != expected or power.coef(n) != expected:
                    failures.append({"check": "lagrange", "k": k, "n": n})

        for k in (1, 2, 3):
            if series_engine.psi(k, closed_order) != series_engine.psi_closed_form(k, closed_order):
                failures.append({"check": "psi_closed_form", "k": k})
        fixed_point = series_engine.cayley_T_fixed_point(order) == series_engine.cayley_T(order)
        if not fixed_point:
            failures.append({"check": "cayley_fixed_point", "order": order})

        metrics = {
            "stirling_order": order,
            "stirling_identities": sum(stirling.values()),
            "lagrange_checked": lagrange_checked,
            "closed_form_order": closed_order,
            "fixed_point": fixed_point,
        }
        return SuiteResult(suite="series", passed=not failures, metrics=metrics, failures=failures)

    def verify_enumeration(self) -> SuiteResult:
        max_n = self.max_n or min(8, self.settings.enumeration_max_nodes)
        failures: list[dict] = []
        for n in range(1, max_n + 1):
            counts = enumeration.rooted_counts(n, workers=self.workers)
            unrooted = sum(1 for _ in enumeration.enumerate_unrooted(n)) if n <= 6 else counts.total // n
            if unrooted != enumeration.code_count(n) or counts.total != n ** (n - 1):
                failures.append({"check": "cayley", "n": n, "unrooted": unrooted, "rooted": counts.total})
            for k in range(len(counts.boundary_at_least)):
                if series_engine.psi_count(k, n) != counts.boundary_at_least[k]:
                    failures.append({"check": "psi_oracle", "n": n, "k": k})
                if series_engine.phi_count(k, n) != counts.height_at_most[k]:
                    failures.append({"check": "phi_oracle", "n": n, "k": k})
            if n < 2:
                continue
            bridge = enumeration.bridge_report(n, workers=self.workers)
            surplus = series_engine.egf_count(series_engine.leaf_root_deep_series(n), n)
            weighted = series_engine.egf_count(series_engine.leaf_root_weighted_series(n), n)
            if not bridge.holds or bridge.leaf_root_surplus != surplus or bridge.leaf_root_y_surplus != weighted:
                failures.append({"check": "bridge", **bridge.as_record()})
            for statistic in SERIES_CHECKED:
                exhaustive = enumeration.estimate(statistic, n, Mode.EXHAUSTIVE, workers=self.workers).value
                if exhaustive != series_engine.exact_report(statistic, n).value:
                    failures.append({"check": "series_vs_exhaustive", "n": n, "statistic": statistic.value})
        return SuiteResult(
            suite="enumeration", passed=not failures, metrics={"max_n": max_n}, failures=failures
        )

    def verify_relators(self, pairwise_max_n: int = 4) -> SuiteResult:
        max_n = self.max_n or min(5, self.settings.presentation_max_nodes)
        failures: list[dict] = []
        instances: dict[str, int] = {}
        trees = 0
        for n in range(2, max_n + 1):
            for tree in distinct_trees(n):
                trees += 1
                limit = 10**9 if n <= pairwise_max_n else None
                presentation = homology.build_presentation(tree, max_nodes=max_n, verify=True, pairwise_limit=limit)
                for schema, count in presentation.schema_counts.items():
                    instances[schema] = instances.get(schema, 0) + count
                failures += [{"edges": tree.edge_list(), **f} for f in presentation.failures[:5]]
        return SuiteResult(
            suite="relators",
            passed=not failures,
            metrics={"max_n": max_n, "trees": trees, "instances": instances},
            failures=failures,
        )

    def verify_homology(self) -> SuiteResult:
        max_n = self.max_n or self.settings.presentation_max_nodes
        failures: list[dict] = []
        records: list[dict] = []
        for n in range(2, max_n + 1):
            for tree in distinct_trees(n):
                presentation = homology.build_presentation(tree, max_nodes=max_n)
                report = homology.theorem_a_report(tree, presentation=presentation)
                vanishing = homology.vanishing_report(tree, presentation=presentation)
                record = {"edges": tree.edge_list(), "b1": report.b1, "upsilon": report.upsilon}
                records.append(record)
                if not report.holds:
                    failures.append({"check": "theorem_a", **record, **report.model_dump()})
                if not vanishing.holds:
                    failures.append({"check": "vanishing_lemma", **record})
                if in_vanishing_class(tree) and report.b1 != 0:
                    failures.append({"check": "vanishing_class", **record})
        return SuiteResult(
            suite="homology",
            passed=not failures,
            metrics={"max_n": max_n, "trees": len(records), "betti": records},
            failures=failures,
        )

    def verify_montecarlo(self) -> SuiteResult:
        """Share of seeded runs whose 95% interval covers the exhaustive mean, per statistic and n."""
        repetitions, samples, min_coverage = self.repetitions, self.samples, self.min_coverage
        max_n = min(max(self.max_n or 8, MONTECARLO_FIRST_N), self.settings.enumeration_max_nodes)
        workers = self.workers or 1
        statistics = (Statistic.DEEP_FRACTION, Statistic.UPSILON_PER_NODE)
        failures: list[dict] = []
        coverage: dict[str, float] = {}
        for n in range(MONTECARLO_FIRST_N, max_n + 1):
            exhaustive = enumeration.exhaustive_tally(n, workers=self.workers)
            exact = {s: enumeration.exhaustive_value(s, n, exhaustive) for s in statistics}
            hits = dict.fromkeys(statistics, 0)
            for repetition in range(repetitions):
                seed = self.seed + repetition
                tally = enumeration.montecarlo_tally(n, seed, samples, workers=workers)
                for statistic in statistics:
                    report = enumeration.montecarlo_report(statistic, n, tally, seed=seed, workers=workers)
                    hits[statistic] += report.covers(exact[statistic])
            for statistic in statistics:
                rate = hits[statistic] / repetitions
                coverage[f"{statistic.value}@{n}"] = rate
                if rate < min_coverage:
                    failures.append({"check": "coverage", "n": n, "statistic": statistic.value, "rate": rate})
        return SuiteResult(
            suite="montecarlo",
            passed=not failures,
            metrics={
                "repetitions": repetitions,
                "samples": samples,
                "min_coverage": min_coverage,
                "coverage": coverage,
            },
            failures=failures,
        )
