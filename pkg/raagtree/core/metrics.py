from __future__ import annotations

from pathlib import Path

from prometheus_client import CollectorRegistry, Counter, Histogram, generate_latest, write_to_textfile

REGISTRY = CollectorRegistry()

TREES_ENUMERATED = Counter(
    "raagtree_trees_enumerated_total",
    "Labeled trees visited by exhaustive enumeration",
    labelnames=("kind",),
    registry=REGISTRY,
)
TREES_SAMPLED = Counter(
    "raagtree_trees_sampled_total",
    "Uniform random trees drawn",
    registry=REGISTRY,
)
RELATOR_INSTANCES = Counter(
    "raagtree_relator_instances_total",
    "Relator instances generated",
    labelnames=("schema",),
    registry=REGISTRY,
)
RELATOR_FAILURES = Counter(
    "raagtree_relator_failures_total",
    "Relator instances that failed the automorphism identity check",
    labelnames=("schema",),
    registry=REGISTRY,
)
SERIES_OPERATIONS = Counter(
    "raagtree_series_operations_total",
    "Truncated series operations",
    labelnames=("kind",),
    registry=REGISTRY,
)
COMMAND_LATENCY = Histogram(
    "raagtree_command_latency_seconds",
    "Wall time per CLI command",
    labelnames=("command",),
    buckets=(0.01, 0.1, 1.0, 10.0, 60.0, 600.0, 3600.0),
    registry=REGISTRY,
)


def render_metrics() -> str:
    return generate_latest(REGISTRY).decode("utf-8")


def write_metrics(path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    write_to_textfile(str(path), REGISTRY)
