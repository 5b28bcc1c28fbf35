"""Prometheus metrics for classification runs.

Metrics live on a private registry and are only ever written to a textfile
(node-exporter textfile collector style), never to stdout.
"""

import logging
from pathlib import Path
from typing import Union

from prometheus_client import (
    CollectorRegistry,
    Counter,
    Gauge,
    Histogram,
    disable_created_metrics,
    write_to_textfile,
)

logger = logging.getLogger(__name__)

disable_created_metrics()

REGISTRY = CollectorRegistry()

classifications_total = Counter(
    'cm2_classifications_total', 'Documents classified', ['outcome'], registry=REGISTRY
)
keyword_searches_total = Counter(
    'cm2_keyword_searches_total', 'Keyword occurrence searches performed', registry=REGISTRY
)
classify_seconds = Histogram(
    'cm2_classify_seconds', 'Time spent classifying one document', registry=REGISTRY,
    buckets=(0.0005, 0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0),
)
registry_rows = Gauge(
    'cm2_registry_rows', 'Rows in the most recently built or loaded coordinate matrix', registry=REGISTRY
)


def write_metrics(path: Union[str, Path]) -> None:
    """Write the current metric values to ``path`` in the Prometheus text format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_to_textfile(str(path), REGISTRY)
    logger.info(f"Wrote metrics to {path}")
