"""
Factory functions for configured pipeline components.

Every argument left as None falls back to config.py; a RunConfig supplies
the values the CLI resolved from YAML and flags.
"""

from typing import Iterable, Optional

import config
from modules.crowdtruth_metrics import CrowdTruthMetrics, FixedPointConfig
from modules.embeddings import EmbeddingTable, load_embeddings
from modules.evaluation import Evaluator
from modules.logging_utils import setup_logger
from modules.propagation import LabelPropagator, PropagationConfig
from modules.relation_inventory import RelationInventory, load_inventory
from modules.run_config import RunConfig

logger = setup_logger(__name__)


def create_inventory(run: Optional[RunConfig] = None) -> RelationInventory:
    return load_inventory(run.inventory if run else None)


def create_aggregator(run: Optional[RunConfig] = None, debug: bool = False) -> CrowdTruthMetrics:
    """
    Create the crowd quality aggregator.

    Args:
        run: Resolved run configuration (None for config defaults)
        debug: Enable debug logging

    Returns:
        CrowdTruthMetrics with its fixed-point settings
    """
    if run is None:
        return CrowdTruthMetrics(fixed_point=FixedPointConfig(), debug=debug)
    fixed_point = FixedPointConfig(
        tolerance=run.tolerance,
        max_iterations=run.max_iterations,
        srs_relation_weighting=run.srs_relation_weighting,
        include_unweighted=run.unweighted_srs,
    )
    return CrowdTruthMetrics(fixed_point=fixed_point, debug=debug or run.debug)


def create_embedding_table(
    run: RunConfig,
    vocabulary: Optional[Iterable[str]] = None,
) -> EmbeddingTable:
    """Load the run's embedding file, keeping only `vocabulary` when given."""
    run.require("embeddings")
    return load_embeddings(
        run.embeddings,
        format=run.embedding_format,
        vocabulary=vocabulary,
        lowercase_fallback=run.lowercase_fallback,
        show_progress=run.show_progress,
    )


def create_propagator(
    inventory: RelationInventory,
    table: EmbeddingTable,
    run: Optional[RunConfig] = None,
    debug: bool = False,
) -> LabelPropagator:
    if run is None:
        return LabelPropagator(inventory, table, PropagationConfig(), debug=debug, show_progress=config.SHOW_PROGRESS)
    settings = PropagationConfig(
        threads=run.threads,
        batch_size=run.batch_size,
        span_policy=run.span_policy,
        span_fallback=run.span_fallback,
        similarity_clamp=run.similarity_clamp,
        search=run.search,
    )
    logger.debug(f"Propagation settings: {settings}")
    return LabelPropagator(inventory, table, settings, debug=debug or run.debug, show_progress=run.show_progress)


def create_evaluator(
    inventory: RelationInventory,
    run: Optional[RunConfig] = None,
    debug: bool = False,
) -> Evaluator:
    if run is None:
        return Evaluator(inventory, debug=debug)
    return Evaluator(
        inventory,
        gold_threshold=run.gold_threshold,
        orphan_limit=run.orphan_limit,
        debug=debug or run.debug,
    )
