"""Trip knowledge graph toolkit.

Builds a typed knowledge graph from individual vehicle trip records,
mines per-vehicle mobility labels, generates privacy-preserving
synthetic trips, and evaluates the result against the original data.
"""

from ._tripkg import (  # noqa: F401
    EvalConfig,
    GenerationConfig,
    MiningConfig,
    PipelineConfig,
    SynthConfig,
    TripKG,
    __version__,
    association_score,
    attach_labels,
    build_graph,
    check_schema,
    concentration,
    continuity_indicator,
    evaluate,
    generate,
    import_graph,
    kl_divergence,
    label_subgraph,
    map_timespan,
    map_week,
    mine,
    parse_records_csv,
    synth_corpus,
)

__all__ = [
    "EvalConfig",
    "GenerationConfig",
    "MiningConfig",
    "PipelineConfig",
    "SynthConfig",
    "TripKG",
    "__version__",
    "association_score",
    "attach_labels",
    "build_graph",
    "check_schema",
    "concentration",
    "continuity_indicator",
    "evaluate",
    "generate",
    "import_graph",
    "kl_divergence",
    "label_subgraph",
    "map_timespan",
    "map_week",
    "mine",
    "parse_records_csv",
    "synth_corpus",
]
