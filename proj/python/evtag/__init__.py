"""Evidence-retrieval certainty tagging for classifier predictions."""

from ._evtag import (
    DecisionRecord,
    EvidenceIndex,
    EvtagError,
    InstanceRecord,
    LogBase,
    MassFunction,
    Neighbor,
    SplitRole,
    SynthConfig,
    Tag,
    TaggerConfig,
    TaggerMethod,
    UncertaintyConfusion,
    argmax_focal,
    brier,
    combine,
    confusion,
    credal_intervals,
    ece,
    entropy,
    fuse_all,
    generate,
    load_split,
    mass_from_lower,
    predictive_summary,
    run_sweep,
    tag_batch,
    tag_batch_entropy,
    uncertainty_metrics,
    write_split,
)

__all__ = [
    "DecisionRecord",
    "EvidenceIndex",
    "EvtagError",
    "InstanceRecord",
    "LogBase",
    "MassFunction",
    "Neighbor",
    "SplitRole",
    "SynthConfig",
    "Tag",
    "TaggerConfig",
    "TaggerMethod",
    "UncertaintyConfusion",
    "argmax_focal",
    "brier",
    "combine",
    "confusion",
    "credal_intervals",
    "ece",
    "entropy",
    "fuse_all",
    "generate",
    "load_split",
    "mass_from_lower",
    "predictive_summary",
    "run_sweep",
    "tag_batch",
    "tag_batch_entropy",
    "uncertainty_metrics",
    "write_split",
]
