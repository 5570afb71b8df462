"""Rareness-and-relevance surprise statistics for inscribed name clusters.

Quantifies how surprising an observed cluster of inscribed names is relative
to a historical name lexicon: prespecified nested rendition tiers (or
numerical ratings), a Monte Carlo null conditioned on the cluster's
configuration, disqualifier rules, generational-chain neutralization,
lexicon-bootstrap variability, and assumption-sensitivity sweeps.
"""

__version__ = "0.1.0"

from .analysis import (
    AlternativeSpec,
    BootstrapSummary,
    LevelStudyResult,
    Plant,
    ScenarioVariant,
    SweepRow,
    apply_edits,
    bootstrap_variability,
    level_study,
    power_study,
    scenario_sweep,
)
from .assumptions import (
    HARD,
    AssumptionSet,
    Candidate,
    DisqualifierRule,
    Finding,
    SlotSpec,
    ValidationReport,
    lock_hash,
    rating_tail_table,
    read_assumptions_yaml,
    tiers_to_ratings,
    validate,
)
from .engine import (
    Cluster,
    Inscription,
    RRBreakdown,
    Slot,
    cluster_rr,
    find_generational_chains,
    inscription_rr,
    lumped_statistic,
    read_cluster_yaml,
    slot_rr,
)
from .errors import (
    AmbiguousRenditionError,
    AssumptionError,
    ClusterError,
    LexiconError,
    SurpriseRRError,
    UnknownRenditionError,
)
from .nulldist import (
    ClusterConfiguration,
    TailAreaEstimate,
    estimate_tail_area,
    extract_configuration,
    sample_cluster,
    tomb_correction,
)
from .onomasticon import (
    GenericNameEntry,
    Onomasticon,
    RenditionCell,
    bootstrap_resample,
    generic_frequency,
    load_onomasticon,
    read_onomasticon_csv,
    with_unknown_rendition,
)

__all__ = [
    "__version__",
    "AlternativeSpec",
    "AmbiguousRenditionError",
    "AssumptionError",
    "AssumptionSet",
    "BootstrapSummary",
    "Candidate",
    "Cluster",
    "ClusterConfiguration",
    "ClusterError",
    "DisqualifierRule",
    "Finding",
    "GenericNameEntry",
    "HARD",
    "Inscription",
    "LevelStudyResult",
    "LexiconError",
    "Onomasticon",
    "Plant",
    "RRBreakdown",
    "RenditionCell",
    "ScenarioVariant",
    "Slot",
    "SlotSpec",
    "SurpriseRRError",
    "SweepRow",
    "TailAreaEstimate",
    "UnknownRenditionError",
    "ValidationReport",
    "apply_edits",
    "bootstrap_resample",
    "bootstrap_variability",
    "cluster_rr",
    "estimate_tail_area",
    "extract_configuration",
    "find_generational_chains",
    "generic_frequency",
    "inscription_rr",
    "level_study",
    "load_onomasticon",
    "lock_hash",
    "lumped_statistic",
    "power_study",
    "rating_tail_table",
    "read_assumptions_yaml",
    "read_cluster_yaml",
    "read_onomasticon_csv",
    "sample_cluster",
    "scenario_sweep",
    "slot_rr",
    "tiers_to_ratings",
    "tomb_correction",
    "validate",
    "with_unknown_rendition",
]
