"""Security risk assessment workbench for DLT-based applications.

Subpackages: `model` (domain types), `store` (KB persistence and queries),
`graph` (attack relations), `assessment` (the session state machine),
`reporting` (markdown + JSON exports), `server` (HTTP service), `cli`.
"""

from .model import (
    AttackRecord,
    Countermeasure,
    DltLayer,
    KbStats,
    KnowledgeBase,
    MotivationCategory,
    NO_KNOWN_COUNTERMEASURE,
    Origin,
    RelationKind,
    Violation,
    slugify,
    validate_record,
)
from .store import (
    FilterQuery,
    ValidationReport,
    add_record,
    compute_stats,
    filter_records,
    load_kb,
    load_seed_kb,
    save_kb,
)
from .graph import (
    AttackGraph,
    build_graph,
    contributes_closure,
    layer_footprint,
    related_neighbors,
    to_dot,
)
from .assessment import (
    AssessmentSession,
    CandidateRisk,
    DomainAnnotation,
    Motivation,
    ProjectSpec,
    RankDecision,
    Recommendation,
    RiskStatus,
    Step,
    add_motivation,
    annotate_domain,
    apply_ranking,
    attach_countermeasures,
    create_session,
    finalize,
    identify_risks,
    record_analysis,
    register_new_risk,
    replay_audit,
    run_script,
)
from .reporting import export_session, import_session, render_markdown

__version__ = "0.1.0"

__all__ = [
    "AttackRecord",
    "Countermeasure",
    "DltLayer",
    "KbStats",
    "KnowledgeBase",
    "MotivationCategory",
    "NO_KNOWN_COUNTERMEASURE",
    "Origin",
    "RelationKind",
    "Violation",
    "slugify",
    "validate_record",
    "FilterQuery",
    "ValidationReport",
    "add_record",
    "compute_stats",
    "filter_records",
    "load_kb",
    "load_seed_kb",
    "save_kb",
    "AttackGraph",
    "build_graph",
    "contributes_closure",
    "layer_footprint",
    "related_neighbors",
    "to_dot",
    "AssessmentSession",
    "CandidateRisk",
    "DomainAnnotation",
    "Motivation",
    "ProjectSpec",
    "RankDecision",
    "Recommendation",
    "RiskStatus",
    "Step",
    "add_motivation",
    "annotate_domain",
    "apply_ranking",
    "attach_countermeasures",
    "create_session",
    "finalize",
    "identify_risks",
    "record_analysis",
    "register_new_risk",
    "replay_audit",
    "run_script",
    "export_session",
    "import_session",
    "render_markdown",
    "__version__",
]
