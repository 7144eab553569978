"""Compliance-card toolkit: transparency artifacts for an AI project and its
component datasets/models, plus a deterministic rules engine that classifies
the project and evaluates EU AI Act requirements across the whole card set.
"""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    UNANSWERED,
    ArticleRef,
    AttributeDefinition,
    AttributeRegistry,
    CardKind,
    CardSet,
    Choice,
    ComplianceCard,
    Flag,
    Level,
    TagSet,
    TriState,
    satisfaction,
)
from .registry import baseline_registry, load_registry, lookup_attribute  # noqa: F401
from .card_io import (  # noqa: F401
    IssueCode,
    Severity,
    ValidationIssue,
    extract_front_matter,
    load_card,
    load_card_set,
    parse_card,
    serialize_card,
    validate_card,
)
from .engine import (  # noqa: F401
    Applicability,
    Assumption,
    Check,
    CheckResult,
    CheckScope,
    CheckStatus,
    ClassificationLabel,
    ComplianceReport,
    ConfigurationError,
    Evidence,
    MutationError,
    ReplaceCard,
    Requirement,
    RuleTable,
    SetValue,
    Verdict,
    WhatIfResult,
    analyze,
    applicable_requirements,
    classify,
    evaluate_check,
    what_if,
)
from .rules import bundled_rule_table, load_rule_table  # noqa: F401
from .report import (  # noqa: F401
    Explanation,
    explain_requirement,
    render_report,
    report_from_dict,
    report_to_dict,
)
