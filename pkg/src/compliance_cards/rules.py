"""Bundled requirement table and the rule-table file loader.

Requirements are data, not code: each one names the articles it encodes, a
label predicate for applicability, and the scoped checks to run. A rule
table supplied from file replaces the bundled one without code changes.
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path

import yaml

from .engine import (
    Applicability,
    BUILTIN_CHECKS,
    Check,
    CheckScope,
    ClassificationLabel,
    ConfigurationError,
    Requirement,
    RuleTable,
    validate_rule_table,
)
from .model import ArticleRef, AttributeRegistry, art
from .registry import baseline_registry

RULES_VERSION = "1.0.0"

_L = ClassificationLabel

_IN_SCOPE = Applicability(all_of=frozenset({_L.IN_SCOPE}))
_HIGH_RISK = Applicability(all_of=frozenset({_L.HIGH_RISK_AI_SYSTEM}))
_AI_SYSTEM = Applicability(all_of=frozenset({_L.AI_SYSTEM}))
_GPAI = Applicability(all_of=frozenset({_L.GPAI_MODEL}))
_HIGH_RISK_OR_GPAI = Applicability(
    all_of=frozenset({_L.IN_SCOPE}),
    any_of=frozenset({_L.HIGH_RISK_AI_SYSTEM, _L.GPAI_MODEL}),
)


def _project(attr: str) -> Check:
    return Check(CheckScope.FOR_PROJECT, attribute=attr)


def _each_data(attr: str) -> Check:
    return Check(CheckScope.FOR_EACH_DATA, attribute=attr)


def _each_model(attr: str) -> Check:
    return Check(CheckScope.FOR_EACH_MODEL, attribute=attr)


def _bundled_requirements() -> list[Requirement]:
    return [
        Requirement(
            id="R-ART05-PROHIBITED-PRACTICES",
            title="No prohibited AI practices",
            articles=(art("Art. 5"),),
            applies=_IN_SCOPE,
            checks=(Check(CheckScope.FOR_PROJECT, builtin="no_prohibited_practices"),),
        ),
        Requirement(
            id="R-PURPOSE-COMPATIBILITY",
            title="Component intended purposes cover the project's",
            articles=(art("Art. 6"), art("Art. 9"), art("Art. 10"), art("Art. 13"),
                      art("Art. 14"), art("Art. 15")),
            applies=_IN_SCOPE,
            checks=(Check(CheckScope.CROSS_CARD, builtin="purpose_compatible"),),
        ),
        Requirement(
            id="R-ART09-RISK-MANAGEMENT",
            title="Risk management system",
            articles=(art("Art. 9"), art("Art. 9(2)"), art("Art. 9(6)")),
            applies=_HIGH_RISK,
            checks=(
                _project("risk_management.system_established"),
                _each_model("risk_management.model_evaluation_documented"),
            ),
        ),
        Requirement(
            id="R-ART10-DATA-GOVERNANCE",
            title="Data and data governance",
            articles=(art("Art. 10"),),
            applies=_HIGH_RISK,
            checks=(
                _project("data_governance.practices_documented"),
                _each_data("data_governance.bias_examined"),
                _each_data("data_governance.provenance_documented"),
                _each_model("data_governance.training_data_documented"),
            ),
        ),
        Requirement(
            id="R-ART11-TECHNICAL-DOCUMENTATION",
            title="Technical documentation (high-risk)",
            articles=(art("Art. 11"), art("Annex IV")),
            applies=_HIGH_RISK,
            checks=(
                _project("technical_documentation.project_docs_complete"),
                _project("technical_documentation.annex_coverage_grade"),
                _each_data("technical_documentation.dataset_docs_complete"),
                _each_model("technical_documentation.model_docs_complete"),
            ),
        ),
        Requirement(
            id="R-ART53-GPAI-DOCUMENTATION",
            title="Technical documentation (general-purpose models)",
            articles=(art("Art. 53(1)"), art("Annex XI(1)"), art("Annex XI(2)")),
            applies=_GPAI,
            checks=(
                _project("technical_documentation.project_docs_complete"),
                _each_data("technical_documentation.dataset_docs_complete"),
                _each_model("technical_documentation.model_docs_complete"),
            ),
        ),
        Requirement(
            id="R-ART12-RECORD-KEEPING",
            title="Record-keeping",
            articles=(art("Art. 12"),),
            applies=_HIGH_RISK,
            checks=(_project("record_keeping.logging_enabled"),),
        ),
        Requirement(
            id="R-ART13-DEPLOYER-TRANSPARENCY",
            title="Transparency and provision of information to deployers",
            articles=(art("Art. 13"),),
            applies=_HIGH_RISK_OR_GPAI,
            checks=(
                _project("deployer_transparency.instructions_for_use"),
                _each_model("deployer_transparency.capabilities_documented"),
            ),
        ),
        Requirement(
            id="R-ART14-HUMAN-OVERSIGHT",
            title="Human oversight",
            articles=(art("Art. 14"), art("Art. 14(3)(a)"), art("Art. 14(4)(d)")),
            applies=_HIGH_RISK,
            checks=(
                _project("human_oversight.measures_designed"),
                _each_model("human_oversight.interpretability_support"),
            ),
        ),
        Requirement(
            id="R-ART15-ACCURACY-ROBUSTNESS",
            title="Accuracy, robustness, and cybersecurity",
            articles=(art("Art. 15"),),
            applies=_HIGH_RISK,
            checks=(
                _project("accuracy_robustness.performance_validated"),
                _each_data("accuracy_robustness.data_quality_controls"),
                _each_model("accuracy_robustness.model_metrics_reported"),
                _each_model("accuracy_robustness.robustness_grade"),
            ),
        ),
        Requirement(
            id="R-ART16-PROVIDER-OBLIGATIONS",
            title="Provider obligations and registration",
            articles=(art("Art. 16"),),
            applies=_AI_SYSTEM,
            checks=(_project("registration.eu_database_registered"),),
        ),
        Requirement(
            id="R-ART17-QUALITY-MANAGEMENT",
            title="Quality management system of dataset suppliers",
            articles=(art("Art. 17(1)(f)"),),
            applies=_HIGH_RISK,
            checks=(_each_data("quality_management.supplier_qms_in_place"),),
        ),
        Requirement(
            id="R-ART27-FRIA",
            title="Fundamental rights impact assessment (informational)",
            articles=(art("Art. 27"),),
            applies=_HIGH_RISK,
            checks=(_project("fria.assessment_conducted"),),
        ),
        Requirement(
            id="R-ART50-AI-TRANSPARENCY",
            title="Transparency toward natural persons",
            articles=(art("Art. 50"),),
            applies=_AI_SYSTEM,
            checks=(_project("ai_transparency.user_disclosure"),),
        ),
        # Placeholder for systemic-risk GPAI obligations; the source tables
        # do not cover Art. 55, so this ships disabled.
        Requirement(
            id="R-ART55-SYSTEMIC-RISK-GPAI",
            title="Systemic-risk GPAI obligations (placeholder)",
            articles=(art("Art. 55"),),
            applies=Applicability(all_of=frozenset({_L.GPAI_MODEL_SYSTEMIC_RISK})),
            checks=(_project("gpai_obligations.systemic_risk_mitigations"),),
            enabled=False,
        ),
    ]


@lru_cache(maxsize=1)
def bundled_rule_table() -> RuleTable:
    """The bundled table, statically cross-checked against the bundled
    registry on first use."""
    table = RuleTable(version=RULES_VERSION, requirements=tuple(_bundled_requirements()))
    validate_rule_table(table, baseline_registry())
    return table


# ---------------------------------------------------------------------------
# Rule-table files
# ---------------------------------------------------------------------------

_LABEL_TOKENS = {label.value: label for label in ClassificationLabel}
_SCOPE_TOKENS = {scope.value: scope for scope in CheckScope}


def load_rule_table(path: str | Path, registry: AttributeRegistry) -> RuleTable:
    return parse_rule_table(Path(path).read_text(encoding="utf-8"), registry)


def parse_rule_table(text: str, registry: AttributeRegistry) -> RuleTable:
    """Parse and fully validate a rule-table document.

    All static problems (unknown attributes, empty checks, duplicate ids,
    bad labels/scopes) raise ConfigurationError here, before any analysis.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"rule table is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigurationError("rule table must be a mapping")
    version = doc.get("rules_version")
    if not isinstance(version, str) or not version:
        raise ConfigurationError("rules_version (string) is required")
    records = doc.get("requirements")
    if not isinstance(records, list) or not records:
        raise ConfigurationError("requirements (nonempty list) is required")
    requirements = [_parse_requirement(r, i) for i, r in enumerate(records)]
    try:
        table = RuleTable(version=version, requirements=tuple(requirements))
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc
    validate_rule_table(table, registry)
    return table


def _parse_requirement(record: object, index: int) -> Requirement:
    where = f"requirements[{index}]"
    if not isinstance(record, dict):
        raise ConfigurationError(f"{where}: must be a mapping")
    req_id = record.get("id")
    if not isinstance(req_id, str) or not req_id:
        raise ConfigurationError(f"{where}: id (nonempty string) is required")
    title = record.get("title", req_id)
    articles_raw = record.get("articles", [])
    if not isinstance(articles_raw, list):
        raise ConfigurationError(f"{req_id}: articles must be a list")
    try:
        articles = tuple(ArticleRef.parse(str(a)) for a in articles_raw)
    except ValueError as exc:
        raise ConfigurationError(f"{req_id}: {exc}") from exc
    applies = _parse_applicability(record.get("applies", {}), req_id)
    checks_raw = record.get("checks")
    if not isinstance(checks_raw, list) or not checks_raw:
        raise ConfigurationError(f"{req_id}: checks (nonempty list) is required")
    checks = tuple(_parse_check(c, req_id) for c in checks_raw)
    enabled = record.get("enabled", True)
    if not isinstance(enabled, bool):
        raise ConfigurationError(f"{req_id}: enabled must be a boolean")
    return Requirement(
        id=req_id, title=str(title), articles=articles, applies=applies,
        checks=checks, enabled=enabled,
    )


def _parse_labels(raw: object, where: str) -> frozenset[ClassificationLabel]:
    if raw is None:
        return frozenset()
    if not isinstance(raw, list):
        raise ConfigurationError(f"{where}: label list expected, got {raw!r}")
    labels = set()
    for token in raw:
        if token not in _LABEL_TOKENS:
            raise ConfigurationError(f"{where}: unknown classification label {token!r}")
        labels.add(_LABEL_TOKENS[token])
    return frozenset(labels)


def _parse_applicability(raw: object, req_id: str) -> Applicability:
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{req_id}: applies must be a mapping")
    return Applicability(
        all_of=_parse_labels(raw.get("all_of"), req_id),
        any_of=_parse_labels(raw.get("any_of"), req_id),
        none_of=_parse_labels(raw.get("none_of"), req_id),
    )


def _parse_check(raw: object, req_id: str) -> Check:
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{req_id}: each check must be a mapping")
    scope_token = raw.get("scope")
    if scope_token not in _SCOPE_TOKENS:
        raise ConfigurationError(f"{req_id}: unknown scope {scope_token!r}")
    attribute = raw.get("attribute")
    builtin = raw.get("builtin")
    if (attribute is None) == (builtin is None):
        raise ConfigurationError(
            f"{req_id}: each check names exactly one of attribute or builtin"
        )
    if builtin is not None and builtin not in BUILTIN_CHECKS:
        raise ConfigurationError(f"{req_id}: unknown builtin check {builtin!r}")
    return Check(scope=_SCOPE_TOKENS[scope_token], attribute=attribute, builtin=builtin)
