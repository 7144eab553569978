"""Bundled attribute registry and the registry override file loader.

The baseline registry enumerates, per card kind, the attribute leaves under
each attribute-category row, carrying that row's article citations. A
registry file can extend or replace it without code changes.
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path

import yaml

from .model import (
    AlwaysInformational,
    ArticleRef,
    AttributeDefinition,
    AttributeRegistry,
    CardKind,
    ChoiceDomain,
    ChoiceIn,
    FlagDomain,
    LevelAtLeast,
    LevelDomain,
    MustBeTrue,
    SatisfactionRule,
    TagSetDomain,
    TagSetNonEmpty,
    ValueDomain,
    art,
)

REGISTRY_VERSION = "1.0.0"

#: Default threshold for level-graded attributes: grades 3 and 4 satisfy.
DEFAULT_LEVEL_THRESHOLD = 3

OPERATOR_ROLES = (
    "provider",
    "deployer",
    "importer",
    "distributor",
    "product_manufacturer",
    "other",
)

EXCEPTIONS = (
    "none",
    "military_defence",
    "scientific_research",
    "personal_non_professional",
)

HIGH_RISK_BASES = ("none", "annex_i_safety_component", "annex_iii_use_case")

#: The eight banned-practice tokens checked by the prohibition gate.
PROHIBITED_PRACTICES = (
    "subliminal_manipulation",
    "exploiting_vulnerabilities",
    "social_scoring",
    "predictive_policing_profiling",
    "untargeted_facial_scraping",
    "emotion_inference_workplace_education",
    "biometric_categorisation_sensitive_traits",
    "realtime_remote_biometric_identification",
)

#: Controlled intended-purpose vocabulary. ``general_purpose`` acts as a
#: wildcard in the cross-card compatibility check. Extend via registry file.
PURPOSES = (
    "general_purpose",
    "medical_triage",
    "credit_scoring",
    "recruitment_screening",
    "biometric_identification",
    "emotion_recognition",
    "critical_infrastructure_control",
    "education_assessment",
    "law_enforcement_support",
    "migration_border_management",
    "justice_administration",
    "safety_component",
    "content_generation",
    "conversational_assistance",
    "recommendation_ranking",
    "fraud_detection",
    "predictive_maintenance",
    "scientific_analysis",
)

# Category labels, one per attribute-table row (project/data/model overviews).
CAT_OPERATOR_ROLE = "Operator role (provider)"
CAT_INTENDED_PURPOSE = "Intended purpose"
CAT_EU_MARKET = "Whether on EU market"
CAT_CLASSIFICATION = (
    "Whether AI System, High-risk AI System, GPAI model, "
    "GPAI model with Systemic Risk"
)
CAT_EXCEPTED = "Whether excepted from AIA"
CAT_PROHIBITED = "Whether prohibited practices"
CAT_RISK_MANAGEMENT = "Risk management (High-risk AI systems)"
CAT_DATA_GOVERNANCE = "Data and data governance (High-risk AI systems)"
CAT_TECH_DOC = "Technical documentation (High-risk AI systems and GPAI models)"
CAT_RECORD_KEEPING = "Record-keeping (High-risk AI systems)"
CAT_DEPLOYER_TRANSPARENCY = (
    "Transparency and provision of information to deployers (High-risk AI systems)"
)
CAT_DEPLOYER_TRANSPARENCY_MODEL = (
    "Transparency and provision of information to deployers "
    "(High-risk AI systems, GPAI models, and GPAI models with systemic risk)"
)
CAT_HUMAN_OVERSIGHT = "Human oversight (High-risk AI systems)"
CAT_ACCURACY_PROJECT = "Accuracy, robustness, and cybersecurity (High-risk AI systems)"
CAT_ACCURACY_COMPONENT = "Accuracy, robustness and cybersecurity (High-risk AI systems)"
CAT_REGISTRATION = "Registration, etc. (AI systems)"
CAT_FRIA = "Fundamental Rights Assessment (High-risk AI systems)"
CAT_AI_TRANSPARENCY = "Transparency (AI systems)"
CAT_QUALITY_MANAGEMENT = "Quality management system (High-risk AI systems)"
CAT_GPAI_SYSTEMIC = "Systemic-risk GPAI obligations"

_P = CardKind.PROJECT
_D = CardKind.DATA
_M = CardKind.MODEL

_CLASSIFICATION_ARTICLES = (art("Art. 3(1)"), art("Art. 3(63)"), art("Art. 6"))
_PURPOSE_ARTICLES = (
    art("Art. 6"),
    art("Art. 9"),
    art("Art. 10"),
    art("Art. 13"),
    art("Art. 14"),
    art("Art. 15"),
)


def _attr(
    attr_id: str,
    kinds: tuple[CardKind, ...],
    domain: ValueDomain,
    rule: SatisfactionRule,
    articles: tuple[ArticleRef, ...],
    category: str,
    dispositive: bool = False,
) -> AttributeDefinition:
    return AttributeDefinition(
        id=attr_id,
        card_kinds=frozenset(kinds),
        domain=domain,
        satisfaction=rule,
        dispositive=dispositive,
        articles=articles,
        category=category,
    )


def _baseline_definitions() -> list[AttributeDefinition]:
    flag = FlagDomain()
    level = LevelDomain()
    informational = AlwaysInformational()
    must = MustBeTrue()
    graded = LevelAtLeast(DEFAULT_LEVEL_THRESHOLD)

    return [
        # Dispositive project characteristics: consulted by classification
        # (and by the prohibition/purpose builtins), never checked directly.
        _attr("operator_role", (_P,), ChoiceDomain(OPERATOR_ROLES), informational,
              (art("Art. 2"),), CAT_OPERATOR_ROLE, dispositive=True),
        _attr("placed_on_eu_market", (_P,), flag, informational,
              (art("Art. 2"),), CAT_EU_MARKET, dispositive=True),
        _attr("put_into_service_in_eu", (_P,), flag, informational,
              (art("Art. 2"),), CAT_EU_MARKET, dispositive=True),
        _attr("exception", (_P,), ChoiceDomain(EXCEPTIONS), informational,
              (art("Art. 2(6)"),), CAT_EXCEPTED, dispositive=True),
        _attr("is_ai_system", (_P,), flag, informational,
              _CLASSIFICATION_ARTICLES, CAT_CLASSIFICATION, dispositive=True),
        _attr("is_gpai_model", (_P,), flag, informational,
              _CLASSIFICATION_ARTICLES, CAT_CLASSIFICATION, dispositive=True),
        _attr("high_risk_basis", (_P,), ChoiceDomain(HIGH_RISK_BASES), informational,
              _CLASSIFICATION_ARTICLES, CAT_CLASSIFICATION, dispositive=True),
        _attr("gpai_systemic_risk", (_P,), flag, informational,
              _CLASSIFICATION_ARTICLES, CAT_CLASSIFICATION, dispositive=True),
        _attr("prohibited_practices", (_P,), TagSetDomain(PROHIBITED_PRACTICES),
              informational, (art("Art. 5"),), CAT_PROHIBITED, dispositive=True),
        _attr("intended_purpose", (_P, _D, _M), TagSetDomain(PURPOSES), informational,
              _PURPOSE_ARTICLES, CAT_INTENDED_PURPOSE, dispositive=True),
        # Project-card checkable attributes.
        _attr("risk_management.system_established", (_P,), flag, must,
              (art("Art. 9"),), CAT_RISK_MANAGEMENT),
        _attr("data_governance.practices_documented", (_P,), flag, must,
              (art("Art. 10"),), CAT_DATA_GOVERNANCE),
        _attr("technical_documentation.project_docs_complete", (_P,), flag, must,
              (art("Art. 11"), art("Art. 53(1)"), art("Annex XI(2)"), art("Annex XI(1)")),
              CAT_TECH_DOC),
        _attr("technical_documentation.annex_coverage_grade", (_P,), level, graded,
              (art("Art. 11"), art("Art. 53(1)"), art("Annex XI(2)"), art("Annex XI(1)")),
              CAT_TECH_DOC),
        _attr("record_keeping.logging_enabled", (_P,), flag, must,
              (art("Art. 12"),), CAT_RECORD_KEEPING),
        _attr("deployer_transparency.instructions_for_use", (_P,), flag, must,
              (art("Art. 13"),), CAT_DEPLOYER_TRANSPARENCY),
        _attr("human_oversight.measures_designed", (_P,), flag, must,
              (art("Art. 14"),), CAT_HUMAN_OVERSIGHT),
        _attr("accuracy_robustness.performance_validated", (_P,), flag, must,
              (art("Art. 15"),), CAT_ACCURACY_PROJECT),
        _attr("registration.eu_database_registered", (_P,), flag, must,
              (art("Art. 16"),), CAT_REGISTRATION),
        _attr("fria.assessment_conducted", (_P,), flag, informational,
              (art("Art. 27"),), CAT_FRIA),
        _attr("ai_transparency.user_disclosure", (_P,), flag, must,
              (art("Art. 50"),), CAT_AI_TRANSPARENCY),
        _attr("gpai_obligations.systemic_risk_mitigations", (_P,), flag, must,
              (art("Art. 55"),), CAT_GPAI_SYSTEMIC),
        # Data-card checkable attributes.
        _attr("data_governance.bias_examined", (_D,), flag, must,
              (art("Art. 10"),), CAT_DATA_GOVERNANCE),
        _attr("data_governance.provenance_documented", (_D,), flag, must,
              (art("Art. 10"),), CAT_DATA_GOVERNANCE),
        _attr("technical_documentation.dataset_docs_complete", (_D,), flag, must,
              (art("Art. 11"), art("Art. 13"), art("Art. 53(1)"), art("Annex IV"),
               art("Annex XI")),
              CAT_TECH_DOC),
        _attr("accuracy_robustness.data_quality_controls", (_D,), flag, must,
              (art("Art. 15"),), CAT_ACCURACY_COMPONENT),
        _attr("quality_management.supplier_qms_in_place", (_D,), flag, must,
              (art("Art. 17(1)(f)"),), CAT_QUALITY_MANAGEMENT),
        # Model-card checkable attributes.
        _attr("risk_management.model_evaluation_documented", (_M,), flag, must,
              (art("Art. 9(2)"), art("Art. 9(6)")), CAT_RISK_MANAGEMENT),
        _attr("data_governance.training_data_documented", (_M,), flag, must,
              (art("Art. 10"),), CAT_DATA_GOVERNANCE),
        _attr("technical_documentation.model_docs_complete", (_M,), flag, must,
              (art("Art. 11"), art("Art. 53(1)"), art("Annex IV"), art("Annex XI")),
              CAT_TECH_DOC),
        _attr("deployer_transparency.capabilities_documented", (_M,), flag, must,
              (art("Art. 13"),), CAT_DEPLOYER_TRANSPARENCY_MODEL),
        _attr("human_oversight.interpretability_support", (_M,), flag, must,
              (art("Art. 14(3)(a)"), art("Art. 14(4)(d)")), CAT_HUMAN_OVERSIGHT),
        _attr("accuracy_robustness.model_metrics_reported", (_M,), flag, must,
              (art("Art. 15"),), CAT_ACCURACY_COMPONENT),
        _attr("accuracy_robustness.robustness_grade", (_M,), level, graded,
              (art("Art. 15"),), CAT_ACCURACY_COMPONENT),
    ]


@lru_cache(maxsize=1)
def baseline_registry() -> AttributeRegistry:
    """The bundled registry. Static data; cached and read-only."""
    return AttributeRegistry(REGISTRY_VERSION, _baseline_definitions())


def lookup_attribute(registry: AttributeRegistry, attr_id: str) -> AttributeDefinition | None:
    """Pure lookup; absence is a value, not an error. Ids are case-sensitive."""
    return registry.lookup(attr_id)


# ---------------------------------------------------------------------------
# Registry override files
# ---------------------------------------------------------------------------


class RegistryFileError(ValueError):
    """A registry override document is structurally invalid."""


_KIND_TOKENS = {k.value: k for k in CardKind}


def load_registry(path: str | Path) -> AttributeRegistry:
    return parse_registry(Path(path).read_text(encoding="utf-8"))


def parse_registry(text: str) -> AttributeRegistry:
    """Parse a registry override document.

    Top-level keys: ``registry_version`` (required), ``extends_baseline``
    (default true: baseline definitions are kept and same-id entries
    replaced), ``attributes`` (list of definition records).
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise RegistryFileError(f"registry document is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise RegistryFileError("registry document must be a mapping")
    version = doc.get("registry_version")
    if not isinstance(version, str) or not version:
        raise RegistryFileError("registry_version (string) is required")
    extends = doc.get("extends_baseline", True)
    if not isinstance(extends, bool):
        raise RegistryFileError("extends_baseline must be a boolean")
    records = doc.get("attributes", [])
    if not isinstance(records, list):
        raise RegistryFileError("attributes must be a list")

    parsed = [_parse_attribute_record(r, i) for i, r in enumerate(records)]
    if extends:
        merged: dict[str, AttributeDefinition] = {d.id: d for d in baseline_registry()}
        for d in parsed:
            merged[d.id] = d
        definitions = list(merged.values())
    else:
        definitions = parsed
    try:
        return AttributeRegistry(version, definitions)
    except ValueError as exc:
        raise RegistryFileError(str(exc)) from exc


def _parse_attribute_record(record: object, index: int) -> AttributeDefinition:
    where = f"attributes[{index}]"
    if not isinstance(record, dict):
        raise RegistryFileError(f"{where}: must be a mapping")
    attr_id = record.get("id")
    if not isinstance(attr_id, str):
        raise RegistryFileError(f"{where}: id (string) is required")
    kinds_raw = record.get("kinds")
    if not isinstance(kinds_raw, list) or not kinds_raw:
        raise RegistryFileError(f"{where}: kinds (nonempty list) is required")
    kinds = []
    for token in kinds_raw:
        if token not in _KIND_TOKENS:
            raise RegistryFileError(f"{where}: unknown card kind {token!r}")
        kinds.append(_KIND_TOKENS[token])
    domain = _parse_domain(record.get("domain"), where)
    rule = _parse_satisfaction(record.get("satisfaction", "informational"), where)
    articles_raw = record.get("articles", [])
    if not isinstance(articles_raw, list):
        raise RegistryFileError(f"{where}: articles must be a list")
    try:
        articles = tuple(ArticleRef.parse(str(a)) for a in articles_raw)
    except ValueError as exc:
        raise RegistryFileError(f"{where}: {exc}") from exc
    category = record.get("category", "")
    dispositive = record.get("dispositive", False)
    if not isinstance(dispositive, bool):
        raise RegistryFileError(f"{where}: dispositive must be a boolean")
    try:
        return AttributeDefinition(
            id=attr_id,
            card_kinds=frozenset(kinds),
            domain=domain,
            satisfaction=rule,
            dispositive=dispositive,
            articles=articles,
            category=str(category),
        )
    except ValueError as exc:
        raise RegistryFileError(f"{where}: {exc}") from exc


def _parse_domain(raw: object, where: str) -> ValueDomain:
    if raw == "flag":
        return FlagDomain()
    if raw == "level":
        return LevelDomain()
    if isinstance(raw, dict) and len(raw) == 1:
        key, vocab = next(iter(raw.items()))
        if key in ("choice", "tagset"):
            if not isinstance(vocab, list) or not all(isinstance(t, str) for t in vocab):
                raise RegistryFileError(f"{where}: {key} vocabulary must be a list of tokens")
            try:
                if key == "choice":
                    return ChoiceDomain(tuple(vocab))
                return TagSetDomain(tuple(vocab))
            except ValueError as exc:
                raise RegistryFileError(f"{where}: {exc}") from exc
    raise RegistryFileError(f"{where}: bad domain {raw!r}")


def _parse_satisfaction(raw: object, where: str) -> SatisfactionRule:
    if raw == "must_be_true":
        return MustBeTrue()
    if raw == "tagset_non_empty":
        return TagSetNonEmpty()
    if raw == "informational":
        return AlwaysInformational()
    if isinstance(raw, dict) and len(raw) == 1:
        key, arg = next(iter(raw.items()))
        try:
            if key == "level_at_least":
                return LevelAtLeast(int(arg))
            if key == "choice_in":
                if not isinstance(arg, list):
                    raise RegistryFileError(f"{where}: choice_in needs a token list")
                return ChoiceIn(frozenset(str(t) for t in arg))
        except ValueError as exc:
            raise RegistryFileError(f"{where}: {exc}") from exc
    raise RegistryFileError(f"{where}: bad satisfaction rule {raw!r}")
