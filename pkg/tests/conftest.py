from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from compliance_cards import CardKind, CardSet, ComplianceCard, baseline_registry
from compliance_cards.model import Choice, Flag, Level, TagSet
from compliance_cards.rules import bundled_rule_table

from generators import all_satisfied_values

SCHEMA = "1.0.0"


@pytest.fixture(scope="session")
def registry():
    return baseline_registry()


@pytest.fixture(scope="session")
def table():
    return bundled_rule_table()


def make_project(**overrides) -> ComplianceCard:
    """High-risk provider project with every check satisfied."""
    values = {
        "operator_role": Choice("provider"),
        "placed_on_eu_market": Flag(True),
        "put_into_service_in_eu": Flag(True),
        "exception": Choice("none"),
        "is_ai_system": Flag(True),
        "is_gpai_model": Flag(False),
        "high_risk_basis": Choice("annex_iii_use_case"),
        "gpai_systemic_risk": Flag(False),
        "prohibited_practices": TagSet(frozenset()),
        "intended_purpose": TagSet(frozenset({"medical_triage"})),
        "risk_management.system_established": Flag(True),
        "data_governance.practices_documented": Flag(True),
        "technical_documentation.project_docs_complete": Flag(True),
        "technical_documentation.annex_coverage_grade": Level(4),
        "record_keeping.logging_enabled": Flag(True),
        "deployer_transparency.instructions_for_use": Flag(True),
        "human_oversight.measures_designed": Flag(True),
        "accuracy_robustness.performance_validated": Flag(True),
        "registration.eu_database_registered": Flag(True),
        "fria.assessment_conducted": Flag(True),
        "ai_transparency.user_disclosure": Flag(True),
    }
    card_id = overrides.pop("card_id", "proj1")
    values.update(overrides)
    return ComplianceCard(
        kind=CardKind.PROJECT,
        card_id=card_id,
        subject_name="Acme Triage Assistant",
        schema_version=SCHEMA,
        values=values,
    )


def make_data(card_id="d1", **overrides) -> ComplianceCard:
    values = all_satisfied_values(CardKind.DATA, baseline_registry())
    values.update(overrides)
    return ComplianceCard(
        kind=CardKind.DATA,
        card_id=card_id,
        subject_name=f"dataset {card_id}",
        schema_version=SCHEMA,
        values=values,
    )


def make_model(card_id="m1", **overrides) -> ComplianceCard:
    values = all_satisfied_values(CardKind.MODEL, baseline_registry())
    values.update(overrides)
    return ComplianceCard(
        kind=CardKind.MODEL,
        card_id=card_id,
        subject_name=f"model {card_id}",
        schema_version=SCHEMA,
        values=values,
    )


@pytest.fixture
def compliant_set() -> CardSet:
    return CardSet(
        project=make_project(),
        data=(make_data("d1"), make_data("d2")),
        models=(make_model("m1"),),
    )
