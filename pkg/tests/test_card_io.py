"""Card parsing, validation, canonical serialization, front matter."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compliance_cards import (
    CardKind,
    ComplianceCard,
    extract_front_matter,
    load_card_set,
    parse_card,
    serialize_card,
    validate_card,
)
from compliance_cards.card_io import IssueCode, Severity, has_errors, scaffold_card
from compliance_cards.model import UNANSWERED, Flag, TagSet

from conftest import make_data, make_model, make_project
from generators import rand_card


def errors(issues):
    return [i for i in issues if i.severity is Severity.ERROR]


def warnings(issues):
    return [i for i in issues if i.severity is Severity.WARNING]


class TestFrontMatter:
    def test_fence_split(self):
        meta, body, issues = extract_front_matter("---\nkind: data\n---\n# Title")
        assert meta == "kind: data"
        assert body == "# Title"
        assert issues == []

    def test_plain_document_passes_through(self):
        meta, body, issues = extract_front_matter("# Title only")
        assert meta == ""
        assert body == "# Title only"
        assert issues == []

    def test_unterminated_fence(self):
        _, _, issues = extract_front_matter("---\nkind: data\n")
        assert issues[0].code is IssueCode.UNTERMINATED_FRONT_MATTER

    def test_body_bytes_preserved(self):
        body_text = "line1\n\n  indented\ttab\nlast-no-newline"
        _, body, _ = extract_front_matter(f"---\nkind: data\n---\n{body_text}")
        assert body == body_text


class TestParseCard:
    def test_minimal_document(self, registry):
        card, issues = parse_card(
            "kind: project\ncard_id: p1\nschema_version: '1.0.0'\n", registry
        )
        assert card is not None and not errors(issues)
        assert card.kind is CardKind.PROJECT
        assert card.value("is_ai_system") is UNANSWERED
        assert dict(card.values) == {}

    def test_model_kind(self, registry):
        card, _ = parse_card(
            "kind: model\ncard_id: m1\nschema_version: '1.0.0'\n", registry
        )
        assert card.kind is CardKind.MODEL

    def test_level_out_of_domain(self, registry):
        card, issues = parse_card(
            "kind: project\ncard_id: p1\nschema_version: '1.0.0'\n"
            "values:\n  technical_documentation.annex_coverage_grade: 9\n",
            registry,
        )
        assert card is None
        bad = errors(issues)
        assert bad[0].code is IssueCode.DOMAIN_VIOLATION
        assert bad[0].path == "technical_documentation.annex_coverage_grade"

    def test_missing_kind(self, registry):
        card, issues = parse_card("card_id: p1\nschema_version: '1.0.0'\n", registry)
        assert card is None
        assert any(i.code is IssueCode.MISSING_KIND for i in issues)

    def test_invalid_kind(self, registry):
        _, issues = parse_card(
            "kind: robot\ncard_id: p1\nschema_version: '1.0.0'\n", registry
        )
        assert any(i.code is IssueCode.INVALID_KIND for i in issues)

    def test_duplicate_source_keys(self, registry):
        text = (
            "kind: project\ncard_id: p1\nschema_version: '1.0.0'\n"
            "values:\n  record_keeping.logging_enabled: true\n"
            "  record_keeping.logging_enabled: false\n"
        )
        card, issues = parse_card(text, registry)
        assert card is None
        assert issues[0].code is IssueCode.DUPLICATE_ID

    def test_unknown_attribute_warned_and_preserved(self, registry):
        card, issues = parse_card(
            "kind: project\ncard_id: p1\nschema_version: '1.0.0'\n"
            "values:\n  shiny.new_attribute: true\n",
            registry,
        )
        assert card is not None
        assert warnings(issues)[0].code is IssueCode.UNKNOWN_ATTRIBUTE
        assert card.unrecognized == {"shiny.new_attribute": True}

    def test_wrong_kind_attribute_warned_and_preserved(self, registry):
        card, issues = parse_card(
            "kind: project\ncard_id: p1\nschema_version: '1.0.0'\n"
            "values:\n  human_oversight.interpretability_support: true\n",
            registry,
        )
        assert card is not None
        assert any(i.code is IssueCode.WRONG_KIND for i in warnings(issues))
        assert "human_oversight.interpretability_support" in card.unrecognized

    def test_explicit_null_normalizes_to_unanswered(self, registry):
        card, issues = parse_card(
            "kind: project\ncard_id: p1\nschema_version: '1.0.0'\n"
            "values:\n  is_ai_system: null\n",
            registry,
        )
        assert not errors(issues)
        assert card.value("is_ai_system") is UNANSWERED

    def test_newer_major_schema_rejected(self, registry):
        card, issues = parse_card(
            "kind: project\ncard_id: p1\nschema_version: '2.0.0'\n", registry
        )
        assert card is None
        assert issues[0].code is IssueCode.SCHEMA_VERSION_INCOMPATIBLE

    def test_same_major_newer_minor_accepted(self, registry):
        card, issues = parse_card(
            "kind: project\ncard_id: p1\nschema_version: '1.7.2'\n", registry
        )
        assert card is not None and not errors(issues)

    def test_front_matter_document_with_embed_key(self, registry):
        text = (
            "---\n"
            "license: apache-2.0\n"
            "compliance_card:\n"
            "  kind: model\n"
            "  card_id: m9\n"
            "  schema_version: '1.0.0'\n"
            "  values:\n"
            "    intended_purpose: [general_purpose]\n"
            "---\n"
            "# A hub model card\n"
        )
        card, issues = parse_card(text, registry)
        assert card is not None and not errors(issues)
        assert card.kind is CardKind.MODEL
        assert card.value("intended_purpose") == TagSet(frozenset({"general_purpose"}))

    def test_front_matter_without_embed_key(self, registry):
        text = "---\nkind: data\ncard_id: d9\nschema_version: '1.0.0'\n---\nbody\n"
        card, issues = parse_card(text, registry)
        assert card is not None and card.kind is CardKind.DATA

    def test_json_is_accepted(self, registry):
        card, issues = parse_card(
            '{"kind": "data", "card_id": "d1", "schema_version": "1.0.0"}', registry
        )
        assert card is not None and not errors(issues)


class TestValidateCard:
    def test_fully_conformant_card(self, registry):
        assert validate_card(make_project(), registry) == []

    def test_wrong_kind_warning(self, registry):
        card = ComplianceCard(
            kind=CardKind.PROJECT,
            card_id="p1",
            subject_name="",
            schema_version="1.0.0",
            values={},
            unrecognized={"human_oversight.interpretability_support": True},
        )
        issues = validate_card(card, registry)
        assert issues[0].code is IssueCode.WRONG_KIND
        assert issues[0].severity is Severity.WARNING

    def test_errors_iff_invariants_broken(self, registry):
        # A card that parses against a different registry can carry values
        # this registry rejects.
        card = ComplianceCard(
            kind=CardKind.DATA,
            card_id="d1",
            subject_name="",
            schema_version="1.0.0",
            values={"record_keeping.logging_enabled": Flag(True)},
        )
        issues = validate_card(card, registry)
        assert has_errors(issues)
        assert issues[0].code is IssueCode.WRONG_KIND

    def test_issue_ordering_is_by_path(self, registry):
        card, issues = parse_card(
            "kind: project\ncard_id: p1\nschema_version: '1.0.0'\n"
            "values:\n  zzz.stray: 1\n  aaa.stray: 2\n",
            registry,
        )
        paths = [i.path for i in issues]
        assert paths == sorted(paths)


class TestSerializeCard:
    def test_round_trip_semantic(self, registry):
        card = make_project()
        text = serialize_card(card)
        parsed, issues = parse_card(text, registry)
        assert not errors(issues)
        assert parsed == card

    def test_construction_order_does_not_change_bytes(self, registry):
        a = ComplianceCard(
            kind=CardKind.DATA, card_id="d", subject_name="s", schema_version="1.0.0",
            values={
                "data_governance.bias_examined": Flag(True),
                "accuracy_robustness.data_quality_controls": Flag(False),
            },
        )
        b = ComplianceCard(
            kind=CardKind.DATA, card_id="d", subject_name="s", schema_version="1.0.0",
            values={
                "accuracy_robustness.data_quality_controls": Flag(False),
                "data_governance.bias_examined": Flag(True),
            },
        )
        assert serialize_card(a) == serialize_card(b)

    def test_unanswered_omitted(self):
        card = make_project()
        card = card.with_value("is_ai_system", UNANSWERED)
        assert "is_ai_system" not in serialize_card(card)

    def test_unrecognized_re_emitted(self, registry):
        text = (
            "kind: project\ncard_id: p1\nschema_version: '1.0.0'\n"
            "values:\n  future.attr: [a, b]\n"
        )
        card, _ = parse_card(text, registry)
        out = serialize_card(card)
        assert "future.attr" in out
        reparsed, _ = parse_card(out, registry)
        assert reparsed.unrecognized == {"future.attr": ["a", "b"]}

    def test_canonical_idempotence(self, registry):
        rng = random.Random(7)
        for kind in CardKind:
            card = rand_card(kind, registry, rng, f"c-{kind.value}")
            once = serialize_card(card)
            reparsed, _ = parse_card(once, registry)
            assert serialize_card(reparsed) == once

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_round_trip_property(self, seed):
        registry = __import__("compliance_cards").baseline_registry()
        rng = random.Random(seed)
        kind = rng.choice(list(CardKind))
        card = rand_card(kind, registry, rng, "c1", p_unanswered=0.3)
        parsed, issues = parse_card(serialize_card(card), registry)
        assert not errors(issues)
        assert parsed == card


class TestLoadCardSet:
    def _write(self, tmp_path, name, card):
        p = tmp_path / name
        p.write_text(serialize_card(card), encoding="utf-8")
        return p

    def test_one_plus_one_plus_one(self, tmp_path, registry):
        p = self._write(tmp_path, "p.card.yaml", make_project())
        d = self._write(tmp_path, "d.card.yaml", make_data())
        m = self._write(tmp_path, "m.card.yaml", make_model())
        card_set, issues = load_card_set(p, [d], [m], registry)
        assert card_set is not None and not errors(issues)
        assert len(card_set.all_cards()) == 3

    def test_duplicate_card_ids(self, tmp_path, registry):
        p = self._write(tmp_path, "p.card.yaml", make_project())
        d1 = self._write(tmp_path, "d1.card.yaml", make_data("dup"))
        d2 = self._write(tmp_path, "d2.card.yaml", make_data("dup"))
        card_set, issues = load_card_set(p, [d1, d2], [], registry)
        assert card_set is None
        assert any(i.code is IssueCode.DUPLICATE_ID for i in issues)

    def test_project_slot_with_data_card(self, tmp_path, registry):
        d = self._write(tmp_path, "d.card.yaml", make_data())
        card_set, issues = load_card_set(d, [], [], registry)
        assert card_set is None
        assert any(i.code is IssueCode.WRONG_KIND for i in issues)

    def test_unreadable_file(self, tmp_path, registry):
        card_set, issues = load_card_set(tmp_path / "missing.yaml", [], [], registry)
        assert card_set is None
        assert issues[0].code is IssueCode.IO_ERROR
        assert "missing.yaml" in issues[0].message

    def test_zero_components_is_legal(self, tmp_path, registry):
        p = self._write(tmp_path, "p.card.yaml", make_project())
        card_set, issues = load_card_set(p, [], [], registry)
        assert card_set is not None
        assert card_set.data == () and card_set.models == ()


class TestScaffold:
    @pytest.mark.parametrize("kind", list(CardKind))
    def test_template_parses_with_all_unanswered(self, kind, registry):
        card, issues = parse_card(scaffold_card(kind, registry), registry)
        assert card is not None and not errors(issues)
        assert dict(card.values) == {}

    def test_every_applicable_attribute_listed_with_articles(self, registry):
        text = scaffold_card(CardKind.DATA, registry)
        for d in registry.for_kind(CardKind.DATA):
            assert d.id in text
            assert str(d.articles[0]) in text

    def test_project_dispositive_block_first(self, registry):
        text = scaffold_card(CardKind.PROJECT, registry)
        first_checkable = min(
            text.index(d.id)
            for d in registry.for_kind(CardKind.PROJECT)
            if not d.dispositive
        )
        for d in registry.for_kind(CardKind.PROJECT):
            if d.dispositive:
                assert text.index(f"# {d.id}:") < first_checkable
