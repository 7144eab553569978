"""Card model: value domains, satisfaction rules, registry invariants."""

from __future__ import annotations

import pytest

from compliance_cards import CardKind, TriState, satisfaction
from compliance_cards.model import (
    UNANSWERED,
    AlwaysInformational,
    ArticleRef,
    AttributeDefinition,
    Choice,
    ChoiceDomain,
    ChoiceIn,
    Flag,
    FlagDomain,
    Level,
    LevelAtLeast,
    LevelDomain,
    MustBeTrue,
    TagSet,
    TagSetDomain,
    TagSetNonEmpty,
    art,
)
from compliance_cards.registry import (
    CAT_DATA_GOVERNANCE,
    baseline_registry,
    lookup_attribute,
)


def _def(domain, rule, kinds=(CardKind.PROJECT,), dispositive=False):
    return AttributeDefinition(
        id="test.attr",
        card_kinds=frozenset(kinds),
        domain=domain,
        satisfaction=rule,
        dispositive=dispositive,
        articles=(art("Art. 9"),),
        category="test",
    )


class TestValues:
    def test_level_bounds_unrepresentable(self):
        with pytest.raises(ValueError):
            Level(5)
        with pytest.raises(ValueError):
            Level(-1)
        assert Level(0).value == 0 and Level(4).value == 4

    def test_flag_requires_bool(self):
        with pytest.raises(ValueError):
            Flag(1)

    def test_unanswered_is_singleton(self):
        from compliance_cards.model import _Unanswered

        assert _Unanswered() is UNANSWERED

    def test_tristate_order(self):
        assert TriState.UNSATISFIED < TriState.UNKNOWN < TriState.SATISFIED


class TestSatisfaction:
    def test_must_be_true(self):
        d = _def(FlagDomain(), MustBeTrue())
        assert satisfaction(d, Flag(True)) is TriState.SATISFIED
        assert satisfaction(d, Flag(False)) is TriState.UNSATISFIED

    def test_level_threshold(self):
        d = _def(LevelDomain(), LevelAtLeast(3))
        assert satisfaction(d, Level(2)) is TriState.UNSATISFIED
        assert satisfaction(d, Level(3)) is TriState.SATISFIED

    def test_unanswered_is_unknown(self):
        d = _def(FlagDomain(), MustBeTrue())
        assert satisfaction(d, UNANSWERED) is TriState.UNKNOWN

    def test_informational_satisfied_even_when_unanswered(self):
        d = _def(FlagDomain(), AlwaysInformational())
        assert satisfaction(d, UNANSWERED) is TriState.SATISFIED
        assert satisfaction(d, Flag(False)) is TriState.SATISFIED

    def test_choice_in(self):
        d = _def(ChoiceDomain(("a", "b", "c")), ChoiceIn(frozenset({"a", "b"})))
        assert satisfaction(d, Choice("a")) is TriState.SATISFIED
        assert satisfaction(d, Choice("c")) is TriState.UNSATISFIED

    def test_tagset_non_empty(self):
        d = _def(TagSetDomain(("x", "y")), TagSetNonEmpty())
        assert satisfaction(d, TagSet(frozenset())) is TriState.UNSATISFIED
        assert satisfaction(d, TagSet(frozenset({"x"}))) is TriState.SATISFIED

    def test_type_mismatch_is_contract_violation(self):
        d = _def(FlagDomain(), MustBeTrue())
        with pytest.raises(TypeError):
            satisfaction(d, Level(1))

    def test_totality_over_every_registry_domain(self, registry):
        # Exhaustively enumerable because every domain is finite.
        for d in registry:
            for value in [*d.domain.all_values(), UNANSWERED]:
                assert satisfaction(d, value) in (
                    TriState.SATISFIED,
                    TriState.UNSATISFIED,
                    TriState.UNKNOWN,
                )

    def test_determinism(self, registry):
        d = registry.require("record_keeping.logging_enabled")
        assert satisfaction(d, Flag(True)) == satisfaction(d, Flag(True))


class TestArticleRef:
    @pytest.mark.parametrize(
        "text",
        ["Art. 2", "Art. 2(6)", "Art. 14(3)(a)", "Art. 17(1)(f)", "Art. 53(1)",
         "Annex IV", "Annex XI(2)"],
    )
    def test_parse_render_round_trip(self, text):
        assert str(ArticleRef.parse(text)) == text

    def test_parse_bare_number(self):
        ref = ArticleRef.parse("53(1)")
        assert ref.article == 53 and ref.paragraph == "1"

    def test_paragraph_token_form(self):
        assert ArticleRef.parse("Art. 17(1)(f)").paragraph == "1(f)"

    def test_needs_article_or_annex(self):
        with pytest.raises(ValueError):
            ArticleRef()

    def test_rejects_garbage(self):
        with pytest.raises(ValueError):
            ArticleRef.parse("Recital 10")


class TestAttributeDefinition:
    def test_dispositive_requires_project_kind(self):
        with pytest.raises(ValueError):
            _def(FlagDomain(), MustBeTrue(), kinds=(CardKind.DATA,), dispositive=True)

    def test_rule_domain_compatibility_enforced(self):
        with pytest.raises(ValueError):
            _def(FlagDomain(), LevelAtLeast(3))

    def test_bad_id_rejected(self):
        with pytest.raises(ValueError):
            AttributeDefinition(
                id="Bad.Id",
                card_kinds=frozenset({CardKind.PROJECT}),
                domain=FlagDomain(),
                satisfaction=MustBeTrue(),
                dispositive=False,
                articles=(art("Art. 9"),),
                category="t",
            )


class TestBaselineRegistry:
    def test_data_governance_row_cites_article_10(self, registry):
        data_attrs = [
            d for d in registry.for_kind(CardKind.DATA)
            if d.category == CAT_DATA_GOVERNANCE
        ]
        assert data_attrs
        for d in data_attrs:
            assert art("Art. 10") in d.articles

    def test_model_oversight_support_cites_article_14_3_a(self, registry):
        d = registry.require("human_oversight.interpretability_support")
        assert art("Art. 14(3)(a)") in d.articles
        assert CardKind.MODEL in d.card_kinds

    def test_every_dispositive_attribute_reaches_project_cards(self, registry):
        for d in registry:
            if d.dispositive:
                assert CardKind.PROJECT in d.card_kinds

    def test_lookup_examples(self, registry):
        assert lookup_attribute(registry, "intended_purpose").dispositive is True
        assert lookup_attribute(registry, "no.such.attr") is None
        # Ids are case-sensitive lowercase.
        assert lookup_attribute(registry, "Intended_Purpose") is None

    def test_registry_is_pure_and_cached(self):
        assert baseline_registry() is baseline_registry()
