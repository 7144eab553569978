"""The compliance analysis engine.

Two deterministic steps over a card set:

1. classify the project from its dispositive characteristics into a label
   set (scope gates first, then label accumulation);
2. evaluate every requirement in the rule table whose applicability matches
   those labels, folding scoped checks across the whole card set, and
   aggregate a verdict.

Unanswered attributes propagate as Unknown -> Indeterminate rather than as
failures. When a *dispositive* attribute is unanswered, classification
widens conservatively (the project is assumed to attract more requirements,
never fewer) and the assumption is recorded on the report.

Everything here is pure: equal inputs yield equal reports (modulo the
elapsed timing field), and callers may run analyses concurrently over a
shared rule table and registry.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence, Union

from .model import (
    AttributeRegistry,
    AttributeValue,
    CardKind,
    CardSet,
    Choice,
    ComplianceCard,
    Flag,
    TagSet,
    TriState,
    UNANSWERED,
    ArticleRef,
    satisfaction,
)


class ConfigurationError(ValueError):
    """Rule table and registry disagree; raised at load, never mid-analysis."""


class MutationError(ValueError):
    """A what-if mutation references an unknown card/attribute or a bad value."""


class ClassificationLabel(str, Enum):
    IN_SCOPE = "in_scope"
    OUT_OF_SCOPE = "out_of_scope"
    PROHIBITED = "prohibited"
    AI_SYSTEM = "ai_system"
    HIGH_RISK_AI_SYSTEM = "high_risk_ai_system"
    GPAI_MODEL = "gpai_model"
    GPAI_MODEL_SYSTEMIC_RISK = "gpai_model_systemic_risk"


class CheckScope(str, Enum):
    FOR_PROJECT = "for_project"
    FOR_EACH_DATA = "for_each_data"
    FOR_EACH_MODEL = "for_each_model"
    CROSS_CARD = "cross_card"


class CheckStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INDETERMINATE = "indeterminate"
    NOT_APPLICABLE = "not_applicable"


class Verdict(str, Enum):
    COMPLIANT = "compliant"
    NON_COMPLIANT = "non_compliant"
    INDETERMINATE = "indeterminate"
    PROHIBITED = "prohibited"
    OUT_OF_SCOPE = "out_of_scope"


@dataclass(frozen=True)
class Check:
    """One scoped check: either a registry attribute or a builtin predicate."""

    scope: CheckScope
    attribute: str | None = None
    builtin: str | None = None

    def __post_init__(self) -> None:
        if (self.attribute is None) == (self.builtin is None):
            raise ValueError("a check names exactly one of attribute or builtin")

    @property
    def target(self) -> str:
        return self.attribute if self.attribute is not None else f"builtin:{self.builtin}"


@dataclass(frozen=True)
class Applicability:
    """Label predicate: all of ``all_of``, at least one of ``any_of`` (when
    nonempty), none of ``none_of``."""

    all_of: frozenset[ClassificationLabel] = frozenset()
    any_of: frozenset[ClassificationLabel] = frozenset()
    none_of: frozenset[ClassificationLabel] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "all_of", frozenset(self.all_of))
        object.__setattr__(self, "any_of", frozenset(self.any_of))
        object.__setattr__(self, "none_of", frozenset(self.none_of))

    def matches(self, labels: frozenset[ClassificationLabel]) -> bool:
        if not self.all_of <= labels:
            return False
        if self.any_of and not (self.any_of & labels):
            return False
        return not (self.none_of & labels)


@dataclass(frozen=True)
class Requirement:
    id: str
    title: str
    articles: tuple[ArticleRef, ...]
    applies: Applicability
    checks: tuple[Check, ...]
    enabled: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "articles", tuple(self.articles))
        object.__setattr__(self, "checks", tuple(self.checks))
        if not self.id:
            raise ValueError("requirement id must be nonempty")
        if not self.checks:
            raise ValueError(f"{self.id}: checks must be nonempty")


@dataclass(frozen=True)
class RuleTable:
    version: str
    requirements: tuple[Requirement, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "requirements", tuple(self.requirements))
        seen: set[str] = set()
        for r in self.requirements:
            if r.id in seen:
                raise ValueError(f"duplicate requirement id {r.id!r}")
            seen.add(r.id)

    def enabled_requirements(self) -> tuple[Requirement, ...]:
        return tuple(r for r in self.requirements if r.enabled)

    def requirement(self, requirement_id: str) -> Requirement | None:
        for r in self.requirements:
            if r.id == requirement_id:
                return r
        return None


@dataclass(frozen=True)
class Evidence:
    """One triggering fact: where a non-satisfied state came from."""

    card_id: str
    attribute_id: str
    observed: AttributeValue
    state: TriState


@dataclass(frozen=True)
class CheckResult:
    requirement_id: str
    status: CheckStatus
    evidence: tuple[Evidence, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "evidence", tuple(self.evidence))


@dataclass(frozen=True)
class Assumption:
    """A dispositive attribute was unanswered; classification assumed a value."""

    attribute_id: str
    assumed: str


@dataclass(frozen=True)
class ComplianceReport:
    classification: frozenset[ClassificationLabel]
    results: tuple[CheckResult, ...]
    verdict: Verdict
    ruleset_version: str
    registry_version: str
    elapsed_ms: float
    assumptions: tuple[Assumption, ...] = ()
    strict: bool = False

    def result_for(self, requirement_id: str) -> CheckResult | None:
        for r in self.results:
            if r.requirement_id == requirement_id:
                return r
        return None


@dataclass(frozen=True)
class SetValue:
    card_id: str
    attribute_id: str
    value: AttributeValue


@dataclass(frozen=True)
class ReplaceCard:
    card_id: str
    card: ComplianceCard


Mutation = Union[SetValue, ReplaceCard]


@dataclass(frozen=True)
class WhatIfResult:
    baseline: ComplianceReport
    mutated: ComplianceReport
    delta: tuple[str, ...]


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

# Widening defaults: an unanswered dispositive attribute resolves to the
# value that keeps the project in scope and attracts the larger requirement
# set (fail-closed selection, fail-open verdicting).
_WIDEN = {
    "operator_role": "provider",
    "placed_on_eu_market": True,
    "put_into_service_in_eu": True,
    "exception": "none",
    "is_ai_system": True,
    "is_gpai_model": True,
    "gpai_systemic_risk": True,
    "high_risk_basis": "annex_iii_use_case",
    "prohibited_practices": frozenset(),
}


class _Consult:
    """Reads dispositive values lazily, recording widening assumptions."""

    def __init__(self, project: ComplianceCard):
        self.project = project
        self.assumptions: list[Assumption] = []

    def token(self, attr_id: str) -> str:
        value = self.project.value(attr_id)
        if value is UNANSWERED:
            assumed = _WIDEN[attr_id]
            self.assumptions.append(Assumption(attr_id, str(assumed)))
            return assumed
        assert isinstance(value, Choice)
        return value.token

    def flag(self, attr_id: str) -> bool:
        value = self.project.value(attr_id)
        if value is UNANSWERED:
            assumed = _WIDEN[attr_id]
            self.assumptions.append(Assumption(attr_id, str(assumed).lower()))
            return bool(assumed)
        assert isinstance(value, Flag)
        return value.value

    def tags(self, attr_id: str) -> frozenset[str]:
        value = self.project.value(attr_id)
        if value is UNANSWERED:
            self.assumptions.append(Assumption(attr_id, "(empty)"))
            return frozenset()
        assert isinstance(value, TagSet)
        return value.tokens


def _classify(project: ComplianceCard) -> tuple[frozenset[ClassificationLabel], tuple[Assumption, ...]]:
    c = _Consult(project)
    L = ClassificationLabel

    # Scope gates. A non-provider role or a project neither placed on the EU
    # market nor put into service there is out of scope outright.
    if c.token("operator_role") != "provider":
        return frozenset({L.OUT_OF_SCOPE}), tuple(c.assumptions)
    placed = project.value("placed_on_eu_market")
    put = project.value("put_into_service_in_eu")
    if isinstance(placed, Flag) and isinstance(put, Flag):
        if not placed.value and not put.value:
            return frozenset({L.OUT_OF_SCOPE}), tuple(c.assumptions)
    else:
        # At least one unanswered: only a definite true settles the gate
        # without widening.
        definite_true = (isinstance(placed, Flag) and placed.value) or (
            isinstance(put, Flag) and put.value
        )
        if not definite_true:
            if placed is UNANSWERED:
                c.flag("placed_on_eu_market")
            if put is UNANSWERED:
                c.flag("put_into_service_in_eu")

    if c.token("exception") != "none":
        return frozenset({L.OUT_OF_SCOPE}), tuple(c.assumptions)

    # Prohibition gate: short-circuits label accumulation.
    if c.tags("prohibited_practices"):
        return frozenset({L.IN_SCOPE, L.PROHIBITED}), tuple(c.assumptions)

    labels = {L.IN_SCOPE}
    if c.flag("is_gpai_model"):
        labels.add(L.GPAI_MODEL)
        if c.flag("gpai_systemic_risk"):
            labels.add(L.GPAI_MODEL_SYSTEMIC_RISK)
    if c.flag("is_ai_system"):
        labels.add(L.AI_SYSTEM)
        if c.token("high_risk_basis") != "none":
            labels.add(L.HIGH_RISK_AI_SYSTEM)
    return frozenset(labels), tuple(c.assumptions)


def classify(
    project: ComplianceCard, registry: AttributeRegistry
) -> frozenset[ClassificationLabel]:
    """Classify a validated project card from its dispositive characteristics."""
    if project.kind is not CardKind.PROJECT:
        raise ValueError("classification requires a project card")
    labels, _ = _classify(project)
    return labels


def applicable_requirements(
    labels: frozenset[ClassificationLabel], table: RuleTable
) -> list[Requirement]:
    """Filter the table by applicability, preserving table order."""
    return [r for r in table.enabled_requirements() if r.applies.matches(labels)]


# ---------------------------------------------------------------------------
# Check evaluation
# ---------------------------------------------------------------------------


def _fold(entries: list[tuple[ComplianceCard, str, AttributeValue, TriState]]) -> tuple[TriState, list[Evidence]]:
    # min under UNSATISFIED < UNKNOWN < SATISFIED; commutative, so
    # per-component evaluation order cannot change the outcome.
    state = TriState.SATISFIED
    evidence = []
    for card, attr_id, value, tri in entries:
        state = min(state, tri)
        if tri is not TriState.SATISFIED:
            evidence.append(Evidence(card.card_id, attr_id, value, tri))
    return state, evidence


def _check_attribute(
    check: Check, card_set: CardSet, registry: AttributeRegistry
) -> tuple[TriState, list[Evidence]]:
    definition = registry.require(check.attribute)
    if check.scope is CheckScope.FOR_PROJECT:
        cards: Sequence[ComplianceCard] = (card_set.project,)
    elif check.scope is CheckScope.FOR_EACH_DATA:
        cards = card_set.data
    elif check.scope is CheckScope.FOR_EACH_MODEL:
        cards = card_set.models
    else:
        raise ConfigurationError(f"attribute checks cannot use scope {check.scope.value}")
    entries = []
    for card in cards:
        value = card.value(check.attribute)
        entries.append((card, check.attribute, value, satisfaction(definition, value)))
    return _fold(entries)


def _builtin_no_prohibited_practices(
    card_set: CardSet, registry: AttributeRegistry
) -> tuple[TriState, list[Evidence]]:
    project = card_set.project
    value = project.value("prohibited_practices")
    if value is UNANSWERED:
        return TriState.UNKNOWN, [
            Evidence(project.card_id, "prohibited_practices", value, TriState.UNKNOWN)
        ]
    assert isinstance(value, TagSet)
    if value.tokens:
        return TriState.UNSATISFIED, [
            Evidence(project.card_id, "prohibited_practices", value, TriState.UNSATISFIED)
        ]
    return TriState.SATISFIED, []


def _builtin_purpose_compatible(
    card_set: CardSet, registry: AttributeRegistry
) -> tuple[TriState, list[Evidence]]:
    """Every component must either declare the general_purpose wildcard or
    cover all of the project's intended-purpose tags.

    Unanswered purposes make the question Unknown (even alongside a definite
    violator); a project purpose left unanswered only matters for components
    that lack the wildcard.
    """
    attr = "intended_purpose"
    project_value = card_set.project.value(attr)
    project_tags = project_value.tokens if isinstance(project_value, TagSet) else None

    components = (*card_set.data, *card_set.models)
    per_card: list[tuple[ComplianceCard, TriState, AttributeValue]] = []
    project_needed = False
    for card in components:
        value = card.value(attr)
        if value is UNANSWERED:
            per_card.append((card, TriState.UNKNOWN, value))
            continue
        assert isinstance(value, TagSet)
        if "general_purpose" in value.tokens:
            per_card.append((card, TriState.SATISFIED, value))
            continue
        project_needed = True
        if project_tags is None:
            per_card.append((card, TriState.UNKNOWN, value))
        elif value.tokens >= project_tags:
            per_card.append((card, TriState.SATISFIED, value))
        else:
            per_card.append((card, TriState.UNSATISFIED, value))

    if all(tri is TriState.SATISFIED for _, tri, _ in per_card):
        return TriState.SATISFIED, []

    evidence = []
    if project_tags is None and project_needed:
        evidence.append(
            Evidence(card_set.project.card_id, attr, project_value, TriState.UNKNOWN)
        )
    evidence.extend(
        Evidence(card.card_id, attr, value, tri)
        for card, tri, value in per_card
        if tri is not TriState.SATISFIED
    )
    if any(tri is TriState.UNKNOWN for _, tri, _ in per_card):
        return TriState.UNKNOWN, evidence
    return TriState.UNSATISFIED, evidence


BuiltinCheck = Callable[[CardSet, AttributeRegistry], tuple[TriState, list[Evidence]]]

#: name -> (required scope, implementation)
BUILTIN_CHECKS: dict[str, tuple[CheckScope, BuiltinCheck]] = {
    "no_prohibited_practices": (CheckScope.FOR_PROJECT, _builtin_no_prohibited_practices),
    "purpose_compatible": (CheckScope.CROSS_CARD, _builtin_purpose_compatible),
}


def evaluate_check(
    check: Check, card_set: CardSet, registry: AttributeRegistry
) -> tuple[TriState, list[Evidence]]:
    """Evaluate one scoped check over the card set.

    Component scopes fold by minimum (any Unsatisfied wins, else any Unknown,
    else Satisfied) and are vacuously satisfied over empty component lists.
    Evidence lists every card contributing a non-satisfied state, in card-set
    order.
    """
    if check.builtin is not None:
        scope, impl = BUILTIN_CHECKS[check.builtin]
        if check.scope is not scope:
            raise ConfigurationError(
                f"builtin {check.builtin} requires scope {scope.value}"
            )
        return impl(card_set, registry)
    return _check_attribute(check, card_set, registry)


def validate_rule_table(table: RuleTable, registry: AttributeRegistry) -> None:
    """Static cross-check of a rule table against a registry.

    Raises ConfigurationError on unknown attributes, builtin/scope
    mismatches, or scope/kind incompatibilities, so failures surface at load
    time rather than mid-analysis.
    """
    scope_kind = {
        CheckScope.FOR_PROJECT: CardKind.PROJECT,
        CheckScope.FOR_EACH_DATA: CardKind.DATA,
        CheckScope.FOR_EACH_MODEL: CardKind.MODEL,
    }
    for req in table.requirements:
        for check in req.checks:
            if check.builtin is not None:
                entry = BUILTIN_CHECKS.get(check.builtin)
                if entry is None:
                    raise ConfigurationError(
                        f"{req.id}: unknown builtin check {check.builtin!r}"
                    )
                if check.scope is not entry[0]:
                    raise ConfigurationError(
                        f"{req.id}: builtin {check.builtin} requires scope {entry[0].value}"
                    )
                continue
            definition = registry.lookup(check.attribute)
            if definition is None:
                raise ConfigurationError(
                    f"{req.id}: check references unknown attribute {check.attribute!r}"
                )
            kind = scope_kind.get(check.scope)
            if kind is None:
                raise ConfigurationError(
                    f"{req.id}: attribute checks cannot use scope {check.scope.value}"
                )
            if not definition.applies_to(kind):
                raise ConfigurationError(
                    f"{req.id}: attribute {check.attribute!r} does not apply to "
                    f"{kind.value} cards"
                )


# ---------------------------------------------------------------------------
# Analysis
# ---------------------------------------------------------------------------


def _requirement_status(states: list[TriState]) -> CheckStatus:
    if any(s is TriState.UNSATISFIED for s in states):
        return CheckStatus.FAIL
    if any(s is TriState.UNKNOWN for s in states):
        return CheckStatus.INDETERMINATE
    return CheckStatus.PASS


def analyze(
    card_set: CardSet,
    table: RuleTable,
    registry: AttributeRegistry,
    strict: bool = False,
) -> ComplianceReport:
    """Run the full analysis: classify, evaluate, aggregate.

    ``strict`` demotes an Indeterminate verdict to NonCompliant at verdict
    time only; per-requirement results are unaffected.
    """
    validate_rule_table(table, registry)
    start = time.perf_counter()

    labels, assumptions = _classify(card_set.project)
    results: list[CheckResult] = []

    if ClassificationLabel.OUT_OF_SCOPE in labels:
        results = [
            CheckResult(r.id, CheckStatus.NOT_APPLICABLE)
            for r in table.enabled_requirements()
        ]
        verdict = Verdict.OUT_OF_SCOPE
    else:
        for req in table.enabled_requirements():
            if not req.applies.matches(labels):
                results.append(CheckResult(req.id, CheckStatus.NOT_APPLICABLE))
                continue
            states: list[TriState] = []
            evidence: list[Evidence] = []
            for check in req.checks:
                state, ev = evaluate_check(check, card_set, registry)
                states.append(state)
                evidence.extend(ev)
            results.append(
                CheckResult(req.id, _requirement_status(states), tuple(evidence))
            )
        if ClassificationLabel.PROHIBITED in labels:
            verdict = Verdict.PROHIBITED
        elif any(r.status is CheckStatus.FAIL for r in results):
            verdict = Verdict.NON_COMPLIANT
        elif any(r.status is CheckStatus.INDETERMINATE for r in results):
            verdict = Verdict.NON_COMPLIANT if strict else Verdict.INDETERMINATE
        else:
            verdict = Verdict.COMPLIANT

    elapsed_ms = (time.perf_counter() - start) * 1000.0
    return ComplianceReport(
        classification=labels,
        results=tuple(results),
        verdict=verdict,
        ruleset_version=table.version,
        registry_version=registry.version,
        elapsed_ms=elapsed_ms,
        assumptions=assumptions,
        strict=strict,
    )


# ---------------------------------------------------------------------------
# What-if
# ---------------------------------------------------------------------------


def apply_mutations(
    card_set: CardSet,
    mutations: Sequence[Mutation],
    registry: AttributeRegistry,
) -> CardSet:
    """Apply mutations to a copy of the set; the original is untouched.

    Every mutation is validated before any evaluation: unknown card ids,
    unknown attributes, kind mismatches, and domain violations raise
    MutationError naming the offender.
    """
    project = card_set.project
    data = list(card_set.data)
    models = list(card_set.models)

    def locate(card_id: str) -> tuple[str, int]:
        if project.card_id == card_id:
            return "project", 0
        for i, card in enumerate(data):
            if card.card_id == card_id:
                return "data", i
        for i, card in enumerate(models):
            if card.card_id == card_id:
                return "models", i
        raise MutationError(f"no card with id {card_id!r} in the set")

    def current(slot: str, index: int) -> ComplianceCard:
        if slot == "project":
            return project
        return data[index] if slot == "data" else models[index]

    for mutation in mutations:
        slot, index = locate(mutation.card_id)
        if isinstance(mutation, SetValue):
            definition = registry.lookup(mutation.attribute_id)
            if definition is None:
                raise MutationError(f"unknown attribute {mutation.attribute_id!r}")
            card = current(slot, index)
            if not definition.applies_to(card.kind):
                raise MutationError(
                    f"attribute {mutation.attribute_id!r} does not apply to "
                    f"{card.kind.value} card {card.card_id!r}"
                )
            if mutation.value is not UNANSWERED and not definition.domain.conforms(
                mutation.value
            ):
                raise MutationError(
                    f"value for {mutation.attribute_id!r} violates its "
                    f"{definition.domain.kind} domain"
                )
            replacement = card.with_value(mutation.attribute_id, mutation.value)
        else:
            card = current(slot, index)
            if mutation.card.kind is not card.kind:
                raise MutationError(
                    f"replacement for {card.card_id!r} must be a {card.kind.value} card"
                )
            replacement = mutation.card
        if slot == "project":
            project = replacement
        elif slot == "data":
            data[index] = replacement
        else:
            models[index] = replacement

    return CardSet(project=project, data=tuple(data), models=tuple(models))


def what_if(
    card_set: CardSet,
    mutations: Sequence[Mutation],
    table: RuleTable,
    registry: AttributeRegistry,
    strict: bool = False,
) -> WhatIfResult:
    """Compare the baseline analysis against a mutated copy of the set."""
    mutated_set = apply_mutations(card_set, mutations, registry)
    baseline = analyze(card_set, table, registry, strict=strict)
    mutated = analyze(mutated_set, table, registry, strict=strict)
    baseline_status = {r.requirement_id: r.status for r in baseline.results}
    delta = tuple(
        r.requirement_id
        for r in mutated.results
        if baseline_status.get(r.requirement_id) != r.status
    )
    return WhatIfResult(baseline=baseline, mutated=mutated, delta=delta)
