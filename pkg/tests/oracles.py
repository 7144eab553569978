"""Independent oracles for cross-checking the engine.

Deliberately written from first principles, in a different style from the
library: plain dict/counter logic, no reuse of the engine's evaluation
helpers. The rule table and registry are consumed as *data* only.
"""

from __future__ import annotations

from compliance_cards.engine import CheckScope
from compliance_cards.model import (
    UNANSWERED,
    AlwaysInformational,
    Choice,
    ChoiceIn,
    Flag,
    Level,
    LevelAtLeast,
    MustBeTrue,
    TagSet,
    TagSetNonEmpty,
)

# Widening defaults restated independently (mirrors the documented policy).
WIDEN = {
    "operator_role": "provider",
    "placed_on_eu_market": True,
    "put_into_service_in_eu": True,
    "exception": "none",
    "is_ai_system": True,
    "is_gpai_model": True,
    "gpai_systemic_risk": True,
    "high_risk_basis": "annex_iii_use_case",
}


def oracle_classify(
    role: str,
    placed: bool,
    put: bool,
    exception: str,
    prohibited_nonempty: bool,
    is_ai: bool,
    is_gpai: bool,
    systemic: bool,
    basis: str,
) -> set[str]:
    """Hand-written decision table over fully answered dispositive values."""
    if role != "provider":
        return {"out_of_scope"}
    if placed is False and put is False:
        return {"out_of_scope"}
    if exception != "none":
        return {"out_of_scope"}
    if prohibited_nonempty:
        return {"in_scope", "prohibited"}
    labels = {"in_scope"}
    if is_gpai:
        labels.add("gpai_model")
        if systemic:
            labels.add("gpai_model_systemic_risk")
    if is_ai:
        labels.add("ai_system")
        if basis != "none":
            labels.add("high_risk_ai_system")
    return labels


def _raw(card, attr):
    v = card.value(attr)
    if v is UNANSWERED:
        return None
    if isinstance(v, Flag):
        return v.value
    if isinstance(v, Level):
        return v.value
    if isinstance(v, Choice):
        return v.token
    return set(v.tokens)


def naive_classify(project) -> set[str]:
    role = _raw(project, "operator_role")
    placed = _raw(project, "placed_on_eu_market")
    put = _raw(project, "put_into_service_in_eu")
    exception = _raw(project, "exception")
    prohibited = _raw(project, "prohibited_practices")
    is_ai = _raw(project, "is_ai_system")
    is_gpai = _raw(project, "is_gpai_model")
    systemic = _raw(project, "gpai_systemic_risk")
    basis = _raw(project, "high_risk_basis")
    return oracle_classify(
        role=WIDEN["operator_role"] if role is None else role,
        placed=WIDEN["placed_on_eu_market"] if placed is None else placed,
        put=WIDEN["put_into_service_in_eu"] if put is None else put,
        exception=WIDEN["exception"] if exception is None else exception,
        prohibited_nonempty=bool(prohibited),
        is_ai=WIDEN["is_ai_system"] if is_ai is None else is_ai,
        is_gpai=WIDEN["is_gpai_model"] if is_gpai is None else is_gpai,
        systemic=WIDEN["gpai_systemic_risk"] if systemic is None else systemic,
        basis=WIDEN["high_risk_basis"] if basis is None else basis,
    )


def naive_satisfaction(defn, value) -> str:
    """Returns 'sat' | 'unsat' | 'unknown'."""
    rule = defn.satisfaction
    if isinstance(rule, AlwaysInformational):
        return "sat"
    if value is UNANSWERED:
        return "unknown"
    if isinstance(rule, MustBeTrue):
        return "sat" if value.value is True else "unsat"
    if isinstance(rule, LevelAtLeast):
        return "sat" if value.value >= rule.threshold else "unsat"
    if isinstance(rule, ChoiceIn):
        return "sat" if value.token in rule.tokens else "unsat"
    if isinstance(rule, TagSetNonEmpty):
        return "sat" if len(value.tokens) > 0 else "unsat"
    raise AssertionError(f"unexpected rule {rule}")


def _combine(states: list[str]) -> str:
    if "unsat" in states:
        return "unsat"
    if "unknown" in states:
        return "unknown"
    return "sat"


def naive_purpose_compatible(card_set) -> str:
    proj = _raw(card_set.project, "intended_purpose")
    comps = list(card_set.data) + list(card_set.models)
    per = []
    for c in comps:
        tags = _raw(c, "intended_purpose")
        if tags is None:
            per.append("unknown")
        elif "general_purpose" in tags:
            per.append("sat")
        elif proj is None:
            per.append("unknown")
        elif tags >= proj:
            per.append("sat")
        else:
            per.append("unsat")
    if all(s == "sat" for s in per):
        return "sat"
    if "unknown" in per:
        return "unknown"
    return "unsat"


def naive_check(check, card_set, registry) -> str:
    if check.builtin == "no_prohibited_practices":
        practices = _raw(card_set.project, "prohibited_practices")
        if practices is None:
            return "unknown"
        return "unsat" if practices else "sat"
    if check.builtin == "purpose_compatible":
        return naive_purpose_compatible(card_set)
    defn = registry.lookup(check.attribute)
    if check.scope is CheckScope.FOR_PROJECT:
        cards = [card_set.project]
    elif check.scope is CheckScope.FOR_EACH_DATA:
        cards = list(card_set.data)
    else:
        cards = list(card_set.models)
    return _combine([naive_satisfaction(defn, c.value(check.attribute)) for c in cards])


def naive_applies(requirement, labels: set[str]) -> bool:
    wanted = {l.value for l in requirement.applies.all_of}
    if not wanted.issubset(labels):
        return False
    either = {l.value for l in requirement.applies.any_of}
    if either and not (either & labels):
        return False
    banned = {l.value for l in requirement.applies.none_of}
    return not (banned & labels)


def naive_analyze(card_set, table, registry, strict=False) -> tuple[str, dict[str, str]]:
    """Returns (verdict token, {requirement_id: status token})."""
    labels = naive_classify(card_set.project)
    statuses: dict[str, str] = {}
    if "out_of_scope" in labels:
        for req in table.requirements:
            if req.enabled:
                statuses[req.id] = "not_applicable"
        return "out_of_scope", statuses
    for req in table.requirements:
        if not req.enabled:
            continue
        if not naive_applies(req, labels):
            statuses[req.id] = "not_applicable"
            continue
        outcome = _combine([naive_check(c, card_set, registry) for c in req.checks])
        statuses[req.id] = {"sat": "pass", "unsat": "fail", "unknown": "indeterminate"}[outcome]
    if "prohibited" in labels:
        return "prohibited", statuses
    counts = {"fail": 0, "indeterminate": 0}
    for s in statuses.values():
        if s in counts:
            counts[s] += 1
    if counts["fail"]:
        return "non_compliant", statuses
    if counts["indeterminate"]:
        return ("non_compliant" if strict else "indeterminate"), statuses
    return "compliant", statuses
