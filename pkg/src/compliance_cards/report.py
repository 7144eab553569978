"""Report renderings (json/text/markdown) and per-requirement explanations.

All renderings are pure functions of the report: equal reports produce
byte-identical output. The JSON form is schema-versioned and round-trips
losslessly through ``report_from_dict``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .engine import (
    Assumption,
    CheckResult,
    CheckStatus,
    ClassificationLabel,
    ComplianceReport,
    Evidence,
    RuleTable,
    Verdict,
)
from .model import AttributeRegistry, ArticleRef, TriState, value_from_raw, value_to_raw
from .rules import bundled_rule_table

REPORT_SCHEMA_VERSION = "1"

#: Every rendering carries this line; the tool predicts, it does not certify.
DISCLAIMER = (
    "Automated prediction for development triage only; not legal advice "
    "and not a conformity assessment."
)

_FORMATS = ("json", "text", "markdown")


def report_to_dict(report: ComplianceReport) -> dict:
    return {
        "report_schema_version": REPORT_SCHEMA_VERSION,
        "ruleset_version": report.ruleset_version,
        "registry_version": report.registry_version,
        "strict": report.strict,
        "classification": sorted(label.value for label in report.classification),
        "assumptions": [
            {"attribute_id": a.attribute_id, "assumed": a.assumed}
            for a in report.assumptions
        ],
        "results": [
            {
                "requirement_id": r.requirement_id,
                "status": r.status.value,
                "evidence": [
                    {
                        "card_id": e.card_id,
                        "attribute_id": e.attribute_id,
                        "observed": value_to_raw(e.observed),
                        "state": e.state.token,
                    }
                    for e in r.evidence
                ],
            }
            for r in report.results
        ],
        "verdict": report.verdict.value,
        "elapsed_ms": round(report.elapsed_ms, 3),
        "disclaimer": DISCLAIMER,
    }


def report_from_dict(doc: dict) -> ComplianceReport:
    """Rebuild a report from its JSON form. Inverse of report_to_dict up to
    elapsed rounding."""
    tri = {s.token: s for s in TriState}
    return ComplianceReport(
        classification=frozenset(
            ClassificationLabel(t) for t in doc["classification"]
        ),
        results=tuple(
            CheckResult(
                requirement_id=r["requirement_id"],
                status=CheckStatus(r["status"]),
                evidence=tuple(
                    Evidence(
                        card_id=e["card_id"],
                        attribute_id=e["attribute_id"],
                        observed=value_from_raw(e["observed"]),
                        state=tri[e["state"]],
                    )
                    for e in r["evidence"]
                ),
            )
            for r in doc["results"]
        ),
        verdict=Verdict(doc["verdict"]),
        ruleset_version=doc["ruleset_version"],
        registry_version=doc["registry_version"],
        elapsed_ms=float(doc["elapsed_ms"]),
        assumptions=tuple(
            Assumption(a["attribute_id"], a["assumed"]) for a in doc["assumptions"]
        ),
        strict=bool(doc["strict"]),
    )


def _evidence_clause(e: Evidence) -> str:
    if e.state is TriState.UNKNOWN:
        return f"attribute {e.attribute_id} on card {e.card_id} is unanswered"
    return (
        f"attribute {e.attribute_id} on card {e.card_id} is "
        f"{json.dumps(value_to_raw(e.observed))} ({e.state.token})"
    )


def _render_text(report: ComplianceReport) -> str:
    lines = [
        f"Compliance analysis (rules {report.ruleset_version}, "
        f"registry {report.registry_version})",
        "classification: " + ", ".join(sorted(l.value for l in report.classification)),
    ]
    for a in report.assumptions:
        lines.append(f"assumed: {a.attribute_id} unanswered -> {a.assumed}")
    for r in report.results:
        line = f"{r.requirement_id}: {r.status.value}"
        if r.evidence:
            line += " — " + "; ".join(_evidence_clause(e) for e in r.evidence)
        lines.append(line)
    lines.append(DISCLAIMER)
    lines.append(f"VERDICT: {report.verdict.value.upper().replace('_', ' ')}")
    return "\n".join(lines) + "\n"


def _render_markdown(report: ComplianceReport) -> str:
    lines = [
        "# Compliance analysis",
        "",
        f"**Verdict:** {report.verdict.value.upper().replace('_', ' ')}",
        "",
        "Classification: "
        + ", ".join(f"`{l.value}`" for l in sorted(report.classification)),
        "",
    ]
    if report.assumptions:
        assumed = "; ".join(f"`{a.attribute_id}` -> {a.assumed}" for a in report.assumptions)
        lines += [f"Assumed (unanswered dispositive attributes): {assumed}", ""]
    lines.append("| Requirement | Status | Evidence |")
    lines.append("| --- | --- | --- |")
    for r in report.results:
        evidence = "; ".join(_evidence_clause(e) for e in r.evidence)
        lines.append(f"| {r.requirement_id} | {r.status.value} | {evidence} |")
    lines += [
        "",
        f"_Rules {report.ruleset_version}, registry {report.registry_version}._",
        "",
        f"_{DISCLAIMER}_",
    ]
    return "\n".join(lines) + "\n"


def render_report(report: ComplianceReport, format: str = "text") -> str:
    """Render a report. Output always ends with exactly one newline."""
    if format == "json":
        return json.dumps(report_to_dict(report), indent=2) + "\n"
    if format == "text":
        return _render_text(report)
    if format == "markdown":
        return _render_markdown(report)
    raise ValueError(f"unknown format {format!r}; expected one of {_FORMATS}")


def whatif_to_dict(result) -> dict:
    """JSON form of a what-if comparison (shared by CLI and service)."""
    return {
        "baseline": report_to_dict(result.baseline),
        "mutated": report_to_dict(result.mutated),
        "delta": list(result.delta),
    }


# ---------------------------------------------------------------------------
# Explanations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Explanation:
    requirement_id: str
    status: CheckStatus
    articles: tuple[ArticleRef, ...]
    narrative: str
    remediation_hint: str


def _missing_labels(requirement, labels: frozenset[ClassificationLabel]) -> list[str]:
    missing = [l.value for l in sorted(requirement.applies.all_of) if l not in labels]
    if requirement.applies.any_of and not (requirement.applies.any_of & labels):
        missing.append(
            "any of " + "/".join(sorted(l.value for l in requirement.applies.any_of))
        )
    excluded = [l.value for l in sorted(requirement.applies.none_of) if l in labels]
    missing.extend(f"absence of {l}" for l in excluded)
    return missing


def explain_requirement(
    report: ComplianceReport,
    requirement_id: str,
    registry: AttributeRegistry,
    table: RuleTable | None = None,
) -> Explanation:
    """Build a narrative explanation for one requirement's result.

    The narrative names every evidence entry exactly once; the remediation
    hint is template-generated from the evidenced attributes' category
    labels (never legal advice).
    """
    if table is None:
        table = bundled_rule_table()
    result = report.result_for(requirement_id)
    requirement = table.requirement(requirement_id)
    if result is None or requirement is None:
        valid = ", ".join(r.requirement_id for r in report.results)
        raise KeyError(
            f"unknown requirement {requirement_id!r}; valid ids: {valid}"
        )
    articles = requirement.articles
    refs = ", ".join(str(a) for a in articles)

    if result.status is CheckStatus.NOT_APPLICABLE:
        labels = ", ".join(sorted(l.value for l in report.classification)) or "(none)"
        missing = _missing_labels(requirement, report.classification)
        narrative = (
            f"{requirement.title} ({refs}) does not apply: the project is "
            f"classified as [{labels}], which lacks "
            f"{', '.join(missing) if missing else 'a required label'}."
        )
        hint = "No action needed under the current classification."
    elif result.status is CheckStatus.PASS:
        narrative = f"{requirement.title} ({refs}): every check is satisfied."
        hint = "No action needed."
    else:
        clauses = "; ".join(_evidence_clause(e) for e in result.evidence)
        narrative = f"{requirement.title} ({refs}) is {result.status.value}: {clauses}."
        categories = []
        for e in result.evidence:
            definition = registry.lookup(e.attribute_id)
            if definition is not None and definition.category not in categories:
                categories.append(definition.category)
        hint = (
            "Review the card entries under: " + "; ".join(categories) + ". "
            + DISCLAIMER
            if categories
            else DISCLAIMER
        )
    return Explanation(
        requirement_id=requirement_id,
        status=result.status,
        articles=articles,
        narrative=narrative,
        remediation_hint=hint,
    )
