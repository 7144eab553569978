"""Stateless HTTP facade over the analysis engine.

Cards travel in the request; nothing is persisted. The registry and rule
table are loaded once at startup and read-only afterwards, so requests can
be served concurrently without locks. /v1/analyze returns exactly the bytes
``compliance-cards analyze --format json`` would print for the same inputs.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import __version__
from .card_io import (
    Severity,
    ValidationIssue,
    assemble_card_set,
    card_from_mapping,
    validate_card,
)
from .engine import (
    Mutation,
    MutationError,
    ReplaceCard,
    RuleTable,
    SetValue,
    analyze,
    what_if,
)
from .model import (
    AttributeRegistry,
    CardKind,
    ChoiceDomain,
    TagSetDomain,
    UNANSWERED,
    decode_value,
)
from .registry import baseline_registry
from .report import render_report, whatif_to_dict
from .rules import bundled_rule_table

DEFAULT_MAX_BODY = 1 << 20  # 1 MiB


def _issue_dict(issue: ValidationIssue) -> dict:
    return {
        "severity": issue.severity.value,
        "path": issue.path,
        "message": issue.message,
        "code": issue.code.value,
    }


def _bad_request(detail: str) -> JSONResponse:
    return JSONResponse(status_code=400, content={"error": detail})


def _unprocessable(issues: list[ValidationIssue] | None = None, detail: str | None = None) -> JSONResponse:
    content: dict = {"error": detail or "card set is invalid"}
    if issues:
        content["issues"] = [_issue_dict(i) for i in issues]
    return JSONResponse(status_code=422, content=content)


def _domain_dict(definition) -> dict:
    domain = definition.domain
    out: dict = {"type": domain.kind}
    if isinstance(domain, (ChoiceDomain, TagSetDomain)):
        out["vocabulary"] = list(domain.vocabulary)
    if domain.kind == "level":
        out["min"] = 0
        out["max"] = 4
    return out


def create_app(
    registry: AttributeRegistry | None = None,
    table: RuleTable | None = None,
    max_body: int = DEFAULT_MAX_BODY,
    cors: bool = True,
) -> FastAPI:
    registry = registry or baseline_registry()
    table = table or bundled_rule_table()

    app = FastAPI(title="compliance-cards", version=__version__)
    if cors:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=["*"],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    async def _read_json(request: Request) -> tuple[object | None, Response | None]:
        body = await request.body()
        if len(body) > max_body:
            return None, JSONResponse(
                status_code=413,
                content={"error": f"request body exceeds {max_body} bytes"},
            )
        if not body:
            return None, _bad_request("empty request body")
        try:
            return json.loads(body), None
        except json.JSONDecodeError as exc:
            return None, _bad_request(f"request body is not valid JSON: {exc}")

    def _parse_cards(doc: dict):
        """Parse project/data/models members into labeled cards + issues."""
        issues: list[ValidationIssue] = []

        def one(label: str, raw: object):
            if not isinstance(raw, dict):
                raise _WireError(f"{label} must be a card object")
            card, card_issues = card_from_mapping(raw, registry)
            issues.extend(
                ValidationIssue(i.severity, f"{label}:{i.path}", i.message, i.code)
                for i in card_issues
            )
            return label, card

        if "project" not in doc:
            raise _WireError("project card is required")
        project = one("project", doc["project"])
        data_raw = doc.get("data", [])
        models_raw = doc.get("models", [])
        if not isinstance(data_raw, list) or not isinstance(models_raw, list):
            raise _WireError("data and models must be lists of card objects")
        data = [one(f"data[{i}]", raw) for i, raw in enumerate(data_raw)]
        models = [one(f"models[{i}]", raw) for i, raw in enumerate(models_raw)]
        return project, data, models, issues

    def _options(doc: dict) -> tuple[bool, Response | None]:
        options = doc.get("options", {})
        if not isinstance(options, dict):
            raise _WireError("options must be an object")
        strict = bool(options.get("strict", False))
        pin = options.get("rules_version_pin")
        if pin is not None and pin != table.version:
            return strict, _unprocessable(
                detail=f"rules_version_pin {pin!r} does not match active "
                       f"rule table {table.version!r}"
            )
        return strict, None

    @app.get("/healthz")
    async def healthz() -> Response:
        return Response(content="ok", media_type="text/plain")

    @app.post("/v1/validate")
    async def validate_endpoint(request: Request) -> Response:
        doc, err = await _read_json(request)
        if err is not None:
            return err
        if not isinstance(doc, dict):
            return _bad_request("request body must be a card object")
        card, issues = card_from_mapping(doc, registry)
        if card is not None:
            known = set(issues)
            issues = issues + [
                i for i in validate_card(card, registry) if i not in known
            ]
        return JSONResponse(
            status_code=200,
            content={
                "valid": card is not None
                and not any(i.severity is Severity.ERROR for i in issues),
                "issues": [_issue_dict(i) for i in issues],
            },
        )

    @app.post("/v1/analyze")
    async def analyze_endpoint(request: Request) -> Response:
        doc, err = await _read_json(request)
        if err is not None:
            return err
        if not isinstance(doc, dict):
            return _bad_request("request body must be an object")
        try:
            project, data, models, issues = _parse_cards(doc)
            strict, pin_err = _options(doc)
        except _WireError as exc:
            return _bad_request(str(exc))
        if pin_err is not None:
            return pin_err
        card_set, issues = assemble_card_set(project, data, models, issues)
        if card_set is None:
            return _unprocessable(issues)
        report = analyze(card_set, table, registry, strict=strict)
        return Response(
            content=render_report(report, "json"), media_type="application/json"
        )

    @app.post("/v1/whatif")
    async def whatif_endpoint(request: Request) -> Response:
        doc, err = await _read_json(request)
        if err is not None:
            return err
        if not isinstance(doc, dict):
            return _bad_request("request body must be an object")
        try:
            project, data, models, issues = _parse_cards(doc)
            strict, pin_err = _options(doc)
        except _WireError as exc:
            return _bad_request(str(exc))
        if pin_err is not None:
            return pin_err
        card_set, issues = assemble_card_set(project, data, models, issues)
        if card_set is None:
            return _unprocessable(issues)
        try:
            mutations = _parse_mutations(doc.get("mutations", []), registry)
            result = what_if(card_set, mutations, table, registry, strict=strict)
        except _WireError as exc:
            return _bad_request(str(exc))
        except MutationError as exc:
            return _unprocessable(detail=str(exc))
        return Response(
            content=json.dumps(whatif_to_dict(result), indent=2) + "\n",
            media_type="application/json",
        )

    @app.get("/v1/schema/{kind}")
    async def schema_endpoint(kind: str) -> Response:
        if kind not in CardKind._value2member_map_:
            return JSONResponse(
                status_code=404, content={"error": f"unknown card kind {kind!r}"}
            )
        card_kind = CardKind(kind)
        attributes = [
            {
                "id": d.id,
                "category": d.category,
                "domain": _domain_dict(d),
                "dispositive": d.dispositive,
                "articles": [str(a) for a in d.articles],
                "kinds": sorted(k.value for k in d.card_kinds),
            }
            for d in registry.for_kind(card_kind)
        ]
        return JSONResponse(
            status_code=200,
            content={
                "kind": kind,
                "registry_version": registry.version,
                "attributes": attributes,
            },
        )

    @app.get("/v1/rules")
    async def rules_endpoint() -> Response:
        requirements = [
            {
                "id": r.id,
                "title": r.title,
                "articles": [str(a) for a in r.articles],
                "applies": {
                    "all_of": sorted(l.value for l in r.applies.all_of),
                    "any_of": sorted(l.value for l in r.applies.any_of),
                    "none_of": sorted(l.value for l in r.applies.none_of),
                },
                "enabled": r.enabled,
                "checks": [
                    {"scope": c.scope.value, "target": c.target} for c in r.checks
                ],
            }
            for r in table.requirements
        ]
        return JSONResponse(
            status_code=200,
            content={"rules_version": table.version, "requirements": requirements},
        )

    return app


class _WireError(ValueError):
    """Malformed request shape (maps to HTTP 400)."""


def _parse_mutations(raw: object, registry: AttributeRegistry) -> list[Mutation]:
    if not isinstance(raw, list):
        raise _WireError("mutations must be a list")
    mutations: list[Mutation] = []
    for i, record in enumerate(raw):
        where = f"mutations[{i}]"
        if not isinstance(record, dict):
            raise _WireError(f"{where}: must be an object")
        card_id = record.get("card_id")
        if not isinstance(card_id, str) or not card_id:
            raise _WireError(f"{where}: card_id (string) is required")
        if "replace_with" in record:
            replacement_raw = record["replace_with"]
            if not isinstance(replacement_raw, dict):
                raise _WireError(f"{where}: replace_with must be a card object")
            card, issues = card_from_mapping(replacement_raw, registry)
            if card is None:
                problems = "; ".join(str(i) for i in issues)
                raise MutationError(f"{where}: replacement card invalid: {problems}")
            mutations.append(ReplaceCard(card_id, card))
            continue
        attr_id = record.get("attribute_id")
        if not isinstance(attr_id, str) or not attr_id:
            raise _WireError(f"{where}: attribute_id (string) is required")
        definition = registry.lookup(attr_id)
        if definition is None:
            raise MutationError(f"{where}: unknown attribute {attr_id!r}")
        raw_value = record.get("value")
        try:
            value = decode_value(definition.domain, raw_value)
        except ValueError as exc:
            raise MutationError(f"{where}: {exc}") from exc
        mutations.append(SetValue(card_id, attr_id, value))
    return mutations


app = create_app()
