"""Card document parsing, validation, and canonical serialization.

Card files are YAML mappings (a JSON object works too — JSON is a YAML
subset). A Markdown file whose first line opens a ``---`` front-matter fence
is also accepted; the card then lives in the fenced metadata block, either
directly or under the ``compliance_card`` key when embedded in a hub card.

Canonical form: every mapping key sorted lexicographically, unanswered
attributes omitted, tag sets as sorted lists. ``serialize_card`` is
byte-stable: serialize(parse(serialize(c))) == serialize(c).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import yaml

from .model import (
    CARD_SCHEMA_VERSION,
    AttributeRegistry,
    CardKind,
    CardSet,
    ComplianceCard,
    decode_value,
    is_valid_attribute_id,
    value_to_raw,
)

RESERVED_KEYS = ("kind", "card_id", "subject_name", "schema_version", "values")

#: Hub documents embed the card under this front-matter key.
EMBED_KEY = "compliance_card"


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


class IssueCode(str, Enum):
    """Closed set of machine tokens carried by validation issues."""

    MALFORMED_DOCUMENT = "MALFORMED_DOCUMENT"
    UNTERMINATED_FRONT_MATTER = "UNTERMINATED_FRONT_MATTER"
    MISSING_KIND = "MISSING_KIND"
    INVALID_KIND = "INVALID_KIND"
    MISSING_CARD_ID = "MISSING_CARD_ID"
    MISSING_SCHEMA_VERSION = "MISSING_SCHEMA_VERSION"
    SCHEMA_VERSION_INCOMPATIBLE = "SCHEMA_VERSION_INCOMPATIBLE"
    UNKNOWN_ATTRIBUTE = "UNKNOWN_ATTRIBUTE"
    DOMAIN_VIOLATION = "DOMAIN_VIOLATION"
    WRONG_KIND = "WRONG_KIND"
    DUPLICATE_ID = "DUPLICATE_ID"
    IO_ERROR = "IO_ERROR"


@dataclass(frozen=True)
class ValidationIssue:
    severity: Severity
    path: str
    message: str
    code: IssueCode

    def __str__(self) -> str:
        return f"{self.path}:{self.code.value} {self.message}"


def _error(path: str, code: IssueCode, message: str) -> ValidationIssue:
    return ValidationIssue(Severity.ERROR, path, message, code)


def _warning(path: str, code: IssueCode, message: str) -> ValidationIssue:
    return ValidationIssue(Severity.WARNING, path, message, code)


def has_errors(issues: Iterable[ValidationIssue]) -> bool:
    return any(i.severity is Severity.ERROR for i in issues)


class CardDocumentFormat(str, Enum):
    PLAIN_CARD = "plain_card"
    FRONT_MATTER = "front_matter"


def detect_format(text: str) -> CardDocumentFormat:
    first_line = text.split("\n", 1)[0].rstrip()
    if first_line == "---":
        return CardDocumentFormat.FRONT_MATTER
    return CardDocumentFormat.PLAIN_CARD


def extract_front_matter(text: str) -> tuple[str, str, list[ValidationIssue]]:
    """Split a document into (metadata text, body text).

    A document opening with a ``---`` fence yields the block between the
    first and second fences; anything else yields ("", whole text). The body
    is preserved byte-exactly.
    """
    if detect_format(text) is CardDocumentFormat.PLAIN_CARD:
        return "", text, []
    rest = text.split("\n", 1)[1] if "\n" in text else ""
    lines = rest.split("\n")
    for i, line in enumerate(lines):
        if line.rstrip() == "---":
            metadata = "\n".join(lines[:i])
            body = "\n".join(lines[i + 1:])
            return metadata, body, []
    issue = _error(
        "document",
        IssueCode.UNTERMINATED_FRONT_MATTER,
        "front-matter fence opened but never closed",
    )
    return "", text, [issue]


class _DuplicateKey(Exception):
    def __init__(self, key: object, line: int):
        super().__init__(f"duplicate key {key!r} at line {line}")
        self.key = key
        self.line = line


class _StrictLoader(yaml.SafeLoader):
    """SafeLoader that rejects duplicate mapping keys instead of silently
    keeping the last one."""


def _construct_mapping(loader: _StrictLoader, node: yaml.MappingNode, deep: bool = False):
    seen: set[object] = set()
    for key_node, _ in node.value:
        key = loader.construct_object(key_node, deep=True)
        if key in seen:
            raise _DuplicateKey(key, key_node.start_mark.line + 1)
        seen.add(key)
    return yaml.SafeLoader.construct_mapping(loader, node, deep=deep)


_StrictLoader.add_constructor(
    yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping
)


def _load_yaml_mapping(text: str) -> tuple[dict | None, list[ValidationIssue]]:
    try:
        doc = yaml.load(text, Loader=_StrictLoader)
    except _DuplicateKey as exc:
        return None, [_error(str(exc.key), IssueCode.DUPLICATE_ID, str(exc))]
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark else "document"
        return None, [_error(where, IssueCode.MALFORMED_DOCUMENT, f"not valid YAML: {exc}")]
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        return None, [
            _error("document", IssueCode.MALFORMED_DOCUMENT, "document must be a mapping")
        ]
    return doc, []


def _check_schema_version(version: object) -> ValidationIssue | None:
    if not isinstance(version, str) or not version:
        return _error(
            "schema_version", IssueCode.MISSING_SCHEMA_VERSION, "schema_version is required"
        )
    parts = version.split(".")
    if not parts or not all(p.isdigit() for p in parts):
        return _error(
            "schema_version",
            IssueCode.SCHEMA_VERSION_INCOMPATIBLE,
            f"schema_version {version!r} is not a dotted version number",
        )
    major = int(parts[0])
    current_major = int(CARD_SCHEMA_VERSION.split(".")[0])
    if major > current_major:
        return _error(
            "schema_version",
            IssueCode.SCHEMA_VERSION_INCOMPATIBLE,
            f"schema major version {major} is newer than supported {current_major}",
        )
    return None


def card_from_mapping(
    doc: dict, registry: AttributeRegistry
) -> tuple[ComplianceCard | None, list[ValidationIssue]]:
    """Normalize an already-decoded mapping into a card.

    Shared by file parsing and the JSON service wire. Unknown attributes and
    attributes that do not apply to this card's kind are warned about and
    preserved in the card's unrecognized map; they are never silently
    dropped.
    """
    issues: list[ValidationIssue] = []

    kind_raw = doc.get("kind")
    kind: CardKind | None = None
    if kind_raw is None:
        issues.append(_error("kind", IssueCode.MISSING_KIND, "kind is required"))
    elif isinstance(kind_raw, str) and kind_raw in CardKind._value2member_map_:
        kind = CardKind(kind_raw)
    else:
        issues.append(
            _error("kind", IssueCode.INVALID_KIND,
                   f"kind must be one of project/data/model, got {kind_raw!r}")
        )

    card_id = doc.get("card_id")
    if not isinstance(card_id, str) or not card_id:
        issues.append(
            _error("card_id", IssueCode.MISSING_CARD_ID, "card_id (nonempty string) is required")
        )
        card_id = None

    version_issue = _check_schema_version(doc.get("schema_version"))
    if version_issue is not None:
        issues.append(version_issue)

    subject_name = doc.get("subject_name", "")
    if not isinstance(subject_name, str):
        subject_name = str(subject_name)

    values_raw = doc.get("values")
    if values_raw is None:
        values_raw = {}
    if not isinstance(values_raw, dict):
        issues.append(
            _error("values", IssueCode.MALFORMED_DOCUMENT, "values must be a mapping")
        )
        values_raw = {}

    # Stray top-level keys join the unrecognized map; canonical output emits
    # them inside values.
    strays = {
        k: v for k, v in doc.items() if k not in RESERVED_KEYS and k != EMBED_KEY
    }
    for key in strays:
        issues.append(
            _warning(str(key), IssueCode.UNKNOWN_ATTRIBUTE,
                     f"unexpected top-level key {key!r} preserved as unrecognized")
        )

    values = {}
    unrecognized: dict[str, object] = {str(k): v for k, v in strays.items()}
    for key, raw in values_raw.items():
        path = str(key)
        definition = registry.lookup(path) if isinstance(key, str) else None
        if definition is None:
            issues.append(
                _warning(path, IssueCode.UNKNOWN_ATTRIBUTE,
                         f"attribute {path!r} is not in the registry; preserved")
            )
            unrecognized[path] = raw
            continue
        if kind is not None and not definition.applies_to(kind):
            kinds = "/".join(sorted(k.value for k in definition.card_kinds))
            issues.append(
                _warning(path, IssueCode.WRONG_KIND,
                         f"attribute {path!r} applies to {kinds} cards, not {kind.value}; preserved")
            )
            unrecognized[path] = raw
            continue
        try:
            values[path] = decode_value(definition.domain, raw)
        except ValueError as exc:
            issues.append(_error(path, IssueCode.DOMAIN_VIOLATION, str(exc)))

    issues.sort(key=lambda i: (i.path, i.code.value))
    if has_errors(issues) or kind is None or card_id is None:
        return None, issues
    card = ComplianceCard(
        kind=kind,
        card_id=card_id,
        subject_name=subject_name,
        schema_version=str(doc.get("schema_version")),
        values=values,
        unrecognized=unrecognized,
    )
    return card, issues


def parse_card(
    text: str, registry: AttributeRegistry
) -> tuple[ComplianceCard | None, list[ValidationIssue]]:
    """Parse a card document (plain or front-matter form)."""
    if detect_format(text) is CardDocumentFormat.FRONT_MATTER:
        metadata, _, fm_issues = extract_front_matter(text)
        if fm_issues:
            return None, fm_issues
        text = metadata
    doc, issues = _load_yaml_mapping(text)
    if doc is None:
        return None, issues
    if EMBED_KEY in doc and isinstance(doc[EMBED_KEY], dict):
        doc = doc[EMBED_KEY]
    card, more = card_from_mapping(doc, registry)
    return card, issues + more


def validate_card(
    card: ComplianceCard, registry: AttributeRegistry
) -> list[ValidationIssue]:
    """Re-check an in-memory card against the registry.

    Error issues appear iff a card-model invariant is broken; warnings cover
    preserved unrecognized attributes. Issues are ordered by path.
    """
    issues: list[ValidationIssue] = []
    if not card.card_id:
        issues.append(_error("card_id", IssueCode.MISSING_CARD_ID, "card_id is empty"))
    version_issue = _check_schema_version(card.schema_version)
    if version_issue is not None:
        issues.append(version_issue)
    for attr_id, value in card.values.items():
        definition = registry.lookup(attr_id)
        if definition is None:
            issues.append(
                _error(attr_id, IssueCode.UNKNOWN_ATTRIBUTE,
                       f"attribute {attr_id!r} is not in the registry")
            )
            continue
        if not definition.applies_to(card.kind):
            issues.append(
                _error(attr_id, IssueCode.WRONG_KIND,
                       f"attribute {attr_id!r} does not apply to {card.kind.value} cards")
            )
            continue
        if not definition.domain.conforms(value):
            issues.append(
                _error(attr_id, IssueCode.DOMAIN_VIOLATION,
                       f"value {value_to_raw(value)!r} violates the {definition.domain.kind} domain")
            )
    for attr_id in card.unrecognized:
        definition = registry.lookup(attr_id)
        if definition is not None and not definition.applies_to(card.kind):
            kinds = "/".join(sorted(k.value for k in definition.card_kinds))
            issues.append(
                _warning(attr_id, IssueCode.WRONG_KIND,
                         f"attribute {attr_id!r} applies to {kinds} cards, not {card.kind.value}")
            )
        else:
            issues.append(
                _warning(attr_id, IssueCode.UNKNOWN_ATTRIBUTE,
                         f"attribute {attr_id!r} is not in the registry")
            )
    issues.sort(key=lambda i: (i.path, i.code.value))
    return issues


def serialize_card(card: ComplianceCard) -> str:
    """Emit the canonical document form (sorted keys, unanswered omitted)."""
    values: dict[str, object] = {
        attr_id: value_to_raw(value) for attr_id, value in card.values.items()
    }
    for attr_id, raw in card.unrecognized.items():
        values[attr_id] = raw
    doc: dict[str, object] = {
        "kind": card.kind.value,
        "card_id": card.card_id,
        "schema_version": card.schema_version,
        "values": dict(sorted(values.items())),
    }
    if card.subject_name:
        doc["subject_name"] = card.subject_name
    return yaml.safe_dump(
        doc, sort_keys=True, default_flow_style=False, allow_unicode=True
    )


def load_card(
    path: str | Path, registry: AttributeRegistry
) -> tuple[ComplianceCard | None, list[ValidationIssue]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        return None, [_error(str(path), IssueCode.IO_ERROR, f"cannot read {path}: {exc}")]
    return parse_card(text, registry)


def load_card_set(
    project_path: str | Path,
    data_paths: Sequence[str | Path],
    model_paths: Sequence[str | Path],
    registry: AttributeRegistry,
) -> tuple[CardSet | None, list[ValidationIssue]]:
    """Load and validate a full card set from files.

    Enforces: each file parses, each card's kind matches the slot it was
    supplied in, card ids unique across the set.
    """
    issues: list[ValidationIssue] = []
    slots: list[tuple[str, CardKind, str | Path]] = [("project", CardKind.PROJECT, project_path)]
    slots += [(f"data[{i}]", CardKind.DATA, p) for i, p in enumerate(data_paths)]
    slots += [(f"models[{i}]", CardKind.MODEL, p) for i, p in enumerate(model_paths)]

    loaded: list[tuple[CardKind, ComplianceCard]] = []
    for label, expected_kind, path in slots:
        card, card_issues = load_card(path, registry)
        issues.extend(
            ValidationIssue(i.severity, f"{path}:{i.path}", i.message, i.code)
            for i in card_issues
        )
        if card is None:
            continue
        if card.kind is not expected_kind:
            issues.append(
                _error(f"{path}:kind", IssueCode.WRONG_KIND,
                       f"{label} slot expects a {expected_kind.value} card, "
                       f"got {card.kind.value}")
            )
            continue
        loaded.append((expected_kind, card))

    seen: dict[str, str] = {}
    for _, card in loaded:
        if card.card_id in seen:
            issues.append(
                _error(f"{card.card_id}:card_id", IssueCode.DUPLICATE_ID,
                       f"card_id {card.card_id!r} used by more than one card")
            )
        seen[card.card_id] = card.card_id

    if has_errors(issues):
        return None, issues
    project = next(c for k, c in loaded if k is CardKind.PROJECT)
    data = tuple(c for k, c in loaded if k is CardKind.DATA)
    models = tuple(c for k, c in loaded if k is CardKind.MODEL)
    return CardSet(project=project, data=data, models=models), issues


def assemble_card_set(
    project: tuple[str, ComplianceCard | None],
    data: Sequence[tuple[str, ComplianceCard | None]],
    models: Sequence[tuple[str, ComplianceCard | None]],
    prior_issues: list[ValidationIssue],
) -> tuple[CardSet | None, list[ValidationIssue]]:
    """Build a CardSet from already-parsed cards, enforcing set invariants.

    Used by the service wire, where cards arrive as labeled JSON objects
    rather than files.
    """
    issues = list(prior_issues)
    labeled: list[tuple[str, CardKind, ComplianceCard | None]] = [
        (project[0], CardKind.PROJECT, project[1])
    ]
    labeled += [(label, CardKind.DATA, card) for label, card in data]
    labeled += [(label, CardKind.MODEL, card) for label, card in models]

    kept: list[tuple[CardKind, ComplianceCard]] = []
    for label, expected_kind, card in labeled:
        if card is None:
            continue
        if card.kind is not expected_kind:
            issues.append(
                _error(f"{label}:kind", IssueCode.WRONG_KIND,
                       f"{label} expects a {expected_kind.value} card, got {card.kind.value}")
            )
            continue
        kept.append((expected_kind, card))

    seen: set[str] = set()
    for _, card in kept:
        if card.card_id in seen:
            issues.append(
                _error(f"{card.card_id}:card_id", IssueCode.DUPLICATE_ID,
                       f"card_id {card.card_id!r} used by more than one card")
            )
        seen.add(card.card_id)

    if has_errors(issues):
        return None, issues
    project_card = next(c for k, c in kept if k is CardKind.PROJECT)
    return (
        CardSet(
            project=project_card,
            data=tuple(c for k, c in kept if k is CardKind.DATA),
            models=tuple(c for k, c in kept if k is CardKind.MODEL),
        ),
        issues,
    )


def scaffold_card(kind: CardKind, registry: AttributeRegistry) -> str:
    """Emit a questionnaire-style template for the given kind.

    The template parses as a valid card with every attribute unanswered;
    each applicable attribute appears as a commented line citing its
    article references. Dispositive attributes come first.
    """
    definitions = registry.for_kind(kind)
    definitions.sort(key=lambda d: (not d.dispositive, d.id))
    lines = [
        f"kind: {kind.value}",
        f"card_id: my-{kind.value}",
        'subject_name: ""',
        f'schema_version: "{CARD_SCHEMA_VERSION}"',
        "values:",
    ]
    in_dispositive = False
    for d in definitions:
        if d.dispositive and not in_dispositive:
            lines.append("  # --- dispositive characteristics ---")
            in_dispositive = True
        if not d.dispositive and in_dispositive:
            lines.append("  # --- checkable attributes ---")
            in_dispositive = False
        refs = ", ".join(str(a) for a in d.articles)
        lines.append(f"  # {d.id}: {_domain_hint(d)}  [{refs}]")
    lines.append("")
    return "\n".join(lines)


def _domain_hint(definition) -> str:
    domain = definition.domain
    if domain.kind == "flag":
        return "true|false"
    if domain.kind == "level":
        return "0..4"
    if domain.kind == "choice":
        return "|".join(domain.vocabulary)
    return "[" + ", ".join(domain.vocabulary) + "]"
