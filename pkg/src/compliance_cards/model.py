"""Core card model: card kinds, quantized attribute values, attribute schema.

Everything in this module is immutable after construction and safe for
unrestricted concurrent use. Values are quantized — each attribute draws
from a small finite domain (boolean flag, 0..4 confidence level, or tokens
from a declared vocabulary) so that compliance checks stay decidable and
exhaustively testable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Iterable, Mapping, Union

LEVEL_MIN = 0
LEVEL_MAX = 4

#: Card documents with a different major schema version do not interoperate.
CARD_SCHEMA_VERSION = "1.0.0"

_ATTR_ID_RE = re.compile(r"^[a-z0-9_]+(\.[a-z0-9_]+)*$")
_TOKEN_RE = re.compile(r"^[a-z0-9_]+$")


class CardKind(str, Enum):
    """The three card types. Every card carries exactly one."""

    PROJECT = "project"
    DATA = "data"
    MODEL = "model"


class TriState(IntEnum):
    """Per-attribute check outcome, ordered for aggregation.

    Folds combine states by ``min``: UNSATISFIED < UNKNOWN < SATISFIED.
    """

    UNSATISFIED = 0
    UNKNOWN = 1
    SATISFIED = 2

    @property
    def token(self) -> str:
        return self.name.lower()


# ---------------------------------------------------------------------------
# Attribute values (tagged union)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Flag:
    value: bool

    def __post_init__(self) -> None:
        if not isinstance(self.value, bool):
            raise ValueError(f"flag value must be a bool, got {self.value!r}")


@dataclass(frozen=True)
class Level:
    """Unitless confidence grade. Out-of-range grades are unrepresentable."""

    value: int

    def __post_init__(self) -> None:
        if isinstance(self.value, bool) or not isinstance(self.value, int):
            raise ValueError(f"level value must be an int, got {self.value!r}")
        if not LEVEL_MIN <= self.value <= LEVEL_MAX:
            raise ValueError(
                f"level value must be in {LEVEL_MIN}..{LEVEL_MAX}, got {self.value}"
            )


@dataclass(frozen=True)
class Choice:
    token: str


@dataclass(frozen=True)
class TagSet:
    tokens: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", frozenset(self.tokens))


class _Unanswered:
    """Singleton for an attribute the author did not (yet) answer.

    Absence and an explicit null both normalize to this value in memory.
    """

    _instance = None

    def __new__(cls) -> "_Unanswered":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNANSWERED"


UNANSWERED = _Unanswered()

AttributeValue = Union[Flag, Level, Choice, TagSet, _Unanswered]


def value_to_raw(value: AttributeValue) -> object:
    """Encode a typed value as the scalar used in documents and reports."""
    if value is UNANSWERED:
        return None
    if isinstance(value, Flag):
        return value.value
    if isinstance(value, Level):
        return value.value
    if isinstance(value, Choice):
        return value.token
    if isinstance(value, TagSet):
        return sorted(value.tokens)
    raise TypeError(f"not an attribute value: {value!r}")


def value_from_raw(raw: object) -> AttributeValue:
    """Decode a document scalar into a typed value (domain-agnostic).

    The scalar shapes are disjoint across domains, so this is unambiguous:
    bool -> Flag, int -> Level, str -> Choice, list -> TagSet, null -> UNANSWERED.
    """
    if raw is None:
        return UNANSWERED
    if isinstance(raw, bool):
        return Flag(raw)
    if isinstance(raw, int):
        return Level(raw)
    if isinstance(raw, str):
        return Choice(raw)
    if isinstance(raw, (list, tuple)):
        return TagSet(frozenset(str(t) for t in raw))
    raise ValueError(f"cannot decode attribute value from {raw!r}")


# ---------------------------------------------------------------------------
# Value domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlagDomain:
    kind: str = field(default="flag", init=False)

    def conforms(self, value: AttributeValue) -> bool:
        return isinstance(value, Flag)

    def all_values(self) -> list[AttributeValue]:
        return [Flag(False), Flag(True)]


@dataclass(frozen=True)
class LevelDomain:
    kind: str = field(default="level", init=False)

    def conforms(self, value: AttributeValue) -> bool:
        return isinstance(value, Level)

    def all_values(self) -> list[AttributeValue]:
        return [Level(v) for v in range(LEVEL_MIN, LEVEL_MAX + 1)]


@dataclass(frozen=True)
class ChoiceDomain:
    vocabulary: tuple[str, ...]

    kind: str = field(default="choice", init=False)

    def __post_init__(self) -> None:
        _check_vocabulary(self.vocabulary)

    def conforms(self, value: AttributeValue) -> bool:
        return isinstance(value, Choice) and value.token in self.vocabulary

    def all_values(self) -> list[AttributeValue]:
        return [Choice(t) for t in self.vocabulary]


@dataclass(frozen=True)
class TagSetDomain:
    vocabulary: tuple[str, ...]

    kind: str = field(default="tagset", init=False)

    def __post_init__(self) -> None:
        _check_vocabulary(self.vocabulary)

    def conforms(self, value: AttributeValue) -> bool:
        return isinstance(value, TagSet) and value.tokens <= set(self.vocabulary)

    def all_values(self) -> list[AttributeValue]:
        # Representative sample, not the full powerset: empty, each singleton,
        # and the full vocabulary.
        out: list[AttributeValue] = [TagSet(frozenset())]
        out.extend(TagSet(frozenset({t})) for t in self.vocabulary)
        out.append(TagSet(frozenset(self.vocabulary)))
        return out


ValueDomain = Union[FlagDomain, LevelDomain, ChoiceDomain, TagSetDomain]


def _check_vocabulary(vocab: tuple[str, ...]) -> None:
    if not vocab:
        raise ValueError("vocabulary must not be empty")
    for token in vocab:
        if not _TOKEN_RE.match(token):
            raise ValueError(f"bad vocabulary token {token!r}")
    if len(set(vocab)) != len(vocab):
        raise ValueError("vocabulary tokens must be unique")


def decode_value(domain: ValueDomain, raw: object) -> AttributeValue:
    """Decode a document scalar against a domain; raise ValueError on violation."""
    if raw is None:
        return UNANSWERED
    if isinstance(domain, FlagDomain):
        if isinstance(raw, bool):
            return Flag(raw)
        raise ValueError(f"expected true/false, got {raw!r}")
    if isinstance(domain, LevelDomain):
        if isinstance(raw, int) and not isinstance(raw, bool):
            if LEVEL_MIN <= raw <= LEVEL_MAX:
                return Level(raw)
            raise ValueError(f"level {raw} outside {LEVEL_MIN}..{LEVEL_MAX}")
        raise ValueError(f"expected an integer level, got {raw!r}")
    if isinstance(domain, ChoiceDomain):
        if isinstance(raw, str):
            if raw in domain.vocabulary:
                return Choice(raw)
            raise ValueError(f"{raw!r} not in vocabulary {sorted(domain.vocabulary)}")
        raise ValueError(f"expected a vocabulary token, got {raw!r}")
    if isinstance(domain, TagSetDomain):
        if isinstance(raw, (list, tuple)):
            tokens = []
            for item in raw:
                if not isinstance(item, str):
                    raise ValueError(f"expected a token, got {item!r}")
                if item not in domain.vocabulary:
                    raise ValueError(
                        f"{item!r} not in vocabulary {sorted(domain.vocabulary)}"
                    )
                tokens.append(item)
            return TagSet(frozenset(tokens))
        raise ValueError(f"expected a list of tokens, got {raw!r}")
    raise TypeError(f"unknown domain {domain!r}")


# ---------------------------------------------------------------------------
# Article references
# ---------------------------------------------------------------------------

_ARTICLE_RE = re.compile(r"^(?:Art\.?\s*)?(\d+)((?:\([A-Za-z0-9]+\))*)$")
_ANNEX_RE = re.compile(r"^Annex\s+([IVXLC]+)((?:\([A-Za-z0-9]+\))*)$")
_PAREN_GROUP_RE = re.compile(r"\(([A-Za-z0-9]+)\)")


@dataclass(frozen=True)
class ArticleRef:
    """Reference into the regulation: an article and/or annex, with optional
    paragraph token (e.g. "2", "1(f)")."""

    article: int | None = None
    paragraph: str | None = None
    annex: str | None = None

    def __post_init__(self) -> None:
        if self.article is None and self.annex is None:
            raise ValueError("article reference needs an article number or an annex")
        if self.article is not None and self.article <= 0:
            raise ValueError("article number must be positive")

    def __str__(self) -> str:
        suffix = _render_paragraph(self.paragraph)
        if self.annex is not None:
            return f"Annex {self.annex}{suffix}"
        return f"Art. {self.article}{suffix}"

    @classmethod
    def parse(cls, text: str) -> "ArticleRef":
        """Parse the canonical text form: "Art. 14(3)(a)", "53(1)", "Annex XI(2)"."""
        text = text.strip()
        m = _ANNEX_RE.match(text)
        if m:
            return cls(annex=m.group(1), paragraph=_parse_paragraph(m.group(2)))
        m = _ARTICLE_RE.match(text)
        if m:
            return cls(article=int(m.group(1)), paragraph=_parse_paragraph(m.group(2)))
        raise ValueError(f"cannot parse article reference {text!r}")


def _parse_paragraph(groups: str) -> str | None:
    parts = _PAREN_GROUP_RE.findall(groups)
    if not parts:
        return None
    return parts[0] + "".join(f"({p})" for p in parts[1:])


def _render_paragraph(paragraph: str | None) -> str:
    if paragraph is None:
        return ""
    head, _, tail = paragraph.partition("(")
    if tail:
        return f"({head})({tail}"
    return f"({head})"


def art(text: str) -> ArticleRef:
    """Shorthand used by the bundled registry and rule table."""
    return ArticleRef.parse(text)


# ---------------------------------------------------------------------------
# Satisfaction rules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MustBeTrue:
    pass


@dataclass(frozen=True)
class LevelAtLeast:
    threshold: int

    def __post_init__(self) -> None:
        if not LEVEL_MIN <= self.threshold <= LEVEL_MAX:
            raise ValueError(f"threshold must be in {LEVEL_MIN}..{LEVEL_MAX}")


@dataclass(frozen=True)
class ChoiceIn:
    tokens: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", frozenset(self.tokens))
        if not self.tokens:
            raise ValueError("ChoiceIn needs at least one token")


@dataclass(frozen=True)
class TagSetNonEmpty:
    pass


@dataclass(frozen=True)
class AlwaysInformational:
    """Attribute is recorded but never directly checked; always satisfied."""


SatisfactionRule = Union[
    MustBeTrue, LevelAtLeast, ChoiceIn, TagSetNonEmpty, AlwaysInformational
]


def rule_compatible(rule: SatisfactionRule, domain: ValueDomain) -> bool:
    if isinstance(rule, AlwaysInformational):
        return True
    if isinstance(rule, MustBeTrue):
        return isinstance(domain, FlagDomain)
    if isinstance(rule, LevelAtLeast):
        return isinstance(domain, LevelDomain)
    if isinstance(rule, ChoiceIn):
        return isinstance(domain, ChoiceDomain) and rule.tokens <= set(
            domain.vocabulary
        )
    if isinstance(rule, TagSetNonEmpty):
        return isinstance(domain, TagSetDomain)
    return False


# ---------------------------------------------------------------------------
# Attribute definitions and the registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AttributeDefinition:
    id: str
    card_kinds: frozenset[CardKind]
    domain: ValueDomain
    satisfaction: SatisfactionRule
    dispositive: bool
    articles: tuple[ArticleRef, ...]
    category: str

    def __post_init__(self) -> None:
        if not _ATTR_ID_RE.match(self.id):
            raise ValueError(f"bad attribute id {self.id!r}")
        object.__setattr__(self, "card_kinds", frozenset(self.card_kinds))
        object.__setattr__(self, "articles", tuple(self.articles))
        if not self.card_kinds:
            raise ValueError(f"{self.id}: card_kinds must be nonempty")
        if self.dispositive and CardKind.PROJECT not in self.card_kinds:
            raise ValueError(f"{self.id}: dispositive attributes must apply to project cards")
        if not rule_compatible(self.satisfaction, self.domain):
            raise ValueError(f"{self.id}: satisfaction rule incompatible with domain")

    def applies_to(self, kind: CardKind) -> bool:
        return kind in self.card_kinds


def satisfaction(definition: AttributeDefinition, value: AttributeValue) -> TriState:
    """Evaluate an attribute's satisfaction rule against a value.

    Total over every domain-conformant value plus UNANSWERED. A type mismatch
    between value and domain is a contract violation (validation happens
    upstream) and raises TypeError.
    """
    rule = definition.satisfaction
    if isinstance(rule, AlwaysInformational):
        return TriState.SATISFIED
    if value is UNANSWERED:
        return TriState.UNKNOWN
    if not definition.domain.conforms(value):
        raise TypeError(
            f"{definition.id}: value {value!r} does not conform to the "
            f"{definition.domain.kind} domain"
        )
    if isinstance(rule, MustBeTrue):
        return TriState.SATISFIED if value.value else TriState.UNSATISFIED
    if isinstance(rule, LevelAtLeast):
        return TriState.SATISFIED if value.value >= rule.threshold else TriState.UNSATISFIED
    if isinstance(rule, ChoiceIn):
        return TriState.SATISFIED if value.token in rule.tokens else TriState.UNSATISFIED
    if isinstance(rule, TagSetNonEmpty):
        return TriState.SATISFIED if value.tokens else TriState.UNSATISFIED
    raise TypeError(f"unknown satisfaction rule {rule!r}")


class AttributeRegistry:
    """Read-only lookup table of attribute definitions.

    Iteration order is the curated registry order (dispositive project
    attributes first), which downstream surfaces reuse for deterministic
    output.
    """

    def __init__(self, version: str, definitions: Iterable[AttributeDefinition]):
        self.version = version
        defs: dict[str, AttributeDefinition] = {}
        for d in definitions:
            if d.id in defs:
                raise ValueError(f"duplicate attribute id {d.id!r}")
            defs[d.id] = d
        self._defs = defs

    def lookup(self, attr_id: str) -> AttributeDefinition | None:
        return self._defs.get(attr_id)

    def require(self, attr_id: str) -> AttributeDefinition:
        d = self._defs.get(attr_id)
        if d is None:
            raise KeyError(f"unknown attribute {attr_id!r}")
        return d

    def __contains__(self, attr_id: str) -> bool:
        return attr_id in self._defs

    def __iter__(self):
        return iter(self._defs.values())

    def __len__(self) -> int:
        return len(self._defs)

    def ids(self) -> list[str]:
        return list(self._defs)

    def for_kind(self, kind: CardKind) -> list[AttributeDefinition]:
        return [d for d in self._defs.values() if d.applies_to(kind)]


# ---------------------------------------------------------------------------
# Cards and card sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComplianceCard:
    """One transparency artifact: kind + subject identity + attribute values.

    ``values`` holds only answered values; reading an absent attribute yields
    UNANSWERED. ``unrecognized`` preserves attributes this registry does not
    know (or that do not apply to this kind) so they round-trip.
    """

    kind: CardKind
    card_id: str
    subject_name: str
    schema_version: str
    values: Mapping[str, AttributeValue]
    unrecognized: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.card_id:
            raise ValueError("card_id must be nonempty")
        cleaned = {
            k: v for k, v in self.values.items() if v is not UNANSWERED
        }
        object.__setattr__(self, "values", _FrozenDict(cleaned))
        object.__setattr__(self, "unrecognized", _FrozenDict(dict(self.unrecognized)))

    def value(self, attr_id: str) -> AttributeValue:
        return self.values.get(attr_id, UNANSWERED)

    def with_value(self, attr_id: str, value: AttributeValue) -> "ComplianceCard":
        new_values = dict(self.values)
        if value is UNANSWERED:
            new_values.pop(attr_id, None)
        else:
            new_values[attr_id] = value
        return ComplianceCard(
            kind=self.kind,
            card_id=self.card_id,
            subject_name=self.subject_name,
            schema_version=self.schema_version,
            values=new_values,
            unrecognized=self.unrecognized,
        )


class _FrozenDict(dict):
    """Hash-free immutable mapping; ComplianceCard equality stays plain dict
    equality."""

    def _readonly(self, *args, **kwargs):
        raise TypeError("card values are immutable")

    __setitem__ = _readonly
    __delitem__ = _readonly
    clear = _readonly
    pop = _readonly
    popitem = _readonly
    setdefault = _readonly
    update = _readonly


@dataclass(frozen=True)
class CardSet:
    """Exactly one project card plus zero-or-more data and model cards."""

    project: ComplianceCard
    data: tuple[ComplianceCard, ...] = ()
    models: tuple[ComplianceCard, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "data", tuple(self.data))
        object.__setattr__(self, "models", tuple(self.models))
        if self.project.kind is not CardKind.PROJECT:
            raise ValueError("project slot requires a project card")
        for card in self.data:
            if card.kind is not CardKind.DATA:
                raise ValueError(f"data slot holds a {card.kind.value} card ({card.card_id})")
        for card in self.models:
            if card.kind is not CardKind.MODEL:
                raise ValueError(f"model slot holds a {card.kind.value} card ({card.card_id})")
        seen: set[str] = set()
        for card in self.all_cards():
            if card.card_id in seen:
                raise ValueError(f"duplicate card_id {card.card_id!r}")
            seen.add(card.card_id)

    def all_cards(self) -> tuple[ComplianceCard, ...]:
        return (self.project, *self.data, *self.models)

    def card_by_id(self, card_id: str) -> ComplianceCard | None:
        for card in self.all_cards():
            if card.card_id == card_id:
                return card
        return None


def is_valid_attribute_id(attr_id: str) -> bool:
    return bool(_ATTR_ID_RE.match(attr_id))
