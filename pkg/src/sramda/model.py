"""Domain model for the DLT attack knowledge base.

Value types only: everything here is immutable after construction and safe
to share between threads. Parsing from / serializing to the JSON-Lines wire
shape lives next to each type; cross-record checks (slug uniqueness,
relation resolution) are in `validate_record` and the store.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping

from .errors import ParseError, SramdaError

KB_SCHEMA_VERSION = 1


class DltLayer(str, Enum):
    """The six abstraction layers of a distributed ledger stack.

    Closed set; order is the canonical display order.
    """

    NETWORK = "network"
    CONSENSUS = "consensus"
    DATA_MODEL = "data-model"
    EXECUTION = "execution"
    APPLICATION = "application"
    EXTERNAL = "external"


class MotivationCategory(str, Enum):
    """Why an attacker attacks: the four-way motivation classification."""

    MONETARY = "monetary"
    DAMAGE = "damage"
    KNOWLEDGE = "knowledge"
    TRUST = "trust"


class Origin(str, Enum):
    """Whether an attack is a common cybersecurity threat or tailored to DLTs."""

    COMMON_CYBER = "common"
    DLT_SPECIFIC = "dlt-specific"


class RelationKind(str, Enum):
    """The two relation kinds between attack records."""

    RELATES_TO = "relates-to"
    CONTRIBUTES_TO = "contributes-to"


#: Canonical layer order for deterministic maps and tables.
LAYER_ORDER: tuple[DltLayer, ...] = tuple(DltLayer)
MOTIVATION_ORDER: tuple[MotivationCategory, ...] = tuple(MotivationCategory)
ORIGIN_ORDER: tuple[Origin, ...] = tuple(Origin)

_SLUG_STRIP = re.compile(r"[^a-z0-9]+")


def slugify(name: str) -> str:
    """Derive the canonical slug for a display name.

    Lowercase ASCII letters, digits, and single hyphens; idempotent.
    Raises SramdaError when nothing is left after stripping.
    """
    collapsed = _SLUG_STRIP.sub("-", name.strip().lower()).strip("-")
    if not collapsed:
        raise SramdaError(f"cannot derive a slug from {name!r}")
    return collapsed


@dataclass(frozen=True)
class Violation:
    """One broken validation rule on one record field."""

    field: str
    rule: str
    message: str


@dataclass(frozen=True)
class Countermeasure:
    """A risk treatment option: free text plus literature references."""

    text: str
    references: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"text": self.text, "references": list(self.references)}

    @classmethod
    def from_dict(cls, data: dict) -> "Countermeasure":
        _require_keys(data, {"text", "references"}, "countermeasure")
        return cls(text=data["text"], references=tuple(data["references"]))


#: Explicit marker attached to a confirmed risk for which the analyst found
#: no treatment; satisfies the coverage check at finalization.
NO_KNOWN_COUNTERMEASURE = Countermeasure(text="no known countermeasure")

#: Wire-format field order for one record line. Unknown fields are rejected.
RECORD_FIELDS = (
    "id",
    "name",
    "synonyms",
    "description",
    "harmed_assets",
    "impacted_layers",
    "motivation_categories",
    "relates_to",
    "contributes_to",
    "origin",
    "countermeasures",
    "references",
)


@dataclass(frozen=True)
class AttackRecord:
    """One knowledge-base entry: identity, taxonomy facets, relations,
    countermeasures, provenance."""

    id: str
    name: str
    synonyms: tuple[str, ...]
    description: str
    harmed_assets: tuple[str, ...]
    impacted_layers: frozenset[DltLayer]
    motivation_categories: frozenset[MotivationCategory]
    relates_to: frozenset[str]
    contributes_to: frozenset[str]
    origin: Origin
    countermeasures: tuple[Countermeasure, ...] = ()
    references: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        """Serialize in canonical field order with sorted set fields."""
        return {
            "id": self.id,
            "name": self.name,
            "synonyms": list(self.synonyms),
            "description": self.description,
            "harmed_assets": list(self.harmed_assets),
            "impacted_layers": [l.value for l in LAYER_ORDER if l in self.impacted_layers],
            "motivation_categories": [
                m.value for m in MOTIVATION_ORDER if m in self.motivation_categories
            ],
            "relates_to": sorted(self.relates_to),
            "contributes_to": sorted(self.contributes_to),
            "origin": self.origin.value,
            "countermeasures": [c.to_dict() for c in self.countermeasures],
            "references": list(self.references),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AttackRecord":
        _require_keys(data, set(RECORD_FIELDS), "attack record")
        return cls(
            id=data["id"],
            name=data["name"],
            synonyms=tuple(data["synonyms"]),
            description=data["description"],
            harmed_assets=tuple(data["harmed_assets"]),
            impacted_layers=frozenset(parse_layer(v) for v in data["impacted_layers"]),
            motivation_categories=frozenset(
                parse_motivation(v) for v in data["motivation_categories"]
            ),
            relates_to=frozenset(data["relates_to"]),
            contributes_to=frozenset(data["contributes_to"]),
            origin=parse_origin(data["origin"]),
            countermeasures=tuple(
                Countermeasure.from_dict(c) for c in data["countermeasures"]
            ),
            references=tuple(data["references"]),
        )


def parse_layer(value: str) -> DltLayer:
    try:
        return DltLayer(value)
    except ValueError:
        raise ParseError(
            f"unknown layer {value!r} (expected one of "
            f"{', '.join(l.value for l in LAYER_ORDER)})"
        ) from None


def parse_motivation(value: str) -> MotivationCategory:
    try:
        return MotivationCategory(value)
    except ValueError:
        raise ParseError(
            f"unknown motivation category {value!r} (expected one of "
            f"{', '.join(m.value for m in MOTIVATION_ORDER)})"
        ) from None


def parse_origin(value: str) -> Origin:
    try:
        return Origin(value)
    except ValueError:
        raise ParseError(
            f"unknown origin {value!r} (expected 'common' or 'dlt-specific')"
        ) from None


def _require_keys(data: dict, expected: set, what: str) -> None:
    if not isinstance(data, dict):
        raise ParseError(f"{what} must be a JSON object, got {type(data).__name__}")
    unknown = set(data) - expected
    if unknown:
        raise ParseError(f"{what}: unknown field(s) {sorted(unknown)}")
    missing = expected - set(data)
    if missing:
        raise ParseError(f"{what}: missing field(s) {sorted(missing)}")


def _untrimmed(value: str) -> bool:
    return value != value.strip()


def validate_record(record: AttackRecord, kb_slugs: Iterable[str]) -> list[Violation]:
    """Check one record against the schema rules.

    `kb_slugs` is the slug universe relation targets must resolve in
    (normally the KB's slugs including this record). Pure: the violation
    list is order-stable for equal inputs.
    """
    slugs = set(kb_slugs)
    out: list[Violation] = []

    def bad(field_name: str, rule: str, message: str) -> None:
        out.append(Violation(field_name, rule, message))

    if not record.name.strip():
        bad("name", "nonempty", "name must be nonempty")
    else:
        try:
            canonical = slugify(record.name)
        except SramdaError:
            canonical = ""
        if record.id != canonical:
            bad("id", "canonical-slug", f"id {record.id!r} is not slugify(name) = {canonical!r}")

    for field_name, value in (("id", record.id), ("name", record.name), ("description", record.description)):
        if _untrimmed(value):
            bad(field_name, "trimmed", f"{field_name} has leading/trailing whitespace")
    for field_name, values in (
        ("synonyms", record.synonyms),
        ("harmed_assets", record.harmed_assets),
        ("references", record.references),
    ):
        for v in values:
            if _untrimmed(v):
                bad(field_name, "trimmed", f"entry {v!r} has leading/trailing whitespace")

    if not record.harmed_assets:
        bad("harmed_assets", "nonempty", "at least one harmed asset is required")
    if any(not a.strip() for a in record.harmed_assets):
        bad("harmed_assets", "nonempty", "harmed asset labels must be nonempty")
    if not record.impacted_layers:
        bad("impacted_layers", "nonempty", "at least one impacted layer is required")
    if not record.motivation_categories:
        bad("motivation_categories", "nonempty", "at least one motivation category is required")
    if not record.references:
        bad("references", "nonempty", "at least one reference is required")

    for i, cm in enumerate(record.countermeasures):
        if not cm.text.strip():
            bad("countermeasures", "nonempty-text", f"countermeasure #{i} has empty text")

    if record.id in record.relates_to or record.id in record.contributes_to:
        bad("relations", "no-self-relation", f"record {record.id!r} relates to itself")
    for kind, targets in (("relates_to", record.relates_to), ("contributes_to", record.contributes_to)):
        for target in sorted(targets):
            if target != record.id and target not in slugs:
                bad(kind, "dangling-relation", f"target {target!r} does not resolve in the KB")

    return out


@dataclass(frozen=True)
class KnowledgeBase:
    """A validated, versioned collection of attack records.

    Immutable by value: edits (add_record) produce a new instance so that
    assessment sessions can pin the exact KB they ran against.
    """

    schema_version: int = KB_SCHEMA_VERSION
    records: Mapping[str, AttackRecord] = field(default_factory=dict)
    provenance: str = ""

    def __post_init__(self):
        # Canonical ordering by slug; also defends against unsorted input maps.
        ordered = {slug: self.records[slug] for slug in sorted(self.records)}
        object.__setattr__(self, "records", ordered)

    def __len__(self) -> int:
        return len(self.records)

    def __contains__(self, slug: str) -> bool:
        return slug in self.records

    def __iter__(self):
        return iter(self.records.values())

    def slugs(self) -> list[str]:
        return list(self.records)

    def get(self, slug: str) -> AttackRecord | None:
        return self.records.get(slug)

    @cached_property
    def _alias_index(self) -> dict[str, str]:
        index: dict[str, str] = {}
        for record in self:
            index.setdefault(record.name.casefold(), record.id)
            for synonym in record.synonyms:
                index.setdefault(synonym.casefold(), record.id)
        return index

    def resolve(self, text: str) -> str | None:
        """Resolve a slug, display name, or synonym to the canonical slug."""
        if text in self.records:
            return text
        return self._alias_index.get(text.strip().casefold())

    def version_note(self) -> str:
        note = self.provenance or "unversioned KB"
        return f"{note} ({len(self)} records, schema v{self.schema_version})"


@dataclass(frozen=True)
class KbStats:
    """Counts and rounded percentage shares over a knowledge base."""

    total: int
    by_layer: dict[DltLayer, int]
    by_motivation: dict[MotivationCategory, int]
    origin_counts: dict[Origin, int]
    origin_shares: dict[Origin, float] | None

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "by_layer": {l.value: self.by_layer[l] for l in LAYER_ORDER},
            "by_motivation": {m.value: self.by_motivation[m] for m in MOTIVATION_ORDER},
            "origin_counts": {o.value: self.origin_counts[o] for o in ORIGIN_ORDER},
            "origin_shares": (
                None
                if self.origin_shares is None
                else {o.value: self.origin_shares[o] for o in ORIGIN_ORDER}
            ),
        }
