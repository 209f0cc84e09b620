"""Load, validate, persist, extend, filter, and summarize knowledge bases.

Wire format: UTF-8 JSON Lines. The first line is a header object
`{"schema_version": 1, "provenance": "..."}`; every following line is one
attack record in the canonical field order. `save_kb` is deterministic and
`load_kb(save_kb(kb)) == kb`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources

from .errors import (
    DuplicateSlugError,
    KbValidationError,
    ParseError,
    RecordValidationError,
    SchemaVersionError,
)
from .model import (
    KB_SCHEMA_VERSION,
    LAYER_ORDER,
    MOTIVATION_ORDER,
    ORIGIN_ORDER,
    AttackRecord,
    DltLayer,
    KbStats,
    KnowledgeBase,
    MotivationCategory,
    Violation,
    parse_layer,
    parse_motivation,
    validate_record,
)


@dataclass(frozen=True)
class FilterQuery:
    """Faceted KB query: AND across supplied facets, OR within a facet.

    Omitted facets (None) do not constrain. Supplied sets must be nonempty;
    asset labels and the text needle match case-insensitively.
    """

    categories: frozenset[MotivationCategory] | None = None
    layers: frozenset[DltLayer] | None = None
    assets: frozenset[str] | None = None
    text: str | None = None

    def __post_init__(self):
        for name in ("categories", "layers", "assets"):
            value = getattr(self, name)
            if value is not None and not value:
                raise ValueError(f"FilterQuery.{name} must be nonempty when supplied")


@dataclass(frozen=True)
class ValidationReport:
    """All violations found across a KB, keyed by record slug."""

    violations: tuple[tuple[str, Violation], ...]

    @property
    def is_valid(self) -> bool:
        return not self.violations


def validate_kb(records: dict[str, AttackRecord]) -> ValidationReport:
    """Run record-level validation over every record against the full slug set."""
    slugs = set(records)
    found: list[tuple[str, Violation]] = []
    for slug in sorted(records):
        for violation in validate_record(records[slug], slugs):
            found.append((slug, violation))
    return ValidationReport(violations=tuple(found))


def load_kb(source: bytes | str) -> KnowledgeBase:
    """Parse and fully validate a KB document.

    Raises ParseError (with line number), DuplicateSlugError, or
    KbValidationError (dangling relations, schema rule breaks). An empty
    document yields an empty KB.
    """
    text = source.decode("utf-8") if isinstance(source, bytes) else source
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        return KnowledgeBase(schema_version=KB_SCHEMA_VERSION, records={}, provenance="")

    header = _parse_line(lines[0], 1)
    if set(header) != {"schema_version", "provenance"}:
        raise ParseError(
            "header must contain exactly schema_version and provenance", line=1
        )
    if header["schema_version"] != KB_SCHEMA_VERSION:
        raise SchemaVersionError(header["schema_version"], KB_SCHEMA_VERSION)

    records: dict[str, AttackRecord] = {}
    for offset, line in enumerate(lines[1:], start=2):
        data = _parse_line(line, offset)
        try:
            record = AttackRecord.from_dict(data)
        except ParseError as exc:
            raise ParseError(str(exc), line=offset) from None
        if record.id in records:
            raise DuplicateSlugError(record.id, line=offset)
        records[record.id] = record

    report = validate_kb(records)
    if not report.is_valid:
        raise KbValidationError(report)
    return KnowledgeBase(
        schema_version=header["schema_version"],
        records=records,
        provenance=header["provenance"],
    )


def _parse_line(line: str, number: int) -> dict:
    try:
        data = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=number) from None
    if not isinstance(data, dict):
        raise ParseError("expected a JSON object", line=number)
    return data


def save_kb(kb: KnowledgeBase) -> bytes:
    """Serialize to the canonical byte form: header line, then records
    sorted by slug with fields in fixed order. Deterministic."""
    header = {"schema_version": kb.schema_version, "provenance": kb.provenance}
    lines = [json.dumps(header, ensure_ascii=False)]
    for slug in sorted(kb.records):
        lines.append(json.dumps(kb.records[slug].to_dict(), ensure_ascii=False))
    return ("\n".join(lines) + "\n").encode("utf-8")


def add_record(kb: KnowledgeBase, record: AttackRecord) -> KnowledgeBase:
    """Return a new KB containing `record`; the input KB is untouched."""
    if record.id in kb:
        raise DuplicateSlugError(record.id)
    violations = validate_record(record, set(kb.slugs()) | {record.id})
    if violations:
        raise RecordValidationError(record.id, violations)
    merged = dict(kb.records)
    merged[record.id] = record
    return KnowledgeBase(
        schema_version=kb.schema_version, records=merged, provenance=kb.provenance
    )


def filter_records(kb: KnowledgeBase, query: FilterQuery) -> list[AttackRecord]:
    """Facet filter over the KB, sorted by slug.

    Implemented via per-facet index unions intersected together; the text
    facet scans the survivors. The brute-force per-record predicate used in
    tests is the independent reference for this logic.
    """
    survivors = set(kb.records)
    if query.categories is not None:
        index = _motivation_index(kb)
        survivors &= set().union(*(index[c] for c in query.categories))
    if query.layers is not None:
        index = _layer_index(kb)
        survivors &= set().union(*(index[l] for l in query.layers))
    if query.assets is not None:
        wanted = {a.strip().casefold() for a in query.assets}
        survivors &= {
            slug
            for slug in survivors
            if wanted & {a.strip().casefold() for a in kb.records[slug].harmed_assets}
        }
    if query.text is not None:
        needle = query.text.casefold()
        survivors = {
            slug for slug in survivors if _text_matches(kb.records[slug], needle)
        }
    return [kb.records[slug] for slug in sorted(survivors)]


def _text_matches(record: AttackRecord, needle: str) -> bool:
    if needle in record.name.casefold() or needle in record.description.casefold():
        return True
    return any(needle in synonym.casefold() for synonym in record.synonyms)


def _layer_index(kb: KnowledgeBase) -> dict[DltLayer, set[str]]:
    index: dict[DltLayer, set[str]] = {layer: set() for layer in LAYER_ORDER}
    for record in kb:
        for layer in record.impacted_layers:
            index[layer].add(record.id)
    return index


def _motivation_index(kb: KnowledgeBase) -> dict[MotivationCategory, set[str]]:
    index: dict[MotivationCategory, set[str]] = {m: set() for m in MOTIVATION_ORDER}
    for record in kb:
        for category in record.motivation_categories:
            index[category].add(record.id)
    return index


def compute_stats(kb: KnowledgeBase) -> KbStats:
    """Counts per layer / motivation / origin plus origin percentage shares.

    A record with k layers counts once per layer (same for motivations).
    Shares are 100*count/total rounded half-up to 2 decimals; omitted for an
    empty KB.
    """
    total = len(kb)
    by_layer = {layer: 0 for layer in LAYER_ORDER}
    by_motivation = {m: 0 for m in MOTIVATION_ORDER}
    origin_counts = {o: 0 for o in ORIGIN_ORDER}
    for record in kb:
        for layer in record.impacted_layers:
            by_layer[layer] += 1
        for category in record.motivation_categories:
            by_motivation[category] += 1
        origin_counts[record.origin] += 1

    origin_shares = None
    if total:
        origin_shares = {
            origin: _round_share(count, total)
            for origin, count in origin_counts.items()
        }
    return KbStats(
        total=total,
        by_layer=by_layer,
        by_motivation=by_motivation,
        origin_counts=origin_counts,
        origin_shares=origin_shares,
    )


def _round_share(count: int, total: int) -> float:
    share = Decimal(count * 100) / Decimal(total)
    return float(share.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def seed_kb_bytes() -> bytes:
    """Raw bytes of the seed knowledge base shipped with the package."""
    return resources.files("sramda.data").joinpath("seed_kb.jsonl").read_bytes()


def load_seed_kb() -> KnowledgeBase:
    """The seed KB: the attacks and fields attested in the source literature."""
    return load_kb(seed_kb_bytes())


def parse_query(
    layers: list[str] | None = None,
    motivations: list[str] | None = None,
    assets: list[str] | None = None,
    text: str | None = None,
) -> FilterQuery:
    """Build a FilterQuery from raw string facets (CLI flags, URL params)."""
    return FilterQuery(
        categories=(
            frozenset(parse_motivation(m) for m in motivations) if motivations else None
        ),
        layers=frozenset(parse_layer(l) for l in layers) if layers else None,
        assets=frozenset(assets) if assets else None,
        text=text if text else None,
    )
