"""Shared fixtures: the seed KB, the case-study scripts, and small KB builders."""

from __future__ import annotations

import json
from importlib import resources

import pytest

from sramda.model import (
    AttackRecord,
    Countermeasure,
    DltLayer,
    KnowledgeBase,
    MotivationCategory,
    Origin,
    slugify,
)
from sramda.store import load_seed_kb


def make_record(
    name: str,
    *,
    layers=(DltLayer.NETWORK,),
    categories=(MotivationCategory.MONETARY,),
    assets=("Network",),
    origin=Origin.DLT_SPECIFIC,
    synonyms=(),
    description="test record",
    relates=(),
    contributes=(),
    countermeasures=(),
    references=("test-ref",),
) -> AttackRecord:
    return AttackRecord(
        id=slugify(name),
        name=name,
        synonyms=tuple(synonyms),
        description=description,
        harmed_assets=tuple(assets),
        impacted_layers=frozenset(layers),
        motivation_categories=frozenset(categories),
        relates_to=frozenset(relates),
        contributes_to=frozenset(contributes),
        origin=origin,
        countermeasures=tuple(
            Countermeasure(text=c) if isinstance(c, str) else c for c in countermeasures
        ),
        references=tuple(references),
    )


def make_kb(*records: AttackRecord, provenance: str = "test KB") -> KnowledgeBase:
    return KnowledgeBase(
        schema_version=1,
        records={r.id: r for r in records},
        provenance=provenance,
    )


@pytest.fixture(scope="session")
def seed_kb():
    return load_seed_kb()


def load_script(name: str) -> dict:
    text = resources.files("sramda.data").joinpath(f"scripts/{name}.session.json").read_text("utf-8")
    return json.loads(text)


@pytest.fixture(scope="session")
def secureseco_script():
    return load_script("secureseco")


@pytest.fixture(scope="session")
def mobifi_script():
    return load_script("mobifi")


@pytest.fixture(scope="session")
def aratoo_script():
    return load_script("aratoo")
