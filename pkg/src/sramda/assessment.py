"""The guided risk-assessment session: an enforced step sequence from
project intake to the final recommendation.

Legal step order:

    spec -> motivations -> domains -> identify -> analyze -> rank
         -> countermeasures -> done

Every operation is functional: it returns a new session (and, for risk
registration, a new KB) and never mutates its inputs, so a failed call
leaves the caller's session bit-identical. Each successful operation
appends one audit entry carrying the full action payload; replaying the
audit log against the same KB reproduces the session exactly.
"""

from __future__ import annotations

import hashlib
import json
import uuid
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from enum import Enum
from typing import Iterable

from .errors import (
    IncompleteSpecError,
    InvalidInputError,
    MissingCountermeasureError,
    NotConfirmedError,
    ParseError,
    RankingError,
    SchemaVersionError,
    SessionInvariantError,
    StepOrderError,
    UnknownIdError,
)
from .model import (
    LAYER_ORDER,
    AttackRecord,
    Countermeasure,
    DltLayer,
    KnowledgeBase,
    MotivationCategory,
    parse_layer,
    parse_motivation,
    slugify,
)
from .store import FilterQuery, add_record, filter_records

SESSION_SCHEMA_VERSION = 1

#: Epoch used by deterministic replays (scripted case studies).
REPLAY_EPOCH = datetime(2024, 1, 1, tzinfo=timezone.utc)


class Step(str, Enum):
    """Session position in the assessment workflow."""

    SPEC = "spec"
    MOTIVATIONS = "motivations"
    DOMAINS = "domains"
    IDENTIFY = "identify"
    ANALYZE = "analyze"
    RANK = "rank"
    COUNTERMEASURES = "countermeasures"
    RECOMMEND = "recommend"
    DONE = "done"


class RiskStatus(str, Enum):
    CANDIDATE = "candidate"
    CONFIRMED = "confirmed"
    REJECTED = "rejected"


#: Intake questionnaire presented at session start. Answers are stored as
#: (question id, answer) pairs on the project spec; unanswered questions are
#: simply absent.
INTAKE_QUESTIONS: tuple[tuple[str, str], ...] = (
    ("context-1", "Can you introduce your company briefly?"),
    ("context-2", "What is the main goal of the project? Why is it being developed?"),
    ("context-3", "What technologies do you use (consensus mechanisms, smart contracts, ...)?"),
    ("context-4", "At what stage of design or development is the project?"),
    ("context-5", "Has your company participated in a cybersecurity exercise before?"),
    ("context-6", "What would you like to see achieved at the end of this assessment?"),
    ("context-7", "How could a security risk assessment contribute to the organization?"),
    ("scope-1", "What is the scope of this security risk assessment for you?"),
    ("org-1", "Who is accountable for the top risks?"),
    ("org-2", "How is the project prepared to respond to extreme events?"),
    ("org-3", "Are there contradicting security needs among stakeholders?"),
    ("org-4", "Can the project be deployed with some risks? When is it secure enough?"),
    ("risk-1", "What assets need protection? What target do you wish to have analyzed?"),
    ("risk-2", "What worries you the most concerning your assets?"),
    ("risk-3", "Are you already considering identified risks during development?"),
    ("risk-4", "Are there risks you request to see in the assessment?"),
    ("risk-5", "Are there organizational blind spots that need attention?"),
    ("risk-6", "Are you already taking countermeasures? Which ones?"),
    ("risk-7", "How are you planning on keeping the project secure?"),
    ("closing-1", "Is any crucial information missing? Anything else to add?"),
)


@dataclass(frozen=True)
class ProjectSpec:
    """Project context gathered at intake."""

    organization: str
    goal: str
    technologies: tuple[str, ...]
    stage: str
    scope_statement: str
    protected_assets: tuple[str, ...]
    intake_answers: tuple[tuple[str, str], ...] = ()

    def to_dict(self) -> dict:
        return {
            "organization": self.organization,
            "goal": self.goal,
            "technologies": list(self.technologies),
            "stage": self.stage,
            "scope_statement": self.scope_statement,
            "protected_assets": list(self.protected_assets),
            "intake_answers": [list(pair) for pair in self.intake_answers],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProjectSpec":
        _require_keys(data, {
            "organization", "goal", "technologies", "stage",
            "scope_statement", "protected_assets", "intake_answers",
        }, "project spec")
        answers = []
        for pair in data["intake_answers"]:
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ParseError("intake_answers entries must be [question_id, answer] pairs")
            answers.append((str(pair[0]), str(pair[1])))
        return cls(
            organization=data["organization"],
            goal=data["goal"],
            technologies=tuple(data["technologies"]),
            stage=data["stage"],
            scope_statement=data["scope_statement"],
            protected_assets=tuple(data["protected_assets"]),
            intake_answers=tuple(answers),
        )


@dataclass(frozen=True)
class Motivation:
    """One reason an attacker would target the system."""

    id: str
    description: str
    category: MotivationCategory

    def to_dict(self) -> dict:
        return {"id": self.id, "description": self.description, "category": self.category.value}

    @classmethod
    def from_dict(cls, data: dict) -> "Motivation":
        _require_keys(data, {"id", "description", "category"}, "motivation")
        return cls(
            id=data["id"],
            description=data["description"],
            category=parse_motivation(data["category"]),
        )


@dataclass(frozen=True)
class DomainAnnotation:
    """Where a motivation would be acted on: layers and assets of interest."""

    motivation_id: str
    layers: frozenset[DltLayer]
    assets: frozenset[str] = frozenset()

    def to_dict(self) -> dict:
        return {
            "motivation_id": self.motivation_id,
            "layers": [l.value for l in LAYER_ORDER if l in self.layers],
            "assets": sorted(self.assets),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DomainAnnotation":
        _require_keys(data, {"motivation_id", "layers", "assets"}, "domain annotation")
        return cls(
            motivation_id=data["motivation_id"],
            layers=frozenset(parse_layer(l) for l in data["layers"]),
            assets=frozenset(data["assets"]),
        )


@dataclass(frozen=True)
class CandidateRisk:
    """One attack under assessment, with per-session state.

    Carries a snapshot of the record's name, harmed assets, and layers so a
    session stays self-contained (reports and the final recommendation are
    computed from the session alone, against the KB version it pinned).
    """

    attack_id: str
    name: str
    matched_motivations: frozenset[str]
    harmed_assets: tuple[str, ...]
    impacted_layers: frozenset[DltLayer]
    scenario: str | None = None
    status: RiskStatus = RiskStatus.CANDIDATE
    rank: int | None = None
    countermeasures: tuple[Countermeasure, ...] = ()

    def to_dict(self) -> dict:
        return {
            "attack_id": self.attack_id,
            "name": self.name,
            "matched_motivations": sorted(self.matched_motivations),
            "harmed_assets": list(self.harmed_assets),
            "impacted_layers": [l.value for l in LAYER_ORDER if l in self.impacted_layers],
            "scenario": self.scenario,
            "status": self.status.value,
            "rank": self.rank,
            "countermeasures": [c.to_dict() for c in self.countermeasures],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CandidateRisk":
        _require_keys(
            data,
            {
                "attack_id", "name", "matched_motivations", "harmed_assets",
                "impacted_layers", "scenario", "status", "rank", "countermeasures",
            },
            "candidate risk",
        )
        try:
            status = RiskStatus(data["status"])
        except ValueError:
            raise ParseError(f"unknown risk status {data['status']!r}") from None
        return cls(
            attack_id=data["attack_id"],
            name=data["name"],
            matched_motivations=frozenset(data["matched_motivations"]),
            harmed_assets=tuple(data["harmed_assets"]),
            impacted_layers=frozenset(parse_layer(l) for l in data["impacted_layers"]),
            scenario=data["scenario"],
            status=status,
            rank=data["rank"],
            countermeasures=tuple(Countermeasure.from_dict(c) for c in data["countermeasures"]),
        )


@dataclass(frozen=True)
class Recommendation:
    """Final outcome: the most-harmed asset(s) and the advice covering them."""

    top_assets: tuple[str, ...]
    asset_counts: tuple[tuple[str, int], ...]
    layer_counts: tuple[tuple[DltLayer, int], ...]
    advice: tuple[tuple[str, tuple[str, ...]], ...]

    def to_dict(self) -> dict:
        return {
            "top_assets": list(self.top_assets),
            "asset_counts": {label: count for label, count in self.asset_counts},
            "layer_counts": {layer.value: count for layer, count in self.layer_counts},
            "advice": [
                {"attack_id": attack_id, "countermeasures": list(texts)}
                for attack_id, texts in self.advice
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Recommendation":
        _require_keys(data, {"top_assets", "asset_counts", "layer_counts", "advice"}, "recommendation")
        return cls(
            top_assets=tuple(data["top_assets"]),
            asset_counts=tuple((k, v) for k, v in data["asset_counts"].items()),
            layer_counts=tuple((parse_layer(k), v) for k, v in data["layer_counts"].items()),
            advice=tuple(
                (a["attack_id"], tuple(a["countermeasures"])) for a in data["advice"]
            ),
        )


@dataclass(frozen=True)
class AuditEntry:
    """One applied action: sequence number, timestamp, resulting step, the
    human summary, and the full replayable payload."""

    seq: int
    timestamp: str
    step: str
    action: str
    summary: str
    payload: dict

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "timestamp": self.timestamp,
            "step": self.step,
            "action": self.action,
            "summary": self.summary,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AuditEntry":
        _require_keys(data, {"seq", "timestamp", "step", "action", "summary", "payload"}, "audit entry")
        return cls(**{k: data[k] for k in ("seq", "timestamp", "step", "action", "summary", "payload")})


@dataclass(frozen=True)
class AssessmentSession:
    """Full state of one assessment. Immutable snapshot; operations below
    produce successor snapshots."""

    id: str
    kb_version_note: str
    project: ProjectSpec
    motivations: tuple[Motivation, ...]
    annotations: tuple[DomainAnnotation, ...]
    risks: tuple[CandidateRisk, ...]
    recommendation: Recommendation | None
    current_step: Step
    audit_log: tuple[AuditEntry, ...]

    def motivation(self, motivation_id: str) -> Motivation:
        for m in self.motivations:
            if m.id == motivation_id:
                return m
        raise UnknownIdError("motivation", motivation_id)

    def risk(self, attack_id: str) -> CandidateRisk:
        for r in self.risks:
            if r.attack_id == attack_id:
                return r
        raise UnknownIdError("candidate", attack_id)

    def confirmed_risks(self) -> list[CandidateRisk]:
        confirmed = [r for r in self.risks if r.status is RiskStatus.CONFIRMED]
        return sorted(confirmed, key=lambda r: r.rank or 0)


# --------------------------------------------------------------------------
# operations

def _now_utc() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _check_step(session: AssessmentSession, allowed: tuple[Step, ...], op: str) -> None:
    if session.current_step not in allowed:
        raise StepOrderError(
            f"{op} is not allowed at step '{session.current_step.value}' "
            f"(allowed: {', '.join(s.value for s in allowed)})"
        )


def _audited(
    session: AssessmentSession,
    action: str,
    summary: str,
    payload: dict,
    now: str | None,
    **changes,
) -> AssessmentSession:
    """Apply field changes and append the audit entry for one action."""
    step_after: Step = changes.get("current_step", session.current_step)
    entry = AuditEntry(
        seq=len(session.audit_log) + 1,
        timestamp=now or _now_utc(),
        step=step_after.value,
        action=action,
        summary=summary,
        payload=payload,
    )
    changes["audit_log"] = session.audit_log + (entry,)
    return replace(session, **changes)


def create_session(
    project: ProjectSpec,
    *,
    session_id: str | None = None,
    now: str | None = None,
) -> AssessmentSession:
    """Open a session for a project spec. Requires a nonempty scope statement."""
    if not project.scope_statement.strip():
        raise IncompleteSpecError("project scope_statement must be nonempty")
    base = AssessmentSession(
        id=session_id or uuid.uuid4().hex[:12],
        kb_version_note="",
        project=project,
        motivations=(),
        annotations=(),
        risks=(),
        recommendation=None,
        current_step=Step.MOTIVATIONS,
        audit_log=(),
    )
    return _audited(
        base,
        "create_session",
        f"session opened for {project.organization!r}",
        {"action": "create_session", "project": project.to_dict()},
        now,
    )


def add_motivation(
    session: AssessmentSession, motivation: Motivation, *, now: str | None = None
) -> AssessmentSession:
    """Record an attacker motivation. Allowed until identification runs;
    the session advances to the domain step once one motivation exists."""
    _check_step(session, (Step.MOTIVATIONS, Step.DOMAINS), "add_motivation")
    if not motivation.description.strip():
        raise InvalidInputError("motivation description must be nonempty")
    if motivation.id != slugify(motivation.id):
        raise InvalidInputError(f"motivation id {motivation.id!r} is not a slug")
    if any(m.id == motivation.id for m in session.motivations):
        raise InvalidInputError(f"duplicate motivation id {motivation.id!r}")
    return _audited(
        session,
        "add_motivation",
        f"motivation {motivation.id!r} added (category {motivation.category.value})",
        {"action": "add_motivation", "motivation": motivation.to_dict()},
        now,
        motivations=session.motivations + (motivation,),
        current_step=Step.DOMAINS,
    )


def annotate_domain(
    session: AssessmentSession, annotation: DomainAnnotation, *, now: str | None = None
) -> AssessmentSession:
    """Attach a domain-of-interest annotation (layers, optional assets) to a
    motivation. Every motivation needs at least one annotation before
    identification may run."""
    _check_step(session, (Step.DOMAINS,), "annotate_domain")
    session.motivation(annotation.motivation_id)  # raises UnknownIdError
    if not annotation.layers:
        raise InvalidInputError("annotation must name at least one layer")
    return _audited(
        session,
        "annotate_domain",
        f"domain annotated for motivation {annotation.motivation_id!r}",
        {"action": "annotate_domain", "annotation": annotation.to_dict()},
        now,
        annotations=session.annotations + (annotation,),
    )


def _risk_from_record(record: AttackRecord, matched: frozenset[str]) -> CandidateRisk:
    return CandidateRisk(
        attack_id=record.id,
        name=record.name,
        matched_motivations=matched,
        harmed_assets=record.harmed_assets,
        impacted_layers=record.impacted_layers,
        countermeasures=record.countermeasures,  # KB defaults; editable later
    )


def identify_risks(
    session: AssessmentSession, kb: KnowledgeBase, *, now: str | None = None
) -> AssessmentSession:
    """Filter the KB once per (motivation, annotation) pair and union the
    results into the candidate list. Deterministic for a given session + KB."""
    _check_step(session, (Step.DOMAINS,), "identify_risks")
    annotated = {a.motivation_id for a in session.annotations}
    missing = [m.id for m in session.motivations if m.id not in annotated]
    if missing:
        raise StepOrderError(
            f"identify_risks requires an annotation for every motivation "
            f"(missing: {', '.join(missing)})"
        )

    matched: dict[str, set[str]] = {}
    for motivation in session.motivations:
        for annotation in session.annotations:
            if annotation.motivation_id != motivation.id:
                continue
            query = FilterQuery(
                categories=frozenset({motivation.category}),
                layers=frozenset(annotation.layers),
                assets=frozenset(annotation.assets) if annotation.assets else None,
            )
            for record in filter_records(kb, query):
                matched.setdefault(record.id, set()).add(motivation.id)

    risks = tuple(
        _risk_from_record(kb.records[slug], frozenset(matched[slug]))
        for slug in sorted(matched)
    )
    return _audited(
        session,
        "identify_risks",
        f"{len(risks)} candidate risk(s) identified against {kb.version_note()}",
        {"action": "identify_risks"},
        now,
        risks=risks,
        kb_version_note=kb.version_note(),
        current_step=Step.IDENTIFY,
    )


def register_new_risk(
    session: AssessmentSession,
    kb: KnowledgeBase,
    record: AttackRecord,
    matched_motivations: Iterable[str],
    *,
    now: str | None = None,
) -> tuple[AssessmentSession, KnowledgeBase]:
    """Take the new-risk branch: add a freshly researched attack to the KB
    and to the candidate list. Returns the new session and the new KB."""
    _check_step(session, (Step.IDENTIFY,), "register_new_risk")
    matched = frozenset(matched_motivations)
    if not matched:
        raise InvalidInputError("a new risk must be matched to at least one motivation")
    for motivation_id in sorted(matched):
        session.motivation(motivation_id)
    new_kb = add_record(kb, record)  # propagates duplicate-slug / validation errors
    new_session = _audited(
        session,
        "register_new_risk",
        f"new risk {record.id!r} registered (gateway: yes); KB grows to {len(new_kb)} records",
        {
            "action": "register_new_risk",
            "record": record.to_dict(),
            "matched_motivations": sorted(matched),
        },
        now,
        risks=session.risks + (_risk_from_record(record, matched),),
        kb_version_note=new_kb.version_note(),
    )
    return new_session, new_kb


def record_analysis(
    session: AssessmentSession, attack_id: str, scenario: str, *, now: str | None = None
) -> AssessmentSession:
    """Store the attack scenario for one candidate (last write wins)."""
    _check_step(session, (Step.IDENTIFY, Step.ANALYZE), "record_analysis")
    if not scenario.strip():
        raise InvalidInputError("scenario must be nonempty")
    target = session.risk(attack_id)
    risks = tuple(
        replace(r, scenario=scenario) if r.attack_id == attack_id else r
        for r in session.risks
    )
    overwrite = " (overwrites previous scenario)" if target.scenario else ""
    return _audited(
        session,
        "record_analysis",
        f"scenario recorded for {attack_id!r}{overwrite}",
        {"action": "record_analysis", "attack_id": attack_id, "scenario": scenario},
        now,
        risks=risks,
        current_step=Step.ANALYZE,
    )


@dataclass(frozen=True)
class RankDecision:
    """Stakeholder verdict on one candidate: confirmed with a rank, or rejected."""

    attack_id: str
    confirmed: bool
    rank: int | None = None

    def to_dict(self) -> dict:
        out: dict = {"attack_id": self.attack_id, "decision": "confirmed" if self.confirmed else "rejected"}
        if self.confirmed:
            out["rank"] = self.rank
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RankDecision":
        keys = set(data)
        if keys == {"attack_id", "decision"}:
            confirmed = False
        elif keys == {"attack_id", "decision", "rank"}:
            confirmed = True
        else:
            raise ParseError(f"rank decision: unexpected field set {sorted(keys)}")
        if data["decision"] not in ("confirmed", "rejected"):
            raise ParseError(f"unknown decision {data['decision']!r}")
        if (data["decision"] == "confirmed") != confirmed:
            raise ParseError("confirmed decisions carry a rank; rejected ones do not")
        return cls(attack_id=data["attack_id"], confirmed=confirmed, rank=data.get("rank"))


def apply_ranking(
    session: AssessmentSession,
    decisions: Iterable[RankDecision],
    *,
    now: str | None = None,
) -> AssessmentSession:
    """Apply stakeholder confirmations/rejections. Decisions must cover every
    candidate exactly once; confirmed ranks must form 1..n."""
    _check_step(session, (Step.ANALYZE,), "apply_ranking")
    unanalyzed = [r.attack_id for r in session.risks if not r.scenario]
    if unanalyzed:
        raise StepOrderError(
            f"apply_ranking requires a scenario for every candidate "
            f"(missing: {', '.join(sorted(unanalyzed))})"
        )

    decisions = list(decisions)
    by_id: dict[str, RankDecision] = {}
    for decision in decisions:
        session.risk(decision.attack_id)  # raises UnknownIdError
        if decision.attack_id in by_id:
            raise RankingError(f"candidate {decision.attack_id!r} decided twice")
        by_id[decision.attack_id] = decision
    uncovered = [r.attack_id for r in session.risks if r.attack_id not in by_id]
    if uncovered:
        raise RankingError(f"decisions missing for: {', '.join(sorted(uncovered))}")

    ranks = [d.rank for d in decisions if d.confirmed]
    if any(not isinstance(r, int) or r < 1 for r in ranks):
        raise RankingError("confirmed decisions need positive integer ranks")
    if len(set(ranks)) != len(ranks):
        raise RankingError("duplicate rank")
    if sorted(ranks) != list(range(1, len(ranks) + 1)):
        raise RankingError(f"ranks must form 1..{len(ranks)} without gaps, got {sorted(ranks)}")

    risks = tuple(
        replace(
            r,
            status=RiskStatus.CONFIRMED if by_id[r.attack_id].confirmed else RiskStatus.REJECTED,
            rank=by_id[r.attack_id].rank if by_id[r.attack_id].confirmed else None,
        )
        for r in session.risks
    )
    confirmed = sum(1 for r in risks if r.status is RiskStatus.CONFIRMED)
    return _audited(
        session,
        "apply_ranking",
        f"{confirmed} risk(s) confirmed, {len(risks) - confirmed} rejected",
        {"action": "apply_ranking", "decisions": [d.to_dict() for d in decisions]},
        now,
        risks=risks,
        current_step=Step.RANK,
    )


def attach_countermeasures(
    session: AssessmentSession,
    attack_id: str,
    countermeasures: Iterable[Countermeasure],
    *,
    now: str | None = None,
) -> AssessmentSession:
    """Replace the treatment list of a confirmed risk. Use the
    NO_KNOWN_COUNTERMEASURE marker when research found nothing."""
    _check_step(session, (Step.RANK, Step.COUNTERMEASURES), "attach_countermeasures")
    target = session.risk(attack_id)
    if target.status is not RiskStatus.CONFIRMED:
        raise NotConfirmedError(
            f"countermeasures can only be attached to confirmed risks "
            f"({attack_id!r} is {target.status.value})"
        )
    countermeasures = tuple(countermeasures)
    if not countermeasures:
        raise InvalidInputError("attach at least one countermeasure (or the explicit marker)")
    risks = tuple(
        replace(r, countermeasures=countermeasures) if r.attack_id == attack_id else r
        for r in session.risks
    )
    return _audited(
        session,
        "attach_countermeasures",
        f"{len(countermeasures)} countermeasure(s) attached to {attack_id!r}",
        {
            "action": "attach_countermeasures",
            "attack_id": attack_id,
            "countermeasures": [c.to_dict() for c in countermeasures],
        },
        now,
        risks=risks,
        current_step=Step.COUNTERMEASURES,
    )


def _group_assets(risks: list[CandidateRisk]) -> dict[str, int]:
    """Tally harmed assets case-insensitively; the displayed label for a
    group is its lexicographically smallest observed spelling."""
    counts: dict[str, int] = {}
    labels: dict[str, str] = {}
    for risk in risks:
        for asset in risk.harmed_assets:
            key = asset.strip().casefold()
            counts[key] = counts.get(key, 0) + 1
            label = asset.strip()
            labels[key] = min(labels.get(key, label), label)
    return {labels[key]: count for key, count in counts.items()}


def finalize(session: AssessmentSession, *, now: str | None = None) -> AssessmentSession:
    """Close the assessment: tally harmed assets over confirmed risks, report
    the most-harmed asset(s), and collect the advice covering them."""
    _check_step(session, (Step.COUNTERMEASURES,), "finalize")
    confirmed = session.confirmed_risks()
    if not confirmed:
        raise StepOrderError("cannot finalize a session without confirmed risks")
    uncovered = [r.attack_id for r in confirmed if not r.countermeasures]
    if uncovered:
        raise MissingCountermeasureError(
            f"confirmed risk(s) without countermeasures or an explicit marker: "
            f"{', '.join(sorted(uncovered))}"
        )

    asset_counts = _group_assets(confirmed)
    top = max(asset_counts.values())
    top_assets = tuple(sorted(label for label, count in asset_counts.items() if count == top))
    top_keys = {label.casefold() for label in top_assets}

    layer_counts = {layer: 0 for layer in LAYER_ORDER}
    for risk in confirmed:
        for layer in risk.impacted_layers:
            layer_counts[layer] += 1

    advice = tuple(
        (risk.attack_id, tuple(c.text for c in risk.countermeasures))
        for risk in confirmed  # already in rank order
        if any(a.strip().casefold() in top_keys for a in risk.harmed_assets)
    )
    recommendation = Recommendation(
        top_assets=top_assets,
        asset_counts=tuple(sorted(asset_counts.items())),
        layer_counts=tuple(layer_counts.items()),
        advice=advice,
    )
    return _audited(
        session,
        "finalize",
        f"assessment finalized; most-harmed asset(s): {', '.join(top_assets)}",
        {"action": "finalize"},
        now,
        recommendation=recommendation,
        current_step=Step.DONE,
    )


# --------------------------------------------------------------------------
# serialization

def _require_keys(data: dict, expected: set, what: str) -> None:
    if not isinstance(data, dict):
        raise ParseError(f"{what} must be a JSON object, got {type(data).__name__}")
    unknown = set(data) - expected
    if unknown:
        raise ParseError(f"{what}: unknown field(s) {sorted(unknown)}")
    missing = expected - set(data)
    if missing:
        raise ParseError(f"{what}: missing field(s) {sorted(missing)}")


def session_to_doc(session: AssessmentSession) -> dict:
    """Canonical dict form of a session (stable key order throughout)."""
    return {
        "schema_version": SESSION_SCHEMA_VERSION,
        "session": {
            "id": session.id,
            "kb_version_note": session.kb_version_note,
            "current_step": session.current_step.value,
            "project": session.project.to_dict(),
            "motivations": [m.to_dict() for m in session.motivations],
            "annotations": [a.to_dict() for a in session.annotations],
            "risks": [r.to_dict() for r in session.risks],
            "recommendation": (
                session.recommendation.to_dict() if session.recommendation else None
            ),
        },
        "audit_log": [entry.to_dict() for entry in session.audit_log],
    }


def session_from_doc(doc: dict) -> AssessmentSession:
    """Parse a session document; enforces schema version and all invariants."""
    _require_keys(doc, {"schema_version", "session", "audit_log"}, "session document")
    if doc["schema_version"] != SESSION_SCHEMA_VERSION:
        raise SchemaVersionError(doc["schema_version"], SESSION_SCHEMA_VERSION)
    body = doc["session"]
    _require_keys(
        body,
        {
            "id", "kb_version_note", "current_step", "project",
            "motivations", "annotations", "risks", "recommendation",
        },
        "session",
    )
    try:
        step = Step(body["current_step"])
    except ValueError:
        raise ParseError(f"unknown step {body['current_step']!r}") from None
    session = AssessmentSession(
        id=body["id"],
        kb_version_note=body["kb_version_note"],
        project=ProjectSpec.from_dict(body["project"]),
        motivations=tuple(Motivation.from_dict(m) for m in body["motivations"]),
        annotations=tuple(DomainAnnotation.from_dict(a) for a in body["annotations"]),
        risks=tuple(CandidateRisk.from_dict(r) for r in body["risks"]),
        recommendation=(
            Recommendation.from_dict(body["recommendation"])
            if body["recommendation"] is not None
            else None
        ),
        current_step=step,
        audit_log=tuple(AuditEntry.from_dict(e) for e in doc["audit_log"]),
    )
    validate_session_state(session)
    return session


_STEP_INDEX = {step: i for i, step in enumerate(Step)}


def validate_session_state(session: AssessmentSession) -> None:
    """Check the cross-field invariants a legal session always satisfies.

    Raises SessionInvariantError on the first broken rule. Used on import
    and after replay; live operations maintain these by construction.
    """

    def broken(message: str) -> None:
        raise SessionInvariantError(message)

    step = session.current_step
    idx = _STEP_INDEX[step]
    if step in (Step.SPEC, Step.RECOMMEND):
        broken(f"step {step.value!r} is not a resting state")
    if not session.project.scope_statement.strip():
        broken("project scope_statement is empty")
    if (step is Step.MOTIVATIONS) != (len(session.motivations) == 0):
        broken("motivation list inconsistent with current step")

    motivation_ids = [m.id for m in session.motivations]
    if len(set(motivation_ids)) != len(motivation_ids):
        broken("duplicate motivation ids")
    for annotation in session.annotations:
        if annotation.motivation_id not in motivation_ids:
            broken(f"annotation references unknown motivation {annotation.motivation_id!r}")
        if not annotation.layers:
            broken("annotation without layers")

    if idx < _STEP_INDEX[Step.IDENTIFY] and session.risks:
        broken("candidate risks present before identification")
    if idx >= _STEP_INDEX[Step.IDENTIFY]:
        annotated = {a.motivation_id for a in session.annotations}
        if set(motivation_ids) - annotated:
            broken("identification ran with unannotated motivations")

    risk_ids = [r.attack_id for r in session.risks]
    if len(set(risk_ids)) != len(risk_ids):
        broken("duplicate candidate risks")
    for risk in session.risks:
        if not risk.matched_motivations:
            broken(f"risk {risk.attack_id!r} has no matched motivations")
        if not risk.matched_motivations <= set(motivation_ids):
            broken(f"risk {risk.attack_id!r} matched to unknown motivations")
        if (risk.rank is not None) != (risk.status is RiskStatus.CONFIRMED):
            broken(f"risk {risk.attack_id!r}: rank present iff confirmed is violated")
        if risk.rank is not None and (not isinstance(risk.rank, int) or risk.rank < 1):
            broken(f"risk {risk.attack_id!r}: rank must be a positive integer")

    if idx <= _STEP_INDEX[Step.IDENTIFY]:
        if any(r.scenario is not None for r in session.risks):
            broken("scenario recorded before the analysis step")
    if idx >= _STEP_INDEX[Step.RANK]:
        if any(r.status is RiskStatus.CANDIDATE for r in session.risks):
            broken("undecided candidates after ranking")
        if any(not r.scenario for r in session.risks):
            broken("ranked session with missing scenarios")
    else:
        if any(r.status is not RiskStatus.CANDIDATE for r in session.risks):
            broken("confirmed/rejected risks before ranking")

    ranks = sorted(r.rank for r in session.risks if r.rank is not None)
    if ranks != list(range(1, len(ranks) + 1)):
        broken(f"confirmed ranks must form 1..n, got {ranks}")

    if (session.recommendation is not None) != (step is Step.DONE):
        broken("recommendation present iff session is done is violated")
    if step is Step.DONE:
        confirmed = [r for r in session.risks if r.status is RiskStatus.CONFIRMED]
        if not confirmed:
            broken("finished session without confirmed risks")
        if any(not r.countermeasures for r in confirmed):
            broken("finished session with uncovered confirmed risks")

    for i, entry in enumerate(session.audit_log, start=1):
        if entry.seq != i:
            broken(f"audit log sequence broken at position {i}")


# --------------------------------------------------------------------------
# replay: scripted sessions and the event-sourcing law

def apply_action(
    session: AssessmentSession | None,
    kb: KnowledgeBase,
    action: dict,
    *,
    now: str | None = None,
    session_id: str | None = None,
) -> tuple[AssessmentSession, KnowledgeBase]:
    """Apply one serialized action. The first action must be create_session."""
    if not isinstance(action, dict) or "action" not in action:
        raise ParseError("action must be an object with an 'action' field")
    name = action["action"]
    payload = {k: v for k, v in action.items() if k != "action"}

    if name == "create_session":
        if session is not None:
            raise SessionInvariantError("create_session must be the first action")
        _require_keys(payload, {"project"}, name)
        project = ProjectSpec.from_dict(payload["project"])
        return create_session(project, session_id=session_id, now=now), kb
    if session is None:
        raise SessionInvariantError("the first action must be create_session")

    if name == "add_motivation":
        _require_keys(payload, {"motivation"}, name)
        return add_motivation(session, Motivation.from_dict(payload["motivation"]), now=now), kb
    if name == "annotate_domain":
        _require_keys(payload, {"annotation"}, name)
        return annotate_domain(session, DomainAnnotation.from_dict(payload["annotation"]), now=now), kb
    if name == "identify_risks":
        _require_keys(payload, set(), name)
        return identify_risks(session, kb, now=now), kb
    if name == "register_new_risk":
        _require_keys(payload, {"record", "matched_motivations"}, name)
        record = AttackRecord.from_dict(payload["record"])
        return register_new_risk(
            session, kb, record, payload["matched_motivations"], now=now
        )
    if name == "record_analysis":
        _require_keys(payload, {"attack_id", "scenario"}, name)
        return record_analysis(session, payload["attack_id"], payload["scenario"], now=now), kb
    if name == "apply_ranking":
        _require_keys(payload, {"decisions"}, name)
        decisions = [RankDecision.from_dict(d) for d in payload["decisions"]]
        return apply_ranking(session, decisions, now=now), kb
    if name == "attach_countermeasures":
        _require_keys(payload, {"attack_id", "countermeasures"}, name)
        countermeasures = [Countermeasure.from_dict(c) for c in payload["countermeasures"]]
        return attach_countermeasures(session, payload["attack_id"], countermeasures, now=now), kb
    if name == "finalize":
        _require_keys(payload, set(), name)
        return finalize(session, now=now), kb
    raise ParseError(f"unknown action {name!r}")


def run_actions(
    actions: Iterable[dict],
    kb: KnowledgeBase,
    *,
    session_id: str | None = None,
    timestamps: Iterable[str] | None = None,
) -> tuple[AssessmentSession, KnowledgeBase]:
    """Apply a sequence of actions against a KB. Without explicit timestamps,
    a deterministic clock (REPLAY_EPOCH + 1s per action) is used."""
    session: AssessmentSession | None = None
    stamps = iter(timestamps) if timestamps is not None else None
    for i, action in enumerate(actions):
        now = next(stamps) if stamps is not None else (
            (REPLAY_EPOCH + timedelta(seconds=i)).isoformat(timespec="seconds")
        )
        session, kb = apply_action(session, kb, action, now=now, session_id=session_id)
    if session is None:
        raise SessionInvariantError("no actions to run")
    return session, kb


def run_script(doc: dict, kb: KnowledgeBase) -> tuple[AssessmentSession, KnowledgeBase]:
    """Replay a scripted session document: {schema_version, name,
    session_id?, actions}. Fully deterministic for a given (script, KB)."""
    if not isinstance(doc, dict):
        raise ParseError("session script must be a JSON object")
    unknown = set(doc) - {"schema_version", "name", "session_id", "actions"}
    if unknown:
        raise ParseError(f"session script: unknown field(s) {sorted(unknown)}")
    missing = {"schema_version", "name", "actions"} - set(doc)
    if missing:
        raise ParseError(f"session script: missing field(s) {sorted(missing)}")
    if doc["schema_version"] != SESSION_SCHEMA_VERSION:
        raise SchemaVersionError(doc["schema_version"], SESSION_SCHEMA_VERSION)
    session_id = doc.get("session_id") or hashlib.sha256(
        json.dumps(doc, sort_keys=True).encode("utf-8")
    ).hexdigest()[:12]
    return run_actions(doc["actions"], kb, session_id=session_id)


def replay_audit(
    audit_log: Iterable[AuditEntry], kb: KnowledgeBase, *, session_id: str
) -> AssessmentSession:
    """Rebuild a session from its audit log against the KB it started from
    (event sourcing): payloads and timestamps are taken from the entries."""
    entries = list(audit_log)
    session, _ = run_actions(
        [entry.payload for entry in entries],
        kb,
        session_id=session_id,
        timestamps=[entry.timestamp for entry in entries],
    )
    return session
