"""Render assessment sessions as markdown reports and as canonical JSON
exports. Rendering is a pure function of the session snapshot; exporting
twice yields byte-identical documents."""

from __future__ import annotations

import json

from .assessment import (
    AssessmentSession,
    RiskStatus,
    Step,
    session_from_doc,
    session_to_doc,
)
from .errors import ParseError
from .model import LAYER_ORDER

_NOT_YET = "_Not yet performed._"

_LAYER_TITLES = {layer: layer.value.replace("-", " ").title() + " Layer" for layer in LAYER_ORDER}

_STEP_INDEX = {step: i for i, step in enumerate(Step)}


def export_session(session: AssessmentSession) -> bytes:
    """Canonical UTF-8 JSON document: full state plus audit log."""
    doc = session_to_doc(session)
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def import_session(source: bytes | str) -> AssessmentSession:
    """Parse and validate a session export. Rejects unknown schema versions
    and any document violating state-machine invariants."""
    text = source.decode("utf-8") if isinstance(source, bytes) else source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    return session_from_doc(doc)


def _layers_cell(layers) -> str:
    return ", ".join(l.value for l in LAYER_ORDER if l in layers)


def _past(session: AssessmentSession, step: Step) -> bool:
    return _STEP_INDEX[session.current_step] >= _STEP_INDEX[step]


def render_markdown(session: AssessmentSession) -> str:
    """Human-readable report mirroring the step-by-step assessment tables."""
    lines: list[str] = []
    out = lines.append

    out(f"# Security Risk Assessment Report: {session.project.organization}")
    out("")
    out(f"Session `{session.id}` — status: **{session.current_step.value}**")
    if session.kb_version_note:
        out(f"Knowledge base: {session.kb_version_note}")
    out("")

    out("## 1. Project Context")
    out("")
    project = session.project
    out(f"- Organization: {project.organization}")
    out(f"- Goal: {project.goal}")
    out(f"- Technologies: {', '.join(project.technologies) if project.technologies else '-'}")
    out(f"- Stage: {project.stage}")
    out(f"- Scope: {project.scope_statement}")
    out(f"- Protected assets: {', '.join(project.protected_assets) if project.protected_assets else '-'}")
    if project.intake_answers:
        out("")
        out("### Intake answers")
        out("")
        for qid, answer in project.intake_answers:
            out(f"- `{qid}`: {answer}")
    out("")

    out("## 2. Attacker Motivations")
    out("")
    if session.motivations:
        for m in session.motivations:
            out(f"- **{m.id}** ({m.category.value}): {m.description}")
    else:
        out(_NOT_YET)
    out("")

    out("## 3. Attack Domains")
    out("")
    if session.annotations:
        for a in session.annotations:
            assets = ", ".join(sorted(a.assets)) if a.assets else "-"
            out(f"- motivation **{a.motivation_id}**: layers {_layers_cell(a.layers)}; assets: {assets}")
    else:
        out(_NOT_YET)
    out("")

    out("## 4. Identified Risks")
    out("")
    if _past(session, Step.IDENTIFY):
        active = [r for r in session.risks if r.status is not RiskStatus.REJECTED]
        rejected = [r for r in session.risks if r.status is RiskStatus.REJECTED]
        if active:
            out("| Attack | Matched motivations | Layers | Harmed assets | Status | Rank |")
            out("| --- | --- | --- | --- | --- | --- |")
            for r in active:
                out(
                    f"| {r.name} (`{r.attack_id}`) "
                    f"| {', '.join(sorted(r.matched_motivations))} "
                    f"| {_layers_cell(r.impacted_layers)} "
                    f"| {', '.join(r.harmed_assets)} "
                    f"| {r.status.value} "
                    f"| {r.rank if r.rank is not None else '-'} |"
                )
        else:
            out("No risks identified against the knowledge base.")
        if rejected:
            out("")
            out("### Rejected by stakeholders")
            out("")
            for r in rejected:
                out(f"- {r.name} (`{r.attack_id}`)")
    else:
        out(_NOT_YET)
    out("")

    out("## 5. Attack Scenarios")
    out("")
    analyzed = [r for r in session.risks if r.scenario]
    if analyzed:
        for r in analyzed:
            out(f"- **{r.attack_id}**: {r.scenario}")
    else:
        out(_NOT_YET)
    out("")

    out("## 6. Countermeasures")
    out("")
    if _past(session, Step.COUNTERMEASURES):
        for r in session.confirmed_risks():
            out(f"- **{r.attack_id}** (rank {r.rank}):")
            for c in r.countermeasures:
                refs = f" [{', '.join(c.references)}]" if c.references else ""
                out(f"  - {c.text}{refs}")
    else:
        out(_NOT_YET)
    out("")

    out("## 7. Final Recommendation")
    out("")
    rec = session.recommendation
    if rec is not None:
        out(f"Most-harmed asset(s): **{', '.join(rec.top_assets)}**")
        out("")
        out("Risks per harmed asset:")
        for label, count in rec.asset_counts:
            out(f"- {label}: {count}")
        out("")
        out("Risks per impacted layer:")
        for layer, count in rec.layer_counts:
            out(f"- {_LAYER_TITLES[layer]}: {count}")
        out("")
        out("Recommended treatments for risks harming the top asset(s):")
        for attack_id, texts in rec.advice:
            out(f"- **{attack_id}**:")
            for text in texts:
                out(f"  - {text}")
    else:
        out(_NOT_YET)
    out("")

    out("## Appendix: Audit Log")
    out("")
    for entry in session.audit_log:
        out(f"- #{entry.seq} [{entry.timestamp}] ({entry.step}) {entry.action}: {entry.summary}")
    out("")

    return "\n".join(lines)
