"""HTTP service exposing KB queries and assessment sessions.

Single-node, file-backed: every successful session mutation is persisted as
a session-export document before the response is returned, and a KB grown
through new-risk registration is persisted alongside. Mutating requests are
serialized per session id; reads are unrestricted.
"""

from __future__ import annotations

import os
import threading
import uuid
from pathlib import Path

from fastapi import Body, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse

from . import assessment, graph as graphmod, reporting, store
from .errors import (
    IncompleteSpecError,
    InvalidInputError,
    KbValidationError,
    NotConfirmedError,
    ParseError,
    RankingError,
    RecordValidationError,
    SchemaVersionError,
    SessionInvariantError,
    SramdaError,
    StepOrderError,
    UnknownIdError,
)
from .model import AttackRecord, Countermeasure, KnowledgeBase


def resolve_data_dir(default: str) -> str:
    """SRAMDA_DATA_DIR overrides whatever the flag or config says."""
    return os.environ.get("SRAMDA_DATA_DIR") or default


class RiskService:
    """Owns the KB snapshot and all live sessions, with file persistence.

    Thread safety: one lock per session id serializes mutations; the KB
    reference is swapped atomically under its own lock after a successful
    registration.
    """

    def __init__(self, kb_path: str | None, data_dir: str):
        self._data_dir = Path(data_dir)
        self._sessions_dir = self._data_dir / "sessions"
        self._sessions_dir.mkdir(parents=True, exist_ok=True)

        # A previously grown KB takes precedence: registered risks are
        # completed mutations and must survive restarts.
        grown = self._data_dir / "kb.jsonl"
        if grown.exists():
            self._kb = store.load_kb(grown.read_bytes())
        elif kb_path is not None:
            self._kb = store.load_kb(Path(kb_path).read_bytes())
        else:
            self._kb = store.load_seed_kb()

        self._kb_lock = threading.Lock()
        self._registry_lock = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}
        self._sessions: dict[str, assessment.AssessmentSession] = {}
        for path in sorted(self._sessions_dir.glob("*.json")):
            session = reporting.import_session(path.read_bytes())
            self._sessions[session.id] = session

    # -- knowledge base ----------------------------------------------------

    @property
    def kb(self) -> KnowledgeBase:
        return self._kb

    def _swap_kb(self, kb: KnowledgeBase) -> None:
        tmp = self._data_dir / "kb.jsonl.tmp"
        tmp.write_bytes(store.save_kb(kb))
        os.replace(tmp, self._data_dir / "kb.jsonl")
        self._kb = kb

    # -- sessions ------------------------------------------------------------

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def _persist(self, session: assessment.AssessmentSession) -> None:
        tmp = self._sessions_dir / f"{session.id}.json.tmp"
        tmp.write_bytes(reporting.export_session(session))
        os.replace(tmp, self._sessions_dir / f"{session.id}.json")

    def get_session(self, session_id: str) -> assessment.AssessmentSession:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownIdError("session", session_id) from None

    def create_session(self, project: assessment.ProjectSpec) -> assessment.AssessmentSession:
        session = assessment.create_session(project, session_id=uuid.uuid4().hex[:12])
        with self._lock_for(session.id):
            self._sessions[session.id] = session
            self._persist(session)
        return session

    def mutate(self, session_id: str, fn) -> assessment.AssessmentSession:
        """Apply fn(session) -> session under the per-session lock."""
        with self._lock_for(session_id):
            session = self.get_session(session_id)
            updated = fn(session)
            self._sessions[session_id] = updated
            self._persist(updated)
            return updated

    def register_new_risk(
        self, session_id: str, record: AttackRecord, matched_motivations: list[str]
    ) -> assessment.AssessmentSession:
        with self._lock_for(session_id):
            session = self.get_session(session_id)
            with self._kb_lock:
                updated, new_kb = assessment.register_new_risk(
                    session, self._kb, record, matched_motivations
                )
                self._swap_kb(new_kb)
            self._sessions[session_id] = updated
            self._persist(updated)
            return updated


_STATUS_BY_ERROR = (
    (StepOrderError, 409),
    (UnknownIdError, 404),
    (SchemaVersionError, 400),
    (ParseError, 400),
    (KbValidationError, 422),
    (RecordValidationError, 422),
    (RankingError, 422),
    (NotConfirmedError, 422),
    (InvalidInputError, 422),
    (IncompleteSpecError, 422),
    (SessionInvariantError, 422),
)


def _error_response(exc: SramdaError) -> JSONResponse:
    status = 422
    for cls, code in _STATUS_BY_ERROR:
        if isinstance(exc, cls):
            status = code
            break
    body: dict = {"error": type(exc).__name__, "detail": str(exc)}
    if isinstance(exc, KbValidationError):
        body["violations"] = [
            {"slug": slug, "field": v.field, "rule": v.rule, "message": v.message}
            for slug, v in exc.report.violations
        ]
    elif isinstance(exc, RecordValidationError):
        body["violations"] = [
            {"slug": exc.slug, "field": v.field, "rule": v.rule, "message": v.message}
            for v in exc.violations
        ]
    return JSONResponse(status_code=status, content=body)


def create_app(service: RiskService) -> FastAPI:
    app = FastAPI(title="sramda", docs_url=None, redoc_url=None)

    @app.exception_handler(SramdaError)
    async def _domain_error(_request: Request, exc: SramdaError):
        return _error_response(exc)

    @app.exception_handler(RequestValidationError)
    async def _body_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": "ParseError", "detail": str(exc)},
        )

    # -- KB ----------------------------------------------------------------

    @app.get("/api/kb/attacks")
    def list_attacks(request: Request):
        params = request.query_params
        query = store.parse_query(
            layers=params.getlist("layer") or None,
            motivations=params.getlist("motivation") or None,
            assets=params.getlist("asset") or None,
            text=params.get("q"),
        )
        return [record.to_dict() for record in store.filter_records(service.kb, query)]

    @app.get("/api/kb/attacks/{slug}")
    def get_attack(slug: str):
        record = service.kb.get(slug)
        if record is None:
            raise UnknownIdError("slug", slug)
        return record.to_dict()

    @app.get("/api/kb/stats")
    def kb_stats():
        return store.compute_stats(service.kb).to_dict()

    @app.get("/api/kb/graph/{slug}/related")
    def kb_related(slug: str):
        return graphmod.related_neighbors(graphmod.build_graph(service.kb), slug)

    @app.get("/api/kb/graph/{slug}/contributes-closure")
    def kb_closure(slug: str):
        return graphmod.contributes_closure(graphmod.build_graph(service.kb), slug)

    # -- sessions ------------------------------------------------------------

    @app.post("/api/sessions", status_code=201)
    def create_session(payload: dict = Body(...)):
        project = assessment.ProjectSpec.from_dict(payload)
        session = service.create_session(project)
        return assessment.session_to_doc(session)

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        return assessment.session_to_doc(service.get_session(session_id))

    @app.post("/api/sessions/{session_id}/motivations")
    def post_motivation(session_id: str, payload: dict = Body(...)):
        motivation = assessment.Motivation.from_dict(payload)
        session = service.mutate(
            session_id, lambda s: assessment.add_motivation(s, motivation)
        )
        return assessment.session_to_doc(session)

    @app.post("/api/sessions/{session_id}/annotations")
    def post_annotation(session_id: str, payload: dict = Body(...)):
        annotation = assessment.DomainAnnotation.from_dict(payload)
        session = service.mutate(
            session_id, lambda s: assessment.annotate_domain(s, annotation)
        )
        return assessment.session_to_doc(session)

    @app.post("/api/sessions/{session_id}/identify")
    def post_identify(session_id: str):
        session = service.mutate(
            session_id, lambda s: assessment.identify_risks(s, service.kb)
        )
        return assessment.session_to_doc(session)

    @app.post("/api/sessions/{session_id}/new-risk")
    def post_new_risk(session_id: str, payload: dict = Body(...)):
        if set(payload) != {"record", "matched_motivations"}:
            raise ParseError("body must contain exactly record and matched_motivations")
        record = AttackRecord.from_dict(payload["record"])
        session = service.register_new_risk(
            session_id, record, payload["matched_motivations"]
        )
        return assessment.session_to_doc(session)

    @app.post("/api/sessions/{session_id}/analysis")
    def post_analysis(session_id: str, payload: dict = Body(...)):
        if set(payload) != {"attack_id", "scenario"}:
            raise ParseError("body must contain exactly attack_id and scenario")
        session = service.mutate(
            session_id,
            lambda s: assessment.record_analysis(s, payload["attack_id"], payload["scenario"]),
        )
        return assessment.session_to_doc(session)

    @app.post("/api/sessions/{session_id}/rank")
    def post_rank(session_id: str, payload: dict = Body(...)):
        if set(payload) != {"decisions"}:
            raise ParseError("body must contain exactly decisions")
        decisions = [assessment.RankDecision.from_dict(d) for d in payload["decisions"]]
        session = service.mutate(
            session_id, lambda s: assessment.apply_ranking(s, decisions)
        )
        return assessment.session_to_doc(session)

    @app.post("/api/sessions/{session_id}/countermeasures")
    def post_countermeasures(session_id: str, payload: dict = Body(...)):
        if set(payload) != {"attack_id", "countermeasures"}:
            raise ParseError("body must contain exactly attack_id and countermeasures")
        countermeasures = [Countermeasure.from_dict(c) for c in payload["countermeasures"]]
        session = service.mutate(
            session_id,
            lambda s: assessment.attach_countermeasures(
                s, payload["attack_id"], countermeasures
            ),
        )
        return assessment.session_to_doc(session)

    @app.post("/api/sessions/{session_id}/finalize")
    def post_finalize(session_id: str):
        session = service.mutate(session_id, assessment.finalize)
        return assessment.session_to_doc(session)

    @app.get("/api/sessions/{session_id}/report")
    def get_report(session_id: str):
        session = service.get_session(session_id)
        return PlainTextResponse(
            reporting.render_markdown(session), media_type="text/markdown"
        )

    return app
