"""HTTP+JSON API over in-memory sessions.

Thin wrappers around the session operations; the UI (or any client)
drives the whole workflow through these endpoints.  Long asks return
202 with a poll token.
"""

from __future__ import annotations

import threading
import uuid
from concurrent.futures import Future, ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeoutError
from typing import Optional

from fastapi import FastAPI, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import session as sess
from .errors import (
    ParseError,
    PlanningError,
    PlanwhyError,
    SessionError,
    StaleSuggestionError,
    UnknownIdError,
    WorkspaceFormatError,
)
from .numbers import fmt, q3
from .planner import PlannerConfig, format_plan

ASK_SYNC_WAIT_SECONDS = 1.0


class ConfigBody(BaseModel):
    mode: str = "builtin"
    command: Optional[str] = None
    timeout: float = 60.0
    node_cap: int = 100_000


class NewSessionBody(BaseModel):
    domain: str
    problem: str
    config: Optional[ConfigBody] = None


class AskBody(BaseModel):
    planId: int
    step: int
    action: str
    strategy: str
    window: Optional[list[float]] = None


class CompareBody(BaseModel):
    planIds: list[int]
    metrics: list[str]


class MetricBody(BaseModel):
    name: str
    kind: str
    weights: Optional[dict[str, float]] = None


class AnnotationBody(BaseModel):
    text: str


class LoadBody(BaseModel):
    workspace: str


def _status_for(exc: PlanwhyError) -> int:
    if isinstance(exc, (UnknownIdError,)):
        return 404
    if isinstance(exc, StaleSuggestionError):
        return 409
    if isinstance(exc, (ParseError, WorkspaceFormatError, SessionError)):
        return 400
    if isinstance(exc, PlanningError):
        return 500
    return 400


def _error_response(exc: PlanwhyError) -> JSONResponse:
    detail = None
    report = getattr(exc, "report", None)
    if report is not None:
        detail = {"violation": str(report.violation) if report.violation else None,
                  "makespan": fmt(report.makespan)}
    return JSONResponse(status_code=_status_for(exc),
                        content={"code": exc.code, "message": str(exc),
                                 "detail": detail})


def _parse_action(text: str) -> tuple:
    return tuple(text.strip().lstrip("(").rstrip(")").lower().split())


def node_descriptor(node: sess.PlanNode) -> dict:
    return {
        "id": node.id,
        "parent": node.parent,
        "plan": None if node.plan is None else format_plan(node.plan),
        "steps": [] if node.plan is None else [str(s) for s in node.plan.steps],
        "replaced": None if node.replaced is None else "(" + " ".join(node.replaced) + ")",
        "suggested": None if node.suggested is None else "(" + " ".join(node.suggested) + ")",
        "stepIndex": node.step_index,
        "strategy": node.strategy,
        "behavior": node.behavior,
        "rejoinIndex": node.rejoin_index,
        "metrics": {k: fmt(v) for k, v in node.metrics.items()},
    }


def create_app() -> FastAPI:
    app = FastAPI(title="planwhy", version="0.1.0")
    workspaces: dict[str, sess.Workspace] = {}
    locks: dict[str, threading.Lock] = {}
    pending: dict[str, Future] = {}
    executor = ThreadPoolExecutor(max_workers=4)

    def get_ws(sid: str) -> sess.Workspace:
        if sid not in workspaces:
            raise UnknownIdError(f"unknown session {sid}")
        return workspaces[sid]

    @app.exception_handler(PlanwhyError)
    async def planwhy_error_handler(_request, exc: PlanwhyError):
        return _error_response(exc)

    @app.post("/sessions", status_code=201)
    def create_session(body: NewSessionBody):
        config = PlannerConfig(**body.config.model_dump()) if body.config \
            else PlannerConfig()
        ws = sess.new_session(body.domain, body.problem, config)
        sid = uuid.uuid4().hex[:12]
        workspaces[sid] = ws
        locks[sid] = threading.Lock()
        return {"sessionId": sid, "rootPlan": node_descriptor(ws.nodes[ws.root_id])}

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        ws = get_ws(sid)
        return {
            "sessionId": sid,
            "root": ws.root_id,
            "current": ws.current_id,
            "nodes": [node_descriptor(n) for _, n in sorted(ws.nodes.items())],
            "metrics": sorted(ws.metrics),
            "annotations": list(ws.annotations),
        }

    @app.get("/sessions/{sid}/plans/{pid}")
    def get_plan(sid: str, pid: int):
        return node_descriptor(get_ws(sid).node(pid))

    @app.get("/sessions/{sid}/plans/{pid}/steps/{k}/alternatives")
    def get_alternatives(sid: str, pid: int, k: int):
        ws = get_ws(sid)
        alts = sess.alternatives(ws, pid, k)
        return {"alternatives": [str(a) for a in alts]}

    @app.post("/sessions/{sid}/ask")
    def post_ask(sid: str, body: AskBody, response: Response):
        ws = get_ws(sid)
        window = None
        if body.window is not None:
            if len(body.window) != 2:
                raise SessionError("window must be [LB, UB]")
            window = (q3(body.window[0]), q3(body.window[1]))

        def run():
            with locks[sid]:
                return sess.ask(ws, body.planId, body.step,
                                _parse_action(body.action), body.strategy,
                                window)

        future = executor.submit(run)
        try:
            node = future.result(timeout=ASK_SYNC_WAIT_SECONDS)
        except (TimeoutError, FutureTimeoutError):
            token = uuid.uuid4().hex[:12]
            pending[token] = future
            response.status_code = 202
            return {"token": token}
        except PlanwhyError as exc:
            return _error_response(exc)
        return node_descriptor(node)

    @app.get("/sessions/{sid}/tasks/{token}")
    def poll_task(sid: str, token: str):
        get_ws(sid)
        if token not in pending:
            raise UnknownIdError(f"unknown task token {token}")
        future = pending[token]
        if not future.done():
            return {"status": "pending"}
        del pending[token]
        try:
            node = future.result()
        except PlanwhyError as exc:
            return _error_response(exc)
        return {"status": "done", "node": node_descriptor(node)}

    @app.post("/sessions/{sid}/compare")
    def post_compare(sid: str, body: CompareBody):
        return sess.compare(get_ws(sid), body.planIds, body.metrics)

    @app.post("/sessions/{sid}/metrics", status_code=201)
    def post_metric(sid: str, body: MetricBody):
        ws = get_ws(sid)
        weights = tuple((k, q3(v)) for k, v in (body.weights or {}).items())
        sess.add_metric(ws, sess.Metric(body.name, body.kind, weights))
        return {"metrics": sorted(ws.metrics)}

    @app.post("/sessions/{sid}/annotations", status_code=201)
    def post_annotation(sid: str, body: AnnotationBody):
        ws = get_ws(sid)
        ws.annotations.append(body.text)
        return {"annotations": list(ws.annotations)}

    @app.post("/sessions/{sid}/save")
    def post_save(sid: str):
        return {"workspace": sess.save_workspace(get_ws(sid)).decode()}

    @app.post("/sessions/load", status_code=201)
    def post_load(body: LoadBody):
        ws = sess.load_workspace(body.workspace.encode())
        sid = uuid.uuid4().hex[:12]
        workspaces[sid] = ws
        locks[sid] = threading.Lock()
        return {"sessionId": sid,
                "nodes": [node_descriptor(n) for _, n in sorted(ws.nodes.items())]}

    return app
