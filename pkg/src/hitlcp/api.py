"""REST surface over the lifecycle service.

Responses are rendered with canonical JSON (sorted keys, compact) so that
identical state always produces byte-identical bodies — polling clients and
the replay tests rely on that.
"""

from __future__ import annotations

from contextlib import asynccontextmanager

from fastapi import FastAPI, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from starlette.concurrency import run_in_threadpool

from .core import RequestValidationError, canonical_json
from .org import OrgModelError, UnknownUser
from .service import (
    AlreadyResolved,
    HitlService,
    InvalidResponse,
    ModifyWithoutAction,
    NotParticipant,
    UnknownRequest,
)
from .store import StorageError


def _json(content, status_code: int = 200) -> Response:
    return Response(
        content=canonical_json(content),
        status_code=status_code,
        media_type="application/json",
    )


def create_app(service: HitlService) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        service.start_background()
        yield
        service.stop_background()

    app = FastAPI(title="hitlcp", lifespan=lifespan)
    app.state.service = service
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(StorageError)
    async def _storage_error(request: Request, exc: StorageError):
        return _json({"error": "storage_failure", "detail": str(exc)}, 503)

    async def _body(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise RequestValidationError([])
        if not isinstance(body, dict):
            raise RequestValidationError([])
        return body

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return _json(
            {"error": "validation_failed", "errors": [e.to_dict() for e in exc.errors]},
            400,
        )

    @app.post("/api/hitl/request")
    async def submit_request(request: Request):
        body = await _body(request)
        result = await run_in_threadpool(service.submit_request, body)
        content = {
            "request_id": result.request_id,
            "status": result.status.value,
            "disposition_reason": result.disposition_reason,
        }
        if result.role_unresolved:
            content["error"] = "role_unresolved"
            content["detail"] = result.detail
            return _json(content, 422)
        return _json(content)

    @app.get("/api/hitl/get-decision")
    async def get_decision(request_id: str = Query(...)):
        try:
            return _json(service.get_decision(request_id))
        except UnknownRequest as exc:
            return _json({"error": "unknown_request", "detail": str(exc)}, 404)

    @app.post("/api/hitl/respond")
    async def respond(request: Request):
        body = await _body(request)
        try:
            result = await run_in_threadpool(
                service.submit_response,
                body.get("request_id", ""),
                body.get("user_id", ""),
                body.get("outcome", ""),
                body.get("modified_action"),
                body.get("enrichment"),
                body.get("comment"),
            )
            return _json(result)
        except UnknownRequest as exc:
            return _json({"error": "unknown_request", "detail": str(exc)}, 404)
        except NotParticipant as exc:
            return _json({"error": "not_a_participant", "detail": str(exc)}, 403)
        except AlreadyResolved as exc:
            return _json(
                {"error": "already_resolved", "detail": str(exc), "status": exc.status.value},
                409,
            )
        except ModifyWithoutAction as exc:
            return _json({"error": "modify_requires_modified_action", "detail": str(exc)}, 422)
        except InvalidResponse as exc:
            return _json({"error": "invalid_response", "detail": str(exc)}, 400)

    @app.get("/api/hitl/pending")
    async def pending(user_id: str = Query(...)):
        try:
            return _json({"user_id": user_id, "items": service.list_pending(user_id)})
        except UnknownUser as exc:
            return _json({"error": "unknown_user", "detail": str(exc)}, 404)

    @app.post("/api/admin/reload-org")
    async def reload_org(request: Request):
        body = await _body(request)
        try:
            model = await run_in_threadpool(service.reload_org_model, body)
        except OrgModelError as exc:
            return _json({"error": "invalid_org_model", "detail": str(exc)}, 400)
        return _json({"status": "ok", "users": sorted(model.users)})

    @app.get("/api/hitl/descriptor")
    async def descriptor():
        return _json(service.descriptor())

    @app.get("/api/hitl/audit")
    async def audit(
        request_id: str | None = Query(default=None),
        offset: int = Query(default=0, ge=0),
        limit: int = Query(default=100, ge=1, le=1000),
    ):
        if request_id is not None:
            return _json({"request_id": request_id, "records": service.audit_for(request_id)})
        records, next_offset = service.audit_page(offset, limit)
        return _json({"records": records, "next_offset": next_offset})

    @app.get("/api/hitl/suggestions")
    async def suggestions(threshold: int = Query(default=5, ge=1)):
        return _json({"threshold": threshold, "suggestions": service.suggestions(threshold)})

    @app.get("/healthz")
    async def healthz():
        return _json({"status": "ok"})

    return app
