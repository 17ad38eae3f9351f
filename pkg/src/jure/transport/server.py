"""HTTP hosting for an expert registry.

Routes, per the wire contract:

* ``POST /expert/{name}``: invoke; 200 ok / 422 schema_violation / 500 failure.
* ``GET /expert/{name}/describe``: the registered descriptor, verbatim.
* ``GET /healthz``: ``{"status": "ok"}``.

All bodies are UTF-8 JSON capped at 8 MiB.  An optional shared token guards
mutation-free deployments at desk scale; anything stronger is out of scope.
"""

from __future__ import annotations

import json
import socket
import threading
import time
from typing import Sequence

import uvicorn
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from jure.core.errors import JureError
from jure.experts.descriptors import SchemaViolation, UnknownExpert
from jure.experts.registry import ExpertRegistry
from jure.transport.wire import (
    MAX_BODY_BYTES,
    STATUS_FAILURE,
    STATUS_OK,
    STATUS_SCHEMA_VIOLATION,
    ExpertRequest,
    ExpertResponse,
    WireError,
    decode_args,
    wire_encode_value,
)

TOKEN_HEADER = "x-jure-token"


class BindFailure(JureError):
    """The requested bind address could not be claimed."""


def _envelope(response: ExpertResponse, http_status: int) -> JSONResponse:
    return JSONResponse(response.to_wire(), status_code=http_status)


def build_app(registry: ExpertRegistry, token: str | None = None) -> FastAPI:
    app = FastAPI(openapi_url=None, docs_url=None, redoc_url=None)

    def authorized(request: Request) -> bool:
        return token is None or request.headers.get(TOKEN_HEADER) == token

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "experts": list(registry.names)}

    @app.get("/expert/{name}/describe")
    def describe(name: str, request: Request):
        if not authorized(request):
            return JSONResponse({"detail": "bad token"}, status_code=401)
        try:
            return registry.describe(name)
        except UnknownExpert as exc:
            return JSONResponse({"detail": str(exc)}, status_code=404)

    @app.post("/expert/{name}")
    async def invoke(name: str, request: Request):
        started = time.perf_counter_ns()

        def elapsed_ms() -> int:
            return (time.perf_counter_ns() - started) // 1_000_000

        def fail(request_id: str, status: str, http: int, message: str) -> JSONResponse:
            return _envelope(
                ExpertResponse(
                    request_id=request_id,
                    status=status,
                    message=message,
                    latency_ms=elapsed_ms(),
                ),
                http,
            )

        if not authorized(request):
            return JSONResponse({"detail": "bad token"}, status_code=401)
        body = await request.body()
        if len(body) > MAX_BODY_BYTES:
            return fail("", STATUS_SCHEMA_VIOLATION, 422, "request body exceeds 8 MiB")
        try:
            payload = json.loads(body.decode("utf-8"))
        except (UnicodeDecodeError, ValueError):
            return fail("", STATUS_SCHEMA_VIOLATION, 422, "request body is not valid JSON")
        try:
            expert_request = ExpertRequest.from_wire(payload)
        except WireError as exc:
            return fail("", STATUS_SCHEMA_VIOLATION, 422, str(exc))
        request_id = expert_request.request_id
        if expert_request.expert != name:
            return fail(
                request_id,
                STATUS_SCHEMA_VIOLATION,
                422,
                f"request names expert {expert_request.expert!r} but was posted to {name!r}",
            )
        if name not in registry:
            return fail(request_id, STATUS_FAILURE, 404, f"no expert registered under {name!r}")
        try:
            descriptor = registry.descriptor(name)
            args = decode_args(descriptor, expert_request.args)
            value = registry.invoke(name, args)
        except SchemaViolation as exc:
            return fail(request_id, STATUS_SCHEMA_VIOLATION, 422, str(exc))
        except JureError as exc:
            return fail(request_id, STATUS_FAILURE, 500, str(exc))
        return _envelope(
            ExpertResponse(
                request_id=request_id,
                status=STATUS_OK,
                value=wire_encode_value(value),
                latency_ms=elapsed_ms(),
            ),
            200,
        )

    return app


class ServiceHandle:
    """A running expert service; ``stop()`` drains in-flight requests."""

    def __init__(self, server: uvicorn.Server, thread: threading.Thread, host: str, port: int):
        self._server = server
        self._thread = thread
        self.host = host
        self.port = port

    @property
    def base_url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def stop(self, timeout: float = 10.0) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=timeout)

    def __enter__(self) -> "ServiceHandle":
        return self

    def __exit__(self, *exc) -> None:
        self.stop()


def _parse_bind(bind: str) -> tuple[str, int]:
    host, _, port_text = bind.rpartition(":")
    if not host or not port_text.isdigit():
        raise BindFailure(f"bind address must be host:port, got {bind!r}")
    return host, int(port_text)


def serve_experts(
    registry: ExpertRegistry,
    bind: str = "127.0.0.1:0",
    token: str | None = None,
    wait_ready: float = 10.0,
) -> ServiceHandle:
    """Serve the registry on a background thread and return a live handle."""
    host, port = _parse_bind(bind)
    if port == 0:
        # Claim a concrete port up front so the handle can report its URL.
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        try:
            probe.bind((host, 0))
            port = probe.getsockname()[1]
        except OSError as exc:
            raise BindFailure(f"cannot bind {bind!r}: {exc}") from exc
        finally:
            probe.close()

    app = build_app(registry, token=token)
    config = uvicorn.Config(app, host=host, port=port, log_level="warning", access_log=False)
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, name=f"jure-experts-{port}", daemon=True)
    thread.start()
    deadline = time.monotonic() + wait_ready
    while not server.started:
        if not thread.is_alive():
            raise BindFailure(f"server exited before startup on {host}:{port}")
        if time.monotonic() > deadline:
            server.should_exit = True
            raise BindFailure(f"server did not start within {wait_ready}s on {host}:{port}")
        time.sleep(0.01)
    return ServiceHandle(server, thread, host, port)


def endpoints_for(handle: ServiceHandle, names: Sequence[str]) -> dict[str, str]:
    """Expert-name to base-URL map for wiring remote registries."""
    return {name: handle.base_url for name in names}
