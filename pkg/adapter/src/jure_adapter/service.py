"""HTTP service speaking the expert wire protocol.

Routes:

* ``POST /expert/objectDetectionRaster``: invoke; 200 ok / 422
  schema_violation / 500 failure, enveloped as
  ``{request_id, status, latency_ms, value | message}``.
* ``GET /expert/objectDetectionRaster/describe``: the descriptor, verbatim.
* ``GET /healthz``: liveness plus concurrency metadata.

The envelope, status strings, and HTTP codes mirror the orchestrator's own
expert service byte for byte, so a registry can bind this endpoint without
knowing it is a foreign process.
"""

from __future__ import annotations

import json
import socket
import threading
import time

import uvicorn
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from jure_adapter.config import AdapterConfig, AdapterError
from jure_adapter.detector import BlobDetector, load_detector
from jure_adapter.raster import (
    MEDIA_RASTER_PNG,
    RasterDecodeFailure,
    UnsupportedMediaType,
    load_raster,
)

EXPERT_NAME = "objectDetectionRaster"

MAX_BODY_BYTES = 8 * 1024 * 1024
QUEUE_LIMIT = 8

STATUS_OK = "ok"
STATUS_SCHEMA_VIOLATION = "schema_violation"
STATUS_FAILURE = "failure"

DESCRIPTOR = {
    "name": EXPERT_NAME,
    "expertise": (
        "Locates objects in a raster image (media type raster-png only) by "
        "color-blob analysis. Given label queries it keeps only detections "
        "matching those labels; without queries it enumerates every blob."
    ),
    "input_schema": [
        {"name": "image", "type": "image", "required": True},
        {"name": "labels", "type": "string_list", "required": False},
    ],
    "output_schema": {
        "tag": "detections",
        "description": "Detected color blobs with bounding boxes and fill-ratio confidences.",
    },
}

_REQUEST_FIELDS = {"request_id", "expert", "args", "deadline_ms"}


class BindFailure(AdapterError):
    """The requested bind address could not be claimed."""


class _RequestRejected(Exception):
    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


def _parse_envelope(payload) -> tuple[str, str, dict]:
    if not isinstance(payload, dict):
        raise _RequestRejected("request body must be an object")
    extra = set(payload) - _REQUEST_FIELDS
    if extra:
        raise _RequestRejected(f"unknown request fields: {sorted(extra)}")
    for field in ("request_id", "expert", "args"):
        if field not in payload:
            raise _RequestRejected(f"request missing field {field!r}")
    request_id, expert, args = payload["request_id"], payload["expert"], payload["args"]
    if not isinstance(request_id, str) or not isinstance(expert, str):
        raise _RequestRejected("request_id and expert must be strings")
    if not isinstance(args, dict):
        raise _RequestRejected("args must be an object")
    deadline = payload.get("deadline_ms")
    if deadline is not None and (isinstance(deadline, bool) or not isinstance(deadline, int)):
        raise _RequestRejected("deadline_ms must be an integer")
    return request_id, expert, args


def _parse_args(args: dict) -> tuple[dict, list[str] | None]:
    """Validate against the declared schema; returns (image ref, labels)."""
    known = {spec["name"] for spec in DESCRIPTOR["input_schema"]}
    for name in args:
        if name not in known:
            raise _RequestRejected(f"argument {name!r}: not declared in input schema")
    if "image" not in args or args["image"] is None:
        raise _RequestRejected("argument 'image': required argument missing")
    image = args["image"]
    if (
        not isinstance(image, dict)
        or set(image) != {"uri", "media_type"}
        or not isinstance(image.get("uri"), str)
        or not isinstance(image.get("media_type"), str)
    ):
        raise _RequestRejected(
            "argument 'image': malformed image payload: expected {uri, media_type}"
        )
    labels = args.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or not all(isinstance(v, str) for v in labels):
            raise _RequestRejected(f"argument 'labels': expected string_list, got {labels!r}")
    return image, labels


def build_app(detector: BlobDetector, config: AdapterConfig) -> FastAPI:
    app = FastAPI(openapi_url=None, docs_url=None, redoc_url=None)
    model_lock = threading.Lock()  # the detector is a single worker
    slots = threading.Semaphore(QUEUE_LIMIT)

    @app.get("/healthz")
    def healthz():
        return {
            "status": "ok",
            "experts": [EXPERT_NAME],
            "model": config.model,
            "threshold": config.threshold,
            "max_concurrency": 1,
            "queue_limit": QUEUE_LIMIT,
        }

    @app.get("/expert/{name}/describe")
    def describe(name: str):
        if name != EXPERT_NAME:
            return JSONResponse(
                {"detail": f"no expert registered under {name!r}"}, status_code=404
            )
        return DESCRIPTOR

    @app.post("/expert/{name}")
    async def invoke(name: str, request: Request):
        started = time.perf_counter_ns()

        def reply(request_id: str, status: str, http: int, body: dict | None, message: str | None):
            envelope: dict = {
                "request_id": request_id,
                "status": status,
                "latency_ms": (time.perf_counter_ns() - started) // 1_000_000,
            }
            if status == STATUS_OK:
                envelope["value"] = body
            else:
                envelope["message"] = message
            return JSONResponse(envelope, status_code=http)

        def rejected(request_id: str, message: str):
            return reply(request_id, STATUS_SCHEMA_VIOLATION, 422, None, message)

        raw = await request.body()
        if len(raw) > MAX_BODY_BYTES:
            return rejected("", "request body exceeds 8 MiB")
        try:
            payload = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, ValueError):
            return rejected("", "request body is not valid JSON")
        try:
            request_id, expert, args = _parse_envelope(payload)
        except _RequestRejected as exc:
            return rejected("", exc.message)
        if expert != name:
            return rejected(
                request_id, f"request names expert {expert!r} but was posted to {name!r}"
            )
        if name != EXPERT_NAME:
            return reply(
                request_id,
                STATUS_FAILURE,
                404,
                None,
                f"no expert registered under {name!r}",
            )
        try:
            image, labels = _parse_args(args)
        except _RequestRejected as exc:
            return rejected(request_id, exc.message)
        if not slots.acquire(blocking=False):
            return reply(request_id, STATUS_FAILURE, 500, None, "request queue full")
        try:
            pixels = load_raster(image["uri"], image["media_type"])
            with model_lock:
                detections = detector.detect(pixels, labels)
        except UnsupportedMediaType as exc:
            return rejected(request_id, f"argument 'image': {exc}")
        except RasterDecodeFailure as exc:
            return reply(request_id, STATUS_FAILURE, 500, None, str(exc))
        finally:
            slots.release()
        return reply(
            request_id,
            STATUS_OK,
            200,
            {"tag": "detections", "value": {"items": detections}},
            None,
        )

    return app


class AdapterHandle:
    """A running adapter service; ``stop()`` drains in-flight requests."""

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

    def __enter__(self) -> "AdapterHandle":
        return self

    def __exit__(self, *exc) -> None:
        self.stop()


def _parse_bind(bind: str) -> tuple[str, int]:
    host, _, port_text = bind.rpartition(":")
    if not host or not port_text.isdigit():
        raise BindFailure(f"bind address must be host:port, got {bind!r}")
    return host, int(port_text)


def adapter_serve(config: AdapterConfig, wait_ready: float = 10.0) -> AdapterHandle:
    """Load the configured model and serve it on a background thread."""
    detector = load_detector(config)
    host, port = _parse_bind(config.bind)
    if port == 0:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        try:
            probe.bind((host, 0))
            port = probe.getsockname()[1]
        except OSError as exc:
            raise BindFailure(f"cannot bind {config.bind!r}: {exc}") from exc
        finally:
            probe.close()

    app = build_app(detector, config)
    server_config = uvicorn.Config(app, host=host, port=port, log_level="warning", access_log=False)
    server = uvicorn.Server(server_config)
    thread = threading.Thread(target=server.run, name=f"jure-adapter-{port}", daemon=True)
    thread.start()
    deadline = time.monotonic() + wait_ready
    while not server.started:
        if not thread.is_alive():
            raise BindFailure(f"server exited before startup on {host}:{port}")
        if time.monotonic() > deadline:
            server.should_exit = True
            raise BindFailure(f"server did not start within {wait_ready}s on {host}:{port}")
        time.sleep(0.01)
    return AdapterHandle(server, thread, host, port)
