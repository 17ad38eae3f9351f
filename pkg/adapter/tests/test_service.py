"""HTTP surface of the adapter, exercised with the orchestrator's own client.

Every request here is built with jure's wire helpers and every response is
re-parsed with jure's envelope types: if either side drifted from the
protocol these tests would fail on the other side's validator, not ours.
"""

import base64
import concurrent.futures

import httpx
import numpy as np
import pytest

from jure.core.context import ContextValue
from jure.core.types import ImageRef
from jure.experts.descriptors import SchemaViolation
from jure.experts.reports import Detections
from jure.transport.client import (
    HEALTHY,
    fetch_descriptor,
    health_check,
    remote_expert_fn,
    remote_invoke,
)
from jure.transport.wire import ExpertRequest, ExpertResponse, encode_args, wire_decode_value
from jure_adapter.raster import MEDIA_RASTER_PNG, data_uri
from jure_adapter.service import DESCRIPTOR, EXPERT_NAME, QUEUE_LIMIT

RED = (220, 40, 40)
BLUE = (50, 90, 220)


def canvas(width: int, height: int, rgb=(255, 255, 255)) -> np.ndarray:
    img = np.zeros((height, width, 3), dtype=np.uint8)
    img[:, :] = rgb[::-1]
    return img


def paint(img: np.ndarray, x: int, y: int, w: int, h: int, rgb) -> None:
    img[y : y + h, x : x + w] = rgb[::-1]


def red_rect_image() -> np.ndarray:
    img = canvas(64, 64)
    paint(img, 10, 12, 20, 8, RED)
    return img


def image_arg(img: np.ndarray, media_type: str = MEDIA_RASTER_PNG) -> dict:
    return {"uri": data_uri(img), "media_type": media_type}


def post_raw(service, body, name: str = EXPERT_NAME) -> httpx.Response:
    url = f"{service.base_url}/expert/{name}"
    if isinstance(body, (bytes, str)):
        return httpx.post(url, content=body, headers={"content-type": "application/json"}, timeout=10.0)
    return httpx.post(url, json=body, timeout=10.0)


def parse(response: httpx.Response) -> ExpertResponse:
    """Round-trip through jure's envelope validator."""
    return ExpertResponse.from_wire(response.json())


class TestHealth:
    def test_healthz_reports_capacity(self, service):
        body = httpx.get(f"{service.base_url}/healthz", timeout=10.0).json()
        assert body == {
            "status": "ok",
            "experts": [EXPERT_NAME],
            "model": "blob-v1",
            "threshold": 0.5,
            "max_concurrency": 1,
            "queue_limit": QUEUE_LIMIT,
        }

    def test_orchestrator_health_probe(self, service):
        assert health_check(service.base_url) == HEALTHY


class TestDescribe:
    def test_descriptor_served_verbatim(self, service):
        response = httpx.get(f"{service.base_url}/expert/{EXPERT_NAME}/describe", timeout=10.0)
        assert response.status_code == 200
        assert response.json() == DESCRIPTOR

    def test_descriptor_parses_on_the_orchestrator_side(self, service):
        descriptor = fetch_descriptor(service.base_url, EXPERT_NAME)
        assert descriptor.name == EXPERT_NAME
        assert descriptor.output_tag == "detections"
        assert "raster-png" in descriptor.expertise
        assert [(s.name, s.type, s.required) for s in descriptor.input_schema] == [
            ("image", "image", True),
            ("labels", "string_list", False),
        ]

    def test_unknown_name_is_404(self, service):
        response = httpx.get(f"{service.base_url}/expert/mystery/describe", timeout=10.0)
        assert response.status_code == 404
        assert response.json() == {"detail": "no expert registered under 'mystery'"}


class TestInvoke:
    def test_detections_round_trip(self, service):
        descriptor = fetch_descriptor(service.base_url, EXPERT_NAME)
        request = ExpertRequest(
            request_id="svc-001",
            expert=EXPERT_NAME,
            args=encode_args(
                descriptor,
                {
                    "image": ImageRef(uri=data_uri(red_rect_image()), media_type=MEDIA_RASTER_PNG),
                    "labels": ["red"],
                },
            ),
            deadline_ms=5000,
        )
        response = post_raw(service, request.to_wire())
        assert response.status_code == 200
        envelope = parse(response)
        assert envelope.status == "ok"
        assert envelope.request_id == "svc-001"
        assert isinstance(envelope.latency_ms, int) and envelope.latency_ms >= 0
        value = wire_decode_value(envelope.value)
        assert isinstance(value, ContextValue)
        assert value.tag == "detections"
        assert isinstance(value.value, Detections)
        assert value.value.to_dict() == {
            "items": [{"label": "red", "bbox": [10, 12, 20, 8], "confidence": 1.0}]
        }

    def test_remote_invoke_client_path(self, service):
        request = ExpertRequest(
            request_id="svc-002",
            expert=EXPERT_NAME,
            args={"image": image_arg(red_rect_image())},
        )
        envelope = remote_invoke(service.base_url, request)
        assert envelope.status == "ok"
        items = wire_decode_value(envelope.value).value.items
        assert [d.label for d in items] == ["red"]

    def test_remote_expert_fn_maps_schema_violations(self, service):
        descriptor = fetch_descriptor(service.base_url, EXPERT_NAME)
        fn = remote_expert_fn(service.base_url, descriptor)
        out = fn({"image": ImageRef(uri=data_uri(red_rect_image()), media_type=MEDIA_RASTER_PNG)})
        assert out.tag == "detections"
        with pytest.raises(SchemaViolation, match="unsupported media type 'scene-json'"):
            fn({"image": ImageRef(uri=data_uri(red_rect_image()), media_type="scene-json")})

    def test_labels_filter_applies_remotely(self, service):
        img = canvas(80, 40)
        paint(img, 5, 5, 10, 10, RED)
        paint(img, 40, 5, 10, 10, BLUE)
        request = ExpertRequest(
            request_id="svc-003",
            expert=EXPERT_NAME,
            args={"image": image_arg(img), "labels": ["blue"]},
        )
        envelope = parse(post_raw(service, request.to_wire()))
        items = wire_decode_value(envelope.value).value.items
        assert [d.label for d in items] == ["blue"]

    def test_concurrent_requests_all_answered(self, service):
        body = ExpertRequest(
            request_id="svc-004", expert=EXPERT_NAME, args={"image": image_arg(red_rect_image())}
        ).to_wire()
        with concurrent.futures.ThreadPoolExecutor(max_workers=QUEUE_LIMIT) as pool:
            responses = list(pool.map(lambda _: post_raw(service, body), range(QUEUE_LIMIT)))
        assert [r.status_code for r in responses] == [200] * QUEUE_LIMIT
        assert all(parse(r).status == "ok" for r in responses)


def request_with_args(args: dict) -> dict:
    return {"request_id": "svc-bad", "expert": EXPERT_NAME, "args": args}


class TestArgumentRejections:
    def check(self, service, args: dict, message: str):
        response = post_raw(service, request_with_args(args))
        assert response.status_code == 422
        envelope = parse(response)
        assert envelope.status == "schema_violation"
        assert envelope.request_id == "svc-bad"
        assert envelope.message == message
        return envelope

    def test_wrong_media_type(self, service):
        self.check(
            service,
            {"image": image_arg(red_rect_image(), media_type="scene-json")},
            "argument 'image': unsupported media type 'scene-json', expected 'raster-png'",
        )

    def test_missing_image(self, service):
        self.check(service, {}, "argument 'image': required argument missing")

    def test_unknown_argument(self, service):
        self.check(
            service,
            {"image": image_arg(red_rect_image()), "extra": 1},
            "argument 'extra': not declared in input schema",
        )

    def test_labels_wrong_type(self, service):
        self.check(
            service,
            {"image": image_arg(red_rect_image()), "labels": "red"},
            "argument 'labels': expected string_list, got 'red'",
        )

    def test_malformed_image_payload(self, service):
        self.check(
            service,
            {"image": {"uri": 5, "media_type": MEDIA_RASTER_PNG}},
            "argument 'image': malformed image payload: expected {uri, media_type}",
        )

    def test_undecodable_png_is_a_failure(self, service):
        uri = "data:image/png;base64," + base64.b64encode(b"not a png").decode("ascii")
        response = post_raw(
            service, request_with_args({"image": {"uri": uri, "media_type": MEDIA_RASTER_PNG}})
        )
        assert response.status_code == 500
        envelope = parse(response)
        assert envelope.status == "failure"
        assert envelope.message == "bytes do not decode as a PNG image"


class TestEnvelopeRejections:
    def check(self, service, body, message: str, request_id: str = "", name: str = EXPERT_NAME):
        response = post_raw(service, body, name=name)
        assert response.status_code == 422
        envelope = parse(response)
        assert envelope.status == "schema_violation"
        assert envelope.request_id == request_id
        assert envelope.message == message

    def test_non_json_body(self, service):
        self.check(service, b"{nope", "request body is not valid JSON")

    def test_non_object_body(self, service):
        self.check(service, [1, 2], "request body must be an object")

    def test_missing_request_id(self, service):
        self.check(service, {"expert": EXPERT_NAME, "args": {}}, "request missing field 'request_id'")

    def test_unknown_fields(self, service):
        body = {"request_id": "x", "expert": EXPERT_NAME, "args": {}, "color": "red"}
        self.check(service, body, "unknown request fields: ['color']")

    def test_args_must_be_object(self, service):
        body = {"request_id": "x", "expert": EXPERT_NAME, "args": [1]}
        self.check(service, body, "args must be an object")

    def test_deadline_must_be_integer(self, service):
        body = {"request_id": "x", "expert": EXPERT_NAME, "args": {}, "deadline_ms": True}
        self.check(service, body, "deadline_ms must be an integer")

    def test_expert_path_mismatch(self, service):
        body = {"request_id": "x", "expert": "objectDetection", "args": {}}
        self.check(
            service,
            body,
            "request names expert 'objectDetection' but was posted to 'objectDetectionRaster'",
            request_id="x",
        )

    def test_unknown_expert_is_404_failure(self, service):
        body = {"request_id": "x", "expert": "ghost", "args": {}}
        response = post_raw(service, body, name="ghost")
        assert response.status_code == 404
        envelope = parse(response)
        assert envelope.status == "failure"
        assert envelope.message == "no expert registered under 'ghost'"

    def test_oversized_body(self, service):
        pad = b'{"pad": "' + b"x" * (8 * 1024 * 1024) + b'"}'
        self.check(service, pad, "request body exceeds 8 MiB")
