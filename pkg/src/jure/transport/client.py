"""HTTP client side of the expert protocol.

Invocations are POSTs and are never retried (an expert call is not assumed
idempotent); descriptor fetches and health checks are GETs and may retry.
Remote errors surface as the same exception taxonomy the in-process path
uses, so the orchestrator cannot tell the difference.
"""

from __future__ import annotations

import uuid

import httpx

from jure.core.context import ContextValue
from jure.core.errors import JureError
from jure.experts.descriptors import ExpertDescriptor, SchemaViolation
from jure.experts.registry import ExpertFailure, ExpertRegistry
from jure.transport.server import TOKEN_HEADER
from jure.transport.wire import (
    STATUS_OK,
    STATUS_SCHEMA_VIOLATION,
    ExpertRequest,
    ExpertResponse,
    WireError,
    encode_args,
    wire_decode_value,
)

HEALTHY = "healthy"
DEGRADED = "degraded"
UNREACHABLE = "unreachable"

DEFAULT_DEADLINE_MS = 30_000


class ConnectFailure(JureError):
    """The endpoint could not be reached at all."""


class DeadlineExceeded(JureError):
    """No response arrived within the request deadline."""


class ProtocolError(JureError):
    """The endpoint answered with something outside the wire contract."""


def _headers(token: str | None) -> dict:
    headers = {"content-type": "application/json"}
    if token is not None:
        headers[TOKEN_HEADER] = token
    return headers


def remote_invoke(
    endpoint: str, request: ExpertRequest, token: str | None = None
) -> ExpertResponse:
    """POST one invocation and return its envelope; POSTs are never retried."""
    deadline_ms = request.deadline_ms or DEFAULT_DEADLINE_MS
    url = f"{endpoint.rstrip('/')}/expert/{request.expert}"
    try:
        http_response = httpx.post(
            url,
            json=request.to_wire(),
            headers=_headers(token),
            timeout=deadline_ms / 1000.0,
        )
    except httpx.TimeoutException as exc:
        raise DeadlineExceeded(f"no response from {url} within {deadline_ms} ms") from exc
    except httpx.HTTPError as exc:
        raise ConnectFailure(f"cannot reach {url}: {exc}") from exc
    try:
        payload = http_response.json()
    except ValueError as exc:
        raise ProtocolError(f"{url} returned non-JSON body") from exc
    try:
        response = ExpertResponse.from_wire(payload)
    except WireError as exc:
        raise ProtocolError(f"{url} returned malformed envelope: {exc}") from exc
    if response.request_id != request.request_id:
        raise ProtocolError(
            f"response request_id {response.request_id!r} does not echo {request.request_id!r}"
        )
    return response


def fetch_descriptor(
    endpoint: str, name: str, token: str | None = None, retries: int = 2
) -> ExpertDescriptor:
    """GET the descriptor; idempotent, so transient failures retry."""
    url = f"{endpoint.rstrip('/')}/expert/{name}/describe"
    last_error: Exception | None = None
    for _attempt in range(retries + 1):
        try:
            http_response = httpx.get(url, headers=_headers(token), timeout=10.0)
        except httpx.HTTPError as exc:
            last_error = exc
            continue
        if http_response.status_code != 200:
            raise ProtocolError(f"{url} answered HTTP {http_response.status_code}")
        try:
            return ExpertDescriptor.from_dict(http_response.json())
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"{url} returned malformed descriptor: {exc}") from exc
    raise ConnectFailure(f"cannot reach {url}: {last_error}")


def health_check(endpoint: str, token: str | None = None) -> str:
    url = f"{endpoint.rstrip('/')}/healthz"
    try:
        http_response = httpx.get(url, headers=_headers(token), timeout=10.0)
    except httpx.HTTPError:
        return UNREACHABLE
    return HEALTHY if http_response.status_code == 200 else DEGRADED


def remote_expert_fn(
    endpoint: str,
    descriptor: ExpertDescriptor,
    token: str | None = None,
    deadline_ms: int = DEFAULT_DEADLINE_MS,
):
    """An ExpertFn that forwards invocations to a remote endpoint."""

    def fn(args: dict) -> ContextValue:
        request = ExpertRequest(
            request_id=uuid.uuid4().hex,
            expert=descriptor.name,
            args=encode_args(descriptor, args),
            deadline_ms=deadline_ms,
        )
        response = remote_invoke(endpoint, request, token=token)
        if response.status == STATUS_OK:
            try:
                return wire_decode_value(response.value)
            except WireError as exc:
                raise ProtocolError(f"expert {descriptor.name!r}: {exc}") from exc
        if response.status == STATUS_SCHEMA_VIOLATION:
            raise SchemaViolation("<remote>", response.message or "schema violation")
        raise ExpertFailure(descriptor.name, response.message or "remote failure")

    return fn


def remote_registry(
    endpoints: dict[str, str], token: str | None = None, deadline_ms: int = DEFAULT_DEADLINE_MS
) -> ExpertRegistry:
    """Registry whose bindings all forward to remote services.

    ``endpoints`` maps expert name to service base URL; descriptors are
    fetched from each service at construction time.
    """
    registry = ExpertRegistry()
    for name in sorted(endpoints):
        descriptor = fetch_descriptor(endpoints[name], name, token=token)
        if descriptor.name != name:
            raise ProtocolError(
                f"endpoint for {name!r} describes itself as {descriptor.name!r}"
            )
        registry = registry.with_expert(
            descriptor, remote_expert_fn(endpoints[name], descriptor, token, deadline_ms)
        )
    return registry
