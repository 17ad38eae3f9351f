"""Wire encoding, expert service hosting, and the remote invocation client."""

from jure.transport.client import (
    DEFAULT_DEADLINE_MS,
    DEGRADED,
    HEALTHY,
    UNREACHABLE,
    ConnectFailure,
    DeadlineExceeded,
    ProtocolError,
    fetch_descriptor,
    health_check,
    remote_expert_fn,
    remote_invoke,
    remote_registry,
)
from jure.transport.server import (
    TOKEN_HEADER,
    BindFailure,
    ServiceHandle,
    build_app,
    endpoints_for,
    serve_experts,
)
from jure.transport.wire import (
    MAX_BODY_BYTES,
    STATUS_FAILURE,
    STATUS_OK,
    STATUS_SCHEMA_VIOLATION,
    ExpertRequest,
    ExpertResponse,
    WireError,
    args_digest,
    canonical_dumps,
    canonical_value_bytes,
    decode_args,
    encode_args,
    wire_decode_value,
    wire_encode_value,
)

__all__ = [
    "MAX_BODY_BYTES",
    "STATUS_OK",
    "STATUS_SCHEMA_VIOLATION",
    "STATUS_FAILURE",
    "ExpertRequest",
    "ExpertResponse",
    "WireError",
    "canonical_dumps",
    "canonical_value_bytes",
    "wire_encode_value",
    "wire_decode_value",
    "encode_args",
    "decode_args",
    "args_digest",
    "BindFailure",
    "ServiceHandle",
    "build_app",
    "serve_experts",
    "endpoints_for",
    "TOKEN_HEADER",
    "ConnectFailure",
    "DeadlineExceeded",
    "ProtocolError",
    "remote_invoke",
    "fetch_descriptor",
    "health_check",
    "remote_expert_fn",
    "remote_registry",
    "HEALTHY",
    "DEGRADED",
    "UNREACHABLE",
    "DEFAULT_DEADLINE_MS",
]
