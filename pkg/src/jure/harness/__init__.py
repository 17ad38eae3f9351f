from jure.harness.batch import (
    MAX_PARALLELISM,
    BatchSummary,
    IoFailure,
    RunConfig,
    emit_reports,
    report_path,
    run_batch,
    trace_path,
)
from jure.harness.manifest import (
    DuplicateId,
    Manifest,
    ParseError,
    dump_manifest,
    load_manifest,
    parse_record,
    sidecar_path,
)

__all__ = [
    "BatchSummary",
    "DuplicateId",
    "IoFailure",
    "MAX_PARALLELISM",
    "Manifest",
    "ParseError",
    "RunConfig",
    "dump_manifest",
    "emit_reports",
    "load_manifest",
    "parse_record",
    "report_path",
    "run_batch",
    "sidecar_path",
    "trace_path",
]
