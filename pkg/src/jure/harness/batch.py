"""Batch execution and report emission.

Sessions are independent, so the batch fans out over a thread pool and the
only shared state is the filesystem.  Every per-instance artifact is written
atomically (tmp + rename) and aggregate files are produced by a single
writer after the pool drains, sorted by instance id; output bytes therefore
do not depend on parallelism or scheduling.  A killed batch loses only its
in-flight instances: finished instances are recognized by their report file
and skipped on the next run.
"""

from __future__ import annotations

import csv
import io
import json
import os
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from jure.core.errors import JureError
from jure.core.trace import TERM_COMPLETED, TERM_MAX_ITERATIONS, TraceJournal, replay_journal
from jure.core.types import EditInstance
from jure.experts.registry import ExpertRegistry
from jure.harness.manifest import Manifest
from jure.metrics.stats import invocation_frequency
from jure.orchestrator.loop import FinalReport, LoopLimits, run_jure, session_id_for

MAX_PARALLELISM = 64


class IoFailure(JureError):
    pass


@dataclass(frozen=True)
class RunConfig:
    backend: str  # "policy" or "llm"
    out_dir: Path
    experts: str = "local"  # "local" or a path to an endpoints JSON file
    limits: LoopLimits = field(default_factory=LoopLimits)
    parallelism: int = 1
    seed: int = 0
    max_parallelism: int = MAX_PARALLELISM

    def __post_init__(self) -> None:
        if self.backend not in ("policy", "llm"):
            raise ValueError(f"backend must be policy or llm, got {self.backend!r}")
        if not 1 <= self.parallelism <= self.max_parallelism:
            raise ValueError(
                f"parallelism must be in 1..{self.max_parallelism}, got {self.parallelism}"
            )


@dataclass
class BatchSummary:
    completed: int = 0
    limit_tripped: int = 0
    errored: int = 0

    def to_dict(self) -> dict:
        return {
            "completed": self.completed,
            "limit_tripped": self.limit_tripped,
            "errored": self.errored,
        }


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, "utf-8")
    os.replace(tmp, path)


def report_path(out_dir: Path, instance_id: str) -> Path:
    return out_dir / "reports" / f"{instance_id}.json"


def trace_path(out_dir: Path, instance_id: str) -> Path:
    return out_dir / "traces" / f"{instance_id}.jsonl"


def _run_one(instance: EditInstance, registry: ExpertRegistry, backend_factory, config: RunConfig):
    """Evaluate one instance and persist its report + journal; never raises."""
    out = {"instance_id": instance.id}
    try:
        backend = backend_factory()
        session = session_id_for(instance.id, backend.name)
        journal = TraceJournal(
            trace_path(config.out_dir, instance.id),
            session_id=session,
            instance_id=instance.id,
            backend=backend.name,
            started_at=datetime.now(timezone.utc).isoformat(),
        )
        result = run_jure(instance, registry, backend, limits=config.limits, journal=journal)
        out["report"] = result.report.to_dict()
        out["termination"] = result.trace.terminated.to_dict()
        out["session_id"] = session
    except Exception as exc:  # per-instance failures are recorded, not raised
        out["error"] = f"{type(exc).__name__}: {exc}"
        out["traceback"] = traceback.format_exc()
    _atomic_write(report_path(config.out_dir, instance.id), json.dumps(out, indent=2, sort_keys=True) + "\n")


def run_batch(
    manifest: Manifest,
    config: RunConfig,
    registry: ExpertRegistry,
    backend_factory,
) -> BatchSummary:
    """Run every instance once (skipping ones already on disk), then emit reports."""
    (config.out_dir / "reports").mkdir(parents=True, exist_ok=True)
    (config.out_dir / "traces").mkdir(parents=True, exist_ok=True)

    pending = [
        instance
        for instance in manifest.instances
        if not report_path(config.out_dir, instance.id).exists()
    ]
    if config.parallelism == 1:
        for instance in pending:
            _run_one(instance, registry, backend_factory, config)
    else:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            futures = [
                pool.submit(_run_one, instance, registry, backend_factory, config)
                for instance in pending
            ]
            for future in futures:
                future.result()

    summary = BatchSummary()
    for instance in manifest.instances:
        try:
            data = json.loads(report_path(config.out_dir, instance.id).read_text("utf-8"))
        except (OSError, json.JSONDecodeError):
            summary.errored += 1
            continue
        if "error" in data:
            summary.errored += 1
        else:
            kind = data["termination"]["kind"]
            if kind == TERM_COMPLETED:
                summary.completed += 1
            elif kind == TERM_MAX_ITERATIONS:
                summary.limit_tripped += 1
            else:
                summary.errored += 1
    emit_reports(config.out_dir, manifest, backend_name=config.backend, summary=summary)
    return summary


def _load_reports(out_dir: Path, manifest: Manifest) -> list[dict]:
    reports = []
    for instance in sorted(manifest.instances, key=lambda i: i.id):
        path = report_path(out_dir, instance.id)
        if not path.exists():
            continue
        data = json.loads(path.read_text("utf-8"))
        if "report" in data:
            reports.append(data)
    return reports


def _csv_text(header: list[str], rows: list[list]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def emit_reports(
    out_dir: Path,
    manifest: Manifest,
    backend_name: str,
    summary: BatchSummary | None = None,
) -> list[Path]:
    """Write the aggregate CSVs, labels map, and run summary; idempotent."""
    out_dir = Path(out_dir)
    written: list[Path] = []
    reports = _load_reports(out_dir, manifest)

    score_rows = []
    rating_rows = []
    for data in reports:
        report = FinalReport.from_dict(data["report"])
        for cand in report.candidates:
            score_rows.append([report.instance_id, cand.model_name, cand.score])
            rating_rows.append([report.instance_id, backend_name, cand.model_name, cand.score])
    aggregate = out_dir / "aggregate.csv"
    _atomic_write(aggregate, _csv_text(["instance_id", "model_name", "score"], score_rows))
    written.append(aggregate)
    ratings = out_dir / "ratings.csv"
    _atomic_write(
        ratings, _csv_text(["instance_id", "rater_id", "model_name", "score"], rating_rows)
    )
    written.append(ratings)

    labeled_traces = []
    for data in reports:
        instance_id = data["instance_id"]
        journal = trace_path(out_dir, instance_id)
        if not journal.exists():
            continue
        try:
            _, trace = replay_journal(journal)
        except JureError:
            continue
        labeled_traces.append((instance_id, trace))
    stats_rows = [
        [row.sub_task.value, row.expert, row.count, f"{row.percentage:.2f}"]
        for row in invocation_frequency(labeled_traces, manifest.labels)
    ]
    invocations = out_dir / "invocations.csv"
    _atomic_write(
        invocations, _csv_text(["subtask", "expert", "count", "percentage"], stats_rows)
    )
    written.append(invocations)

    labels_path = out_dir / "labels.json"
    _atomic_write(
        labels_path,
        json.dumps(
            {iid: sub.value for iid, sub in sorted(manifest.labels.items())},
            indent=2,
            sort_keys=True,
        )
        + "\n",
    )
    written.append(labels_path)

    if summary is not None:
        summary_path = out_dir / "summary.json"
        _atomic_write(summary_path, json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n")
        written.append(summary_path)
    return written
