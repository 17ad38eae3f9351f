"""The evaluation session loop.

One session judges one instance: the backend decides, the loop invokes the
chosen expert, the result lands in the context store, and the backend absorbs
it before deciding again.  The loop owns every safety rail (iteration budget,
per-call timeout, context ceiling, duplicate-key refusal) so a hostile or
buggy backend can waste its budget but cannot corrupt the trace or crash the
session.  Whatever happens, the caller gets a final report and a sealed
trace; expert failures and backend misbehavior degrade scores, not the run.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
from dataclasses import dataclass, field

from jure.core.context import ContextStore, ContextValue, DuplicateKey
from jure.core.errors import JureError
from jure.core.types import EditInstance, SubTask
from jure.experts.descriptors import SchemaViolation, UnknownExpert
from jure.experts.registry import ExpertRegistry
from jure.orchestrator.actions import Decision, Finish, Invoke, StepOutcome
from jure.orchestrator.checklist import FAIL, PASS, UNKNOWN, Checklist
from jure.core.trace import (
    TERM_COMPLETED,
    TERM_ERROR,
    TERM_MAX_ITERATIONS,
    RoutingStep,
    RoutingTrace,
    Termination,
    TraceJournal,
)
from jure.orchestrator.llm import ParseRejected
from jure.transport.wire import args_digest


@dataclass(frozen=True)
class LoopLimits:
    """Safety rails; defaults hold for every run unless a test narrows them."""

    max_iterations: int = 16
    per_expert_timeout: float = 30.0
    max_context_entries: int = 256

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.per_expert_timeout <= 0:
            raise ValueError("per_expert_timeout must be positive")
        if self.max_context_entries < 1:
            raise ValueError("max_context_entries must be at least 1")


@dataclass(frozen=True)
class RubricConfig:
    """Score deductions applied per checklist dimension at aggregation."""

    start: int = 5
    primary_deduction: int = 2
    secondary_deduction: int = 1
    unknown_deduction: int = 1
    floor: int = 1
    ceiling: int = 5


class ExpertTimeout(JureError):
    def __init__(self, expert: str, seconds: float):
        super().__init__(f"expert {expert!r} exceeded {seconds}s")


@dataclass(frozen=True)
class DimensionResult:
    dimension: str
    status: str
    explanation: str
    evidence_keys: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.status not in (PASS, FAIL, UNKNOWN):
            raise ValueError(f"bad status {self.status!r}")
        if self.status in (PASS, FAIL) and not self.evidence_keys:
            raise ValueError(f"{self.status} result for {self.dimension!r} needs evidence")

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "status": self.status,
            "explanation": self.explanation,
            "evidence_keys": list(self.evidence_keys),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DimensionResult":
        return cls(
            dimension=data["dimension"],
            status=data["status"],
            explanation=data["explanation"],
            evidence_keys=tuple(data["evidence_keys"]),
        )


@dataclass(frozen=True)
class CandidateReport:
    model_name: str
    score: int
    dimension_results: tuple[DimensionResult, ...]

    def __post_init__(self) -> None:
        if not 1 <= self.score <= 5:
            raise ValueError(f"score must be in 1..5, got {self.score}")

    def to_dict(self) -> dict:
        return {
            "model_name": self.model_name,
            "score": self.score,
            "dimension_results": [r.to_dict() for r in self.dimension_results],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CandidateReport":
        return cls(
            model_name=data["model_name"],
            score=data["score"],
            dimension_results=tuple(
                DimensionResult.from_dict(r) for r in data["dimension_results"]
            ),
        )


@dataclass(frozen=True)
class FinalReport:
    instance_id: str
    sub_task: SubTask | None
    candidates: tuple[CandidateReport, ...]
    narrative: str

    def report_for(self, model_name: str) -> CandidateReport | None:
        for report in self.candidates:
            if report.model_name == model_name:
                return report
        return None

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "sub_task": self.sub_task.value if self.sub_task else None,
            "candidates": [c.to_dict() for c in self.candidates],
            "narrative": self.narrative,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FinalReport":
        sub_task = data["sub_task"]
        return cls(
            instance_id=data["instance_id"],
            sub_task=SubTask(sub_task) if sub_task else None,
            candidates=tuple(CandidateReport.from_dict(c) for c in data["candidates"]),
            narrative=data["narrative"],
        )


def session_id_for(instance_id: str, backend_name: str) -> str:
    digest = hashlib.sha256(f"{instance_id}|{backend_name}".encode("utf-8")).hexdigest()
    return digest[:16]


def invoke_expert(
    registry: ExpertRegistry, name: str, args: dict, limits: LoopLimits
) -> ContextValue:
    """Invoke with a hard wall-clock ceiling.

    A timed-out expert thread is abandoned, not killed; acceptable because
    reference experts are pure functions and remote calls carry their own
    deadline.
    """
    executor = concurrent.futures.ThreadPoolExecutor(max_workers=1)
    try:
        future = executor.submit(registry.invoke, name, args)
        try:
            return future.result(timeout=limits.per_expert_timeout)
        except concurrent.futures.TimeoutError:
            raise ExpertTimeout(name, limits.per_expert_timeout) from None
    finally:
        executor.shutdown(wait=False)


def aggregate_results(
    instance: EditInstance,
    checklist: Checklist,
    context: ContextStore,
    trace: RoutingTrace,
    rubric: RubricConfig | None = None,
) -> FinalReport:
    """Fold checklist verdicts into 1..5 scores plus cited evidence.

    Threshold checks upstream compare raw expert scores, so uniformly
    rescaling all deductions leaves the per-instance ranking unchanged.
    """
    rubric = rubric or RubricConfig()
    reports: list[CandidateReport] = []
    summary_bits: list[str] = []
    for model in checklist.candidates:
        score = rubric.start
        dim_results: list[DimensionResult] = []
        failed: list[str] = []
        unknown: list[str] = []
        for item in checklist.items:
            verdict = item.verdict_for(model)
            if verdict.status == FAIL:
                score -= rubric.primary_deduction if item.primary else rubric.secondary_deduction
                failed.append(item.dimension)
            elif verdict.status == UNKNOWN:
                score -= rubric.unknown_deduction
                unknown.append(item.dimension)
            evidence = tuple(k for k in verdict.evidence_keys if k in context)
            missing = tuple(k for k in verdict.evidence_keys if k not in context)
            explanation = verdict.note or f"{item.dimension} {verdict.status}"
            if missing:
                explanation += f" (evidence lost: {', '.join(missing)})"
            status = verdict.status
            if status in (PASS, FAIL) and not evidence:
                # Evidence vanished with the context entry; downgrade rather
                # than cite keys that no reader can dereference.
                status = UNKNOWN
                explanation += "; downgraded to unknown"
            dim_results.append(
                DimensionResult(item.dimension, status, explanation, evidence)
            )
        score = max(rubric.floor, min(rubric.ceiling, score))
        reports.append(CandidateReport(model, score, tuple(dim_results)))
        bits = []
        if failed:
            bits.append("failed " + ", ".join(failed))
        if unknown:
            bits.append("unresolved " + ", ".join(unknown))
        summary_bits.append(f"{model}: score {score}" + (f" ({'; '.join(bits)})" if bits else ""))
    term = trace.terminated
    narrative = "; ".join(summary_bits)
    if term is not None and term.kind != TERM_COMPLETED:
        narrative += f". Session ended early ({term.kind})"
        if term.message:
            narrative += f": {term.message}"
    return FinalReport(
        instance_id=instance.id,
        sub_task=checklist.sub_task,
        candidates=tuple(reports),
        narrative=narrative,
    )


@dataclass
class SessionResult:
    report: FinalReport
    trace: RoutingTrace
    context: ContextStore
    checklist: Checklist


def run_jure(
    instance: EditInstance,
    registry: ExpertRegistry,
    backend,
    limits: LoopLimits | None = None,
    journal: TraceJournal | None = None,
    rubric: RubricConfig | None = None,
) -> SessionResult:
    """Judge one instance end to end; never raises for backend/expert faults."""
    limits = limits or LoopLimits()
    context = ContextStore()
    session = session_id_for(instance.id, backend.name)
    trace = RoutingTrace(session_id=session)

    checklist = backend.begin(instance, registry)
    termination: Termination | None = None

    for iteration in range(1, limits.max_iterations + 1):
        if len(context) >= limits.max_context_entries:
            termination = Termination(
                TERM_ERROR, message=f"context ceiling reached ({limits.max_context_entries})"
            )
            break
        try:
            decision = backend.decide(context)
        except ParseRejected as exc:
            termination = Termination(TERM_ERROR, message=str(exc), flagged=True)
            break
        except JureError as exc:
            termination = Termination(TERM_ERROR, message=f"backend error: {exc}")
            break
        if isinstance(decision.action, Finish):
            termination = Termination(TERM_COMPLETED, message=decision.rationale)
            break
        if not isinstance(decision.action, Invoke):
            termination = Termination(
                TERM_ERROR, message=f"backend returned unknown action {decision.action!r}"
            )
            break

        invoke: Invoke = decision.action
        output_keys: list[str] = []
        error: str | None = None
        value: ContextValue | None = None
        result_key: str | None = None

        if decision.writes:
            try:
                context.update("orchestrator", iteration, decision.writes)
                output_keys.extend(decision.writes)
            except DuplicateKey as exc:
                error = f"DuplicateKey: {exc}"

        digest = "{}"
        if error is None:
            try:
                digest = args_digest(registry.descriptor(invoke.expert), invoke.args)
            except (UnknownExpert, SchemaViolation) as exc:
                error = f"{type(exc).__name__}: {exc}"

        if error is None:
            try:
                value = invoke_expert(registry, invoke.expert, invoke.args, limits)
            except JureError as exc:
                error = f"{type(exc).__name__}: {exc}"
                value = None

        if error is None and value is not None:
            result_key = invoke.output_key or f"{invoke.expert}.i{iteration}"
            try:
                context.update(invoke.expert, iteration, {result_key: value})
                output_keys.append(result_key)
            except DuplicateKey as exc:
                error = f"DuplicateKey: {exc}"
                value = None
                result_key = None

        rationale = decision.rationale
        if error is not None:
            rationale = f"{rationale} | error: {error}" if rationale else f"error: {error}"
        step = RoutingStep(
            iteration=iteration,
            expert=invoke.expert,
            args_digest=digest,
            output_keys=tuple(output_keys),
            rationale=rationale,
        )
        trace.record_step(step)
        if journal is not None:
            journal.write_step(step)
        backend.absorb(
            StepOutcome(
                iteration=iteration,
                expert=invoke.expert,
                output_key=result_key,
                value=value,
                error=error,
            )
        )

    if termination is None:
        termination = Termination(TERM_MAX_ITERATIONS, message="iteration budget exhausted")
    trace.terminate(termination)
    if journal is not None:
        journal.write_termination(termination)
        journal.close()

    report = aggregate_results(instance, checklist, context, trace, rubric)
    return SessionResult(report=report, trace=trace, context=context, checklist=checklist)
