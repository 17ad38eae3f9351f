"""Session loop safety rails, trace coherence, and rubric aggregation.

Backends here are scripted: they replay a fixed decision list (repeating the
last entry), so every loop path is reachable without any reasoning model.
"""

from __future__ import annotations

import time
from collections import Counter

import pytest

from jure.core.context import ContextStore, ContextValue
from jure.core.trace import (
    TERM_COMPLETED,
    TERM_ERROR,
    TERM_MAX_ITERATIONS,
    RoutingTrace,
    Termination,
    TraceJournal,
    replay_journal,
)
from jure.core.types import EditInstance, SubTask
from jure.experts.descriptors import ArgSpec, ExpertDescriptor
from jure.experts.registry import ExpertFailure, ExpertRegistry
from jure.orchestrator.actions import Decision, Finish, Invoke, StepOutcome
from jure.orchestrator.checklist import FAIL, PASS, UNKNOWN, Checklist, ChecklistItem
from jure.orchestrator.llm import ParseRejected
from jure.orchestrator.loop import (
    CandidateReport,
    DimensionResult,
    ExpertTimeout,
    FinalReport,
    LoopLimits,
    RubricConfig,
    aggregate_results,
    invoke_expert,
    run_jure,
    session_id_for,
)
from tests.conftest import make_scene, ref_for


def _expert_desc(name: str) -> ExpertDescriptor:
    return ExpertDescriptor(
        name=name,
        expertise="test stub",
        input_schema=(ArgSpec("query", "string"),),
        output_tag="number",
        output_description="query length",
    )


def toy_registry(delay: float = 0.0, fail: bool = False) -> ExpertRegistry:
    def echo(args: dict) -> ContextValue:
        if delay:
            time.sleep(delay)
        if fail:
            raise ExpertFailure("echo", "refused")
        return ContextValue.number(len(args["query"]))

    return ExpertRegistry().with_expert(_expert_desc("echo"), echo)


def toy_instance(n_candidates: int = 1) -> EditInstance:
    ref = ref_for(make_scene())
    names = ("alpha", "beta", "gamma")[:n_candidates]
    return EditInstance(
        id="toy-1",
        instruction="Add a cat on the sofa.",
        original=ref,
        candidates=tuple((name, ref) for name in names),
    )


def checklist_of(candidates: tuple[str, ...], dims: tuple[tuple[str, bool], ...]) -> Checklist:
    items = [
        ChecklistItem(dimension=d, primary=p, experts=("echo",)) for d, p in dims
    ]
    return Checklist(SubTask.OBJECT_ADDITION, candidates, items)


FOUR_DIMS = (
    ("presence", True),
    ("attribute-accuracy", False),
    ("spatial-correctness", False),
    ("visual-integrity", False),
)


class ScriptedBackend:
    """Replays a decision list; the last decision repeats once exhausted."""

    def __init__(self, decisions, checklist: Checklist | None = None, name: str = "scripted"):
        self.name = name
        self.decisions = list(decisions)
        self.checklist = checklist
        self.outcomes: list[StepOutcome] = []
        self._cursor = 0

    def begin(self, instance: EditInstance, registry: ExpertRegistry) -> Checklist:
        if self.checklist is None:
            self.checklist = checklist_of(tuple(instance.candidate_names), FOUR_DIMS)
        return self.checklist

    def decide(self, context: ContextStore) -> Decision:
        decision = self.decisions[min(self._cursor, len(self.decisions) - 1)]
        self._cursor += 1
        if isinstance(decision, Exception):
            raise decision
        return decision

    def absorb(self, outcome: StepOutcome) -> None:
        self.outcomes.append(outcome)


def invoke_echo(rationale: str = "probe", key: str | None = None, **writes) -> Decision:
    return Decision(
        action=Invoke("echo", {"query": "cat"}, output_key=key),
        rationale=rationale,
        writes=writes,
    )


FINISH = Decision(action=Finish(), rationale="all settled")


class TestSessionId:
    def test_sixteen_hex_chars(self):
        sid = session_id_for("toy-1", "scripted")
        assert len(sid) == 16
        assert set(sid) <= set("0123456789abcdef")

    def test_stable_and_input_sensitive(self):
        assert session_id_for("a", "b") == session_id_for("a", "b")
        assert session_id_for("a", "b") != session_id_for("a", "c")
        assert session_id_for("a", "b") != session_id_for("b", "a")


class TestInvokeExpert:
    def test_returns_expert_value(self):
        value = invoke_expert(toy_registry(), "echo", {"query": "cat"}, LoopLimits())
        assert value == ContextValue.number(3)

    def test_slow_expert_times_out(self):
        limits = LoopLimits(per_expert_timeout=0.05)
        with pytest.raises(ExpertTimeout, match="'echo' exceeded 0.05s"):
            invoke_expert(toy_registry(delay=2.0), "echo", {"query": "cat"}, limits)


class TestImmediateFinish:
    def test_trace_has_no_steps(self):
        backend = ScriptedBackend([FINISH])
        result = run_jure(toy_instance(), toy_registry(), backend)
        assert result.trace.steps == []
        assert result.trace.terminated.kind == TERM_COMPLETED
        assert result.trace.terminated.message == "all settled"
        assert len(result.context) == 0

    def test_every_dimension_unknown_and_deducted(self):
        # four unresolved dimensions at -1 each drive the score to the floor
        backend = ScriptedBackend([FINISH])
        result = run_jure(toy_instance(), toy_registry(), backend)
        report = result.report.report_for("alpha")
        assert report.score == 1
        assert all(r.status == UNKNOWN for r in report.dimension_results)
        assert "unresolved" in result.report.narrative

    def test_two_dimension_checklist_lands_at_three(self):
        checklist = checklist_of(("alpha",), (("presence", True), ("visual-integrity", False)))
        backend = ScriptedBackend([FINISH], checklist=checklist)
        result = run_jure(toy_instance(), toy_registry(), backend)
        assert result.report.report_for("alpha").score == 3


class TestIterationBudget:
    def test_always_invoke_halts_at_max_iterations(self):
        backend = ScriptedBackend([invoke_echo()])
        limits = LoopLimits(max_iterations=4)
        result = run_jure(toy_instance(), toy_registry(), backend, limits=limits)
        assert len(result.trace.steps) == 4
        assert result.trace.terminated.kind == TERM_MAX_ITERATIONS
        assert result.trace.terminated.message == "iteration budget exhausted"

    def test_default_output_keys_are_unique_per_iteration(self):
        backend = ScriptedBackend([invoke_echo()])
        result = run_jure(toy_instance(), toy_registry(), backend, limits=LoopLimits(max_iterations=3))
        assert result.context.keys() == ["echo.i1", "echo.i2", "echo.i3"]
        assert all(o.ok for o in backend.outcomes)

    def test_backend_absorbs_every_step(self):
        backend = ScriptedBackend([invoke_echo()])
        result = run_jure(toy_instance(), toy_registry(), backend, limits=LoopLimits(max_iterations=5))
        assert [o.iteration for o in backend.outcomes] == [1, 2, 3, 4, 5]
        assert backend.outcomes[0].value == ContextValue.number(3)
        assert backend.outcomes[0].output_key == "echo.i1"


class TestDuplicateKeySurvival:
    def test_repeated_output_key_degrades_not_crashes(self):
        backend = ScriptedBackend([invoke_echo(key="same")])
        result = run_jure(toy_instance(), toy_registry(), backend, limits=LoopLimits(max_iterations=3))
        assert result.trace.terminated.kind == TERM_MAX_ITERATIONS
        assert result.context.keys() == ["same"]
        first, second, third = result.trace.steps
        assert first.output_keys == ("same",)
        assert second.output_keys == ()
        assert "DuplicateKey" in second.rationale
        assert "DuplicateKey" in third.rationale

    def test_failed_step_reports_error_to_backend(self):
        backend = ScriptedBackend([invoke_echo(key="same")])
        run_jure(toy_instance(), toy_registry(), backend, limits=LoopLimits(max_iterations=2))
        ok, dup = backend.outcomes
        assert ok.ok and ok.value is not None
        assert not dup.ok
        assert dup.value is None and dup.output_key is None
        assert dup.error.startswith("DuplicateKey")

    def test_duplicate_write_skips_expert_entirely(self):
        # a write collision is detected before the expert runs, so the step
        # carries the fallback digest and no output keys
        seed = ContextValue.text("hello")
        backend = ScriptedBackend([invoke_echo(seed=seed)])
        result = run_jure(toy_instance(), toy_registry(), backend, limits=LoopLimits(max_iterations=2))
        first, second = result.trace.steps
        assert first.output_keys == ("seed", "echo.i1")
        assert second.output_keys == ()
        assert second.args_digest == "{}"
        assert backend.outcomes[1].error.startswith("DuplicateKey")


class TestBackendFaults:
    def test_parse_rejection_flags_the_session(self):
        backend = ScriptedBackend([ParseRejected("no action fence found", reply="hmm")])
        result = run_jure(toy_instance(), toy_registry(), backend)
        term = result.trace.terminated
        assert term.kind == TERM_ERROR
        assert term.flagged is True
        assert "no action fence found" in term.message

    def test_backend_jure_error_terminates_unflagged(self):
        backend = ScriptedBackend([ExpertFailure("echo", "backend blew up")])
        result = run_jure(toy_instance(), toy_registry(), backend)
        term = result.trace.terminated
        assert term.kind == TERM_ERROR
        assert term.flagged is False
        assert term.message.startswith("backend error:")

    def test_unknown_action_object_terminates(self):
        backend = ScriptedBackend([Decision(action="jump", rationale="?")])
        result = run_jure(toy_instance(), toy_registry(), backend)
        assert result.trace.terminated.kind == TERM_ERROR
        assert "unknown action" in result.trace.terminated.message

    def test_faulted_session_still_produces_a_report(self):
        backend = ScriptedBackend([ParseRejected("garbage", reply="???")])
        result = run_jure(toy_instance(), toy_registry(), backend)
        assert result.report.report_for("alpha") is not None
        assert "Session ended early (error)" in result.report.narrative


class TestExpertFaults:
    def test_unknown_expert_recorded_with_fallback_digest(self):
        bad = Decision(action=Invoke("ghost", {"query": "x"}), rationale="probe")
        backend = ScriptedBackend([bad, FINISH])
        result = run_jure(toy_instance(), toy_registry(), backend)
        step = result.trace.steps[0]
        assert step.args_digest == "{}"
        assert step.output_keys == ()
        assert "UnknownExpert" in step.rationale
        assert result.trace.terminated.kind == TERM_COMPLETED

    def test_undeclared_argument_rejected_before_dispatch(self):
        bad = Decision(action=Invoke("echo", {"bogus": "x"}), rationale="probe")
        backend = ScriptedBackend([bad, FINISH])
        result = run_jure(toy_instance(), toy_registry(), backend)
        step = result.trace.steps[0]
        assert step.args_digest == "{}"
        assert "SchemaViolation" in step.rationale
        assert len(result.context) == 0

    def test_missing_required_argument_fails_at_the_gate(self):
        bad = Decision(action=Invoke("echo", {}), rationale="probe")
        backend = ScriptedBackend([bad, FINISH])
        result = run_jure(toy_instance(), toy_registry(), backend)
        assert "SchemaViolation" in result.trace.steps[0].rationale
        assert backend.outcomes[0].error.startswith("SchemaViolation")

    def test_expert_failure_recorded_and_loop_continues(self):
        backend = ScriptedBackend([invoke_echo(), FINISH])
        result = run_jure(toy_instance(), toy_registry(fail=True), backend)
        step = result.trace.steps[0]
        assert "ExpertFailure" in step.rationale
        assert step.output_keys == ()
        assert result.trace.terminated.kind == TERM_COMPLETED

    def test_timeout_recorded_and_loop_continues(self):
        backend = ScriptedBackend([invoke_echo(), FINISH])
        limits = LoopLimits(per_expert_timeout=0.05)
        result = run_jure(toy_instance(), toy_registry(delay=2.0), backend, limits=limits)
        assert "ExpertTimeout" in result.trace.steps[0].rationale
        assert result.trace.terminated.kind == TERM_COMPLETED

    def test_rationale_keeps_backend_text_before_error(self):
        bad = Decision(action=Invoke("ghost", {"query": "x"}), rationale="check the cat")
        backend = ScriptedBackend([bad, FINISH])
        result = run_jure(toy_instance(), toy_registry(), backend)
        assert result.trace.steps[0].rationale.startswith("check the cat | error: ")


class TestContextCeiling:
    def test_ceiling_trips_before_decide(self):
        backend = ScriptedBackend([invoke_echo()])
        limits = LoopLimits(max_iterations=10, max_context_entries=2)
        result = run_jure(toy_instance(), toy_registry(), backend, limits=limits)
        assert len(result.trace.steps) == 2
        term = result.trace.terminated
        assert term.kind == TERM_ERROR
        assert term.message == "context ceiling reached (2)"

    def test_limits_validation(self):
        with pytest.raises(ValueError):
            LoopLimits(max_iterations=0)
        with pytest.raises(ValueError):
            LoopLimits(per_expert_timeout=0.0)
        with pytest.raises(ValueError):
            LoopLimits(max_context_entries=0)


class JudgingBackend:
    """Invokes echo once per dimension, resolving verdicts from outcomes."""

    name = "judging"

    def __init__(self, statuses: tuple[str, ...] | None = None):
        self.statuses = statuses
        self.checklist: Checklist | None = None
        self._pending: str | None = None

    def begin(self, instance: EditInstance, registry: ExpertRegistry) -> Checklist:
        self.checklist = checklist_of(tuple(instance.candidate_names), FOUR_DIMS)
        if self.statuses is None:
            self.statuses = (PASS,) * len(self.checklist.items)
        return self.checklist

    def decide(self, context: ContextStore) -> Decision:
        for item in self.checklist.items:
            if item.satisfied(self.checklist.candidates) == UNKNOWN:
                self._pending = item.dimension
                return Decision(
                    action=Invoke("echo", {"query": item.dimension}),
                    rationale=f"gather {item.dimension}",
                )
        return Decision(action=Finish(), rationale="checklist complete")

    def absorb(self, outcome: StepOutcome) -> None:
        if outcome.ok and self._pending is not None:
            index = self.checklist.dimensions.index(self._pending)
            for model in self.checklist.candidates:
                self.checklist.resolve(
                    self._pending, model, self.statuses[index],
                    evidence_keys=(outcome.output_key,),
                )
        self._pending = None


class TestTraceContextCoherence:
    def test_step_output_keys_match_context_exactly(self):
        backend = JudgingBackend()
        result = run_jure(toy_instance(2), toy_registry(), backend)
        written = Counter(k for step in result.trace.steps for k in step.output_keys)
        assert written == Counter(result.context.keys())
        assert all(count == 1 for count in written.values())

    def test_report_evidence_keys_all_dereference(self):
        backend = JudgingBackend()
        result = run_jure(toy_instance(2), toy_registry(), backend)
        for candidate in result.report.candidates:
            for dim in candidate.dimension_results:
                assert dim.evidence_keys, dim.dimension
                for key in dim.evidence_keys:
                    assert key in result.context

    def test_clean_session_scores_full_marks(self):
        backend = JudgingBackend()
        result = run_jure(toy_instance(2), toy_registry(), backend)
        assert result.trace.terminated.kind == TERM_COMPLETED
        assert len(result.trace.steps) == 4
        for candidate in result.report.candidates:
            assert candidate.score == 5
        assert result.report.narrative == "alpha: score 5; beta: score 5"

    def test_same_script_twice_is_deterministic(self):
        first = run_jure(toy_instance(2), toy_registry(), JudgingBackend())
        second = run_jure(toy_instance(2), toy_registry(), JudgingBackend())
        assert first.trace.to_dict() == second.trace.to_dict()
        assert first.report.to_dict() == second.report.to_dict()


def _completed_trace() -> RoutingTrace:
    trace = RoutingTrace(session_id="s")
    trace.terminate(Termination(TERM_COMPLETED, message="done"))
    return trace


def _context_with(*keys: str) -> ContextStore:
    store = ContextStore()
    store.update("orchestrator", 0, {k: ContextValue.number(1.0) for k in keys})
    return store


def _resolved_checklist(statuses: tuple[str, ...], evidence: str = "ev") -> Checklist:
    checklist = checklist_of(("m",), FOUR_DIMS)
    for item, status in zip(checklist.items, statuses):
        keys = (evidence,) if status != UNKNOWN else ()
        checklist.resolve(item.dimension, "m", status, evidence_keys=keys)
    return checklist


class TestRubric:
    def aggregate(self, statuses, rubric=None, context=None, trace=None):
        checklist = _resolved_checklist(statuses)
        return aggregate_results(
            toy_instance(),
            checklist,
            context if context is not None else _context_with("ev"),
            trace if trace is not None else _completed_trace(),
            rubric=rubric,
        )

    def test_all_pass_scores_five(self):
        report = self.aggregate((PASS, PASS, PASS, PASS))
        assert report.candidates[0].score == 5
        assert report.narrative == "m: score 5"

    def test_primary_plus_one_secondary_failure_scores_two(self):
        report = self.aggregate((FAIL, FAIL, PASS, PASS))
        assert report.candidates[0].score == 2

    def test_secondary_failure_alone_scores_four(self):
        report = self.aggregate((PASS, FAIL, PASS, PASS))
        assert report.candidates[0].score == 4

    def test_primary_failure_alone_scores_three(self):
        report = self.aggregate((FAIL, PASS, PASS, PASS))
        assert report.candidates[0].score == 3

    def test_all_four_failures_clamp_to_floor(self):
        # raw total would be 5 - 2 - 1 - 1 - 1 = 0
        report = self.aggregate((FAIL, FAIL, FAIL, FAIL))
        assert report.candidates[0].score == 1

    def test_unknown_deducts_one_each(self):
        report = self.aggregate((PASS, UNKNOWN, UNKNOWN, PASS))
        assert report.candidates[0].score == 3

    def test_narrative_lists_failed_then_unresolved(self):
        report = self.aggregate((FAIL, UNKNOWN, PASS, PASS))
        assert report.narrative == "m: score 2 (failed presence; unresolved attribute-accuracy)"

    def test_custom_rubric_weights(self):
        rubric = RubricConfig(secondary_deduction=2)
        report = self.aggregate((FAIL, FAIL, PASS, PASS), rubric=rubric)
        assert report.candidates[0].score == 1

    def test_early_termination_annotates_narrative(self):
        trace = RoutingTrace(session_id="s")
        trace.terminate(Termination(TERM_MAX_ITERATIONS, message="iteration budget exhausted"))
        report = self.aggregate((PASS, PASS, PASS, PASS), trace=trace)
        assert report.narrative.endswith(
            ". Session ended early (max_iterations): iteration budget exhausted"
        )

    def test_verdict_note_becomes_explanation(self):
        checklist = checklist_of(("m",), FOUR_DIMS)
        for item in checklist.items:
            checklist.resolve(item.dimension, "m", PASS, ("ev",), note=f"{item.dimension} looks right")
        report = aggregate_results(toy_instance(), checklist, _context_with("ev"), _completed_trace())
        first = report.candidates[0].dimension_results[0]
        assert first.explanation == "presence looks right"

    def test_default_explanation_names_dimension_and_status(self):
        report = self.aggregate((PASS, PASS, PASS, PASS))
        assert report.candidates[0].dimension_results[0].explanation == "presence pass"


class TestEvidenceSurvival:
    def test_lost_evidence_downgrades_published_status(self):
        # the deduction stands (the judgement happened) but the published
        # result cannot cite a key nobody can dereference
        checklist = checklist_of(("m",), (("presence", True), ("visual-integrity", False)))
        checklist.resolve("presence", "m", FAIL, ("gone",))
        checklist.resolve("visual-integrity", "m", PASS, ("ev",))
        report = aggregate_results(toy_instance(), checklist, _context_with("ev"), _completed_trace())
        candidate = report.candidates[0]
        assert candidate.score == 3
        presence = candidate.dimension_results[0]
        assert presence.status == UNKNOWN
        assert presence.evidence_keys == ()
        assert "(evidence lost: gone)" in presence.explanation
        assert presence.explanation.endswith("; downgraded to unknown")

    def test_partial_evidence_loss_keeps_status(self):
        checklist = checklist_of(("m",), (("presence", True), ("visual-integrity", False)))
        checklist.resolve("presence", "m", FAIL, ("live", "gone"))
        checklist.resolve("visual-integrity", "m", PASS, ("live",))
        report = aggregate_results(toy_instance(), checklist, _context_with("live"), _completed_trace())
        presence = report.candidates[0].dimension_results[0]
        assert presence.status == FAIL
        assert presence.evidence_keys == ("live",)
        assert "(evidence lost: gone)" in presence.explanation
        assert "downgraded" not in presence.explanation


class TestReportTypes:
    def test_pass_result_requires_evidence(self):
        with pytest.raises(ValueError, match="needs evidence"):
            DimensionResult("presence", PASS, "fine")
        DimensionResult("presence", UNKNOWN, "nothing gathered")

    def test_bad_status_rejected(self):
        with pytest.raises(ValueError, match="bad status"):
            DimensionResult("presence", "maybe", "?")

    def test_candidate_score_bounds(self):
        dims = (DimensionResult("presence", UNKNOWN, "n/a"),)
        with pytest.raises(ValueError):
            CandidateReport("m", 0, dims)
        with pytest.raises(ValueError):
            CandidateReport("m", 6, dims)

    def test_final_report_round_trip(self):
        report = FinalReport(
            instance_id="toy-1",
            sub_task=SubTask.OBJECT_ADDITION,
            candidates=(
                CandidateReport(
                    "m", 4,
                    (DimensionResult("presence", PASS, "seen", ("k",)),),
                ),
            ),
            narrative="m: score 4",
        )
        data = report.to_dict()
        assert data["sub_task"] == "ObjectAddition"
        assert FinalReport.from_dict(data) == report

    def test_round_trip_without_sub_task(self):
        report = FinalReport("toy-1", None, (), "nothing judged")
        data = report.to_dict()
        assert data["sub_task"] is None
        assert FinalReport.from_dict(data) == report

    def test_report_for_missing_model(self):
        report = FinalReport("toy-1", None, (), "empty")
        assert report.report_for("nope") is None


class TestJournalIntegration:
    def test_journal_replay_matches_in_memory_trace(self, tmp_path):
        path = tmp_path / "session.jsonl"
        backend = JudgingBackend()
        instance = toy_instance()
        journal = TraceJournal(
            path,
            session_id=session_id_for(instance.id, backend.name),
            instance_id=instance.id,
            backend=backend.name,
            started_at="2026-01-01T00:00:00Z",
        )
        result = run_jure(instance, toy_registry(), backend, journal=journal)
        header, replayed = replay_journal(path)
        assert header["instance_id"] == "toy-1"
        assert header["backend"] == "judging"
        assert replayed.to_dict() == result.trace.to_dict()

    def test_journal_records_error_terminations_too(self, tmp_path):
        path = tmp_path / "session.jsonl"
        backend = ScriptedBackend([ParseRejected("broken output", reply="~")])
        instance = toy_instance()
        journal = TraceJournal(path, "sid", instance.id, backend.name, "2026-01-01T00:00:00Z")
        run_jure(instance, toy_registry(), backend, journal=journal)
        _, replayed = replay_journal(path)
        assert replayed.terminated.kind == TERM_ERROR
        assert replayed.terminated.flagged is True
