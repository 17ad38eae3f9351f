from jure.orchestrator.actions import Action, Decision, Finish, Invoke, StepOutcome
from jure.orchestrator.checklist import (
    FAIL,
    PASS,
    UNKNOWN,
    CandidateVerdict,
    Checklist,
    ChecklistItem,
    PolicyTableError,
    build_checklist,
    load_policy_table,
)
from jure.orchestrator.instruction import InstructionFacts, parse_instruction
from jure.orchestrator.llm import (
    API_KEY_VAR,
    HttpLlmClient,
    LlmBackend,
    LlmConfig,
    LlmUnavailable,
    ParseRejected,
    PromptDocument,
    build_llm_prompt,
    parse_llm_action,
)
from jure.orchestrator.loop import (
    CandidateReport,
    DimensionResult,
    ExpertTimeout,
    FinalReport,
    LoopLimits,
    RubricConfig,
    SessionResult,
    aggregate_results,
    invoke_expert,
    run_jure,
    session_id_for,
)
from jure.orchestrator.policy import PolicyBackend, PolicyThresholds

__all__ = [
    "Action",
    "API_KEY_VAR",
    "CandidateReport",
    "CandidateVerdict",
    "Checklist",
    "ChecklistItem",
    "Decision",
    "DimensionResult",
    "ExpertTimeout",
    "FAIL",
    "FinalReport",
    "Finish",
    "HttpLlmClient",
    "InstructionFacts",
    "Invoke",
    "LlmBackend",
    "LlmConfig",
    "LlmUnavailable",
    "LoopLimits",
    "PASS",
    "ParseRejected",
    "PolicyBackend",
    "PolicyTableError",
    "PolicyThresholds",
    "PromptDocument",
    "RubricConfig",
    "SessionResult",
    "StepOutcome",
    "UNKNOWN",
    "aggregate_results",
    "build_checklist",
    "build_llm_prompt",
    "invoke_expert",
    "load_policy_table",
    "parse_instruction",
    "parse_llm_action",
    "run_jure",
    "session_id_for",
]
