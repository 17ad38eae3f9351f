"""Language-model reasoning backend.

The model sees the expert catalog plus a digest of the evidence gathered so
far, and must answer with a single fenced JSON block that either invokes one
expert or finishes the session.  Anything else counts as a parse rejection;
after three rejected exchanges in a row the backend gives up and the session
terminates with a flagged trace.

The API key is read from the JURE_LLM_API_KEY environment variable at call
time and is never echoed into prompts, traces, or log output.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field

import httpx

from jure.core.context import ContextStore, ContextValue, TAG_IMAGE_REF
from jure.core.classify import classify_instruction
from jure.core.errors import JureError
from jure.core.types import EditInstance, SubTask
from jure.experts.descriptors import SchemaViolation
from jure.experts.registry import ExpertRegistry
from jure.orchestrator.actions import Decision, Finish, Invoke, StepOutcome
from jure.orchestrator.checklist import Checklist, build_checklist
from jure.orchestrator.instruction import parse_instruction
from jure.transport.wire import decode_args

API_KEY_VAR = "JURE_LLM_API_KEY"
MAX_PARSE_ATTEMPTS = 3

_FENCE = re.compile(r"```(?:json)?\s*(\{.*?\})\s*```", re.DOTALL)


class ParseRejected(JureError):
    """Raised when the model's reply cannot be read as an action."""

    def __init__(self, reason: str, reply: str):
        super().__init__(f"cannot parse model reply: {reason}")
        self.reason = reason
        self.reply = reply


class LlmUnavailable(JureError):
    """Raised when the chat endpoint cannot be reached or rejects the call."""


@dataclass(frozen=True)
class LlmConfig:
    endpoint_url: str
    model_name: str
    temperature: float = 0.0
    timeout_s: float = 60.0


@dataclass(frozen=True)
class PromptDocument:
    system: str
    user: str


def _describe_catalog(registry: ExpertRegistry) -> str:
    lines = []
    for name in registry.names:
        desc = registry.descriptor(name)
        args = ", ".join(
            f"{spec.name}: {spec.type}{'' if spec.required else '?'}"
            for spec in desc.input_schema
        )
        lines.append(f"- {name}({args}) -> {desc.output_tag}: {desc.expertise}")
    return "\n".join(lines)


def _digest_context(context: ContextStore) -> str:
    if not len(context):
        return "(no evidence gathered yet)"
    lines = []
    for entry in context.entries():
        value = entry.value
        if value.tag == TAG_IMAGE_REF:
            shown = f"image {value.value.uri}"
        elif value.tag in ("number", "text"):
            shown = repr(value.value)
        else:
            shown = value.tag
        lines.append(f"- {entry.key} (from {entry.producer}): {shown}")
    return "\n".join(lines)


def build_llm_prompt(
    instance: EditInstance, registry: ExpertRegistry, context: ContextStore
) -> PromptDocument:
    system = (
        "You orchestrate a panel of narrow visual experts to judge instruction-based "
        "image edits. Each turn, reply with exactly one fenced JSON block and nothing "
        "else. To consult an expert:\n"
        '```json\n{"expert": "<name>", "args": {...}, "rationale": "<why>"}\n```\n'
        "Argument values use the wire encoding reported by the expert catalog. "
        "When you have enough evidence for every candidate, reply:\n"
        '```json\n{"finish": true, "rationale": "<summary>"}\n```\n'
        "Available experts:\n" + _describe_catalog(registry)
    )
    candidates = ", ".join(instance.candidate_names)
    user = (
        f"Instruction: {instance.instruction}\n"
        f"Original image: {instance.original.uri}\n"
        f"Candidates: {candidates}\n"
        f"Evidence so far:\n{_digest_context(context)}\n"
        "Choose the next action."
    )
    return PromptDocument(system=system, user=user)


def parse_llm_action(reply: str, registry: ExpertRegistry) -> tuple[Decision | None, str]:
    """Turn a model reply into (decision, rationale); raises ParseRejected."""
    if not isinstance(reply, str) or not reply.strip():
        raise ParseRejected("empty reply", reply if isinstance(reply, str) else "")
    matches = _FENCE.findall(reply)
    if len(matches) != 1:
        raise ParseRejected(f"expected exactly one fenced JSON block, found {len(matches)}", reply)
    try:
        payload = json.loads(matches[0])
    except json.JSONDecodeError as exc:
        raise ParseRejected(f"fenced block is not valid JSON: {exc}", reply) from exc
    if not isinstance(payload, dict):
        raise ParseRejected("action must be a JSON object", reply)
    rationale = payload.get("rationale", "")
    if not isinstance(rationale, str):
        raise ParseRejected("rationale must be a string", reply)
    if payload.get("finish") is True:
        extra = set(payload) - {"finish", "rationale"}
        if extra:
            raise ParseRejected(f"unexpected fields with finish: {sorted(extra)}", reply)
        return Decision(Finish(), rationale=rationale or "model chose to finish"), rationale
    if "expert" not in payload:
        raise ParseRejected("action needs either finish or expert", reply)
    extra = set(payload) - {"expert", "args", "rationale"}
    if extra:
        raise ParseRejected(f"unexpected fields: {sorted(extra)}", reply)
    name = payload["expert"]
    if not isinstance(name, str) or name not in registry.names:
        raise ParseRejected(f"unknown expert {name!r}", reply)
    wire_args = payload.get("args", {})
    if not isinstance(wire_args, dict):
        raise ParseRejected("args must be an object", reply)
    try:
        args = decode_args(registry.descriptor(name), wire_args)
    except SchemaViolation as exc:
        raise ParseRejected(f"bad args for {name}: {exc}", reply) from exc
    rationale = rationale or f"model invoked {name}"
    return Decision(Invoke(name, args), rationale=rationale), rationale


class HttpLlmClient:
    """Minimal chat-completion client; swap in a fake for tests."""

    def __init__(self, config: LlmConfig):
        self.config = config

    def complete(self, prompt: PromptDocument) -> str:
        headers = {}
        key = os.environ.get(API_KEY_VAR)
        if key:
            headers["authorization"] = f"Bearer {key}"
        body = {
            "model": self.config.model_name,
            "temperature": self.config.temperature,
            "messages": [
                {"role": "system", "content": prompt.system},
                {"role": "user", "content": prompt.user},
            ],
        }
        try:
            response = httpx.post(
                self.config.endpoint_url,
                json=body,
                headers=headers,
                timeout=self.config.timeout_s,
            )
        except httpx.HTTPError as exc:
            raise LlmUnavailable(f"chat endpoint unreachable: {exc}") from exc
        if response.status_code != 200:
            raise LlmUnavailable(f"chat endpoint replied {response.status_code}")
        try:
            data = response.json()
            return data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise LlmUnavailable(f"malformed chat response: {exc}") from exc


@dataclass
class LlmBackend:
    """Backend that defers routing decisions to a chat model."""

    client: object
    sub_task: SubTask | None = None
    name: str = "llm"
    _bootstrap_pending: bool = field(default=False, init=False)

    def begin(self, instance: EditInstance, registry: ExpertRegistry) -> Checklist:
        self.instance = instance
        self.registry = registry
        sub_task = self.sub_task
        if sub_task is None:
            sub_task = classify_instruction(instance.instruction)
        facts = parse_instruction(instance.instruction, sub_task)
        self.checklist = build_checklist(facts, tuple(instance.candidate_names))
        self._bootstrap_pending = True
        return self.checklist

    def decide(self, context: ContextStore) -> Decision:
        prompt = build_llm_prompt(self.instance, self.registry, context)
        last: ParseRejected | None = None
        for _ in range(MAX_PARSE_ATTEMPTS):
            reply = self.client.complete(prompt)
            try:
                decision, _rationale = parse_llm_action(reply, self.registry)
            except ParseRejected as exc:
                last = exc
                continue
            if self._bootstrap_pending and isinstance(decision.action, Invoke):
                decision.writes = self._bootstrap_writes()
                self._bootstrap_pending = False
            return decision
        assert last is not None
        raise last

    def absorb(self, outcome: StepOutcome) -> None:
        # Evidence reaches the model through the context digest on the next
        # turn; no local state to maintain.
        return

    def _bootstrap_writes(self) -> dict[str, ContextValue]:
        writes = {
            "instance.instruction": ContextValue.text(self.instance.instruction),
            "instance.original": ContextValue(TAG_IMAGE_REF, self.instance.original),
        }
        for model in self.instance.candidate_names:
            writes[f"instance.candidate.{model}"] = ContextValue(
                TAG_IMAGE_REF, self.instance.candidate_image(model)
            )
        return writes
