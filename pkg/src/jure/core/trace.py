"""Routing traces: the ordered, replayable log of one evaluation session."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO

from jure.core.errors import JureError

EXPERT_NONE = "none"

TERM_COMPLETED = "completed"
TERM_MAX_ITERATIONS = "max_iterations"
TERM_ERROR = "error"


class NonMonotonicIteration(JureError):
    """Step iterations must advance by exactly one."""


class JournalParseError(JureError):
    """A trace journal file is malformed or truncated mid-record."""


@dataclass(frozen=True)
class Termination:
    kind: str
    message: str | None = None
    flagged: bool = False  # marks sessions a human should look at

    def __post_init__(self) -> None:
        if self.kind not in (TERM_COMPLETED, TERM_MAX_ITERATIONS, TERM_ERROR):
            raise ValueError(f"unknown termination kind: {self.kind!r}")
        if self.kind == TERM_ERROR and not self.message:
            raise ValueError("error termination requires a message")

    def to_dict(self) -> dict:
        data: dict = {"kind": self.kind}
        if self.message is not None:
            data["message"] = self.message
        if self.flagged:
            data["flagged"] = True
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "Termination":
        return cls(
            kind=data["kind"],
            message=data.get("message"),
            flagged=bool(data.get("flagged", False)),
        )


@dataclass(frozen=True)
class RoutingStep:
    """One loop iteration: which expert ran, with what arguments, writing what."""

    iteration: int
    expert: str
    args_digest: str
    output_keys: tuple[str, ...]
    rationale: str

    def __post_init__(self) -> None:
        if self.iteration < 1:
            raise ValueError(f"step iteration must be >= 1, got {self.iteration}")

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "expert": self.expert,
            "args_digest": self.args_digest,
            "output_keys": list(self.output_keys),
            "rationale": self.rationale,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RoutingStep":
        return cls(
            iteration=int(data["iteration"]),
            expert=data["expert"],
            args_digest=data["args_digest"],
            output_keys=tuple(data["output_keys"]),
            rationale=data["rationale"],
        )


@dataclass
class RoutingTrace:
    session_id: str
    steps: list[RoutingStep] = field(default_factory=list)
    terminated: Termination | None = None

    def record_step(self, step: RoutingStep) -> "RoutingTrace":
        """Append a step; iterations must be gapless and the trace unsealed."""
        if self.terminated is not None:
            raise NonMonotonicIteration("trace already terminated")
        expected = self.steps[-1].iteration + 1 if self.steps else 1
        if step.iteration != expected:
            raise NonMonotonicIteration(
                f"expected iteration {expected}, got {step.iteration}"
            )
        if self.steps and self.steps[-1].expert == EXPERT_NONE:
            raise NonMonotonicIteration("the 'none' step must be the final step")
        self.steps.append(step)
        return self

    def terminate(self, termination: Termination) -> "RoutingTrace":
        if self.terminated is not None:
            raise NonMonotonicIteration("trace already terminated")
        self.terminated = termination
        return self

    @property
    def invoked_experts(self) -> list[str]:
        return [s.expert for s in self.steps if s.expert != EXPERT_NONE]

    def to_dict(self) -> dict:
        if self.terminated is None:
            raise ValueError("cannot serialize an unterminated trace")
        return {
            "session_id": self.session_id,
            "steps": [s.to_dict() for s in self.steps],
            "terminated": self.terminated.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RoutingTrace":
        trace = cls(session_id=data["session_id"])
        for raw in data["steps"]:
            trace.record_step(RoutingStep.from_dict(raw))
        trace.terminate(Termination.from_dict(data["terminated"]))
        return trace


class TraceJournal:
    """One-JSON-object-per-line journal, flushed per record for crash safety.

    First line is the session header; each step is appended as it happens;
    the terminal status is the last line. A journal whose last line is a
    terminal record replays into a complete RoutingTrace.
    """

    def __init__(self, path: str | Path, session_id: str, instance_id: str,
                 backend: str, started_at: str):
        self.path = Path(path)
        self._fh: IO[str] | None = self.path.open("w", encoding="utf-8")
        self._write(
            {
                "session_id": session_id,
                "instance_id": instance_id,
                "backend": backend,
                "started_at": started_at,
            }
        )

    def _write(self, record: dict) -> None:
        assert self._fh is not None, "journal already closed"
        self._fh.write(json.dumps(record, sort_keys=True) + "\n")
        self._fh.flush()

    def write_step(self, step: RoutingStep) -> None:
        self._write({"step": step.to_dict()})

    def write_termination(self, termination: Termination) -> None:
        self._write({"terminated": termination.to_dict()})

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "TraceJournal":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def replay_journal(path: str | Path) -> tuple[dict, RoutingTrace]:
    """Reconstruct (header, trace) from a journal file.

    Raises JournalParseError on malformed records or a missing terminal line,
    so interrupted sessions are detectable by callers that resume batches.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise JournalParseError(f"{path}: empty journal")
    records = []
    for lineno, line in enumerate(lines, start=1):
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise JournalParseError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
    header = records[0]
    if "session_id" not in header:
        raise JournalParseError(f"{path}:1: first line is not a session header")
    trace = RoutingTrace(session_id=header["session_id"])
    terminated = False
    for lineno, record in enumerate(records[1:], start=2):
        if terminated:
            raise JournalParseError(f"{path}:{lineno}: record after terminal line")
        if "step" in record:
            try:
                trace.record_step(RoutingStep.from_dict(record["step"]))
            except (KeyError, ValueError, NonMonotonicIteration) as exc:
                raise JournalParseError(f"{path}:{lineno}: bad step ({exc})") from exc
        elif "terminated" in record:
            trace.terminate(Termination.from_dict(record["terminated"]))
            terminated = True
        else:
            raise JournalParseError(f"{path}:{lineno}: unrecognized record")
    if not terminated:
        raise JournalParseError(f"{path}: journal has no terminal record")
    return header, trace
