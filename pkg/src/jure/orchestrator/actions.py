"""Actions a reasoning backend can take, and what it sees back."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from jure.core.context import ContextValue


@dataclass(frozen=True)
class Invoke:
    """Run one expert with fully prepared arguments.

    ``output_key`` names the context entry for the result; the loop assigns
    ``{expert}.i{iteration}`` when absent, which is unique by construction.
    """

    expert: str
    args: dict
    output_key: str | None = None


@dataclass(frozen=True)
class Finish:
    """Stop evaluating; everything knowable is in the context."""


Action = Union[Invoke, Finish]


@dataclass
class Decision:
    """One reasoning step: the action, why, and any derived facts to record.

    ``writes`` are orchestrator-authored context entries (e.g. the initial
    instance inputs) that ride along with the step that carries them.
    """

    action: Action
    rationale: str
    writes: dict[str, ContextValue] = field(default_factory=dict)


@dataclass(frozen=True)
class StepOutcome:
    """What the loop reports back to the backend after executing an Invoke."""

    iteration: int
    expert: str
    output_key: str | None
    value: ContextValue | None
    error: str | None

    @property
    def ok(self) -> bool:
        return self.error is None
