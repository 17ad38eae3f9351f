"""Per-instance evaluation checklists and the versioned policy table.

A checklist holds one item per evaluation dimension for the instance's
sub-task, and each item holds a per-candidate verdict. The table mapping
sub-task to dimensions (and the experts that usually resolve them) ships as
a versioned JSON fixture so it can be audited and swapped without touching
code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from jure.core.errors import JureError
from jure.core.types import SubTask
from jure.orchestrator.instruction import InstructionFacts

PASS = "pass"
FAIL = "fail"
UNKNOWN = "unknown"

DIM_VISUAL_INTEGRITY = "visual-integrity"

_TABLE_VERSIONS = (1,)
_REQUIRES_FIELDS = (
    "attribute",
    "spatial_relation",
    "style_target",
    "background_target",
    "target_label",
    "direction",
)


class PolicyTableError(JureError):
    """The policy fixture file fails schema validation."""


@dataclass(frozen=True)
class CandidateVerdict:
    status: str
    evidence_keys: tuple[str, ...] = ()
    note: str = ""

    def __post_init__(self) -> None:
        if self.status not in (PASS, FAIL, UNKNOWN):
            raise ValueError(f"unknown verdict status {self.status!r}")
        if self.status != UNKNOWN and not self.evidence_keys:
            raise ValueError(f"{self.status} verdict must cite evidence")


@dataclass
class ChecklistItem:
    dimension: str
    primary: bool
    experts: tuple[str, ...]
    verdicts: dict[str, CandidateVerdict] = field(default_factory=dict)

    def verdict_for(self, model: str) -> CandidateVerdict:
        return self.verdicts.get(model, CandidateVerdict(UNKNOWN))

    def satisfied(self, candidates: tuple[str, ...]) -> str:
        """Tri-state roll-up: unknown until every candidate is resolved."""
        states = [self.verdict_for(m).status for m in candidates]
        if any(s == UNKNOWN for s in states):
            return UNKNOWN
        return FAIL if any(s == FAIL for s in states) else PASS

    def evidence_keys(self, candidates: tuple[str, ...]) -> tuple[str, ...]:
        keys: list[str] = []
        for model in candidates:
            for key in self.verdict_for(model).evidence_keys:
                if key not in keys:
                    keys.append(key)
        return tuple(keys)


@dataclass
class Checklist:
    sub_task: SubTask | None
    candidates: tuple[str, ...]
    items: list[ChecklistItem]

    def __post_init__(self) -> None:
        dims = [item.dimension for item in self.items]
        if len(set(dims)) != len(dims):
            raise ValueError(f"duplicate checklist dimensions: {dims}")

    @property
    def dimensions(self) -> tuple[str, ...]:
        return tuple(item.dimension for item in self.items)

    def item(self, dimension: str) -> ChecklistItem:
        for item in self.items:
            if item.dimension == dimension:
                return item
        raise KeyError(dimension)

    def resolve(
        self,
        dimension: str,
        model: str,
        status: str,
        evidence_keys: tuple[str, ...] = (),
        note: str = "",
    ) -> None:
        if model not in self.candidates:
            raise KeyError(f"unknown candidate {model!r}")
        self.item(dimension).verdicts[model] = CandidateVerdict(status, evidence_keys, note)

    def all_resolved(self) -> bool:
        return all(item.satisfied(self.candidates) != UNKNOWN for item in self.items)


def load_policy_table() -> dict:
    """Load and schema-check the bundled sub-task policy fixture."""
    raw = resources.files("jure.orchestrator").joinpath("policy_table.json").read_text("utf-8")
    try:
        table = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise PolicyTableError(f"policy table is not valid JSON: {exc}") from exc
    if not isinstance(table, dict) or set(table) != {"version", "subtasks"}:
        raise PolicyTableError("policy table must have exactly version and subtasks")
    if table["version"] not in _TABLE_VERSIONS:
        raise PolicyTableError(f"unrecognized policy table version {table['version']!r}")
    subtasks = table["subtasks"]
    if not isinstance(subtasks, dict):
        raise PolicyTableError("subtasks must be an object")
    for name, items in subtasks.items():
        try:
            SubTask.from_name(name)
        except (KeyError, ValueError) as exc:
            raise PolicyTableError(f"unknown sub-task {name!r}") from exc
        if not isinstance(items, list) or not items:
            raise PolicyTableError(f"{name}: items must be a non-empty list")
        seen: set[str] = set()
        for item in items:
            if not isinstance(item, dict):
                raise PolicyTableError(f"{name}: item must be an object")
            extra = set(item) - {"dimension", "primary", "requires", "experts"}
            if extra:
                raise PolicyTableError(f"{name}: unknown item fields {sorted(extra)}")
            if not isinstance(item.get("dimension"), str) or not item["dimension"]:
                raise PolicyTableError(f"{name}: item needs a dimension string")
            if item["dimension"] in seen:
                raise PolicyTableError(f"{name}: duplicate dimension {item['dimension']!r}")
            seen.add(item["dimension"])
            if not isinstance(item.get("primary"), bool):
                raise PolicyTableError(f"{name}/{item['dimension']}: primary must be boolean")
            if "requires" in item and item["requires"] not in _REQUIRES_FIELDS:
                raise PolicyTableError(
                    f"{name}/{item['dimension']}: unknown requires {item['requires']!r}"
                )
            experts = item.get("experts")
            if not isinstance(experts, list) or not all(isinstance(e, str) for e in experts):
                raise PolicyTableError(f"{name}/{item['dimension']}: experts must be strings")
    missing = {t.value for t in SubTask} - set(subtasks)
    if missing:
        raise PolicyTableError(f"policy table missing sub-tasks: {sorted(missing)}")
    return table


def build_checklist(
    facts: InstructionFacts, candidates: tuple[str, ...], table: dict | None = None
) -> Checklist:
    """Instantiate the checklist for one instance.

    Items with a ``requires`` clause are included only when the instruction
    actually carries that fact. An unclassified instance gets the integrity
    dimension alone: with no recognized intent, preservation is all that can
    be judged.
    """
    if facts.sub_task is None:
        fallback = ChecklistItem(DIM_VISUAL_INTEGRITY, primary=False, experts=("similarity",))
        return Checklist(None, candidates, [fallback])
    table = table if table is not None else load_policy_table()
    items = []
    for entry in table["subtasks"][facts.sub_task.value]:
        if "requires" in entry and getattr(facts, entry["requires"]) is None:
            continue
        items.append(
            ChecklistItem(
                dimension=entry["dimension"],
                primary=entry["primary"],
                experts=tuple(entry["experts"]),
            )
        )
    return Checklist(facts.sub_task, candidates, items)
