"""Deterministic instruction classifier over the nine-sub-task taxonomy.

An ordered rule list stands in for the LLM classifier so that runs are
reproducible; a backend with the same ``classify_instruction`` signature can
replace it. Absence (no rule fires, or two rules tie at the same priority)
is a value: callers discard or flag such instances.
"""

from __future__ import annotations

import re

from jure.core.types import SubTask

_TOKEN_RE = re.compile(r"[a-z0-9]+")

COLOR_WORDS = frozenset(
    """
    red orange yellow green blue purple pink brown black white gray grey
    golden gold silver metallic crimson turquoise beige maroon navy teal
    violet cyan magenta scarlet
    """.split()
)

MATERIAL_WORDS = frozenset(
    """
    wooden wood metal plastic glass leather velvet marble stone brick
    rusty shiny matte striped dotted checkered plaid furry glossy
    """.split()
)

# Priority-ordered keyword rules; the first (lowest-priority-number) firing
# rule wins, and a tie at the winning priority yields no classification.
_RULES: list[tuple[int, SubTask, frozenset[str]]] = [
    (0, SubTask.OBJECT_ADDITION, frozenset({"add", "insert"})),
    (1, SubTask.OBJECT_REMOVAL, frozenset({"remove", "erase", "delete"})),
    (2, SubTask.OBJECT_REPLACEMENT, frozenset({"replace", "swap"})),
    (3, SubTask.OBJECT_MOVEMENT, frozenset({"move", "shift"})),
    (4, SubTask.BACKGROUND_CHANGE, frozenset({"background", "backdrop"})),
    (
        5,
        SubTask.STYLE_CHANGE,
        frozenset({"style", "painting", "sketch", "watercolor", "cartoon", "anime", "drawing"}),
    ),
    (
        6,
        SubTask.SIZE_SHAPE_MODIFICATION,
        frozenset(
            {"resize", "taller", "bigger", "shape", "smaller", "shorter",
             "wider", "larger", "enlarge", "shrink"}
        ),
    ),
    (
        7,
        SubTask.PERSPECTIVE_EDITING,
        frozenset({"view", "angle", "camera", "perspective", "viewpoint"}),
    ),
    (8, SubTask.ATTRIBUTE_CHANGE, frozenset({"color", "colour", "texture"}) | COLOR_WORDS | MATERIAL_WORDS),
]


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def classify_instruction(instruction: str) -> SubTask | None:
    """Classify an editing instruction, or return None when no rule fires."""
    if not instruction:
        raise ValueError("instruction must be non-empty")
    tokens = set(tokenize(instruction))
    fired = [(priority, sub_task) for priority, sub_task, words in _RULES if tokens & words]
    if not fired:
        return None
    best = min(priority for priority, _ in fired)
    winners = [sub_task for priority, sub_task in fired if priority == best]
    if len(winners) != 1:
        return None
    return winners[0]
