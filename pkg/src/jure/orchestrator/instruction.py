"""Extraction of evaluation targets from an editing instruction.

The policy backend needs concrete handles to route on: which object should
appear or vanish, which color was requested, which spatial relation must
hold. A small deterministic grammar over the classifier's token stream
recovers them; anything it cannot find stays None and the corresponding
checklist dimension simply remains unprobed.
"""

from __future__ import annotations

from dataclasses import dataclass

from jure.core.classify import COLOR_WORDS, MATERIAL_WORDS, tokenize
from jure.core.types import RGB, SubTask

COLOR_RGB: dict[str, RGB] = {
    "red": (255, 0, 0),
    "orange": (255, 165, 0),
    "yellow": (255, 255, 0),
    "green": (0, 128, 0),
    "blue": (0, 0, 255),
    "purple": (128, 0, 128),
    "pink": (255, 192, 203),
    "brown": (139, 69, 19),
    "black": (0, 0, 0),
    "white": (255, 255, 255),
    "gray": (128, 128, 128),
    "grey": (128, 128, 128),
    "golden": (255, 215, 0),
    "gold": (255, 215, 0),
    "silver": (192, 192, 192),
    "metallic": (192, 192, 192),
    "crimson": (220, 20, 60),
    "turquoise": (64, 224, 208),
    "beige": (245, 245, 220),
    "maroon": (128, 0, 0),
    "navy": (0, 0, 128),
    "teal": (0, 128, 128),
    "violet": (238, 130, 238),
    "cyan": (0, 255, 255),
    "magenta": (255, 0, 255),
    "scarlet": (255, 36, 0),
}

# Relation keyword -> canonical relation id.
RELATIONS = {
    "behind": "behind",
    "front": "in-front",
    "above": "above",
    "over": "above",
    "below": "below",
    "under": "below",
    "beneath": "below",
    "left": "left-of",
    "right": "right-of",
    "next": "next-to",
    "beside": "next-to",
    "near": "next-to",
}

GROW_WORDS = frozenset({"bigger", "larger", "enlarge", "grow", "taller", "wider", "expand", "huge"})
SHRINK_WORDS = frozenset({"smaller", "shrink", "shorter", "narrower", "thinner", "reduce", "tiny"})

_STOPWORDS = frozenset(
    {
        "a", "an", "the", "of", "to", "it", "its", "on", "in", "at", "with",
        "and", "so", "that", "is", "are", "be", "please", "image", "picture",
        "photo", "scene", "side",
        # tokenizer artifact of possessives ("car's" -> "car", "s")
        "s",
        # movement adverbs that would otherwise glue onto the target noun
        "closer", "further", "farther", "away",
    }
)

_PHRASE_STOPS = (
    frozenset(RELATIONS)
    | frozenset({"from", "into", "onto", "to", "toward", "towards", "at", "by", "with", "in", "on", "so"})
    | frozenset({"color", "colour", "texture", "pattern"})
    | GROW_WORDS
    | SHRINK_WORDS
)


@dataclass(frozen=True)
class InstructionFacts:
    """Everything the policy backend can lift out of one instruction."""

    sub_task: SubTask | None
    target_label: str | None = None
    anchor_label: str | None = None
    replaced_label: str | None = None
    attribute: dict | None = None
    spatial_relation: str | None = None
    direction: str | None = None
    style_target: str | None = None
    background_target: tuple[str, ...] | None = None


def _phrase(tokens: list[str], start: int) -> tuple[str | None, int]:
    """Collect a noun phrase from ``start``; returns (phrase, stop index)."""
    collected: list[str] = []
    attribute_words: list[str] = []
    i = start
    while i < len(tokens):
        tok = tokens[i]
        if tok in _PHRASE_STOPS:
            break
        if tok in COLOR_WORDS or tok in MATERIAL_WORDS:
            attribute_words.append(tok)
        elif tok not in _STOPWORDS:
            collected.append(tok)
        i += 1
    if not collected:
        # "a glass", "a red one": the attribute word is the whole noun phrase
        collected = attribute_words
    return (" ".join(collected) or None), i


def _attribute_in(tokens: list[str]) -> dict | None:
    for tok in tokens:
        if tok in COLOR_RGB:
            return {"color": COLOR_RGB[tok]}
    for tok in tokens:
        if tok in MATERIAL_WORDS:
            return {"pattern": tok}
    return None


def _first_index(tokens: list[str], words) -> int | None:
    for i, tok in enumerate(tokens):
        if tok in words:
            return i
    return None


def _parse_addition(tokens: list[str]) -> dict:
    verb = _first_index(tokens, {"add", "insert"})
    if verb is None:
        return {}
    target, stop = _phrase(tokens, verb + 1)
    facts: dict = {
        "target_label": target,
        "attribute": _attribute_in(tokens[verb + 1 : stop]),
    }
    for i in range(stop, len(tokens)):
        if tokens[i] in RELATIONS:
            anchor, _ = _phrase(tokens, i + 1)
            facts["spatial_relation"] = RELATIONS[tokens[i]]
            facts["anchor_label"] = anchor
            break
    return facts


def _parse_removal(tokens: list[str]) -> dict:
    verb = _first_index(tokens, {"remove", "erase", "delete"})
    if verb is None:
        return {}
    target, _ = _phrase(tokens, verb + 1)
    return {"target_label": target}


def _parse_replacement(tokens: list[str]) -> dict:
    verb = _first_index(tokens, {"replace", "swap"})
    if verb is None:
        return {}
    replaced, stop = _phrase(tokens, verb + 1)
    facts: dict = {"replaced_label": replaced}
    pivot = _first_index(tokens[stop:], {"with", "by"})
    if pivot is not None:
        start = stop + pivot + 1
        target, end = _phrase(tokens, start)
        facts["target_label"] = target
        facts["attribute"] = _attribute_in(tokens[start:end])
    return facts


def _parse_movement(tokens: list[str]) -> dict:
    verb = _first_index(tokens, {"move", "shift"})
    if verb is None:
        return {}
    target, stop = _phrase(tokens, verb + 1)
    direction = None
    for tok in tokens[stop:]:
        if tok in ("left", "right", "up", "down", "center", "middle"):
            direction = tok
            break
    return {"target_label": target, "direction": direction}


def _parse_background(tokens: list[str]) -> dict:
    marker = _first_index(tokens, {"background", "backdrop"})
    if marker is None:
        return {}
    pivot = _first_index(tokens[marker:], {"to", "into", "with"})
    if pivot is None:
        return {}
    wanted, _ = _phrase(tokens, marker + pivot + 1)
    return {"background_target": tuple(wanted.split()) if wanted else None}


def _parse_attribute_change(tokens: list[str]) -> dict:
    facts: dict = {"attribute": _attribute_in(tokens)}
    naming = _first_index(tokens, {"color", "colour", "texture", "pattern"})
    if naming is not None:
        pivot = _first_index(tokens[naming:], {"of"})
        if pivot is not None:
            target, _ = _phrase(tokens, naming + pivot + 1)
            facts["target_label"] = target
            return facts
    verb = _first_index(tokens, {"change", "make", "turn", "paint", "recolor", "dye", "give"})
    if verb is not None:
        start = verb + 1
        # The attribute nouns themselves are not the edit target.
        while start < len(tokens) and tokens[start] in ("color", "colour", "texture", "pattern"):
            start += 1
        target, _ = _phrase(tokens, start)
        facts["target_label"] = target
    return facts


def _parse_style(tokens: list[str]) -> dict:
    anchor = _first_index(tokens, {"style"})
    if anchor is not None and anchor > 0:
        collected: list[str] = []
        i = anchor - 1
        while i >= 0 and tokens[i] not in _STOPWORDS and tokens[i] not in _PHRASE_STOPS:
            collected.append(tokens[i])
            i -= 1
        if collected:
            return {"style_target": "-".join(reversed(collected))}
    for tok in tokens:
        if tok in ("painting", "sketch", "watercolor", "cartoon", "anime", "drawing"):
            return {"style_target": tok}
    return {}


def _parse_size_shape(tokens: list[str]) -> dict:
    direction = None
    if set(tokens) & GROW_WORDS:
        direction = "grow"
    elif set(tokens) & SHRINK_WORDS:
        direction = "shrink"
    verb = _first_index(tokens, {"make", "resize", "enlarge", "shrink", "turn", "render"})
    target = None
    if verb is not None:
        target, _ = _phrase(tokens, verb + 1)
    return {"target_label": target, "direction": direction}


_PARSERS = {
    SubTask.OBJECT_ADDITION: _parse_addition,
    SubTask.OBJECT_REMOVAL: _parse_removal,
    SubTask.OBJECT_REPLACEMENT: _parse_replacement,
    SubTask.OBJECT_MOVEMENT: _parse_movement,
    SubTask.BACKGROUND_CHANGE: _parse_background,
    SubTask.ATTRIBUTE_CHANGE: _parse_attribute_change,
    SubTask.STYLE_CHANGE: _parse_style,
    SubTask.SIZE_SHAPE_MODIFICATION: _parse_size_shape,
    SubTask.PERSPECTIVE_EDITING: lambda tokens: {},
}


def parse_instruction(instruction: str, sub_task: SubTask | None) -> InstructionFacts:
    if sub_task is None:
        return InstructionFacts(sub_task=None)
    tokens = tokenize(instruction)
    return InstructionFacts(sub_task=sub_task, **_PARSERS[sub_task](tokens))
