"""Instruction fact extraction for the policy backend."""

from __future__ import annotations

import pytest

from jure.core.types import SubTask
from jure.orchestrator.instruction import (
    COLOR_RGB,
    InstructionFacts,
    parse_instruction,
)


def facts(instruction: str, sub_task: SubTask) -> InstructionFacts:
    return parse_instruction(instruction, sub_task)


class TestAddition:
    def test_target_attribute_and_relation(self):
        parsed = facts("Add a black cat behind the boy", SubTask.OBJECT_ADDITION)
        assert parsed.target_label == "cat"
        assert parsed.attribute == {"color": COLOR_RGB["black"]}
        assert parsed.spatial_relation == "behind"
        assert parsed.anchor_label == "boy"

    def test_plain_addition_has_no_attribute_or_relation(self):
        parsed = facts("Add a cat", SubTask.OBJECT_ADDITION)
        assert parsed.target_label == "cat"
        assert parsed.attribute is None
        assert parsed.spatial_relation is None

    def test_multiword_target(self):
        parsed = facts("Add a bouquet of flowers on the table.", SubTask.OBJECT_ADDITION)
        assert parsed.target_label is not None
        assert "bouquet" in parsed.target_label

    def test_above_relation(self):
        parsed = facts("Add a red ball above the box", SubTask.OBJECT_ADDITION)
        assert parsed.spatial_relation == "above"
        assert parsed.anchor_label == "box"
        assert parsed.attribute == {"color": COLOR_RGB["red"]}


class TestRemoval:
    def test_target(self):
        parsed = facts("Remove the lamp from the table.", SubTask.OBJECT_REMOVAL)
        assert parsed.target_label == "lamp"


class TestReplacement:
    def test_replaced_and_replacement(self):
        parsed = facts("Replace the cat with a teddy bear.", SubTask.OBJECT_REPLACEMENT)
        assert parsed.replaced_label == "cat"
        assert parsed.target_label == "teddy bear"

    def test_replaced_by_form(self):
        parsed = facts("Replace the mug by a glass", SubTask.OBJECT_REPLACEMENT)
        assert parsed.replaced_label == "mug"
        assert parsed.target_label == "glass"


class TestMovement:
    def test_target_and_direction(self):
        parsed = facts("Move the ball to the left side", SubTask.OBJECT_MOVEMENT)
        assert parsed.target_label == "ball"
        assert parsed.direction == "left"

    def test_movement_adverbs_do_not_join_the_target(self):
        parsed = facts("Move the chair closer to the window.", SubTask.OBJECT_MOVEMENT)
        assert parsed.target_label == "chair"
        assert parsed.direction is None


class TestBackground:
    def test_background_tokens(self):
        parsed = facts("Change the background to a beach.", SubTask.BACKGROUND_CHANGE)
        assert parsed.background_target == ("beach",)


class TestAttribute:
    def test_possessive_does_not_pollute_target(self):
        parsed = facts(
            "Change the car's color to metallic red.", SubTask.ATTRIBUTE_CHANGE
        )
        assert parsed.target_label == "car"
        assert parsed.attribute is not None and "color" in parsed.attribute

    def test_simple_recolor(self):
        parsed = facts("Change the color of the car to red", SubTask.ATTRIBUTE_CHANGE)
        assert parsed.attribute == {"color": COLOR_RGB["red"]}
        assert parsed.target_label == "car"


class TestStyle:
    def test_style_phrase_hyphenated(self):
        parsed = facts(
            "Render the scene in a oil painting style.", SubTask.STYLE_CHANGE
        )
        assert parsed.style_target == "oil-painting"

    def test_sketch(self):
        parsed = facts("make it a pencil sketch", SubTask.STYLE_CHANGE)
        assert parsed.style_target is not None
        assert "sketch" in parsed.style_target


class TestSizeShape:
    def test_grow(self):
        parsed = facts("Resize the tree to make it taller.", SubTask.SIZE_SHAPE_MODIFICATION)
        assert parsed.target_label == "tree"
        assert parsed.direction == "grow"

    def test_shrink(self):
        parsed = facts("make the ball smaller", SubTask.SIZE_SHAPE_MODIFICATION)
        assert parsed.direction == "shrink"


class TestUnclassified:
    def test_none_sub_task_gives_empty_facts(self):
        parsed = parse_instruction("qwerty zzz", None)
        assert parsed == InstructionFacts(sub_task=None)


@pytest.mark.parametrize(
    "color,rgb",
    [("black", (0, 0, 0)), ("red", (255, 0, 0)), ("white", (255, 255, 255))],
)
def test_color_table_spot_checks(color, rgb):
    assert COLOR_RGB[color] == rgb
