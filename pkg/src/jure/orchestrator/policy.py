"""Deterministic table-driven reasoning backend.

The backend walks the instance's checklist dimension by dimension, planning
expert probes whose results it folds back into per-candidate verdicts.  All
routing is a pure function of (instruction, candidate list, expert results),
so two runs over the same instance produce identical traces byte for byte.

Routing shape per dimension:

* presence / absence / replacement: one detection call per candidate.
* attribute-accuracy: chroma analysis restricted to the located object.
* spatial-correctness: segmentation of the two participants, then a depth
  comparison (for depth relations) or direct box geometry (for planar ones).
* visual-integrity: segmentation of the edited areas on the original, then
  one batched similarity call over the complement region.
* background / content / style / size / movement / perspective: analogous
  single-purpose probes, detailed at each stage builder.

Candidates that fail a primary-intent dimension, or that lack the spatial
anchor, are excluded from later attribute/spatial argument lists; their
remaining dimensions stay unknown and score accordingly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable

from jure.core.classify import classify_instruction, tokenize
from jure.core.context import TAG_IMAGE_REF, ContextStore, ContextValue
from jure.core.errors import JureError
from jure.core.scene import resolve_scene
from jure.core.types import EditInstance, SubTask
from jure.experts.registry import ExpertRegistry
from jure.experts.reports import DepthStats, Detection
from jure.maskops import BoundingBox, RleMask, mask_complement, mask_from_box, mask_union, box_iou
from jure.orchestrator.actions import Decision, Finish, Invoke, StepOutcome
from jure.orchestrator.checklist import (
    FAIL,
    PASS,
    UNKNOWN,
    Checklist,
    build_checklist,
)
from jure.orchestrator.instruction import InstructionFacts, parse_instruction

_DEPTH_RELATIONS = ("behind", "in-front")


@dataclass(frozen=True)
class PolicyThresholds:
    """Pass/fail cut points for continuous expert scores (configuration)."""

    detection_confidence: float = 0.5
    attribute_min: float = 0.7
    style_min: float = 0.7
    integrity_min: float = 0.85
    depth_margin: float = 0.05
    moved_iou_max: float = 0.5
    grow_ratio_min: float = 1.1
    shrink_ratio_max: float = 0.9
    perspective_depth_delta: float = 0.05

    def __post_init__(self) -> None:
        for name in ("detection_confidence", "attribute_min", "style_min", "integrity_min"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be within [0, 1], got {value}")


@dataclass
class _Probe:
    kind: str
    expert: str
    args: dict
    rationale: str
    meta: dict


class PolicyBackend:
    """One backend instance drives exactly one evaluation session."""

    name = "policy"

    def __init__(
        self,
        sub_task: SubTask | None = None,
        thresholds: PolicyThresholds | None = None,
        policy_table: dict | None = None,
    ):
        self._sub_task_override = sub_task
        self.thresholds = thresholds or PolicyThresholds()
        self._table = policy_table

    # -- session lifecycle ----------------------------------------------------

    def begin(self, instance: EditInstance, registry: ExpertRegistry) -> Checklist:
        self.instance = instance
        self.registry = registry
        sub_task = self._sub_task_override
        if sub_task is None:
            sub_task = classify_instruction(instance.instruction)
        self.facts: InstructionFacts = parse_instruction(instance.instruction, sub_task)
        self.models: tuple[str, ...] = tuple(instance.candidate_names)
        self.checklist = build_checklist(self.facts, self.models, self._table)

        self._queue: deque[_Probe] = deque()
        self._inflight: _Probe | None = None
        self._bootstrap_pending = True
        self._stage_idx = 0
        self._stages: list[Callable[[], None]] = [
            self._stage_for(item.dimension) for item in self.checklist.items
        ]

        self.pruned: set[str] = set()
        # Best box per (owner, label); owner is a model name or "__original__".
        self._boxes: dict[tuple[str, str], BoundingBox] = {}
        self._det_keys: dict[str, str] = {}
        self._orig_det_key: str | None = None
        self._orig_det_done = False
        self._depth_stats: dict[tuple[str, str], tuple[DepthStats, str]] = {}
        self._seg_keys: dict[str, str] = {}
        self._scenes: dict[str, object] = {}
        return self.checklist

    def decide(self, context: ContextStore) -> Decision:
        while not self._queue and self._stage_idx < len(self._stages):
            builder = self._stages[self._stage_idx]
            self._stage_idx += 1
            builder()
        if not self._queue:
            return Decision(Finish(), rationale=self._finish_rationale())
        probe = self._queue.popleft()
        self._inflight = probe
        writes: dict[str, ContextValue] = {}
        if self._bootstrap_pending:
            writes = self._bootstrap_writes()
            self._bootstrap_pending = False
        return Decision(Invoke(probe.expert, probe.args), rationale=probe.rationale, writes=writes)

    def absorb(self, outcome: StepOutcome) -> None:
        probe = self._inflight
        self._inflight = None
        if probe is None:
            return
        getattr(self, f"_on_{probe.kind}")(probe, outcome)

    # -- helpers ---------------------------------------------------------------

    def _bootstrap_writes(self) -> dict[str, ContextValue]:
        writes = {
            "instance.instruction": ContextValue.text(self.instance.instruction),
            "instance.original": ContextValue(TAG_IMAGE_REF, self.instance.original),
        }
        for model in self.models:
            writes[f"instance.candidate.{model}"] = ContextValue(
                TAG_IMAGE_REF, self.instance.candidate_image(model)
            )
        return writes

    def _finish_rationale(self) -> str:
        open_dims = [
            item.dimension
            for item in self.checklist.items
            if item.satisfied(self.models) == UNKNOWN
        ]
        if not open_dims:
            return "all checklist dimensions resolved"
        return "no further probes available; unresolved: " + ", ".join(open_dims)

    def _stage_for(self, dimension: str) -> Callable[[], None]:
        builders = {
            "presence": self._stage_cand_detection,
            "absence": self._stage_cand_detection,
            "replacement": self._stage_cand_detection,
            "attribute-accuracy": self._stage_attribute,
            "spatial-correctness": self._stage_spatial,
            "visual-integrity": self._stage_integrity,
            "background-match": self._stage_background,
            "content-preservation": self._stage_content,
            "style-match": self._stage_style,
            "movement": self._stage_orig_compare,
            "size-shape": self._stage_orig_compare,
            "perspective-change": self._stage_perspective,
        }
        builder = builders.get(dimension)
        if builder is None:
            return lambda: self._resolve_all(dimension, UNKNOWN, note="no probe strategy")
        if dimension in ("presence", "absence", "replacement"):
            return lambda: self._stage_cand_detection(dimension)
        if dimension in ("movement", "size-shape"):
            return lambda: self._stage_orig_compare(dimension)
        return builder

    def _resolve_all(self, dimension: str, status: str, note: str) -> None:
        for model in self.models:
            self.checklist.resolve(dimension, model, status, note=note)

    def _resolve(self, dimension: str, model: str, status: str, evidence=(), note: str = "") -> None:
        self.checklist.resolve(dimension, model, status, tuple(evidence), note)
        if status == FAIL and self.checklist.item(dimension).primary:
            self.pruned.add(model)

    def _scene(self, owner: str):
        if owner not in self._scenes:
            ref = (
                self.instance.original
                if owner == "__original__"
                else self.instance.candidate_image(owner)
            )
            self._scenes[owner] = resolve_scene(ref)
        return self._scenes[owner]

    def _mark_unknown_if_open(self, dimension: str, model: str, note: str) -> None:
        if self.checklist.item(dimension).verdict_for(model).status == UNKNOWN:
            self.checklist.resolve(dimension, model, UNKNOWN, note=note)

    # -- candidate detection (presence / absence / replacement) ----------------

    def _detection_dim(self) -> str:
        for dim in ("presence", "absence", "replacement"):
            if dim in self.checklist.dimensions:
                return dim
        raise AssertionError("no detection dimension in checklist")

    def _stage_cand_detection(self, dimension: str) -> None:
        if self._det_keys:
            return  # one detection pass feeds every detection-backed dimension
        target = self.facts.target_label
        labels: list[str] = []
        if target:
            labels.append(target)
        if dimension == "replacement" and self.facts.replaced_label:
            labels.append(self.facts.replaced_label)
        if (
            self.facts.sub_task is SubTask.OBJECT_ADDITION
            and self.facts.spatial_relation
            and self.facts.anchor_label
        ):
            labels.append(self.facts.anchor_label)
        if not labels:
            self._resolve_all(dimension, UNKNOWN, note="no target parsed from instruction")
            return
        for model in self.models:
            self._queue.append(
                _Probe(
                    kind="cand_det",
                    expert="objectDetection",
                    args={"image": self.instance.candidate_image(model), "labels": list(labels)},
                    rationale=f"dim={dimension} cand={model} locate {', '.join(labels)}",
                    meta={"model": model, "dimension": dimension, "labels": list(labels)},
                )
            )

    def _on_cand_det(self, probe: _Probe, outcome: StepOutcome) -> None:
        model = probe.meta["model"]
        dimension = probe.meta["dimension"]
        if not outcome.ok:
            self._resolve(dimension, model, UNKNOWN, note=f"detection failed: {outcome.error}")
            return
        self._det_keys[model] = outcome.output_key
        found: dict[str, Detection] = {}
        for det in outcome.value.value.items:
            if det.confidence >= self.thresholds.detection_confidence and det.label not in found:
                found[det.label] = det
                self._boxes[(model, det.label)] = det.bbox
        target = self.facts.target_label
        evidence = (outcome.output_key,)
        if dimension == "presence":
            if target in found:
                self._resolve(dimension, model, PASS, evidence, note=f"'{target}' detected")
            else:
                self._resolve(dimension, model, FAIL, evidence, note=f"'{target}' not detected")
        elif dimension == "absence":
            if target in found:
                self._resolve(dimension, model, FAIL, evidence, note=f"'{target}' still present")
            else:
                self._resolve(dimension, model, PASS, evidence, note=f"'{target}' removed")
        elif dimension == "replacement":
            old = self.facts.replaced_label
            new_there = target in found
            old_gone = old not in found
            if new_there and old_gone:
                note = f"'{target}' present and '{old}' gone"
                self._resolve(dimension, model, PASS, evidence, note=note)
            else:
                parts = []
                if not new_there:
                    parts.append(f"'{target}' missing")
                if not old_gone:
                    parts.append(f"'{old}' still present")
                self._resolve(dimension, model, FAIL, evidence, note="; ".join(parts))

    # -- attribute accuracy -----------------------------------------------------

    def _stage_attribute(self) -> None:
        dimension = "attribute-accuracy"
        target = self.facts.target_label
        for model in self.models:
            if model in self.pruned:
                self._resolve(dimension, model, UNKNOWN, note="pruned after primary-intent failure")
                continue
            box = self._boxes.get((model, target)) if target else None
            if box is None:
                self._resolve(dimension, model, UNKNOWN, note="target not located")
                continue
            try:
                canvas = self._scene(model).canvas
                region = mask_from_box(box, canvas)
            except JureError as exc:
                self._resolve(dimension, model, UNKNOWN, note=f"cannot build region: {exc}")
                continue
            self._queue.append(
                _Probe(
                    kind="chroma",
                    expert="chromaPattern",
                    args={
                        "image": self.instance.candidate_image(model),
                        "region": region,
                        "expected": self.facts.attribute,
                    },
                    rationale=f"dim={dimension} cand={model} check requested attribute on '{target}'",
                    meta={"model": model},
                )
            )

    def _on_chroma(self, probe: _Probe, outcome: StepOutcome) -> None:
        dimension = "attribute-accuracy"
        model = probe.meta["model"]
        if not outcome.ok:
            self._resolve(dimension, model, UNKNOWN, note=f"chroma failed: {outcome.error}")
            return
        match = outcome.value.value.attribute_match
        evidence = (outcome.output_key, self._det_keys[model])
        if match >= self.thresholds.attribute_min:
            self._resolve(dimension, model, PASS, evidence, note=f"attribute match {match:.3f}")
        else:
            self._resolve(dimension, model, FAIL, evidence, note=f"attribute match {match:.3f}")

    # -- spatial correctness ------------------------------------------------------

    def _stage_spatial(self) -> None:
        dimension = "spatial-correctness"
        relation = self.facts.spatial_relation
        target = self.facts.target_label
        anchor = self.facts.anchor_label
        for model in self.models:
            if model in self.pruned:
                self._resolve(dimension, model, UNKNOWN, note="pruned after primary-intent failure")
                continue
            tbox = self._boxes.get((model, target)) if target else None
            abox = self._boxes.get((model, anchor)) if anchor else None
            det_key = self._det_keys.get(model)
            if tbox is None:
                self._resolve(dimension, model, UNKNOWN, note="target not located")
                continue
            if abox is None:
                evidence = (det_key,) if det_key else ()
                status = FAIL if det_key else UNKNOWN
                self._resolve(
                    dimension, model, status, evidence,
                    note=f"anchor '{anchor}' missing from candidate",
                )
                continue
            if relation not in _DEPTH_RELATIONS:
                ok = _planar_relation_holds(relation, tbox, abox)
                self._resolve(
                    dimension, model, PASS if ok else FAIL, (det_key,),
                    note=f"box geometry for '{relation}'",
                )
                continue
            self._queue.append(
                _Probe(
                    kind="seg_spatial",
                    expert="segmentation",
                    args={
                        "image": self.instance.candidate_image(model),
                        "boxes": [tbox, abox],
                    },
                    rationale=(
                        f"dim={dimension} cand={model} masks for '{target}' and '{anchor}'"
                    ),
                    meta={"model": model},
                )
            )

    def _on_seg_spatial(self, probe: _Probe, outcome: StepOutcome) -> None:
        dimension = "spatial-correctness"
        model = probe.meta["model"]
        if not outcome.ok:
            self._resolve(dimension, model, UNKNOWN, note=f"segmentation failed: {outcome.error}")
            return
        masks = outcome.value.value
        self._seg_keys[model] = outcome.output_key
        for role, item in zip(("target", "anchor"), masks.items):
            self._queue.append(
                _Probe(
                    kind="depth_spatial",
                    expert="depth",
                    args={"image": self.instance.candidate_image(model), "region": item.mask},
                    rationale=f"dim={dimension} cand={model} depth of {role}",
                    meta={"model": model, "role": role},
                )
            )

    def _on_depth_spatial(self, probe: _Probe, outcome: StepOutcome) -> None:
        dimension = "spatial-correctness"
        model = probe.meta["model"]
        role = probe.meta["role"]
        if not outcome.ok:
            self._resolve(dimension, model, UNKNOWN, note=f"depth failed: {outcome.error}")
            return
        self._depth_stats[(model, role)] = (outcome.value.value, outcome.output_key)
        if (model, "target") not in self._depth_stats or (model, "anchor") not in self._depth_stats:
            return
        target_stats, target_key = self._depth_stats[(model, "target")]
        anchor_stats, anchor_key = self._depth_stats[(model, "anchor")]
        relation = self.facts.spatial_relation
        margin = self.thresholds.depth_margin
        if relation == "behind":
            ok = target_stats.mean_depth > anchor_stats.mean_depth + margin
        else:
            ok = target_stats.mean_depth < anchor_stats.mean_depth - margin
        evidence = (self._seg_keys[model], target_key, anchor_key)
        note = (
            f"target depth {target_stats.mean_depth:.3f} vs anchor "
            f"{anchor_stats.mean_depth:.3f} for '{relation}'"
        )
        self._resolve(dimension, model, PASS if ok else FAIL, evidence, note=note)

    # -- movement and size (compare against the original) ------------------------

    def _stage_orig_compare(self, dimension: str) -> None:
        target = self.facts.target_label
        if not target:
            self._resolve_all(dimension, UNKNOWN, note="no target parsed from instruction")
            return
        self._queue.append(
            _Probe(
                kind="orig_det",
                expert="objectDetection",
                args={"image": self.instance.original, "labels": [target]},
                rationale=f"dim={dimension} locate '{target}' in the original",
                meta={"purpose": dimension, "labels": [target]},
            )
        )

    def _on_orig_det(self, probe: _Probe, outcome: StepOutcome) -> None:
        purpose = probe.meta["purpose"]
        if outcome.ok:
            self._orig_det_key = outcome.output_key
            for det in outcome.value.value.items:
                if (
                    det.confidence >= self.thresholds.detection_confidence
                    and ("__original__", det.label) not in self._boxes
                ):
                    self._boxes[("__original__", det.label)] = det.bbox
        self._orig_det_done = True
        if purpose == "visual-integrity":
            if not outcome.ok:
                self._resolve_all(purpose, UNKNOWN, note=f"detection failed: {outcome.error}")
                return
            self._enqueue_integrity_seg()
            return
        if not outcome.ok:
            self._resolve_all(purpose, UNKNOWN, note=f"detection failed: {outcome.error}")
            return
        if purpose == "movement":
            self._resolve_movement()
        else:
            self._resolve_size_shape()

    def _resolve_movement(self) -> None:
        dimension = "movement"
        target = self.facts.target_label
        orig_box = self._boxes.get(("__original__", target))
        for model in self.models:
            if model in self.pruned:
                self._resolve(dimension, model, UNKNOWN, note="pruned after primary-intent failure")
                continue
            cand_box = self._boxes.get((model, target))
            if orig_box is None or cand_box is None:
                where = "original" if orig_box is None else "candidate"
                self._resolve(dimension, model, UNKNOWN, note=f"target not located in {where}")
                continue
            iou = box_iou(orig_box, cand_box)
            moved = iou < self.thresholds.moved_iou_max
            direction_ok = _direction_holds(self.facts.direction, orig_box, cand_box)
            evidence = (self._orig_det_key, self._det_keys[model])
            note = f"IoU vs original {iou:.3f}, direction '{self.facts.direction}'"
            status = PASS if moved and direction_ok else FAIL
            self._resolve(dimension, model, status, evidence, note=note)

    def _resolve_size_shape(self) -> None:
        dimension = "size-shape"
        target = self.facts.target_label
        orig_box = self._boxes.get(("__original__", target))
        for model in self.models:
            if model in self.pruned:
                self._resolve(dimension, model, UNKNOWN, note="pruned after primary-intent failure")
                continue
            cand_box = self._boxes.get((model, target))
            if orig_box is None or cand_box is None:
                where = "original" if orig_box is None else "candidate"
                self._resolve(dimension, model, UNKNOWN, note=f"target not located in {where}")
                continue
            ratio = cand_box.area / orig_box.area
            if self.facts.direction == "grow":
                ok = ratio >= self.thresholds.grow_ratio_min
            elif self.facts.direction == "shrink":
                ok = ratio <= self.thresholds.shrink_ratio_max
            else:
                ok = (
                    ratio >= self.thresholds.grow_ratio_min
                    or ratio <= self.thresholds.shrink_ratio_max
                )
            evidence = (self._orig_det_key, self._det_keys[model])
            note = f"area ratio {ratio:.3f} for '{self.facts.direction or 'changed'}'"
            self._resolve(dimension, model, PASS if ok else FAIL, evidence, note=note)

    # -- visual integrity ----------------------------------------------------------

    def _integrity_orig_labels(self) -> list[str]:
        sub_task = self.facts.sub_task
        if sub_task is SubTask.OBJECT_REPLACEMENT:
            return [self.facts.replaced_label] if self.facts.replaced_label else []
        if sub_task in (
            SubTask.OBJECT_REMOVAL,
            SubTask.OBJECT_MOVEMENT,
            SubTask.ATTRIBUTE_CHANGE,
            SubTask.SIZE_SHAPE_MODIFICATION,
        ):
            return [self.facts.target_label] if self.facts.target_label else []
        return []

    def _stage_integrity(self) -> None:
        dimension = "visual-integrity"
        open_models = [
            m
            for m in self.models
            if self.checklist.item(dimension).verdict_for(m).status == UNKNOWN
        ]
        if not open_models:
            return
        if self.facts.sub_task in (SubTask.STYLE_CHANGE, None):
            self._enqueue_similarity(region=None, seg_key=None, mode="threshold")
            return
        labels = self._integrity_orig_labels()
        if labels and not self._orig_det_done:
            self._queue.append(
                _Probe(
                    kind="orig_det",
                    expert="objectDetection",
                    args={"image": self.instance.original, "labels": labels},
                    rationale=f"dim={dimension} locate edited region in the original",
                    meta={"purpose": dimension, "labels": labels},
                )
            )
            return
        self._enqueue_integrity_seg()

    def _edit_region_boxes(self) -> list[BoundingBox]:
        boxes: list[BoundingBox] = []
        target = self.facts.target_label
        for label in self._integrity_orig_labels():
            box = self._boxes.get(("__original__", label))
            if box is not None and box not in boxes:
                boxes.append(box)
        if target:
            for model in self.models:
                box = self._boxes.get((model, target))
                if box is not None and box not in boxes:
                    boxes.append(box)
        return boxes

    def _enqueue_integrity_seg(self) -> None:
        dimension = "visual-integrity"
        boxes = self._edit_region_boxes()
        if not boxes:
            self._enqueue_similarity(region=None, seg_key=None, mode="threshold")
            return
        self._queue.append(
            _Probe(
                kind="seg_integrity",
                expert="segmentation",
                args={"image": self.instance.original, "boxes": boxes},
                rationale=f"dim={dimension} mask the edited areas on the original",
                meta={},
            )
        )

    def _on_seg_integrity(self, probe: _Probe, outcome: StepOutcome) -> None:
        dimension = "visual-integrity"
        if not outcome.ok:
            self._resolve_all(dimension, UNKNOWN, note=f"segmentation failed: {outcome.error}")
            return
        masks = [item.mask for item in outcome.value.value.items]
        try:
            region = mask_complement(mask_union(masks))
        except JureError as exc:
            self._resolve_all(dimension, UNKNOWN, note=f"cannot build region: {exc}")
            return
        if region.popcount == 0:
            self._resolve_all(dimension, UNKNOWN, note="edit region covers the whole canvas")
            return
        self._enqueue_similarity(region=region, seg_key=outcome.output_key, mode="threshold")

    def _enqueue_similarity(self, region: RleMask | None, seg_key: str | None, mode: str) -> None:
        dimension = "visual-integrity"
        args: dict = {
            "original": self.instance.original,
            "candidates": [self.instance.candidate_image(m) for m in self.models],
            "names": list(self.models),
        }
        where = "outside the edited region" if region is not None else "across the full scene"
        if region is not None:
            args["region"] = region
        self._queue.append(
            _Probe(
                kind="sim_integrity",
                expert="similarity",
                args=args,
                rationale=f"dim={dimension} compare candidates to the original {where}",
                meta={"seg_key": seg_key, "mode": mode},
            )
        )

    def _on_sim_integrity(self, probe: _Probe, outcome: StepOutcome) -> None:
        dimension = "visual-integrity"
        if not outcome.ok:
            self._resolve_all(dimension, UNKNOWN, note=f"similarity failed: {outcome.error}")
            return
        report = outcome.value.value
        seg_key = probe.meta["seg_key"]
        for model in self.models:
            if self.checklist.item(dimension).verdict_for(model).status != UNKNOWN:
                continue
            entry = report.entry_for(model)
            if entry is None:
                self._resolve(dimension, model, UNKNOWN, note="no similarity entry")
                continue
            evidence = (outcome.output_key,) if seg_key is None else (outcome.output_key, seg_key)
            ok = entry.score >= self.thresholds.integrity_min
            note = f"similarity {entry.score:.3f} {'outside the edit' if seg_key else 'overall'}"
            self._resolve(dimension, model, PASS if ok else FAIL, evidence, note=note)

    # -- background and content preservation ---------------------------------------

    def _stage_background(self) -> None:
        dimension = "background-match"
        self._queue.append(
            _Probe(
                kind="sim_background",
                expert="similarity",
                args={
                    "original": self.instance.original,
                    "candidates": [self.instance.candidate_image(m) for m in self.models],
                    "names": list(self.models),
                },
                rationale=f"dim={dimension} compare candidate backgrounds to the original",
                meta={},
            )
        )

    def _background_requested_ok(self, model: str) -> bool:
        wanted = self.facts.background_target
        if not wanted:
            return True
        try:
            label = self._scene(model).background_label
        except JureError:
            return False
        return bool(set(wanted) & set(tokenize(label)))

    def _on_sim_background(self, probe: _Probe, outcome: StepOutcome) -> None:
        if not outcome.ok:
            self._resolve_all("background-match", UNKNOWN, note=f"similarity failed: {outcome.error}")
            self._resolve_all(
                "content-preservation", UNKNOWN, note=f"similarity failed: {outcome.error}"
            )
            return
        report = outcome.value.value
        for model in self.models:
            entry = report.entry_for(model)
            if entry is None:
                self._resolve("background-match", model, UNKNOWN, note="no similarity entry")
                self._resolve("content-preservation", model, UNKNOWN, note="no similarity entry")
                continue
            aspects = entry.changed_aspects
            evidence = (outcome.output_key,)
            changed = "background-label" in aspects or "background-color" in aspects
            requested_ok = self._background_requested_ok(model)
            if changed and requested_ok:
                note = "background changed as requested"
                self._resolve("background-match", model, PASS, evidence, note=note)
            else:
                note = "background unchanged" if not changed else "background not as requested"
                self._resolve("background-match", model, FAIL, evidence, note=note)
            self._resolve_content_from_aspects(model, aspects, evidence, allow_moves=False)

    def _resolve_content_from_aspects(self, model, aspects, evidence, allow_moves: bool) -> None:
        dimension = "content-preservation"
        if self.checklist.item(dimension).verdict_for(model).status != UNKNOWN:
            return
        forbidden = ["object-removed:", "object-added:"]
        if not allow_moves:
            forbidden.append("object-moved:")
        hits = [a for a in aspects if any(a.startswith(f) for f in forbidden)]
        if hits:
            note = "content disturbed: " + ", ".join(hits)
            self._resolve(dimension, model, FAIL, evidence, note=note)
        else:
            self._resolve(dimension, model, PASS, evidence, note="all objects preserved")

    def _stage_content(self) -> None:
        dimension = "content-preservation"
        open_models = [
            m
            for m in self.models
            if self.checklist.item(dimension).verdict_for(m).status == UNKNOWN
        ]
        if not open_models:
            return
        allow_moves = self.facts.sub_task is SubTask.PERSPECTIVE_EDITING
        resolve_integrity = (
            self.facts.sub_task is SubTask.STYLE_CHANGE
            and "visual-integrity" in self.checklist.dimensions
        )
        self._queue.append(
            _Probe(
                kind="sim_struct",
                expert="similarity",
                args={
                    "original": self.instance.original,
                    "candidates": [self.instance.candidate_image(m) for m in self.models],
                    "names": list(self.models),
                },
                rationale=f"dim={dimension} check the scene structure against the original",
                meta={"allow_moves": allow_moves, "resolve_integrity": resolve_integrity},
            )
        )

    def _on_sim_struct(self, probe: _Probe, outcome: StepOutcome) -> None:
        dims = ["content-preservation"]
        if probe.meta["resolve_integrity"]:
            dims.append("visual-integrity")
        if not outcome.ok:
            for dim in dims:
                self._resolve_all(dim, UNKNOWN, note=f"similarity failed: {outcome.error}")
            return
        report = outcome.value.value
        evidence_key = outcome.output_key
        for model in self.models:
            entry = report.entry_for(model)
            if entry is None:
                for dim in dims:
                    self._mark_unknown_if_open(dim, model, "no similarity entry")
                continue
            self._resolve_content_from_aspects(
                model, entry.changed_aspects, (evidence_key,), probe.meta["allow_moves"]
            )
            if probe.meta["resolve_integrity"]:
                # Style edits may recolor freely; integrity asks that geometry
                # and background identity survive the restyle.
                bad = [
                    a
                    for a in entry.changed_aspects
                    if a.startswith("object-moved:") or a == "background-label"
                ]
                if self.checklist.item("visual-integrity").verdict_for(model).status == UNKNOWN:
                    if bad:
                        note = "layout disturbed: " + ", ".join(bad)
                        self._resolve("visual-integrity", model, FAIL, (evidence_key,), note=note)
                    else:
                        self._resolve(
                            "visual-integrity", model, PASS, (evidence_key,),
                            note="layout and background preserved",
                        )

    # -- style ------------------------------------------------------------------------

    def _stage_style(self) -> None:
        dimension = "style-match"
        target = self.facts.style_target
        if not target:
            self._resolve_all(dimension, UNKNOWN, note="no style target parsed from instruction")
            return
        for model in self.models:
            self._queue.append(
                _Probe(
                    kind="style",
                    expert="style",
                    args={
                        "image": self.instance.candidate_image(model),
                        "requested_style": target,
                    },
                    rationale=f"dim={dimension} cand={model} compare to requested '{target}'",
                    meta={"model": model},
                )
            )

    def _on_style(self, probe: _Probe, outcome: StepOutcome) -> None:
        dimension = "style-match"
        model = probe.meta["model"]
        if not outcome.ok:
            self._resolve(dimension, model, UNKNOWN, note=f"style analysis failed: {outcome.error}")
            return
        score = outcome.value.value.match_score
        status = PASS if score >= self.thresholds.style_min else FAIL
        self._resolve(
            dimension, model, status, (outcome.output_key,), note=f"style match {score:.3f}"
        )

    # -- perspective ---------------------------------------------------------------------

    def _stage_perspective(self) -> None:
        dimension = "perspective-change"
        self._queue.append(
            _Probe(
                kind="depth_persp",
                expert="depth",
                args={"image": self.instance.original},
                rationale=f"dim={dimension} depth profile of the original",
                meta={"owner": "__original__"},
            )
        )
        for model in self.models:
            self._queue.append(
                _Probe(
                    kind="depth_persp",
                    expert="depth",
                    args={"image": self.instance.candidate_image(model)},
                    rationale=f"dim={dimension} cand={model} depth profile",
                    meta={"owner": model},
                )
            )

    def _on_depth_persp(self, probe: _Probe, outcome: StepOutcome) -> None:
        dimension = "perspective-change"
        owner = probe.meta["owner"]
        if not outcome.ok:
            if owner == "__original__":
                self._resolve_all(dimension, UNKNOWN, note=f"depth failed: {outcome.error}")
            else:
                self._resolve(dimension, owner, UNKNOWN, note=f"depth failed: {outcome.error}")
            return
        self._depth_stats[(owner, "full")] = (outcome.value.value, outcome.output_key)
        if ("__original__", "full") not in self._depth_stats:
            return
        orig_stats, orig_key = self._depth_stats[("__original__", "full")]
        for model in self.models:
            if (model, "full") not in self._depth_stats:
                continue
            if self.checklist.item(dimension).verdict_for(model).status != UNKNOWN:
                continue
            stats, key = self._depth_stats[(model, "full")]
            delta = abs(stats.mean_depth - orig_stats.mean_depth)
            ok = delta > self.thresholds.perspective_depth_delta
            note = f"mean depth shift {delta:.3f}"
            self._resolve(dimension, model, PASS if ok else FAIL, (orig_key, key), note=note)


def _planar_relation_holds(relation: str, target: BoundingBox, anchor: BoundingBox) -> bool:
    if relation == "above":
        return target.y2 <= anchor.y
    if relation == "below":
        return target.y >= anchor.y2
    if relation == "left-of":
        return target.x2 <= anchor.x
    if relation == "right-of":
        return target.x >= anchor.x2
    if relation == "next-to":
        gap = max(anchor.x - target.x2, target.x - anchor.x2)
        vertical_overlap = min(target.y2, anchor.y2) > max(target.y, anchor.y)
        return gap <= max(target.w, anchor.w) and vertical_overlap
    return False


def _direction_holds(direction: str | None, orig: BoundingBox, cand: BoundingBox) -> bool:
    if direction in (None, "center", "middle"):
        return True
    ocx, ocy = orig.x + orig.w / 2, orig.y + orig.h / 2
    ccx, ccy = cand.x + cand.w / 2, cand.y + cand.h / 2
    if direction == "left":
        return ccx < ocx
    if direction == "right":
        return ccx > ocx
    if direction == "up":
        return ccy < ocy
    if direction == "down":
        return ccy > ocy
    return True
