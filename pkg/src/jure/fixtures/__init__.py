"""Deterministic demo scenes and corpora used by tests and the CLI quickstart.

Everything here is built programmatically and addressed through data URIs, so
fixtures need no disk I/O and two processes always see identical bytes.  The
showcase instance (three models attempt "Add a black cat behind the boy") has
hand-auditable expected behavior: one candidate nails it, one puts the cat in
front, one deletes the boy and leaves a smudge.
"""

from __future__ import annotations

import random

from jure.core.scene import scene_data_uri
from jure.core.types import (
    BoundingBox,
    EditInstance,
    ImageRef,
    SceneImage,
    SceneObject,
)
from jure.maskops import mask_from_box

__all__ = [
    "showcase_instance",
    "showcase_expected_scores",
    "demo_batch",
    "fuzz_batch",
    "transparency_args",
    "scene_ref",
]


def scene_ref(scene: SceneImage) -> ImageRef:
    return ImageRef(uri=scene_data_uri(scene))


def _obj(oid, label, x, y, w, h, rgb, depth, **kw) -> SceneObject:
    return SceneObject(id=oid, label=label, bbox=BoundingBox(x, y, w, h), rgb=rgb, depth=depth, **kw)


def _scene(objects, canvas=(64, 48), background=("park", (112, 176, 112)), style=("photo",)):
    return SceneImage(
        canvas=canvas,
        objects=tuple(objects),
        background_label=background[0],
        background_rgb=background[1],
        global_style=tuple(style),
    )


# -- the showcase: add a black cat behind the boy -----------------------------

_BOY = _obj("boy", "boy", 24, 16, 12, 24, (210, 180, 150), 0.4)
_TREE = _obj("tree", "tree", 4, 4, 10, 30, (60, 120, 60), 0.7)


def showcase_instance() -> EditInstance:
    original = _scene([_BOY, _TREE])
    emu = _scene([_BOY, _TREE, _obj("cat", "cat", 38, 20, 10, 8, (0, 0, 0), 0.55)])
    hq = _scene([_BOY, _TREE, _obj("cat", "cat", 38, 22, 10, 8, (10, 10, 10), 0.25)])
    ip2p = _scene(
        [
            _TREE,
            _obj("cat", "cat", 36, 20, 10, 8, (0, 0, 0), 0.55),
            _obj("smudge", "smudge", 10, 38, 8, 6, (90, 90, 90), 0.5),
        ]
    )
    return EditInstance(
        id="showcase-addition",
        instruction="Add a black cat behind the boy",
        original=scene_ref(original),
        candidates=(
            ("emu-edit", scene_ref(emu)),
            ("hq-edit", scene_ref(hq)),
            ("ip2p", scene_ref(ip2p)),
        ),
    )


def showcase_expected_scores() -> dict[str, int]:
    """Hand-derived: spatial miss costs 1; spatial miss plus damage costs 2."""
    return {"emu-edit": 5, "hq-edit": 4, "ip2p": 3}


# -- one demo instance per editing sub-task ------------------------------------


def _demo_removal() -> EditInstance:
    lamp = _obj("lamp", "lamp", 30, 8, 8, 12, (240, 220, 90), 0.3)
    desk = _obj("desk", "desk", 8, 24, 40, 16, (139, 69, 19), 0.6)
    original = _scene([lamp, desk], background=("room", (200, 200, 190)))
    good = _scene([desk], background=("room", (200, 200, 190)))
    bad = _scene([lamp, desk], background=("room", (200, 200, 190)))
    ugly = _scene([], background=("room", (200, 200, 190)))  # took the desk too
    return EditInstance(
        id="demo-removal",
        instruction="Remove the lamp from the desk",
        original=scene_ref(original),
        candidates=(("good", scene_ref(good)), ("bad", scene_ref(bad)), ("ugly", scene_ref(ugly))),
    )


def _demo_replacement() -> EditInstance:
    cat = _obj("cat", "cat", 20, 24, 12, 10, (120, 100, 80), 0.4)
    sofa = _obj("sofa", "sofa", 10, 30, 44, 14, (80, 80, 160), 0.7)
    bear = _obj("bear", "teddy bear", 20, 22, 12, 12, (180, 140, 90), 0.4)
    original = _scene([cat, sofa], background=("room", (220, 210, 200)))
    good = _scene([bear, sofa], background=("room", (220, 210, 200)))
    bad = _scene([cat, sofa], background=("room", (220, 210, 200)))
    half = _scene([cat, bear, sofa], background=("room", (220, 210, 200)))
    return EditInstance(
        id="demo-replacement",
        instruction="Replace the cat with a teddy bear",
        original=scene_ref(original),
        candidates=(("good", scene_ref(good)), ("bad", scene_ref(bad)), ("half", scene_ref(half))),
    )


def _demo_movement() -> EditInstance:
    def ball(x):
        return _obj("ball", "ball", x, 20, 8, 8, (200, 40, 40), 0.4)

    box = _obj("box", "box", 28, 32, 10, 10, (110, 80, 50), 0.6)
    original = _scene([ball(40), box])
    good = _scene([ball(8), box])
    bad = _scene([ball(40), box])
    wrong_way = _scene([ball(52), box])
    return EditInstance(
        id="demo-movement",
        instruction="Move the ball to the left side",
        original=scene_ref(original),
        candidates=(
            ("good", scene_ref(good)),
            ("bad", scene_ref(bad)),
            ("wrong-way", scene_ref(wrong_way)),
        ),
    )


def _demo_background() -> EditInstance:
    kite = _obj("kite", "kite", 24, 6, 10, 8, (250, 60, 60), 0.3)
    original = _scene([kite], background=("park", (112, 176, 112)))
    good = _scene([kite], background=("beach", (238, 214, 175)))
    bad = _scene([kite], background=("park", (112, 176, 112)))
    ugly = _scene([], background=("beach", (238, 214, 175)))  # lost the kite
    return EditInstance(
        id="demo-background",
        instruction="Change the background to a beach",
        original=scene_ref(original),
        candidates=(("good", scene_ref(good)), ("bad", scene_ref(bad)), ("ugly", scene_ref(ugly))),
    )


def _demo_attribute() -> EditInstance:
    def car(rgb):
        return _obj("car", "car", 16, 22, 20, 10, rgb, 0.5)

    road = _obj("road", "road", 0, 34, 64, 14, (70, 70, 70), 0.9)
    original = _scene([car((0, 0, 255)), road], background=("city", (180, 180, 200)))
    good = _scene([car((230, 20, 20)), road], background=("city", (180, 180, 200)))
    bad = _scene([car((0, 0, 255)), road], background=("city", (180, 180, 200)))
    off = _scene([car((255, 165, 0)), road], background=("city", (180, 180, 200)))
    return EditInstance(
        id="demo-attribute",
        instruction="Change the color of the car to red",
        original=scene_ref(original),
        candidates=(("good", scene_ref(good)), ("bad", scene_ref(bad)), ("off", scene_ref(off))),
    )


def _demo_style() -> EditInstance:
    house = _obj("house", "house", 18, 14, 22, 20, (160, 120, 90), 0.5)
    sun = _obj("sun", "sun", 50, 4, 8, 8, (255, 230, 80), 0.2)
    original = _scene([house, sun], style=("photo",))
    good = _scene([house, sun], style=("oil-painting",))
    bad = _scene([house, sun], style=("photo",))
    rough = _scene([sun], style=("oil-painting",))  # repainted but dropped the house
    return EditInstance(
        id="demo-style",
        instruction="Render the scene in a oil painting style",
        original=scene_ref(original),
        candidates=(("good", scene_ref(good)), ("bad", scene_ref(bad)), ("rough", scene_ref(rough))),
    )


def _demo_size() -> EditInstance:
    def tree(h):
        return _obj("tree", "tree", 26, 36 - h, 12, h, (60, 120, 60), 0.6)

    bench = _obj("bench", "bench", 6, 30, 14, 6, (140, 100, 60), 0.7)
    original = _scene([tree(16), bench])
    good = _scene([tree(28), bench])
    bad = _scene([tree(16), bench])
    shrunk = _scene([tree(10), bench])
    return EditInstance(
        id="demo-size",
        instruction="Resize the tree to make it taller",
        original=scene_ref(original),
        candidates=(
            ("good", scene_ref(good)),
            ("bad", scene_ref(bad)),
            ("shrunk", scene_ref(shrunk)),
        ),
    )


def _demo_perspective() -> EditInstance:
    def tower(depth_a, depth_b):
        return [
            _obj("tower", "tower", 10, 8, 30, 20, (150, 150, 160), depth_a),
            _obj("plaza", "plaza", 8, 30, 40, 14, (190, 180, 160), depth_b),
        ]

    original = _scene(tower(0.2, 0.5), background=("sky", (160, 200, 240)))
    good = _scene(tower(0.8, 0.95), background=("sky", (160, 200, 240)))
    bad = _scene(tower(0.2, 0.5), background=("sky", (160, 200, 240)))
    return EditInstance(
        id="demo-perspective",
        instruction="Set the camera to a bird's-eye view",
        original=scene_ref(original),
        candidates=(("good", scene_ref(good)), ("bad", scene_ref(bad))),
    )


def _demo_addition_planar() -> EditInstance:
    box = _obj("box", "box", 26, 28, 12, 12, (110, 80, 50), 0.6)

    def ball(y):
        return _obj("ball", "ball", 28, y, 8, 8, (220, 30, 30), 0.4)

    original = _scene([box])
    good = _scene([box, ball(12)])
    low = _scene([box, ball(40)])
    missing = _scene([box])
    return EditInstance(
        id="demo-addition-planar",
        instruction="Add a red ball above the box",
        original=scene_ref(original),
        candidates=(
            ("good", scene_ref(good)),
            ("low", scene_ref(low)),
            ("missing", scene_ref(missing)),
        ),
    )


def demo_batch() -> list[EditInstance]:
    """Ten deterministic instances covering all nine editing sub-tasks."""
    return [
        showcase_instance(),
        _demo_addition_planar(),
        _demo_removal(),
        _demo_replacement(),
        _demo_movement(),
        _demo_background(),
        _demo_attribute(),
        _demo_style(),
        _demo_size(),
        _demo_perspective(),
    ]


# -- fuzz corpus -----------------------------------------------------------------

_FUZZ_LABELS = ["cat", "dog", "ball", "tree", "lamp", "car", "box", "chair", "bird", "cup"]
_FUZZ_TEMPLATES = [
    "Add a {a} next to the {b}",
    "Add a red {a} behind the {b}",
    "Remove the {a} from the scene",
    "Replace the {a} with a {b}",
    "Move the {a} to the left side",
    "Change the background to a forest",
    "Change the color of the {a} to blue",
    "Render the scene in a watercolor style",
    "Resize the {a} to make it bigger",
    "Set the camera to a top-down view",
    "qwerty zzz unparseable",
    "hello world",
]


def _fuzz_scene(rng: random.Random) -> SceneImage:
    w = rng.randrange(40, 65)
    h = rng.randrange(32, 49)
    objects = []
    for i in range(rng.randrange(1, 5)):
        ow = rng.randrange(4, max(5, w // 3))
        oh = rng.randrange(4, max(5, h // 3))
        x = rng.randrange(0, w - ow)
        y = rng.randrange(0, h - oh)
        rgb = (rng.randrange(256), rng.randrange(256), rng.randrange(256))
        objects.append(
            _obj(f"o{i}", rng.choice(_FUZZ_LABELS), x, y, ow, oh, rgb, round(rng.random(), 3))
        )
    return SceneImage(
        canvas=(w, h),
        objects=tuple(objects),
        background_label=rng.choice(["park", "room", "beach", "forest"]),
        background_rgb=(rng.randrange(256), rng.randrange(256), rng.randrange(256)),
        global_style=(rng.choice(["photo", "cartoon", "sketch"]),),
    )


def _perturb(scene: SceneImage, rng: random.Random) -> SceneImage:
    objects = list(scene.objects)
    roll = rng.random()
    if roll < 0.25 and objects:
        objects.pop(rng.randrange(len(objects)))
    elif roll < 0.5:
        w, h = scene.canvas
        objects.append(
            _obj(
                f"new{rng.randrange(1000)}",
                rng.choice(_FUZZ_LABELS),
                rng.randrange(0, max(1, w - 6)),
                rng.randrange(0, max(1, h - 6)),
                5, 5,
                (rng.randrange(256), rng.randrange(256), rng.randrange(256)),
                round(rng.random(), 3),
            )
        )
    elif roll < 0.75 and objects:
        i = rng.randrange(len(objects))
        old = objects[i]
        objects[i] = SceneObject(
            id=old.id, label=old.label, bbox=old.bbox,
            rgb=(rng.randrange(256), rng.randrange(256), rng.randrange(256)),
            depth=old.depth, style_tags=old.style_tags, text=old.text, pattern=old.pattern,
        )
    return SceneImage(
        canvas=scene.canvas,
        objects=tuple(objects),
        background_label=scene.background_label,
        background_rgb=scene.background_rgb,
        global_style=scene.global_style,
    )


def fuzz_batch(count: int = 50, seed: int = 20260815) -> list[EditInstance]:
    """Seeded corpus of odd-but-valid instances for robustness runs."""
    rng = random.Random(seed)
    instances = []
    for i in range(count):
        template = _FUZZ_TEMPLATES[i % len(_FUZZ_TEMPLATES)]
        a, b = rng.sample(_FUZZ_LABELS, 2)
        original = _fuzz_scene(rng)
        n_cands = rng.randrange(2, 4)
        candidates = tuple(
            (f"model-{c}", scene_ref(_perturb(original, rng))) for c in range(n_cands)
        )
        instances.append(
            EditInstance(
                id=f"fuzz-{i:03d}",
                instruction=template.format(a=a, b=b),
                original=scene_ref(original),
                candidates=candidates,
            )
        )
    return instances


# -- transport-transparency corpus ----------------------------------------------


def _pool_scene(i: int) -> SceneImage:
    """Scene #i from a small deterministic pool with varied content."""
    primary = _obj(
        "p", _FUZZ_LABELS[i % len(_FUZZ_LABELS)],
        2 + (i * 3) % 20, 2 + (i * 5) % 16, 8 + i % 6, 6 + i % 8,
        ((i * 37) % 256, (i * 59) % 256, (i * 83) % 256),
        round(0.1 + (i % 8) / 10, 2),
        pattern=["striped", "dotted", None, "plaid"][i % 4],
    )
    extras = []
    if i % 2 == 0:
        extras.append(
            _obj(
                "q", "sign", 30, 20, 12, 8, (250, 250, 240), 0.3,
                text=f"EXIT {i}", style_tags=("photo",),
            )
        )
    if i % 3 == 0:
        extras.append(_obj("r", "rock", 44, 30, 6, 6, (90, 85, 80), 0.8))
    return _scene(
        [primary, *extras],
        background=("field", (100 + i % 100, 150, 120)),
        style=("photo", "hdr") if i % 5 == 0 else ("photo",),
    )


def transparency_args(expert: str, count: int = 20) -> list[dict]:
    """``count`` deterministic argument dicts for one reference expert."""
    args: list[dict] = []
    for i in range(count):
        scene = _pool_scene(i)
        image = scene_ref(scene)
        w, h = scene.canvas
        box = BoundingBox(2 + i % 10, 2 + i % 8, 10, 8)
        if expert == "objectDetection":
            if i % 2 == 0:
                args.append({"image": image})
            else:
                args.append({"image": image, "labels": [_FUZZ_LABELS[i % 10], "kitten"]})
        elif expert == "segmentation":
            boxes = [box] if i % 3 else [box, BoundingBox(20, 10, 8, 8)]
            args.append({"image": image, "boxes": boxes})
        elif expert == "depth":
            if i % 2 == 0:
                args.append({"image": image})
            else:
                args.append({"image": image, "region": mask_from_box(box, (w, h))})
        elif expert == "ocr":
            args.append({"image": image})
        elif expert == "similarity":
            entry: dict = {
                "original": image,
                "candidates": [scene_ref(_pool_scene(i + 1)), scene_ref(_pool_scene(i + 2))],
                "names": ["m1", "m2"],
            }
            if i % 4 == 0:
                entry["region"] = mask_from_box(box, (w, h))
            args.append(entry)
        elif expert == "style":
            if i % 2 == 0:
                args.append({"image": image, "requested_style": ["photo", "sketch", "hdr"][i % 3]})
            else:
                args.append({"image": image, "reference": scene_ref(_pool_scene(i + 3))})
        elif expert == "chromaPattern":
            entry = {"image": image}
            if i % 2 == 0:
                entry["region"] = mask_from_box(box, (w, h))
            if i % 3 == 0:
                entry["expected"] = (
                    {"color": (200, 40, 40)} if i % 2 else {"pattern": "striped"}
                )
            args.append(entry)
        else:
            raise KeyError(f"no transparency corpus for expert {expert!r}")
    return args
