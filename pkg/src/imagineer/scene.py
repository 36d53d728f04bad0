"""Clip-art scene, tuple and description types plus the scene record format.

A scene always carries all 58 catalog slots.  Absent objects still hold
in-domain values (by convention ``x = y = z = 0``, ``dir = 1``,
``attr = 0``) so that every scene serializes to the same number of lines.

The catalog order is a convention of this package; the original clip-art
release does not publish one.  Object 0 is the boy and object 1 the girl,
the only two objects with pose/expression attributes.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DomainError, FormatError

N_OBJECTS = 58
WIDTH = 500
HEIGHT = 400
N_DEPTHS = 3
N_POSES = 7
N_EXPRESSIONS = 5
N_PERSON_ATTRS = N_POSES * N_EXPRESSIONS
PERSONS = (0, 1)

CATALOG = (
    "mike", "jenny",
    "sun", "cloud", "lightning", "rainbow", "moon", "star",
    "tree", "pine", "bush", "flower", "pond", "slide",
    "swing", "sandbox", "tent", "grill", "fire", "table",
    "bench", "blanket", "basket", "burger", "pizza", "hotdog",
    "pie", "drink", "ketchup", "ball", "football", "bat",
    "glove", "kite", "frisbee", "racket", "shovel", "pail",
    "balloon", "bike", "wagon", "dog", "cat", "bear",
    "snake", "owl", "duck", "frog", "hat", "crown",
    "glasses", "cap", "helmet", "sword", "umbrella", "airplane",
    "rocket", "cooler",
)
assert len(CATALOG) == N_OBJECTS


def is_person(object_id: int) -> bool:
    return object_id in PERSONS


def n_attrs(object_id: int) -> int:
    """Size of the attribute domain of an object (35 for persons, else 1)."""
    return N_PERSON_ATTRS if is_person(object_id) else 1


def person_attr(pose: int, expr: int) -> int:
    """Pack a (pose, expression) pair into a single attribute index."""
    if not (0 <= pose < N_POSES and 0 <= expr < N_EXPRESSIONS):
        raise DomainError(f"pose/expression out of range: ({pose}, {expr})")
    return pose * N_EXPRESSIONS + expr


def split_person_attr(attr: int) -> tuple[int, int]:
    if not 0 <= attr < N_PERSON_ATTRS:
        raise DomainError(f"person attribute out of range: {attr}")
    return divmod(attr, N_EXPRESSIONS)


@dataclass(frozen=True)
class ObjectState:
    object_id: int
    present: bool = False
    x: int = 0
    y: int = 0
    z: int = 0
    dir: int = 1
    attr: int = 0

    @property
    def pose(self) -> int:
        return split_person_attr(self.attr)[0]

    @property
    def expression(self) -> int:
        return split_person_attr(self.attr)[1]


def _check_fields(object_id, z, d, attr):
    if not 0 <= object_id < N_OBJECTS:
        raise DomainError(f"object id out of range: {object_id}")
    if not 0 <= z < N_DEPTHS:
        raise DomainError(f"object {object_id}: depth {z} not in [0, {N_DEPTHS})")
    if d not in (-1, 1):
        raise DomainError(f"object {object_id}: direction {d} not in {{-1, 1}}")
    if not 0 <= attr < n_attrs(object_id):
        raise DomainError(f"object {object_id}: attribute {attr} out of range")


class Scene:
    """Immutable 58-slot scene backed by read-only integer arrays."""

    __slots__ = ("present", "x", "y", "z", "dir", "attr")

    def __init__(self, present, x, y, z, dir, attr):
        arrays = {}
        for name, values in zip(
            ("present", "x", "y", "z", "dir", "attr"), (present, x, y, z, dir, attr)
        ):
            arr = np.array(values, dtype=bool if name == "present" else np.int64)
            if arr.shape != (N_OBJECTS,):
                raise DomainError(f"{name} must have {N_OBJECTS} entries, got {arr.shape}")
            arrays[name] = arr
        arrays["x"] = np.clip(arrays["x"], 0, WIDTH - 1)
        arrays["y"] = np.clip(arrays["y"], 0, HEIGHT - 1)
        for k in range(N_OBJECTS):
            _check_fields(k, int(arrays["z"][k]), int(arrays["dir"][k]), int(arrays["attr"][k]))
        for name, arr in arrays.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __setattr__(self, name, value):
        raise AttributeError("Scene is immutable")

    @classmethod
    def empty(cls) -> "Scene":
        zeros = np.zeros(N_OBJECTS, dtype=np.int64)
        return cls(np.zeros(N_OBJECTS, bool), zeros, zeros, zeros, np.ones(N_OBJECTS, np.int64), zeros)

    @classmethod
    def from_states(cls, states: Iterable[ObjectState]) -> "Scene":
        slots: list[Optional[ObjectState]] = [None] * N_OBJECTS
        for s in states:
            if not 0 <= s.object_id < N_OBJECTS:
                raise DomainError(f"object id out of range: {s.object_id}")
            if slots[s.object_id] is not None:
                raise DomainError(f"duplicate state for object {s.object_id}")
            slots[s.object_id] = s
        full = [s if s is not None else ObjectState(k) for k, s in enumerate(slots)]
        return cls(
            [s.present for s in full],
            [s.x for s in full],
            [s.y for s in full],
            [s.z for s in full],
            [s.dir for s in full],
            [s.attr for s in full],
        )

    @property
    def objects(self) -> tuple[ObjectState, ...]:
        return tuple(self[k] for k in range(N_OBJECTS))

    def __getitem__(self, k: int) -> ObjectState:
        return ObjectState(
            k, bool(self.present[k]), int(self.x[k]), int(self.y[k]),
            int(self.z[k]), int(self.dir[k]), int(self.attr[k]),
        )

    def __len__(self):
        return N_OBJECTS

    def present_ids(self) -> list[int]:
        return [int(k) for k in np.flatnonzero(self.present)]

    def replace(self, **changes) -> "Scene":
        fields = {n: np.array(getattr(self, n)) for n in self.__slots__}
        fields.update(changes)
        return Scene(**fields)

    def __eq__(self, other):
        if not isinstance(other, Scene):
            return NotImplemented
        return all(np.array_equal(getattr(self, n), getattr(other, n)) for n in self.__slots__)

    def __hash__(self):
        return hash(tuple(getattr(self, n).tobytes() for n in self.__slots__))

    def __repr__(self):
        return f"Scene(present={self.present_ids()})"


@dataclass(frozen=True)
class Tuple:
    """(primary noun, relation, optional secondary noun) from one sentence."""

    primary: str
    relation: str
    secondary: Optional[str] = None
    sentence: int = 0

    def __post_init__(self):
        if not self.primary or not self.relation:
            raise DomainError("tuple needs a primary noun and a relation")


@dataclass(frozen=True)
class Description:
    sentences: tuple[str, ...]
    tuples: tuple[Tuple, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        object.__setattr__(self, "tuples", tuple(self.tuples))
        if len(self.sentences) < 1:
            raise DomainError("a description needs at least one sentence")

    def text(self) -> str:
        return " ".join(self.sentences)

    def sentence_tuples(self, index: int) -> tuple[Tuple, ...]:
        return tuple(t for t in self.tuples if t.sentence == index)


def join_descriptions(parts: Sequence[Description]) -> Description:
    """Concatenate descriptions, renumbering tuple sentence indices."""
    sentences, tuples = [], []
    for part in parts:
        offset = len(sentences)
        sentences.extend(part.sentences)
        tuples.extend(
            Tuple(t.primary, t.relation, t.secondary, t.sentence + offset) for t in part.tuples
        )
    return Description(tuple(sentences), tuple(tuples))


# -- scene record format ----------------------------------------------------

def encode_scene(scene: Scene, scene_id="0") -> bytes:
    lines = [f"scene {scene_id}"]
    for k in range(N_OBJECTS):
        lines.append(
            f"{k} {int(scene.present[k])} {scene.x[k]} {scene.y[k]} "
            f"{scene.z[k]} {scene.dir[k]} {scene.attr[k]}"
        )
    return ("\n".join(lines) + "\n").encode("ascii")


_INT = re.compile(r"^-?\d+$")


def _parse_block(lines: list[str], first_line: int, path=None) -> tuple[str, Scene]:
    header = lines[0].split(" ")
    if len(header) != 2 or header[0] != "scene" or not header[1]:
        raise FormatError(f"expected 'scene <id>' header, got {lines[0]!r}", first_line, path)
    if len(lines) != N_OBJECTS + 1:
        raise FormatError(
            f"scene {header[1]} has {len(lines) - 1} object lines, expected {N_OBJECTS}",
            first_line + len(lines) - 1, path,
        )
    cols = np.zeros((N_OBJECTS, 7), dtype=np.int64)
    for i, raw in enumerate(lines[1:]):
        lineno = first_line + 1 + i
        parts = raw.split(" ")
        if len(parts) != 7 or not all(_INT.match(p) for p in parts):
            raise FormatError(f"malformed object line {raw!r}", lineno, path)
        vals = [int(p) for p in parts]
        if vals[0] != i:
            raise FormatError(f"expected object id {i}, got {vals[0]}", lineno, path)
        k, present, x, y, z, d, attr = vals
        if present not in (0, 1):
            raise DomainError(f"line {lineno}: presence {present} not in {{0, 1}}")
        if not (0 <= x < WIDTH and 0 <= y < HEIGHT):
            raise DomainError(f"line {lineno}: position ({x}, {y}) outside canvas")
        try:
            _check_fields(k, z, d, attr)
        except DomainError as exc:
            raise DomainError(f"line {lineno}: {exc}") from None
        cols[i] = vals
    scene = Scene(cols[:, 1].astype(bool), cols[:, 2], cols[:, 3], cols[:, 4], cols[:, 5], cols[:, 6])
    return header[1], scene


def decode_scene(data: bytes) -> Scene:
    scenes = decode_scenes(data)
    if len(scenes) != 1:
        raise FormatError(f"expected exactly one scene record, found {len(scenes)}")
    return next(iter(scenes.values()))


def decode_scenes(data: bytes, path=None) -> dict[str, Scene]:
    """Parse a file of concatenated scene blocks into ``{scene_id: Scene}``."""
    text = data.decode("ascii") if isinstance(data, (bytes, bytearray)) else data
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    out: dict[str, Scene] = {}
    i = 0
    while i < len(lines):
        if not lines[i].startswith("scene "):
            raise FormatError(f"expected 'scene <id>' header, got {lines[i]!r}", i + 1, path)
        j = i + 1
        while j < len(lines) and not lines[j].startswith("scene "):
            j += 1
        sid, scene = _parse_block(lines[i:j], i + 1, path)
        if sid in out:
            raise FormatError(f"duplicate scene id {sid}", i + 1, path)
        out[sid] = scene
        i = j
    return out


def encode_scenes(scenes) -> bytes:
    """Encode ``{scene_id: Scene}`` (or pairs) in iteration order."""
    items = scenes.items() if isinstance(scenes, dict) else scenes
    return b"".join(encode_scene(s, sid) for sid, s in items)
