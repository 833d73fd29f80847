"""Designer-authored scene knowledgebase: stories made of scenes, scenes made
of object words with attribute templates and expected relations.

Grammar (one statement per line, ``#`` starts a comment, indentation is
ignored)::

    kb 1
    story <name>
      scene <name>
        object <word> mean=<lo>:<hi> relsize=<lo>:<hi> aspect=<lo>:<hi> weights=<wm>,<ws>,<wa>
        relation <word> <left-of|above|contains> <word>
      end
    end
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from .registry import TOPOLOGY_KINDS

KB_VERSION = 1
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*$")


class KBParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


@dataclass(frozen=True)
class ObjectPrototype:
    word: str
    mean_range: tuple[float, float]
    relsize_range: tuple[float, float]
    aspect_range: tuple[float, float]
    weights: tuple[float, float, float]  # mean, relsize, aspect

    def __post_init__(self):
        for name, (lo, hi) in (("mean", self.mean_range), ("relsize", self.relsize_range),
                               ("aspect", self.aspect_range)):
            if lo > hi:
                raise ValueError(f"{name} range {lo}:{hi} has lo > hi")
        if not (0 <= self.mean_range[0] and self.mean_range[1] <= 255):
            raise ValueError("mean range must lie within [0, 255]")
        if not (0 < self.relsize_range[0] and self.relsize_range[1] <= 1):
            raise ValueError("relsize range must lie within (0, 1]")
        if not self.aspect_range[0] > 0:
            raise ValueError("aspect range must be positive")
        if any(w < 0 for w in self.weights) or not any(w > 0 for w in self.weights):
            raise ValueError("weights must be non-negative and not all zero")


@dataclass(frozen=True)
class Scene:
    name: str
    prototypes: tuple[ObjectPrototype, ...]
    relations: tuple[tuple[str, str, str], ...] = ()

    def prototype(self, word: str) -> ObjectPrototype:
        for p in self.prototypes:
            if p.word == word:
                return p
        raise KeyError(word)


@dataclass(frozen=True)
class Story:
    name: str
    scenes: tuple[Scene, ...]


@dataclass(frozen=True)
class KnowledgeBase:
    stories: tuple[Story, ...]
    version: int = KB_VERSION

    def scenes(self):
        """(story, scene) pairs in declaration order."""
        for story in self.stories:
            for scene in story.scenes:
                yield story, scene


def _range(value: str, key: str, lineno: int) -> tuple[float, float]:
    lo, sep, hi = value.partition(":")
    try:
        if not sep:
            raise ValueError
        return float(lo), float(hi)
    except ValueError:
        raise KBParseError(f"{key} must be <lo>:<hi>, got {value!r}", lineno) from None


def _parse_object(args: list[str], lineno: int) -> ObjectPrototype:
    if not args:
        raise KBParseError("object needs a word", lineno)
    word, attrs = args[0], {}
    if not _NAME.match(word):
        raise KBParseError(f"bad word {word!r}", lineno)
    for tok in args[1:]:
        key, sep, value = tok.partition("=")
        if not sep or key not in ("mean", "relsize", "aspect", "weights"):
            raise KBParseError(f"unknown attribute {tok!r}", lineno)
        if key in attrs:
            raise KBParseError(f"attribute {key} given twice", lineno)
        attrs[key] = value
    missing = {"mean", "relsize", "aspect", "weights"} - attrs.keys()
    if missing:
        raise KBParseError(f"object {word} lacks {', '.join(sorted(missing))}", lineno)
    try:
        weights = tuple(float(w) for w in attrs["weights"].split(","))
    except ValueError:
        raise KBParseError(f"bad weights {attrs['weights']!r}", lineno) from None
    if len(weights) != 3:
        raise KBParseError("weights needs three values", lineno)
    try:
        return ObjectPrototype(word, _range(attrs["mean"], "mean", lineno),
                               _range(attrs["relsize"], "relsize", lineno),
                               _range(attrs["aspect"], "aspect", lineno), weights)
    except ValueError as exc:
        if isinstance(exc, KBParseError):
            raise
        raise KBParseError(f"object {word}: {exc}", lineno) from None


def parse_kb(text: bytes | str) -> KnowledgeBase:
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    stories: list[Story] = []
    story = None      # (name, scenes, lineno)
    scene = None      # (name, prototypes, relations, lineno)
    seen_header = False

    for lineno, raw in enumerate(text.split("\n"), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        head, args = tokens[0], tokens[1:]
        if not seen_header:
            if head != "kb" or len(args) != 1:
                raise KBParseError("expected 'kb <version>' header", lineno)
            if args[0] != str(KB_VERSION):
                raise KBParseError(f"unsupported kb version {args[0]}", lineno)
            seen_header = True
        elif head == "story":
            if story is not None:
                raise KBParseError("story inside story (missing 'end'?)", lineno)
            if len(args) != 1 or not _NAME.match(args[0]):
                raise KBParseError("story needs one name", lineno)
            if any(s.name == args[0] for s in stories):
                raise KBParseError(f"duplicate story {args[0]}", lineno)
            story = (args[0], [], lineno)
        elif head == "scene":
            if story is None or scene is not None:
                raise KBParseError("scene must sit directly inside a story", lineno)
            if len(args) != 1 or not _NAME.match(args[0]):
                raise KBParseError("scene needs one name", lineno)
            if any(s.name == args[0] for s in story[1]):
                raise KBParseError(f"duplicate scene {args[0]} in story {story[0]}", lineno)
            scene = (args[0], [], [], lineno)
        elif head == "object":
            if scene is None:
                raise KBParseError("object outside a scene", lineno)
            proto = _parse_object(args, lineno)
            if any(p.word == proto.word for p in scene[1]):
                raise KBParseError(f"duplicate word {proto.word} in scene {scene[0]}", lineno)
            scene[1].append(proto)
        elif head == "relation":
            if scene is None:
                raise KBParseError("relation outside a scene", lineno)
            if len(args) != 3 or args[1] not in TOPOLOGY_KINDS:
                raise KBParseError(f"relation must be <word> <{'|'.join(TOPOLOGY_KINDS)}> <word>", lineno)
            if args[0] == args[2]:
                raise KBParseError("relation relates a word to itself", lineno)
            scene[2].append((tuple(args), lineno))
        elif head == "end":
            if args:
                raise KBParseError("'end' takes no arguments", lineno)
            if scene is not None:
                name, protos, rels, _ = scene
                if not protos:
                    raise KBParseError(f"scene {name} declares no objects", lineno)
                words = {p.word for p in protos}
                for rel, rel_line in rels:
                    for w in (rel[0], rel[2]):
                        if w not in words:
                            raise KBParseError(f"relation references undeclared word {w!r}", rel_line)
                story[1].append(Scene(name, tuple(protos), tuple(r for r, _ in rels)))
                scene = None
            elif story is not None:
                if not story[1]:
                    raise KBParseError(f"story {story[0]} has no scenes", lineno)
                stories.append(Story(story[0], tuple(story[1])))
                story = None
            else:
                raise KBParseError("'end' without an open block", lineno)
        else:
            raise KBParseError(f"unknown statement {head!r}", lineno)

    if not seen_header:
        raise KBParseError("empty knowledgebase")
    if scene is not None:
        raise KBParseError(f"scene {scene[0]} is never closed", scene[3])
    if story is not None:
        raise KBParseError(f"story {story[0]} is never closed", story[2])
    if not stories:
        raise KBParseError("empty knowledgebase: no stories")
    return KnowledgeBase(tuple(stories))


def _num(x: float) -> str:
    return repr(float(x)).removesuffix(".0")


def format_kb(kb: KnowledgeBase) -> str:
    """Canonical text form; ``parse_kb(format_kb(kb)) == kb``."""
    out = [f"kb {kb.version}"]
    for story in kb.stories:
        out.append(f"story {story.name}")
        for scene in story.scenes:
            out.append(f"  scene {scene.name}")
            for p in scene.prototypes:
                out.append(
                    f"    object {p.word}"
                    f" mean={_num(p.mean_range[0])}:{_num(p.mean_range[1])}"
                    f" relsize={_num(p.relsize_range[0])}:{_num(p.relsize_range[1])}"
                    f" aspect={_num(p.aspect_range[0])}:{_num(p.aspect_range[1])}"
                    f" weights={','.join(_num(w) for w in p.weights)}"
                )
            for a, kind, b in scene.relations:
                out.append(f"    relation {a} {kind} {b}")
            out.append("  end")
        out.append("end")
    return "\n".join(out) + "\n"


def demo_kb_text() -> str:
    return resources.files("physinfo").joinpath("data/demo.kb").read_text(encoding="utf-8")


def load_kb(path) -> KnowledgeBase:
    with open(path, "rb") as fh:
        return parse_kb(fh.read())
