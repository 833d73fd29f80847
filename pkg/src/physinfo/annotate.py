"""Recognition by attribute similarity and scene verification by expected
relations.  Works on region descriptors and relation edges only, never on
pixels."""

from __future__ import annotations

from dataclasses import dataclass

from .codec import PhysicalDescription
from .kb import KnowledgeBase, ObjectPrototype
from .registry import TOPOLOGY_KINDS, RegionDescriptor, RelationEdge

DEFAULT_THETA = 0.5
POINT_RANGE_FLOOR = 1e-6


def range_distance(value: float, lo: float, hi: float) -> float:
    """0 inside ``[lo, hi]``, else distance to the nearest end over the width."""
    if lo <= value <= hi:
        return 0.0
    gap = lo - value if value < lo else value - hi
    return gap / max(hi - lo, POINT_RANGE_FLOOR)


def match_object(desc: RegionDescriptor, proto: ObjectPrototype, image_size: int) -> float:
    """Similarity in [0, 1]; exactly 1 when every weighted attribute is in range."""
    measured = (desc.mean, desc.size / image_size, desc.aspect)
    ranges = (proto.mean_range, proto.relsize_range, proto.aspect_range)
    penalty = sum(w * range_distance(v, *r) for w, v, r in zip(proto.weights, measured, ranges) if w > 0)
    return 1.0 / (1.0 + penalty)


@dataclass(frozen=True)
class RelationCheck:
    subject: str
    kind: str
    object: str
    verified: bool


@dataclass(frozen=True)
class SceneMatch:
    story: str
    scene: str
    labels: tuple[tuple[int, str, float], ...]  # (region, word, score), by region id
    relation_checks: tuple[RelationCheck, ...]
    relation_satisfaction: float
    score: float


@dataclass(frozen=True)
class Annotation:
    best: SceneMatch
    candidates: tuple[SceneMatch, ...]

    @property
    def recognized(self) -> bool:
        return bool(self.best.labels)


def _assign(descs, scene, image_size, theta):
    scored = []
    for d in descs:
        for k, proto in enumerate(scene.prototypes):
            scored.append((-match_object(d, proto, image_size), d.region, k))
    scored.sort()
    used_regions, used_words, kept = set(), set(), []
    for neg, region, k in scored:
        if region in used_regions or k in used_words:
            continue
        used_regions.add(region)
        used_words.add(k)
        if -neg >= theta:
            kept.append((region, scene.prototypes[k].word, -neg))
    return sorted(kept)


def match_scene(story, scene, descs, edges: set, image_size, theta) -> SceneMatch:
    kept = _assign(descs, scene, image_size, theta)
    region_of = {word: region for region, word, _ in kept}
    checks = []
    for a, kind, b in scene.relations:
        ok = a in region_of and b in region_of and (kind, region_of[a], region_of[b]) in edges
        checks.append(RelationCheck(a, kind, b, ok))
    satisfaction = sum(c.verified for c in checks) / len(checks) if checks else 1.0
    mean_score = sum(s for _, _, s in kept) / len(kept) if kept else 0.0
    return SceneMatch(story.name, scene.name, tuple(kept), tuple(checks), satisfaction,
                      mean_score * satisfaction)


def annotate_scene(descs: list[RegionDescriptor], relations: list[RelationEdge], kb: KnowledgeBase,
                   theta: float = DEFAULT_THETA, image_size: int | None = None) -> Annotation:
    """Score every scene of the knowledgebase against level-0 descriptors and
    pick the best one (ties go to the lexicographically first story/scene)."""
    if not kb.stories:
        raise ValueError("empty knowledgebase")
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    if image_size is None:
        image_size = sum(d.size for d in descs)
    edges = {(e.kind, e.subject, e.object) for e in relations if e.kind in TOPOLOGY_KINDS}
    matches = [match_scene(story, scene, descs, edges, image_size, theta) for story, scene in kb.scenes()]
    matches.sort(key=lambda m: (m.story, m.scene))
    best = max(matches, key=lambda m: m.score)  # max keeps the first of equal scores
    return Annotation(best, tuple(matches))


def annotate_description(desc: PhysicalDescription, kb: KnowledgeBase,
                         theta: float = DEFAULT_THETA) -> Annotation:
    level0 = desc.level(0)
    relations = [e for e in desc.relations if e.level == 0]
    return annotate_scene(level0.regions, relations, kb, theta, desc.width * desc.height)


def format_report(ann: Annotation) -> str:
    best = ann.best
    if not ann.recognized:
        status = "no recognition"
    elif best.score > 0:
        status = "recognized"
    else:
        status = "unverified"
    lines = [f"result {status}"]
    if ann.recognized:
        lines.append(f"story {best.story}")
        lines.append(f"scene {best.scene}")
    lines.append(f"scene_score {best.score:.3f}")
    if ann.recognized:
        lines.append(f"relation_satisfaction {best.relation_satisfaction:.3f}")
        for region, word, score in best.labels:
            lines.append(f"label {region} {word} {score:.3f}")
        for c in best.relation_checks:
            lines.append(f"relation {c.subject} {c.kind} {c.object} {'verified' if c.verified else 'failed'}")
    for m in ann.candidates:
        lines.append(f"candidate {m.story}/{m.scene} {m.score:.3f}")
    return "\n".join(lines) + "\n"
