"""Per-level region descriptors and the relations between regions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

TOPOLOGY_KINDS = ("left-of", "above", "contains")
RELATION_KINDS = TOPOLOGY_KINDS + ("sub-part-of",)


@dataclass(frozen=True)
class RegionDescriptor:
    region: int
    level: int
    size: int
    cx: float
    cy: float
    mean: float
    bbox: tuple[int, int, int, int]  # x0, y0, x1, y1 inclusive
    parent: Optional[int] = None

    @property
    def width(self) -> int:
        return self.bbox[2] - self.bbox[0] + 1

    @property
    def height(self) -> int:
        return self.bbox[3] - self.bbox[1] + 1

    @property
    def aspect(self) -> float:
        return self.width / self.height


@dataclass(frozen=True, order=True)
class RelationEdge:
    kind: str
    level: int
    subject: int
    object: int

    def __post_init__(self):
        if self.kind not in RELATION_KINDS:
            raise ValueError(f"unknown relation kind {self.kind!r}")
        # sub-part-of links two levels, where an inherited region keeps its id
        if self.subject == self.object and self.kind != "sub-part-of":
            raise ValueError("a region cannot relate to itself")


def compute_descriptors(labels, reference, level: int = 0,
                        parents: Mapping[int, int] | None = None) -> list[RegionDescriptor]:
    """One descriptor per region id, sorted by id."""
    lab = np.asarray(labels, dtype=np.int64)
    ref = np.asarray(reference, dtype=np.float64)
    if lab.shape != ref.shape:
        raise ValueError("labels and reference differ in shape")
    h, w = lab.shape
    flat = lab.ravel()
    ys, xs = np.divmod(np.arange(flat.size), w)
    ids, inv, counts = np.unique(flat, return_inverse=True, return_counts=True)
    n = len(ids)
    sx = np.bincount(inv, weights=xs, minlength=n)
    sy = np.bincount(inv, weights=ys, minlength=n)
    si = np.bincount(inv, weights=ref.ravel(), minlength=n)
    x0 = np.full(n, w)
    y0 = np.full(n, h)
    x1 = np.full(n, -1)
    y1 = np.full(n, -1)
    np.minimum.at(x0, inv, xs)
    np.minimum.at(y0, inv, ys)
    np.maximum.at(x1, inv, xs)
    np.maximum.at(y1, inv, ys)
    parents = parents or {}
    return [
        RegionDescriptor(
            int(ids[i]), level, int(counts[i]),
            float(sx[i] / counts[i]), float(sy[i] / counts[i]), float(si[i] / counts[i]),
            (int(x0[i]), int(y0[i]), int(x1[i]), int(y1[i])),
            parents.get(int(ids[i])),
        )
        for i in range(n)
    ]


def describe_levels(result, pyramid) -> list[list[RegionDescriptor]]:
    """Descriptors for every level of a descent result.

    Inherited regions name their own id one level up as parent; regions that
    emerged at a level name their recorded origin; top regions have none.
    """
    out = []
    for level, lm in enumerate(result.labels):
        links = {}
        if level < result.top_level:
            emerged = result.parents[level]
            for rid in np.unique(lm.labels).tolist():
                links[rid] = emerged.get(rid, rid)
        out.append(compute_descriptors(lm.labels, pyramid[level], level, links))
    return out


def _plurality_parents(fine: np.ndarray, coarse: np.ndarray) -> dict[int, int]:
    h, w = fine.shape
    up = coarse[np.arange(h)[:, None] // 2, np.arange(w)[None, :] // 2]
    pairs, counts = np.unique(np.stack([fine.ravel(), up.ravel()], axis=1), axis=0, return_counts=True)
    best: dict[int, tuple[int, int]] = {}
    for (f, c), n in zip(pairs.tolist(), counts.tolist()):
        # pairs arrive sorted by coarse id, so strict > keeps the lower id on ties
        if f not in best or n > best[f][1]:
            best[f] = (c, n)
    return {f: c for f, (c, _) in best.items()}


def link_hierarchy(result) -> list[RelationEdge]:
    """sub-part-of edges from each region to the coarser region holding the
    plurality of its footprint; seeded regions whose recorded origin differs
    get a second edge."""
    edges = []
    for level in range(result.top_level - 1, -1, -1):
        plural = _plurality_parents(result.labels[level].labels, result.labels[level + 1].labels)
        recorded = result.parents[level] if level < len(result.parents) else {}
        for rid in sorted(plural):
            edges.append(RelationEdge("sub-part-of", level, rid, plural[rid]))
            origin = recorded.get(rid)
            if origin is not None and origin != plural[rid]:
                edges.append(RelationEdge("sub-part-of", level, rid, origin))
    return edges


def compute_topology(descs: list[RegionDescriptor]) -> list[RelationEdge]:
    if not descs:
        return []
    descs = sorted(descs, key=lambda d: d.region)
    level = descs[0].level
    ids = np.array([d.region for d in descs])
    box = np.array([d.bbox for d in descs])
    size = np.array([d.size for d in descs])
    x0, y0, x1, y1 = box.T
    left = x1[:, None] < x0[None, :]
    above = y1[:, None] < y0[None, :]
    inside = ((x0[:, None] <= x0[None, :]) & (y0[:, None] <= y0[None, :])
              & (x1[:, None] >= x1[None, :]) & (y1[:, None] >= y1[None, :]))
    same_box = np.all(box[:, None, :] == box[None, :, :], axis=2)
    contains = inside & ~same_box & (size[:, None] > size[None, :])
    rel = np.stack([left, above, contains], axis=2)
    diag = np.arange(len(ids))
    rel[diag, diag, :] = False
    return [
        RelationEdge(TOPOLOGY_KINDS[k], level, int(ids[i]), int(ids[j]))
        for i, j, k in zip(*np.nonzero(rel))
    ]
