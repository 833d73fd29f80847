"""Line-oriented text format for the multi-level region description.

A document holds everything needed to repaint every pyramid level without
the source image: per-level region tables, run-length encoded label maps and
the relation list.  Levels are written coarse to fine.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pyramid import coarse_shape
from .registry import RELATION_KINDS, RegionDescriptor, RelationEdge
from .segment import SegConfig

FORMAT_VERSION = 1
MAGIC = "PHYSINFO"


class DescriptionError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


class UnknownLevelError(LookupError):
    pass


@dataclass
class LevelDescription:
    level: int
    labels: np.ndarray
    regions: list[RegionDescriptor]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]


@dataclass
class PhysicalDescription:
    width: int
    height: int
    config: SegConfig
    stop_threshold: int
    levels: list[LevelDescription]  # index == level
    relations: list[RelationEdge] = field(default_factory=list)

    def level(self, level: int) -> LevelDescription:
        if not 0 <= level < len(self.levels):
            raise UnknownLevelError(f"level {level} not in description (levels 0..{len(self.levels) - 1})")
        return self.levels[level]


def rle_row(row) -> list[tuple[int, int]]:
    row = np.asarray(row)
    change = np.flatnonzero(row[1:] != row[:-1]) + 1
    starts = np.concatenate([[0], change])
    ends = np.concatenate([change, [len(row)]])
    return [(int(row[s]), int(e - s)) for s, e in zip(starts, ends)]


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def encode(desc: PhysicalDescription) -> bytes:
    cfg = desc.config
    out = [
        f"{MAGIC} {FORMAT_VERSION}",
        f"SIZE {desc.width} {desc.height}",
        f"LEVELS {len(desc.levels)}",
        f"CONFIG {cfg.k_bins} {float(cfg.deviation_tau)!r} {cfg.seed_min_px} "
        f"{cfg.max_refine_iters} {cfg.min_region_px} {desc.stop_threshold}",
    ]
    for lv in reversed(desc.levels):
        out.append(f"LEVEL {lv.level} {lv.width} {lv.height}")
        out.append(f"REGIONS {len(lv.regions)}")
        for r in sorted(lv.regions, key=lambda r: r.region):
            parent = "-" if r.parent is None else str(r.parent)
            x0, y0, x1, y1 = r.bbox
            out.append(f"{r.region} {r.size} {_fmt(r.cx)} {_fmt(r.cy)} {_fmt(r.mean)} "
                       f"{x0} {y0} {x1} {y1} {parent}")
        out.append("RLE")
        for row in lv.labels:
            out.append(" ".join(f"{lab}:{n}" for lab, n in rle_row(row)))
    out.append(f"RELATIONS {len(desc.relations)}")
    for e in desc.relations:
        out.append(f"{e.kind} {e.level} {e.subject} {e.object}")
    return ("\n".join(out) + "\n").encode("utf-8")


class _Lines:
    def __init__(self, text: str):
        self.lines = text.split("\n")
        if self.lines and self.lines[-1] == "":
            self.lines.pop()
        self.i = 0

    @property
    def lineno(self) -> int:
        return self.i + 1

    def next(self, what: str) -> str:
        if self.i >= len(self.lines):
            raise DescriptionError(f"unexpected end of document, expected {what}", self.lineno)
        line = self.lines[self.i]
        self.i += 1
        return line

    def keyword(self, key: str, nargs: int) -> list[str]:
        line = self.next(key)
        parts = line.split()
        if not parts or parts[0] != key or len(parts) != nargs + 1:
            raise DescriptionError(f"expected '{key}' with {nargs} values, got {line!r}", self.i)
        return parts[1:]


def _ints(parts, lineno):
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise DescriptionError(f"expected integers, got {' '.join(parts)!r}", lineno) from None


def decode(doc: bytes | str) -> PhysicalDescription:
    text = doc.decode("utf-8") if isinstance(doc, (bytes, bytearray)) else doc
    if not text.strip():
        raise DescriptionError("missing header")
    src = _Lines(text)
    head = src.next("header").split()
    if len(head) != 2 or head[0] != MAGIC:
        raise DescriptionError("missing header", 1)
    if head[1] != str(FORMAT_VERSION):
        raise DescriptionError(f"version mismatch: document is {head[1]}, reader supports {FORMAT_VERSION}", 1)
    width, height = _ints(src.keyword("SIZE", 2), src.i)
    (n_levels,) = _ints(src.keyword("LEVELS", 1), src.i)
    if n_levels < 1:
        raise DescriptionError("LEVELS must be >= 1", src.i)
    parts = src.keyword("CONFIG", 6)
    try:
        cfg = SegConfig(int(parts[0]), int(parts[4]), float(parts[1]), int(parts[2]), int(parts[3]))
        stop_threshold = int(parts[5])
    except ValueError as exc:
        raise DescriptionError(f"bad CONFIG: {exc}", src.i) from None

    levels: dict[int, LevelDescription] = {}
    expect = (height, width)
    for k in range(n_levels):
        level, w, h = _ints(src.keyword("LEVEL", 3), src.i)
        level_line = src.i
        if w < 1 or h < 1:
            raise DescriptionError(f"invalid level size {w}x{h}", level_line)
        if level != n_levels - 1 - k:
            raise DescriptionError(f"expected level {n_levels - 1 - k}, got {level}", level_line)
        (count,) = _ints(src.keyword("REGIONS", 1), src.i)
        regions = [_parse_region(src, level) for _ in range(count)]
        src.keyword("RLE", 0)
        labels = np.empty((h, w), dtype=np.int64)
        for y in range(h):
            labels[y] = _parse_rle_row(src, w)
        _check_regions(regions, labels, level_line)
        levels[level] = LevelDescription(level, labels, regions)
    shape0 = levels[0].labels.shape
    if shape0 != expect:
        raise DescriptionError(f"level 0 is {shape0[1]}x{shape0[0]}, SIZE says {width}x{height}")
    for lvl in range(1, n_levels):
        if levels[lvl].labels.shape != coarse_shape(levels[lvl - 1].labels.shape):
            raise DescriptionError(f"level {lvl} is not half the size of level {lvl - 1}")

    (n_rel,) = _ints(src.keyword("RELATIONS", 1), src.i)
    known = {(lvl, r.region) for lvl, lv in levels.items() for r in lv.regions}
    relations = []
    for _ in range(n_rel):
        line = src.next("relation")
        p = line.split()
        if len(p) != 4 or p[0] not in RELATION_KINDS:
            raise DescriptionError(f"bad relation {line!r}", src.i)
        lvl, s, o = _ints(p[1:], src.i)
        try:
            edge = RelationEdge(p[0], lvl, s, o)
        except ValueError as exc:
            raise DescriptionError(str(exc), src.i) from None
        obj_level = lvl + 1 if edge.kind == "sub-part-of" else lvl
        if (lvl, s) not in known or (obj_level, o) not in known:
            raise DescriptionError(f"relation names a region missing from its level: {line!r}", src.i)
        relations.append(edge)
    if src.i < len(src.lines):
        raise DescriptionError("trailing content after relations", src.lineno)
    return PhysicalDescription(width, height, cfg, stop_threshold,
                               [levels[i] for i in range(n_levels)], relations)


def _parse_region(src: _Lines, level: int) -> RegionDescriptor:
    line = src.next("region")
    p = line.split()
    if len(p) != 10:
        raise DescriptionError(f"region line needs 10 fields, got {len(p)}", src.i)
    try:
        rid, size = int(p[0]), int(p[1])
        cx, cy, mean = float(p[2]), float(p[3]), float(p[4])
        bbox = tuple(int(v) for v in p[5:9])
        parent = None if p[9] == "-" else int(p[9])
    except ValueError:
        raise DescriptionError(f"malformed region line {line!r}", src.i) from None
    return RegionDescriptor(rid, level, size, cx, cy, mean, bbox, parent)


def _parse_rle_row(src: _Lines, width: int) -> np.ndarray:
    line = src.next("RLE row")
    row = []
    total = 0
    for tok in line.split():
        lab, sep, n = tok.partition(":")
        try:
            lab, n = int(lab), int(n)
        except ValueError:
            raise DescriptionError(f"bad run {tok!r}", src.i) from None
        if not sep or n < 1:
            raise DescriptionError(f"bad run {tok!r}", src.i)
        row.append((lab, n))
        total += n
    if total != width:
        raise DescriptionError(f"RLE row sums to {total}, expected width {width}", src.i)
    return np.repeat([lab for lab, _ in row], [n for _, n in row])


def _check_regions(regions, labels, lineno):
    ids, counts = np.unique(labels, return_counts=True)
    declared = {r.region: r.size for r in regions}
    if len(declared) != len(regions):
        raise DescriptionError("duplicate region id", lineno)
    if declared != dict(zip(ids.tolist(), counts.tolist())):
        raise DescriptionError("region table does not match the RLE label map", lineno)


def reconstruct(desc: PhysicalDescription, level: int = 0) -> np.ndarray:
    """Paint every pixel of ``level`` with its region's mean intensity."""
    lv = desc.level(level)
    ids = np.array([r.region for r in lv.regions])
    means = np.array([r.mean for r in lv.regions])
    lut = np.zeros(int(ids.max()) + 1)
    lut[ids] = means
    return lut[lv.labels]


@dataclass
class CompressionReport:
    total_bytes: int
    raw_bytes: int
    level_bytes: dict[int, int]

    @property
    def ratio(self) -> float:
        return self.total_bytes / self.raw_bytes


def compression_report(doc: bytes, original: np.ndarray) -> CompressionReport:
    """Encoded size against the raw 8-bit size of ``original``."""
    desc = decode(doc)
    h, w = np.shape(original)
    if (desc.width, desc.height) != (w, h):
        raise ValueError(f"description is {desc.width}x{desc.height}, image is {w}x{h}")
    per_level: dict[int, int] = {}
    current = None
    for line in doc.split(b"\n"):
        if line.startswith(b"LEVEL "):
            current = int(line.split()[1])
        elif line.startswith(b"RELATIONS "):
            current = None
        if current is not None:
            per_level[current] = per_level.get(current, 0) + len(line) + 1
    return CompressionReport(len(doc), w * h, per_level)
