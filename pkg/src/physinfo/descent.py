"""Top-down path: 1-to-4 expansion of the label map, refinement against the
reference image of each level, and seeding of regions that only become
visible at finer resolution."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .pyramid import Pyramid, coarse_shape
from .segment import LabelMap, SegConfig, adjacent_pairs, label_components

log = logging.getLogger(__name__)

# Safety bound on rounds per level.  Reassign, seed and split passes each lower
# the within-region squared error and merges only happen once those are idle
# (and are rejected if they would wake them), so the loop always reaches a
# fixed point well before this.
MAX_ROUNDS = 1000


class DimensionError(ValueError):
    pass


@dataclass
class RegionStats:
    region: int
    pixel_count: int
    intensity_sum: float

    @property
    def mean(self) -> float:
        return self.intensity_sum / self.pixel_count


@dataclass
class LevelRefinement:
    labels: LabelMap
    stats: dict[int, RegionStats]
    parents: dict[int, int]
    next_id: int
    rounds: int
    converged: bool


@dataclass
class DescentResult:
    """Label maps, region statistics and parent links, indexed by level."""

    labels: list[LabelMap]
    stats: list[dict[int, RegionStats]]
    parents: list[dict[int, int]] = field(default_factory=list)

    @property
    def top_level(self) -> int:
        return len(self.labels) - 1

    @property
    def final(self) -> LabelMap:
        return self.labels[0]


def region_stats(labels, reference: np.ndarray) -> dict[int, RegionStats]:
    lab = np.asarray(labels, dtype=np.int64).ravel()
    ref = np.asarray(reference, dtype=np.float64).ravel()
    counts = np.bincount(lab)
    sums = np.bincount(lab, weights=ref)
    return {
        int(i): RegionStats(int(i), int(counts[i]), float(sums[i]))
        for i in np.flatnonzero(counts)
    }


def expand_maps(labels: LabelMap, stats: dict[int, RegionStats], target_w: int, target_h: int):
    """Replicate each coarse label into a 2x2 block and predict intensities
    from region means."""
    if coarse_shape((target_h, target_w)) != labels.shape:
        raise DimensionError(
            f"cannot expand {labels.width}x{labels.height} labels to {target_w}x{target_h}"
        )
    lab = np.repeat(np.repeat(labels.labels, 2, axis=0), 2, axis=1)[:target_h, :target_w]
    means = _mean_lookup(stats, int(lab.max()))
    return LabelMap(lab, labels.level - 1), means[lab]


def _mean_lookup(stats, max_id):
    means = np.full(max_id + 1, np.nan)
    for rid, st in stats.items():
        if rid <= max_id:
            means[rid] = st.mean
    return means


def _neighbour_stack(lab: np.ndarray) -> np.ndarray:
    """(self, up, down, left, right) labels; off-image neighbours repeat self."""
    p = np.pad(lab, 1, mode="edge")
    return np.stack([lab, p[:-2, 1:-1], p[2:, 1:-1], p[1:-1, :-2], p[1:-1, 2:]])


def border_mask(labels) -> np.ndarray:
    cand = _neighbour_stack(np.asarray(labels))
    return np.any(cand[1:] != cand[0], axis=0)


def find_deviating_pixels(expanded, predicted: np.ndarray, reference: np.ndarray, tau: float) -> np.ndarray:
    lab = np.asarray(expanded)
    if not (lab.shape == np.shape(predicted) == np.shape(reference)):
        raise DimensionError("deviation inputs differ in shape")
    return (np.abs(np.asarray(reference) - predicted) > tau) | border_mask(lab)


class _Tables:
    """Dense per-id pixel counts and intensity sums."""

    def __init__(self, lab, ref, size):
        self.counts = np.bincount(lab.ravel(), minlength=size).astype(np.int64)
        self.sums = np.bincount(lab.ravel(), weights=ref.ravel(), minlength=size)

    def grow(self, size):
        if size > len(self.counts):
            extra = size - len(self.counts)
            self.counts = np.concatenate([self.counts, np.zeros(extra, dtype=np.int64)])
            self.sums = np.concatenate([self.sums, np.zeros(extra)])

    def move(self, old, new, values):
        size = len(self.counts)
        self.counts -= np.bincount(old, minlength=size)
        self.counts += np.bincount(new, minlength=size)
        self.sums -= np.bincount(old, weights=values, minlength=size)
        self.sums += np.bincount(new, weights=values, minlength=size)

    def means(self):
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.counts > 0, self.sums / np.maximum(self.counts, 1), np.nan)

    def as_dict(self):
        return {
            int(i): RegionStats(int(i), int(self.counts[i]), float(self.sums[i]))
            for i in np.flatnonzero(self.counts)
        }


def _reassign_step(lab, ref, means):
    """One synchronous pass: border pixels move to the 4-neighbour region
    whose mean is strictly closer than their own region's."""
    cand = _neighbour_stack(lab)
    border = np.any(cand[1:] != cand[0], axis=0)
    dist = np.abs(ref[None] - means[cand])
    best = dist.min(axis=0)
    move = border & (best < dist[0])
    if not move.any():
        return lab, move
    big = np.iinfo(np.int64).max
    target = np.where(dist == best[None], cand, big).min(axis=0)
    return np.where(move, target, lab), move


def refine_level(expanded: LabelMap, reference: np.ndarray, cfg: SegConfig = SegConfig(),
                 next_id: int | None = None) -> LevelRefinement:
    """Correct an expanded label map against the reference image of its level.

    Each round runs up to ``cfg.max_refine_iters`` reassignment passes, then
    seeds new regions from clusters of intensity-deviating pixels, splits
    regions that lost connectivity.  Once a round leaves the map unchanged,
    adjacent regions whose means are within ``deviation_tau`` are merged.
    Rounds repeat until nothing changes, so the output is a fixed point of the
    procedure.
    """
    ref = np.asarray(reference, dtype=np.float64)
    lab = expanded.labels.copy()
    if lab.shape != ref.shape:
        raise DimensionError("label map and reference differ in shape")
    tau = cfg.deviation_tau
    if next_id is None:
        next_id = int(lab.max()) + 1
    tables = _Tables(lab, ref, next_id)
    origin: dict[int, int] = {}

    rounds = 0
    converged = False
    while rounds < MAX_ROUNDS:
        rounds += 1
        changed = False

        for _ in range(cfg.max_refine_iters):
            new, moved = _reassign_step(lab, ref, tables.means())
            if not moved.any():
                break
            tables.move(lab[moved], new[moved], ref[moved])
            lab = new
            changed = True

        lab, next_id, seeded = _seed(lab, ref, tables, tau, cfg.seed_min_px, next_id, origin)
        lab, next_id, split = _split(lab, ref, tables, next_id, origin)
        if changed or seeded or split:
            continue
        lab, merged = _merge(lab, ref, tables, tau, cfg.seed_min_px)
        if not merged:
            converged = True
            break
    if not converged:
        log.warning("level %d refinement stopped after %d rounds without reaching a fixed point",
                    expanded.level, rounds)

    present = set(np.unique(lab).tolist())
    parents = {}
    for rid in sorted(origin):
        if rid in present:
            p = origin[rid]
            while p in origin:
                p = origin[p]
            parents[rid] = p
    return LevelRefinement(LabelMap(lab, expanded.level), tables.as_dict(), parents,
                           next_id, rounds, converged)


def _first_index(flat, size):
    ids, idx = np.unique(flat, return_index=True)
    first = np.full(size, -1)
    first[ids] = idx
    return first


def _seed_components(lab, ref, means, tau, seed_min_px):
    """Clusters of intensity-deviating pixels large enough to seed a region.

    Deviators only group with 4-neighbours of the same region that deviate in
    the same direction.  Returns (component map, seed component ids, first
    pixel index of each component).
    """
    diff = ref - means[lab]
    sign = np.where(diff > tau, 1, np.where(diff < -tau, -1, 0))
    if not sign.any():
        return None, [], None
    key = np.where(sign != 0, lab * 2 + (sign > 0), -1)
    comps = label_components(key)
    flat = comps.ravel()
    sizes = np.bincount(flat)
    first = _first_index(flat, len(sizes))
    key_flat = key.ravel()
    seeds = [c for c in range(1, len(sizes))
             if sizes[c] >= seed_min_px and key_flat[first[c]] >= 0]
    return comps, seeds, first


def _seed(lab, ref, tables, tau, seed_min_px, next_id, origin):
    comps, seeds, first = _seed_components(lab, ref, tables.means(), tau, seed_min_px)
    if not seeds:
        return lab, next_id, False
    new_ids = np.zeros(comps.max() + 1, dtype=np.int64)
    for c in seeds:
        new_ids[c] = next_id
        origin[next_id] = int(lab.flat[first[c]])
        next_id += 1
    tables.grow(next_id)
    moved = new_ids[comps] > 0
    new = np.where(moved, new_ids[comps], lab)
    tables.move(lab[moved], new[moved], ref[moved])
    return new, next_id, True


def _split(lab, ref, tables, next_id, origin):
    comps = label_components(lab)
    flat = comps.ravel()
    n = flat.max()
    if n == len(np.unique(lab)):
        return lab, next_id, False
    sizes = np.bincount(flat)
    first = _first_index(flat, n + 1)
    owner = lab.ravel()[first[1:]]  # label of each component
    relabel = np.zeros(n + 1, dtype=np.int64)
    relabel[1:] = owner
    by_owner: dict[int, list[int]] = {}
    for c, o in enumerate(owner.tolist(), start=1):
        by_owner.setdefault(o, []).append(c)
    for o, cs in by_owner.items():
        if len(cs) < 2:
            continue
        # largest component keeps the id; equal sizes go to raster order
        keeper = max(cs, key=lambda c: (sizes[c], -c))
        for c in cs:
            if c != keeper:
                relabel[c] = next_id
                origin[next_id] = o
                next_id += 1
    tables.grow(next_id)
    new = relabel[comps]
    moved = new != lab
    tables.move(lab[moved], new[moved], ref[moved])
    return new, next_id, True


def _merge(lab, ref, tables, tau, seed_min_px):
    """Merge adjacent regions whose means differ by at most ``tau``.

    Candidate pairs are joined greedily, closest means first.  A merged group
    is rejected when the merge would make any pixel move or seed a new region,
    so merging never undoes the settled reassign/seed state.
    """
    pairs = adjacent_pairs(lab)
    if len(pairs) == 0:
        return lab, False
    means = tables.means()
    diffs = np.abs(means[pairs[:, 0]] - means[pairs[:, 1]])
    keep = diffs <= tau
    pairs, diffs = pairs[keep], diffs[keep]
    order = np.lexsort((pairs[:, 1], pairs[:, 0], diffs))
    pairs = pairs[order].tolist()
    size = len(tables.counts)
    barred: set[int] = set()

    while pairs:
        root = np.arange(size)
        counts, sums = tables.counts.copy(), tables.sums.copy()

        def find(x):
            while root[x] != x:
                root[x] = root[root[x]]
                x = root[x]
            return x

        for a, b in pairs:
            ra, rb = find(a), find(b)
            if ra == rb or abs(sums[ra] / counts[ra] - sums[rb] / counts[rb]) > tau:
                continue
            keep_id, gone = min(ra, rb), max(ra, rb)
            root[gone] = keep_id
            counts[keep_id] += counts[gone]
            sums[keep_id] += sums[gone]
            counts[gone], sums[gone] = 0, 0.0
        final = np.array([find(i) for i in range(size)], dtype=np.int64)
        merged_ids = np.flatnonzero(final != np.arange(size))
        if len(merged_ids) == 0:
            return lab, False
        new = final[lab]
        with np.errstate(invalid="ignore", divide="ignore"):
            trial_means = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
        _, moved = _reassign_step(new, ref, trial_means)
        offenders = moved
        comps, seeds, _ = _seed_components(new, ref, trial_means, tau, seed_min_px)
        if seeds:
            offenders = offenders | np.isin(comps, seeds)
        if not offenders.any():
            tables.counts, tables.sums = counts, sums
            return new, True
        group_roots = set(final[merged_ids].tolist())
        touched = set(np.unique(_neighbour_stack(new)[:, offenders]).tolist()) & group_roots
        members = np.flatnonzero(np.isin(final, list(touched)))
        barred.update(members.tolist())
        pairs = [(a, b) for a, b in pairs if a not in barred and b not in barred]
    return lab, False


def run_descent(pyr: Pyramid, top_labels: LabelMap, cfg: SegConfig = SegConfig()) -> DescentResult:
    top = pyr.top_level
    if top_labels.shape != pyr.top.shape:
        raise DimensionError("top labels do not match the pyramid top")
    labels: list[LabelMap | None] = [None] * (top + 1)
    stats: list[dict | None] = [None] * (top + 1)
    parents: list[dict] = [{} for _ in range(top + 1)]
    labels[top] = LabelMap(top_labels.labels, top)
    stats[top] = region_stats(top_labels, pyr.top)
    next_id = int(top_labels.labels.max()) + 1
    for level in range(top - 1, -1, -1):
        h, w = pyr[level].shape
        expanded, _ = expand_maps(labels[level + 1], stats[level + 1], w, h)
        res = refine_level(expanded, pyr[level], cfg, next_id)
        labels[level], stats[level], parents[level] = res.labels, res.stats, res.parents
        next_id = res.next_id
    return DescentResult(labels, stats, parents)
