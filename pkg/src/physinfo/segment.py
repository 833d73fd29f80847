"""Segmentation of the pyramid top: intensity quantization, 4-connected
components and absorption of undersized regions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from skimage.measure import label as _sk_label

MAX_LLOYD_ITERS = 100


@dataclass(frozen=True)
class SegConfig:
    k_bins: int = 4
    min_region_px: int = 2
    deviation_tau: float = 10.0
    seed_min_px: int = 4
    max_refine_iters: int = 5

    def __post_init__(self):
        if self.k_bins < 2:
            raise ValueError(f"k_bins must be >= 2, got {self.k_bins}")
        for name in ("min_region_px", "seed_min_px", "max_refine_iters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not self.deviation_tau > 0:
            raise ValueError(f"deviation_tau must be positive, got {self.deviation_tau}")


@dataclass
class LabelMap:
    """Per-pixel region ids (positive integers) at one pyramid level."""

    labels: np.ndarray
    level: int = 0

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.ndim != 2:
            raise ValueError("labels must be 2-D")

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def region_ids(self) -> np.ndarray:
        return np.unique(self.labels)

    def __array__(self, dtype=None, copy=None):
        return self.labels if dtype is None else self.labels.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, LabelMap):
            return NotImplemented
        return self.level == other.level and np.array_equal(self.labels, other.labels)


def label_components(values: np.ndarray) -> np.ndarray:
    """4-connected components of equal-valued pixels.

    Labels start at 1 and follow raster-scan order of each component's first
    pixel.
    """
    values = np.asarray(values)
    codes = np.unique(values, return_inverse=True)[1].reshape(values.shape)
    raw = _sk_label(codes, background=-1, connectivity=1)
    flat = raw.ravel()
    ids, first = np.unique(flat, return_index=True)
    order = np.argsort(first, kind="stable")
    remap = np.zeros(ids.max() + 1, dtype=np.int64)
    remap[ids[order]] = np.arange(1, len(ids) + 1)
    return remap[raw].astype(np.int64)


def quantize_intensities(img: np.ndarray, k_bins: int) -> np.ndarray:
    """1-D Lloyd clustering of intensities into at most ``k_bins`` bins.

    Returns a per-pixel bin index; bins are numbered by increasing center.
    """
    if k_bins < 2:
        raise ValueError("k_bins must be >= 2")
    img = np.asarray(img, dtype=np.float64)
    values = img.ravel()
    distinct = np.unique(values)
    if len(distinct) < k_bins:
        return np.searchsorted(distinct, values).reshape(img.shape)

    centers = np.quantile(values, (np.arange(k_bins) + 0.5) / k_bins)
    assign = None
    for _ in range(MAX_LLOYD_ITERS):
        new = _nearest(values, centers)
        if assign is not None and np.array_equal(new, assign):
            break
        assign = new
        counts = np.bincount(assign, minlength=k_bins)
        sums = np.bincount(assign, weights=values, minlength=k_bins)
        occupied = counts > 0
        centers = centers.copy()
        centers[occupied] = sums[occupied] / counts[occupied]
        # an empty cluster is reseeded at the worst-fit value
        for j in np.flatnonzero(~occupied):
            err = np.abs(values - centers[assign])
            centers[j] = values[int(np.argmax(err))]
    order = np.argsort(centers, kind="stable")
    rank = np.empty(k_bins, dtype=np.int64)
    rank[order] = np.arange(k_bins)
    return rank[_nearest(values, centers)].reshape(img.shape)


def _nearest(values, centers):
    # argmin returns the first minimum, i.e. ties go to the lower center index
    return np.argmin(np.abs(values[:, None] - centers[None, :]), axis=1)


def connected_components(bins: np.ndarray, level: int = 0) -> LabelMap:
    return LabelMap(label_components(bins), level)


def adjacent_pairs(labels: np.ndarray) -> np.ndarray:
    """Unique (a, b) pairs, a < b, of 4-adjacent distinct labels."""
    h = np.stack([labels[:, :-1].ravel(), labels[:, 1:].ravel()], axis=1)
    v = np.stack([labels[:-1, :].ravel(), labels[1:, :].ravel()], axis=1)
    pairs = np.concatenate([h, v])
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    pairs.sort(axis=1)
    if len(pairs) == 0:
        return pairs.reshape(0, 2)
    return np.unique(pairs, axis=0)


def merge_small_regions(labels: LabelMap, img: np.ndarray, min_region_px: int) -> LabelMap:
    """Absorb regions smaller than ``min_region_px`` into their closest-mean
    neighbour, smallest region first (ties by lower id)."""
    lab = labels.labels.copy()
    img = np.asarray(img, dtype=np.float64)
    if lab.shape != img.shape:
        raise ValueError("label map and image differ in shape")
    while True:
        ids, inverse, counts = np.unique(lab, return_inverse=True, return_counts=True)
        if len(ids) < 2:
            break
        small = np.flatnonzero(counts < min_region_px)
        if len(small) == 0:
            break
        sums = np.bincount(inverse.ravel(), weights=img.ravel())
        means = dict(zip(ids.tolist(), (sums / counts).tolist()))
        victim_idx = min(small, key=lambda i: (counts[i], ids[i]))
        victim = int(ids[victim_idx])
        pairs = adjacent_pairs(lab)
        nbrs = set(pairs[pairs[:, 0] == victim, 1].tolist()) | set(pairs[pairs[:, 1] == victim, 0].tolist())
        target = min(nbrs, key=lambda n: (abs(means[n] - means[victim]), n))
        lab[lab == victim] = target
    return LabelMap(lab, labels.level)


def segment_top(img: np.ndarray, cfg: SegConfig = SegConfig(), level: int = 0) -> LabelMap:
    bins = quantize_intensities(img, cfg.k_bins)
    labels = connected_components(bins, level)
    return merge_small_regions(labels, img, cfg.min_region_px)
