"""Partition agreement scores."""

from __future__ import annotations

import numpy as np


def _comb2(n):
    n = np.asarray(n, dtype=np.float64)
    return n * (n - 1) / 2.0


def adjusted_rand_index(a, b) -> float:
    """Chance-corrected pair agreement between two labelings of the same pixels."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.shape != b.shape:
        raise ValueError("label maps differ in size")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    index = _comb2(table).sum()
    sum_a = _comb2(table.sum(axis=1)).sum()
    sum_b = _comb2(table.sum(axis=0)).sum()
    total = _comb2(a.size)
    expected = sum_a * sum_b / total if total else 0.0
    max_index = (sum_a + sum_b) / 2.0
    if max_index == expected:
        # both partitions trivial (all-one-cluster or all-singletons)
        return 1.0
    return float((index - expected) / (max_index - expected))


def boundary_map(labels) -> np.ndarray:
    """Pixels with at least one 4-neighbour carrying a different label."""
    lab = np.asarray(labels)
    out = np.zeros(lab.shape, dtype=bool)
    dx = lab[:, 1:] != lab[:, :-1]
    dy = lab[1:, :] != lab[:-1, :]
    out[:, 1:] |= dx
    out[:, :-1] |= dx
    out[1:, :] |= dy
    out[:-1, :] |= dy
    return out


def _dilate(mask, radius):
    out = mask.copy()
    h, w = mask.shape
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            src = mask[max(0, -dy):h - max(0, dy), max(0, -dx):w - max(0, dx)]
            out[max(0, dy):h - max(0, -dy), max(0, dx):w - max(0, -dx)] |= src
    return out


def boundary_f_measure(pred, truth, tolerance: int = 1) -> float:
    """F-measure of boundary pixels, matching within ``tolerance`` pixels
    (chessboard distance)."""
    bp = boundary_map(pred)
    bt = boundary_map(truth)
    if bp.shape != bt.shape:
        raise ValueError("label maps differ in shape")
    if not bp.any() and not bt.any():
        return 1.0
    if not bp.any() or not bt.any():
        return 0.0
    precision = (bp & _dilate(bt, tolerance)).sum() / bp.sum()
    recall = (bt & _dilate(bp, tolerance)).sum() / bt.sum()
    if precision + recall == 0:
        return 0.0
    return float(2 * precision * recall / (precision + recall))
