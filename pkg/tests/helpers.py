"""Independent oracles and generators shared by the test modules.

Nothing here calls into the package's own labelling or scoring code.
"""

from collections import deque
from itertools import combinations

import numpy as np


def flood_fill_labels(values) -> np.ndarray:
    """4-connected equal-value components by breadth-first search, numbered
    in raster order of their first pixel."""
    values = np.asarray(values)
    h, w = values.shape
    out = np.zeros((h, w), dtype=np.int64)
    nxt = 0
    for y in range(h):
        for x in range(w):
            if out[y, x]:
                continue
            nxt += 1
            out[y, x] = nxt
            queue = deque([(y, x)])
            while queue:
                cy, cx = queue.popleft()
                for ny, nx in ((cy - 1, cx), (cy + 1, cx), (cy, cx - 1), (cy, cx + 1)):
                    if 0 <= ny < h and 0 <= nx < w and not out[ny, nx] and values[ny, nx] == values[cy, cx]:
                        out[ny, nx] = nxt
                        queue.append((ny, nx))
    return out


def pair_count_ari(a, b) -> float:
    """ARI from explicit enumeration of all pixel pairs."""
    a = np.asarray(a).ravel().tolist()
    b = np.asarray(b).ravel().tolist()
    ss = sd = ds = dd = 0
    for i, j in combinations(range(len(a)), 2):
        same_a, same_b = a[i] == a[j], b[i] == b[j]
        if same_a and same_b:
            ss += 1
        elif same_a:
            sd += 1
        elif same_b:
            ds += 1
        else:
            dd += 1
    denom = (ss + sd) * (sd + dd) + (ss + ds) * (ds + dd)
    if denom == 0:
        return 1.0
    return 2.0 * (ss * dd - sd * ds) / denom


def same_partition(a, b) -> bool:
    """True when the two maps group pixels identically (up to relabelling)."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    fwd, back = {}, {}
    for x, y in zip(a.tolist(), b.tolist()):
        if fwd.setdefault(x, y) != y or back.setdefault(y, x) != x:
            return False
    return True


def levels_for(h, w, threshold=128) -> int:
    """Index of the top level for an h x w image."""
    top = 0
    while h * w > threshold:
        h, w = (h + 1) // 2, (w + 1) // 2
        top += 1
    return top


def _has_square(mask, s):
    c = np.pad(mask.astype(np.int64), ((1, 0), (1, 0))).cumsum(0).cumsum(1)
    win = c[s:, s:] - c[:-s, s:] - c[s:, :-s] + c[:-s, :-s]
    return bool((win == s * s).any())


def random_piecewise(rng, tau=10.0, maxdim=32, nvals=4, minsize=8):
    """Random rectangles on a background, at most ``nvals`` intensities
    spaced by more than 2*tau, every region holding a square of side
    max(2**top_level, 2).  Returns (image, oracle labels)."""
    pool = np.arange(0, 256, 2 * tau + 1)
    while True:
        w, h = (int(v) for v in rng.integers(minsize, maxdim + 1, size=2))
        side = max(2 ** levels_for(h, w), 2)
        vals = rng.choice(pool, size=nvals, replace=False)
        img = np.full((h, w), float(vals[0]))
        rects = []
        for _ in range(int(rng.integers(1, 4))):
            rw = int(rng.integers(side, max(side, w // 2) + 1))
            rh = int(rng.integers(side, max(side, h // 2) + 1))
            if rw > w or rh > h:
                continue
            x0, y0 = int(rng.integers(0, w - rw + 1)), int(rng.integers(0, h - rh + 1))
            r = (x0, y0, x0 + rw - 1, y0 + rh - 1)
            if any(not (r[2] < q[0] or q[2] < r[0] or r[3] < q[1] or q[3] < r[1]) for q in rects):
                continue
            rects.append(r)
            img[r[1]:r[3] + 1, r[0]:r[2] + 1] = vals[int(rng.integers(1, nvals))]
        truth = flood_fill_labels(img)
        if side > min(h, w):
            continue
        if all(_has_square(truth == i, side) for i in np.unique(truth)):
            return img, truth
