"""Bottom-up squeezing pyramid built by non-overlapping 2x2 averaging."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_STOP_THRESHOLD = 128


def squeeze_once(img: np.ndarray) -> np.ndarray:
    """Average each 2x2 block into one pixel.

    Odd widths or heights are padded by repeating the last column or row, so
    the output is ``ceil(h/2) x ceil(w/2)`` and no data is dropped.
    """
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    padded = np.pad(img, ((0, h % 2), (0, w % 2)), mode="edge")
    # fixed summation order within each block
    return (((padded[0::2, 0::2] + padded[0::2, 1::2]) + padded[1::2, 0::2]) + padded[1::2, 1::2]) / 4.0


@dataclass
class Pyramid:
    """Images ordered from level 0 (full resolution) to the top."""

    levels: list[np.ndarray]
    stop_threshold: int = DEFAULT_STOP_THRESHOLD

    @property
    def top_level(self) -> int:
        return len(self.levels) - 1

    @property
    def top(self) -> np.ndarray:
        return self.levels[-1]

    def __len__(self):
        return len(self.levels)

    def __getitem__(self, level: int) -> np.ndarray:
        return self.levels[level]

    def shapes(self) -> list[tuple[int, int]]:
        return [im.shape for im in self.levels]


def build_pyramid(img: np.ndarray, stop_threshold: int = DEFAULT_STOP_THRESHOLD) -> Pyramid:
    if stop_threshold < 1:
        raise ValueError("stop_threshold must be >= 1")
    levels = [np.asarray(img, dtype=np.float64)]
    while levels[-1].size > stop_threshold:
        levels.append(squeeze_once(levels[-1]))
    return Pyramid(levels, stop_threshold)


def coarse_shape(shape: tuple[int, int]) -> tuple[int, int]:
    h, w = shape
    return (h + 1) // 2, (w + 1) // 2
