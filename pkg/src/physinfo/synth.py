"""Synthetic test scenes: axis-aligned rectangles on a flat background."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class OverlapError(ValueError):
    pass


@dataclass(frozen=True)
class Rect:
    """Inclusive pixel box ``[x0, x1] x [y0, y1]`` painted with ``mean``."""

    x0: int
    y0: int
    x1: int
    y1: int
    mean: float

    def overlaps(self, other: "Rect") -> bool:
        return not (self.x1 < other.x0 or other.x1 < self.x0 or self.y1 < other.y0 or other.y1 < self.y0)

    @classmethod
    def parse(cls, text: str) -> "Rect":
        """``X0,Y0,X1,Y1,MEAN``"""
        parts = text.split(",")
        if len(parts) != 5:
            raise ValueError(f"rectangle must be X0,Y0,X1,Y1,MEAN, got {text!r}")
        x0, y0, x1, y1 = (int(p) for p in parts[:4])
        return cls(x0, y0, x1, y1, float(parts[4]))


@dataclass(frozen=True)
class Scene:
    width: int
    height: int
    background: float
    rects: tuple[Rect, ...] = field(default_factory=tuple)

    def validate(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("scene dimensions must be positive")
        for value in [self.background] + [r.mean for r in self.rects]:
            if not 0 <= value <= 255:
                raise ValueError(f"intensity {value} outside [0, 255]")
        for r in self.rects:
            if r.x0 > r.x1 or r.y0 > r.y1 or r.x0 < 0 or r.y0 < 0 or r.x1 >= self.width or r.y1 >= self.height:
                raise ValueError(f"rectangle {r} does not fit a {self.width}x{self.height} scene")
        for i, a in enumerate(self.rects):
            for b in self.rects[i + 1:]:
                if a.overlaps(b):
                    raise OverlapError(f"rectangles {a} and {b} overlap")


def render(scene: Scene) -> tuple[np.ndarray, np.ndarray]:
    """Return (clean image, ground-truth labels); background is label 0 and
    rectangle ``i`` is label ``i + 1``."""
    scene.validate()
    img = np.full((scene.height, scene.width), float(scene.background))
    truth = np.zeros((scene.height, scene.width), dtype=np.int64)
    for i, r in enumerate(scene.rects, start=1):
        img[r.y0:r.y1 + 1, r.x0:r.x1 + 1] = r.mean
        truth[r.y0:r.y1 + 1, r.x0:r.x1 + 1] = i
    return img, truth


def add_noise(img: np.ndarray, sigma: float, seed: int) -> np.ndarray:
    """i.i.d. Gaussian noise from a PCG64 stream, clamped to [0, 255]."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return np.array(img, dtype=np.float64)
    rng = np.random.Generator(np.random.PCG64(seed))
    noisy = img + sigma * rng.standard_normal(img.shape)
    return np.clip(noisy, 0.0, 255.0)


def synthesize(scene: Scene, sigma: float = 0.0, seed: int = 0):
    clean, truth = render(scene)
    return add_noise(clean, sigma, seed), truth


def _r(*args):
    return Rect(*args)


PRESETS: dict[str, Scene] = {
    # 5 rectangles, all pairwise mean gaps >= 40
    "rects5": Scene(256, 256, 20, (
        _r(20, 24, 99, 87, 60),
        _r(140, 16, 235, 71, 100),
        _r(36, 130, 91, 229, 140),
        _r(120, 110, 200, 170, 180),
        _r(150, 190, 240, 245, 220),
    )),
    # scenes for the knowledgebase demo
    "sky_ground_a": Scene(128, 128, 50, (_r(0, 0, 127, 59, 210),)),
    "sky_ground_b": Scene(128, 128, 30, (_r(0, 0, 127, 69, 190),)),
    "three_band_a": Scene(128, 128, 40, (_r(0, 0, 127, 41, 220), _r(0, 42, 127, 84, 120))),
    "three_band_b": Scene(128, 128, 60, (_r(0, 0, 127, 45, 200), _r(0, 46, 127, 87, 110))),
    "frame_patch_a": Scene(128, 128, 60, (_r(32, 32, 95, 95, 200),)),
    "frame_patch_b": Scene(128, 128, 40, (_r(24, 40, 103, 87, 180),)),
    "two_pictures_a": Scene(128, 128, 100, (_r(16, 32, 47, 95, 220), _r(64, 48, 119, 79, 30))),
    "two_pictures_b": Scene(128, 128, 110, (_r(12, 24, 43, 79, 230), _r(60, 40, 115, 71, 20))),
    "door_window_a": Scene(128, 128, 140, (_r(16, 24, 39, 47, 230), _r(72, 56, 103, 127, 30))),
    "door_window_b": Scene(128, 128, 150, (_r(20, 20, 47, 43, 240), _r(76, 48, 105, 127, 40))),
}

# preset -> (story, scene) the demo knowledgebase should select
DEMO_EXPECTED: dict[str, tuple[str, str]] = {
    "sky_ground_a": ("landscape", "open_field"),
    "sky_ground_b": ("landscape", "open_field"),
    "three_band_a": ("landscape", "lake_shore"),
    "three_band_b": ("landscape", "lake_shore"),
    "frame_patch_a": ("gallery", "framed_picture"),
    "frame_patch_b": ("gallery", "framed_picture"),
    "two_pictures_a": ("gallery", "two_pictures"),
    "two_pictures_b": ("gallery", "two_pictures"),
    "door_window_a": ("street", "house_front"),
    "door_window_b": ("street", "house_front"),
}
