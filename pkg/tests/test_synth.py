import hashlib

import numpy as np
import pytest

from physinfo.image_io import save_image
from physinfo.synth import DEMO_EXPECTED, PRESETS, OverlapError, Rect, Scene, add_noise, render, synthesize

# rects5, sigma 4, seed 7, written as P5
RECTS5_SIGMA4_SHA256 = "db831f972e5ac8403ac9b964ba6eaea7408eeaaed279db26f18b197367d15d2f"


def test_rects5_preset():
    img, truth = render(PRESETS["rects5"])
    assert img.shape == (256, 256)
    assert sorted(np.unique(truth).tolist()) == [0, 1, 2, 3, 4, 5]
    means = sorted({r.mean for r in PRESETS["rects5"].rects} | {PRESETS["rects5"].background})
    assert min(b - a for a, b in zip(means, means[1:])) >= 40


def test_render_inclusive_boxes():
    img, truth = render(Scene(5, 4, 10, (Rect(1, 1, 2, 3, 99),)))
    assert truth.tolist() == [[0, 0, 0, 0, 0], [0, 1, 1, 0, 0], [0, 1, 1, 0, 0], [0, 1, 1, 0, 0]]
    assert img[2, 2] == 99 and img[0, 0] == 10


def test_overlap_rejected():
    with pytest.raises(OverlapError):
        render(Scene(10, 10, 0, (Rect(0, 0, 4, 4, 50), Rect(4, 4, 6, 6, 90))))


@pytest.mark.parametrize("scene", [
    Scene(10, 10, 0, (Rect(0, 0, 10, 4, 50),)),
    Scene(10, 10, 300, ()),
    Scene(0, 10, 0, ()),
    Scene(10, 10, 0, (Rect(3, 0, 2, 4, 50),)),
])
def test_invalid_scenes(scene):
    with pytest.raises(ValueError):
        scene.validate()


def test_rect_parse():
    assert Rect.parse("1,2,3,4,55.5") == Rect(1, 2, 3, 4, 55.5)
    with pytest.raises(ValueError):
        Rect.parse("1,2,3")


def test_noise_deterministic_and_clamped():
    img, _ = render(PRESETS["rects5"])
    a = add_noise(img, 4, 7)
    assert np.array_equal(a, add_noise(img, 4, 7))
    assert not np.array_equal(a, add_noise(img, 4, 8))
    assert a.min() >= 0 and a.max() <= 255
    assert abs((a - img).std() - 4) < 0.1
    loud = add_noise(np.zeros((50, 50)), 50, 1)
    assert loud.min() == 0.0
    with pytest.raises(ValueError):
        add_noise(img, -1, 0)


def test_sigma4_checksum(tmp_path):
    img, _ = synthesize(PRESETS["rects5"], 4, 7)
    path = tmp_path / "r.pgm"
    save_image(img, path)
    assert hashlib.sha256(path.read_bytes()).hexdigest() == RECTS5_SIGMA4_SHA256


def test_demo_presets_listed():
    assert len(DEMO_EXPECTED) == 10
    assert set(DEMO_EXPECTED) <= set(PRESETS)
