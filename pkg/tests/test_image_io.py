import numpy as np
import pytest

from physinfo.image_io import (
    ImageFormatError, MalformedHeaderError, TruncatedDataError, UnsupportedImageError,
    as_image, label_color, load_image, overlay_pixels, parse_pgm, quantize, read_ppm,
    save_image, save_overlay,
)


def test_parse_p5():
    data = b"P5\n3 2\n255\n" + bytes([0, 10, 20, 30, 40, 255])
    img = parse_pgm(data)
    assert img.dtype == np.float64
    assert img.shape == (2, 3)
    assert img.tolist() == [[0, 10, 20], [30, 40, 255]]


def test_parse_p2_with_comments():
    data = b"P2\n# made by hand\n2 2 # size\n255\n1 2\n# mid\n3 4\n"
    assert parse_pgm(data).tolist() == [[1, 2], [3, 4]]


def test_header_comment_between_tokens():
    data = b"P5 #c\n2#c\n 1\n255\n" + bytes([7, 8])
    assert parse_pgm(data).tolist() == [[7, 8]]


@pytest.mark.parametrize("magic", [b"P1", b"P3", b"P4", b"P6", b"P7"])
def test_non_grayscale_rejected(magic):
    with pytest.raises(UnsupportedImageError):
        parse_pgm(magic + b"\n1 1\n255\n\x00\x00\x00")


def test_sixteen_bit_rejected():
    with pytest.raises(UnsupportedImageError):
        parse_pgm(b"P5\n1 1\n65535\n\x00\x00")


def test_bad_magic():
    with pytest.raises(MalformedHeaderError):
        parse_pgm(b"GIF89a")


def test_truncated_payload():
    with pytest.raises(TruncatedDataError, match="unexpected end of data"):
        parse_pgm(b"P5\n4 4\n255\n" + bytes(10))


def test_truncated_header():
    with pytest.raises(MalformedHeaderError):
        parse_pgm(b"P5\n4")


def test_p2_out_of_range():
    with pytest.raises(ImageFormatError):
        parse_pgm(b"P2\n1 1\n255\n300\n")


def test_zero_size():
    with pytest.raises(MalformedHeaderError):
        parse_pgm(b"P5\n0 3\n255\n")


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_image(tmp_path / "absent.pgm")


def test_quantize_rounds_half_up_and_clamps():
    q = quantize(np.array([[0.49, 0.5, 1.5, 254.5, 300.0, -3.0]]))
    assert q.tolist() == [[0, 1, 2, 255, 255, 0]]
    assert q.dtype == np.uint8


def test_save_load_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    img = rng.integers(0, 256, size=(7, 5)).astype(float)
    path = tmp_path / "x.pgm"
    save_image(img, path)
    assert path.read_bytes().startswith(b"P5\n5 7\n255\n")
    assert np.array_equal(load_image(path), img)


def test_as_image_validation():
    with pytest.raises(ValueError):
        as_image(np.zeros(4))
    with pytest.raises(ValueError):
        as_image([[256.0]])
    with pytest.raises(ValueError):
        as_image([[np.nan]])
    assert as_image([[1, 2]]).dtype == np.float64


def test_label_colour_deterministic_and_bright():
    assert label_color(5) == label_color(5)
    assert label_color(5) != label_color(6)
    for i in range(200):
        assert all(32 <= c <= 255 for c in label_color(i))


def test_overlay_roundtrip(tmp_path):
    labels = np.array([[1, 1, 2], [3, 3, 2]])
    path = tmp_path / "o.ppm"
    save_overlay(labels, path)
    rgb = read_ppm(path)
    assert rgb.shape == (2, 3, 3)
    assert np.array_equal(rgb, overlay_pixels(labels))
    assert tuple(rgb[0, 2]) == label_color(2)
