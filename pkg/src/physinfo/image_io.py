"""Grayscale PGM input/output and colour overlays of label maps.

Images are handled in memory as 2-D ``float64`` arrays of shape
``(height, width)`` with intensities in ``[0, 255]``.  Quantization to 8 bits
only happens when writing files.
"""

from __future__ import annotations

import numpy as np

WHITESPACE = b" \t\n\r\v\f"


class ImageFormatError(ValueError):
    """Base class for problems with the content of an image file."""


class MalformedHeaderError(ImageFormatError):
    pass


class UnsupportedImageError(ImageFormatError):
    """Valid netpbm, but not 8-bit grayscale."""


class TruncatedDataError(ImageFormatError):
    def __init__(self, msg="unexpected end of data"):
        super().__init__(msg)


def as_image(values) -> np.ndarray:
    """Validate ``values`` as a raster image and return a float64 copy."""
    img = np.array(values, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"image must be a non-empty 2-D array, got shape {img.shape}")
    if not np.all(np.isfinite(img)) or img.min() < 0.0 or img.max() > 255.0:
        raise ValueError("image intensities must lie in [0, 255]")
    return img


class _HeaderReader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 2

    def _skip_space(self):
        data = self.data
        while self.pos < len(data):
            c = data[self.pos:self.pos + 1]
            if c == b"#":
                end = data.find(b"\n", self.pos)
                self.pos = len(data) if end < 0 else end + 1
            elif c in WHITESPACE:
                self.pos += 1
            else:
                break

    def integer(self, what: str) -> int:
        self._skip_space()
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos:self.pos + 1].isdigit():
            self.pos += 1
        if start == self.pos:
            if self.pos >= len(self.data):
                raise MalformedHeaderError(f"header ends before {what}")
            raise MalformedHeaderError(f"expected {what} at byte {start}")
        return int(self.data[start:self.pos])


def parse_pgm(data: bytes) -> np.ndarray:
    magic = data[:2]
    if magic in (b"P1", b"P3", b"P4", b"P6", b"P7"):
        raise UnsupportedImageError(f"{magic.decode()} is not a grayscale PGM")
    if magic not in (b"P2", b"P5"):
        raise MalformedHeaderError("not a PGM file (bad magic number)")
    reader = _HeaderReader(data)
    width = reader.integer("width")
    height = reader.integer("height")
    maxval = reader.integer("maxval")
    if width < 1 or height < 1:
        raise MalformedHeaderError(f"invalid dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedImageError(f"maxval {maxval} unsupported, only 8-bit (255) images are accepted")
    if reader.pos >= len(data):
        raise TruncatedDataError()
    if data[reader.pos:reader.pos + 1] not in WHITESPACE:
        raise MalformedHeaderError("missing whitespace after maxval")
    payload = data[reader.pos + 1:]
    n = width * height

    if magic == b"P5":
        if len(payload) < n:
            raise TruncatedDataError()
        pixels = np.frombuffer(payload[:n], dtype=np.uint8)
    else:
        lines = [line.split(b"#", 1)[0] for line in payload.split(b"\n")]
        tokens = b" ".join(lines).split()
        if len(tokens) < n:
            raise TruncatedDataError()
        try:
            pixels = np.array([int(t) for t in tokens[:n]], dtype=np.int64)
        except ValueError:
            raise MalformedHeaderError("non-numeric pixel value in P2 data") from None
        if pixels.min() < 0 or pixels.max() > 255:
            raise ImageFormatError("P2 pixel value outside [0, 255]")
    return pixels.reshape(height, width).astype(np.float64)


def load_image(path) -> np.ndarray:
    """Read an 8-bit grayscale PGM (P2 or P5) as a float image."""
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_pgm(data)


def quantize(img: np.ndarray) -> np.ndarray:
    """Round half up and clamp to ``uint8``."""
    return np.clip(np.floor(np.asarray(img, dtype=np.float64) + 0.5), 0, 255).astype(np.uint8)


def save_image(img, path) -> None:
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(quantize(img).tobytes())


def label_color(label: int) -> tuple[int, int, int]:
    """Fixed colour for a region id (splitmix64 hash, never black)."""
    z = (int(label) + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    z ^= z >> 31
    # keep every channel away from 0 so labels never blend into a black border
    return tuple(32 + ((z >> s) & 0xFF) * 223 // 255 for s in (0, 16, 32))


def overlay_pixels(labels) -> np.ndarray:
    labels = np.asarray(labels)
    ids, inverse = np.unique(labels, return_inverse=True)
    palette = np.array([label_color(i) for i in ids], dtype=np.uint8)
    return palette[inverse.reshape(labels.shape)]


def save_overlay(labels, path) -> None:
    """Write a P6 image with one deterministic colour per region id."""
    rgb = overlay_pixels(labels)
    h, w = rgb.shape[:2]
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w, h))
        fh.write(rgb.tobytes())


def read_ppm(path) -> np.ndarray:
    """Minimal P6 reader, used to inspect overlays."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] != b"P6":
        raise MalformedHeaderError("not a P6 file")
    reader = _HeaderReader(data)
    w, h, maxval = reader.integer("width"), reader.integer("height"), reader.integer("maxval")
    if maxval != 255:
        raise UnsupportedImageError(f"maxval {maxval} unsupported")
    payload = data[reader.pos + 1:]
    if len(payload) < 3 * w * h:
        raise TruncatedDataError()
    return np.frombuffer(payload[:3 * w * h], dtype=np.uint8).reshape(h, w, 3)

