"""Image file IO: binary PGM (P5) read/write and grayscale PNG read.

PGM is the canonical lossless interchange format here; 8-bit samples map to
intensity/255 and 16-bit (big-endian, per NetPBM) to intensity/65535.  PNG
is supported read-only for user data; color inputs are rejected.
"""

import numpy as np

from .errors import DecodeError


def write_pgm(path, image: np.ndarray, bits: int = 8) -> None:
    """Write a [0, 1] image as binary PGM with 8- or 16-bit samples."""
    if bits not in (8, 16):
        raise ValueError(f"bits must be 8 or 16, got {bits}")
    arr = np.asarray(image, dtype=np.float64)
    maxval = 255 if bits == 8 else 65535
    quantized = np.rint(np.clip(arr, 0.0, 1.0) * maxval)
    data = quantized.astype(np.uint8 if bits == 8 else ">u2").tobytes()
    height, width = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n{maxval}\n".encode("ascii"))
        fh.write(data)


def quantize(image: np.ndarray, bits: int = 8) -> np.ndarray:
    """The [0, 1] image as it will read back after a PGM round trip."""
    maxval = 255 if bits == 8 else 65535
    return np.rint(np.clip(image, 0.0, 1.0) * maxval) / maxval


class _TokenReader:
    """Whitespace/comment-aware header tokenizer that tracks byte offsets."""

    def __init__(self, data: bytes, path):
        self.data = data
        self.pos = 0
        self.path = path

    def token(self) -> bytes:
        data, n = self.data, len(self.data)
        while self.pos < n:
            ch = self.data[self.pos : self.pos + 1]
            if ch == b"#":
                while self.pos < n and data[self.pos : self.pos + 1] != b"\n":
                    self.pos += 1
            elif ch.isspace():
                self.pos += 1
            else:
                break
        if self.pos >= n:
            raise DecodeError(f"{self.path}: truncated header at byte {self.pos}")
        start = self.pos
        while self.pos < n and not data[self.pos : self.pos + 1].isspace():
            self.pos += 1
        return data[start : self.pos]

    def int_token(self, name: str) -> int:
        tok = self.token()
        try:
            return int(tok)
        except ValueError:
            raise DecodeError(f"{self.path}: bad {name} {tok!r} at byte {self.pos}") from None


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) PGM into a [0, 1] image."""
    with open(path, "rb") as fh:
        data = fh.read()
    return _decode_pgm(data, path)


def _decode_pgm(data: bytes, path) -> np.ndarray:
    if data[:2] != b"P5":
        raise DecodeError(f"{path}: not a binary PGM (magic {data[:2]!r} at byte 0)")
    reader = _TokenReader(data, path)
    magic = reader.token()
    if magic != b"P5":
        raise DecodeError(f"{path}: unsupported magic {magic!r} at byte 0")
    width = reader.int_token("width")
    height = reader.int_token("height")
    maxval = reader.int_token("maxval")
    if width < 1 or height < 1:
        raise DecodeError(f"{path}: bad dimensions {width}x{height}")
    if not 0 < maxval < 65536:
        raise DecodeError(f"{path}: maxval {maxval} out of range")
    start = reader.pos + 1  # single whitespace byte after maxval
    bytes_per_sample = 1 if maxval < 256 else 2
    expected = width * height * bytes_per_sample
    raw = data[start : start + expected]
    if len(raw) != expected:
        raise DecodeError(
            f"{path}: truncated pixel data at byte {start + len(raw)} (expected {expected} bytes)"
        )
    dtype = np.uint8 if bytes_per_sample == 1 else np.dtype(">u2")
    samples = np.frombuffer(raw, dtype=dtype).reshape(height, width)
    return samples.astype(np.float64) / maxval


def read_png(path) -> np.ndarray:
    """Read a grayscale PNG into a [0, 1] image; color inputs are rejected."""
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as img:
            mode = img.mode
            if mode not in ("L", "I", "I;16", "I;16B", "1"):
                raise DecodeError(f"{path}: color or paletted PNG rejected (mode {mode}); grayscale only")
            arr = np.asarray(img)
    except UnidentifiedImageError as exc:
        raise DecodeError(f"{path}: not a decodable image ({exc})") from exc
    if mode == "1":
        return arr.astype(np.float64)
    if mode == "L":
        return arr.astype(np.float64) / 255.0
    return arr.astype(np.float64) / 65535.0


def load_image(path) -> np.ndarray:
    """Load a PGM or grayscale PNG, dispatching on the file's magic bytes."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
    if magic[:2] == b"P5":
        return read_pgm(path)
    if magic == b"\x89PNG\r\n\x1a\n":
        return read_png(path)
    raise DecodeError(f"{path}: unsupported format (magic {magic[:2]!r} at byte 0)")
