"""Grayscale images as float64 arrays: arithmetic, norms, noise, file I/O.

An image is a 2D ``numpy`` array of float64, indexed ``[row, col]``
(``shape == (height, width)``). Intensities are nominally 0..255 but are
kept as unclamped reals everywhere except the 8-bit file boundary, since
the decomposition components (textures, noise) are signed and need
sub-integer precision.

Two on-disk formats are supported:

* binary PGM (P5, maxval 255) for 8-bit interchange; values are rounded
  to nearest and clamped to [0, 255] on write.
* a lossless raw-float container for signed components, byte-exact:
  the magic string ``b"VDRF01\\n"``, then width and height as
  little-endian uint32, then ``width*height`` little-endian float64
  values in row-major order.

Noise generation uses the PCG64 bit generator through
``numpy.random.Generator.standard_normal``; a fixed seed reproduces the
same stream bit-identically across platforms.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

RAWFLOAT_MAGIC = b"VDRF01\n"

#: Offset applied to signed components (textures, noise) for 8-bit previews.
DISPLAY_OFFSET = 128.0


class FormatError(Exception):
    """Raised for malformed or unsupported image files."""


@dataclass(frozen=True)
class NoiseSpec:
    """Zero-mean Gaussian noise: standard deviation and 64-bit seed."""

    sigma: float
    seed: int

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


def as_image(a, name: str = "image") -> np.ndarray:
    """Coerce to a 2D float64 array and verify all values are finite."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def zeros(width: int, height: int) -> np.ndarray:
    """All-zero image of the given pixel dimensions."""
    return np.zeros((height, width), dtype=np.float64)


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise sum; the operands must have identical dimensions."""
    _check_same_shape(a, b)
    return a + b


def sub(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise difference; the operands must have identical dimensions."""
    _check_same_shape(a, b)
    return a - b


def scale(a: np.ndarray, c: float) -> np.ndarray:
    """Pointwise multiplication by a scalar."""
    return a * float(c)


def l2_norm(a: np.ndarray) -> float:
    """sqrt of the sum of squared values (plain discrete sum, no weighting)."""
    return float(np.sqrt(np.sum(np.square(a, dtype=np.float64))))


def l1_norm(a: np.ndarray) -> float:
    """Sum of absolute values."""
    return float(np.sum(np.abs(a)))


def mean(a: np.ndarray) -> float:
    return float(np.mean(a))


def variance(a: np.ndarray) -> float:
    """Population variance (normalized by the pixel count)."""
    return float(np.var(a))


def gaussian_noise(spec: NoiseSpec, width: int, height: int) -> np.ndarray:
    """Zero-mean i.i.d. normal image, a pure function of (spec, width, height).

    The same spec and dimensions always reproduce the identical image,
    bit for bit (PCG64 stream, ziggurat normal sampling).
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    return rng.standard_normal((height, width)) * spec.sigma


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def write_pgm(img: np.ndarray, path) -> None:
    """Write binary PGM (P5, maxval 255); rounds and clamps to [0, 255]."""
    arr = as_image(img)
    h, w = arr.shape
    data = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def _read_pgm_tokens(raw: bytes, count: int) -> tuple[list[bytes], int]:
    """Return the first `count` header tokens and the offset past the last.

    PGM headers are whitespace-separated tokens; `#` starts a comment
    running to end of line.
    """
    tokens = []
    i = 0
    n = len(raw)
    while len(tokens) < count and i < n:
        c = raw[i : i + 1]
        if c == b"#":
            while i < n and raw[i : i + 1] != b"\n":
                i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < n and not raw[j : j + 1].isspace() and raw[j : j + 1] != b"#":
                j += 1
            tokens.append(raw[i:j])
            i = j
    if len(tokens) < count:
        raise FormatError("truncated PGM header")
    # exactly one whitespace byte separates the header from pixel data
    return tokens, i + 1


def read_pgm(path) -> np.ndarray:
    """Read binary PGM (P5); only maxval <= 255 is supported."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if not raw.startswith(b"P5"):
        raise FormatError("not a binary PGM (P5) file")
    tokens, offset = _read_pgm_tokens(raw, 4)
    try:
        w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    except ValueError as exc:
        raise FormatError(f"malformed PGM header: {exc}") from exc
    if w <= 0 or h <= 0:
        raise FormatError(f"invalid PGM dimensions {w}x{h}")
    if not 0 < maxval <= 255:
        raise FormatError(f"unsupported PGM maxval {maxval}")
    data = raw[offset : offset + w * h]
    if len(data) != w * h:
        raise FormatError("truncated PGM pixel data")
    return np.frombuffer(data, dtype=np.uint8).reshape(h, w).astype(np.float64)


def write_rawfloat(img: np.ndarray, path) -> None:
    """Write the lossless raw-float container (see module docstring)."""
    arr = as_image(img)
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(RAWFLOAT_MAGIC)
        fh.write(struct.pack("<II", w, h))
        fh.write(arr.astype("<f8").tobytes())


def read_rawfloat(path) -> np.ndarray:
    with open(path, "rb") as fh:
        raw = fh.read()
    if not raw.startswith(RAWFLOAT_MAGIC):
        raise FormatError("missing raw-float magic string")
    header_end = len(RAWFLOAT_MAGIC) + 8
    if len(raw) < header_end:
        raise FormatError("truncated raw-float header")
    w, h = struct.unpack("<II", raw[len(RAWFLOAT_MAGIC) : header_end])
    if w <= 0 or h <= 0:
        raise FormatError(f"invalid raw-float dimensions {w}x{h}")
    expected = header_end + 8 * w * h
    if len(raw) != expected:
        raise FormatError(
            f"raw-float payload is {len(raw) - header_end} bytes, expected {8 * w * h}"
        )
    data = np.frombuffer(raw, dtype="<f8", offset=header_end).reshape(h, w)
    img = data.astype(np.float64, copy=True)
    if not np.all(np.isfinite(img)):
        raise FormatError("raw-float payload contains non-finite values")
    return img


def read_image(path) -> np.ndarray:
    """Read either format, sniffing the magic bytes."""
    with open(path, "rb") as fh:
        head = fh.read(len(RAWFLOAT_MAGIC))
    if head.startswith(b"P5"):
        return read_pgm(path)
    if head.startswith(RAWFLOAT_MAGIC):
        return read_rawfloat(path)
    raise FormatError(f"unrecognized image format: {path}")


def write_image(img: np.ndarray, path) -> None:
    """Write by extension: ``.pgm`` as 8-bit PGM, anything else raw-float."""
    if str(path).lower().endswith(".pgm"):
        write_pgm(img, path)
    else:
        write_rawfloat(img, path)
