"""File I/O: tensors (binary and text), P6 images, masks, and result tables.

All readers validate aggressively and raise FormatError on malformed input;
they never let a stray struct/index error escape.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from math import prod

import numpy as np

from .errors import FormatError, ShapeError
from .mask import ObservationMask
from .tensor import DenseTensor

TENSOR_MAGIC = b"DTNS"
MASK_MAGIC = b"DMSK"


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """RGB image with float values in [0, 1], normalized from 8-bit."""

    pixels: np.ndarray  # (height, width, 3)

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ShapeError(f"image needs shape (H, W, 3), got {px.shape}")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def to_tensor(self) -> DenseTensor:
        return DenseTensor.from_array(self.pixels)

    @classmethod
    def from_tensor(cls, x: DenseTensor, clamp: bool = True) -> "ImageBuffer":
        if x.order != 3 or x.dims[2] != 3:
            raise ShapeError(f"tensor dims {x.dims} are not an (H, W, 3) image")
        arr = x.array
        if clamp:
            arr = np.clip(arr, 0.0, 1.0)  # solver output can overshoot [0, 1]
        return cls(arr)

    def to_bytes(self) -> np.ndarray:
        return np.round(np.clip(self.pixels, 0.0, 1.0) * 255.0).astype(np.uint8)


def _read_exact(fh, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise FormatError(f"truncated {what}: wanted {n} bytes, got {len(data)}")
    return data


# ---------------------------------------------------------------- tensors

def write_tensor(x: DenseTensor, path, text: bool = False) -> None:
    """Binary layout: magic, u32 order, u64 dims, little-endian f64 values
    in flat column-major order. Text layout: order line, dims line, then
    one value per line."""
    if text:
        with open(path, "w") as fh:
            fh.write(f"{x.order}\n")
            fh.write(" ".join(str(d) for d in x.dims) + "\n")
            for v in x.values:
                fh.write(f"{v!r}\n")
        return
    with open(path, "wb") as fh:
        fh.write(TENSOR_MAGIC)
        fh.write(struct.pack("<I", x.order))
        fh.write(struct.pack(f"<{x.order}Q", *x.dims))
        fh.write(x.values.astype("<f8").tobytes())


def _read_tensor_text(raw: bytes, path) -> DenseTensor:
    try:
        tokens = raw.decode("utf-8").split()
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: not a tensor file ({exc})") from None
    if not tokens:
        raise FormatError(f"{path}: empty tensor file")
    try:
        order = int(tokens[0])
        if order < 1 or len(tokens) < 1 + order:
            raise ValueError
        dims = tuple(int(t) for t in tokens[1 : 1 + order])
        values = np.array([float(t) for t in tokens[1 + order :]], dtype=np.float64)
    except ValueError:
        raise FormatError(f"{path}: malformed text tensor header or values") from None
    if any(d < 1 for d in dims) or values.size != prod(dims):
        raise FormatError(
            f"{path}: dims {dims} need {prod(dims) if dims else 0} values, got {values.size}"
        )
    return DenseTensor(dims, values)


def read_tensor(path) -> DenseTensor:
    with open(path, "rb") as fh:
        head = fh.read(4)
        if head != TENSOR_MAGIC:
            rest = fh.read()
            return _read_tensor_text(head + rest, path)
        (order,) = struct.unpack("<I", _read_exact(fh, 4, "tensor order"))
        if order < 1 or order > 64:
            raise FormatError(f"{path}: implausible tensor order {order}")
        dims = struct.unpack(f"<{order}Q", _read_exact(fh, 8 * order, "tensor dims"))
        if any(d < 1 for d in dims):
            raise FormatError(f"{path}: nonpositive dimension in {dims}")
        count = prod(dims)
        if count > 1 << 34:
            raise FormatError(f"{path}: tensor with {count} entries is too large")
        payload = _read_exact(fh, 8 * count, "tensor payload")
        if fh.read(1):
            raise FormatError(f"{path}: trailing bytes after tensor payload")
    values = np.frombuffer(payload, dtype="<f8")
    if not np.isfinite(values).all():
        raise FormatError(f"{path}: non-finite values in tensor payload")
    return DenseTensor(dims, values)


# ------------------------------------------------------------------ masks

def write_mask(mask: ObservationMask, path) -> None:
    with open(path, "wb") as fh:
        fh.write(MASK_MAGIC)
        fh.write(struct.pack("<I", len(mask.dims)))
        fh.write(struct.pack(f"<{len(mask.dims)}Q", *mask.dims))
        fh.write(struct.pack("<Q", mask.count))
        fh.write(mask.offsets.astype("<u8").tobytes())
        fh.write(mask.values.astype("<f8").tobytes())


def read_mask(path) -> ObservationMask:
    with open(path, "rb") as fh:
        if _read_exact(fh, 4, "mask magic") != MASK_MAGIC:
            raise FormatError(f"{path}: bad mask magic")
        (order,) = struct.unpack("<I", _read_exact(fh, 4, "mask order"))
        if order < 1 or order > 64:
            raise FormatError(f"{path}: implausible mask order {order}")
        dims = struct.unpack(f"<{order}Q", _read_exact(fh, 8 * order, "mask dims"))
        if any(d < 1 for d in dims):
            raise FormatError(f"{path}: nonpositive dimension in {dims}")
        (count,) = struct.unpack("<Q", _read_exact(fh, 8, "mask count"))
        if count > prod(dims):
            raise FormatError(f"{path}: mask lists {count} entries for {prod(dims)} cells")
        offsets = np.frombuffer(
            _read_exact(fh, 8 * count, "mask offsets"), dtype="<u8"
        ).astype(np.int64)
        values = np.frombuffer(_read_exact(fh, 8 * count, "mask values"), dtype="<f8")
        if fh.read(1):
            raise FormatError(f"{path}: trailing bytes after mask payload")
    if count and ((np.diff(offsets) <= 0).any() or offsets[0] < 0 or offsets[-1] >= prod(dims)):
        raise FormatError(f"{path}: mask offsets must be sorted, unique, and in range")
    try:
        return ObservationMask(dims, offsets, values)
    except ShapeError as exc:
        raise FormatError(f"{path}: {exc}") from None


# ----------------------------------------------------------------- images

def _read_ppm_token(data: bytes, pos: int, path) -> tuple[bytes, int]:
    # skip whitespace and '#' comments between header fields
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c.isspace():
            pos += 1
        elif c == b"#":
            while pos < n and data[pos : pos + 1] != b"\n":
                pos += 1
        else:
            break
    if pos >= n:
        raise FormatError(f"{path}: truncated header at byte {pos}")
    start = pos
    while pos < n and not data[pos : pos + 1].isspace():
        pos += 1
    return data[start:pos], pos


def read_ppm(path) -> ImageBuffer:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] != b"P6":
        raise FormatError(f"{path}: not a binary P6 image (byte 0)")
    pos = 2
    fields = []
    for what in ("width", "height", "maxval"):
        token, pos = _read_ppm_token(data, pos, path)
        if not token.isdigit():
            raise FormatError(f"{path}: bad {what} field at byte {pos - len(token)}")
        fields.append(int(token))
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise FormatError(f"{path}: empty image {width}x{height}")
    if maxval != 255:
        raise FormatError(f"{path}: only maxval 255 is supported, got {maxval}")
    pos += 1  # single whitespace byte after maxval
    expected = width * height * 3
    payload = data[pos : pos + expected]
    if len(payload) != expected:
        raise FormatError(
            f"{path}: truncated pixel payload at byte {pos + len(payload)} "
            f"(wanted {expected} bytes, got {len(payload)})"
        )
    if len(data) > pos + expected:
        raise FormatError(f"{path}: trailing bytes after pixel payload")
    raw = np.frombuffer(payload, dtype=np.uint8).reshape((height, width, 3))
    return ImageBuffer(raw.astype(np.float64) / 255.0)


def write_ppm(image: ImageBuffer, path) -> None:
    data = image.to_bytes()
    with open(path, "wb") as fh:
        fh.write(f"P6\n{image.width} {image.height}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


# ------------------------------------------------------------ result rows

RESULT_COLUMNS = ("mr", "algorithm", "rse", "iterations", "seconds")


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def write_result_csv(path, rows, columns=RESULT_COLUMNS) -> None:
    """Tidy result table, one dict per row; missing keys become blanks."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(row.get(col)) for col in columns])
