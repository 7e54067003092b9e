"""Synthetic ground truths, random observation masks, and the bundled
sample image."""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from .errors import ParameterError, ShapeError
from .mask import ObservationMask
from .rng import gaussian, make_rng
from .tensor import DenseTensor, mode_n_product


@dataclass(frozen=True, eq=False)
class TtCores:
    """Train of order-3 cores; core k has shape (r_{k-1}, I_k, r_k) with
    boundary bonds of size 1."""

    cores: tuple[np.ndarray, ...]

    def __post_init__(self):
        cores = tuple(np.asarray(c, dtype=np.float64) for c in self.cores)
        if not cores:
            raise ShapeError("need at least one core")
        if any(c.ndim != 3 for c in cores):
            raise ShapeError("cores must be order-3 arrays (left bond, dim, right bond)")
        if cores[0].shape[0] != 1 or cores[-1].shape[2] != 1:
            raise ShapeError("boundary bonds must have size 1")
        for left, right in zip(cores, cores[1:]):
            if left.shape[2] != right.shape[0]:
                raise ShapeError(
                    f"bond mismatch: {left.shape} does not chain with {right.shape}"
                )
        object.__setattr__(self, "cores", cores)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(c.shape[1] for c in self.cores)

    @property
    def bond_dims(self) -> tuple[int, ...]:
        return tuple(c.shape[2] for c in self.cores[:-1])

    def to_tensor(self) -> DenseTensor:
        """Contract all bonds into a dense tensor.

        Maintains a (prefix, bond) matrix whose rows enumerate the leading
        indices first-index-fastest, matching the flat storage order.
        """
        left = self.cores[0].reshape(self.cores[0].shape[1], -1)  # (I_1, r_1)
        for core in self.cores[1:]:
            grown = np.einsum("pq,qis->pis", left, core)
            left = grown.reshape((-1, core.shape[2]), order="F")
        return DenseTensor(self.dims, left.reshape(-1))


def gen_tt_cores(dims, ranks, seed: int) -> TtCores:
    """Gaussian cores for the given dims and internal bond sizes."""
    dims = tuple(int(d) for d in dims)
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != len(dims) - 1:
        raise ParameterError(
            f"need {len(dims) - 1} bond sizes for dims {dims}, got {len(ranks)}"
        )
    if any(r < 1 for r in ranks):
        raise ParameterError(f"bond sizes must be >= 1, got {ranks}")
    bonds = (1,) + ranks + (1,)
    rng = make_rng(seed)
    cores = [
        gaussian(rng, (bonds[k], dims[k], bonds[k + 1])) for k in range(len(dims))
    ]
    return TtCores(tuple(cores))


def gen_tt_tensor(dims, ranks, seed: int) -> DenseTensor:
    """Random tensor whose leading-split ranks are (generically) ``ranks``."""
    return gen_tt_cores(dims, ranks, seed).to_tensor()


def gen_tucker_tensor(dims, ranks, seed: int) -> DenseTensor:
    """Random tensor with (generic) single-mode ranks ``ranks``: a Gaussian
    core contracted with one Gaussian factor per mode."""
    dims = tuple(int(d) for d in dims)
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != len(dims):
        raise ParameterError(f"need {len(dims)} ranks for dims {dims}, got {len(ranks)}")
    if any(r < 1 for r in ranks):
        raise ParameterError(f"ranks must be >= 1, got {ranks}")
    rng = make_rng(seed)
    core = DenseTensor(ranks, gaussian(rng, prod(ranks)))
    out = core
    for mode, (r, d) in enumerate(zip(ranks, dims), start=1):
        factor = gaussian(rng, (r, d))  # stored (rank, dim); contraction uses the transpose
        out = mode_n_product(out, factor.T, mode)
    return out


def missing_count(missing_ratio: float, total: int) -> int:
    """Number of missing entries: round half away from zero."""
    return int(np.floor(missing_ratio * total + 0.5))


def gen_mask(source: DenseTensor, missing_ratio: float, seed: int) -> ObservationMask:
    """Uniform random mask over ``source`` with an exact missing count."""
    if not 0.0 <= missing_ratio < 1.0:
        raise ParameterError(f"missing ratio must be in [0, 1), got {missing_ratio}")
    total = source.size
    p = missing_count(missing_ratio, total)
    rng = make_rng(seed)
    missing = rng.permutation(total)[:p]
    flags = np.ones(total, dtype=bool)
    flags[missing] = False
    return ObservationMask.from_offsets(source, np.flatnonzero(flags))


# 5x7 bitmap font, one tuple of 7 row-bitmasks (bit 4 = leftmost column)
# per glyph. Enough coverage for short overlay captions.
_FONT = {
    "A": (0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11),
    "B": (0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E),
    "C": (0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E),
    "D": (0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E),
    "E": (0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F),
    "F": (0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10),
    "G": (0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F),
    "H": (0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11),
    "I": (0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E),
    "J": (0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C),
    "K": (0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11),
    "L": (0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F),
    "M": (0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11),
    "N": (0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11),
    "O": (0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E),
    "P": (0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10),
    "Q": (0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D),
    "R": (0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11),
    "S": (0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E),
    "T": (0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04),
    "U": (0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E),
    "V": (0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04),
    "W": (0x11, 0x11, 0x11, 0x15, 0x15, 0x1B, 0x11),
    "X": (0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11),
    "Y": (0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04),
    "Z": (0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F),
    "0": (0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E),
    "1": (0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E),
    "2": (0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F),
    "3": (0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E),
    "4": (0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02),
    "5": (0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E),
    "6": (0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E),
    "7": (0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08),
    "8": (0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E),
    "9": (0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C),
    " ": (0, 0, 0, 0, 0, 0, 0),
    ".": (0, 0, 0, 0, 0, 0x0C, 0x0C),
    ",": (0, 0, 0, 0, 0x0C, 0x04, 0x08),
    "-": (0, 0, 0, 0x1F, 0, 0, 0),
    ":": (0, 0x0C, 0x0C, 0, 0x0C, 0x0C, 0),
    "!": (0x04, 0x04, 0x04, 0x04, 0x04, 0, 0x04),
    "?": (0x0E, 0x11, 0x01, 0x02, 0x04, 0, 0x04),
}

GLYPH_W, GLYPH_H = 5, 7


def render_text_bitmap(text: str, height: int, width: int, scale=None, origin=(0, 0)):
    """Boolean (height, width) array, True where a glyph pixel lands.

    Lines are separated by newlines; unknown characters render as blanks.
    ``scale`` defaults to the largest factor that fits the longest line.
    """
    lines = [line.upper() for line in text.split("\n")]
    if not any(lines):
        raise ParameterError("text must be nonempty")
    longest = max(len(line) for line in lines)
    if scale is None:
        scale = max(
            1,
            min(
                width // max(1, longest * (GLYPH_W + 1)),
                height // max(1, len(lines) * (GLYPH_H + 1)),
            ),
        )
    scale = int(scale)
    if scale < 1:
        raise ParameterError("scale must be >= 1")
    out = np.zeros((height, width), dtype=bool)
    r0, c0 = origin
    for li, line in enumerate(lines):
        for ci, ch in enumerate(line):
            glyph = _FONT.get(ch)
            if glyph is None:
                continue
            for gr in range(GLYPH_H):
                bits = glyph[gr]
                for gc in range(GLYPH_W):
                    if not bits & (1 << (GLYPH_W - 1 - gc)):
                        continue
                    top = r0 + (li * (GLYPH_H + 1) + gr) * scale
                    left = c0 + (ci * (GLYPH_W + 1) + gc) * scale
                    out[top : top + scale, left : left + scale] = True
    return out


def text_mask(source: DenseTensor, text: str, scale=None, origin=(0, 0)) -> ObservationMask:
    """Mask an RGB image tensor by marking every pixel under the rendered
    text as missing, across all three channels."""
    if source.order != 3 or source.dims[2] != 3:
        raise ShapeError(f"text mask needs an (H, W, 3) image tensor, got dims {source.dims}")
    h, w, _ = source.dims
    hit = render_text_bitmap(text, h, w, scale=scale, origin=origin)
    observed = ~np.repeat(hit[:, :, None], 3, axis=2)
    offsets = np.flatnonzero(observed.flatten(order="F"))
    return ObservationMask.from_offsets(source, offsets)


def sample_image(side: int = 256) -> DenseTensor:
    """Deterministic photo-like RGB test image, values quantized to 8 bits.

    A smooth color gradient carrying a handful of soft-edged shapes and a
    textured band; enough local structure that block-recursive reindexing
    has something to exploit, while staying fully reproducible without
    binary assets.
    """
    if side < 2:
        raise ParameterError("side must be >= 2")
    yy, xx = np.meshgrid(
        np.linspace(0.0, 1.0, side), np.linspace(0.0, 1.0, side), indexing="ij"
    )
    r = 0.45 + 0.30 * xx + 0.10 * np.sin(2.1 * np.pi * yy)
    g = 0.40 + 0.25 * yy + 0.10 * np.cos(1.7 * np.pi * xx)
    b = 0.55 - 0.25 * xx * yy + 0.08 * np.sin(3.0 * np.pi * (xx + yy))
    img = np.stack([r, g, b], axis=2)

    def blob(cy, cx, ry, rx, color, softness=12.0):
        d = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2
        alpha = 1.0 / (1.0 + np.exp(np.clip(softness * (d - 1.0), -50.0, 50.0)))
        for ch in range(3):
            img[:, :, ch] = (1 - alpha) * img[:, :, ch] + alpha * color[ch]

    blob(0.30, 0.32, 0.18, 0.22, (0.85, 0.25, 0.20))
    blob(0.62, 0.70, 0.25, 0.16, (0.15, 0.55, 0.30))
    blob(0.75, 0.30, 0.12, 0.28, (0.90, 0.80, 0.25))
    blob(0.25, 0.75, 0.10, 0.10, (0.20, 0.30, 0.80))
    band = (yy > 0.82) & (yy < 0.95)
    img[:, :, 0][band] += 0.10 * np.sin(24 * np.pi * xx[band])
    img[:, :, 2][band] += 0.10 * np.cos(18 * np.pi * xx[band])
    img = np.clip(img, 0.0, 1.0)
    img = np.round(img * 255.0) / 255.0
    return DenseTensor.from_array(img)
