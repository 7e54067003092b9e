"""Ket augmentation: recast a (2^n, 2^n, 3) image tensor as an order-(n+1)
tensor of shape (4, ..., 4, 3) by recursive quadrant addressing.

Within every 2x2 pixel block the four positions are labelled 1..4 for
up-left, up-right, down-left, down-right, where "up" means the smaller row
index. The finest block label becomes the next-to-last tensor mode and the
coarsest the first; the color channel stays last. The map is a bijection on
entries, so masks transport through it exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from .errors import ShapeError
from .mask import ObservationMask
from .tensor import DenseTensor


@dataclass(frozen=True)
class KaLayout:
    """Shape bookkeeping for one augmentation depth."""

    depth: int  # image side is 2**depth

    def __post_init__(self):
        if self.depth < 1:
            raise ShapeError(f"depth must be >= 1, got {self.depth}")

    @property
    def side(self) -> int:
        return 2 ** self.depth

    @property
    def order(self) -> int:
        return self.depth + 1

    @property
    def dims(self) -> tuple[int, ...]:
        return (4,) * self.depth + (3,)

    @property
    def image_dims(self) -> tuple[int, ...]:
        return (self.side, self.side, 3)


def layout_for_image(dims) -> KaLayout:
    dims = tuple(dims)
    if len(dims) != 3 or dims[2] != 3:
        raise ShapeError(f"need an (H, W, 3) image tensor, got dims {dims}")
    h, w, _ = dims
    if h != w:
        raise ShapeError(f"image must be square, got {h}x{w}")
    depth = int(h).bit_length() - 1
    if h < 2 or 2 ** depth != h:
        raise ShapeError(f"image side must be a power of two >= 2, got {h}")
    return KaLayout(depth)


def layout_for_augmented(dims) -> KaLayout:
    dims = tuple(dims)
    if len(dims) < 2 or dims[-1] != 3 or any(d != 4 for d in dims[:-1]):
        raise ShapeError(f"augmented dims must be (4, ..., 4, 3), got {dims}")
    return KaLayout(len(dims) - 1)


def _forward_array(img: np.ndarray, depth: int) -> np.ndarray:
    # split each spatial axis into bits, most significant (coarsest) first,
    # then pair row/col bits per level and merge each pair into one size-4 axis
    a = img.reshape((2,) * depth + (2,) * depth + (3,))
    order = []
    for level in range(depth):
        order += [level, depth + level]
    a = a.transpose(order + [2 * depth])
    return a.reshape((4,) * depth + (3,))


def _inverse_array(aug: np.ndarray, depth: int) -> np.ndarray:
    a = aug.reshape((2, 2) * depth + (3,))
    rows = [2 * level for level in range(depth)]
    cols = [2 * level + 1 for level in range(depth)]
    a = a.transpose(rows + cols + [2 * depth])
    side = 2 ** depth
    return a.reshape((side, side, 3))


def ka_forward(image: DenseTensor) -> DenseTensor:
    """Augment an image tensor to its block-recursive higher-order form."""
    layout = layout_for_image(image.dims)
    return DenseTensor.from_array(_forward_array(image.array, layout.depth))


def ka_inverse(aug: DenseTensor) -> DenseTensor:
    """Exact inverse of :func:`ka_forward`."""
    layout = layout_for_augmented(aug.dims)
    return DenseTensor.from_array(_inverse_array(aug.array, layout.depth))


def offset_permutation(layout: KaLayout) -> np.ndarray:
    """perm[p] = flat offset in the augmented tensor of image flat offset p."""
    total = prod(layout.image_dims)
    tags = np.arange(total, dtype=np.int64).reshape(layout.image_dims, order="F")
    aug_flat = _forward_array(tags, layout.depth).flatten(order="F")
    perm = np.empty(total, dtype=np.int64)
    perm[aug_flat] = np.arange(total, dtype=np.int64)
    return perm


def ka_mask(mask: ObservationMask) -> ObservationMask:
    """Transport an image-space observation mask through the augmentation."""
    layout = layout_for_image(mask.dims)
    perm = offset_permutation(layout)
    moved = perm[mask.offsets]
    order = np.argsort(moved)
    return ObservationMask(layout.dims, moved[order], mask.values[order])
