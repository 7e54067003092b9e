"""Dense N-way tensors, their matricizations, and elementary tensor algebra.

Storage convention: tensor values live in a flat float64 array linearized
column-major over the index tuple, i.e. the first index varies fastest.
With that layout the leading-split matricization is a pure reshape of the
flat buffer. Indices are 1-based at the API boundary; flat offsets are
0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from .errors import ShapeError


def _checked_dims(dims) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if len(dims) == 0 or any(d < 1 for d in dims):
        raise ShapeError(f"dims must be a nonempty tuple of positive integers, got {dims}")
    return dims


def element_offset(index, dims) -> int:
    """Flat 0-based offset of a 1-based multi-index, first index fastest."""
    dims = _checked_dims(dims)
    if len(index) != len(dims):
        raise IndexError(f"index {tuple(index)} has wrong length for dims {dims}")
    offset = 0
    stride = 1
    for i, d in zip(index, dims):
        if not 1 <= i <= d:
            raise IndexError(f"index {tuple(index)} out of range for dims {dims}")
        offset += (int(i) - 1) * stride
        stride *= d
    return offset


def offset_to_index(offset: int, dims) -> tuple[int, ...]:
    """Inverse of :func:`element_offset`."""
    dims = _checked_dims(dims)
    if not 0 <= offset < prod(dims):
        raise IndexError(f"offset {offset} out of range for dims {dims}")
    index = []
    for d in dims:
        index.append(offset % d + 1)
        offset //= d
    return tuple(index)


@dataclass(frozen=True, eq=False)
class DenseTensor:
    """Dense real tensor: explicit dims plus a flat column-major value buffer.

    Instances are immutable; the value buffer is marked read-only on
    construction and every operation returns a new tensor.
    """

    dims: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        dims = _checked_dims(self.dims)
        values = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        if values.size != prod(dims):
            raise ShapeError(
                f"value count {values.size} does not match dims {dims} (need {prod(dims)})"
            )
        values.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_array(cls, arr) -> "DenseTensor":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim == 0:
            raise ShapeError("cannot build a tensor from a scalar")
        return cls(arr.shape, arr.flatten(order="F"))

    @classmethod
    def zeros(cls, dims) -> "DenseTensor":
        dims = _checked_dims(dims)
        return cls(dims, np.zeros(prod(dims)))

    @property
    def order(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def array(self) -> np.ndarray:
        """Read-only ndarray view of the logical tensor."""
        return self.values.reshape(self.dims, order="F")

    def get(self, index) -> float:
        """Element at a 1-based multi-index."""
        return float(self.values[element_offset(index, self.dims)])


@dataclass(frozen=True, eq=False)
class Matricization:
    """A tensor reshaped to a matrix, with enough provenance to fold back.

    ``family`` is ``"tt"`` (rows enumerate the first ``index`` modes) or
    ``"mode"`` (rows are mode ``index`` fibers). Values are stored flat
    column-major, like DenseTensor.
    """

    rows: int
    cols: int
    values: np.ndarray
    source_dims: tuple[int, ...]
    family: str
    index: int

    def __post_init__(self):
        dims = _checked_dims(self.source_dims)
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if self.rows < 1 or self.cols < 1 or self.rows * self.cols != values.size:
            raise ShapeError(f"matrix shape {self.rows}x{self.cols} does not match value count")
        if values.size != prod(dims):
            raise ShapeError(f"matrix size {values.size} does not match source dims {dims}")
        if self.family not in ("tt", "mode"):
            raise ShapeError(f"unknown matricization family {self.family!r}")
        object.__setattr__(self, "source_dims", dims)
        object.__setattr__(self, "values", values)

    @property
    def matrix(self) -> np.ndarray:
        return self.values.reshape((self.rows, self.cols), order="F")


# Array-level unfold/fold helpers. The solvers use these directly on ndarrays;
# the Matricization wrappers below are the provenance-carrying public surface.

def unfold_tt_array(arr: np.ndarray, split: int) -> np.ndarray:
    m = prod(arr.shape[:split])
    return arr.reshape((m, -1), order="F")


def fold_tt_array(mat: np.ndarray, dims) -> np.ndarray:
    return mat.reshape(dims, order="F")


def unfold_mode_array(arr: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(arr, axis, 0).reshape((arr.shape[axis], -1), order="F")


def fold_mode_array(mat: np.ndarray, dims, axis: int) -> np.ndarray:
    dims = tuple(dims)
    rest = dims[:axis] + dims[axis + 1 :]
    return np.moveaxis(mat.reshape((dims[axis],) + rest, order="F"), 0, axis)


def matricize_mode_n(x: DenseTensor, mode: int) -> Matricization:
    """Single-mode unfolding: rows are the mode fibers, columns enumerate the
    remaining indices in their original order (first remaining index fastest)."""
    if not 1 <= mode <= x.order:
        raise ShapeError(f"mode {mode} out of range for order-{x.order} tensor")
    mat = unfold_mode_array(x.array, mode - 1)
    return Matricization(
        rows=mat.shape[0],
        cols=mat.shape[1],
        values=mat.flatten(order="F"),
        source_dims=x.dims,
        family="mode",
        index=mode,
    )


def matricize_tt(x: DenseTensor, split: int) -> Matricization:
    """Leading-split unfolding: the first ``split`` indices enumerate the rows,
    the remaining ones the columns. A pure reshape under column-major storage."""
    if not 1 <= split <= x.order - 1:
        raise ShapeError(f"split {split} out of range for order-{x.order} tensor")
    m = prod(x.dims[:split])
    n = prod(x.dims[split:])
    return Matricization(
        rows=m, cols=n, values=x.values, source_dims=x.dims, family="tt", index=split
    )


def fold(m: Matricization) -> DenseTensor:
    """Exact inverse of the matricization that produced ``m``."""
    dims = m.source_dims
    if m.family == "tt":
        split = m.index
        if not 1 <= split <= len(dims) - 1 or m.rows != prod(dims[:split]):
            raise ShapeError(f"fold: split {m.index} inconsistent with dims {dims}")
        return DenseTensor(dims, m.values)
    mode = m.index
    if not 1 <= mode <= len(dims) or m.rows != dims[mode - 1]:
        raise ShapeError(f"fold: mode {m.index} inconsistent with dims {dims}")
    return DenseTensor.from_array(fold_mode_array(m.matrix, dims, mode - 1))


def mode_n_product(x: DenseTensor, mat, mode: int) -> DenseTensor:
    """Contract mode ``mode`` of ``x`` with the columns of ``mat``.

    ``mat`` has shape (J, I_mode); the result replaces that dimension by J.
    """
    if not 1 <= mode <= x.order:
        raise ShapeError(f"mode {mode} out of range for order-{x.order} tensor")
    a = np.asarray(mat, dtype=np.float64)
    if a.ndim != 2 or a.shape[1] != x.dims[mode - 1]:
        raise ShapeError(
            f"matrix shape {a.shape} cannot contract mode {mode} of dims {x.dims}"
        )
    moved = np.tensordot(a, x.array, axes=(1, mode - 1))  # (J, other modes...)
    return DenseTensor.from_array(np.moveaxis(moved, 0, mode - 1))


def inner_product(x: DenseTensor, y: DenseTensor) -> float:
    if x.dims != y.dims:
        raise ShapeError(f"inner product needs identical dims, got {x.dims} and {y.dims}")
    return float(np.dot(x.values, y.values))


def frobenius_norm(x: DenseTensor) -> float:
    return float(np.linalg.norm(x.values))
