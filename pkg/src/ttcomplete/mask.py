"""Observation masks: which entries of a tensor are known, and their values."""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from .errors import ShapeError
from .tensor import DenseTensor, _checked_dims, element_offset


@dataclass(frozen=True, eq=False)
class ObservationMask:
    """Observed entries of a partially known tensor.

    ``offsets`` are the flat column-major offsets of the observed entries,
    strictly increasing; ``values`` holds the matching entries. Everything
    not listed is missing.
    """

    dims: tuple[int, ...]
    offsets: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        dims = _checked_dims(self.dims)
        offsets = np.asarray(self.offsets, dtype=np.int64).reshape(-1)
        values = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        total = prod(dims)
        if offsets.size != values.size:
            raise ShapeError(
                f"{offsets.size} offsets but {values.size} values in observation mask"
            )
        if offsets.size:
            if offsets[0] < 0 or offsets[-1] >= total or (np.diff(offsets) <= 0).any():
                raise ShapeError("mask offsets must be strictly increasing and in range")
        offsets = offsets.copy()
        offsets.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_offsets(cls, source: DenseTensor, offsets) -> "ObservationMask":
        """Mask observing the given flat offsets of ``source``."""
        offsets = np.sort(np.asarray(offsets, dtype=np.int64).reshape(-1))
        return cls(source.dims, offsets, source.values[offsets])

    @classmethod
    def from_indices(cls, dims, indices, values) -> "ObservationMask":
        """Mask from 1-based multi-indices plus matching values."""
        dims = _checked_dims(dims)
        offsets = np.array([element_offset(ix, dims) for ix in indices], dtype=np.int64)
        order = np.argsort(offsets)
        return cls(dims, offsets[order], np.asarray(values, dtype=np.float64)[order])

    @classmethod
    def full(cls, source: DenseTensor) -> "ObservationMask":
        return cls(source.dims, np.arange(source.size, dtype=np.int64), source.values)

    @property
    def count(self) -> int:
        return int(self.offsets.size)

    @property
    def total(self) -> int:
        return prod(self.dims)

    @property
    def missing_ratio(self) -> float:
        return 1.0 - self.count / self.total

    def observed_flags(self) -> np.ndarray:
        """Boolean flat array, True where observed."""
        flags = np.zeros(self.total, dtype=bool)
        flags[self.offsets] = True
        return flags

    def missing_offsets(self) -> np.ndarray:
        return np.flatnonzero(~self.observed_flags())
