"""Core domain types: depth maps, training sets, sparse measurements.

Depth values are disparities in pixels throughout.  Invalid pixels are
marked with NaN (the sentinel); every valid disparity is finite and >= 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

INVALID = np.nan


def is_valid(values: np.ndarray) -> np.ndarray:
    """Boolean mask of valid (non-sentinel) pixels."""
    return np.isfinite(values)


@dataclass(frozen=True)
class DepthMap:
    """Dense 2D disparity field, shape (height, width), float64.

    NaN marks invalid pixels; +-inf is rejected.  Physical disparities are
    >= 0, but reconstructions from a linear model may dip below zero, so
    negative values are representable.  Immutable: the backing array is
    set read-only at construction.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValidationError(
                f"depth map must be 2D with positive dimensions, got shape {v.shape}"
            )
        if np.any(np.isinf(v)):
            raise ValidationError(
                "depth map values must be NaN (invalid) or finite"
            )
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def vector(self) -> np.ndarray:
        """Row-major flattened view of length width*height."""
        return self.values.reshape(-1)

    def valid_mask(self) -> np.ndarray:
        return is_valid(self.values)

    def fully_valid(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    @staticmethod
    def from_vector(vec: np.ndarray, width: int, height: int) -> "DepthMap":
        vec = np.asarray(vec, dtype=np.float64)
        if vec.size != width * height:
            raise ValidationError(
                f"vector length {vec.size} != width*height = {width * height}"
            )
        return DepthMap(vec.reshape(height, width))


@dataclass(frozen=True)
class TrainingSet:
    """Ordered corpus of fully valid, same-sized depth maps."""

    maps: tuple

    def __post_init__(self):
        maps = tuple(self.maps)
        if len(maps) < 2:
            raise ValidationError("training set needs at least 2 maps")
        w, h = maps[0].width, maps[0].height
        for i, m in enumerate(maps):
            if (m.width, m.height) != (w, h):
                raise ValidationError(
                    f"training map {i} has size {m.width}x{m.height}, expected {w}x{h}"
                )
            if not m.fully_valid():
                raise ValidationError(
                    f"training map {i} contains invalid pixels; preprocess first"
                )
        object.__setattr__(self, "maps", maps)

    @property
    def n(self) -> int:
        return len(self.maps)

    @property
    def width(self) -> int:
        return self.maps[0].width

    @property
    def height(self) -> int:
        return self.maps[0].height

    def as_matrix(self) -> np.ndarray:
        """Stack the corpus as an s x n matrix (one map per column)."""
        return np.stack([m.vector for m in self.maps], axis=1)


@dataclass(frozen=True)
class SparseMeasurement:
    """Sparse disparity observations: (row, col, disparity) within a frame."""

    width: int
    height: int
    rows: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    cols: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    disparities: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        disp = np.asarray(self.disparities, dtype=np.float64)
        if not (rows.shape == cols.shape == disp.shape) or rows.ndim != 1:
            raise ValidationError("rows, cols, disparities must be equal-length 1D")
        if self.width < 1 or self.height < 1:
            raise ValidationError("frame dimensions must be positive")
        if rows.size:
            if rows.min() < 0 or rows.max() >= self.height:
                raise ValidationError("measurement row out of bounds")
            if cols.min() < 0 or cols.max() >= self.width:
                raise ValidationError("measurement col out of bounds")
            if not np.all(np.isfinite(disp)) or disp.min() < 0:
                raise ValidationError("disparities must be finite and >= 0")
            flat = rows * self.width + cols
            if np.unique(flat).size != flat.size:
                raise ValidationError("duplicate measurement coordinates")
        for name, arr in (("rows", rows), ("cols", cols), ("disparities", disp)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.rows.size

    @property
    def flat_indices(self) -> np.ndarray:
        """Row-major pixel indices of the measurements."""
        return self.rows * self.width + self.cols
