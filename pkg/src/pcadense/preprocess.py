"""Training-data preprocessing: invalid-pixel fill and box blur.

The training pipeline order is fill -> blur.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .types import DepthMap

# chunk the invalid-pixel distance scan to bound memory at ~CHUNK * n_valid floats
_FILL_CHUNK = 4096


def fill_invalid_nearest(depth: DepthMap) -> DepthMap:
    """Replace every invalid pixel with its nearest valid pixel's value.

    Distance is Euclidean in pixel coordinates; ties resolve to the valid
    source pixel with the lowest row-major index.  Valid pixels pass
    through unchanged.
    """
    mask = depth.valid_mask()
    if not mask.any():
        raise ValidationError("cannot fill a map with no valid pixels")
    if mask.all():
        return depth

    h, w = depth.values.shape
    valid_r, valid_c = np.nonzero(mask)          # row-major order
    valid_vals = depth.values[valid_r, valid_c]
    inv_r, inv_c = np.nonzero(~mask)

    out = depth.values.copy()
    for start in range(0, inv_r.size, _FILL_CHUNK):
        rr = inv_r[start:start + _FILL_CHUNK]
        cc = inv_c[start:start + _FILL_CHUNK]
        # integer squared distances make ties exact; argmin takes the first
        # minimum, i.e. the lowest row-major source index
        d2 = (rr[:, None] - valid_r[None, :]) ** 2 + (cc[:, None] - valid_c[None, :]) ** 2
        out[rr, cc] = valid_vals[np.argmin(d2, axis=1)]
    return DepthMap(out)


def box_blur(depth: DepthMap, kernel: int = 5) -> DepthMap:
    """Mean filter with a kernel x kernel window, edge-replicated borders."""
    if kernel < 1 or kernel % 2 == 0:
        raise ValidationError(f"kernel must be odd and >= 1, got {kernel}")
    if not depth.fully_valid():
        raise ValidationError("box_blur requires a fully valid map; fill first")
    if kernel == 1:
        return depth

    r = kernel // 2
    padded = np.pad(depth.values, r, mode="edge")
    # separable box filter via summed-area table
    integral = np.zeros((padded.shape[0] + 1, padded.shape[1] + 1))
    np.cumsum(padded, axis=0, out=integral[1:, 1:])
    np.cumsum(integral[1:, 1:], axis=1, out=integral[1:, 1:])
    h, w = depth.values.shape
    sums = (
        integral[kernel:kernel + h, kernel:kernel + w]
        - integral[:h, kernel:kernel + w]
        - integral[kernel:kernel + h, :w]
        + integral[:h, :w]
    )
    return DepthMap(sums / (kernel * kernel))
