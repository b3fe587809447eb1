"""Pinhole geometry, projection error measures, and frame evaluation.

Pixel points are (x, y) = (col, row).  Errors are reported as unsquared
Euclidean distances: Delta2D in px, Delta3D in meters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .densify import Reconstruction
from .errors import ValidationError
from .types import DepthMap, SparseMeasurement

DEFAULT_DEPTH_BIN_EDGES = (0.0, 10.0, 25.0, 50.0, 100.0, float("inf"))
DEFAULT_UNCERTAINTY_BINS = 5


@dataclass(frozen=True)
class CameraModel:
    """Pinhole intrinsics plus the stereo baseline/focal pair used for
    disparity-depth conversion."""

    fx: float
    fy: float
    cx: float
    cy: float
    baseline: float
    focal: float

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0 or self.focal <= 0:
            raise ValidationError("focal lengths must be positive")
        if self.baseline <= 0:
            raise ValidationError("baseline must be positive")

    def intrinsic_matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )


@dataclass(frozen=True)
class RigidTransform:
    """Rotation + translation; maps points from frame A into frame B."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64)
        t = np.asarray(self.translation, dtype=np.float64)
        if r.shape != (3, 3) or t.shape != (3,):
            raise ValidationError("rotation must be 3x3, translation length 3")
        if np.max(np.abs(r.T @ r - np.eye(3))) > 1e-9:
            raise ValidationError("rotation is not orthonormal")
        if abs(np.linalg.det(r) - 1.0) > 1e-9:
            raise ValidationError("rotation determinant must be +1")
        for name, arr in (("rotation", r), ("translation", t)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform(np.eye(3), np.zeros(3))

    def matrix(self) -> np.ndarray:
        p = np.eye(4)
        p[:3, :3] = self.rotation
        p[:3, 3] = self.translation
        return p

    def inverse(self) -> "RigidTransform":
        return RigidTransform(self.rotation.T, -self.rotation.T @ self.translation)


def disparity_to_depth(d: float, cam: CameraModel) -> float:
    """Depth w = b * f / d in meters."""
    if d <= 0:
        raise ValidationError(f"disparity must be > 0, got {d}")
    return cam.baseline * cam.focal / d


def depth_to_disparity(w: float, cam: CameraModel) -> float:
    if w <= 0:
        raise ValidationError(f"depth must be > 0, got {w}")
    return cam.baseline * cam.focal / w


def backproject(x: np.ndarray, w: float, cam: CameraModel) -> np.ndarray:
    """3D point X = w * K^-1 * (x; 1) for pixel x and depth w."""
    if w <= 0:
        raise ValidationError(f"depth must be > 0, got {w}")
    x = np.asarray(x, dtype=np.float64)
    return np.array(
        [w * (x[0] - cam.cx) / cam.fx, w * (x[1] - cam.cy) / cam.fy, w]
    )


def transform_point(transform: RigidTransform, point: np.ndarray) -> np.ndarray:
    """X_B = R X_A + t."""
    return transform.rotation @ np.asarray(point, dtype=np.float64) + transform.translation


def project_pi(cam: CameraModel, point: np.ndarray) -> np.ndarray:
    """Pixel projection pi(X) = (fx X/Z + cx, fy Y/Z + cy)."""
    point = np.asarray(point, dtype=np.float64)
    if point[2] <= 0:
        raise ValidationError("point is behind the camera (Z <= 0)")
    return np.array(
        [cam.fx * point[0] / point[2] + cam.cx, cam.fy * point[1] / point[2] + cam.cy]
    )


def error_3d(x_ref: np.ndarray, x_est: np.ndarray) -> float:
    """Euclidean 3D distance in meters."""
    return float(np.linalg.norm(np.asarray(x_ref, dtype=np.float64) - np.asarray(x_est, dtype=np.float64)))


def error_2d(x_ref: np.ndarray, x_est: np.ndarray) -> float:
    """Euclidean image-plane distance in px."""
    return float(np.linalg.norm(np.asarray(x_ref, dtype=np.float64) - np.asarray(x_est, dtype=np.float64)))


@dataclass(frozen=True)
class Histogram:
    """Binned per-point statistic: edges, counts, and per-bin means."""

    edges: np.ndarray
    counts: np.ndarray
    means: np.ndarray

    @staticmethod
    def from_points(key: np.ndarray, value: np.ndarray, edges: np.ndarray) -> "Histogram":
        edges = np.asarray(edges, dtype=np.float64)
        if edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ValidationError("bin edges must be strictly increasing")
        idx = np.clip(np.searchsorted(edges, key, side="right") - 1, 0, edges.size - 2)
        counts = np.zeros(edges.size - 1, dtype=np.int64)
        means = np.zeros(edges.size - 1)
        for b in range(edges.size - 1):
            sel = idx == b
            counts[b] = int(sel.sum())
            means[b] = float(value[sel].mean()) if counts[b] else float("nan")
        return Histogram(edges=edges, counts=counts, means=means)

    def to_dict(self) -> dict:
        return {
            "edges": [float(e) for e in self.edges],
            "counts": [int(c) for c in self.counts],
            "means": [None if np.isnan(m) else float(m) for m in self.means],
        }


@dataclass(frozen=True)
class EvalReport:
    """Per-point errors plus histograms and summary means."""

    rows: np.ndarray
    cols: np.ndarray
    delta2d: np.ndarray
    delta3d: np.ndarray
    uncertainty: Optional[np.ndarray]
    ref_depth: np.ndarray
    hist_2d_by_uncertainty: Optional[Histogram]
    hist_2d_by_depth: Histogram
    hist_3d_by_depth: Histogram
    n_discarded: int = 0

    @property
    def n_points(self) -> int:
        return self.delta2d.size

    def mean_delta2d(self) -> float:
        return float(self.delta2d.mean()) if self.n_points else float("nan")

    def mean_delta3d(self) -> float:
        return float(self.delta3d.mean()) if self.n_points else float("nan")

    def summary_dict(self) -> dict:
        return {
            "n_points": int(self.n_points),
            "n_discarded": int(self.n_discarded),
            "mean_delta2d_px": self.mean_delta2d(),
            "mean_delta3d_m": self.mean_delta3d(),
            "hist_2d_by_uncertainty": (
                self.hist_2d_by_uncertainty.to_dict()
                if self.hist_2d_by_uncertainty is not None
                else None
            ),
            "hist_2d_by_depth": self.hist_2d_by_depth.to_dict(),
            "hist_3d_by_depth": self.hist_3d_by_depth.to_dict(),
        }


def quantile_edges(values: np.ndarray, n_bins: int) -> np.ndarray:
    """Strictly increasing quantile bin edges covering all values."""
    qs = np.quantile(values, np.linspace(0.0, 1.0, n_bins + 1))
    qs[0] -= 1e-12
    qs[-1] += 1e-12
    # collapse duplicate quantiles from heavy ties
    for i in range(1, qs.size):
        if qs[i] <= qs[i - 1]:
            qs[i] = np.nextafter(qs[i - 1], np.inf)
    return qs


def evaluate_frame(
    recon: Reconstruction,
    reference: DepthMap,
    cam: CameraModel,
    pose: RigidTransform,
    eval_points: Optional[SparseMeasurement] = None,
    depth_bin_edges=DEFAULT_DEPTH_BIN_EDGES,
    uncertainty_bins: int = DEFAULT_UNCERTAINTY_BINS,
    bin_by_uncertainty: bool = True,
) -> EvalReport:
    """Delta2D/Delta3D at the evaluation points, binned by uncertainty and
    by reference depth.

    With eval_points=None every pixel with a valid positive reference
    disparity is evaluated (dense mode for synthetic ground truth).  A
    point survives only if both the reference and the estimated 3D point
    project in front of the camera and inside the image bounds after the
    rigid transform.
    """
    est = recon.dense
    if (est.width, est.height) != (reference.width, reference.height):
        raise ValidationError("reconstruction and reference dimensions differ")
    if bin_by_uncertainty and recon.uncertainty is None:
        raise ValidationError(
            "uncertainty binning requested but reconstruction has no uncertainty"
        )

    if eval_points is None:
        rr, cc = np.nonzero(np.isfinite(reference.values) & (reference.values > 0))
    else:
        if (eval_points.width, eval_points.height) != (reference.width, reference.height):
            raise ValidationError("eval point dimensions do not match reference")
        rr, cc = eval_points.rows, eval_points.cols

    keep_r, keep_c = [], []
    d2d, d3d, unc, wref = [], [], [], []
    n_discarded = 0
    for r, c in zip(rr, cc):
        d_ref = reference.values[r, c]
        d_est = est.values[r, c]
        if not np.isfinite(d_ref) or d_ref <= 0 or d_est <= 0:
            n_discarded += 1
            continue
        x = np.array([float(c), float(r)])
        p_ref = transform_point(pose, backproject(x, disparity_to_depth(d_ref, cam), cam))
        p_est = transform_point(pose, backproject(x, disparity_to_depth(d_est, cam), cam))
        if p_ref[2] <= 0 or p_est[2] <= 0:
            n_discarded += 1
            continue
        px_ref = project_pi(cam, p_ref)
        px_est = project_pi(cam, p_est)
        inside = all(
            0 <= p[0] < reference.width and 0 <= p[1] < reference.height
            for p in (px_ref, px_est)
        )
        if not inside:
            n_discarded += 1
            continue
        keep_r.append(int(r))
        keep_c.append(int(c))
        d2d.append(error_2d(px_ref, px_est))
        d3d.append(error_3d(p_ref, p_est))
        wref.append(disparity_to_depth(d_ref, cam))
        if recon.uncertainty is not None:
            unc.append(recon.uncertainty[r * reference.width + c])

    d2d = np.asarray(d2d)
    d3d = np.asarray(d3d)
    wref = np.asarray(wref)
    unc_arr = np.asarray(unc) if recon.uncertainty is not None else None

    depth_edges = np.asarray(depth_bin_edges, dtype=np.float64)
    hist_unc = None
    if bin_by_uncertainty and d2d.size:
        hist_unc = Histogram.from_points(
            unc_arr, d2d, quantile_edges(unc_arr, uncertainty_bins)
        )
    empty = Histogram(
        edges=depth_edges,
        counts=np.zeros(depth_edges.size - 1, dtype=np.int64),
        means=np.full(depth_edges.size - 1, np.nan),
    )
    return EvalReport(
        rows=np.asarray(keep_r, dtype=np.int64),
        cols=np.asarray(keep_c, dtype=np.int64),
        delta2d=d2d,
        delta3d=d3d,
        uncertainty=unc_arr,
        ref_depth=wref,
        hist_2d_by_uncertainty=hist_unc,
        hist_2d_by_depth=Histogram.from_points(wref, d2d, depth_edges) if d2d.size else empty,
        hist_3d_by_depth=Histogram.from_points(wref, d3d, depth_edges) if d3d.size else empty,
        n_discarded=n_discarded,
    )


def select_samples(
    depth: DepthMap,
    strategy: str,
    k: int = 0,
    step: int = 0,
    seed: int = 0,
    min_spacing: float = 5.0,
) -> SparseMeasurement:
    """Pick sample locations on a map and read their disparities.

    Strategies: 'random' draws k valid pixels without replacement from a
    seeded generator; 'grid' takes every step-th pixel; 'gradient' ranks
    valid pixels by finite-difference magnitude and keeps the top k
    greedily with a minimum pairwise spacing.
    """
    mask = depth.valid_mask()
    if strategy == "grid":
        if step < 1:
            raise ValidationError("grid step must be >= 1")
        rr, cc = np.mgrid[0:depth.height:step, 0:depth.width:step]
        rr, cc = rr.reshape(-1), cc.reshape(-1)
        ok = mask[rr, cc]
        rr, cc = rr[ok], cc[ok]
    elif strategy == "random":
        if k < 1:
            raise ValidationError("k must be >= 1")
        vr, vc = np.nonzero(mask)
        if vr.size < k:
            raise ValidationError(f"only {vr.size} valid pixels, need {k}")
        rng = np.random.default_rng(seed)
        pick = rng.choice(vr.size, size=k, replace=False)
        rr, cc = vr[pick], vc[pick]
    elif strategy == "gradient":
        if k < 1:
            raise ValidationError("k must be >= 1")
        vals = np.where(mask, depth.values, 0.0)
        gy, gx = np.gradient(vals)
        score = np.hypot(gx, gy)
        score[~mask] = -np.inf
        order = np.argsort(-score.reshape(-1), kind="stable")
        rr_list, cc_list = [], []
        for flat in order:
            r, c = divmod(int(flat), depth.width)
            if not mask[r, c]:
                break
            if all(
                (r - pr) ** 2 + (c - pc) ** 2 >= min_spacing**2
                for pr, pc in zip(rr_list, cc_list)
            ):
                rr_list.append(r)
                cc_list.append(c)
                if len(rr_list) == k:
                    break
        if len(rr_list) < k:
            raise ValidationError(
                f"could not place {k} samples with spacing {min_spacing}"
            )
        rr, cc = np.asarray(rr_list), np.asarray(cc_list)
    else:
        raise ValidationError(f"unknown sampling strategy {strategy!r}")

    return SparseMeasurement(
        width=depth.width,
        height=depth.height,
        rows=rr,
        cols=cc,
        disparities=depth.values[rr, cc],
    )
