"""Parametric road-scene-like disparity map generator.

Scenes are a sky band above a sloped ground plane with axis-aligned boxes
composited in front (larger disparity = nearer, so a box only overwrites
pixels it is nearer than).  All randomness comes from numpy's PCG64
generator seeded explicitly, so corpora are reproducible bit-for-bit; the
per-scene streams of a corpus are derived via SeedSequence.spawn, making
scene generation order-independent.
"""

from __future__ import annotations

from dataclasses import dataclass, replace, asdict

import numpy as np

from .errors import ValidationError
from .types import DepthMap, TrainingSet


@dataclass(frozen=True)
class SceneParams:
    width: int = 64
    height: int = 20
    horizon_row: int = 6
    ground_slope: float = 1.5      # disparity px per image row below the horizon
    box_count: int = 3
    box_disparity_min: float = 5.0
    box_disparity_max: float = 30.0
    sky_disparity: float = 0.5
    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValidationError("scene dimensions must be positive")
        if not (0 <= self.horizon_row < self.height):
            raise ValidationError("horizon_row must lie inside the image")
        if self.ground_slope <= 0:
            raise ValidationError("ground_slope must be > 0")
        if self.box_count < 0:
            raise ValidationError("box_count must be >= 0")
        if not (0 <= self.box_disparity_min <= self.box_disparity_max):
            raise ValidationError("box disparity range must be 0 <= min <= max")
        if self.sky_disparity < 0 or self.noise_std < 0:
            raise ValidationError("sky_disparity and noise_std must be >= 0")


def generate_scene(params: SceneParams) -> DepthMap:
    """One deterministic scene for the given parameters and seed."""
    rng = np.random.default_rng(params.seed)
    rows = np.arange(params.height, dtype=np.float64)
    background = np.where(
        rows < params.horizon_row,
        params.sky_disparity,
        params.ground_slope * (rows - params.horizon_row) + params.sky_disparity,
    )
    disp = np.tile(background[:, None], (1, params.width))

    for _ in range(params.box_count):
        r0 = int(rng.integers(0, params.height))
        c0 = int(rng.integers(0, params.width))
        bh = int(rng.integers(1, max(2, params.height // 2)))
        bw = int(rng.integers(1, max(2, params.width // 2)))
        d = float(rng.uniform(params.box_disparity_min, params.box_disparity_max))
        patch = disp[r0:r0 + bh, c0:c0 + bw]
        np.maximum(patch, d, out=patch)

    if params.noise_std > 0:
        disp = disp + rng.normal(0.0, params.noise_std, size=disp.shape)
    return DepthMap(np.maximum(disp, 0.0))


# fields generate_training_set may jitter, in draw order
JITTERABLE_FIELDS = (
    "horizon_row",
    "ground_slope",
    "sky_disparity",
    "box_disparity_min",
    "box_disparity_max",
)


def generate_training_set(
    n: int,
    base: SceneParams,
    jitter=0.2,
    seed: int = 0,
) -> TrainingSet:
    """n scenes with independently jittered parameters.

    jitter is either one relative spread applied to every jitterable field
    or a mapping {field: spread}.  A jittered scalar is scaled by a
    uniform factor in [1 - spread, 1 + spread]; horizon_row instead moves
    by up to spread * height rows (clipped to the image).  Zero spread
    everywhere reproduces base exactly, which learn_basis then rejects as
    degenerate when boxes and noise are off.
    """
    if n < 2:
        raise ValidationError("training set needs n >= 2")
    if isinstance(jitter, dict):
        unknown = set(jitter) - set(JITTERABLE_FIELDS)
        if unknown:
            raise ValidationError(f"unknown jitter field(s): {sorted(unknown)}")
        spreads = {f: float(jitter.get(f, 0.0)) for f in JITTERABLE_FIELDS}
    else:
        spreads = {f: float(jitter) for f in JITTERABLE_FIELDS}
    if any(s < 0 for s in spreads.values()):
        raise ValidationError("jitter spreads must be >= 0")

    children = np.random.SeedSequence(seed).spawn(n)
    maps = []
    for child in children:
        rng = np.random.default_rng(child)
        new = {}
        for name in JITTERABLE_FIELDS:
            spread = spreads[name]
            value = getattr(base, name)
            if spread == 0:
                new[name] = value
            elif name == "horizon_row":
                shift = int(round(rng.uniform(-spread, spread) * base.height))
                new[name] = int(np.clip(value + shift, 0, base.height - 1))
            else:
                new[name] = value * rng.uniform(1 - spread, 1 + spread)
        new["box_disparity_max"] = max(new["box_disparity_max"], new["box_disparity_min"])
        params = replace(base, seed=int(rng.integers(0, 2**63 - 1)), **new)
        maps.append(generate_scene(params))
    return TrainingSet(tuple(maps))


def params_to_dict(params: SceneParams) -> dict:
    return asdict(params)


def params_from_dict(data: dict) -> SceneParams:
    known = {f for f in SceneParams.__dataclass_fields__}
    unknown = set(data) - known
    if unknown:
        raise ValidationError(f"unknown scene parameter(s): {sorted(unknown)}")
    fields = SceneParams.__dataclass_fields__
    coerced = {}
    for k, v in data.items():
        typ = fields[k].type
        coerced[k] = int(v) if typ == "int" else float(v)
    return SceneParams(**coerced)
