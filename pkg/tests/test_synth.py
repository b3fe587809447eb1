"""Synthetic scene generator: determinism, compositing, corpus statistics."""

import numpy as np
import pytest

from pcadense import (
    DegenerateTrainingSetError,
    SceneParams,
    ValidationError,
    cumulative_variance_fraction,
    generate_scene,
    generate_training_set,
    learn_basis,
)


class TestGenerateScene:
    def test_background_formula(self):
        params = SceneParams(
            width=32, height=24, horizon_row=10, ground_slope=0.5,
            box_count=0, sky_disparity=0.0, noise_std=0.0,
        )
        scene = generate_scene(params)
        assert np.all(scene.values[20, :] == 5.0)
        assert np.all(scene.values[:10, :] == 0.0)

    def test_deterministic(self):
        params = SceneParams(box_count=5, noise_std=0.3, seed=99)
        a = generate_scene(params)
        b = generate_scene(params)
        assert np.array_equal(a.values, b.values)

    def test_boxes_only_raise_disparity(self):
        params = SceneParams(box_count=6, noise_std=0.0, seed=7)
        background = generate_scene(
            SceneParams(**{**params.__dict__, "box_count": 0})
        )
        scene = generate_scene(params)
        assert np.all(scene.values >= background.values - 1e-12)

    def test_occlusion_oracle(self):
        # re-derive compositing naively from the same RNG stream
        params = SceneParams(
            width=16, height=12, horizon_row=4, ground_slope=1.0,
            box_count=4, box_disparity_min=2.0, box_disparity_max=20.0,
            sky_disparity=0.5, noise_std=0.0, seed=123,
        )
        scene = generate_scene(params)
        rng = np.random.default_rng(123)
        rows = np.arange(12, dtype=float)
        bg = np.where(rows < 4, 0.5, 1.0 * (rows - 4) + 0.5)
        expected = np.tile(bg[:, None], (1, 16))
        for _ in range(4):
            r0 = int(rng.integers(0, 12))
            c0 = int(rng.integers(0, 16))
            bh = int(rng.integers(1, 6))
            bw = int(rng.integers(1, 8))
            d = float(rng.uniform(2.0, 20.0))
            for r in range(r0, min(r0 + bh, 12)):
                for c in range(c0, min(c0 + bw, 16)):
                    if d > expected[r, c]:
                        expected[r, c] = d
        assert np.array_equal(scene.values, expected)

    def test_no_sentinels_no_negatives(self):
        scene = generate_scene(SceneParams(box_count=4, noise_std=2.0, seed=5))
        assert scene.fully_valid()
        assert np.all(scene.values >= 0)

    def test_ground_monotone_without_boxes(self):
        scene = generate_scene(SceneParams(box_count=0, noise_std=0.0))
        ground = scene.values[scene.values.shape[0] - 5:, 0]
        assert np.all(np.diff(ground) >= 0)

    def test_bad_params_rejected(self):
        with pytest.raises(ValidationError):
            SceneParams(horizon_row=50, height=20)
        with pytest.raises(ValidationError):
            SceneParams(ground_slope=0.0)
        with pytest.raises(ValidationError):
            SceneParams(box_disparity_min=5.0, box_disparity_max=1.0)


class TestGenerateTrainingSet:
    def test_zero_jitter_degenerate(self):
        base = SceneParams(box_count=0, noise_std=0.0)
        ts = generate_training_set(5, base, jitter=0.0, seed=1)
        first = ts.maps[0].values
        for m in ts.maps[1:]:
            assert np.array_equal(m.values, first)
        with pytest.raises(DegenerateTrainingSetError):
            learn_basis(ts)

    def test_deterministic(self):
        base = SceneParams(box_count=3, noise_std=0.2)
        a = generate_training_set(6, base, jitter=0.2, seed=42)
        b = generate_training_set(6, base, jitter=0.2, seed=42)
        for ma, mb in zip(a.maps, b.maps):
            assert np.array_equal(ma.values, mb.values)

    def test_accepted_by_learn_basis(self):
        base = SceneParams(width=64, height=20, box_count=3, noise_std=0.2)
        ts = generate_training_set(200, base, jitter=0.25, seed=11)
        basis = learn_basis(ts)
        # empirical: this corpus needs several components for 90% variance
        assert basis.n_components >= 3

    def test_two_param_family_is_two_dimensional(self):
        base = SceneParams(width=32, height=16, horizon_row=5, box_count=0, noise_std=0.0)
        ts = generate_training_set(
            40, base,
            jitter={"ground_slope": 0.3, "sky_disparity": 0.3},
            seed=3,
        )
        basis = learn_basis(ts, min_variance_fraction=1.0)
        frac = cumulative_variance_fraction(basis.eigenvalues, basis.total_variance, 2)
        assert frac >= 0.99

    def test_unknown_jitter_field_rejected(self):
        with pytest.raises(ValidationError):
            generate_training_set(3, SceneParams(), jitter={"bogus": 0.1})

    def test_n_too_small(self):
        with pytest.raises(ValidationError):
            generate_training_set(1, SceneParams())
