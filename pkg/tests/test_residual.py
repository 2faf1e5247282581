import numpy as np
import pytest

from rangemos import ProjectionConfig, range_residual, spherical_project
from rangemos.errors import ShapeMismatchError
from rangemos.projection import RangeImage

from conftest import random_cloud

SMALL = ProjectionConfig(width=128, height=32)


def _image(ranges: np.ndarray, valid: np.ndarray, cfg=SMALL) -> RangeImage:
    """Build a bare range image fixture; only range and valid matter here."""
    zeros = np.zeros_like(ranges)
    return RangeImage(
        config=cfg,
        range=ranges,
        x=ranges.copy(),
        y=zeros.copy(),
        z=zeros.copy(),
        intensity=zeros.copy(),
        valid=valid,
        source_point=np.where(valid, 0, -1),
        n_source_points=1,
    )


def _full(value: float, cfg=SMALL) -> np.ndarray:
    return np.full((cfg.height, cfg.width), value)


class TestRangeResidual:
    def test_identical_images_zero(self, kernel_backend):
        rng = np.random.default_rng(0)
        cloud = random_cloud(rng, 2000, SMALL.fov_up, SMALL.fov_down)
        img, _ = spherical_project(cloud, SMALL)
        res = range_residual(img, img)
        assert (res.values == 0).all()
        np.testing.assert_array_equal(res.valid, img.valid)

    def test_hand_value(self):
        cur = _image(_full(10.0), np.ones((32, 128), dtype=bool))
        prev = _image(_full(12.0), np.ones((32, 128), dtype=bool))
        res = range_residual(cur, prev)
        assert res.values[0, 0] == pytest.approx(0.2)
        assert (res.values == res.values[0, 0]).all()

    def test_invalid_current_pixel_is_zero(self):
        valid = np.ones((32, 128), dtype=bool)
        valid[3, 7] = False
        cur = _image(_full(10.0), valid)
        prev = _image(_full(12.0), np.ones((32, 128), dtype=bool))
        res = range_residual(cur, prev)
        assert res.values[3, 7] == 0.0
        assert not res.valid[3, 7]

    def test_invalid_transformed_pixel_is_zero(self):
        valid = np.ones((32, 128), dtype=bool)
        valid[5, 9] = False
        cur = _image(_full(10.0), np.ones((32, 128), dtype=bool))
        prev = _image(_full(12.0), valid)
        res = range_residual(cur, prev)
        assert res.values[5, 9] == 0.0

    def test_nonnegative_and_finite(self, kernel_backend):
        rng = np.random.default_rng(1)
        cur_cloud = random_cloud(rng, 3000, SMALL.fov_up, SMALL.fov_down)
        prev_cloud = random_cloud(rng, 3000, SMALL.fov_up, SMALL.fov_down)
        cur, _ = spherical_project(cur_cloud, SMALL)
        prev, _ = spherical_project(prev_cloud, SMALL)
        res = range_residual(cur, prev)
        assert np.isfinite(res.values).all()
        assert (res.values >= 0).all()
        assert (res.values[~res.valid] == 0).all()

    def test_monotone_in_gap(self):
        ones = np.ones((32, 128), dtype=bool)
        cur = _image(_full(10.0), ones)
        near = range_residual(cur, _image(_full(11.0), ones))
        far = range_residual(cur, _image(_full(14.0), ones))
        assert far.values[0, 0] > near.values[0, 0]

    def test_dimension_mismatch(self):
        cur = _image(_full(10.0), np.ones((32, 128), dtype=bool))
        other_cfg = ProjectionConfig(width=64, height=32)
        prev = _image(
            np.full((32, 64), 12.0), np.ones((32, 64), dtype=bool), cfg=other_cfg
        )
        with pytest.raises(ShapeMismatchError):
            range_residual(cur, prev)
