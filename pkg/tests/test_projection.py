import numpy as np
import pytest

from rangemos import PointCloud, ProjectionConfig, back_project, spherical_project
from rangemos.errors import ShapeMismatchError
from rangemos.projection import RangeImage

from _oracles import brute_force_project
from conftest import random_cloud

HDL64 = ProjectionConfig()
SMALL = ProjectionConfig(width=256, height=32)


class TestSphericalProject:
    def test_forward_point_hits_center_column(self, kernel_backend):
        cloud = PointCloud(np.array([[10.0, 0.0, 0.0]]), np.array([0.25]))
        img, pixmap = spherical_project(cloud, HDL64)
        assert (pixmap.u[0], pixmap.v[0]) == (1024, 6)
        assert img.valid[6, 1024]
        assert img.range[6, 1024] == 10.0
        assert img.intensity[6, 1024] == 0.25
        assert img.source_point[6, 1024] == 0

    def test_empty_cloud(self, kernel_backend):
        cloud = PointCloud(np.zeros((0, 3)), np.zeros(0))
        img, pixmap = spherical_project(cloud, HDL64)
        assert not img.valid.any()
        assert len(pixmap) == 0
        assert (img.range == HDL64.range_fill).all()

    def test_min_range_wins_contested_pixel(self, kernel_backend):
        cloud = PointCloud(
            np.array([[20.0, 0.0, 0.0], [10.0, 0.0, 0.0]]), np.array([0.1, 0.9])
        )
        img, pixmap = spherical_project(cloud, HDL64)
        assert pixmap.u.tolist() == [1024, 1024]  # both map, only one owns
        assert img.range[6, 1024] == 10.0
        assert img.source_point[6, 1024] == 1

    def test_tie_broken_by_lowest_index(self, kernel_backend):
        cloud = PointCloud(
            np.array([[10.0, 0.0, 0.0], [10.0, 0.0, 0.0]]), np.array([0.0, 1.0])
        )
        img, _ = spherical_project(cloud, HDL64)
        assert img.source_point[6, 1024] == 0

    def test_out_of_fov_dropped(self, kernel_backend):
        # pitch 45 deg is far above fov_up = 3 deg
        cloud = PointCloud(np.array([[1.0, 0.0, 1.0]]), np.zeros(1))
        img, pixmap = spherical_project(cloud, HDL64)
        assert not img.valid.any()
        assert pixmap.u[0] == -1
        assert np.isfinite(pixmap.u_f[0])  # continuous coords survive the drop

    def test_degenerate_range_skipped(self, kernel_backend):
        cloud = PointCloud(np.array([[1e-9, 0.0, 0.0]]), np.zeros(1))
        img, pixmap = spherical_project(cloud, HDL64)
        assert not img.valid.any()
        assert np.isnan(pixmap.u_f[0])

    def test_yaw_wrap_clamps_to_last_column(self, kernel_backend):
        # atan2(-0, -1) = -pi puts u_f exactly at W; clamping keeps it at W-1.
        cloud = PointCloud(np.array([[-10.0, -0.0, 0.0]]), np.zeros(1))
        _, pixmap = spherical_project(cloud, HDL64)
        assert pixmap.u[0] == HDL64.width - 1

    def test_pitch_at_lower_boundary_kept(self, kernel_backend):
        r = 10.0
        z = r * np.sin(HDL64.fov_down)
        rho = r * np.cos(HDL64.fov_down)
        cloud = PointCloud(np.array([[rho, 0.0, z]]), np.zeros(1))
        img, pixmap = spherical_project(cloud, HDL64)
        assert img.valid.sum() == 1
        assert pixmap.v[0] == HDL64.height - 1

    def test_matches_brute_force_oracle(self, kernel_backend):
        rng = np.random.default_rng(11)
        for trial in range(5):
            cloud = random_cloud(rng, 1500, SMALL.fov_up, SMALL.fov_down)
            img, _ = spherical_project(cloud, SMALL)
            oracle = brute_force_project(
                cloud.xyz, SMALL.width, SMALL.height, SMALL.fov_up, SMALL.fov_down
            )
            got = {
                (v, u): img.source_point[v, u]
                for v, u in zip(*np.nonzero(img.valid))
            }
            assert got.keys() == oracle.keys()
            for key, index in got.items():
                assert index == oracle[key][0], key

    def test_bit_identical_across_runs(self, kernel_backend):
        rng = np.random.default_rng(5)
        cloud = random_cloud(rng, 4000, HDL64.fov_up, HDL64.fov_down)
        a, _ = spherical_project(cloud, HDL64)
        b, _ = spherical_project(cloud, HDL64)
        for name in ("range", "x", "y", "z", "intensity"):
            np.testing.assert_array_equal(a.channel(name), b.channel(name))
        np.testing.assert_array_equal(a.source_point, b.source_point)

    def test_channel_consistency(self, kernel_backend):
        rng = np.random.default_rng(6)
        cloud = random_cloud(rng, 3000, HDL64.fov_up, HDL64.fov_down)
        img, _ = spherical_project(cloud, HDL64)
        r = img.range[img.valid]
        recomputed = np.sqrt(
            img.x[img.valid] ** 2 + img.y[img.valid] ** 2 + img.z[img.valid] ** 2
        )
        np.testing.assert_allclose(recomputed, r, rtol=1e-5)


class TestBackProject:
    def test_reproduces_winning_points(self, kernel_backend):
        rng = np.random.default_rng(7)
        cloud = random_cloud(rng, 2000, SMALL.fov_up, SMALL.fov_down)
        img, _ = spherical_project(cloud, SMALL)
        back, pixels = back_project(img)
        owners = img.source_point.reshape(-1)[pixels]
        np.testing.assert_array_equal(back.xyz, cloud.xyz[owners])
        np.testing.assert_array_equal(back.intensity, cloud.intensity[owners])

    def test_empty_image(self, kernel_backend):
        cloud = PointCloud(np.zeros((0, 3)), np.zeros(0))
        img, _ = spherical_project(cloud, SMALL)
        back, pixels = back_project(img)
        assert len(back) == 0 and pixels.size == 0

    def test_single_pixel_read(self):
        cfg = ProjectionConfig(width=2, height=1)
        valid = np.array([[False, True]])
        img = RangeImage(
            config=cfg,
            range=np.array([[-1.0, 5.0]]),
            x=np.array([[0.0, 3.0]]),
            y=np.array([[0.0, 4.0]]),
            z=np.array([[0.0, 0.0]]),
            intensity=np.array([[0.0, 0.2]]),
            valid=valid,
            source_point=np.array([[-1, 0]]),
            n_source_points=1,
        )
        back, pixels = back_project(img)
        np.testing.assert_array_equal(back.xyz, [[3.0, 4.0, 0.0]])
        assert back.intensity.tolist() == [0.2]
        assert pixels.tolist() == [1]


class TestConfigValidation:
    def test_rejects_bad_fov(self):
        with pytest.raises(ValueError):
            ProjectionConfig(fov_up=-1.0, fov_down=1.0)

    def test_rejects_zero_size(self):
        with pytest.raises(ValueError):
            ProjectionConfig(width=0)

    def test_image_shape_checked(self):
        with pytest.raises(ShapeMismatchError):
            RangeImage(
                config=ProjectionConfig(width=4, height=2),
                range=np.zeros((2, 3)),
                x=np.zeros((2, 4)),
                y=np.zeros((2, 4)),
                z=np.zeros((2, 4)),
                intensity=np.zeros((2, 4)),
                valid=np.zeros((2, 4), dtype=bool),
                source_point=np.full((2, 4), -1),
                n_source_points=0,
            )
